use std::io::Write;

use super::{Status, Trajectory};
use crate::quantum::ConfigSpace;

/// Writes `trajectory_id,jump_index,time,from_label,to_label,status`.
///
/// Row 0 of each trajectory is its start (empty `from_label`, `to_label`
/// the initial configuration); rows `1..=n` are the jumps. Cemetery and
/// node-guard paths get one more row at `end_time` with `to_label`
/// `CEMETERY` or `NODE`. Times use the shortest round-trip representation.
pub fn write_trajectories_csv<W: Write>(
    out: W,
    space: &ConfigSpace,
    trajectories: &[Trajectory],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trajectory_id", "jump_index", "time", "from_label", "to_label", "status"])?;
    for (id, tr) in trajectories.iter().enumerate() {
        let id = id.to_string();
        let status = tr.status.as_str();
        w.write_record([
            id.as_str(),
            "0",
            &tr.t0.to_string(),
            "",
            space.label(tr.x0),
            status,
        ])?;
        for (k, j) in tr.jumps.iter().enumerate() {
            w.write_record([
                id.as_str(),
                &(k + 1).to_string(),
                &j.time.to_string(),
                space.label(j.from),
                space.label(j.to),
                status,
            ])?;
        }
        let terminal = match tr.status {
            Status::Cemetery => Some("CEMETERY"),
            Status::NodeGuard => Some("NODE"),
            _ => None,
        };
        if let Some(to) = terminal {
            w.write_record([
                id.as_str(),
                &(tr.jumps.len() + 1).to_string(),
                &tr.end_time.to_string(),
                space.label(tr.final_position()),
                to,
                status,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::JumpRecord;

    #[test]
    fn rows_and_quoting() {
        let space = ConfigSpace::new(["[0 1]", "a,b"]).unwrap();
        let mut tr = Trajectory::new(0, 0.0, 2.0);
        tr.jumps.push(JumpRecord { time: 0.5, from: 0, to: 1 });
        tr.status = Status::Cemetery;
        tr.end_time = 1.25;
        let mut buf = Vec::new();
        write_trajectories_csv(&mut buf, &space, &[tr]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "trajectory_id,jump_index,time,from_label,to_label,status\n\
             0,0,0,,[0 1],CEMETERY\n\
             0,1,0.5,[0 1],\"a,b\",CEMETERY\n\
             0,2,1.25,\"a,b\",CEMETERY,CEMETERY\n"
        );
    }
}
