use rand::Rng;
use rand_distr::Exp1;

use super::{ProcessError, Result, SamplerConfig};
use crate::numeric::simpson;
use crate::quantum::Evaluator;

const MAX_DEPTH: u32 = 50;
/// The first bracket is this fraction of the remaining window; later ones double.
const FIRST_BRACKET: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hazard {
    Finite(f64),
    /// The rate diverges (the occupied configuration runs into a node) at `at`.
    Divergent { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Holding {
    Jump(f64),
    NoJump,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Search {
    /// The hazard reaches the target at `time`; `singular` when this was
    /// forced by a node rather than by the integral.
    Crossed { time: f64, singular: bool },
    Exhausted { total: f64 },
}

/// Leaf of the left-to-right quadrature in which the target is crossed.
struct Crossing {
    lo: f64,
    hi: f64,
    before: f64,
    singular: bool,
}

struct Walker<'f, F> {
    f: &'f mut F,
    target: f64,
    root_tol: f64,
    sum: f64,
}

impl<F: FnMut(f64) -> Option<f64>> Walker<'_, F> {
    /// Adaptive Simpson visiting leaves in order and stopping at the first
    /// leaf whose integral takes the running sum to the target. `None`
    /// samples mark singular points; they are refined down to `root_tol`.
    #[allow(clippy::too_many_arguments)]
    fn panel(
        &mut self,
        a: f64,
        b: f64,
        fa: Option<f64>,
        fm: Option<f64>,
        fb: Option<f64>,
        tol: f64,
        depth: u32,
    ) -> Option<Crossing> {
        let m = 0.5 * (a + b);
        let singular = fa.is_none() || fm.is_none() || fb.is_none();
        if singular && b - a <= self.root_tol {
            return Some(Crossing {
                lo: a,
                hi: b,
                before: self.sum,
                singular: true,
            });
        }
        let fl = (self.f)(0.5 * (a + m));
        let fr = (self.f)(0.5 * (m + b));
        if !singular && fl.is_some() && fr.is_some() {
            let (fa, fm, fb, fl, fr) = (fa.unwrap(), fm.unwrap(), fb.unwrap(), fl.unwrap(), fr.unwrap());
            let whole = simpson(a, b, fa, fm, fb);
            let left = simpson(a, m, fa, fl, fm);
            let right = simpson(m, b, fm, fr, fb);
            let delta = left + right - whole;
            // Below the time resolution further refinement cannot help.
            if delta.abs() <= 15.0 * tol || depth == 0 || b - a <= f64::EPSILON * b.abs().max(1.0) * 4.0 {
                let v = left + right + delta / 15.0;
                if self.sum + v >= self.target {
                    return Some(Crossing {
                        lo: a,
                        hi: b,
                        before: self.sum,
                        singular: false,
                    });
                }
                self.sum += v;
                return None;
            }
        }
        let depth = depth.saturating_sub(1);
        self.panel(a, m, fa, fl, fm, 0.5 * tol, depth)
            .or_else(|| self.panel(m, b, fm, fr, fb, 0.5 * tol, depth))
    }
}

/// Finds the first `t` in `(ta, tb]` where `int_ta^t f = target`, or reports
/// the full integral when it stays below the target.
pub(crate) fn invert_hazard<F>(f: &mut F, ta: f64, tb: f64, target: f64, quad_tol: f64, root_tol: f64) -> Search
where
    F: FnMut(f64) -> Option<f64>,
{
    let span = tb - ta;
    let mut walker = Walker {
        f,
        target,
        root_tol,
        sum: 0.0,
    };
    let mut a = ta;
    let mut width = span * FIRST_BRACKET;
    let mut fa = (walker.f)(a);
    let crossing = loop {
        if a >= tb {
            return Search::Exhausted { total: walker.sum };
        }
        let b = if tb - a <= width * 1.5 { tb } else { a + width };
        let fm = (walker.f)(0.5 * (a + b));
        let fb = (walker.f)(b);
        let tol = quad_tol * (b - a) / span;
        if let Some(c) = walker.panel(a, b, fa, fm, fb, tol, MAX_DEPTH) {
            break c;
        }
        a = b;
        fa = fb;
        width *= 2.0;
    };
    if crossing.singular {
        return Search::Crossed {
            time: 0.5 * (crossing.lo + crossing.hi),
            singular: true,
        };
    }
    // Bisection inside the converged leaf; one Simpson panel per step is
    // at least as accurate as the leaf estimate.
    let (mut lo, mut hi, mut before) = (crossing.lo, crossing.hi, crossing.before);
    let mut flo = (walker.f)(lo);
    while hi - lo > root_tol {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let fmid = (walker.f)(0.5 * (lo + m));
        let fm = (walker.f)(m);
        match (flo, fmid, fm) {
            (Some(x), Some(y), Some(z)) => {
                let part = simpson(lo, m, x, y, z);
                if before + part >= target {
                    hi = m;
                } else {
                    lo = m;
                    before += part;
                    flo = fm;
                }
            }
            _ => hi = m,
        }
    }
    Search::Crossed {
        time: 0.5 * (lo + hi),
        singular: false,
    }
}

fn check_interval(ta: f64, tb: f64) -> Result<()> {
    if ta.is_finite() && tb.is_finite() && ta <= tb {
        Ok(())
    } else {
        Err(ProcessError::InvalidInterval { from: ta, to: tb })
    }
}

fn node_guard(ev: &mut Evaluator<'_>, x: usize, t: f64) -> ProcessError {
    ProcessError::NodeGuard {
        config: x,
        time: t,
        mu: ev.mu(x, t),
    }
}

/// `int_ta^tb total(x, s) ds`, or the location where it diverges.
pub fn cumulative_hazard(
    ev: &mut Evaluator<'_>,
    x: usize,
    ta: f64,
    tb: f64,
    cfg: &SamplerConfig,
) -> Result<Hazard> {
    check_interval(ta, tb)?;
    if x >= ev.system().dim() {
        return Err(ProcessError::UnknownConfig(x));
    }
    if ev.total_rate(x, ta).is_none() {
        return Err(node_guard(ev, x, ta));
    }
    if ta == tb {
        return Ok(Hazard::Finite(0.0));
    }
    let mut f = |t: f64| ev.total_rate(x, t);
    Ok(
        match invert_hazard(&mut f, ta, tb, f64::INFINITY, cfg.quad_tol, cfg.root_tol) {
            Search::Exhausted { total } => Hazard::Finite(total),
            Search::Crossed { time, .. } => Hazard::Divergent { at: time },
        },
    )
}

/// Next jump time after `tk` for a path sitting in `x`, or `NoJump` if the
/// survival outlasts `horizon`.
pub fn sample_holding_time<R: Rng + ?Sized>(
    ev: &mut Evaluator<'_>,
    x: usize,
    tk: f64,
    horizon: f64,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Holding> {
    check_interval(tk, horizon)?;
    if x >= ev.system().dim() {
        return Err(ProcessError::UnknownConfig(x));
    }
    if ev.total_rate(x, tk).is_none() {
        return Err(node_guard(ev, x, tk));
    }
    let e: f64 = rng.sample(Exp1);
    if tk == horizon {
        return Ok(Holding::NoJump);
    }
    let target = e.min(cfg.hazard_cap);
    let mut f = |t: f64| ev.total_rate(x, t);
    Ok(
        match invert_hazard(&mut f, tk, horizon, target, cfg.quad_tol, cfg.root_tol) {
            Search::Exhausted { .. } => Holding::NoJump,
            Search::Crossed { time, .. } => Holding::Jump(time),
        },
    )
}
