//! Small numerical kernels shared across the crate: adaptive Simpson
//! quadrature, a Dormand–Prince integrator for scalar ODEs, pairwise
//! summation and goodness-of-fit statistics.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate:e})")]
    QuadratureDiverged { a: f64, b: f64, estimate: f64 },
    #[error("integrand is not finite at t = {at}")]
    NonFiniteIntegrand { at: f64 },
    #[error("ODE step size underflow at t = {at}")]
    StepUnderflow { at: f64 },
    #[error("ODE exceeded {0} steps")]
    TooManySteps(usize),
}

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Fails when the integrand produces a non-finite value or when the recursion
/// depth is exhausted without meeting the local error criterion.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, NumericError>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut eval = |t: f64| {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericError::NonFiniteIntegrand { at: t })
        }
    };
    let fa = eval(lo)?;
    let fb = eval(hi)?;
    let m = 0.5 * (lo + hi);
    let fm = eval(m)?;
    let whole = simpson(lo, hi, fa, fm, fb);
    let v = simpson_panel(&mut eval, lo, hi, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)?;
    Ok(sign * v)
}

#[inline]
pub(crate) fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_panel<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, NumericError>
where
    F: FnMut(f64) -> Result<f64, NumericError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(NumericError::QuadratureDiverged {
            a,
            b,
            estimate: left + right,
        });
    }
    let l = simpson_panel(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_panel(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Composite Simpson rule on uniformly spaced samples (odd count required;
/// falls back to the trapezoid rule on the last interval otherwise).
pub fn simpson_samples(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let panels = if (n - 1).is_multiple_of(2) { n - 1 } else { n - 2 };
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 <= panels {
        acc += dt / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
        i += 2;
    }
    if panels < n - 1 {
        acc += 0.5 * dt * (values[n - 2] + values[n - 1]);
    }
    acc
}

/// Pairwise (cascade) summation; order-independent up to the fixed split.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and the continuous CDF `cdf`.
pub fn ks_statistic<F: FnMut(f64) -> f64>(samples: &[f64], mut cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic 95% critical value of the one-sample KS statistic.
pub fn ks_critical_95(n: usize) -> f64 {
    1.36 / (n as f64).sqrt()
}

/// Total variation distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let diffs: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a - b).abs()).collect();
    0.5 * pairwise_sum(&diffs)
}

/// Accepted step of a scalar ODE integration: time, state and slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 1_000_000,
        }
    }
}

/// Error from an ODE right-hand side or from the stepper itself.
#[derive(Debug, Clone, PartialEq)]
pub enum OdeFailure<E> {
    Field(E),
    Stepper(NumericError),
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `dx/dt = f(t, x)` from `t0` to `t1` (either direction) with the
/// Dormand–Prince 5(4) pair, returning every accepted step including both ends.
pub fn dormand_prince<F, E>(
    mut f: F,
    t0: f64,
    x0: f64,
    t1: f64,
    opts: OdeOptions,
) -> Result<Vec<OdeSample>, OdeFailure<E>>
where
    F: FnMut(f64, f64) -> Result<f64, E>,
{
    let v0 = f(t0, x0).map_err(OdeFailure::Field)?;
    let mut out = vec![OdeSample { t: t0, x: x0, v: v0 }];
    if t0 == t1 {
        return Ok(out);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut h = (span / 100.0).min(1e-2 * (1.0 + span));
    let h_min = 1e-14 * (1.0 + t0.abs().max(t1.abs()));
    let (mut t, mut x, mut k1) = (t0, x0, v0);
    let mut k = [0.0f64; 7];

    for _ in 0..opts.max_steps {
        let remaining = (t1 - t).abs();
        if remaining <= h_min {
            break;
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let hs = dir * step;

        k[0] = k1;
        for s in 1..7 {
            let mut xs = x;
            for (j, kj) in k.iter().enumerate().take(s) {
                xs += hs * A[s][j] * kj;
            }
            k[s] = f(t + C[s] * hs, xs).map_err(OdeFailure::Field)?;
        }
        // FSAL: stage 7 is evaluated at the 5th-order solution.
        let x_new = x + hs * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
        let x_low = x + hs * (0..7).map(|j| B_LOW[j] * k[j]).sum::<f64>();
        let scale = opts.atol + opts.rtol * x.abs().max(x_new.abs());
        let err = ((x_new - x_low) / scale).abs();

        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            x = x_new;
            k1 = k[6];
            out.push(OdeSample { t, x, v: k1 });
            if last {
                return Ok(out);
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = step * factor;
        if h < h_min {
            return Err(OdeFailure::Stepper(NumericError::StepUnderflow { at: t }));
        }
    }
    if (t1 - t).abs() <= h_min {
        return Ok(out);
    }
    Err(OdeFailure::Stepper(NumericError::TooManySteps(opts.max_steps)))
}

/// Cubic Hermite interpolation between two ODE samples.
pub fn hermite(a: &OdeSample, b: &OdeSample, t: f64) -> f64 {
    let h = b.t - a.t;
    if h == 0.0 {
        return a.x;
    }
    let s = (t - a.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * a.x + h10 * h * a.v + h01 * b.x + h11 * h * b.v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_integrates_polynomials_and_log_singularity() {
        let v = adaptive_simpson(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 9.0, epsilon = 1e-12);
        let v = adaptive_simpson(|x: f64| 2.0 * x.tan(), 0.0, 1.5, 1e-10).unwrap();
        assert_abs_diff_eq!(v, -2.0 * 1.5f64.cos().ln(), epsilon = 1e-8);
        let v = adaptive_simpson(|x| x, 1.0, 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn simpson_rejects_non_finite() {
        let err = adaptive_simpson(|x| 1.0 / (x - 0.5), 0.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, NumericError::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn dormand_prince_exponential_forward_and_back() {
        let path = dormand_prince::<_, ()>(|_, x| Ok(x), 0.0, 1.0, 2.0, OdeOptions::with_tol(1e-12)).unwrap();
        let end = path.last().unwrap();
        assert_eq!(end.t, 2.0);
        assert_abs_diff_eq!(end.x, 2f64.exp(), epsilon = 1e-9);
        let back = dormand_prince::<_, ()>(|_, x| Ok(x), 2.0, end.x, 0.0, OdeOptions::with_tol(1e-12)).unwrap();
        assert_abs_diff_eq!(back.last().unwrap().x, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn ks_and_tv_basics() {
        let samples: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&samples, |x| x) <= 1e-3 + 1e-12);
        assert_abs_diff_eq!(total_variation(&[0.5, 0.5], &[1.0, 0.0]), 0.5);
        assert_abs_diff_eq!(simpson_samples(&[0.0, 1.0, 4.0], 1.0), 8.0 / 3.0, epsilon = 1e-14);
    }
}
