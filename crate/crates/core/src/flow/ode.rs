//! Dormand–Prince 5(4) with FSAL and a PI step-size controller.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    pub h_max: f64,
    /// Initial step; `0` selects one automatically.
    pub h_init: f64,
    /// Steps smaller than `h_min_rel * max(1, |t|)` count as underflow.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            atol: 1e-10,
            rtol: 1e-9,
            h_max: f64::INFINITY,
            h_init: 0.0,
            h_min_rel: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhsError {
    OutOfDomain,
    NonFinite,
}

pub trait OdeSystem<const N: usize> {
    fn rhs(&mut self, t: f64, y: &[f64; N]) -> Result<[f64; N], RhsError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Reached,
    /// The observer asked to stop.
    Stopped,
    /// Step underflow caused by stage points leaving the domain.
    DomainExit,
    /// Step underflow caused by error growth or non-finite values.
    Singularity,
    MaxSteps,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn err_norm<const N: usize>(y: &[f64; N], y_new: &[f64; N], err: &[f64; N], tol: &Tolerances) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sk = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
        s += (err[i] / sk).powi(2);
    }
    (s / N as f64).sqrt()
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &mut S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    tol: &Tolerances,
) -> f64 {
    let norm = |v: &[f64; N]| {
        let mut s = 0.0;
        for i in 0..N {
            let sk = tol.atol + tol.rtol * y0[i].abs();
            s += (v[i] / sk).powi(2);
        }
        (s / N as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += h0 * f0[i];
    }
    let h1 = match sys.rhs(t0 + h0, &y1) {
        Ok(f1) => {
            let mut diff = [0.0; N];
            for i in 0..N {
                diff[i] = f1[i] - f0[i];
            }
            let d2 = norm(&diff) / h0;
            let dm = d1.max(d2);
            if dm <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / dm).powf(0.2)
            }
        }
        Err(_) => h0 * 0.1,
    };
    (100.0 * h0).min(h1).min(tol.h_max).min(span)
}

/// Integrates from `(t0, y0)` toward `t_end > t0`.
///
/// `observe(t, y, dy)` runs after each accepted step; returning `false`
/// stops the integration with [`StopReason::Stopped`].
pub fn dopri5<S, F, const N: usize>(
    sys: &mut S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: &Tolerances,
    mut observe: F,
) -> StopReason
where
    S: OdeSystem<N>,
    F: FnMut(f64, &[f64; N], &[f64; N]) -> bool,
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = match sys.rhs(t, &y) {
        Ok(f) => f,
        Err(RhsError::OutOfDomain) => return StopReason::DomainExit,
        Err(RhsError::NonFinite) => return StopReason::Singularity,
    };
    let span = t_end - t0;
    if span <= 0.0 {
        return StopReason::Reached;
    }
    let mut h = if tol.h_init > 0.0 {
        tol.h_init.min(span)
    } else {
        initial_step(sys, t0, &y, &k1, span, tol)
    };
    let mut err_old: f64 = 1e-4;
    let mut rejected = false;
    let mut last_failure = RhsError::NonFinite;
    let mut steps = 0usize;

    loop {
        if t >= t_end {
            return StopReason::Reached;
        }
        if steps >= tol.max_steps {
            return StopReason::MaxSteps;
        }
        let h_min = tol.h_min_rel * t.abs().max(1.0);
        if h < h_min {
            return match last_failure {
                RhsError::OutOfDomain => StopReason::DomainExit,
                RhsError::NonFinite => StopReason::Singularity,
            };
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        steps += 1;

        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        let mut failure = None;
        let mut y_stage = [0.0; N];
        for s in 1..7 {
            for i in 0..N {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            match sys.rhs(t + C[s] * h, &y_stage) {
                Ok(f) if f.iter().all(|v| v.is_finite()) => k[s] = f,
                Ok(_) => {
                    failure = Some(RhsError::NonFinite);
                    break;
                }
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failure {
            last_failure = e;
            h *= 0.5;
            rejected = true;
            continue;
        }
        // stage 7 is evaluated at y_new (FSAL)
        let y_new = y_stage;
        let mut err = [0.0; N];
        for i in 0..N {
            let mut acc = 0.0;
            for (s, ks) in k.iter().enumerate() {
                acc += E[s] * ks[i];
            }
            err[i] = h * acc;
        }
        let en = err_norm(&y, &y_new, &err, tol);
        if !en.is_finite() {
            last_failure = RhsError::NonFinite;
            h *= 0.25;
            rejected = true;
            continue;
        }
        if en <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k[6];
            let mut fac = SAFETY * en.max(1e-10).powf(-ALPHA) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected {
                fac = fac.min(1.0);
            }
            err_old = en.max(1e-4);
            rejected = false;
            last_failure = RhsError::NonFinite;
            if !observe(t, &y, &k1) {
                return StopReason::Stopped;
            }
            h = (h * fac).min(tol.h_max);
        } else {
            let fac = (SAFETY * en.powf(-0.2)).max(FAC_MIN);
            last_failure = RhsError::NonFinite;
            h *= fac;
            rejected = true;
        }
    }
}

/// Runs from `(t0, y0)` to exactly `t1` and returns the final state.
pub fn advance<S: OdeSystem<N>, const N: usize>(
    sys: &mut S,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: &Tolerances,
) -> Option<[f64; N]> {
    if t1 <= t0 {
        return Some(y0);
    }
    let mut out = y0;
    let reason = dopri5(sys, t0, y0, t1, tol, |_, y, _| {
        out = *y;
        true
    });
    (reason == StopReason::Reached).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem<2> for Oscillator {
        fn rhs(&mut self, _t: f64, y: &[f64; 2]) -> Result<[f64; 2], RhsError> {
            Ok([y[1], -y[0]])
        }
    }

    #[test]
    fn harmonic_oscillator_period() {
        let tol = Tolerances::default();
        let end = advance(&mut Oscillator, 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI, &tol).unwrap();
        assert!((end[0] - 1.0).abs() < 1e-8);
        assert!(end[1].abs() < 1e-8);
    }

    #[test]
    fn fifth_order_convergence_on_exponential() {
        struct Growth;
        impl OdeSystem<1> for Growth {
            fn rhs(&mut self, _t: f64, y: &[f64; 1]) -> Result<[f64; 1], RhsError> {
                Ok([y[0]])
            }
        }
        let tol = Tolerances {
            atol: 1e-13,
            rtol: 1e-12,
            ..Default::default()
        };
        let end = advance(&mut Growth, 0.0, [1.0], 1.0, &tol).unwrap();
        assert!((end[0] - std::f64::consts::E).abs() < 1e-10);
    }

    struct BlowUp;
    impl OdeSystem<1> for BlowUp {
        fn rhs(&mut self, _t: f64, y: &[f64; 1]) -> Result<[f64; 1], RhsError> {
            Ok([y[0] * y[0]])
        }
    }

    #[test]
    fn finite_time_blow_up_is_a_singularity() {
        // y' = y², y(0) = 1 blows up at t = 1
        let mut last_t = 0.0;
        let reason = dopri5(&mut BlowUp, 0.0, [1.0], 2.0, &Tolerances::default(), |t, _, _| {
            last_t = t;
            true
        });
        assert_eq!(reason, StopReason::Singularity);
        assert!((last_t - 1.0).abs() < 1e-3);
    }

    struct Fence;
    impl OdeSystem<1> for Fence {
        fn rhs(&mut self, _t: f64, y: &[f64; 1]) -> Result<[f64; 1], RhsError> {
            if y[0] > 0.5 {
                Err(RhsError::OutOfDomain)
            } else {
                Ok([1.0])
            }
        }
    }

    #[test]
    fn leaving_the_domain_is_reported() {
        let reason = dopri5(&mut Fence, 0.0, [0.0], 2.0, &Tolerances::default(), |_, _, _| true);
        assert_eq!(reason, StopReason::DomainExit);
    }
}
