//! Adaptive Gauss–Kronrod quadrature carried out entirely in log space.
//!
//! Integrands are supplied as `x ↦ log f(x)` for positive `f`, and the
//! result is `log ∫ f`. Node sums are accumulated with log-sum-exp, so an
//! integrand like `exp(r³)` over `[2^50, 2^51]` is handled without ever
//! materialising a plain `f64` value. The G7 estimate embedded in the K15
//! rule drives bisection; subintervals whose crude upper bound lies far
//! below the running maximum are accepted immediately, which keeps the
//! work on steep exponentials proportional to the depth of the dominant
//! peak rather than to the dynamic range.

use crate::logdomain::{logsumexp, logsumexp_slice};
use thiserror::Error;

/// Positive-half Kronrod abscissae of the 15-point rule (last entry is the
/// centre).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights of the embedded 7-point rule (paired with the odd Kronrod
/// abscissae and the centre).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Debug, Clone, Error, PartialEq)]
#[error("integrand evaluation failed at {at}: {reason}")]
pub struct EvalFailure {
    pub at: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    /// Acceptance threshold on `|log K15 - log G7|`; approximately the
    /// relative error of the subinterval.
    pub rel_tol_log: f64,
    pub max_depth: u32,
    /// A subinterval whose upper bound sits this far (in log) below the
    /// running maximum is accepted without refinement.
    pub negligible_gap: f64,
    /// Hard cap on accepted subintervals; exceeding it marks the result
    /// unconverged instead of running away.
    pub max_pieces: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts {
            rel_tol_log: 1e-10,
            max_depth: 120,
            negligible_gap: 46.0, // e^-46 ≈ 1e-20 relative
            max_pieces: 40_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LogQuad {
    /// `log ∫_a^b f`.
    pub log_integral: f64,
    /// False when some subinterval hit the depth budget unresolved.
    pub converged: bool,
    pub evals: usize,
}

struct K15 {
    log_kronrod: f64,
    log_gauss: f64,
    log_upper_bound: f64,
}

fn k15_log<F>(f: &F, a: f64, b: f64) -> Result<(K15, usize), EvalFailure>
where
    F: Fn(f64) -> Result<f64, EvalFailure> + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let log_half = half.ln();

    let mut kron = [f64::NEG_INFINITY; 15];
    let mut gauss = [f64::NEG_INFINITY; 8];
    let mut node_max = f64::NEG_INFINITY;
    let mut evals = 0;
    let mut gi = 0;

    for (j, &x) in XGK.iter().enumerate() {
        let lw = WGK[j].ln();
        if j == 7 {
            let l = f(center)?;
            evals += 1;
            node_max = node_max.max(l);
            kron[14] = lw + l;
            gauss[7] = WG[3].ln() + l;
            break;
        }
        let l1 = f(center - half * x)?;
        let l2 = f(center + half * x)?;
        evals += 2;
        node_max = node_max.max(l1).max(l2);
        kron[2 * j] = lw + l1;
        kron[2 * j + 1] = lw + l2;
        if j % 2 == 1 {
            let lg = WG[gi].ln();
            gauss[2 * gi] = lg + l1;
            gauss[2 * gi + 1] = lg + l2;
            gi += 1;
        }
    }

    // endpoint samples tighten the upper bound on steep integrands
    let la = f(a)?;
    let lb = f(b)?;
    evals += 2;
    node_max = node_max.max(la).max(lb);

    // unused gauss slots stay at -inf and are neutral in the log-sum
    let log_kronrod = log_half + logsumexp_slice(&kron);
    let log_gauss = log_half + logsumexp_slice(&gauss);
    let log_upper_bound = (b - a).ln() + node_max;
    Ok((
        K15 {
            log_kronrod,
            log_gauss,
            log_upper_bound,
        },
        evals,
    ))
}

struct AdaptState {
    pieces: Vec<f64>,
    running_max: f64,
    converged: bool,
    evals: usize,
}

fn refine<F>(
    f: &F,
    a: f64,
    b: f64,
    est: K15,
    depth: u32,
    opts: &QuadOpts,
    st: &mut AdaptState,
) -> Result<(), EvalFailure>
where
    F: Fn(f64) -> Result<f64, EvalFailure> + ?Sized,
{
    let diff = if est.log_kronrod == f64::NEG_INFINITY && est.log_gauss == f64::NEG_INFINITY {
        0.0
    } else {
        (est.log_kronrod - est.log_gauss).abs()
    };
    // The upper bound from node and endpoint samples is sound for the
    // eventually-monotone log-integrands this crate produces; a piece that
    // cannot influence the sum is accepted without refinement.
    let negligible = est.log_upper_bound < st.running_max - opts.negligible_gap;
    let out_of_budget = st.pieces.len() >= opts.max_pieces;
    if diff <= opts.rel_tol_log || negligible || depth >= opts.max_depth || out_of_budget {
        if (depth >= opts.max_depth || out_of_budget) && diff > opts.rel_tol_log && !negligible {
            st.converged = false;
        }
        st.pieces.push(est.log_kronrod);
        st.running_max = st.running_max.max(est.log_kronrod);
        return Ok(());
    }
    let mid = 0.5 * (a + b);
    let (left, e1) = k15_log(f, a, mid)?;
    let (right, e2) = k15_log(f, mid, b)?;
    st.evals += e1 + e2;
    st.running_max = st
        .running_max
        .max(left.log_kronrod)
        .max(right.log_kronrod);
    refine(f, a, mid, left, depth + 1, opts, st)?;
    refine(f, mid, b, right, depth + 1, opts, st)
}

/// `log ∫_a^b f` for a positive integrand given in log form.
pub fn integrate_log<F>(f: &F, a: f64, b: f64, opts: &QuadOpts) -> Result<LogQuad, EvalFailure>
where
    F: Fn(f64) -> Result<f64, EvalFailure> + ?Sized,
{
    assert!(b > a, "integrate_log needs b > a, got [{a}, {b}]");
    let mut st = AdaptState {
        pieces: Vec::new(),
        running_max: f64::NEG_INFINITY,
        converged: true,
        evals: 0,
    };
    let (est, evals) = k15_log(f, a, b)?;
    st.evals += evals;
    st.running_max = est.log_kronrod;
    refine(f, a, b, est, 0, opts, &mut st)?;
    Ok(LogQuad {
        log_integral: logsumexp_slice(&st.pieces),
        converged: st.converged,
        evals: st.evals,
    })
}

/// Convenience wrapper summing `log ∫` over consecutive panels
/// `[points[0], points[1]], ...` in order.
pub fn integrate_log_panels<F>(
    f: &F,
    points: &[f64],
    opts: &QuadOpts,
) -> Result<LogQuad, EvalFailure>
where
    F: Fn(f64) -> Result<f64, EvalFailure> + ?Sized,
{
    let mut acc = f64::NEG_INFINITY;
    let mut converged = true;
    let mut evals = 0;
    for w in points.windows(2) {
        let q = integrate_log(f, w[0], w[1], opts)?;
        acc = logsumexp(acc, q.log_integral);
        converged &= q.converged;
        evals += q.evals;
    }
    Ok(LogQuad {
        log_integral: acc,
        converged,
        evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<f64, EvalFailure> {
        move |x| Ok(f(x))
    }

    #[test]
    fn matches_closed_forms() {
        let opts = QuadOpts::default();
        // ∫_1^2 1/x² = 1/2
        let q = integrate_log(&ok(|x: f64| -2.0 * x.ln()), 1.0, 2.0, &opts).unwrap();
        assert!((q.log_integral - 0.5f64.ln()).abs() < 1e-12);
        // ∫_0^1 e^{-x} = 1 - 1/e
        let q = integrate_log(&ok(|x: f64| -x), 0.0, 1.0, &opts).unwrap();
        assert!((q.log_integral.exp() - (1.0 - (-1.0f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn handles_extreme_growth_window() {
        // ∫_8^16 e^{x³} dx: dominated by the right endpoint,
        // ≈ e^{4096}/(3·256) to leading order. Compare against a tight
        // two-term asymptotic bound.
        let opts = QuadOpts::default();
        let q = integrate_log(&ok(|x: f64| x * x * x), 8.0, 16.0, &opts).unwrap();
        assert!(q.converged);
        let leading = 4096.0 - (3.0 * 256.0f64).ln();
        // Laplace expansion: ∫ ≈ e^{b³}/(3b²) (1 - 2/(3b³) + ...)
        let correction = (1.0_f64 - 2.0 / (3.0 * 4096.0)).ln();
        assert!(
            (q.log_integral - leading - correction).abs() < 1e-4,
            "got {}, expected ≈ {}",
            q.log_integral,
            leading + correction
        );
    }

    #[test]
    fn handles_deep_decay_window() {
        // ∫_10^20 e^{-x³}: dominated by the left endpoint ≈ e^{-1000}/300.
        let opts = QuadOpts::default();
        let q = integrate_log(&ok(|x: f64| -x * x * x), 10.0, 20.0, &opts).unwrap();
        let leading = -1000.0 - 300.0f64.ln();
        let correction = (1.0_f64 - 2.0 / (3.0 * 1000.0)).ln();
        assert!((q.log_integral - leading - correction).abs() < 1e-4);
    }

    #[test]
    fn zero_integrand_gives_neg_infinity() {
        let opts = QuadOpts::default();
        let q = integrate_log(&ok(|_| f64::NEG_INFINITY), 0.0, 1.0, &opts).unwrap();
        assert_eq!(q.log_integral, f64::NEG_INFINITY);
        assert!(q.converged);
    }

    #[test]
    fn propagates_integrand_failure() {
        let opts = QuadOpts::default();
        let f = |x: f64| {
            if x > 1.5 {
                Err(EvalFailure {
                    at: x,
                    reason: "domain".into(),
                })
            } else {
                Ok(0.0)
            }
        };
        assert!(integrate_log(&f, 1.0, 2.0, &opts).is_err());
    }
}
