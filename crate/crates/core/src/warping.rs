//! Warping functions `g(r)` and model manifolds.
//!
//! A warping function is represented in log-domain throughout: the tail
//! families of interest behave like `exp(±α r^β)`, so `g^{m-1}` spans
//! thousands of orders of magnitude and only `log g` and `g'/g` are safe
//! to pass around. A function consists of a body (formula or sampled
//! table), an optional declared tail formula valid from some radius on,
//! and an optional window on which body and tail are C¹-blended in log
//! space. Downstream convergence classification relies only on tail
//! behaviour, so the blend is free to be any smooth positive transition.

use crate::expr::{Expr, ExprError};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WarpError {
    #[error("warping function not positive at r = {r}")]
    NonPositiveValue { r: f64 },
    #[error("r = {r} beyond tabulated range (max {max}) and no tail is declared")]
    DomainExceeded { r: f64, max: f64 },
    #[error("pole condition violated: {detail}")]
    PoleViolation { detail: String },
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("invalid table: {detail}")]
    InvalidTable { detail: String },
    #[error("formula error: {0}")]
    Formula(#[from] ExprError),
    #[error("csv: {0}")]
    Csv(String),
}

/// Log-domain evaluation of a warping function at one radius.
#[derive(Debug, Clone, Copy)]
pub struct LogEval {
    /// `log g(r)`.
    pub log_g: f64,
    /// `g'(r) / g(r)`.
    pub dlog_g: f64,
    /// False when the evaluation hit an over/underflow or an undefined
    /// logarithmic derivative.
    pub valid: bool,
}

// ---------------------------------------------------------------------------
// Tabulated log g with cubic Hermite interpolation in x = ln r
// ---------------------------------------------------------------------------

/// Samples of `log g` on a strictly increasing radius grid, interpolated
/// against `x = ln r` (cubic Hermite, or linear for order 1).
#[derive(Debug, Clone)]
pub struct LogTable {
    xs: Vec<f64>,
    ls: Vec<f64>,
    /// `d(log g)/dx` at the nodes.
    ms: Vec<f64>,
    order: u8,
    /// Treat `g ∝ r` below the first node (used by tables that resolve the
    /// pole).
    pole_scaled: bool,
}

impl LogTable {
    /// Build from radii, `log g` values and exact logarithmic derivatives
    /// `g'/g`.
    pub fn from_log_samples(
        r: &[f64],
        log_g: &[f64],
        dlog_g: &[f64],
        pole_scaled: bool,
    ) -> Result<Self, WarpError> {
        if r.len() < 2 || r.len() != log_g.len() || r.len() != dlog_g.len() {
            return Err(WarpError::InvalidTable {
                detail: "need at least two samples with matching lengths".into(),
            });
        }
        let mut xs = Vec::with_capacity(r.len());
        let mut ms = Vec::with_capacity(r.len());
        for i in 0..r.len() {
            if r[i] <= 0.0 || (i > 0 && r[i] <= r[i - 1]) {
                return Err(WarpError::InvalidTable {
                    detail: format!("radii must be positive and strictly increasing at index {i}"),
                });
            }
            if !log_g[i].is_finite() || !dlog_g[i].is_finite() {
                return Err(WarpError::InvalidTable {
                    detail: format!("non-finite sample at index {i}"),
                });
            }
            xs.push(r[i].ln());
            ms.push(r[i] * dlog_g[i]);
        }
        Ok(LogTable {
            xs,
            ls: log_g.to_vec(),
            ms,
            order: 3,
            pole_scaled,
        })
    }

    /// Build from plain `(r, g)` samples; slopes come from monotone
    /// (Fritsch–Carlson) estimation on `(ln r, log g)`.
    pub fn from_points(r: &[f64], g: &[f64], order: u8) -> Result<Self, WarpError> {
        if r.len() < 2 || r.len() != g.len() {
            return Err(WarpError::InvalidTable {
                detail: "need at least two (r, g) rows".into(),
            });
        }
        let mut xs = Vec::with_capacity(r.len());
        let mut ls = Vec::with_capacity(r.len());
        for i in 0..r.len() {
            if r[i] <= 0.0 || (i > 0 && r[i] <= r[i - 1]) {
                return Err(WarpError::InvalidTable {
                    detail: format!("radii must be positive and strictly increasing at index {i}"),
                });
            }
            if g[i] <= 0.0 || !g[i].is_finite() {
                return Err(WarpError::NonPositiveValue { r: r[i] });
            }
            xs.push(r[i].ln());
            ls.push(g[i].ln());
        }
        let ms = pchip_slopes(&xs, &ls);
        Ok(LogTable {
            xs,
            ls,
            ms,
            order: if order == 1 { 1 } else { 3 },
            pole_scaled: false,
        })
    }

    /// Two-column CSV `r,g` (header row optional).
    pub fn from_csv(path: &Path, order: u8) -> Result<Self, WarpError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| WarpError::Csv(e.to_string()))?;
        let mut rs = Vec::new();
        let mut gs = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| WarpError::Csv(e.to_string()))?;
            if rec.len() < 2 {
                return Err(WarpError::Csv(format!("row {idx}: need two columns")));
            }
            let parse = |s: &str| s.parse::<f64>();
            match (parse(&rec[0]), parse(&rec[1])) {
                (Ok(r), Ok(g)) => {
                    rs.push(r);
                    gs.push(g);
                }
                _ if idx == 0 => continue, // header row
                _ => {
                    return Err(WarpError::Csv(format!(
                        "row {idx}: cannot parse `{},{}`",
                        &rec[0], &rec[1]
                    )))
                }
            }
        }
        Self::from_points(&rs, &gs, order)
    }

    pub fn r_min(&self) -> f64 {
        self.xs[0].exp()
    }

    pub fn r_max(&self) -> f64 {
        self.xs[self.xs.len() - 1].exp()
    }

    fn eval(&self, r: f64) -> Result<LogEval, WarpError> {
        let x = r.ln();
        if x < self.xs[0] {
            if self.pole_scaled {
                // g ∝ r below the first node
                return Ok(LogEval {
                    log_g: self.ls[0] + (x - self.xs[0]),
                    dlog_g: 1.0 / r,
                    valid: true,
                });
            }
            return Err(WarpError::DomainExceeded {
                r,
                max: self.r_max(),
            });
        }
        let n = self.xs.len();
        if x > self.xs[n - 1] {
            return Err(WarpError::DomainExceeded {
                r,
                max: self.r_max(),
            });
        }
        let seg = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let h = self.xs[seg + 1] - self.xs[seg];
        let t = (x - self.xs[seg]) / h;
        let (l, dldx) = if self.order == 1 {
            (
                self.ls[seg] * (1.0 - t) + self.ls[seg + 1] * t,
                (self.ls[seg + 1] - self.ls[seg]) / h,
            )
        } else {
            hermite(
                t,
                h,
                self.ls[seg],
                self.ms[seg],
                self.ls[seg + 1],
                self.ms[seg + 1],
            )
        };
        Ok(LogEval {
            log_g: l,
            dlog_g: dldx / r,
            valid: l.is_finite() || l == f64::NEG_INFINITY,
        })
    }
}

/// Cubic Hermite value and derivative w.r.t. `x` on one segment.
fn hermite(t: f64, h: f64, y0: f64, m0: f64, y1: f64, m1: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1;
    let d = ((6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * h * m0
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * h * m1)
        / h;
    (v, d)
}

/// Fritsch–Carlson monotone slope estimates.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut d = vec![0.0; n - 1];
    let mut h = vec![0.0; n - 1];
    for i in 0..n - 1 {
        h[i] = xs[i + 1] - xs[i];
        d[i] = (ys[i + 1] - ys[i]) / h[i];
    }
    let mut m = vec![0.0; n];
    m[0] = end_slope(h[0], h.get(1).copied().unwrap_or(h[0]), d[0], d.get(1).copied().unwrap_or(d[0]));
    m[n - 1] = end_slope(
        h[n - 2],
        if n >= 3 { h[n - 3] } else { h[n - 2] },
        d[n - 2],
        if n >= 3 { d[n - 3] } else { d[n - 2] },
    );
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

// ---------------------------------------------------------------------------
// WarpingFunction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum WarpBody {
    Formula(Expr),
    Table(LogTable),
}

#[derive(Debug, Clone)]
struct Tail {
    expr: Expr,
    /// Tail formula is authoritative for `r >= start`.
    start: f64,
    /// Blend window `[blend_from, start]`; hard switch when absent.
    blend_from: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct WarpingFunction {
    body: WarpBody,
    tail: Option<Tail>,
    source: String,
}

impl WarpingFunction {
    pub fn from_expr(expr: Expr, source: impl Into<String>) -> Self {
        WarpingFunction {
            body: WarpBody::Formula(expr),
            tail: None,
            source: source.into(),
        }
    }

    /// Parse a formula in `r`.
    pub fn parse(formula: &str) -> Result<Self, WarpError> {
        Ok(Self::from_expr(Expr::parse(formula, "r")?, formula))
    }

    pub fn from_table(table: LogTable) -> Self {
        WarpingFunction {
            body: WarpBody::Table(table),
            tail: None,
            source: "(table)".into(),
        }
    }

    /// Declare a tail formula authoritative for `r >= start`, with a hard
    /// switch.
    pub fn with_tail(mut self, expr: Expr, start: f64, source: &str) -> Self {
        self.source = format!("{} | tail r>={start}: {source}", self.source);
        self.tail = Some(Tail {
            expr,
            start,
            blend_from: None,
        });
        self
    }

    /// Declare a tail formula and C¹-blend `log g` from the body over
    /// `[blend_from, start]`.
    pub fn with_blended_tail(
        mut self,
        expr: Expr,
        blend_from: f64,
        start: f64,
        source: &str,
    ) -> Self {
        assert!(
            blend_from > 0.0 && blend_from < start,
            "blend window must satisfy 0 < a < b"
        );
        self.source = format!("{} | tail r>={start}: {source} (blend from {blend_from})", self.source);
        self.tail = Some(Tail {
            expr,
            start,
            blend_from: Some(blend_from),
        });
        self
    }

    /// `g(r) = r` near the pole, spliced onto the given tail over
    /// `[blend_from, start]`. The standard construction for the
    /// “any smooth odd function equal to the tail far out” families.
    pub fn spliced_tail(tail: &str, blend_from: f64, start: f64) -> Result<Self, WarpError> {
        let tail_expr = Expr::parse(tail, "r")?;
        Ok(Self::parse("r")?.with_blended_tail(tail_expr, blend_from, start, tail))
    }

    /// Human-readable construction string (formula text or table marker).
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn tail_start(&self) -> Option<f64> {
        self.tail.as_ref().map(|t| t.start)
    }

    /// Largest radius this function can be evaluated at: unbounded for
    /// formulas and tailed tables, the table end otherwise.
    pub fn horizon(&self) -> f64 {
        if self.tail.is_some() {
            return f64::INFINITY;
        }
        match &self.body {
            WarpBody::Formula(_) => f64::INFINITY,
            WarpBody::Table(t) => t.r_max(),
        }
    }

    fn eval_body(&self, r: f64) -> Result<LogEval, WarpError> {
        match &self.body {
            WarpBody::Formula(expr) => {
                let rec = expr.eval(r);
                if rec.log.sign <= 0 {
                    return Err(WarpError::NonPositiveValue { r });
                }
                Ok(LogEval {
                    log_g: rec.log.log_abs,
                    dlog_g: rec.dlog,
                    valid: rec.log_usable(),
                })
            }
            WarpBody::Table(t) => t.eval(r),
        }
    }

    fn eval_tail(&self, tail: &Tail, r: f64) -> Result<LogEval, WarpError> {
        let rec = tail.expr.eval(r);
        if rec.log.sign <= 0 {
            return Err(WarpError::NonPositiveValue { r });
        }
        Ok(LogEval {
            log_g: rec.log.log_abs,
            dlog_g: rec.dlog,
            valid: rec.log_usable(),
        })
    }

    /// `log g(r)` and `g'(r)/g(r)`.
    pub fn eval_log(&self, r: f64) -> Result<LogEval, WarpError> {
        if r < 0.0 {
            return Err(WarpError::DomainExceeded {
                r,
                max: f64::INFINITY,
            });
        }
        match &self.tail {
            None => self.eval_body(r),
            Some(tail) => {
                if r >= tail.start {
                    self.eval_tail(tail, r)
                } else if let Some(a) = tail.blend_from {
                    if r <= a {
                        self.eval_body(r)
                    } else {
                        let b = tail.start;
                        let lb = self.eval_body(r)?;
                        let lt = self.eval_tail(tail, r)?;
                        let s = (r - a) / (b - a);
                        let w = s * s * (3.0 - 2.0 * s);
                        let dw = 6.0 * s * (1.0 - s) / (b - a);
                        Ok(LogEval {
                            log_g: (1.0 - w) * lb.log_g + w * lt.log_g,
                            dlog_g: (1.0 - w) * lb.dlog_g
                                + w * lt.dlog_g
                                + dw * (lt.log_g - lb.log_g),
                            valid: lb.valid && lt.valid,
                        })
                    }
                } else {
                    self.eval_body(r)
                }
            }
        }
    }

    /// Plain `g(r)`; underflows/overflows outside `f64` range.
    pub fn value(&self, r: f64) -> Result<f64, WarpError> {
        Ok(self.eval_log(r)?.log_g.exp())
    }
}

// ---------------------------------------------------------------------------
// ModelManifold
// ---------------------------------------------------------------------------

/// Pole-validation tolerances: `|g'(0) - 1| <= 1e-6` sampled at a radius
/// well below `pole_radius_eps`, `|g(ε)/ε - 1| <= 1e-4` at `ε`.
const POLE_DERIV_TOL: f64 = 1e-6;
const POLE_RATIO_TOL: f64 = 1e-4;
const DEFAULT_POLE_EPS: f64 = 1e-3;

/// A rotationally symmetric manifold `[0, ∞) × S^{m-1}` with metric
/// `dr² + g(r)² dθ²`.
#[derive(Debug, Clone)]
pub struct ModelManifold {
    dim: usize,
    g: WarpingFunction,
    pole_radius_eps: f64,
}

impl ModelManifold {
    /// Validate the pole conditions `g(0) = 0`, `g'(0) = 1` (by sampling
    /// near zero) and positivity on a sampled range, then build the model.
    pub fn new(dim: usize, g: WarpingFunction) -> Result<Self, WarpError> {
        Self::with_pole_eps(dim, g, DEFAULT_POLE_EPS)
    }

    pub fn with_pole_eps(
        dim: usize,
        g: WarpingFunction,
        pole_radius_eps: f64,
    ) -> Result<Self, WarpError> {
        if dim < 2 {
            return Err(WarpError::InvalidDimension(dim));
        }
        assert!(pole_radius_eps > 0.0);

        let eps = pole_radius_eps;
        let le = g.eval_log(eps)?;
        let ratio = (le.log_g - eps.ln()).exp();
        if (ratio - 1.0).abs() > POLE_RATIO_TOL {
            return Err(WarpError::PoleViolation {
                detail: format!("g({eps})/{eps} = {ratio}, outside 1 ± {POLE_RATIO_TOL}"),
            });
        }
        let r0 = (eps * 1e-4).max(1e-12);
        let le0 = g.eval_log(r0)?;
        let gp = (le0.log_g).exp() * le0.dlog_g;
        if (gp - 1.0).abs() > POLE_DERIV_TOL {
            return Err(WarpError::PoleViolation {
                detail: format!("g'({r0}) = {gp}, outside 1 ± {POLE_DERIV_TOL}"),
            });
        }

        // positivity sweep up to the horizon (capped)
        let r_hi = g.horizon().min(1e6);
        let mut r = eps;
        while r < r_hi {
            let le = g.eval_log(r)?;
            if !le.log_g.is_finite() && le.log_g != f64::NEG_INFINITY {
                return Err(WarpError::NonPositiveValue { r });
            }
            r *= 1.35;
        }

        Ok(ModelManifold {
            dim,
            g,
            pole_radius_eps,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.g
    }

    pub fn pole_radius_eps(&self) -> f64 {
        self.pole_radius_eps
    }

    pub fn eval_log(&self, r: f64) -> Result<LogEval, WarpError> {
        self.g.eval_log(r)
    }

    /// `(m-1) · log g(r)`: the log of the area density `g^{m-1}`.
    pub fn log_weight(&self, r: f64) -> Result<f64, WarpError> {
        Ok((self.dim - 1) as f64 * self.g.eval_log(r)?.log_g)
    }

    /// `(m-1) g'/g`: the radial drift of the Laplacian.
    pub fn drift(&self, r: f64) -> Result<f64, WarpError> {
        Ok((self.dim - 1) as f64 * self.g.eval_log(r)?.dlog_g)
    }

    /// Volume of the unit `(m-1)`-sphere.
    pub fn sphere_constant(&self) -> f64 {
        sphere_constant(self.dim)
    }

    /// Area of the geodesic sphere: `c_m g^{m-1}(r)`, as `(value, log)`.
    pub fn boundary_area_log(&self, r: f64) -> Result<f64, WarpError> {
        Ok(self.sphere_constant().ln() + self.log_weight(r)?)
    }
}

/// Volume `c_m` of the unit sphere `S^{m-1}` in `R^m`.
pub fn sphere_constant(m: usize) -> f64 {
    assert!(m >= 2, "sphere_constant needs m >= 2");
    let two_pi = 2.0 * std::f64::consts::PI;
    match m {
        2 => two_pi,
        3 => 2.0 * two_pi,
        _ => two_pi / (m as f64 - 2.0) * sphere_constant(m - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_constants() {
        assert!((sphere_constant(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_constant(3) - 4.0 * PI).abs() < 1e-14);
        // 2 π^{m/2} / Γ(m/2) at m = 4 gives 2π²
        assert!((sphere_constant(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_constant(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn eval_log_examples() {
        let g = WarpingFunction::parse("sinh(r)").unwrap();
        let le = g.eval_log(1.0).unwrap();
        assert!((le.log_g - 1.0f64.sinh().ln()).abs() < 1e-12);
        assert!((le.dlog_g - 1.0 / 1.0f64.tanh()).abs() < 1e-12);

        let g = WarpingFunction::parse("r").unwrap();
        let le = g.eval_log(1.0).unwrap();
        assert_eq!(le.log_g, 0.0);
        assert_eq!(le.dlog_g, 1.0);

        let g = WarpingFunction::spliced_tail("exp(-r^3)", 5.0, 10.0).unwrap();
        let le = g.eval_log(20.0).unwrap();
        assert!((le.log_g + 8000.0).abs() < 1e-9);
        assert!((le.dlog_g + 1200.0).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_is_an_error() {
        let g = WarpingFunction::parse("r - 2").unwrap();
        assert!(matches!(
            g.eval_log(1.0),
            Err(WarpError::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn table_without_tail_refuses_extrapolation() {
        let r: Vec<f64> = (1..=50).map(|i| i as f64 * 0.1).collect();
        let g: Vec<f64> = r.iter().map(|x| x.sinh()).collect();
        let t = LogTable::from_points(&r, &g, 3).unwrap();
        let w = WarpingFunction::from_table(t);
        assert!(matches!(
            w.eval_log(9.0),
            Err(WarpError::DomainExceeded { .. })
        ));
    }

    #[test]
    fn table_with_exact_slopes_tracks_sinh() {
        // uniform in x = ln r, which is the interpolation coordinate
        let r: Vec<f64> = (0..=1200)
            .map(|i| (0.2f64.ln() + 0.004 * i as f64).exp())
            .collect();
        let logg: Vec<f64> = r.iter().map(|x| x.sinh().ln()).collect();
        let dlog: Vec<f64> = r.iter().map(|x| 1.0 / x.tanh()).collect();
        let t = LogTable::from_log_samples(&r, &logg, &dlog, false).unwrap();
        let w = WarpingFunction::from_table(t);
        for &x in &[0.73, 1.18, 3.33, 9.71, 17.7] {
            let le = w.eval_log(x).unwrap();
            assert!(
                (le.log_g - x.sinh().ln()).abs() < 1e-9,
                "log g at {x}: {} vs {}",
                le.log_g,
                x.sinh().ln()
            );
            assert!((le.dlog_g - 1.0 / x.tanh()).abs() < 1e-5 * (1.0 / x.tanh()));
        }
    }

    #[test]
    fn table_from_plain_points_is_serviceable() {
        // slopes are estimated (monotone cubic), so expect modest accuracy
        let r: Vec<f64> = (0..=300)
            .map(|i| (0.5f64.ln() + 0.01 * i as f64).exp())
            .collect();
        let g: Vec<f64> = r.iter().map(|x| x.sinh()).collect();
        let t = LogTable::from_points(&r, &g, 3).unwrap();
        let w = WarpingFunction::from_table(t);
        for &x in &[0.73, 1.18, 3.33, 8.9] {
            let le = w.eval_log(x).unwrap();
            assert!(
                (le.log_g - x.sinh().ln()).abs() < 1e-4,
                "log g at {x}: {} vs {}",
                le.log_g,
                x.sinh().ln()
            );
            assert!((le.dlog_g - 1.0 / x.tanh()).abs() < 1e-2);
        }
    }

    #[test]
    fn model_pole_validation() {
        let sinh = WarpingFunction::parse("sinh(r)").unwrap();
        assert!(ModelManifold::new(3, sinh).is_ok());

        let quadratic = WarpingFunction::parse("r^2").unwrap();
        assert!(matches!(
            ModelManifold::new(2, quadratic),
            Err(WarpError::PoleViolation { .. })
        ));

        let splice = WarpingFunction::spliced_tail("exp(-r^3)", 5.0, 10.0).unwrap();
        assert!(ModelManifold::new(2, splice).is_ok());

        let plain = WarpingFunction::parse("r").unwrap();
        assert!(matches!(
            ModelManifold::new(1, plain),
            Err(WarpError::InvalidDimension(1))
        ));
    }

    #[test]
    fn dlog_matches_central_difference_of_log() {
        let cases = [
            WarpingFunction::parse("sinh(r)").unwrap(),
            WarpingFunction::parse("r + r^3").unwrap(),
            WarpingFunction::spliced_tail("exp(-r^3)", 5.0, 10.0).unwrap(),
            WarpingFunction::spliced_tail("cosh(r)", 1.0, 3.0).unwrap(),
        ];
        for g in &cases {
            let mut r = 0.5;
            while r < 40.0 {
                let le = g.eval_log(r).unwrap();
                let h = 1e-5 * r;
                let lp = g.eval_log(r + h).unwrap().log_g;
                let lm = g.eval_log(r - h).unwrap().log_g;
                let fd = (lp - lm) / (2.0 * h);
                assert!(
                    (le.dlog_g - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                    "{}: dlog {} vs fd {} at r = {r}",
                    g.source(),
                    le.dlog_g,
                    fd
                );
                r *= 1.7;
            }
        }
    }

    #[test]
    fn weight_power_matches_plain_power() {
        let g = WarpingFunction::parse("sinh(r)").unwrap();
        let m = ModelManifold::new(4, g).unwrap();
        for &r in &[0.5, 1.0, 2.5, 5.0] {
            let w = m.log_weight(r).unwrap().exp();
            let direct = r.sinh().powi(3);
            assert!(
                (w - direct).abs() <= 1e-12 * direct,
                "g^3 at {r}: {w} vs {direct}"
            );
        }
    }

    #[test]
    fn blend_keeps_positivity_and_continuity() {
        let g = WarpingFunction::spliced_tail("exp(-r^3)", 2.0, 10.0).unwrap();
        let mut prev = g.eval_log(1.99).unwrap().log_g;
        let mut r = 1.99;
        while r < 10.5 {
            let le = g.eval_log(r).unwrap();
            assert!(le.valid);
            // log g finite means g > 0; continuity: no jumps beyond what the
            // local slope explains
            let step = 0.003;
            let jump = (le.log_g - prev).abs();
            assert!(
                jump <= (le.dlog_g.abs() + 1500.0) * step,
                "discontinuity near r = {r}"
            );
            prev = le.log_g;
            r += step;
        }
    }
}
