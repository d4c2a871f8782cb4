//! Distortion functions on `[0, 1]`: the factors `g_k` of an ordered-product
//! copula and the shock laws `H_{j,k}` derived from them.
//!
//! Every function carries the right limit at zero; `eval(0)` returns it. Products
//! of powers are evaluated in the log domain so alternating exponents neither
//! overflow nor underflow.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bernstein::{AdditiveKind, BernsteinFamily, LaplaceExponent};
use crate::error::{Error, Result};

/// Results within this distance outside `[0, 1]` are snapped back into range.
pub const CLAMP_SLACK: f64 = 1e-12;

/// Exponents this close to zero are treated as zero when resolving limits at zero.
const EXPONENT_EPS: f64 = 1e-12;

const INVERSE_TOL: f64 = 1e-12;
const INVERSE_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum DistortionKind {
    Identity,
    Constant(f64),
    /// `u^exponent`.
    Power { exponent: f64 },
    /// Pointwise minimum of affine pieces `slope * u + intercept`.
    MinAffine { pieces: Vec<(f64, f64)> },
    /// `((1 + (k-1) s) / (1 + k s))^beta` with `s = u^(-1/beta) - 1`.
    SatoGamma { beta: f64, k: u32 },
    /// `exp(-Psi_x(k) + Psi_x(k-1))` with `x` the inverse marginal survival of `u`.
    Bernstein { family: BernsteinFamily, k: u32 },
    /// Monotone piecewise-linear interpolation, constant outside the abscissae.
    Tabulated { u: Vec<f64>, v: Vec<f64> },
    /// `prod_i base_i(u)^exponent_i`.
    LogPowerProduct { factors: Vec<(DistortionFn, f64)> },
}

/// A function `[0, 1] -> [0, 1]` together with its right limit at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistortionWire", into = "DistortionWire")]
pub struct DistortionFn {
    kind: DistortionKind,
    zero_limit: f64,
}

impl DistortionFn {
    fn from_kind(kind: DistortionKind) -> Self {
        let mut f = Self { kind, zero_limit: 0.0 };
        f.zero_limit = f.limit_from_asymptote();
        f
    }

    pub fn identity() -> Self {
        Self::from_kind(DistortionKind::Identity)
    }

    pub fn constant(value: f64) -> Self {
        Self::from_kind(DistortionKind::Constant(value))
    }

    pub fn power(exponent: f64) -> Self {
        if exponent == 1.0 {
            return Self::identity();
        }
        if exponent == 0.0 {
            return Self::constant(1.0);
        }
        Self::from_kind(DistortionKind::Power { exponent })
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        Self::min_affine(vec![(slope, intercept)])
    }

    pub fn min_affine(pieces: Vec<(f64, f64)>) -> Self {
        Self::from_kind(DistortionKind::MinAffine { pieces })
    }

    pub fn sato_gamma(beta: f64, k: u32) -> Self {
        Self::from_kind(DistortionKind::SatoGamma { beta, k })
    }

    pub fn bernstein(family: BernsteinFamily, k: u32) -> Self {
        Self::from_kind(DistortionKind::Bernstein { family, k })
    }

    /// Tabulated function; abscissae strictly increasing in `[0, 1]`, values in `[0, 1]`.
    pub fn tabulated(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), actual: v.len() });
        }
        if u.len() < 2 {
            return Err(Error::Malformed("tabulated grid needs at least two points".into()));
        }
        if u.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Malformed("tabulated abscissae must lie in [0, 1]".into()));
        }
        if u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Malformed("tabulated abscissae must be strictly increasing".into()));
        }
        if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Malformed("tabulated values must lie in [0, 1]".into()));
        }
        Ok(Self::from_kind(DistortionKind::Tabulated { u, v }))
    }

    /// Product of powers, flattened: nested products are expanded, power-type
    /// bases are merged into one exponent of `u`, equal bases are merged.
    pub fn power_product(factors: Vec<(DistortionFn, f64)>) -> Self {
        let mut flat: Vec<(DistortionFn, f64)> = Vec::new();
        let mut u_exponent = 0.0;
        let mut stack: Vec<(DistortionFn, f64)> = factors.into_iter().rev().collect();
        while let Some((base, e)) = stack.pop() {
            if e == 0.0 {
                continue;
            }
            match base.kind {
                DistortionKind::LogPowerProduct { factors } => {
                    for (b, inner) in factors.into_iter().rev() {
                        stack.push((b, inner * e));
                    }
                }
                DistortionKind::Identity => u_exponent += e,
                DistortionKind::Power { exponent } => u_exponent += exponent * e,
                DistortionKind::Constant(1.0) => {}
                _ => match flat.iter_mut().find(|(b, _)| *b == base) {
                    Some(slot) => slot.1 += e,
                    None => flat.push((base, e)),
                },
            }
        }
        flat.retain(|(_, e)| *e != 0.0);
        if u_exponent != 0.0 {
            flat.insert(0, (Self::power(u_exponent), 1.0));
        }
        match flat.len() {
            0 => Self::constant(1.0),
            1 if flat[0].1 == 1.0 => flat.pop().map(|(b, _)| b).unwrap_or_else(Self::identity),
            _ => Self::from_kind(DistortionKind::LogPowerProduct { factors: flat }),
        }
    }

    pub fn kind(&self) -> &DistortionKind {
        &self.kind
    }

    /// Right limit at zero; may exceed 1 (or be infinite) for functions outside the
    /// admissible set, which the validity checks report.
    pub fn zero_limit(&self) -> f64 {
        self.zero_limit
    }

    /// Evaluate at `u`; `u <= 0` yields the stored right limit.
    pub fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.zero_limit;
        }
        let u = u.min(1.0);
        let raw = match &self.kind {
            DistortionKind::Identity => u,
            DistortionKind::Constant(c) => *c,
            DistortionKind::MinAffine { pieces } => min_affine(pieces, u),
            DistortionKind::Tabulated { u: xs, v: ys } => interpolate(xs, ys, u),
            _ => self.ln_eval(u).exp(),
        };
        clamp_slack(raw)
    }

    /// Natural log of the function at `u` in `(0, 1]`; `-inf` where it vanishes and
    /// NaN where a product of powers is indeterminate.
    pub fn ln_eval(&self, u: f64) -> f64 {
        match &self.kind {
            DistortionKind::Identity => u.ln(),
            DistortionKind::Constant(c) => c.ln(),
            DistortionKind::Power { exponent } => {
                if *exponent == 0.0 {
                    0.0
                } else {
                    exponent * u.ln()
                }
            }
            DistortionKind::MinAffine { pieces } => ln_nonneg(min_affine(pieces, u)),
            DistortionKind::SatoGamma { beta, k } => {
                let s = (-u.ln() / beta).exp_m1();
                let k = f64::from(*k);
                beta * (((k - 1.0) * s).ln_1p() - (k * s).ln_1p())
            }
            DistortionKind::Bernstein { family, k } => {
                let x = family.inverse_marginal_survival(u);
                let k = f64::from(*k);
                -family.psi(x, k) + family.psi(x, k - 1.0)
            }
            DistortionKind::Tabulated { u: xs, v: ys } => ln_nonneg(interpolate(xs, ys, u)),
            DistortionKind::LogPowerProduct { factors } => {
                factors.iter().map(|(base, e)| e * base.ln_eval(u)).sum()
            }
        }
    }

    /// Exponent `a` when the function is exactly `u^a` on `(0, 1]`.
    pub fn power_exponent(&self) -> Option<f64> {
        match &self.kind {
            DistortionKind::Identity => Some(1.0),
            DistortionKind::Constant(c) if *c == 1.0 => Some(0.0),
            DistortionKind::Power { exponent } => Some(*exponent),
            DistortionKind::SatoGamma { k: 1, .. } => Some(1.0),
            DistortionKind::Bernstein { family, k } => match family.kind() {
                AdditiveKind::Levy => Some(family.levy_exponent(*k)),
                AdditiveKind::Sato { .. } if *k == 1 => Some(1.0),
                AdditiveKind::Sato { .. } => None,
            },
            DistortionKind::LogPowerProduct { factors } => factors
                .iter()
                .map(|(b, e)| b.power_exponent().map(|a| a * e))
                .sum::<Option<f64>>(),
            _ => None,
        }
    }

    /// Left derivative at 1 where it is available in closed form.
    pub fn left_derivative_at_one(&self) -> Option<f64> {
        match &self.kind {
            DistortionKind::MinAffine { pieces } => {
                let at_one = min_affine(pieces, 1.0);
                pieces
                    .iter()
                    .filter(|(s, c)| (s + c - at_one).abs() <= 1e-15)
                    .map(|(s, _)| *s)
                    .reduce(f64::max)
            }
            _ => self.power_exponent(),
        }
    }

    /// Leading behaviour `coef * u^alpha` as `u -> 0`.
    fn zero_asymptote(&self) -> (f64, f64) {
        match &self.kind {
            DistortionKind::Identity => (1.0, 1.0),
            DistortionKind::Constant(c) => (0.0, *c),
            DistortionKind::Power { exponent } => (*exponent, 1.0),
            DistortionKind::MinAffine { pieces } => {
                let m = pieces.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                if m != 0.0 {
                    return (0.0, m);
                }
                let slope = pieces
                    .iter()
                    .filter(|p| p.1 == 0.0)
                    .map(|p| p.0)
                    .fold(f64::INFINITY, f64::min);
                if slope > 0.0 {
                    (1.0, slope)
                } else {
                    (0.0, 0.0)
                }
            }
            DistortionKind::SatoGamma { beta, k } => sato_asymptote(*beta, *k),
            DistortionKind::Bernstein { family, k } => match (family.kind(), family.psi1()) {
                (AdditiveKind::Levy, _) => (family.levy_exponent(*k), 1.0),
                (AdditiveKind::Sato { .. }, LaplaceExponent::Log { beta, .. }) => {
                    sato_asymptote(*beta, *k)
                }
                (AdditiveKind::Sato { .. }, LaplaceExponent::CompoundPoisson { .. }) => {
                    (0.0, self.eval_tiny())
                }
            },
            DistortionKind::Tabulated { u, v } => {
                if u[0] > 0.0 || v[0] != 0.0 {
                    (0.0, v[0])
                } else {
                    let slope = (v[1] - v[0]) / (u[1] - u[0]);
                    if slope > 0.0 {
                        (1.0, slope)
                    } else {
                        (0.0, 0.0)
                    }
                }
            }
            DistortionKind::LogPowerProduct { factors } => {
                factors.iter().fold((0.0, 1.0), |(alpha, coef), (base, e)| {
                    let (a, c) = base.zero_asymptote();
                    (alpha + e * a, coef * c.powf(*e))
                })
            }
        }
    }

    fn limit_from_asymptote(&self) -> f64 {
        let (alpha, coef) = self.zero_asymptote();
        if alpha.abs() <= EXPONENT_EPS {
            coef
        } else if alpha > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn eval_tiny(&self) -> f64 {
        self.ln_eval(f64::MIN_POSITIVE).exp()
    }
}

fn sato_asymptote(beta: f64, k: u32) -> (f64, f64) {
    if k <= 1 {
        (1.0, 1.0)
    } else {
        let k = f64::from(k);
        (0.0, ((k - 1.0) / k).powf(beta))
    }
}

fn min_affine(pieces: &[(f64, f64)], u: f64) -> f64 {
    pieces
        .iter()
        .map(|(s, c)| s * u + c)
        .fold(f64::INFINITY, f64::min)
}

fn interpolate(xs: &[f64], ys: &[f64], u: f64) -> f64 {
    let last = xs.len() - 1;
    if u <= xs[0] {
        return ys[0];
    }
    if u >= xs[last] {
        return ys[last];
    }
    let hi = xs.partition_point(|&x| x < u);
    let lo = hi - 1;
    let w = (u - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + w * (ys[hi] - ys[lo])
}

fn ln_nonneg(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::NAN
    }
}

pub(crate) fn clamp_slack(v: f64) -> f64 {
    if v > 1.0 && v <= 1.0 + CLAMP_SLACK {
        1.0
    } else if (-CLAMP_SLACK..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// `inf { u in [0, 1] : f(u) >= p }` by bisection.
///
/// Returns 0 when `p` does not exceed the right limit at zero (an atom at 0).
pub fn generalized_inverse(f: &DistortionFn, p: f64) -> Result<f64> {
    if p.is_nan() {
        return Err(Error::Domain("probability is NaN".into()));
    }
    if p <= f.zero_limit() {
        return Ok(0.0);
    }
    let top = f.eval(1.0);
    if p > top {
        return Err(Error::Domain(format!("p = {p} exceeds f(1) = {top}")));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..INVERSE_MAX_ITER {
        if hi - lo <= INVERSE_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f.eval(mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Precomputed bracket table that speeds up repeated generalized inverses of one
/// increasing function. Each query is bracketed by binary search in the table and
/// refined by Illinois-modified false position down to the same absolute tolerance
/// as [`generalized_inverse`].
#[derive(Debug, Clone)]
pub struct QuantileTable {
    f: DistortionFn,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl QuantileTable {
    pub fn new(f: DistortionFn, cells: usize) -> Self {
        let cells = cells.max(2);
        let u: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
        let mut v: Vec<f64> = u.iter().map(|&x| f.eval(x)).collect();
        // running max keeps the table monotone even under rounding noise
        for i in 1..v.len() {
            if v[i] < v[i - 1] {
                v[i] = v[i - 1];
            }
        }
        Self { f, u, v }
    }

    pub fn function(&self) -> &DistortionFn {
        &self.f
    }

    pub fn inverse(&self, p: f64) -> f64 {
        if p <= self.f.zero_limit() || p <= self.v[0] {
            return 0.0;
        }
        let last = self.v.len() - 1;
        if p > self.v[last] {
            return 1.0;
        }
        let hi_idx = self.v.partition_point(|&x| x < p);
        let (mut lo, mut hi) = (self.u[hi_idx - 1], self.u[hi_idx]);
        let (mut flo, mut fhi) = (self.v[hi_idx - 1] - p, self.v[hi_idx] - p);
        let mut side = 0i8;
        for _ in 0..INVERSE_MAX_ITER {
            if hi - lo <= INVERSE_TOL {
                break;
            }
            let mut x = if fhi > flo { lo - flo * (hi - lo) / (fhi - flo) } else { f64::NAN };
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let fx = self.f.eval(x) - p;
            if fx >= 0.0 {
                hi = x;
                fhi = fx;
                if side == 1 {
                    flo *= 0.5;
                }
                side = 1;
            } else {
                lo = x;
                flo = fx;
                if side == -1 {
                    fhi *= 0.5;
                }
                side = -1;
            }
        }
        hi
    }
}

// --- wire format -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GridWire {
    u: Vec<f64>,
    v: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FactorWire {
    base: DistortionFn,
    exponent: f64,
}

#[derive(Serialize, Deserialize)]
struct DistortionWire {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zero_limit: Option<f64>,
}

fn param_f64(params: &Option<Value>, key: &str) -> Result<f64> {
    params
        .as_ref()
        .and_then(|p| p.get(key))
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Malformed(format!("missing numeric parameter `{key}`")))
}

fn param_k(params: &Option<Value>) -> Result<u32> {
    params
        .as_ref()
        .and_then(|p| p.get("k"))
        .and_then(Value::as_u64)
        .and_then(|k| u32::try_from(k).ok())
        .filter(|&k| k >= 1)
        .ok_or_else(|| Error::Malformed("missing positive integer parameter `k`".into()))
}

fn param_value(params: &Option<Value>, key: &str) -> Result<Value> {
    params
        .as_ref()
        .and_then(|p| p.get(key))
        .cloned()
        .ok_or_else(|| Error::Malformed(format!("missing parameter `{key}`")))
}

impl TryFrom<DistortionWire> for DistortionFn {
    type Error = Error;

    fn try_from(w: DistortionWire) -> Result<Self> {
        let p = &w.params;
        let f = match w.kind.as_str() {
            "identity" => Self::identity(),
            "constant" => Self::constant(param_f64(p, "value")?),
            "power" => Self::power(param_f64(p, "exponent")?),
            "min_affine" => {
                let pieces: Vec<(f64, f64)> = serde_json::from_value(param_value(p, "pieces")?)?;
                if pieces.is_empty() {
                    return Err(Error::Malformed("min_affine needs at least one piece".into()));
                }
                Self::min_affine(pieces)
            }
            "sato_gamma" => {
                let beta = param_f64(p, "beta")?;
                if beta <= 0.0 {
                    return Err(Error::InvalidParameter(format!("beta = {beta} must be > 0")));
                }
                Self::sato_gamma(beta, param_k(p)?)
            }
            "bernstein" => {
                let family: BernsteinFamily = serde_json::from_value(param_value(p, "family")?)?;
                Self::bernstein(family, param_k(p)?)
            }
            "tabulated" => {
                let grid = w
                    .grid
                    .ok_or_else(|| Error::Malformed("tabulated kind needs `grid`".into()))?;
                Self::tabulated(grid.u, grid.v)?
            }
            "log_power_product" => {
                let factors: Vec<FactorWire> = serde_json::from_value(param_value(p, "factors")?)?;
                let factors = factors.into_iter().map(|f| (f.base, f.exponent)).collect();
                Self::from_kind(DistortionKind::LogPowerProduct { factors })
            }
            other => return Err(Error::Malformed(format!("unknown distortion kind `{other}`"))),
        };
        if let Some(z) = w.zero_limit {
            let ours = f.zero_limit();
            let agree = (z - ours).abs() <= 1e-9 || (z.is_infinite() && ours.is_infinite());
            if !agree {
                return Err(Error::Malformed(format!(
                    "declared zero_limit {z} disagrees with the function's limit {ours}"
                )));
            }
        }
        Ok(f)
    }
}

impl From<DistortionFn> for DistortionWire {
    fn from(f: DistortionFn) -> Self {
        let zero_limit = f.zero_limit.is_finite().then_some(f.zero_limit);
        let (kind, params, grid) = match f.kind {
            DistortionKind::Identity => ("identity", None, None),
            DistortionKind::Constant(c) => ("constant", Some(serde_json::json!({ "value": c })), None),
            DistortionKind::Power { exponent } => {
                ("power", Some(serde_json::json!({ "exponent": exponent })), None)
            }
            DistortionKind::MinAffine { pieces } => {
                ("min_affine", Some(serde_json::json!({ "pieces": pieces })), None)
            }
            DistortionKind::SatoGamma { beta, k } => {
                ("sato_gamma", Some(serde_json::json!({ "beta": beta, "k": k })), None)
            }
            DistortionKind::Bernstein { family, k } => {
                ("bernstein", Some(serde_json::json!({ "family": family, "k": k })), None)
            }
            DistortionKind::Tabulated { u, v } => ("tabulated", None, Some(GridWire { u, v })),
            DistortionKind::LogPowerProduct { factors } => {
                let factors: Vec<FactorWire> = factors
                    .into_iter()
                    .map(|(base, exponent)| FactorWire { base, exponent })
                    .collect();
                ("log_power_product", Some(serde_json::json!({ "factors": factors })), None)
            }
        };
        Self { kind: kind.to_string(), params, grid, zero_limit }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_square() {
        let f = DistortionFn::power(2.0);
        let x = generalized_inverse(&f, 0.25).unwrap();
        assert!((x - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn inverse_returns_zero_below_atom() {
        let f = DistortionFn::affine(0.7, 0.3);
        assert_eq!(f.zero_limit(), 0.3);
        assert_eq!(generalized_inverse(&f, 0.2).unwrap(), 0.0);
        assert_eq!(generalized_inverse(&f, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn inverse_of_constant_one_is_zero() {
        let f = DistortionFn::constant(1.0);
        for p in [0.0, 0.3, 0.999, 1.0] {
            assert_eq!(generalized_inverse(&f, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn inverse_above_top_is_domain_error() {
        let f = DistortionFn::affine(0.9, 0.0);
        assert!(matches!(generalized_inverse(&f, 0.95), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_on_flat_stretch_takes_infimum() {
        let f = DistortionFn::tabulated(vec![0.0, 0.25, 0.75, 1.0], vec![0.0, 0.5, 0.5, 1.0]).unwrap();
        let x = generalized_inverse(&f, 0.5).unwrap();
        assert!((x - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn quantile_table_matches_bisection() {
        let f = DistortionFn::power_product(vec![
            (DistortionFn::identity(), 1.0),
            (DistortionFn::sato_gamma(1.5, 2), -2.0),
            (DistortionFn::sato_gamma(1.5, 3), 1.0),
        ]);
        let table = QuantileTable::new(f.clone(), 256);
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let a = table.inverse(p);
            let b = generalized_inverse(&f, p).unwrap();
            assert!((a - b).abs() <= 2e-12, "p = {p}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_limits_resolve_cancelling_powers() {
        let ratio = DistortionFn::power_product(vec![
            (DistortionFn::identity(), 1.0),
            (DistortionFn::identity(), -1.0),
        ]);
        assert_eq!(ratio, DistortionFn::constant(1.0));
        assert_eq!(ratio.zero_limit(), 1.0);

        let h = DistortionFn::power_product(vec![
            (DistortionFn::power(0.5), 1.0),
            (DistortionFn::power(0.25), -1.0),
        ]);
        assert_eq!(h.power_exponent(), Some(0.25));
        assert_eq!(h.zero_limit(), 0.0);

        let broken = DistortionFn::power(-0.7);
        assert!(broken.zero_limit().is_infinite());
    }

    #[test]
    fn sato_gamma_zero_limit() {
        let g2 = DistortionFn::sato_gamma(1.0, 2);
        assert_eq!(g2.zero_limit(), 0.5);
        assert!((g2.eval(1e-12) - 0.5).abs() < 1e-9);
        assert_eq!(g2.eval(1.0), 1.0);
        assert_eq!(DistortionFn::sato_gamma(2.0, 1).zero_limit(), 0.0);
    }

    #[test]
    fn slack_clamp_leaves_real_violations() {
        assert_eq!(clamp_slack(1.0 + 1e-13), 1.0);
        assert_eq!(clamp_slack(1.1), 1.1);
        let f = DistortionFn::power(-0.5);
        assert!(f.eval(0.25) > 1.9);
    }

    #[test]
    fn min_affine_left_derivative() {
        let g2 = DistortionFn::min_affine(vec![(2.0, 0.2), (0.5, 0.5)]);
        assert_eq!(g2.left_derivative_at_one(), Some(0.5));
        assert_eq!(g2.zero_limit(), 0.2);
    }

    #[test]
    fn json_shape() {
        let f = DistortionFn::power(0.5);
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["kind"], "power");
        assert_eq!(v["params"]["exponent"], 0.5);
        assert_eq!(v["zero_limit"], 0.0);

        let t = DistortionFn::tabulated(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["grid"]["u"][1], 1.0);

        let bad = serde_json::json!({"kind": "power", "params": {"exponent": 0.5}, "zero_limit": 0.4});
        assert!(serde_json::from_value::<DistortionFn>(bad).is_err());
    }
}
