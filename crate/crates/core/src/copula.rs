//! Ordered-product copulas `C(u) = prod_k g_k(u_(k))` and the equivalent
//! parameterisation by shock laws `H_{m,d-m}`.

use serde::{Deserialize, Serialize};

use crate::distortion::DistortionFn;
use crate::error::{Error, Result};

/// Tolerance for `g_1 = id` and `g_k(1) = 1` at construction.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for the normalization `prod_m H_m^binom(d-1,m-1) = id`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Evaluation points in `[0, 1]` used for pointwise checks.
///
/// Defaults to 1025 uniform points augmented with 32 log-spaced points in
/// `(1e-8, 1e-2]` to resolve behaviour near zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalGrid {
    uniform: usize,
    log_points: usize,
    #[serde(skip)]
    points: Vec<f64>,
}

impl EvalGrid {
    pub fn new(uniform: usize, log_points: usize) -> Self {
        let uniform = uniform.max(2);
        let mut points: Vec<f64> = (0..uniform).map(|i| i as f64 / (uniform - 1) as f64).collect();
        points.extend((1..=log_points).map(|i| {
            10f64.powf(-8.0 + 6.0 * i as f64 / log_points as f64)
        }));
        points.sort_by(f64::total_cmp);
        points.dedup();
        Self { uniform, log_points, points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for EvalGrid {
    fn default() -> Self {
        Self::new(1025, 32)
    }
}

/// `binom(n, k)` as a float.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Dimension `d >= 2` and factors `g_1 = id, g_2, ..., g_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CopulaWire")]
pub struct OrderedFactorCopula {
    d: usize,
    g: Vec<DistortionFn>,
}

#[derive(Deserialize)]
struct CopulaWire {
    d: usize,
    g: Vec<DistortionFn>,
}

impl TryFrom<CopulaWire> for OrderedFactorCopula {
    type Error = Error;

    fn try_from(w: CopulaWire) -> Result<Self> {
        make_copula(w.d, w.g)
    }
}

/// Build a copula container. Only `g_1 = id` and `g_k(1) = 1` are asserted;
/// whether the result is a distribution function is the validity module's job.
pub fn make_copula(d: usize, g: Vec<DistortionFn>) -> Result<OrderedFactorCopula> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { d, min: 2 });
    }
    if g.len() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: g.len() });
    }
    let grid = EvalGrid::default();
    for &u in grid.points() {
        let deviation = (g[0].eval(u) - u).abs();
        if !(deviation <= CONSTRUCTION_TOL) {
            return Err(Error::FirstFactorNotIdentity { u, deviation });
        }
    }
    check_endpoints(&g, CONSTRUCTION_TOL)?;
    Ok(OrderedFactorCopula { d, g })
}

fn check_endpoints(g: &[DistortionFn], tol: f64) -> Result<()> {
    for (i, gk) in g.iter().enumerate().skip(1) {
        let value = gk.eval(1.0);
        if !((value - 1.0).abs() <= tol) {
            return Err(Error::EndpointNotOne { k: i + 1, value });
        }
    }
    Ok(())
}

impl OrderedFactorCopula {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn factors(&self) -> &[DistortionFn] {
        &self.g
    }

    /// `g_k`, 1-based.
    pub fn g(&self, k: usize) -> &DistortionFn {
        &self.g[k - 1]
    }

    /// Distribution function: sort the arguments ascending and multiply factor-wise.
    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, actual: u.len() });
        }
        for (index, &value) in u.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfUnitInterval { index, value });
            }
        }
        if u.contains(&0.0) {
            return Ok(0.0);
        }
        let mut sorted = u.to_vec();
        sorted.sort_by(f64::total_cmp);
        let value = sorted
            .iter()
            .zip(&self.g)
            .fold(1.0, |acc, (&x, gk)| acc * gk.eval(x));
        Ok(value.clamp(0.0, 1.0))
    }

    /// Diagonal section `delta_k(u) = prod_{i <= k} g_i(u)`, multiplied left to right.
    pub fn delta(&self, k: usize, u: f64) -> f64 {
        self.g[..k].iter().fold(1.0, |acc, gi| acc * gi.eval(u))
    }

    /// `delta_k(u) / delta_{k-1}(u)`, which is `g_k(u)`: the probability that the
    /// first `k` coordinates are all `<= u` given the first `k - 1` are.
    pub fn diagonal_ratio(&self, k: usize, u: f64) -> Result<f64> {
        if k == 0 || k > self.d {
            return Err(Error::Index(format!("k = {k} outside 1..={}", self.d)));
        }
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::OutOfUnitInterval { index: 0, value: u });
        }
        if u == 0.0 && self.delta(k - 1, 0.0) == 0.0 {
            return Err(Error::Domain(format!(
                "ratio delta_{k}/delta_{} is 0/0 at u = 0",
                k - 1
            )));
        }
        Ok(self.g[k - 1].eval(u))
    }

    /// Every `g_k` must be strictly positive on `(0, 1]` before negative powers
    /// of it are formed.
    pub fn check_positive(&self, grid: &EvalGrid) -> Result<()> {
        for (i, gk) in self.g.iter().enumerate() {
            for &u in grid.points().iter().filter(|&&u| u > 0.0) {
                if !(gk.eval(u) > 0.0) {
                    return Err(Error::NotPositive { k: i + 1, u });
                }
            }
        }
        Ok(())
    }

    /// `H_{j,k} = prod_{i<j} g_{k+1+i}^((-1)^i binom(j-1,i))` (no positivity check).
    pub fn h_jk(&self, j: usize, k: usize) -> Result<DistortionFn> {
        if j == 0 || j + k > self.d {
            return Err(Error::Index(format!("(j, k) = ({j}, {k}) needs j >= 1, j + k <= {}", self.d)));
        }
        let factors = (0..j)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                (self.g[k + i].clone(), sign * binomial(j - 1, i))
            })
            .collect();
        Ok(DistortionFn::power_product(factors))
    }
}

/// Shock laws `H_{m,d-m}` indexed by cardinality `m = 1..=d` (element `m - 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HWire")]
pub struct HFamily {
    d: usize,
    #[serde(rename = "H")]
    h: Vec<DistortionFn>,
}

#[derive(Deserialize)]
struct HWire {
    d: usize,
    #[serde(rename = "H")]
    h: Vec<DistortionFn>,
}

impl TryFrom<HWire> for HFamily {
    type Error = Error;

    fn try_from(w: HWire) -> Result<Self> {
        if w.h.len() != w.d {
            return Err(Error::DimensionMismatch { expected: w.d, actual: w.h.len() });
        }
        HFamily::new(w.h)
    }
}

impl HFamily {
    pub fn new(h: Vec<DistortionFn>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::DimensionTooSmall { d: 0, min: 1 });
        }
        Ok(Self { d: h.len(), h })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `H_{m,d-m}`, 1-based cardinality.
    pub fn h(&self, m: usize) -> &DistortionFn {
        &self.h[m - 1]
    }

    pub fn laws(&self) -> &[DistortionFn] {
        &self.h
    }

    /// Largest `|prod_m H_m(u)^binom(d-1,m-1) - u|` over the grid and where it occurs.
    pub fn normalization_deviation(&self, grid: &EvalGrid) -> (f64, f64) {
        let g1 = self.g_factor(1);
        grid.points()
            .iter()
            .map(|&u| {
                let dev = (g1.eval(u) - u).abs();
                (if dev.is_nan() { f64::INFINITY } else { dev }, u)
            })
            .fold((0.0, 0.0), |best, cur| if cur.0 > best.0 { cur } else { best })
    }

    fn g_factor(&self, k: usize) -> DistortionFn {
        let d = self.d;
        let factors = (1..=d + 1 - k)
            .map(|m| (self.h[m - 1].clone(), binomial(d - k, m - 1)))
            .collect();
        DistortionFn::power_product(factors)
    }
}

/// Shock laws of a copula: `H_{m,d-m}` for `m = 1..=d`, built in the log domain.
pub fn h_from_g(c: &OrderedFactorCopula) -> Result<HFamily> {
    c.check_positive(&EvalGrid::default())?;
    let d = c.d();
    let h = (1..=d).map(|m| c.h_jk(m, d - m)).collect::<Result<Vec<_>>>()?;
    HFamily::new(h)
}

/// Factors `g_k = prod_{m <= d+1-k} H_{m,d-m}^binom(d-k,m-1)`; fails when the
/// reconstructed `g_1` deviates from the identity by more than 1e-10.
pub fn g_from_h(h: &HFamily) -> Result<OrderedFactorCopula> {
    g_from_h_on(h, &EvalGrid::default())
}

pub fn g_from_h_on(h: &HFamily, grid: &EvalGrid) -> Result<OrderedFactorCopula> {
    let d = h.d();
    if d < 2 {
        return Err(Error::DimensionTooSmall { d, min: 2 });
    }
    let (max_deviation, u) = h.normalization_deviation(grid);
    if !(max_deviation <= NORMALIZATION_TOL) {
        return Err(Error::Normalization { max_deviation, u });
    }
    let mut g = vec![DistortionFn::identity()];
    g.extend((2..=d).map(|k| h.g_factor(k)));
    check_endpoints(&g, NORMALIZATION_TOL)?;
    Ok(OrderedFactorCopula { d, g })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indep(d: usize) -> OrderedFactorCopula {
        make_copula(d, vec![DistortionFn::identity(); d]).unwrap()
    }

    fn comonotone(d: usize) -> OrderedFactorCopula {
        let mut g = vec![DistortionFn::identity()];
        g.extend(vec![DistortionFn::constant(1.0); d - 1]);
        make_copula(d, g).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = EvalGrid::default();
        assert_eq!(g.len(), 1025 + 32);
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(*g.points().last().unwrap(), 1.0);
        assert!(g.points()[1] > 1e-8 && g.points()[1] < 2e-8);
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(10, 0), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(23, 11), 1_352_078.0);
    }

    #[test]
    fn make_copula_cases() {
        assert!(make_copula(2, vec![DistortionFn::identity(); 2]).is_ok());
        assert!(make_copula(2, vec![DistortionFn::identity(), DistortionFn::constant(1.0)]).is_ok());
        let err = make_copula(2, vec![DistortionFn::identity(), DistortionFn::affine(0.9, 0.0)]);
        assert!(matches!(err, Err(Error::EndpointNotOne { k: 2, .. })));
        assert!(matches!(
            make_copula(3, vec![DistortionFn::identity(); 2]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            make_copula(2, vec![DistortionFn::power(1.1), DistortionFn::identity()]),
            Err(Error::FirstFactorNotIdentity { .. })
        ));
        assert!(make_copula(1, vec![DistortionFn::identity()]).is_err());
    }

    #[test]
    fn cdf_examples() {
        assert!((indep(3).cdf(&[0.3, 0.5, 0.2]).unwrap() - 0.03).abs() < 1e-15);
        assert_eq!(comonotone(2).cdf(&[0.3, 0.5]).unwrap(), 0.3);
        assert_eq!(indep(2).cdf(&[0.0, 0.5]).unwrap(), 0.0);
        assert!(matches!(indep(2).cdf(&[1.2, 0.5]), Err(Error::OutOfUnitInterval { index: 0, .. })));
    }

    #[test]
    fn diagonal_ratio_examples() {
        assert_eq!(indep(2).diagonal_ratio(2, 0.7).unwrap(), 0.7);
        let mo = make_copula(2, vec![DistortionFn::identity(), DistortionFn::power(0.5)]).unwrap();
        assert_eq!(mo.diagonal_ratio(2, 0.25).unwrap(), 0.5);
        assert_eq!(mo.diagonal_ratio(2, 1.0).unwrap(), 1.0);
        assert!(matches!(mo.diagonal_ratio(2, 0.0), Err(Error::Domain(_))));
        assert_eq!(mo.diagonal_ratio(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn h_from_g_independence_telescopes() {
        let h = h_from_g(&indep(3)).unwrap();
        assert_eq!(h.h(1), &DistortionFn::identity());
        assert_eq!(h.h(2), &DistortionFn::constant(1.0));
        assert_eq!(h.h(3), &DistortionFn::constant(1.0));
    }

    #[test]
    fn h_from_g_bivariate_generic() {
        let g2 = DistortionFn::min_affine(vec![(2.0, 0.2), (0.5, 0.5)]);
        let c = make_copula(2, vec![DistortionFn::identity(), g2.clone()]).unwrap();
        let h = h_from_g(&c).unwrap();
        for &u in EvalGrid::default().points().iter().skip(1) {
            assert_eq!(h.h(1).eval(u), g2.eval(u));
            assert!((h.h(2).eval(u) - u / g2.eval(u)).abs() < 1e-15);
        }
        assert_eq!(h.h(2).zero_limit(), 0.0);
    }

    #[test]
    fn h_from_g_rejects_vanishing_factor() {
        let g2 = DistortionFn::min_affine(vec![(2.0, -0.5), (1.0, 0.0)]);
        let c = make_copula(2, vec![DistortionFn::identity(), g2]).unwrap();
        assert!(matches!(h_from_g(&c), Err(Error::NotPositive { k: 2, .. })));
    }

    #[test]
    fn g_from_h_basic_cases() {
        let c = g_from_h(&HFamily::new(vec![DistortionFn::identity(), DistortionFn::constant(1.0)]).unwrap()).unwrap();
        assert_eq!(c.g(2), &DistortionFn::identity());
        let c = g_from_h(&HFamily::new(vec![DistortionFn::constant(1.0), DistortionFn::identity()]).unwrap()).unwrap();
        assert_eq!(c.g(2), &DistortionFn::constant(1.0));
    }

    #[test]
    fn g_from_h_reports_normalization_violation() {
        let h = HFamily::new(vec![DistortionFn::identity(), DistortionFn::identity()]).unwrap();
        match g_from_h(&h) {
            Err(Error::Normalization { max_deviation, u }) => {
                assert!((max_deviation - 0.25).abs() < 1e-12);
                assert_eq!(u, 0.5);
            }
            other => panic!("expected normalization error, got {other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let c = make_copula(2, vec![DistortionFn::identity(), DistortionFn::power(0.5)]).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: OrderedFactorCopula = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let h = h_from_g(&c).unwrap();
        let text = serde_json::to_string(&h).unwrap();
        assert!(text.contains("\"H\""));
        let back: HFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(back, h);
    }
}
