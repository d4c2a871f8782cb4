//! Grid-based checks of the equivalent validity conditions for ordered-product
//! copulas, d-monotone sequences, extreme-value detection and bivariate tail
//! dependence.
//!
//! Grid checks can falsify a condition but never certify it: a passing report
//! means no violation was found at the stated resolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{binomial, EvalGrid, HFamily, OrderedFactorCopula};
use crate::distortion::DistortionFn;
use crate::error::{Error, Result};

/// Alternating sums below `-NEGATIVITY_TOL` count as violations.
pub const NEGATIVITY_TOL: f64 = 1e-10;
/// Tolerance for d-monotone alternating sums.
pub const MONOTONE_SEQ_TOL: f64 = 1e-12;
/// Dynamic range beyond which alternating sums are recomputed with compensation.
const COMPENSATE_RANGE: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `G_{j,k}(u, v) >= 0` for all `0 < u < v <= 1`, `k + j <= d`.
    #[serde(rename = "ii")]
    AlternatingSums,
    /// `H_{j,k}` in D for all `k + j <= d`.
    #[serde(rename = "iii")]
    AllShockLaws,
    /// `H_{m,d-m}` in D for `m = 1..=d`.
    #[serde(rename = "iv")]
    TopShockLaws,
    /// A standalone shock-law family: each law in D and the normalization holds.
    #[serde(rename = "normalization")]
    Normalization,
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ii" => Ok(Self::AlternatingSums),
            "iii" => Ok(Self::AllShockLaws),
            "iv" => Ok(Self::TopShockLaws),
            "normalization" => Ok(Self::Normalization),
            other => Err(Error::Malformed(format!("unknown condition `{other}` (expected ii|iii|iv)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Negativity,
    NotIncreasing,
    NotPositive,
    EndpointNotOne,
    OutOfRange,
    Discontinuity,
    Normalization,
    NotFinite,
}

/// A grid location where a condition fails. `value` is the signed margin that
/// must be nonnegative (positive for [`WitnessKind::NotPositive`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub j: usize,
    pub k: usize,
    pub u: f64,
    pub v: f64,
    /// Infinite margins are written to JSON as `"inf"` / `"-inf"`.
    #[serde(with = "extended_f64")]
    pub value: f64,
}

mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&x.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Witness {
    fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.j, self.k)
            .cmp(&(other.j, other.k))
            .then(self.u.total_cmp(&other.u))
            .then(self.v.total_cmp(&other.v))
            .then(self.kind.cmp(&other.kind))
    }
}

/// Resolution of the grid checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    /// Uniform points on `[0, 1]` for the pairwise `(u, v)` scan.
    pub pair_points: usize,
    /// Points for pointwise membership checks.
    pub eval: EvalGrid,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { pair_points: 257, eval: EvalGrid::default() }
    }
}

impl GridSpec {
    /// Jumps between adjacent evaluation points above this count as discontinuities.
    pub fn continuity_threshold(&self) -> f64 {
        10.0 / self.eval.len() as f64
    }

    fn pair_values(&self) -> Vec<f64> {
        let n = self.pair_points.max(2);
        (1..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub negativity: f64,
    pub monotonicity: f64,
    pub endpoint: f64,
    pub continuity_jump: f64,
    pub normalization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub verdict: Verdict,
    pub condition: Condition,
    pub witnesses: Vec<Witness>,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
}

impl ValidityReport {
    fn from_witnesses(condition: Condition, mut witnesses: Vec<Witness>, grid: &GridSpec) -> Self {
        witnesses.sort_by(Witness::canonical_cmp);
        let verdict = if witnesses.iter().any(|w| w.kind != WitnessKind::NotFinite) {
            Verdict::Fail
        } else if witnesses.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        };
        Self {
            verdict,
            condition,
            witnesses,
            grid: grid.clone(),
            tolerances: Tolerances {
                negativity: NEGATIVITY_TOL,
                monotonicity: NEGATIVITY_TOL,
                endpoint: NEGATIVITY_TOL,
                continuity_jump: grid.continuity_threshold(),
                normalization: crate::copula::NORMALIZATION_TOL,
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Witness with the most negative margin.
    pub fn worst(&self) -> Option<&Witness> {
        self.witnesses.iter().min_by(|a, b| a.value.total_cmp(&b.value))
    }
}

fn neumaier_sum(terms: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// `sum_{i=0}^{j} binom(j,i) (-1)^i prod_{l<=i} gu[l] prod_{l>i} gv[l]` where
/// `gu`, `gv` hold `g_{k+1..k+j}` at `u` and `v`.
fn alternating_g_sum(gu: &[f64], gv: &[f64], terms: &mut Vec<f64>) -> f64 {
    let j = gu.len();
    terms.clear();
    let mut prefix = 1.0;
    for i in 0..=j {
        if i > 0 {
            prefix *= gu[i - 1];
        }
        let suffix: f64 = gv[i..].iter().product();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * binomial(j, i) * prefix * suffix);
    }
    let plain: f64 = terms.iter().sum();
    let (lo, hi) = terms
        .iter()
        .filter(|t| **t != 0.0)
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), t| (lo.min(t.abs()), hi.max(t.abs())));
    if hi > 0.0 && hi / lo > COMPENSATE_RANGE {
        neumaier_sum(terms)
    } else {
        plain
    }
}

/// `G_{j,k}(u, v)`; requires `j >= 1`, `k + j <= d`, `0 < u < v <= 1`.
pub fn compute_g(c: &OrderedFactorCopula, j: usize, k: usize, u: f64, v: f64) -> Result<f64> {
    if j == 0 || j + k > c.d() {
        return Err(Error::Index(format!("(j, k) = ({j}, {k}) needs j >= 1 and j + k <= {}", c.d())));
    }
    if !(0.0 < u && u < v && v <= 1.0) {
        return Err(Error::Domain(format!("need 0 < u < v <= 1, got u = {u}, v = {v}")));
    }
    let factors = &c.factors()[k..k + j];
    let gu: Vec<f64> = factors.iter().map(|g| g.eval(u)).collect();
    let gv: Vec<f64> = factors.iter().map(|g| g.eval(v)).collect();
    Ok(alternating_g_sum(&gu, &gv, &mut Vec::with_capacity(j + 1)))
}

/// Check one validity condition on a grid.
pub fn validate(c: &OrderedFactorCopula, condition: Condition, grid: &GridSpec) -> ValidityReport {
    let witnesses = match condition {
        Condition::AlternatingSums => scan_alternating_sums(c, grid),
        Condition::AllShockLaws => (1..=c.d())
            .flat_map(|j| (0..=c.d() - j).map(move |k| (j, k)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .flat_map(|(j, k)| shock_law_witnesses(c, j, k, grid))
            .collect(),
        Condition::TopShockLaws | Condition::Normalization => (1..=c.d())
            .into_par_iter()
            .flat_map(|m| shock_law_witnesses(c, m, c.d() - m, grid))
            .collect(),
    };
    ValidityReport::from_witnesses(condition, witnesses, grid)
}

fn scan_alternating_sums(c: &OrderedFactorCopula, grid: &GridSpec) -> Vec<Witness> {
    let d = c.d();
    let points = grid.pair_values();
    // values[p][i] = g_{i+1}(points[p])
    let values: Vec<Vec<f64>> = points
        .iter()
        .map(|&x| c.factors().iter().map(|g| g.eval(x)).collect())
        .collect();
    (0..points.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut out = Vec::new();
            let mut terms = Vec::with_capacity(d + 1);
            for b in a + 1..points.len() {
                for k in 0..d {
                    for j in 1..=d - k {
                        let g = alternating_g_sum(&values[a][k..k + j], &values[b][k..k + j], &mut terms);
                        if g < -NEGATIVITY_TOL || g.is_nan() {
                            out.push(Witness {
                                kind: if g.is_nan() { WitnessKind::NotFinite } else { WitnessKind::Negativity },
                                j,
                                k,
                                u: points[a],
                                v: points[b],
                                value: g,
                            });
                        }
                    }
                }
            }
            out
        })
        .collect()
}

/// Membership of `H_{j,k}` in D, checked on the evaluation grid.
fn shock_law_witnesses(c: &OrderedFactorCopula, j: usize, k: usize, grid: &GridSpec) -> Vec<Witness> {
    let points = grid.eval.points();
    let mut out = Vec::new();
    for g in &c.factors()[k..k + j] {
        for &u in points.iter().filter(|&&u| u > 0.0) {
            let value = g.eval(u);
            if !(value > 0.0) {
                out.push(Witness { kind: WitnessKind::NotPositive, j, k, u, v: u, value });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    match c.h_jk(j, k) {
        Ok(h) => membership_witnesses(&h, j, k, grid),
        Err(_) => out,
    }
}

fn membership_witnesses(h: &DistortionFn, j: usize, k: usize, grid: &GridSpec) -> Vec<Witness> {
    let points = grid.eval.points();
    let values: Vec<f64> = points.iter().map(|&u| h.eval(u)).collect();
    let threshold = grid.continuity_threshold();
    let mut out = Vec::new();
    let mut push = |kind, u, v, value| out.push(Witness { kind, j, k, u, v, value });

    for (&u, &value) in points.iter().zip(&values) {
        if value.is_nan() {
            push(WitnessKind::NotFinite, u, u, value);
            continue;
        }
        if value > 1.0 {
            push(WitnessKind::OutOfRange, u, u, 1.0 - value);
        }
        if u > 0.0 && value <= 0.0 {
            push(WitnessKind::NotPositive, u, u, value);
        }
    }
    for i in 0..points.len() - 1 {
        let (a, b) = (values[i], values[i + 1]);
        if a.is_nan() || b.is_nan() {
            continue;
        }
        let step = b - a;
        if step < -NEGATIVITY_TOL || step.is_nan() {
            push(WitnessKind::NotIncreasing, points[i], points[i + 1], step);
        }
        // continuity at zero holds by the right-limit convention
        if i > 0 && step.abs() > threshold && !jump_vanishes(h, points[i], points[i + 1], threshold) {
            push(WitnessKind::Discontinuity, points[i], points[i + 1], threshold - step.abs());
        }
    }
    let top = h.eval(1.0);
    if !((top - 1.0).abs() <= NEGATIVITY_TOL) {
        push(WitnessKind::EndpointNotOne, 1.0, 1.0, -(top - 1.0).abs());
    }
    out
}

/// Whether a large step between `a < b` shrinks below `threshold` under
/// bisection, following the half with the larger step. A jump discontinuity keeps
/// its size down to the resolution floor; a steep continuous function does not.
fn jump_vanishes(h: &DistortionFn, mut a: f64, mut b: f64, threshold: f64) -> bool {
    const WIDTH_FLOOR: f64 = 1e-13;
    let (mut fa, mut fb) = (h.eval(a), h.eval(b));
    while b - a > WIDTH_FLOOR {
        if (fb - fa).abs() <= threshold {
            return true;
        }
        let m = 0.5 * (a + b);
        let fm = h.eval(m);
        if (fm - fa).abs() >= (fb - fm).abs() {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    (fb - fa).abs() <= threshold
}

/// Check a standalone shock-law family: each `H_m` in D and the normalization
/// `prod_m H_m^binom(d-1,m-1) = id`.
pub fn validate_h_family(h: &HFamily, grid: &GridSpec) -> ValidityReport {
    let d = h.d();
    let mut witnesses: Vec<Witness> = (1..=d)
        .flat_map(|m| membership_witnesses(h.h(m), m, d - m, grid))
        .collect();
    let (deviation, u) = h.normalization_deviation(&grid.eval);
    if !(deviation <= crate::copula::NORMALIZATION_TOL) {
        witnesses.push(Witness { kind: WitnessKind::Normalization, j: d, k: 0, u, v: u, value: -deviation });
    }
    ValidityReport::from_witnesses(Condition::Normalization, witnesses, grid)
}

/// Real sequence `(a_0, ..., a_{d-1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonotoneSequence(pub Vec<f64>);

impl MonotoneSequence {
    pub fn new(a: Vec<f64>) -> Self {
        Self(a)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `sum_{i<j} (-1)^i binom(j-1, i) a_{k+i}`.
    pub fn alternating_sum(&self, k: usize, j: usize) -> f64 {
        (0..j)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(j - 1, i) * self.0[k + i]
            })
            .sum()
    }
}

/// Outcome of [`is_d_monotone`]; `witness` is the first violating `(k, j)` in
/// `k`-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCheck {
    pub holds: bool,
    pub witness: Option<(usize, usize, f64)>,
}

/// Whether every alternating sum with `k + j <= d` is `>= -1e-12`. Sequences
/// shorter than `d` do not qualify.
pub fn is_d_monotone(s: &MonotoneSequence, d: usize) -> MonotoneCheck {
    if s.0.len() < d {
        return MonotoneCheck { holds: false, witness: None };
    }
    for k in 0..d {
        for j in 1..=d - k {
            let value = s.alternating_sum(k, j);
            if !(value >= -MONOTONE_SEQ_TOL) {
                return MonotoneCheck { holds: false, witness: Some((k, j, value)) };
            }
        }
    }
    MonotoneCheck { holds: true, witness: None }
}

/// Recover `a_{k-1}` with `g_k(u) = u^{a_{k-1}}` if the copula is of
/// extreme-value type. Factors whose limit at zero differs from that of the
/// fitted power (an atom-like limit) are rejected.
pub fn detect_extreme_value(c: &OrderedFactorCopula, tol: f64) -> Option<MonotoneSequence> {
    const REFERENCE: f64 = 0.5;
    let grid = EvalGrid::default();
    let mut a = Vec::with_capacity(c.d());
    for g in c.factors() {
        let exponent = g.eval(REFERENCE).ln() / REFERENCE.ln();
        if !exponent.is_finite() || exponent < 0.0 {
            return None;
        }
        let expected_limit = if exponent > 0.0 { 0.0 } else { 1.0 };
        if g.zero_limit() != expected_limit {
            return None;
        }
        let fits = grid
            .points()
            .iter()
            .filter(|&&u| u > 0.0)
            .all(|&u| (g.eval(u) - u.powf(exponent)).abs() <= tol);
        if !fits {
            return None;
        }
        a.push(exponent);
    }
    let seq = MonotoneSequence(a);
    is_d_monotone(&seq, c.d()).holds.then_some(seq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDependence {
    pub lambda_l: f64,
    pub lambda_u: f64,
}

/// Bivariate tail dependence from `g_2`: `lambda_L = g_2(0+)` and
/// `lambda_U = 1 - g_2'(1-)`. The left derivative is taken in closed form when
/// the function provides one, otherwise from Richardson-extrapolated one-sided
/// difference quotients at `h = 1e-3, 5e-4, 2.5e-4`.
pub fn tail_dependence(g2: &DistortionFn) -> TailDependence {
    let slope = g2.left_derivative_at_one().unwrap_or_else(|| {
        let top = g2.eval(1.0);
        let q = |h: f64| (top - g2.eval(1.0 - h)) / h;
        let (d1, d2, d3) = (q(1e-3), q(5e-4), q(2.5e-4));
        let r1 = 2.0 * d2 - d1;
        let r2 = 2.0 * d3 - d2;
        (4.0 * r2 - r1) / 3.0
    });
    TailDependence {
        lambda_l: g2.zero_limit().clamp(0.0, 1.0),
        lambda_u: (1.0 - slope).clamp(0.0, 1.0),
    }
}
