//! Exact sampler for the max-of-shocks representation: one independent shock
//! `Z^E ~ H_{|E|,d-|E|}` per nonempty subset `E` of `{1..d}` and
//! `X_k = max { Z^E : k in E }`.

use rand::Rng;

use crate::batch::{SampleBatch, SampleMethod};
use crate::copula::{h_from_g, HFamily, OrderedFactorCopula};
use crate::distortion::{DistortionFn, QuantileTable};
use crate::error::{Error, Result};
use crate::rng::fill_rows;
use crate::validity::{validate, validate_h_family, Condition, GridSpec};

/// Largest dimension the shock sampler accepts (`2^24 - 1` shocks per draw).
pub const MAX_SHOCK_DIM: usize = 24;

const TABLE_CELLS: usize = 1024;

/// Inverse-CDF strategy for one cardinality's shock law.
#[derive(Debug, Clone)]
enum ShockLaw {
    /// `H = 1` on `[0, 1]`: every shock is exactly 0.
    Degenerate,
    /// `H(u) = u^a`, inverted as `p^(1/a)`.
    Power { inv_exponent: f64 },
    Quantile(QuantileTable),
}

impl ShockLaw {
    fn new(h: &DistortionFn) -> Self {
        if h.zero_limit() >= 1.0 {
            return Self::Degenerate;
        }
        match h.power_exponent() {
            Some(a) if a > 0.0 => Self::Power { inv_exponent: 1.0 / a },
            _ => Self::Quantile(QuantileTable::new(h.clone(), TABLE_CELLS)),
        }
    }

    #[inline]
    fn quantile(&self, p: f64) -> f64 {
        match self {
            Self::Degenerate => 0.0,
            Self::Power { inv_exponent } => p.powf(*inv_exponent),
            Self::Quantile(table) => table.inverse(p),
        }
    }
}

/// Shock laws for every cardinality, ready for sampling.
#[derive(Debug, Clone)]
pub struct ShockModelSpec {
    h: HFamily,
    laws: Vec<ShockLaw>,
    label: String,
}

impl ShockModelSpec {
    /// Wrap a shock-law family after checking each law is a distribution function
    /// on `[0, 1]` and the normalization holds.
    pub fn from_h_family(h: HFamily) -> Result<Self> {
        let report = validate_h_family(&h, &GridSpec::default());
        if !report.passed() {
            return Err(Error::Invalid(Box::new(report)));
        }
        let laws = h.laws().iter().map(ShockLaw::new).collect();
        let label = format!("shock-laws(d={})", h.d());
        Ok(Self { h, laws, label })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn d(&self) -> usize {
        self.h.d()
    }

    pub fn h_family(&self) -> &HFamily {
        &self.h
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Probability mass of the atom at zero for cardinality `m`.
    pub fn atom_at_zero(&self, m: usize) -> f64 {
        self.h.h(m).zero_limit().min(1.0)
    }

    /// Whether shocks of cardinality `m` are identically zero.
    pub fn is_degenerate(&self, m: usize) -> bool {
        matches!(self.laws[m - 1], ShockLaw::Degenerate)
    }

    /// One draw of `(X_1, ..., X_d)` into `row`.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, row: &mut [f64]) {
        let d = row.len();
        row.fill(0.0);
        let limit = 1u64 << d;
        for (m, law) in (1..=d).zip(&self.laws) {
            if matches!(law, ShockLaw::Degenerate) {
                continue;
            }
            // masks of popcount m in increasing order (Gosper's hack)
            let mut mask: u64 = (1u64 << m) - 1;
            while mask < limit {
                let z = law.quantile(rng.random::<f64>());
                if z > 0.0 {
                    let mut bits = mask;
                    while bits != 0 {
                        let k = bits.trailing_zeros() as usize;
                        if z > row[k] {
                            row[k] = z;
                        }
                        bits &= bits - 1;
                    }
                }
                let low = mask & mask.wrapping_neg();
                let ripple = mask + low;
                mask = (((ripple ^ mask) >> 2) / low) | ripple;
            }
        }
    }
}

/// Shock model of a copula; fails with the validity report when condition (iv)
/// is violated on the default grid.
pub fn build_shock_model(c: &OrderedFactorCopula) -> Result<ShockModelSpec> {
    let report = validate(c, Condition::TopShockLaws, &GridSpec::default());
    if !report.passed() {
        return Err(Error::Invalid(Box::new(report)));
    }
    let h = h_from_g(c)?;
    let laws = h.laws().iter().map(ShockLaw::new).collect();
    let label = format!("ordered-factor(d={})", c.d());
    Ok(ShockModelSpec { h, laws, label })
}

/// `n` draws; draw `i` uses the random stream `(seed, i)`.
pub fn sample_shock(spec: &ShockModelSpec, n: usize, seed: u64) -> Result<SampleBatch> {
    let d = spec.d();
    if d > MAX_SHOCK_DIM {
        return Err(Error::DimensionOverCap { d, cap: MAX_SHOCK_DIM });
    }
    let data = fill_rows(n, d, seed, |rng, row| {
        spec.draw(rng, row);
        Ok(())
    })?;
    SampleBatch::new(d, data, SampleMethod::Shock, seed, spec.label.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::make_copula;

    fn mo(a: &[f64]) -> OrderedFactorCopula {
        make_copula(a.len(), a.iter().map(|&x| DistortionFn::power(x)).collect()).unwrap()
    }

    #[test]
    fn gosper_enumerates_every_mask_once() {
        for d in 1..=6usize {
            let mut seen = vec![0u32; 1 << d];
            for m in 1..=d {
                let mut mask: u64 = (1u64 << m) - 1;
                while mask < (1u64 << d) {
                    assert_eq!(mask.count_ones() as usize, m);
                    seen[mask as usize] += 1;
                    let low = mask & mask.wrapping_neg();
                    let ripple = mask + low;
                    mask = (((ripple ^ mask) >> 2) / low) | ripple;
                }
            }
            assert_eq!(seen[0], 0);
            assert!(seen[1..].iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn independence_and_comonotone_laws() {
        let spec = build_shock_model(&mo(&[1.0, 1.0])).unwrap();
        assert!(!spec.is_degenerate(1));
        assert!(spec.is_degenerate(2));
        let spec = build_shock_model(&mo(&[1.0, 0.0])).unwrap();
        assert!(spec.is_degenerate(1));
        assert!(!spec.is_degenerate(2));
    }

    #[test]
    fn marshall_olkin_shock_exponents() {
        let spec = build_shock_model(&mo(&[1.0, 0.5, 0.25])).unwrap();
        for m in 1..=3 {
            assert_eq!(spec.h_family().h(m).power_exponent(), Some(0.25));
        }
    }

    #[test]
    fn comonotone_rows_are_equal() {
        let spec = build_shock_model(&mo(&[1.0, 0.0])).unwrap();
        let batch = sample_shock(&spec, 1000, 3).unwrap();
        assert!(batch.rows().all(|r| r[0] == r[1]));
    }

    #[test]
    fn rejects_invalid_copula() {
        assert!(matches!(build_shock_model(&mo(&[1.0, 0.9, 0.1])), Err(Error::Invalid(_))));
    }

    #[test]
    fn rejects_normalization_violation() {
        let h = HFamily::new(vec![DistortionFn::identity(), DistortionFn::identity()]).unwrap();
        assert!(matches!(ShockModelSpec::from_h_family(h), Err(Error::Invalid(_))));
    }

    #[test]
    fn dimension_cap() {
        let c = make_copula(25, vec![DistortionFn::identity(); 25]).unwrap();
        let spec = build_shock_model(&c).unwrap();
        assert!(matches!(sample_shock(&spec, 1, 1), Err(Error::DimensionOverCap { .. })));
    }

    #[test]
    fn same_seed_same_batch() {
        let spec = build_shock_model(&mo(&[1.0, 0.5, 0.25])).unwrap();
        let a = sample_shock(&spec, 500, 11).unwrap();
        let b = sample_shock(&spec, 500, 11).unwrap();
        let c = sample_shock(&spec, 500, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.data(), c.data());
    }
}
