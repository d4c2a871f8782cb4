//! Named parametric presets and the JSON descriptor that selects them.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bernstein::BernsteinFamily;
use crate::copula::{make_copula, OrderedFactorCopula};
use crate::distortion::DistortionFn;
use crate::error::{Error, Result};
use crate::frailty::copula_from_bernstein;
use crate::validity::{is_d_monotone, validate, Condition, GridSpec, MonotoneSequence};

pub fn independence(d: usize) -> Result<OrderedFactorCopula> {
    make_copula(d, vec![DistortionFn::identity(); d])
}

pub fn comonotone(d: usize) -> Result<OrderedFactorCopula> {
    let mut g = vec![DistortionFn::identity()];
    g.extend(std::iter::repeat_n(DistortionFn::constant(1.0), d.saturating_sub(1)));
    make_copula(d, g)
}

/// `g_k(u) = u^{a_{k-1}}` for `k = 1..=d`, without checking `a`.
pub fn marshall_olkin_unchecked(a: &[f64], d: usize) -> Result<OrderedFactorCopula> {
    if a.len() < d {
        return Err(Error::DimensionMismatch { expected: d, actual: a.len() });
    }
    make_copula(d, a[..d].iter().map(|&x| DistortionFn::power(x)).collect())
}

/// Exchangeable Marshall–Olkin copula; `a` must start at 1 and be d-monotone.
pub fn marshall_olkin(a: &[f64], d: usize) -> Result<OrderedFactorCopula> {
    if a.len() < d {
        return Err(Error::DimensionMismatch { expected: d, actual: a.len() });
    }
    if a.first().is_none_or(|&a0| (a0 - 1.0).abs() > 1e-12) {
        return Err(Error::InvalidParameter(format!("a_0 must be 1, got {:?}", a.first())));
    }
    let check = is_d_monotone(&MonotoneSequence::new(a[..d].to_vec()), d);
    if let Some((k, j, value)) = check.witness {
        return Err(Error::NotDMonotone { d, k, j, value });
    }
    marshall_olkin_unchecked(a, d)
}

/// Kink of `min { a u + b, 1 - c + c u }`.
pub fn kink_location(a: f64, b: f64, c: f64) -> f64 {
    (1.0 - (b + c)) / (a - c)
}

fn piecewise_linear_g2(a: f64, b: f64, c: f64) -> DistortionFn {
    DistortionFn::min_affine(vec![(a, b), (c, 1.0 - c)])
}

/// Bivariate copula with `g_2(u) = min { a u + b, 1 - c + c u }`, admitted only
/// when `a > 1`, `b, c > 0`, `b + c <= 1` and the alternating-sum check finds no
/// violation.
pub fn piecewise_linear_bivariate(a: f64, b: f64, c: f64) -> Result<OrderedFactorCopula> {
    if !(a > 1.0 && b > 0.0 && c > 0.0 && b + c <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need a > 1, b > 0, c > 0, b + c <= 1 (got a = {a}, b = {b}, c = {c})"
        )));
    }
    let copula = make_copula(2, vec![DistortionFn::identity(), piecewise_linear_g2(a, b, c)])?;
    let report = validate(&copula, Condition::AlternatingSums, &GridSpec::default());
    if !report.passed() {
        return Err(Error::Invalid(Box::new(report)));
    }
    Ok(copula)
}

/// Closed-form copula of the Sato frailty model with `Psi_1(x) = beta log(1 + x/eta)`,
/// together with the family itself. The copula depends on `beta` only.
pub fn sato_gamma(beta: f64, eta: f64, h: f64, d: usize) -> Result<(OrderedFactorCopula, BernsteinFamily)> {
    let family = BernsteinFamily::sato_gamma(beta, eta, h)?;
    let mut g = vec![DistortionFn::identity()];
    g.extend((2..=d as u32).map(|k| DistortionFn::sato_gamma(beta, k)));
    Ok((make_copula(d, g)?, family))
}

/// `{"name": ..., "params": {...}, "d": N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub name: String,
    #[serde(default)]
    pub params: Value,
    pub d: usize,
}

/// A parsed descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Independence { d: usize },
    Comonotone { d: usize },
    PiecewiseLinear { a: f64, b: f64, c: f64 },
    MarshallOlkin { a: Vec<f64>, d: usize },
    SatoGamma { beta: f64, eta: f64, h: f64, d: usize },
    /// Any Bernstein family; the copula comes from the frailty construction.
    Bernstein { family: BernsteinFamily, d: usize },
}

fn param(params: &Value, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Malformed(format!("missing numeric parameter `{key}`")))
}

impl FamilyDescriptor {
    pub fn preset(&self) -> Result<Preset> {
        let d = self.d;
        let p = &self.params;
        Ok(match self.name.as_str() {
            "independence" => Preset::Independence { d },
            "comonotone" => Preset::Comonotone { d },
            "piecewise_linear_bivariate" => {
                if d != 2 {
                    return Err(Error::DimensionMismatch { expected: 2, actual: d });
                }
                Preset::PiecewiseLinear { a: param(p, "a")?, b: param(p, "b")?, c: param(p, "c")? }
            }
            "marshall_olkin" => {
                let a: Vec<f64> = serde_json::from_value(
                    p.get("a").cloned().ok_or_else(|| Error::Malformed("missing parameter `a`".into()))?,
                )?;
                Preset::MarshallOlkin { a, d }
            }
            "sato_gamma" => Preset::SatoGamma { beta: param(p, "beta")?, eta: param(p, "eta")?, h: param(p, "H")?, d },
            "bernstein" => Preset::Bernstein { family: serde_json::from_value(p.clone())?, d },
            other => return Err(Error::Malformed(format!("unknown family `{other}`"))),
        })
    }
}

impl Preset {
    /// Read either a [`FamilyDescriptor`] or a bare [`BernsteinFamily`] object
    /// (`{"kind", "psi1", "H"}` with an optional `"d"`, else `default_d`).
    pub fn from_json(value: &Value, default_d: usize) -> Result<Self> {
        if value.get("name").is_some() {
            return serde_json::from_value::<FamilyDescriptor>(value.clone())?.preset();
        }
        let d = match value.get("d") {
            Some(v) => v.as_u64().ok_or_else(|| Error::Malformed("`d` must be a positive integer".into()))? as usize,
            None => default_d,
        };
        Ok(Self::Bernstein { family: serde_json::from_value(value.clone())?, d })
    }

    pub fn d(&self) -> usize {
        match self {
            Self::PiecewiseLinear { .. } => 2,
            Self::Independence { d }
            | Self::Comonotone { d }
            | Self::MarshallOlkin { d, .. }
            | Self::SatoGamma { d, .. }
            | Self::Bernstein { d, .. } => *d,
        }
    }

    /// The copula with every preset precondition enforced.
    pub fn copula(&self) -> Result<OrderedFactorCopula> {
        match self {
            Self::Independence { d } => independence(*d),
            Self::Comonotone { d } => comonotone(*d),
            Self::PiecewiseLinear { a, b, c } => piecewise_linear_bivariate(*a, *b, *c),
            Self::MarshallOlkin { a, d } => marshall_olkin(a, *d),
            Self::SatoGamma { beta, eta, h, d } => sato_gamma(*beta, *eta, *h, *d).map(|(c, _)| c),
            Self::Bernstein { family, d } => copula_from_bernstein(family, *d),
        }
    }

    /// The copula container without parameter gating, so that validity checks can
    /// report on inadmissible parameters instead of refusing them.
    pub fn raw_copula(&self) -> Result<OrderedFactorCopula> {
        match self {
            Self::PiecewiseLinear { a, b, c } => {
                make_copula(2, vec![DistortionFn::identity(), piecewise_linear_g2(*a, *b, *c)])
            }
            Self::MarshallOlkin { a, d } => marshall_olkin_unchecked(a, *d),
            _ => self.copula(),
        }
    }

    /// The Bernstein family behind frailty-backed presets.
    pub fn bernstein(&self) -> Option<BernsteinFamily> {
        match self {
            Self::SatoGamma { beta, eta, h, .. } => BernsteinFamily::sato_gamma(*beta, *eta, *h).ok(),
            Self::Bernstein { family, .. } => Some(family.clone()),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Independence { d } => format!("independence(d={d})"),
            Self::Comonotone { d } => format!("comonotone(d={d})"),
            Self::PiecewiseLinear { a, b, c } => format!("piecewise_linear_bivariate(a={a},b={b},c={c})"),
            Self::MarshallOlkin { a, d } => format!("marshall_olkin(a={a:?},d={d})"),
            Self::SatoGamma { beta, eta, h, d } => format!("sato_gamma(beta={beta},eta={eta},H={h},d={d})"),
            Self::Bernstein { family, d } => format!("{}(d={d})", family.describe()),
        }
    }
}
