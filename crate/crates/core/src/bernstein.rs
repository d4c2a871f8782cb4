//! Consistent families of Bernstein functions `{Psi_t}` describing additive
//! subordinators: Lévy kind (`Psi_t = t Psi_1`) and self-similar Sato kind
//! (`Psi_t(x) = Psi_1(x t^H)`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdditiveKind {
    Levy,
    /// Self-similar with index `h > 0`.
    Sato { h: f64 },
}

/// The base exponent `Psi_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplaceExponent {
    /// `beta * log(1 + x / eta)`: the gamma subordinator's exponent.
    Log { beta: f64, eta: f64 },
    /// `drift * x + rate * jump_mean * x / (1 + jump_mean * x)`: linear drift plus
    /// compound Poisson jumps with exponentially distributed sizes.
    CompoundPoisson { drift: f64, rate: f64, jump_mean: f64 },
}

impl LaplaceExponent {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Log { beta, eta } => beta * (x / eta).ln_1p(),
            Self::CompoundPoisson { drift, rate, jump_mean } => {
                drift * x + rate * jump_mean * x / (1.0 + jump_mean * x)
            }
        }
    }
}

/// Lévy–Khintchine triplet of `Psi_1`, kept for documentation output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevyMeasureRecord {
    pub killing: f64,
    pub drift: f64,
    pub density: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyWire", into = "FamilyWire")]
pub struct BernsteinFamily {
    kind: AdditiveKind,
    psi1: LaplaceExponent,
}

impl BernsteinFamily {
    pub fn new(kind: AdditiveKind, psi1: LaplaceExponent) -> Result<Self> {
        match psi1 {
            LaplaceExponent::Log { beta, eta } => {
                if !(beta > 0.0 && eta > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "log exponent needs beta > 0 and eta > 0 (got beta = {beta}, eta = {eta})"
                    )));
                }
            }
            LaplaceExponent::CompoundPoisson { drift, rate, jump_mean } => {
                if !(drift >= 0.0 && rate >= 0.0) || drift + rate <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "compound Poisson exponent needs drift >= 0, rate >= 0, not both zero \
                         (got drift = {drift}, rate = {rate})"
                    )));
                }
                if rate > 0.0 && !(jump_mean > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "jump_mean = {jump_mean} must be > 0"
                    )));
                }
                if matches!(kind, AdditiveKind::Sato { .. }) {
                    return Err(Error::Unsupported(
                        "sato kind requires a self-decomposable exponent; use the log form".into(),
                    ));
                }
            }
        }
        if let AdditiveKind::Sato { h } = kind {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!("H = {h} must be > 0")));
            }
        }
        Ok(Self { kind, psi1 })
    }

    pub fn levy_gamma(beta: f64, eta: f64) -> Result<Self> {
        Self::new(AdditiveKind::Levy, LaplaceExponent::Log { beta, eta })
    }

    /// Gamma subordinator with `beta` chosen so that `Psi_1(1) = 1`.
    pub fn levy_gamma_normalized(eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta = {eta} must be > 0")));
        }
        Self::levy_gamma(1.0 / (1.0 / eta).ln_1p(), eta)
    }

    pub fn levy_compound_poisson(drift: f64, rate: f64, jump_mean: f64) -> Result<Self> {
        Self::new(AdditiveKind::Levy, LaplaceExponent::CompoundPoisson { drift, rate, jump_mean })
    }

    pub fn sato_gamma(beta: f64, eta: f64, h: f64) -> Result<Self> {
        Self::new(AdditiveKind::Sato { h }, LaplaceExponent::Log { beta, eta })
    }

    pub fn kind(&self) -> AdditiveKind {
        self.kind
    }

    pub fn psi1(&self) -> &LaplaceExponent {
        &self.psi1
    }

    /// `Psi_t(x)`.
    pub fn psi(&self, t: f64, x: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.kind {
            AdditiveKind::Levy => t * self.psi1.eval(x),
            AdditiveKind::Sato { h } => self.psi1.eval(x * t.powf(h)),
        }
    }

    /// Survival function of a single first-passage time, `exp(-Psi_x(1))`.
    pub fn marginal_survival(&self, x: f64) -> f64 {
        (-self.psi(x.max(0.0), 1.0)).exp()
    }

    /// Inverse of [`marginal_survival`](Self::marginal_survival) on `(0, 1]`.
    pub fn inverse_marginal_survival(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        if u <= 0.0 {
            return f64::INFINITY;
        }
        let level = -u.ln();
        match (self.kind, self.psi1) {
            (AdditiveKind::Levy, psi1) => level / psi1.eval(1.0),
            (AdditiveKind::Sato { h }, LaplaceExponent::Log { beta, eta }) => {
                (eta * (level / beta).exp_m1()).powf(1.0 / h)
            }
            (AdditiveKind::Sato { .. }, LaplaceExponent::CompoundPoisson { .. }) => {
                unreachable!("rejected at construction")
            }
        }
    }

    /// Exponent of the power-law factor `g_k(u) = u^a` induced by a Lévy family:
    /// `(Psi_1(k) - Psi_1(k-1)) / Psi_1(1)`.
    pub fn levy_exponent(&self, k: u32) -> f64 {
        let k = f64::from(k);
        (self.psi1.eval(k) - self.psi1.eval(k - 1.0)) / self.psi1.eval(1.0)
    }

    pub fn levy_measure(&self) -> LevyMeasureRecord {
        match self.psi1 {
            LaplaceExponent::Log { beta, eta } => LevyMeasureRecord {
                killing: 0.0,
                drift: 0.0,
                density: format!("{beta} * exp(-{eta} s) / s ds"),
            },
            LaplaceExponent::CompoundPoisson { drift, rate, jump_mean } => LevyMeasureRecord {
                killing: 0.0,
                drift,
                density: format!("{rate} / {jump_mean} * exp(-s / {jump_mean}) ds"),
            },
        }
    }

    /// Short human-readable label.
    pub fn describe(&self) -> String {
        let psi = match self.psi1 {
            LaplaceExponent::Log { beta, eta } => format!("log(beta={beta},eta={eta})"),
            LaplaceExponent::CompoundPoisson { drift, rate, jump_mean } => {
                format!("cpp(drift={drift},rate={rate},jump_mean={jump_mean})")
            }
        };
        match self.kind {
            AdditiveKind::Levy => format!("levy/{psi}"),
            AdditiveKind::Sato { h } => format!("sato(H={h})/{psi}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
enum Psi1Wire {
    Log { beta: f64, eta: f64 },
    Cpp { drift: f64, rate: f64, jump_mean: f64 },
}

#[derive(Serialize, Deserialize)]
struct FamilyWire {
    kind: String,
    psi1: Psi1Wire,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
}

impl TryFrom<FamilyWire> for BernsteinFamily {
    type Error = Error;

    fn try_from(w: FamilyWire) -> Result<Self> {
        let kind = match (w.kind.as_str(), w.h) {
            ("levy", _) => AdditiveKind::Levy,
            ("sato", Some(h)) => AdditiveKind::Sato { h },
            ("sato", None) => return Err(Error::Malformed("sato family needs `H`".into())),
            (other, _) => return Err(Error::Malformed(format!("unknown family kind `{other}`"))),
        };
        let psi1 = match w.psi1 {
            Psi1Wire::Log { beta, eta } => LaplaceExponent::Log { beta, eta },
            Psi1Wire::Cpp { drift, rate, jump_mean } => {
                LaplaceExponent::CompoundPoisson { drift, rate, jump_mean }
            }
        };
        Self::new(kind, psi1)
    }
}

impl From<BernsteinFamily> for FamilyWire {
    fn from(f: BernsteinFamily) -> Self {
        let (kind, h) = match f.kind {
            AdditiveKind::Levy => ("levy", None),
            AdditiveKind::Sato { h } => ("sato", Some(h)),
        };
        let psi1 = match f.psi1 {
            LaplaceExponent::Log { beta, eta } => Psi1Wire::Log { beta, eta },
            LaplaceExponent::CompoundPoisson { drift, rate, jump_mean } => {
                Psi1Wire::Cpp { drift, rate, jump_mean }
            }
        };
        Self { kind: kind.to_string(), psi1, h }
    }
}
