//! Statistical checks of sampled batches: empirical copulas, sup-distances,
//! tail-dependence estimates, Kolmogorov–Smirnov uniformity and a Monte Carlo
//! check of the probability reading of `G_{j,k}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::batch::SampleBatch;
use crate::copula::OrderedFactorCopula;
use crate::error::{Error, Result};
use crate::shock::{build_shock_model, sample_shock};
use crate::validity::{compute_g, Verdict};

/// Default threshold of the tail-dependence estimators.
pub const TAIL_THRESHOLD: f64 = 0.98;
/// Minimum number of exceedances for a conclusive tail estimate.
pub const MIN_TAIL_COUNT: usize = 100;
/// Agreement band of [`mc_check_g`], in standard errors.
pub const MC_SIGMAS: f64 = 5.0;

/// The lattice `levels^d`, last coordinate varying fastest.
pub fn lattice(d: usize, levels: &[f64]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::with_capacity(d)];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p| {
                levels.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

/// `{0.1, 0.3, 0.5, 0.7, 0.9}^d`.
pub fn default_lattice(d: usize) -> Vec<Vec<f64>> {
    lattice(d, &[0.1, 0.3, 0.5, 0.7, 0.9])
}

fn check_points(b: &SampleBatch, points: &[Vec<f64>]) -> Result<()> {
    if b.n() == 0 {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    match points.iter().find(|p| p.len() != b.d()) {
        Some(p) => Err(Error::DimensionMismatch { expected: b.d(), actual: p.len() }),
        None => Ok(()),
    }
}

/// Fraction of rows componentwise `<=` each point.
pub fn empirical_copula(b: &SampleBatch, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_points(b, points)?;
    let n = b.n() as f64;
    Ok(points
        .par_iter()
        .map(|p| b.rows().filter(|r| r.iter().zip(p).all(|(x, y)| x <= y)).count() as f64 / n)
        .collect())
}

/// `max |empirical - C|` over the points.
pub fn sup_distance(b: &SampleBatch, c: &OrderedFactorCopula, points: &[Vec<f64>]) -> Result<f64> {
    let emp = empirical_copula(b, points)?;
    points.iter().zip(emp).try_fold(0.0_f64, |acc, (p, e)| Ok(acc.max((e - c.cdf(p)?).abs())))
}

/// `max |empirical_a - empirical_b|` over the points.
pub fn sup_distance_between(a: &SampleBatch, b: &SampleBatch, points: &[Vec<f64>]) -> Result<f64> {
    let ea = empirical_copula(a, points)?;
    let eb = empirical_copula(b, points)?;
    Ok(ea.iter().zip(&eb).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs())))
}

/// Tail-dependence estimates from the first two columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub lambda_l: f64,
    pub lambda_u: f64,
    pub stderr_l: f64,
    pub stderr_u: f64,
    pub count_l: usize,
    pub count_u: usize,
    /// Fewer than [`MIN_TAIL_COUNT`] exceedances in either tail.
    pub inconclusive: bool,
}

/// `lambda_U = #{both > t} / #{first > t}` and
/// `lambda_L = #{both <= 1-t} / #{first <= 1-t}`, with binomial standard errors.
pub fn estimate_tail_dependence(b: &SampleBatch, t: f64) -> Result<TailEstimate> {
    if b.d() < 2 {
        return Err(Error::DimensionTooSmall { d: b.d(), min: 2 });
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold {t} outside (0, 1)")));
    }
    let (mut count_u, mut both_u, mut count_l, mut both_l) = (0usize, 0usize, 0usize, 0usize);
    for r in b.rows() {
        if r[0] > t {
            count_u += 1;
            both_u += usize::from(r[1] > t);
        }
        if r[0] <= 1.0 - t {
            count_l += 1;
            both_l += usize::from(r[1] <= 1.0 - t);
        }
    }
    let ratio = |both: usize, count: usize| if count == 0 { 0.0 } else { both as f64 / count as f64 };
    let se = |p: f64, count: usize| if count == 0 { f64::INFINITY } else { (p * (1.0 - p) / count as f64).sqrt() };
    let (lambda_u, lambda_l) = (ratio(both_u, count_u), ratio(both_l, count_l));
    Ok(TailEstimate {
        threshold: t,
        lambda_l,
        lambda_u,
        stderr_l: se(lambda_l, count_l),
        stderr_u: se(lambda_u, count_u),
        count_l,
        count_u,
        inconclusive: count_u.min(count_l) < MIN_TAIL_COUNT,
    })
}

/// Kolmogorov–Smirnov distance between a sample and the uniform law on `[0, 1]`.
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0_f64, |acc, (i, &x)| {
        let x = x.clamp(0.0, 1.0);
        acc.max((i as f64 + 1.0) / n - x).max(x - i as f64 / n)
    })
}

/// Asymptotic 99% band of [`ks_uniform`].
pub fn ks_band_99(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// `{test, analytic, estimate, stderr, sigmas, verdict}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub test: String,
    pub analytic: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub sigmas: f64,
    pub verdict: Verdict,
}

/// Compare the event frequency
/// `P(U_1..U_k <= u, U_{k+1..k+j} in (u, v])` in `b` with
/// `prod_{m<=k} g_m(u) G_{j,k}(u, v)`. The standard error uses the analytic
/// probability, floored at `1/n` so that null events stay testable.
pub fn mc_check_g_on_batch(
    c: &OrderedFactorCopula,
    b: &SampleBatch,
    j: usize,
    k: usize,
    u: f64,
    v: f64,
) -> Result<DiagnosticReport> {
    if b.d() != c.d() {
        return Err(Error::DimensionMismatch { expected: c.d(), actual: b.d() });
    }
    let analytic = c.delta(k, u) * compute_g(c, j, k, u, v)?;
    let hits = b
        .rows()
        .filter(|r| r[..k].iter().all(|&x| x <= u) && r[k..k + j].iter().all(|&x| x > u && x <= v))
        .count();
    let n = b.n() as f64;
    let estimate = hits as f64 / n;
    let p = analytic.clamp(1.0 / n, 1.0 - 1.0 / n);
    let stderr = (p * (1.0 - p) / n).sqrt();
    let sigmas = (estimate - analytic).abs() / stderr;
    Ok(DiagnosticReport {
        test: format!("mc_check_G(j={j},k={k},u={u},v={v})"),
        analytic,
        estimate,
        stderr,
        sigmas,
        verdict: if sigmas <= MC_SIGMAS { Verdict::Pass } else { Verdict::Fail },
    })
}

/// [`mc_check_g_on_batch`] on a fresh shock-sampler batch of `n` rows.
pub fn mc_check_g(
    c: &OrderedFactorCopula,
    j: usize,
    k: usize,
    u: f64,
    v: f64,
    n: usize,
    seed: u64,
) -> Result<DiagnosticReport> {
    let batch = sample_shock(&build_shock_model(c)?, n, seed)?;
    mc_check_g_on_batch(c, &batch, j, k, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::SampleMethod;
    use crate::families;

    fn batch(d: usize, data: Vec<f64>) -> SampleBatch {
        SampleBatch::new(d, data, SampleMethod::Shock, 0, "test".into()).unwrap()
    }

    #[test]
    fn lattice_shape() {
        let g = default_lattice(3);
        assert_eq!(g.len(), 125);
        assert_eq!(g[1], vec![0.1, 0.1, 0.3]);
    }

    #[test]
    fn empirical_copula_counts() {
        let b = batch(2, vec![0.1, 0.1, 0.2, 0.9, 0.9, 0.2, 0.8, 0.8]);
        let e = empirical_copula(&b, &[vec![0.5, 0.5], vec![1.0, 1.0], vec![0.85, 0.95]]).unwrap();
        assert_eq!(e, vec![0.25, 1.0, 0.75]);
        assert!(matches!(empirical_copula(&b, &[vec![0.5]]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sup_distance_to_comonotone() {
        let b = batch(2, vec![0.1, 0.1, 0.2, 0.9, 0.9, 0.2, 0.8, 0.8]);
        let c = families::comonotone(2).unwrap();
        let dist = sup_distance(&b, &c, &[vec![0.5, 0.5]]).unwrap();
        assert!((dist - 0.25).abs() < 1e-15);
    }

    #[test]
    fn tail_estimates() {
        let data: Vec<f64> = (0..10_000).flat_map(|i| [i as f64 / 10_000.0; 2]).collect();
        let t = estimate_tail_dependence(&batch(2, data), TAIL_THRESHOLD).unwrap();
        assert_eq!((t.lambda_l, t.lambda_u), (1.0, 1.0));
        assert!(!t.inconclusive);
        let t = estimate_tail_dependence(&batch(2, vec![0.5, 0.5]), TAIL_THRESHOLD).unwrap();
        assert!(t.inconclusive);
    }

    #[test]
    fn ks_on_lattice() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!((ks_uniform(&xs) - 0.0005).abs() < 1e-12);
        assert!(ks_uniform(&[0.0; 10]) >= 1.0 - 1e-12);
    }

    #[test]
    fn g_check_examples() {
        let r = mc_check_g(&families::independence(2).unwrap(), 2, 0, 0.3, 0.6, 100_000, 31).unwrap();
        assert!((r.analytic - 0.09).abs() < 1e-15);
        assert!((r.estimate - 0.09).abs() <= 0.005);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = mc_check_g(&families::comonotone(2).unwrap(), 2, 0, 0.3, 0.6, 100_000, 32).unwrap();
        assert!((r.analytic - 0.3).abs() < 1e-15);
        assert!((r.estimate - 0.3).abs() <= 0.008);
    }
}
