//! Frailty route: one additive subordinator path `Lambda`, `d` i.i.d. unit
//! exponential triggers `E_k`, first passages `X_k = inf { t : Lambda_t >= E_k }`
//! and the transform `U_k = F_1(X_k)` with `F_1(x) = exp(-Psi_x(1))`. The rows
//! follow the survival copula of `(X_1, ..., X_d)`, which is the ordered-product
//! copula returned by [`copula_from_bernstein`].
//!
//! Gamma-type subordinators are observed on a time grid placed uniformly in
//! probability space, `t_i = F_1^{-1}(1 - i/M)`, and a first passage is reported
//! at the right end of the grid cell containing it. Each `U_k` is therefore
//! biased downward by at most `1/M`. Compound-Poisson-plus-drift paths are
//! simulated event by event and their first passages are exact.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::batch::{SampleBatch, SampleMethod};
use crate::bernstein::{AdditiveKind, BernsteinFamily, LaplaceExponent};
use crate::copula::{make_copula, OrderedFactorCopula};
use crate::distortion::DistortionFn;
use crate::error::{Error, Result};
use crate::rng::fill_rows;

/// Default number of probability cells `M` of the frailty time grid.
pub const DEFAULT_GRID_CELLS: usize = 4096;
/// Number of times the horizon may double past the last grid time.
pub const MAX_EXTENSIONS: usize = 60;

/// Times `0 = t_0 < t_1 < ... < t_L`, continued past `t_L` by doubling
/// (`t_{L+k} = t_L 2^k`, `k <= MAX_EXTENSIONS`).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    cells: Option<usize>,
}

impl TimeGrid {
    /// `t_i = F_1^{-1}(1 - i/M)` for `i < M`.
    pub fn for_family(f: &BernsteinFamily, cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least 2 cells, got {cells}")));
        }
        let times: Vec<f64> = (0..cells)
            .map(|i| f.inverse_marginal_survival(1.0 - i as f64 / cells as f64))
            .collect();
        if !times.windows(2).all(|w| w[0] < w[1]) || !times.iter().all(|t| t.is_finite()) {
            return Err(Error::Domain(format!(
                "marginal survival of {} is not invertible on a {cells}-cell grid",
                f.describe()
            )));
        }
        Ok(Self { times, cells: Some(cells) })
    }

    /// Explicit positive, strictly increasing times; `t_0 = 0` is prepended.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        let ok = !times.is_empty()
            && times[0] > 0.0
            && times.iter().all(|t| t.is_finite())
            && times.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::InvalidParameter("grid times must be positive, finite and strictly increasing".into()));
        }
        let mut all = Vec::with_capacity(times.len() + 1);
        all.push(0.0);
        all.extend_from_slice(times);
        Ok(Self { times: all, cells: None })
    }

    /// Times before any extension, including `t_0 = 0`.
    pub fn base_times(&self) -> &[f64] {
        &self.times
    }

    /// `t_i`, or `None` past the last permitted extension.
    pub fn time(&self, i: usize) -> Option<f64> {
        let last = self.times.len() - 1;
        if i <= last {
            return Some(self.times[i]);
        }
        let k = i - last;
        (k <= MAX_EXTENSIONS).then(|| self.times[last] * 2f64.powi(k as i32))
    }

    /// Smallest `i` with `t_i >= r`.
    pub fn index_at_or_after(&self, r: f64) -> Option<usize> {
        let p = self.times.partition_point(|&t| t < r);
        if p < self.times.len() {
            return Some(p);
        }
        let last = self.times.len() - 1;
        (1..=MAX_EXTENSIONS).find(|&k| self.times[last] * 2f64.powi(k as i32) >= r).map(|k| last + k)
    }

    /// `F_1(t_i)`, exactly `1 - i/M` on a probability-space grid.
    pub fn survival(&self, f: &BernsteinFamily, i: usize) -> f64 {
        match self.cells {
            Some(m) if i < m => 1.0 - i as f64 / m as f64,
            _ => self.time(i).map_or(0.0, |t| f.marginal_survival(t)),
        }
    }
}

/// A realised subordinator path, starting at `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SubordinatorPath {
    /// Knots `(time, level after any jump at that time)` joined by linear drift.
    Events { drift: f64, knots: Vec<(f64, f64)> },
    /// Levels observed at grid times.
    Grid { times: Vec<f64>, levels: Vec<f64> },
}

impl SubordinatorPath {
    pub fn terminal_level(&self) -> f64 {
        match self {
            Self::Events { knots, .. } => knots.last().map_or(0.0, |k| k.1),
            Self::Grid { levels, .. } => levels.last().copied().unwrap_or(0.0),
        }
    }

    /// Starts at `(0, 0)` with non-decreasing times and levels.
    pub fn is_monotone(&self) -> bool {
        let pairs: Vec<(f64, f64)> = match self {
            Self::Events { knots, .. } => knots.clone(),
            Self::Grid { times, levels } => times.iter().copied().zip(levels.iter().copied()).collect(),
        };
        pairs.first() == Some(&(0.0, 0.0)) && pairs.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1)
    }
}

fn gamma_variate<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, scale).expect("positive gamma parameters").sample(rng)
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// `log` of a Gamma(shape, 1) variate, accurate for tiny shapes where the
/// variate itself underflows.
fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        gamma_variate(shape, 1.0, rng).ln()
    } else {
        let u = 1.0 - rng.random::<f64>();
        gamma_variate(shape + 1.0, 1.0, rng).ln() + u.ln() / shape
    }
}

fn beta_variate<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x = ln_gamma_variate(a, rng);
    let y = ln_gamma_variate(b, rng);
    1.0 / (1.0 + (y - x).exp())
}

/// Next arrival of the Sato gamma jump stream after time `r`: arrivals form a
/// Poisson process of intensity `beta H / s ds`, and an arrival at `s` carries an
/// exponential jump with mean `s^H / eta`.
fn sato_arrival<R: Rng + ?Sized>(r: f64, beta: f64, eta: f64, h: f64, rng: &mut R) -> (f64, f64) {
    let next = r * (exp1(rng) / (beta * h)).exp();
    (next, next.powf(h) / eta * exp1(rng))
}

/// Advances one path through increasing times, carrying the state needed for
/// exact increments.
struct Stepper {
    family: LaplaceExponent,
    kind: AdditiveKind,
    t: f64,
    level: f64,
    /// Sato: next `(arrival time, jump)`; compound Poisson: next jump time.
    pending: Option<(f64, f64)>,
}

impl Stepper {
    fn new(f: &BernsteinFamily) -> Self {
        Self { family: *f.psi1(), kind: f.kind(), t: 0.0, level: 0.0, pending: None }
    }

    fn advance<R: Rng + ?Sized>(&mut self, next: f64, rng: &mut R) -> f64 {
        match (self.kind, self.family) {
            (AdditiveKind::Levy, LaplaceExponent::Log { beta, eta }) => {
                self.level += gamma_variate(beta * (next - self.t), 1.0 / eta, rng);
            }
            (AdditiveKind::Sato { h }, LaplaceExponent::Log { beta, eta }) => match self.pending {
                None => {
                    self.level = gamma_variate(beta, next.powf(h) / eta, rng);
                    self.pending = Some(sato_arrival(next, beta, eta, h, rng));
                }
                Some(mut arrival) => {
                    while arrival.0 <= next {
                        self.level += arrival.1;
                        arrival = sato_arrival(arrival.0, beta, eta, h, rng);
                    }
                    self.pending = Some(arrival);
                }
            },
            (_, LaplaceExponent::CompoundPoisson { drift, rate, jump_mean }) => {
                let mut jump_at = match self.pending {
                    Some((tau, _)) => tau,
                    None => next_jump_time(0.0, rate, rng),
                };
                while jump_at <= next {
                    self.level += drift * (jump_at - self.t) + jump_mean * exp1(rng);
                    self.t = jump_at;
                    jump_at = next_jump_time(jump_at, rate, rng);
                }
                self.pending = Some((jump_at, 0.0));
                self.level += drift * (next - self.t);
            }
        }
        self.t = next;
        self.level
    }
}

/// Levels of one path at the given increasing positive times.
pub fn simulate_levels<R: Rng + ?Sized>(f: &BernsteinFamily, times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if !(times.first().is_some_and(|&t| t > 0.0) && times.windows(2).all(|w| w[0] < w[1])) {
        return Err(Error::InvalidParameter("times must be positive and strictly increasing".into()));
    }
    let mut stepper = Stepper::new(f);
    Ok(times.iter().map(|&t| stepper.advance(t, rng)).collect())
}

fn next_jump_time<R: Rng + ?Sized>(t: f64, rate: f64, rng: &mut R) -> f64 {
    if rate > 0.0 {
        t + exp1(rng) / rate
    } else {
        f64::INFINITY
    }
}

/// One path, simulated until its terminal level reaches `target_level`.
///
/// Compound-Poisson-plus-drift families yield an exact event path (the grid is
/// unused); gamma families yield levels at the grid times, extending the horizon
/// by doubling when the base grid is exhausted.
pub fn simulate_path<R: Rng + ?Sized>(
    f: &BernsteinFamily,
    target_level: f64,
    grid: &TimeGrid,
    rng: &mut R,
) -> Result<SubordinatorPath> {
    if !(target_level > 0.0 && target_level.is_finite()) {
        return Err(Error::InvalidParameter(format!("target level {target_level} must be positive")));
    }
    if let LaplaceExponent::CompoundPoisson { drift, rate, jump_mean } = *f.psi1() {
        return Ok(event_path(drift, rate, jump_mean, target_level, rng));
    }
    let mut stepper = Stepper::new(f);
    let mut times = vec![0.0];
    let mut levels = vec![0.0];
    while *levels.last().unwrap() < target_level {
        let t = grid
            .time(times.len())
            .ok_or(Error::HorizonExhausted { target: target_level, extensions: MAX_EXTENSIONS })?;
        times.push(t);
        levels.push(stepper.advance(t, rng));
    }
    Ok(SubordinatorPath::Grid { times, levels })
}

fn event_path<R: Rng + ?Sized>(drift: f64, rate: f64, jump_mean: f64, target: f64, rng: &mut R) -> SubordinatorPath {
    let (mut t, mut level) = (0.0, 0.0);
    let mut knots = vec![(0.0, 0.0)];
    loop {
        let tau = next_jump_time(t, rate, rng);
        if drift > 0.0 && level + drift * (tau - t) >= target {
            knots.push((t + (target - level) / drift, target));
            break;
        }
        level += drift * (tau - t) + jump_mean * exp1(rng);
        t = tau;
        knots.push((t, level));
        if level >= target {
            break;
        }
    }
    SubordinatorPath::Events { drift, knots }
}

/// `inf { t : Lambda_t >= level }`: exact for event paths, the smallest grid
/// time with `Lambda >= level` for grid paths.
pub fn first_passage(p: &SubordinatorPath, level: f64) -> Result<f64> {
    if level <= 0.0 {
        return Ok(0.0);
    }
    let terminal = p.terminal_level();
    if terminal < level {
        return Err(Error::LevelAboveTerminal { level, terminal });
    }
    match p {
        SubordinatorPath::Grid { times, levels } => Ok(times[levels.partition_point(|&l| l < level)]),
        SubordinatorPath::Events { drift, knots } => {
            for w in knots.windows(2) {
                let ((t0, l0), (t1, l1)) = (w[0], w[1]);
                if l0 >= level {
                    return Ok(t0);
                }
                if *drift > 0.0 && l0 + drift * (t1 - t0) >= level {
                    return Ok((t0 + (level - l0) / drift).min(t1));
                }
                if l1 >= level {
                    return Ok(t1);
                }
            }
            Ok(knots.last().map_or(0.0, |k| k.0))
        }
    }
}

/// The ordered-product copula induced by a Bernstein family:
/// `g_k(u) = exp(-Psi_x(k) + Psi_x(k-1))` with `x = F_1^{-1}(u)`. Lévy families
/// reduce to powers `u^{(Psi_1(k) - Psi_1(k-1)) / Psi_1(1)}`.
pub fn copula_from_bernstein(f: &BernsteinFamily, d: usize) -> Result<OrderedFactorCopula> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { d, min: 2 });
    }
    let mut g = vec![DistortionFn::identity()];
    for k in 2..=d as u32 {
        g.push(match f.kind() {
            AdditiveKind::Levy => DistortionFn::power(f.levy_exponent(k)),
            AdditiveKind::Sato { .. } => DistortionFn::bernstein(f.clone(), k),
        });
    }
    make_copula(d, g)
}

/// Grid indices of first passage over `levels` on a gamma Lévy path. The path
/// is drawn at the top of the base grid (and beyond, if needed), then refined
/// only where a passage can occur by gamma bridges: given the levels at grid
/// points `a < m < b`, `(L_m - L_a) / (L_b - L_a) ~ Beta(beta (t_m - t_a), beta (t_b - t_m))`.
/// The joint law at the visited grid points is that of dense simulation.
fn gamma_levy_passages<R: Rng + ?Sized>(
    beta: f64,
    eta: f64,
    grid: &TimeGrid,
    levels: &[f64],
    rng: &mut R,
    out: &mut [usize],
) -> Result<()> {
    let target = levels.iter().copied().fold(0.0, f64::max);
    let time = |i: usize| grid.time(i).ok_or(Error::HorizonExhausted { target, extensions: MAX_EXTENSIONS });
    let mut top = grid.base_times().len() - 1;
    let mut level = gamma_variate(beta * time(top)?, 1.0 / eta, rng);
    let mut known = vec![(0usize, 0.0), (top, level)];
    while level < target {
        let next = top + 1;
        level += gamma_variate(beta * (time(next)? - time(top)?), 1.0 / eta, rng);
        top = next;
        known.push((top, level));
    }
    for (slot, &e) in out.iter_mut().zip(levels) {
        let mut p = known.partition_point(|&(_, l)| l < e);
        if p == 0 {
            *slot = 0;
            continue;
        }
        loop {
            let ((ia, la), (ib, lb)) = (known[p - 1], known[p]);
            if ib - ia <= 1 {
                *slot = ib;
                break;
            }
            let im = ia + (ib - ia) / 2;
            let (ta, tm, tb) = (time(ia)?, time(im)?, time(ib)?);
            let lm = la + beta_variate(beta * (tm - ta), beta * (tb - tm), rng) * (lb - la);
            known.insert(p, (im, lm));
            if lm < e {
                p += 1;
            }
        }
    }
    Ok(())
}

/// Grid indices of first passage on a Sato gamma path: `Lambda_{t_1}` is drawn
/// from its Gamma marginal, later jumps from the arrival stream, and a passage
/// caused by an arrival at time `r` is reported at the first grid time `>= r`.
fn sato_gamma_passages<R: Rng + ?Sized>(
    beta: f64,
    eta: f64,
    h: f64,
    grid: &TimeGrid,
    levels: &[f64],
    rng: &mut R,
    out: &mut [usize],
) -> Result<()> {
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[a].total_cmp(&levels[b]));
    let target = levels[*order.last().unwrap()];
    let exhausted = Error::HorizonExhausted { target, extensions: MAX_EXTENSIONS };
    let t1 = grid.time(1).ok_or(Error::InvalidParameter("grid needs a positive time".into()))?;

    let mut level = gamma_variate(beta, t1.powf(h) / eta, rng);
    let mut pos = 0;
    while pos < order.len() && levels[order[pos]] <= level {
        out[order[pos]] = usize::from(levels[order[pos]] > 0.0);
        pos += 1;
    }
    let mut r = t1;
    while pos < order.len() {
        let (next, jump) = sato_arrival(r, beta, eta, h, rng);
        r = next;
        level += jump;
        if !r.is_finite() {
            return Err(exhausted);
        }
        if levels[order[pos]] <= level {
            let index = grid.index_at_or_after(r).ok_or(Error::HorizonExhausted { target, extensions: MAX_EXTENSIONS })?;
            while pos < order.len() && levels[order[pos]] <= level {
                out[order[pos]] = index;
                pos += 1;
            }
        }
    }
    Ok(())
}

/// Fill `row` with one frailty draw: triggers first, then the path.
fn frailty_draw<R: Rng + ?Sized>(f: &BernsteinFamily, grid: &TimeGrid, rng: &mut R, row: &mut [f64]) -> Result<()> {
    let triggers: Vec<f64> = (0..row.len()).map(|_| exp1(rng)).collect();
    let mut index = vec![0usize; row.len()];
    match (f.kind(), *f.psi1()) {
        (_, LaplaceExponent::CompoundPoisson { .. }) => {
            let target = triggers.iter().copied().fold(0.0, f64::max);
            if target <= 0.0 {
                row.fill(1.0);
                return Ok(());
            }
            let path = simulate_path(f, target, grid, rng)?;
            for (u, &e) in row.iter_mut().zip(&triggers) {
                *u = f.marginal_survival(first_passage(&path, e)?);
            }
            return Ok(());
        }
        (AdditiveKind::Levy, LaplaceExponent::Log { beta, eta }) => {
            gamma_levy_passages(beta, eta, grid, &triggers, rng, &mut index)?
        }
        (AdditiveKind::Sato { h }, LaplaceExponent::Log { beta, eta }) => {
            sato_gamma_passages(beta, eta, h, grid, &triggers, rng, &mut index)?
        }
    }
    for (u, &i) in row.iter_mut().zip(&index) {
        *u = grid.survival(f, i);
    }
    Ok(())
}

/// `n` frailty draws of dimension `d` on the default `M = 4096` grid.
pub fn sample_frailty(f: &BernsteinFamily, d: usize, n: usize, seed: u64) -> Result<SampleBatch> {
    sample_frailty_with_cells(f, d, n, seed, DEFAULT_GRID_CELLS)
}

pub fn sample_frailty_with_cells(
    f: &BernsteinFamily,
    d: usize,
    n: usize,
    seed: u64,
    cells: usize,
) -> Result<SampleBatch> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { d, min: 2 });
    }
    let grid = TimeGrid::for_family(f, cells)?;
    let data = fill_rows(n, d, seed, |rng, row| frailty_draw(f, &grid, rng, row))?;
    SampleBatch::new(d, data, SampleMethod::Frailty, seed, f.describe())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::draw_rng;

    fn normalized() -> BernsteinFamily {
        BernsteinFamily::levy_gamma_normalized(1.0).unwrap()
    }

    #[test]
    fn probability_space_grid() {
        let f = normalized();
        let g = TimeGrid::for_family(&f, 8).unwrap();
        assert_eq!(g.base_times().len(), 8);
        assert_eq!(g.time(0), Some(0.0));
        assert!((g.time(3).unwrap() + (1.0 - 3.0 / 8.0f64).ln()).abs() < 1e-15);
        assert_eq!(g.survival(&f, 3), 0.625);
        assert_eq!(g.time(9), Some(g.time(7).unwrap() * 4.0));
        assert!(g.time(7 + MAX_EXTENSIONS + 1).is_none());
        assert_eq!(g.index_at_or_after(g.time(4).unwrap()), Some(4));
        assert_eq!(g.index_at_or_after(g.time(7).unwrap() * 3.0), Some(9));
        assert!((g.survival(&f, 8) - (-2.0 * g.time(7).unwrap()).exp()).abs() < 1e-15);
    }

    #[test]
    fn drift_only_path_is_the_identity() {
        let f = BernsteinFamily::levy_compound_poisson(1.0, 0.0, 1.0).unwrap();
        let mut rng = draw_rng(1, 0);
        let levels = simulate_levels(&f, &[0.5, 1.0, 3.0], &mut rng).unwrap();
        assert_eq!(levels, vec![0.5, 1.0, 3.0]);
        let grid = TimeGrid::from_times(&[1.0]).unwrap();
        let path = simulate_path(&f, 2.5, &grid, &mut rng).unwrap();
        assert_eq!(first_passage(&path, 1.75).unwrap(), 1.75);
    }

    #[test]
    fn first_passage_examples() {
        let drift = SubordinatorPath::Events { drift: 2.0, knots: vec![(0.0, 0.0), (1.0, 2.0)] };
        assert_eq!(first_passage(&drift, 1.0).unwrap(), 0.5);
        let jump = SubordinatorPath::Events { drift: 0.0, knots: vec![(0.0, 0.0), (1.2, 3.0)] };
        assert_eq!(first_passage(&jump, 1.0).unwrap(), 1.2);
        assert!(matches!(first_passage(&jump, 4.0), Err(Error::LevelAboveTerminal { .. })));
    }

    #[test]
    fn grid_passage_is_the_right_endpoint() {
        let f = BernsteinFamily::sato_gamma(1.0, 1.0, 1.0).unwrap();
        let grid = TimeGrid::for_family(&f, 64).unwrap();
        for i in 0..50u64 {
            let mut rng = draw_rng(5, i);
            let path = simulate_path(&f, 2.0, &grid, &mut rng).unwrap();
            assert!(path.is_monotone());
            let SubordinatorPath::Grid { times, levels } = &path else { panic!("grid path expected") };
            for level in [0.1, 0.7, 2.0] {
                let t = first_passage(&path, level).unwrap();
                let i = times.iter().position(|&x| x == t).unwrap();
                assert!(levels[i] >= level && (i == 0 || levels[i - 1] < level));
            }
        }
    }

    #[test]
    fn event_paths_are_monotone() {
        let f = BernsteinFamily::levy_compound_poisson(0.5, 2.0, 0.3).unwrap();
        let grid = TimeGrid::from_times(&[1.0]).unwrap();
        for i in 0..100u64 {
            let path = simulate_path(&f, 3.0, &grid, &mut draw_rng(9, i)).unwrap();
            assert!(path.is_monotone());
            assert!(path.terminal_level() >= 3.0);
        }
    }

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn gamma_levy_mean() {
        let (beta, eta) = (2.0, 1.5);
        let f = BernsteinFamily::levy_gamma(beta, eta).unwrap();
        let xs: Vec<f64> = (0..100_000u64)
            .map(|i| simulate_levels(&f, &[0.25, 1.0], &mut draw_rng(21, i)).unwrap()[1])
            .collect();
        let sigma = beta.sqrt() / eta / (xs.len() as f64).sqrt();
        assert!((mean_and_se(&xs).0 - beta / eta).abs() < 3.0 * sigma);
    }

    #[test]
    fn sato_gamma_means() {
        let (beta, eta, h) = (1.5, 2.0, 0.7);
        let f = BernsteinFamily::sato_gamma(beta, eta, h).unwrap();
        let times = [0.5, 1.0, 2.0];
        let paths: Vec<Vec<f64>> =
            (0..100_000u64).map(|i| simulate_levels(&f, &times, &mut draw_rng(22, i)).unwrap()).collect();
        for (j, &t) in times.iter().enumerate() {
            let xs: Vec<f64> = paths.iter().map(|p| p[j]).collect();
            let mean = beta * t.powf(h) / eta;
            let sigma = beta.sqrt() * t.powf(h) / eta / (xs.len() as f64).sqrt();
            assert!((mean_and_se(&xs).0 - mean).abs() < 3.0 * sigma, "t = {t}");
        }
    }

    #[test]
    fn sato_increment_laplace_transform() {
        let (beta, eta, h) = (2.0, 1.0, 0.5);
        let (s, t) = (0.5, 2.0);
        let f = BernsteinFamily::sato_gamma(beta, eta, h).unwrap();
        let incs: Vec<f64> = (0..50_000u64)
            .map(|i| {
                let l = simulate_levels(&f, &[s, t], &mut draw_rng(23, i)).unwrap();
                l[1] - l[0]
            })
            .collect();
        for x in [0.5, 1.0, 2.0] {
            let ys: Vec<f64> = incs.iter().map(|d| (-x * d).exp()).collect();
            let (mean, se) = mean_and_se(&ys);
            let exact = ((eta + x * s.powf(h)) / (eta + x * t.powf(h))).powf(beta);
            assert!((mean - exact).abs() < 4.0 * se, "x = {x}: {mean} vs {exact}");
        }
    }

    #[test]
    fn beta_variate_mean_with_tiny_shapes() {
        let (a, b) = (1e-4, 3e-4);
        let xs: Vec<f64> = (0..20_000u64).map(|i| beta_variate(a, b, &mut draw_rng(24, i))).collect();
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
        let (mean, _) = mean_and_se(&xs);
        // nearly Bernoulli(a / (a + b)), sd about 0.43 / sqrt(n)
        assert!((mean - 0.25).abs() < 0.015, "{mean}");
    }

    #[test]
    fn levy_copula_is_power() {
        let c = copula_from_bernstein(&normalized(), 3).unwrap();
        assert!((c.g(2).power_exponent().unwrap() - 1.5f64.log2()).abs() < 1e-15);
        assert!((c.g(3).power_exponent().unwrap() - (4.0f64 / 3.0).log2()).abs() < 1e-15);
    }

    #[test]
    fn sato_copula_matches_closed_form() {
        let f = BernsteinFamily::sato_gamma(2.0, 3.0, 0.5).unwrap();
        let c = copula_from_bernstein(&f, 4).unwrap();
        for k in 2..=4u32 {
            let closed = DistortionFn::sato_gamma(2.0, k);
            for i in 1..=100 {
                let u = i as f64 / 100.0;
                assert!((c.g(k as usize).eval(u) - closed.eval(u)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frailty_batches_are_reproducible() {
        let f = BernsteinFamily::sato_gamma(1.0, 1.0, 1.0).unwrap();
        let a = sample_frailty(&f, 3, 200, 4).unwrap();
        let b = sample_frailty(&f, 3, 200, 4).unwrap();
        assert_eq!(a, b);
        assert!(matches!(sample_frailty(&f, 1, 10, 4), Err(Error::DimensionTooSmall { .. })));
    }
}
