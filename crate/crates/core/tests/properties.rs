use exshock::copula::EvalGrid;
use exshock::families;
use exshock::{g_from_h, generalized_inverse, h_from_g, DistortionFn, OrderedFactorCopula};
use proptest::prelude::*;

/// Moment sequences of a discrete law on `[0, 1]` are completely monotone.
fn moment_sequence(atoms: &[(f64, f64)], d: usize) -> Vec<f64> {
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    (0..d).map(|k| atoms.iter().map(|&(x, w)| w / total * x.powi(k as i32)).sum()).collect()
}

fn copula_strategy() -> impl Strategy<Value = OrderedFactorCopula> {
    prop_oneof![
        (2usize..=5, prop::collection::vec((0.0..1.0f64, 0.05..1.0f64), 1..4))
            .prop_map(|(d, atoms)| families::marshall_olkin(&moment_sequence(&atoms, d), d).unwrap()),
        (0.2..5.0f64, 2usize..=5).prop_map(|(beta, d)| families::sato_gamma(beta, 1.0, 1.0, d).unwrap().0),
        (1.05..5.0f64, 0.01..0.5f64, 0.01..0.5f64)
            .prop_map(|(a, b, c)| families::piecewise_linear_bivariate(a, b, c).unwrap()),
        (2usize..=5).prop_map(|d| families::comonotone(d).unwrap()),
    ]
}

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn margins_are_uniform(c in copula_strategy(), slot in 0usize..5) {
        let d = c.d();
        let slot = slot % d;
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let mut u = vec![1.0; d];
            u[slot] = x;
            prop_assert!((c.cdf(&u).unwrap() - x).abs() <= 1e-12);
        }
    }

    #[test]
    fn grounded_and_exchangeable(c in copula_strategy(), seed in any::<u64>(), u in point(5)) {
        let d = c.d();
        let u = &u[..d];
        let base = c.cdf(u).unwrap();
        let mut rotated = u.to_vec();
        rotated.rotate_left((seed % d as u64) as usize);
        prop_assert_eq!(base, c.cdf(&rotated).unwrap());
        let mut grounded = u.to_vec();
        grounded[(seed as usize / 7) % d] = 0.0;
        prop_assert_eq!(c.cdf(&grounded).unwrap(), 0.0);
    }

    #[test]
    fn increasing_in_each_coordinate(c in copula_strategy(), u in point(5), slot in 0usize..5, bump in 0.0..0.5f64) {
        let d = c.d();
        let u = u[..d].to_vec();
        let mut v = u.clone();
        v[slot % d] = (v[slot % d] + bump).min(1.0);
        prop_assert!(c.cdf(&v).unwrap() >= c.cdf(&u).unwrap() - 1e-15);
    }

    #[test]
    fn bivariate_rectangles_have_nonnegative_mass(c in copula_strategy(), a in point(2), b in point(2)) {
        prop_assume!(c.d() == 2);
        let (x0, x1) = (a[0].min(b[0]), a[0].max(b[0]));
        let (y0, y1) = (a[1].min(b[1]), a[1].max(b[1]));
        let mass = c.cdf(&[x1, y1]).unwrap() - c.cdf(&[x0, y1]).unwrap() - c.cdf(&[x1, y0]).unwrap()
            + c.cdf(&[x0, y0]).unwrap();
        prop_assert!(mass >= -1e-12);
    }

    #[test]
    fn factors_survive_the_shock_law_round_trip(c in copula_strategy()) {
        let back = g_from_h(&h_from_g(&c).unwrap()).unwrap();
        for &u in EvalGrid::default().points() {
            for k in 1..=c.d() {
                prop_assert!((back.g(k).eval(u) - c.g(k).eval(u)).abs() <= 1e-10, "k = {}, u = {}", k, u);
            }
        }
    }

    #[test]
    fn generalized_inverse_is_a_left_inverse(beta in 0.2..5.0f64, k in 2u32..6, p in 0.0..=1.0f64) {
        let f = DistortionFn::sato_gamma(beta, k);
        let x = generalized_inverse(&f, p).unwrap();
        prop_assert!(f.eval(x) >= p - 1e-12);
        prop_assert!(x == 0.0 || f.eval((x - 1e-9).max(0.0)) <= p + 1e-12);
    }
}
