use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Float;

use entham::chain::SubsystemSpec;
use entham::config::ExperimentConfig;
use entham::gaussian::{many_body_spectrum, random_covariance, restrict};
use entham::linalg::{dilog, hermitian_eigenvalues, invert, log_fn, matrix_function, skew_schur, CMatrix, Matrix, SkewMatrix};
use entham::observables::{entropy, log_negativity, renyi_entropy, BipartitionSpec};
use entham::PrecisionContext;

fn ctx() -> PrecisionContext {
    PrecisionContext::new(40).unwrap()
}

fn small(x: &Float, exp: i32) -> bool {
    *x < ctx().pow10(exp)
}

fn skew_from(dim: usize, entries: &[f64], ctx: &PrecisionContext) -> SkewMatrix {
    let mut s = SkewMatrix::zeros(dim, ctx.bits()).unwrap();
    let mut k = 0;
    for i in 0..dim {
        for j in 0..i {
            s.set(i, j, ctx.float(entries[k]));
            k += 1;
        }
    }
    s
}

fn skew_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=4).prop_flat_map(|half| {
        let dim = 2 * half;
        (Just(dim), prop::collection::vec(-1.0f64..1.0, dim * (dim - 1) / 2))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn skew_schur_reconstructs((dim, entries) in skew_strategy()) {
        let c = ctx();
        let s = skew_from(dim, &entries, &c);
        let form = skew_schur(&s, &c).unwrap();
        prop_assert!(small(&form.reconstruct().as_matrix().max_abs_diff(s.as_matrix()), -35));
        let u = &form.rotation;
        let gram = u.transpose().matmul(u).unwrap();
        prop_assert!(small(&gram.max_abs_diff(&Matrix::identity(dim, c.bits())), -35));
        for pair in form.block_values.windows(2) {
            prop_assert!(pair[0] >= pair[1]);
        }
    }

    #[test]
    fn imaginary_hermitian_spectrum_is_symmetric((dim, entries) in skew_strategy()) {
        let c = ctx();
        let values = hermitian_eigenvalues(&skew_from(dim, &entries, &c).times_i(), &c).unwrap();
        for k in 0..dim {
            let sum = Float::with_val(c.bits(), &values[k] + &values[dim - 1 - k]).abs();
            prop_assert!(small(&sum, -30));
        }
    }

    #[test]
    fn double_inverse_is_identity(entries in prop::collection::vec(-1.0f64..1.0, 16)) {
        let c = ctx();
        let m = Matrix::from_f64(4, 4, c.bits(), |i, j| entries[4 * i + j] + if i == j { 4.0 } else { 0.0 });
        let back = invert(&invert(&m, &c).unwrap(), &c).unwrap();
        prop_assert!(small(&back.max_abs_diff(&m), -30));
    }

    #[test]
    fn log_then_exp_recovers_positive_matrix(entries in prop::collection::vec(-1.0f64..1.0, 9)) {
        let c = ctx();
        let a = Matrix::from_f64(3, 3, c.bits(), |i, j| entries[3 * i + j]);
        let spd = a.transpose().matmul(&a).unwrap().add(&Matrix::identity(3, c.bits())).unwrap();
        let h = CMatrix::from_real(spd.clone());
        let log = matrix_function(&h, log_fn, "log", &c).unwrap();
        let back = matrix_function(&log, |x| Some(x.clone().exp()), "exp", &c).unwrap();
        prop_assert!(small(&back.re.max_abs_diff(&spd), -30));
        prop_assert!(small(&back.im.max_abs(), -30));
    }

    #[test]
    fn dilog_reflection(x in 0.01f64..0.99) {
        let c = ctx();
        let x = c.float(x);
        let y = Float::with_val(c.bits(), 1u32 - &x);
        let lhs = dilog(&x, &c).unwrap() + dilog(&y, &c).unwrap();
        let rhs = c.pi().square() / 6u32 - x.clone().ln() * y.clone().ln();
        prop_assert!(small(&Float::with_val(c.bits(), lhs - rhs).abs(), -35));
    }

    #[test]
    fn dilog_duplication_on_negative_axis(x in -1.0f64..-0.01) {
        // Li2(x) + Li2(-x) = Li2(x^2) / 2
        let c = ctx();
        let x = c.float(x);
        let neg = Float::with_val(c.bits(), -&x);
        let sq = Float::with_val(c.bits(), x.clone().square());
        let lhs = dilog(&x, &c).unwrap() + dilog(&neg, &c).unwrap();
        let rhs = dilog(&sq, &c).unwrap() / 2u32;
        prop_assert!(small(&Float::with_val(c.bits(), lhs - rhs).abs(), -35));
    }

    #[test]
    fn pure_state_complement_entropies_agree(seed in any::<u64>(), modes in 2usize..=6, cut in 1usize..6) {
        prop_assume!(cut < modes);
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_covariance(&vec![1.0; modes], &mut rng, &c).unwrap();
        let a = restrict(&gamma, &SubsystemSpec::new(0, cut)).unwrap();
        let b = restrict(&gamma, &SubsystemSpec::new(cut, modes - cut)).unwrap();
        let diff = Float::with_val(c.bits(), entropy(&a, &c).unwrap() - entropy(&b, &c).unwrap()).abs();
        prop_assert!(small(&diff, -25));
    }

    #[test]
    fn entropies_are_ordered(seed in any::<u64>(), nus in prop::collection::vec(0.0f64..0.999, 1..5)) {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_covariance(&nus, &mut rng, &c).unwrap();
        let s1 = entropy(&gamma, &c).unwrap();
        let s2 = renyi_entropy(&gamma, 2.0, &c).unwrap();
        let s_half = renyi_entropy(&gamma, 0.5, &c).unwrap();
        let slack = c.pow10(-30);
        prop_assert!(s2 <= Float::with_val(c.bits(), &s1 + &slack));
        prop_assert!(s1 <= Float::with_val(c.bits(), &s_half + &slack));
        prop_assert!(s_half <= Float::with_val(c.bits(), c.ln2() * nus.len() as u32) + &slack);
    }

    #[test]
    fn negativity_is_non_negative(seed in any::<u64>(), nus in prop::collection::vec(0.0f64..1.0, 2..5)) {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_covariance(&nus, &mut rng, &c).unwrap();
        let e = log_negativity(&gamma, BipartitionSpec::new(1), &c).unwrap();
        prop_assert!(!e.value.is_sign_negative() || e.value.is_zero());
    }

    #[test]
    fn many_body_levels_ascend_from_zero(eps in prop::collection::vec(0.0f64..20.0, 1..8), count in 1usize..40) {
        let c = ctx();
        let eps: Vec<Float> = eps.iter().map(|&e| c.float(e)).collect();
        let levels = many_body_spectrum(&eps, count);
        prop_assert_eq!(levels.len(), count.min(1 << eps.len()));
        prop_assert!(levels[0].is_zero());
        for pair in levels.windows(2) {
            prop_assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn config_echo_round_trips(ns in prop::collection::btree_set(4usize..40, 1..4), ratio in 100u32..=200) {
        let mut text = String::new();
        for n in &ns {
            text.push_str(&format!("n = {}\n", 2 * n));
        }
        text.push_str(&format!("precision_ratio = {}.{:02}\nobservable = entropy\noutput_dir = out\n", ratio / 100, ratio % 100));
        let config = ExperimentConfig::parse(&text).unwrap();
        let again = ExperimentConfig::parse(&config.echo_text()).unwrap();
        prop_assert_eq!(config.echo_text(), again.echo_text());
        for n in &config.n_values {
            prop_assert_eq!(config.digits_for(*n), again.digits_for(*n));
            prop_assert!(config.digits_for(*n) >= 30);
        }
    }
}
