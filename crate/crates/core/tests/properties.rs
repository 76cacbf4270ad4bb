use std::cmp::Ordering;

use proptest::prelude::*;

use loclab::harness::{sharpness_lower_bound, McEstimate};
use loclab::ladder::{build_ladder, exp_sum_margin, exp_sum_threshold, KZeroReading, S_BOUND, S_FIRST};
use loclab::measures::{parse_model, tilted_moments, MeasureModel};
use loclab::numerics::{jacobi_spectrum, ExtReal, RngStream, SymMatrix};
use loclab::potentials::{build_potential, eval_f, gronwall_log_factor, Potential};

fn symmetric(dim: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-10.0f64..10.0, dim * dim).prop_map(move |v| {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.set(i, j, v[i * dim + j]);
                m.set(j, i, v[i * dim + j]);
            }
        }
        m
    })
}

fn potential() -> impl Strategy<Value = Potential> {
    (5.0f64..2000.0, 7.0 / 3.0..8.0 / 3.0).prop_map(|(d0, r0)| build_potential(d0, r0, 1000).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_sorts_and_reconstructs(m in (1usize..9).prop_flat_map(symmetric)) {
        let s = jacobi_spectrum(&m, 1e-14).unwrap();
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let r = s.reconstruct().unwrap();
        let scale = m.frobenius().max(1e-300);
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                prop_assert!((r.get(i, j) - m.get(i, j)).abs() <= 1e-10 * scale);
            }
        }
        let tr: f64 = s.eigenvalues.iter().sum();
        prop_assert!((tr - m.trace()).abs() <= 1e-10 * scale);
    }

    #[test]
    fn ext_mul_adds_logs(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let p = ExtReal::from_ln(a).mul(&ExtReal::from_ln(b));
        prop_assert!((p.ln_abs_f64() - (a + b)).abs() <= 1e-12 * (a.abs() + b.abs()).max(1.0));
    }

    #[test]
    fn ext_add_is_log_sum_exp(a in -800.0f64..800.0, b in -800.0f64..800.0) {
        let s = ExtReal::from_ln(a).add(&ExtReal::from_ln(b));
        let m = a.max(b);
        let want = m + ((a - m).exp() + (b - m).exp()).ln();
        prop_assert!((s.ln_abs_f64() - want).abs() <= 1e-12 * want.abs().max(1.0));
        let t = ExtReal::from_ln(b).add(&ExtReal::from_ln(a));
        prop_assert_eq!(s.total_cmp(&t), Ordering::Equal);
    }

    #[test]
    fn ext_order_matches_f64(x in -1e300f64..1e300, y in -1e300f64..1e300) {
        let (a, b) = (ExtReal::from_f64(x), ExtReal::from_f64(y));
        prop_assert_eq!(a.total_cmp(&b), x.total_cmp(&y));
        prop_assert_eq!(a.sign() == 0, x == 0.0);
    }

    #[test]
    fn ext_exp_ln_round_trip(l in -1e250f64..1e250) {
        let x = ExtReal::from_f64(l);
        let back = x.exp().ln();
        prop_assert!(back.log_rel_diff(&x) <= 1e-12);
    }

    #[test]
    fn rng_streams_reproduce(seed in any::<u64>(), idx in 0u64..1_000_000) {
        let a = RngStream::new(seed, idx).gaussian_increments(16);
        prop_assert_eq!(&a, &RngStream::new(seed, idx).gaussian_increments(16));
        prop_assert_ne!(&a, &RngStream::new(seed, idx + 1).gaussian_increments(16));
        prop_assert!(a.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn mc_stderr_is_non_negative(xs in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let e = McEstimate::from_samples(&xs, 1);
        prop_assert!(e.stderr >= 0.0);
        prop_assert!(e.lower() <= e.mean && e.mean <= e.upper());
    }

    #[test]
    fn gaussian_tilt_is_exact(theta in prop::collection::vec(-20.0f64..20.0, 1..6), t in 0.0f64..50.0) {
        let model = MeasureModel::gaussian(theta.len()).unwrap();
        let m = tilted_moments(&model, &theta, t).unwrap();
        for (a, th) in m.a.iter().zip(&theta) {
            prop_assert!((a - th / (1.0 + t)).abs() <= 1e-14 * (1.0 + th.abs()));
        }
        for i in 0..theta.len() {
            prop_assert!((m.cov.get(i, i) - 1.0 / (1.0 + t)).abs() <= 1e-15);
        }
    }

    #[test]
    fn product_tilts_obey_lichnerowicz(
        theta in prop::collection::vec(-30.0f64..30.0, 4),
        t in 0.01f64..100.0,
    ) {
        let model = parse_model("product(uniform*2,dexp*2)", None).unwrap();
        let m = tilted_moments(&model, &theta, t).unwrap();
        let s = m.spectrum().unwrap();
        prop_assert!(s.eigenvalues[0] >= 0.0);
        prop_assert!(s.eigenvalues[3] <= 1.0 / t + 1e-8);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    prop_assert_eq!(m.cov.get(i, j), 0.0);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn potential_pieces_and_monotonicity(pot in potential(), xs in prop::collection::vec(0.0f64..30.0, 2..40)) {
        prop_assert!((1.0 / 20.0..=1.0 / 5.0).contains(&pot.b));
        let (d0, r0) = (pot.d0, pot.r0);
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            prop_assert!(pot.log_f(w[0]) <= pot.log_f(w[1]));
        }
        for &r in &xs {
            let lf = pot.log_f(r);
            if r <= r0 - 1.0 / d0 {
                prop_assert!((lf - d0 * (r - r0)).abs() <= 1e-9 * (d0 * (r - r0)).abs().max(1.0));
            } else if r >= r0 {
                prop_assert!((lf - (pot.b * r * r).ln()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn eval_f_is_additive_and_positive(
        pot in potential(),
        a in prop::collection::vec(0.0f64..4.0, 1..8),
        b in prop::collection::vec(0.0f64..4.0, 1..8),
    ) {
        let joined: Vec<f64> = a.iter().chain(&b).copied().collect();
        let (fa, fb, fj) = (eval_f(&pot, &a), eval_f(&pot, &b), eval_f(&pot, &joined));
        prop_assert!((fj - fa - fb).abs() <= 1e-12 * fj.abs().max(1e-300));
        prop_assert!(fj >= 0.0);
        prop_assert!(joined.iter().all(|&l| pot.log_f(l) > f64::NEG_INFINITY));
    }

    #[test]
    fn gronwall_factors_compose(
        d0 in 5.0f64..1e3,
        mut ls in prop::collection::vec(-30.0f64..0.0, 3),
    ) {
        ls.sort_by(f64::total_cmp);
        let ab = gronwall_log_factor(d0, ls[0], ls[1]).unwrap();
        let bc = gronwall_log_factor(d0, ls[1], ls[2]).unwrap();
        let ac = gronwall_log_factor(d0, ls[0], ls[2]).unwrap();
        prop_assert!(ab >= 0.0 && bc >= 0.0);
        prop_assert!((ab + bc - ac).abs() <= 1e-9 * ac.max(1.0));
    }

    #[test]
    fn ladder_rungs_and_thresholds_are_ordered(ln_p in 10.0f64..2000.0, ln_n in 10.0f64..1e300) {
        if let Ok(l) = build_ladder(ln_p, ln_n, 1.0, KZeroReading::FirstCrossing) {
            for w in l.t.windows(2) {
                prop_assert_eq!(w[0].total_cmp(&w[1]), Ordering::Less);
            }
            if let Some(&first) = l.s.first() {
                prop_assert_eq!(first, S_FIRST);
            }
            prop_assert!(l.s.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(l.s.iter().all(|&s| s <= S_BOUND));
            prop_assert!(l.s_increments.iter().all(|d| d.sign() > 0));
        }
    }

    #[test]
    fn exp_sum_stays_satisfied_above_threshold(scale in 1.0f64..100.0) {
        let th = exp_sum_threshold(1.0).unwrap();
        prop_assert!(exp_sum_margin(th * scale, 1.0).sign() >= 0);
    }

    #[test]
    fn sharpness_scales_with_n(r in 0.1f64..1e3, c in 0.1f64..10.0, ln_n in 0.0f64..1e3) {
        let base = sharpness_lower_bound(r, c, 0.0).unwrap();
        let scaled = sharpness_lower_bound(r, c, ln_n).unwrap();
        prop_assert!((scaled.ln_abs_f64() - base.ln_abs_f64() - ln_n).abs() <= 1e-12 * scaled.ln_abs_f64().abs().max(1.0));
    }
}
