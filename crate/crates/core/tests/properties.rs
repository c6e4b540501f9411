mod common;

use proptest::prelude::*;
use radonlab::harmonics::{harmonic_dim, legendre_eval, LegendrePoly};
use radonlab::nullspace::{
    discretize_null, ramp_moment_closed_form, witness_nonzero, HarmonicNullTerm,
};
use radonlab::quadrature::{ball_grid, gauss_legendre};
use radonlab::radon2d::{radon_transform_2d, BumpFunction, Resolution2d};
use radonlab::radon_measure::{
    alpha_from_spectrum, bound_check_2rcf, d1_norm_oracle, fit_affine, reconstruct, ru_norm,
    HyperplaneDensity, Rules, Superposition,
};
use radonlab::sparsifier::{
    klusowski_network, sample_network, trial_rng, Convention, Experiment, TwoLayerNet,
};
use radonlab::spectrum::{evaluate_f, from_cosine_sum, CosineTerm};

fn cosine_terms(d: usize) -> impl Strategy<Value = Vec<CosineTerm>> {
    prop::collection::vec(
        (
            -2.0..2.0f64,
            0.5..5.0f64,
            prop::collection::vec(-1.0..1.0f64, d),
        )
            .prop_filter_map("direction too short", |(a, t, v)| {
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                (n > 1e-3).then(|| CosineTerm {
                    amplitude: a,
                    xi: v.iter().map(|x| t * x / n).collect(),
                })
            }),
        1..=4,
    )
}

fn dim_and_terms() -> impl Strategy<Value = (usize, Vec<CosineTerm>)> {
    (1usize..=3).prop_flat_map(|d| (Just(d), cosine_terms(d)))
}

fn set_a_term() -> impl Strategy<Value = HarmonicNullTerm> {
    (2usize..=3, 4usize..=8, any::<u32>(), any::<u32>(), -2.0..2.0f64).prop_map(
        |(d, k, jr, kr, coeff)| {
            let j = 1 + (jr as usize) % harmonic_dim(k, d).unwrap();
            let choices: Vec<usize> = (k % 2..k - 2).step_by(2).collect();
            let kp = choices[(kr as usize) % choices.len()];
            HarmonicNullTerm::new(k, j, kp, coeff, d, 1.0).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauss_legendre_exact_through_2n_minus_1(
        n in 1usize..=24,
        a in -2.0..0.0f64,
        w in 0.1..3.0f64,
        coefs in prop::collection::vec(-1.0..1.0f64, 48),
    ) {
        let b = a + w;
        let deg = 2 * n - 1;
        let c = &coefs[..=deg.min(47)];
        let rule = gauss_legendre(n, a, b).unwrap();
        let q = rule.integrate(|&t| c.iter().rev().fold(0.0, |acc, ci| acc * t + ci));
        let anti = |t: f64| c.iter().enumerate().map(|(p, ci)| ci * t.powi(p as i32 + 1) / (p + 1) as f64).sum::<f64>();
        let exact = anti(b) - anti(a);
        let scale: f64 = c.iter().enumerate().map(|(p, ci)| ci.abs() * a.abs().max(b.abs()).powi(p as i32 + 1)).sum();
        prop_assert!((q - exact).abs() <= 1e-12 * scale.max(1.0), "n={} err={}", n, (q - exact).abs());
    }

    #[test]
    fn ramp_moment_matches_quadrature(
        u in -0.999..0.999f64,
        kp in 0usize..=8,
        ri in 0usize..3,
    ) {
        let r = [0.5, 1.0, 2.0][ri];
        let c = u * r;
        let rule = gauss_legendre(8, -1.0, 1.0).unwrap();
        let q = rule.integrate_on(-r, c, |b| (c - b) * b.powi(kp as i32));
        let cf = ramp_moment_closed_form(c, kp, r).unwrap();
        prop_assert!((q - cf).abs() <= 1e-10, "{} vs {}", q, cf);
    }

    #[test]
    fn one_dim_norm_equals_curvature_integral(terms in cosine_terms(1), r in 0.3..2.0f64) {
        let mu = from_cosine_sum(1, &terms).unwrap();
        let rules = Rules::default_for(1).unwrap();
        let norm = ru_norm(&alpha_from_spectrum(&mu, r).unwrap(), &rules);
        let oracle = d1_norm_oracle(common::f_second(&terms), r, &gauss_legendre(20, -1.0, 1.0).unwrap(), 1e-13);
        prop_assert!((norm - oracle).abs() <= 1e-8, "{} vs {}", norm, oracle);
    }

    #[test]
    fn norm_nondecreasing_in_radius((d, terms) in dim_and_terms(), r1 in 0.2..2.0f64, dr in 0.0..1.0f64) {
        let mu = from_cosine_sum(d, &terms).unwrap();
        let rules = Rules::default_for(d).unwrap();
        let a = ru_norm(&alpha_from_spectrum(&mu, r1).unwrap(), &rules);
        let b = ru_norm(&alpha_from_spectrum(&mu, r1 + dr).unwrap(), &rules);
        prop_assert!(a <= b + 1e-12);
    }

    #[test]
    fn norm_below_two_r_cf((d, terms) in dim_and_terms(), r in 0.2..3.0f64) {
        let mu = from_cosine_sum(d, &terms).unwrap();
        let rules = Rules::default_for(d).unwrap();
        let b = bound_check_2rcf(&mu, r, &rules).unwrap();
        prop_assert!(b.ok, "{:?}", b);
    }

    #[test]
    fn density_is_real_and_even((d, terms) in dim_and_terms(), r in 0.2..3.0f64) {
        let mu = from_cosine_sum(d, &terms).unwrap();
        let alpha = alpha_from_spectrum(&mu, r).unwrap();
        prop_assert!(alpha.check_invariants().is_ok());
        for p in alpha.profiles() {
            let neg: Vec<f64> = p.direction.iter().map(|v| -v).collect();
            let q = alpha.profile(&neg).expect("antipodal direction present");
            for i in 0..9 {
                let b = -r + 2.0 * r * i as f64 / 8.0;
                prop_assert!(p.value_complex(b).im.abs() <= 1e-12 * (1.0 + p.value(b).abs()));
                prop_assert!((p.value(b) - q.value(-b)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sampled_network_weight_constraints((d, terms) in dim_and_terms(), seed in any::<u64>(), n in 1usize..200) {
        let mu = from_cosine_sum(d, &terms).unwrap();
        let rules = Rules::default_for(d).unwrap();
        let alpha = alpha_from_spectrum(&mu, 1.0).unwrap();
        let norm = ru_norm(&alpha, &rules);
        prop_assume!(norm > 0.0);
        let net = sample_network(&alpha, norm, &radonlab::radon_measure::AffinePart::zero(d), n, seed, &rules).unwrap();
        prop_assert_eq!(net.convention, Convention::Thm2);
        prop_assert_eq!(net.kappa, norm);
        prop_assert!(net.check_constraints(1.0).is_ok());
        prop_assert!(net.neurons.iter().all(|p| p.a == 1.0 || p.a == -1.0));
    }

    #[test]
    fn l1_network_constraints_exact(d in 2usize..=3, seed in any::<u64>(), terms_seed in any::<u64>()) {
        let mut rng = common::rng(terms_seed);
        let mu = from_cosine_sum(d, &common::random_terms(&mut rng, d)).unwrap();
        let rules = Rules::default_for(d).unwrap();
        let alpha = alpha_from_spectrum(&mu, 1.0).unwrap();
        let norm = ru_norm(&alpha, &rules);
        let net = klusowski_network(&alpha, &radonlab::radon_measure::AffinePart::zero(d), 64, seed, &rules).unwrap();
        prop_assert!(net.check_constraints(1.0).is_ok());
        for p in &net.neurons {
            prop_assert_eq!(p.omega.iter().map(|w| w.abs()).sum::<f64>(), 1.0);
            prop_assert!((0.0..=1.0).contains(&p.b));
            prop_assert!(p.a.abs() <= 1.0);
        }
        prop_assert!(net.kappa <= (d as f64).sqrt() * norm * (1.0 + 1e-15));
    }

    #[test]
    fn radon_transform_is_even(
        cx in -0.3..0.3f64, cy in -0.3..0.3f64, r in 0.1..0.6f64,
        th in 0.0..std::f64::consts::TAU, b in -1.0..1.0f64,
    ) {
        let phi = BumpFunction::new(vec![cx, cy], r, 1.0, 1.0).unwrap();
        let res = Resolution2d::new(32).unwrap();
        let a = radon_transform_2d(&phi, &[th.cos(), th.sin()], b, &res.chord).unwrap();
        let m = radon_transform_2d(&phi, &[-th.cos(), -th.sin()], -b, &res.chord).unwrap();
        prop_assert_eq!(a, m);
    }

    #[test]
    fn set_a_terms_represent_zero(term in set_a_term(), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let rules = Rules::default_for(term.d).unwrap();
        for _ in 0..5 {
            let x = common::point_in_ball(&mut rng, term.d, 1.0);
            prop_assert!(term.ramp_integral(&x, &rules).unwrap().abs() <= 1e-8);
        }
    }

    #[test]
    fn witness_flips_across_nodal_line(k in 2usize..=8, r in 0.1..0.95f64, phi in 0.0..std::f64::consts::TAU) {
        // cos(k theta) vanishes on theta0 = pi / (2k); reflection maps phi to 2 theta0 - phi.
        let t0 = std::f64::consts::PI / (2.0 * k as f64);
        let x = [r * phi.cos(), r * phi.sin()];
        let y = [r * (2.0 * t0 - phi).cos(), r * (2.0 * t0 - phi).sin()];
        let a = witness_nonzero(k, 1, 2, 1.0, &x).unwrap().value;
        let b = witness_nonzero(k, 1, 2, 1.0, &y).unwrap().value;
        prop_assert!((a + b).abs() <= 1e-13, "{} {}", a, b);
    }

    #[test]
    fn null_density_leaves_reconstruction_unchanged(term in set_a_term(), terms_seed in any::<u64>()) {
        let d = term.d;
        let mut rng = common::rng(terms_seed);
        let mu = from_cosine_sum(d, &common::random_terms(&mut rng, d)).unwrap();
        let rules = Rules::default_for(d).unwrap();
        let alpha = alpha_from_spectrum(&mu, 1.0).unwrap();
        let grid = ball_grid(d, 1.0, 30, terms_seed % 1000).unwrap();
        let aff = fit_affine(&mu, &alpha, &grid, &rules).unwrap();
        let sum = Superposition::new(vec![&alpha as &dyn HyperplaneDensity, &term]).unwrap();
        for x in &grid.points {
            let a = reconstruct(&alpha, &aff, x, &rules).unwrap();
            let b = reconstruct(&sum, &aff, x, &rules).unwrap();
            prop_assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn cosine_sum_evaluates_directly((d, terms) in dim_and_terms(), seed in any::<u64>()) {
        let mu = from_cosine_sum(d, &terms).unwrap();
        let mut rng = common::rng(seed);
        let x = common::point_in_ball(&mut rng, d, 2.0);
        let want: f64 = terms
            .iter()
            .map(|t| t.amplitude * t.xi.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().cos())
            .sum();
        prop_assert!((evaluate_f(&mu, &x).unwrap() - want).abs() <= 1e-12);
    }

    #[test]
    fn legendre_normalised_and_bounded(k in 0usize..=12, d in 2usize..=6, t in -1.0..=1.0f64) {
        prop_assert!((legendre_eval(k, d, 1.0).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!(LegendrePoly::new(k, d).unwrap().eval(t).abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn perturbation_linear_in_scale(s in -3.0..3.0f64) {
        let term = HarmonicNullTerm::example_two(1.0);
        let base = TwoLayerNet::affine(2, &radonlab::radon_measure::AffinePart::zero(2));
        let grid = ball_grid(2, 1.0, 50, 1).unwrap();
        let cal = radonlab::calibration::Calibration::default();
        let (_, one) = radonlab::nullspace::mode_connect_perturb(&base, &term, 400, 1.0, &grid, &cal).unwrap();
        let (_, rep) = radonlab::nullspace::mode_connect_perturb(&base, &term, 400, s, &grid, &cal).unwrap();
        prop_assert!((rep.functional_change - s.abs() * one.functional_change).abs() <= 1e-15);
        prop_assert!((rep.displacement - s.abs() * one.displacement).abs() <= 1e-12);
    }
}

#[test]
fn discretized_null_converges() {
    let term = HarmonicNullTerm::example_two(1.0);
    let grid = ball_grid(2, 1.0, 500, 2).unwrap();
    let sup = |n: usize| {
        let net = discretize_null(&term, n).unwrap();
        grid.points.iter().map(|x| net.eval(x).abs()).fold(0.0, f64::max)
    };
    let vals: Vec<f64> = [125, 500, 2000, 8000].iter().map(|&n| sup(n)).collect();
    for w in vals.windows(2) {
        assert!(w[1] <= w[0], "{vals:?}");
    }
}

#[test]
fn experiment_is_schedule_independent() {
    let mu = from_cosine_sum(2, &[CosineTerm { amplitude: 1.0, xi: vec![2.0, 1.0] }]).unwrap();
    let rules = Rules::default_for(2).unwrap();
    let exp = Experiment::with_grid(&mu, 1.0, 100, &rules).unwrap();
    let a = exp.run(Convention::Thm2, &[8, 32], 6, 99).unwrap();
    let b = exp.run(Convention::Thm2, &[8, 32], 6, 99).unwrap();
    assert_eq!(a, b);
    for (ni, rep) in a.iter().enumerate() {
        for t in 0..6 {
            let net = exp.network(Convention::Thm2, rep.n, &mut trial_rng(99, ni, 6, t)).unwrap();
            assert_eq!(exp.sup_error(&net).to_bits(), rep.errors[t].to_bits());
        }
        assert!(rep.min_err <= rep.mean_err && rep.bound > 0.0);
    }
}
