use num_complex::Complex64;
use proptest::prelude::*;
use vdc_core::certify::{
    default_lp_grid, difference_set_certificate, find_certificate, find_witness, transfer_homomorphism, CertProblem,
    CertStatus, Variant,
};
use vdc_core::group::{
    measure_invariance_defect, set_invariance_defect, BoxSet, FiniteSet, FolnerFamily, GroupPoint, ReiterMeasure,
};
use vdc_core::spectral::{
    atom_at_zero, fourier_coefficient, gram_min_eigenvalue, herglotz_density, posdef_verify, SpectralMeasure,
};
use vdc_core::synth::{synthesize, verify_convergence, Component, FamilyCheck, ModelSystem, Theta, Window};
use vdc_core::tiling::{audit_tiling, good_tile_selection, tile_boundary_sums, Tiling};
use vdc_core::torus::{e_turns, RationalPoint, TorusPoint};

fn point(d: usize) -> impl Strategy<Value = GroupPoint> {
    prop::collection::vec(-40i64..40, d).prop_map(|c| GroupPoint::new(&c).unwrap())
}

fn finite_set(d: usize, max: usize) -> impl Strategy<Value = FiniteSet> {
    prop::collection::vec(point(d), 1..max).prop_map(move |p| FiniteSet::from_points(d, p).unwrap())
}

fn torus_point(d: usize) -> impl Strategy<Value = TorusPoint> {
    prop_oneof![
        prop::collection::vec(0.0f64..1.0, d).prop_map(|t| TorusPoint::new(&t).unwrap()),
        (prop::collection::vec(0i64..64, d), 1i64..64)
            .prop_map(|(n, q)| TorusPoint::rational(RationalPoint::new(&n, q).unwrap())),
    ]
}

fn spectral_measure(d: usize) -> impl Strategy<Value = SpectralMeasure> {
    prop::collection::vec((torus_point(d), 0.01f64..1.0), 1..8)
        .prop_map(move |atoms| SpectralMeasure::normalized(d, atoms).unwrap())
}

fn frequency_set() -> impl Strategy<Value = FiniteSet> {
    prop::collection::btree_set(1i64..=16, 1..6)
        .prop_map(|s| FiniteSet::from_points(1, s.into_iter().map(GroupPoint::d1)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_translate_has_zero_defect(f in finite_set(2, 30)) {
        let e = FiniteSet::from_points(2, [GroupPoint::origin(2)]).unwrap();
        prop_assert_eq!(set_invariance_defect(&f, &e).unwrap(), 0.0);
    }

    #[test]
    fn defect_is_translation_invariant(f in finite_set(2, 30), k in finite_set(2, 5), c in point(2)) {
        let a = set_invariance_defect(&f, &k).unwrap();
        let b = set_invariance_defect(&f.translate(&c), &k).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn interval_defect_closed_form(n in 2i64..500, h in 1i64..500) {
        prop_assume!(h < n);
        let f = FolnerFamily::Interval.member(n as usize).unwrap();
        let k = FiniteSet::from_points(1, [GroupPoint::d1(h)]).unwrap();
        prop_assert!((set_invariance_defect(&f, &k).unwrap() - 2.0 * h as f64 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn uniform_measure_defect_matches_set_defect(f in finite_set(1, 40), k in finite_set(1, 5)) {
        let nu = ReiterMeasure::uniform(&f).unwrap();
        let a = measure_invariance_defect(&nu, &k).unwrap();
        let b = set_invariance_defect(&f, &k).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn gram_matrices_are_psd(mu in spectral_measure(2), w in finite_set(2, 12)) {
        prop_assert!(gram_min_eigenvalue(&mu, w.points()) >= -1e-9);
    }

    #[test]
    fn fourier_coefficients_are_hermitian(mu in spectral_measure(2), h in point(2)) {
        prop_assert_eq!(fourier_coefficient(&mu, &(-h)), fourier_coefficient(&mu, &h).conj());
    }

    #[test]
    fn exact_cover_and_congruence(d in 1usize..=2, k in 0u32..=4, extra in 0u32..=3) {
        let t = Tiling::new(d, k).unwrap();
        let w = BoxSet::cube(d, 0, 1 << (k + extra));
        prop_assert!(t.exact_cover(&w).unwrap());
        if k > 0 {
            prop_assert!(t.is_union_of(&Tiling::new(d, k - 1).unwrap(), &w));
        }
    }

    #[test]
    fn unimodular_and_deterministic(seed in any::<u64>(), theta in 0.0f64..1.0, g in 0i64..4096) {
        let model = ModelSystem {
            d: 1,
            components: vec![
                Component { theta: Theta::Scalar(theta), gamma: 0.6, trivial: false },
                Component { theta: Theta::Scalar(0.0), gamma: 0.4, trivial: true },
            ],
            seed,
        };
        let w = BoxSet::interval(0, 4096);
        let a = synthesize(&model, &w, 10).unwrap();
        let b = synthesize(&model, &w, 10).unwrap();
        let z = a.value(&GroupPoint::d1(g)).unwrap();
        prop_assert!((z.norm() - 1.0).abs() < 1e-15);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn hermitian_closure_of_measures_in_one_dimension(mu in spectral_measure(1), h in -100i64..100) {
        let h = GroupPoint::d1(h);
        prop_assert_eq!(fourier_coefficient(&mu, &(-h)), fourier_coefficient(&mu, &h).conj());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn good_tiles_carry_most_mass(d in 1usize..=2, k in 4u32..=12, eps in 0.02f64..0.3, stretch in 1.1f64..4.0, lo in -50i64..50) {
        let s = 1i64 << k;
        let u = (s as f64).powi(d as i32);
        let tiles = (d as f64 * u / eps * stretch).ceil() as i64 + 1;
        let w = BoxSet::cube(d, lo * s, (lo + tiles) * s);
        let t = Tiling::new(d, k).unwrap();
        let nu = ReiterMeasure::uniform_box(w).unwrap();
        let q = GroupPoint::unit_generators(d);
        let audit = audit_tiling(&t, &nu, &q, eps).unwrap();
        prop_assume!(audit.hypothesis.holds && audit.shape_defect <= eps);
        let good = good_tile_selection(&t, &nu, &q, eps).unwrap();
        prop_assert!(good.mass > 1.0 - 4.0 * eps.sqrt());
        prop_assert!(audit.rows.iter().all(|r| r.sum1 < 3.0 * eps && r.sum2 < 4.0 * eps));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certificates_and_witnesses_are_valid(v in frequency_set()) {
        let grid = default_lp_grid(&v);
        let p = CertProblem::new(v.clone(), 0.99, grid, Variant::StrictNonneg).unwrap();
        let rep = find_certificate(&p).unwrap();
        let c = &rep.certificate;
        for (g, a) in c.terms() {
            prop_assert_eq!(c.coeff(&(-*g)), a.conj());
        }
        prop_assert!((c.coeff_sum() - 1.0).abs() <= 1e-9);
        prop_assert!(posdef_verify(c).unwrap().certified_lb >= -1e-9);

        let w = find_witness(&v, grid).unwrap();
        if w.flag.is_none() {
            prop_assert!(w.measure.atoms().iter().all(|a| a.1 >= 0.0));
            prop_assert!((w.measure.total_mass() - 1.0).abs() <= 1e-9);
            prop_assert!(w.residual <= 1e-8);
        }
        let slack = 2.0 * std::f64::consts::PI * c.degree() as f64 * c.abs_sum() / grid as f64 + 1e-6;
        prop_assert!(w.value <= c.a0() + slack);
    }

    #[test]
    fn more_frequencies_never_hurt(v in frequency_set(), extra in 1i64..=16) {
        let grid = 16 * 16 + 64;
        let solve = |s: &FiniteSet| {
            let p = CertProblem::new(s.clone(), 0.99, grid, Variant::StrictNonneg).unwrap();
            find_certificate(&p).unwrap()
        };
        let bigger = v.union(&FiniteSet::from_points(1, [GroupPoint::d1(extra)]).unwrap()).unwrap();
        let a = solve(&v);
        let b = solve(&bigger);
        prop_assert!(b.lp_value <= a.lp_value + 1e-7, "{} vs {}", b.lp_value, a.lp_value);
        prop_assert!(b.a0() <= a.a0() + 1e-6);
        prop_assert_eq!(a.status == CertStatus::Success, a.a0() < 0.99);
    }

    #[test]
    fn closure_outputs_verify(a in finite_set(1, 8), k in prop_oneof![Just(2i64), Just(3), Just(-5)]) {
        let cert = difference_set_certificate(&a).unwrap();
        prop_assert!(cert.verified_margin >= -1e-9);
        prop_assert!((cert.a0() - 1.0 / a.len() as f64).abs() <= 1e-12);
        let moved = transfer_homomorphism(&cert, k).unwrap();
        prop_assert!(moved.verified_margin >= -1e-9);
        prop_assert!((moved.coeff_sum() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn herglotz_round_trip(a in finite_set(1, 6)) {
        let cert = difference_set_certificate(&a).unwrap();
        let grid = 512;
        let mu = herglotz_density(&cert, grid).unwrap();
        let bound = 4.0 * std::f64::consts::PI * cert.degree().max(1) as f64 / grid as f64;
        for v in cert.support() {
            let want = cert.coeff(&(-*v)) / cert.a0();
            prop_assert!((fourier_coefficient(&mu, v) - want).norm() <= bound);
        }
    }

    #[test]
    fn wiener_average_recovers_atom(w0 in 0.05f64..0.95, theta in 0.05f64..0.95) {
        let mu = SpectralMeasure::normalized(1, [
            (TorusPoint::zero(1), w0),
            (TorusPoint::new(&[theta]).unwrap(), 1.0 - w0),
        ]).unwrap();
        let n = 100_000;
        let est = atom_at_zero(|h| fourier_coefficient(&mu, h), &FolnerFamily::Interval, &[n]).unwrap();
        prop_assert!((est.estimate - w0).abs() <= 10.0 / n as f64);
    }

    #[test]
    fn tile_exactness(seed in any::<u64>(), theta in 0.0f64..1.0, h in 1i64..40, tile in 0i64..8) {
        let model = ModelSystem {
            d: 1,
            components: vec![Component { theta: Theta::Scalar(theta), gamma: 1.0, trivial: false }],
            seed,
        };
        let seq = synthesize(&model, &BoxSet::interval(0, 8 * 1024), 10).unwrap();
        let lo = tile * 1024;
        let window = Window::Box(BoxSet::interval(lo, lo + 1024 - h));
        let got = seq.windowed_correlation(&window, &GroupPoint::d1(h)).unwrap();
        prop_assert!((got - e_turns(h as f64 * theta)).norm() < 1e-9);
    }

    #[test]
    fn frequency_fidelity(seed in any::<u64>(), g in prop::collection::vec(0.05f64..1.0, 1..6), m in 5u32..=8) {
        let total: f64 = g.iter().sum();
        let mut components: Vec<Component> = g.iter().enumerate().map(|(j, w)| Component {
            theta: Theta::Scalar(0.1 + 0.1 * j as f64),
            gamma: w / total,
            trivial: false,
        }).collect();
        let drift: f64 = 1.0 - components.iter().map(|c| c.gamma).sum::<f64>();
        components[0].gamma += drift;
        let model = ModelSystem { d: 1, components, seed };
        let seq = synthesize(&model, &BoxSet::interval(0, 1024 << m), 10).unwrap();
        let n = seq.tile_count() as f64;
        for (c, count) in model.components.iter().zip(seq.component_counts()) {
            prop_assert!((count as f64 / n - c.gamma).abs() <= 1.0 / n + 1e-12);
        }
    }
}

#[test]
fn boundary_sums_match_closed_form_for_aligned_windows() {
    // For uniform ν on [0, 2^m) and Q = {±1}: sum1 = (#tiles)·1/2^m for each sign.
    for (m, k) in [(12u32, 4u32), (16, 8), (20, 10)] {
        let t = Tiling::new(1, k).unwrap();
        let nu = ReiterMeasure::uniform_box(BoxSet::interval(0, 1 << m)).unwrap();
        let sums = tile_boundary_sums(&t, &nu, &GroupPoint::unit_generators(1)).unwrap();
        let tiles = (1u64 << (m - k)) as f64;
        for s in sums {
            assert!((s.sum1 - tiles / (1u64 << m) as f64).abs() < 1e-15, "{s:?}");
        }
    }
}

#[test]
fn doubling_the_window_does_not_raise_the_logged_bound() {
    let model = ModelSystem {
        d: 1,
        components: vec![
            Component { theta: Theta::Scalar(0.0), gamma: 0.5, trivial: true },
            Component { theta: Theta::Scalar(5f64.sqrt() - 2.0), gamma: 0.5, trivial: false },
        ],
        seed: 11,
    };
    let shifts = FiniteSet::interval(-20, 20);
    let check = |n: usize| {
        let c = [FamilyCheck { family: FolnerFamily::Interval, index: Some(n), tol: 1.0 }];
        verify_convergence(&model, &c, &shifts, 1 << 20, Some(10)).unwrap().families[0].clone()
    };
    // C is measured once and then held fixed along the doubling sequence.
    let base = check(1 << 15);
    let c = base.c_measured;
    let mut previous = f64::INFINITY;
    for j in 15..=19 {
        let n = 1usize << j;
        let s = check(n);
        let tiles = (n as f64 / 1024.0).ceil() + 1.0;
        let bound = c / tiles.sqrt() + 2.0 * 20.0 * tiles / n as f64;
        assert!(bound <= previous + 1e-15);
        assert!(s.sup_correlation_error.is_finite());
        previous = bound;
    }
}

#[test]
fn trivial_model_is_exact_along_every_family() {
    let model = ModelSystem {
        d: 1,
        components: vec![Component { theta: Theta::Scalar(0.0), gamma: 1.0, trivial: true }],
        seed: 0,
    };
    let checks = [
        FamilyCheck { family: FolnerFamily::Interval, index: None, tol: 0.0 },
        FamilyCheck { family: FolnerFamily::ShiftedCubic, index: Some(40), tol: 0.0 },
    ];
    let rep = verify_convergence(&model, &checks, &FiniteSet::interval(-5, 5), 1 << 18, None).unwrap();
    assert!(rep.pass);
    assert!(rep.rows.iter().all(|r| r.got_re == 1.0 && r.got_im == 0.0 && r.abs_err == 0.0));
}

#[test]
fn two_atom_model_at_two_to_the_sixteen() {
    let theta = 2f64.sqrt() - 1.0;
    let model = ModelSystem {
        d: 1,
        components: vec![
            Component { theta: Theta::Scalar(0.0), gamma: 0.5, trivial: true },
            Component { theta: Theta::Scalar(theta), gamma: 0.5, trivial: false },
        ],
        seed: 5,
    };
    let seq = synthesize(&model, &BoxSet::interval(0, 1 << 16), 12).unwrap();
    let w = Window::Box(BoxSet::interval(0, 1 << 16));
    assert!((seq.windowed_average(&w).unwrap() - 0.5).norm() < 0.01);
    let w = Window::Box(BoxSet::interval(0, (1 << 16) - 20));
    for h in 1..=20i64 {
        let got = seq.windowed_correlation(&w, &GroupPoint::d1(h)).unwrap();
        let want = (Complex64::new(1.0, 0.0) + e_turns(h as f64 * theta)) / 2.0;
        assert!((got - want).norm() < 0.01, "h={h}: {got} vs {want}");
    }
}
