use proptest::prelude::*;
use ssqw::canonical::params_deviation;
use ssqw::equivalence::spectrum_distance;
use ssqw::io::{parse_walk_str, write_canonical_spec, write_matrix, write_suzuki_spec};
use ssqw::{
    apply_gauge, build_canonical, build_suzuki, canonicalize, check_admissibility,
    decide_equivalence, distribution, evolve_closed, extract_eta, extract_zeta_xi,
    operator_distance, random_admissible_walk, random_gauge, random_ssqw_params,
    random_suzuki_params, rank_profile, window_spectrum, EquivalenceStatus, Geometry, StateVector,
    WalkProfile, Window, C64,
};

fn window() -> impl Strategy<Value = Window> {
    (-10i64..10, 2i64..20).prop_map(|(lo, n)| Window::new(lo, lo + n - 1).unwrap())
}

fn geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![
        Just(Geometry::Line),
        Just(Geometry::HalfLeft),
        Just(Geometry::HalfRight),
        Just(Geometry::Finite)
    ]
}

/// Window with an admissible profile: interior cuts at least two apart.
fn profiled() -> impl Strategy<Value = (Window, WalkProfile)> {
    window()
        .prop_flat_map(|w| {
            let n = w.len();
            (
                Just(w),
                proptest::collection::vec(0u8..10, n),
                proptest::collection::vec(0u8..10, n),
            )
        })
        .prop_map(|(w, a, b)| {
            let mut profile = WalkProfile::default();
            let mut last_cut = i64::MIN / 2;
            for (j, x) in w.sites().enumerate() {
                let interior = x > w.lo() && x < w.hi() - 1;
                if interior && a[j] == 0 && x - last_cut >= 2 {
                    profile.cuts.push(x);
                    last_cut = x;
                } else if x < w.hi() && a[j] == 1 {
                    profile.zero_p.push(x);
                }
                if b[j] == 0 {
                    profile.zero_r.push(x);
                }
            }
            (w, profile)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn structure_reconstructs((w, profile) in profiled(), seed in any::<u64>()) {
        let u = random_admissible_walk(seed, w, &profile).unwrap();
        let bases = extract_zeta_xi(&u, &extract_eta(&u).unwrap()).unwrap();
        let d = operator_distance(&u.to_dense(), &bases.reconstruct().to_dense()).unwrap();
        prop_assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn gauge_preserves_invariants((w, profile) in profiled(), seed in any::<u64>(), g in any::<u64>()) {
        let u = random_admissible_walk(seed, w, &profile).unwrap();
        let v = apply_gauge(&u, &random_gauge(g, w, false)).unwrap();
        prop_assert!(rank_profile(&u).same_ranks(&rank_profile(&v)));
        prop_assert!(spectrum_distance(&window_spectrum(&u), &window_spectrum(&v)) < 1e-10);
        prop_assert!(check_admissibility(&v).all_ok());
    }

    #[test]
    fn canonical_form_is_gauge_invariant(
        (w, profile) in profiled(), seed in any::<u64>(), g in any::<u64>(), geo in geometry()
    ) {
        let p = random_ssqw_params(seed, w, &profile).unwrap();
        let u = build_canonical(&p);
        let v = apply_gauge(&u, &random_gauge(g, w, false)).unwrap();
        let a = canonicalize(&u, geo).unwrap();
        let b = canonicalize(&v, geo).unwrap();
        prop_assert_eq!(a.segments.len(), b.segments.len());
        for (x, y) in a.segments.iter().zip(&b.segments) {
            prop_assert!(params_deviation(&x.params, &y.params) < 1e-9);
        }
        prop_assert!(b.certificate_residual(&v).unwrap() < 1e-9);
        prop_assert_eq!(decide_equivalence(&u, &v, geo).status, EquivalenceStatus::Equivalent);
    }

    #[test]
    fn canonicalization_is_idempotent((w, profile) in profiled(), seed in any::<u64>(), geo in geometry()) {
        let u = random_admissible_walk(seed, w, &profile).unwrap();
        let once = canonicalize(&u, geo).unwrap();
        let twice = canonicalize(&once.operator(), geo).unwrap();
        for (x, y) in once.segments.iter().zip(&twice.segments) {
            prop_assert!(params_deviation(&x.params, &y.params) < 1e-9);
        }
    }

    #[test]
    fn files_round_trip((w, profile) in profiled(), seed in any::<u64>()) {
        let p = random_ssqw_params(seed, w, &profile).unwrap();
        let back = parse_walk_str(&write_canonical_spec(&p)).unwrap().operator();
        prop_assert!(operator_distance(&build_canonical(&p).to_dense(), &back.to_dense()).unwrap() < 1e-12);

        let s = random_suzuki_params(seed, w, &profile.cuts, false);
        let back = parse_walk_str(&write_suzuki_spec(&s)).unwrap().operator();
        prop_assert!(operator_distance(&build_suzuki(&s).to_dense(), &back.to_dense()).unwrap() < 1e-12);

        let u = random_admissible_walk(seed, w, &profile).unwrap();
        let back = parse_walk_str(&write_matrix(&u)).unwrap().operator();
        prop_assert!(operator_distance(&u.to_dense(), &back.to_dense()).unwrap() < 1e-12);
    }

    #[test]
    fn evolution_preserves_norm(
        (w, profile) in profiled(), seed in any::<u64>(), steps in 0usize..60, phase in 0.0f64..std::f64::consts::TAU
    ) {
        let u = random_admissible_walk(seed, w, &profile).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![[C64::new(0.0, 0.0); 2]; w.len()];
        amps[0] = [C64::new(h, 0.0), C64::from_polar(h, phase)];
        let psi = StateVector::new(w, amps).unwrap();
        let out = evolve_closed(&u, &psi, steps).unwrap();
        prop_assert!((distribution(&out).total() - 1.0).abs() < 1e-10);
    }
}
