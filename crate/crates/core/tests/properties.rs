use detpath_core::dyson::{sample_stationary, SeededRng};
use detpath_core::exact::rat;
use detpath_core::graph::lgv_check;
use detpath_core::graph::random::{random_instance, RandomGraphParams};
use detpath_core::graph::schema::{format_rational, parse_rational, GraphDocument};
use detpath_core::operator::{commuting_family, identity_check, CommutingFamilySpec, FamilyDocument};
use detpath_core::profile::Profile;
use detpath_core::Matrix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rationals_round_trip(n in -1000i64..1000, d in 1i64..1000) {
        let r = rat(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn lgv_holds_for_full_boundaries(seed in 0u64..10_000) {
        let inst = random_instance(seed, &RandomGraphParams::default());
        let e = &inst.ensemble;
        let n = e.particles();
        let xs = e.boundary().sources()[..n].to_vec();
        let ys = e.boundary().sinks()[..n].to_vec();
        let rep = lgv_check(e.graph(), e.weights(), &xs, &ys).unwrap();
        prop_assert!(rep.equal);
    }

    #[test]
    fn functional_ratio_is_a_determinant(seed in 0u64..10_000) {
        let inst = random_instance(seed, &RandomGraphParams::default());
        let e = &inst.ensemble;
        prop_assert_eq!(
            e.functional_expectation_bruteforce(&inst.functional).unwrap(),
            e.path_integral_determinant(&inst.functional).unwrap()
        );
    }

    #[test]
    fn graph_documents_round_trip(seed in 0u64..10_000) {
        let inst = random_instance(seed, &RandomGraphParams::default());
        let e = &inst.ensemble;
        let doc = GraphDocument::from_parts(e.graph(), e.weights(), Some(e.boundary()))
            .with_multipliers(&inst.multipliers)
            .with_functional(&inst.functional);
        let back: GraphDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        prop_assert_eq!(&back, &doc);
        let g = back.graph().unwrap();
        prop_assert_eq!(back.weighting(&g).unwrap(), e.weights().clone());
    }

    #[test]
    fn commuting_families_satisfy_the_identity(seed in 0u64..10_000, n in 1usize..5, d in 1usize..7) {
        let inst = commuting_family(&CommutingFamilySpec { seed, n, d, rank: None, spectrum: None }).unwrap();
        let rep = identity_check(&inst.family, &inst.multipliers, 1e-10).unwrap();
        prop_assert!(rep.pass, "{rep:?}");
        let doc = FamilyDocument::from_family(&inst.family, &inst.multipliers);
        let again = identity_check(&doc.family().unwrap(), &doc.multipliers(), 1e-10).unwrap();
        prop_assert_eq!(again.lhs, rep.lhs);
    }

    #[test]
    fn determinants_multiply(a in prop::collection::vec(-2.0f64..2.0, 16), b in prop::collection::vec(-2.0f64..2.0, 16)) {
        let ma = Matrix::from_fn(4, 4, |i, j| a[4 * i + j]);
        let mb = Matrix::from_fn(4, 4, |i, j| b[4 * i + j]);
        let lhs = (&ma * &mb).determinant();
        let rhs = ma.determinant() * mb.determinant();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn eigenvalues_sum_to_the_trace(seed in 0u64..10_000, n in 1usize..8) {
        let mut rng = SeededRng::new(seed).stream(0);
        let h = sample_stationary(n, &mut rng).unwrap();
        let ev = h.eigenvalues().unwrap();
        prop_assert_eq!(ev.len(), n);
        prop_assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((ev.iter().sum::<f64>() - h.trace()).abs() <= 1e-10);
    }

    #[test]
    fn profiles_round_trip_through_text(at in -5.0f64..5.0, v in 0.1f64..2.0, w in 0.05f64..1.0) {
        for p in [
            Profile::Indicator { above: at, value: v },
            Profile::Logistic { above: at, width: w, value: v },
            Profile::Gaussian { center: at, width: w, value: v },
        ] {
            let back: Profile = p.to_string().parse().unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
