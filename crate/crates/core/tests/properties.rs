use proptest::prelude::*;

use takagi_core::boundary::{CayleyGraph, DeltaMode, SubsetMask};
use takagi_core::fclass::{blow_up, cyclic_variation, defect, refute_membership, FunctionSpec, RefuteConfig};
use takagi_core::groups::{GenSet, GroupSpec};
use takagi_core::search::{binomial, rank, unrank};
use takagi_core::takagi::{omega_exact_rational, omega_float, t3};
use takagi_core::{Rational, Value};

fn rational_in(max_den: i64) -> impl Strategy<Value = Rational> {
    (1..=max_den).prop_flat_map(move |d| (0..=d).prop_map(move |n| Rational::ratio(n, d)))
}

fn signed_rational() -> impl Strategy<Value = Rational> {
    (-500i64..=500, 1i64..=200).prop_map(|(n, d)| Rational::ratio(n, d))
}

fn instance() -> impl Strategy<Value = (GroupSpec, GenSet, Vec<bool>)> {
    prop::collection::vec(2u64..=5, 1..=3)
        .prop_flat_map(|moduli| {
            let g = GroupSpec::new(moduli).unwrap();
            let order = g.order();
            (Just(g), prop::collection::vec(1..order, 0..=2), prop::collection::vec(any::<bool>(), order as usize))
        })
        .prop_map(|(g, extra, bits)| {
            let mut elems = GenSet::units(&g).elements().to_vec();
            for i in extra {
                let e = g.element_of(i).unwrap();
                if !elems.contains(&e) {
                    elems.push(e);
                }
            }
            let s = GenSet::new(&g, elems).unwrap();
            (g, s, bits)
        })
}

fn mask_of(order: u64, bits: &[bool]) -> SubsetMask {
    SubsetMask::from_indices(order, (0..order).filter(|&i| bits[i as usize]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rational_field_laws(a in signed_rational(), b in signed_rational(), c in signed_rational()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
        prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a.clone());
        let f = a.frac_mod1();
        prop_assert!(!f.is_negative() && f < Rational::one());
        prop_assert!((&a - &f).is_integer());
    }

    #[test]
    fn omega_is_even_periodic_and_bounded(m in 2u64..=7, x in signed_rational()) {
        let w = omega_exact_rational(m, &x).unwrap();
        prop_assert_eq!(&w, &omega_exact_rational(m, &-x.clone()).unwrap());
        prop_assert_eq!(&w, &omega_exact_rational(m, &(&x + &Rational::one())).unwrap());
        prop_assert!(!w.is_negative());
        prop_assert!(w <= Rational::ratio(1, m as i64 - 1));
    }

    #[test]
    fn omega4_is_half_omega2(p in 0i64..=1000, q in 1i64..=1000) {
        let x = Rational::ratio(p, q);
        let w2 = omega_exact_rational(2, &x).unwrap();
        prop_assert_eq!(omega_exact_rational(4, &x).unwrap(), &w2 / &Rational::from_integer(2));
    }

    #[test]
    fn t3_is_scaled_omega3(r in 0u32..=8, n in -20_000i64..=20_000) {
        let p = 3i64.pow(r);
        let expected = &Rational::from_integer(p) * &omega_exact_rational(3, &Rational::ratio(n, p)).unwrap();
        prop_assert_eq!(Rational::from_integer(t3(r, n)), expected);
        prop_assert_eq!(t3(r, n), t3(r, -n));
    }

    #[test]
    fn omega_float_brackets_exact_value(m in 2u64..=6, p in 0i64..=2000, q in 1i64..=2000) {
        // powers of two keep the double exact, so the comparison is with ω_m at the same point
        let shift = 1i64 << (q % 20);
        let x = Rational::ratio(p, shift);
        let b = omega_float(m, x.to_f64(), 50).unwrap();
        let exact = omega_exact_rational(m, &x).unwrap().to_f64();
        prop_assert!(b.contains(exact), "{} ± {} vs {}", b.value, b.error_bound, exact);
    }

    #[test]
    fn boundary_symmetries((g, s, bits) in instance()) {
        let graph = CayleyGraph::new(&g, &s).unwrap();
        let neg = CayleyGraph::new(&g, &s.negated(&g)).unwrap();
        let a = mask_of(g.order(), &bits);
        let b = graph.boundary(&a).unwrap();
        prop_assert_eq!(b, graph.boundary(&a.complement()).unwrap());
        prop_assert_eq!(b, neg.boundary(&a).unwrap());
        prop_assert!(b <= a.len() * s.len() as u64);
    }

    #[test]
    fn delta_matches_recount((g, s, bits) in instance(), picks in prop::collection::vec(any::<u64>(), 1..40)) {
        let graph = CayleyGraph::new(&g, &s).unwrap();
        let mut a = mask_of(g.order(), &bits);
        let mut value = graph.boundary(&a).unwrap() as i64;
        for p in picks {
            let x = p % g.order();
            let mode = if a.contains(x) { DeltaMode::Remove } else { DeltaMode::Add };
            value += graph.delta(&a, x, mode).unwrap();
            if mode == DeltaMode::Add { a.insert(x); } else { a.remove(x); }
            prop_assert_eq!(value, graph.boundary(&a).unwrap() as i64);
        }
    }

    #[test]
    fn mask_hex_round_trip((g, _s, bits) in instance()) {
        let a = mask_of(g.order(), &bits);
        prop_assert_eq!(SubsetMask::from_hex(g.order(), &a.to_hex()).unwrap(), a);
    }

    #[test]
    fn unrank_rank_inverse(n in 0u64..=30, k_frac in 0.0f64..=1.0, r_frac in 0.0f64..1.0) {
        let k = ((n as f64) * k_frac).round() as u64;
        let total = binomial(n, k);
        let r = ((total as f64) * r_frac) as u128 % total;
        let subset = unrank(n, k, r);
        prop_assert_eq!(subset.len() as u64, k);
        prop_assert!(subset.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(rank(n, &subset), r);
    }

    #[test]
    fn cyclic_variation_dominates_spread(xs in prop::collection::vec(signed_rational(), 1..10)) {
        let cv = cyclic_variation(&xs).unwrap();
        let spread = xs.iter().max().unwrap() - xs.iter().min().unwrap();
        prop_assert!(cv >= &Rational::from_integer(2) * &spread);
    }

    #[test]
    fn blow_up_keeps_defect(l in 2u64..=4, factor in 1usize..=3, tuple in prop::collection::vec(rational_in(24), 4)) {
        let t = &tuple[..l as usize];
        for f in [FunctionSpec::m_omega(2).unwrap(), FunctionSpec::m_omega(3).unwrap(), "poly:c=0;-1;1".parse().unwrap()] {
            let d = defect(&f, l, t).unwrap();
            prop_assert_eq!(defect(&f, l * factor as u64, &blow_up(t, factor)).unwrap(), d);
        }
    }

    #[test]
    fn convex_functions_have_no_positive_defect(m in 2u64..=5, tuple in prop::collection::vec(rational_in(30), 5)) {
        let f: FunctionSpec = "poly:c=0;-1;1".parse().unwrap();
        let d = defect(&f, m, &tuple[..m as usize]).unwrap();
        prop_assert!(!d.as_exact().unwrap().is_positive());
    }

    #[test]
    fn small_m_omega_has_no_positive_defect(m in 2u64..=3, tuple in prop::collection::vec(rational_in(27), 3)) {
        let f = FunctionSpec::m_omega(m).unwrap();
        let d = defect(&f, m, &tuple[..m as usize]).unwrap();
        prop_assert!(!d.as_exact().unwrap().is_positive());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn refutation_witnesses_are_sound(spec_idx in 0usize..4, m in 4u64..=8, seed in any::<u64>()) {
        let specs = ["scaled_omega:m=2,scale=2", "scaled_omega:m=3,scale=3", "scaled_omega:m=2,scale=5/2", "pwl:0,0;1/3,1;1,0"];
        let f: FunctionSpec = specs[spec_idx].parse().unwrap();
        let cfg = RefuteConfig { grid: 18, restarts: 4, budget: 100, seed, threads: None };
        if let Some(w) = refute_membership(&f, m, &cfg).unwrap() {
            prop_assert!(w.certified);
            prop_assert_eq!(w.tuple.len() as u64, m);
            let d = defect(&f, m, &w.tuple).unwrap();
            prop_assert!(matches!(&d, Value::Exact(v) if v.is_positive()));
            prop_assert_eq!(d, w.defect);
        }
    }
}
