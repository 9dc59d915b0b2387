//! Algebraic laws of the polynomial layer, the derivation and the resultant.

use std::collections::HashMap;
use std::sync::Arc;

use ideal_elim::derivation::DerivationTable;
use ideal_elim::rational::rat;
use ideal_elim::resultant::{det_bareiss, det_cofactor, resultant_with, Method};
use ideal_elim::scenario::{Pattern, Scenario};
use ideal_elim::{BigRat, Limits, Monomial, Poly, VarId, VarSet};
use proptest::prelude::*;

fn xyz() -> Arc<VarSet> {
    VarSet::aux(&["x", "y", "z"])
}

fn arb_rat() -> impl Strategy<Value = BigRat> {
    (-20i64..=20, 1i64..=6).prop_map(|(p, q)| rat(p, q))
}

fn arb_poly_in(vars: Arc<VarSet>, max_exp: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    let nv = vars.len();
    prop::collection::vec((prop::collection::vec(0..=max_exp, nv), arb_rat()), 0..=max_terms).prop_map(move |ts| {
        let terms = ts.into_iter().map(|(e, c)| (Monomial::from_exps(&e), c)).collect();
        Poly::from_terms(&vars, terms)
    })
}

fn arb_poly() -> impl Strategy<Value = Poly> {
    arb_poly_in(xyz(), 3, 6)
}

fn arb_point() -> impl Strategy<Value = Vec<BigRat>> {
    prop::collection::vec(arb_rat(), 3)
}

fn at(p: &Poly, pt: &[BigRat]) -> BigRat {
    let m: HashMap<VarId, BigRat> = pt.iter().enumerate().map(|(i, c)| (VarId(i), c.clone())).collect();
    p.eval(&m).unwrap()
}

fn scenario_poly() -> impl Strategy<Value = Poly> {
    let s = Scenario::build(5, 3, &Pattern::all_singletons(3)).unwrap();
    arb_poly_in(s.vars.clone(), 2, 5)
}

fn table() -> DerivationTable {
    DerivationTable::build(&Scenario::build(5, 3, &Pattern::all_singletons(3)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &Poly::one(a.vars()), a.clone());
        prop_assert_eq!(&a + &Poly::zero(a.vars()), a.clone());
    }

    #[test]
    fn evaluation_is_a_ring_map(a in arb_poly(), b in arb_poly(), pt in arb_point()) {
        prop_assert_eq!(at(&(&a + &b), &pt), at(&a, &pt) + at(&b, &pt));
        prop_assert_eq!(at(&(&a * &b), &pt), at(&a, &pt) * at(&b, &pt));
    }

    #[test]
    fn text_round_trip(a in arb_poly()) {
        let back = Poly::parse(&a.to_string(), a.vars()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn substitution_commutes_with_evaluation(a in arb_poly(), q in arb_poly_in(xyz(), 2, 3), pt in arb_point()) {
        let x = VarId(0);
        let sub = a.substitute(x, &q, &Limits::default()).unwrap();
        let mut moved = pt.clone();
        moved[0] = at(&q, &pt);
        prop_assert_eq!(at(&sub, &pt), at(&a, &moved));
    }

    #[test]
    fn exact_division_inverts_multiplication(a in arb_poly(), b in arb_poly()) {
        prop_assume!(!b.is_zero());
        let prod = &a * &b;
        prop_assert_eq!(prod.exact_div(&b, &Limits::default()).unwrap(), a);
    }

    #[test]
    fn content_times_primitive(a in arb_poly()) {
        prop_assume!(!a.is_zero());
        let (c, p) = a.content_and_primitive().unwrap();
        prop_assert_eq!(p.scale(&c), a);
        prop_assert!(p.leading_coeff().unwrap().is_positive());
    }

    #[test]
    fn derivation_linear_and_leibniz(a in scenario_poly(), b in scenario_poly(), c in arb_rat()) {
        let t = table();
        prop_assert_eq!(t.derive(&(&a + &b)), &t.derive(&a) + &t.derive(&b));
        prop_assert_eq!(t.derive(&a.scale(&c)), t.derive(&a).scale(&c));
        prop_assert_eq!(t.derive(&(&a * &b)), &(&t.derive(&a) * &b) + &(&a * &t.derive(&b)));
        prop_assert!(t.derive(&Poly::constant(a.vars(), c)).is_zero());
    }
}

fn arb_in_x() -> impl Strategy<Value = Poly> {
    arb_in_x_sized(3, 3, 5)
}

/// Products of these stay small enough for the general Bareiss route.
fn arb_small_in_x() -> impl Strategy<Value = Poly> {
    arb_in_x_sized(1, 2, 3)
}

fn arb_in_x_sized(max_exp: u32, max_deg: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    // Nonzero degree in x keeps the Sylvester matrix nontrivial.
    (arb_poly_in(xyz(), max_exp, max_terms), 1u32..=max_deg, arb_rat()).prop_map(|(p, d, c)| {
        let c = if c.is_zero() { BigRat::one() } else { c };
        &p + &Poly::monomial(p.vars(), Monomial::var(3, VarId(0), d), c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resultant_antisymmetry(f in arb_in_x(), g in arb_in_x()) {
        let x = VarId(0);
        let lim = Limits::default();
        let a = resultant_with(&f, &g, x, Method::Auto, &lim).unwrap();
        let b = resultant_with(&g, &f, x, Method::Auto, &lim).unwrap();
        let sign = if (f.degree_in(x) * g.degree_in(x)) % 2 == 1 { -1 } else { 1 };
        prop_assert_eq!(a, b.scale(&rat(sign, 1)));
    }

    #[test]
    fn resultant_routes_agree(f in arb_in_x(), g in arb_in_x()) {
        let x = VarId(0);
        let lim = Limits::default();
        let d = resultant_with(&f, &g, x, Method::Direct, &lim).unwrap();
        prop_assert!(!d.contains_var(x));
        prop_assert_eq!(resultant_with(&f, &g, x, Method::Auto, &lim).unwrap(), d.clone());
        // The modular route needs at most one other variable.
        let y0 = f.specialize(&[(VarId(2), rat(3, 1))]);
        let g0 = g.specialize(&[(VarId(2), rat(-2, 5))]);
        if y0.contains_var(x) && g0.contains_var(x) {
            let m = resultant_with(&y0, &g0, x, Method::Modular, &lim).unwrap();
            prop_assert_eq!(m, resultant_with(&y0, &g0, x, Method::Direct, &lim).unwrap());
        }
    }

    #[test]
    fn resultant_is_multiplicative(f1 in arb_small_in_x(), f2 in arb_small_in_x(), g in arb_in_x()) {
        let x = VarId(0);
        let lim = Limits::default();
        let lhs = resultant_with(&(&f1 * &f2), &g, x, Method::Auto, &lim).unwrap();
        let rhs = &resultant_with(&f1, &g, x, Method::Auto, &lim).unwrap() * &resultant_with(&f2, &g, x, Method::Auto, &lim).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn common_factor_kills_resultant(f in arb_small_in_x(), g in arb_small_in_x(), h in arb_small_in_x()) {
        let x = VarId(0);
        let r = resultant_with(&(&f * &h), &(&g * &h), x, Method::Auto, &Limits::default()).unwrap();
        prop_assert!(r.is_zero());
    }

    #[test]
    fn bareiss_matches_cofactor(n in 1usize..=5, cells in prop::collection::vec(arb_poly_in(VarSet::aux(&["x", "y"]), 2, 3), 25)) {
        let vars = cells[0].vars().clone();
        let mat: Vec<Vec<Poly>> = (0..n).map(|i| cells[i * n..(i + 1) * n].to_vec()).collect();
        prop_assert_eq!(det_bareiss(&mat, &vars, &Limits::default()).unwrap(), det_cofactor(&mat, &vars));
    }
}
