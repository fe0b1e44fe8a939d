//! Property tests of the algebraic identities on generated inputs.

mod common;

use common::*;
use contactq::coeffring::{parse_poly, rat, Monomial, MultiPoly};
use contactq::contact::{jacobi_bracket, ContactData};
use contactq::fedosov::{solve_r, Observable};
use contactq::weyl::{WeylAlgebra, WeylElement};
use proptest::prelude::*;

type Term = (u16, u16, u16, i64, i64);

fn terms(max_exp: u16) -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec((0..=max_exp, 0..=max_exp, 0..=max_exp, -6i64..=6, 1i64..=4), 1..5)
}

fn to_poly(cd: &ContactData, ts: &[Term], with_t: bool) -> MultiPoly {
    let mono = ts.iter().map(|&(t, q, p, n, d)| {
        let t = if with_t { t } else { 0 };
        (Monomial([t, q, p].into_iter().collect()), rat(n, d))
    });
    MultiPoly::from_terms(cd.vars(), mono)
}

type WeylTerm = (u32, Vec<usize>, u8, Vec<Term>);

fn weyl_terms() -> impl Strategy<Value = Vec<WeylTerm>> {
    prop::collection::vec((0u32..=2, prop::collection::vec(1usize..=2, 0..5), 0u8..8, terms(2)), 1..4)
}

fn to_weyl(alg: &WeylAlgebra, ts: &[WeylTerm]) -> WeylElement {
    let cd = alg.contact();
    let mut a = alg.zero(contactq::weyl::EXACT);
    for (nu, ys, mask, c) in ts {
        let dxs: Vec<usize> = (0..3).filter(|i| mask & (1 << i) != 0).collect();
        a = &a + &WeylElement::monomial(cd.vars(), *nu, ys, &dxs, &to_poly(cd, c, true));
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_parses_back(ts in terms(4)) {
        let cd = darboux3();
        let f = to_poly(&cd, &ts, true);
        prop_assert_eq!(parse_poly(&f.to_string(), cd.vars()).unwrap(), f);
    }

    #[test]
    fn ring_axioms(a in terms(3), b in terms(3), c in terms(3)) {
        let cd = darboux3();
        let (a, b, c) = (to_poly(&cd, &a, true), to_poly(&cd, &b, true), to_poly(&cd, &c, true));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!((&a * &b).diff(1), &(&a.diff(1) * &b) + &(&a * &b.diff(1)));
        prop_assert_eq!(a.antiderivative(2).diff(2), a);
    }

    #[test]
    fn bracket_identities(f in terms(3), g in terms(3), h in terms(3)) {
        let cd = darboux3();
        let (f, g, h) = (to_poly(&cd, &f, true), to_poly(&cd, &g, true), to_poly(&cd, &h, true));
        let br = |a: &MultiPoly, b: &MultiPoly| jacobi_bracket(&cd, a, b);
        prop_assert_eq!(br(&f, &g), -&br(&g, &f));
        let anomaly = &(&br(&f, &(&g * &h)) - &(&br(&f, &g) * &h)) - &(&g * &br(&f, &h));
        prop_assert_eq!(anomaly, &(&g * &h) * &cd.xi_apply(&f));
    }

    #[test]
    fn poisson_on_invariant_functions(f in terms(3), g in terms(3), h in terms(3)) {
        let cd = darboux3();
        let (f, g, h) = (to_poly(&cd, &f, false), to_poly(&cd, &g, false), to_poly(&cd, &h, false));
        let br = |a: &MultiPoly, b: &MultiPoly| jacobi_bracket(&cd, a, b);
        let jac = &(&br(&f, &br(&g, &h)) + &br(&g, &br(&h, &f))) + &br(&h, &br(&f, &g));
        prop_assert!(jac.is_zero());
        let leib = &(&br(&f, &(&g * &h)) - &(&br(&f, &g) * &h)) - &(&g * &br(&f, &h));
        prop_assert!(leib.is_zero());
    }

    #[test]
    fn delta_complex(ts in weyl_terms()) {
        let alg = WeylAlgebra::new(&darboux3()).unwrap();
        let a = to_weyl(&alg, &ts);
        prop_assert!(alg.delta(&alg.delta(&a)).is_zero());
        prop_assert!(alg.delta_star(&alg.delta_star(&a)).is_zero());
        prop_assert!(alg.delta_inv(&alg.delta_inv(&a)).is_zero());
        let hd = &(&alg.delta(&alg.delta_inv(&a)) + &alg.delta_inv(&alg.delta(&a))) + &alg.proj_p(&a);
        prop_assert_eq!(hd, a);
    }

    #[test]
    fn circ_is_associative_and_unital(a in weyl_terms(), b in weyl_terms(), c in weyl_terms()) {
        let alg = WeylAlgebra::new(&darboux3()).unwrap();
        let (a, b, c) = (to_weyl(&alg, &a), to_weyl(&alg, &b), to_weyl(&alg, &c));
        prop_assert_eq!(alg.circ(&alg.circ(&a, &b), &c), alg.circ(&a, &alg.circ(&b, &c)));
        prop_assert_eq!(alg.circ(&alg.one(), &a), a.clone());
        // δ is a graded derivation of ∘
        let sign = |x: &WeylElement| if x.max_form_degree().is_multiple_of(2) { rat(1, 1) } else { rat(-1, 1) };
        let even = a.filter(|k| k.form_degree() % 2 == 0);
        let lhs = alg.delta(&alg.circ(&even, &b));
        let rhs = &alg.circ(&alg.delta(&even), &b) + &alg.circ(&even, &alg.delta(&b)).scale(&sign(&even));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn nabla_identities(s in terms(2), ts in weyl_terms()) {
        let cd = darboux3();
        let alg = WeylAlgebra::new(&cd).unwrap();
        let comp = to_poly(&cd, &s, true);
        let conn = contactq::contact::build_connection(&cd, &s3_poly(&cd, comp)).unwrap();
        let a = to_weyl(&alg, &ts);
        let anti = &alg.nabla(&conn, &alg.delta(&a)) + &alg.delta(&alg.nabla(&conn, &a));
        prop_assert!(anti.is_zero());
        let sq = alg.nabla(&conn, &alg.nabla(&conn, &a));
        prop_assert_eq!(sq, alg.nu_inv_commutator(&alg.curvature_element(&conn), &a));
    }
}

fn s3_poly(cd: &ContactData, f: MultiPoly) -> contactq::contact::STensors {
    contactq::contact::STensors::from_components(cd, &[], &[(vec![1, 1, 2], f)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn star_on_the_flat_chart(a in terms(2), b in terms(2), c in terms(2)) {
        let cd = darboux3();
        let fd = solve_r(&algebra(&cd), &connection(&cd, &[]), &[], 5).unwrap();
        let obs = |t: &[Term]| Observable::classical(&to_poly(&cd, t, false), 2);
        let (a, b, c) = (obs(&a), obs(&b), obs(&c));
        prop_assert_eq!(fd.star(&fd.star(&a, &b), &c), fd.star(&a, &fd.star(&b, &c)));
        let one = Observable::classical(&MultiPoly::one(cd.vars()), 2);
        prop_assert_eq!(fd.star(&one, &a), a.clone());
        // ν-linear term is half the bracket
        let ab = fd.star(&a, &b);
        let ba = fd.star(&b, &a);
        prop_assert_eq!(&ab.coeff(0).clone(), &(a.coeff(0) * b.coeff(0)));
        prop_assert_eq!(ab.coeff(1) - ba.coeff(1), jacobi_bracket(&cd, a.coeff(0), b.coeff(0)));
    }

    #[test]
    fn quantization_inverts_projection(ts in terms(3), s in terms(1)) {
        let cd = darboux3();
        let conn = contactq::contact::build_connection(&cd, &s3_poly(&cd, to_poly(&cd, &s, true))).unwrap();
        let fd = solve_r(&algebra(&cd), &conn, &[], 5).unwrap();
        let a = Observable::new(cd.vars(), vec![to_poly(&cd, &ts, true), to_poly(&cd, &ts, false)], 2);
        let back = Observable::from_scalar_part(&fd.algebra().proj_p(&fd.quantum_lift(&a)), 2);
        prop_assert_eq!(back, Some(a));
    }
}
