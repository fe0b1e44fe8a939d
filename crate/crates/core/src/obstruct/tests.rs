use std::collections::BTreeMap;
use std::sync::Arc;

use super::*;
use crate::contact::{validate_contact, Chart};
use crate::fedosov::{equivalence_g, solve_r};
use crate::weyl::WeylAlgebra;

const Q: usize = 1;
const P: usize = 2;

fn darboux(period: Option<Rational>) -> ContactData {
    let chart = Chart::new(&["t", "q", "p"], vec![period, None, None]).unwrap();
    let lambda = ["1", "p", "0"].iter().map(|s| chart.poly(s).unwrap()).collect();
    validate_contact(chart, lambda).unwrap()
}

fn poly(cd: &ContactData, s: &str) -> MultiPoly {
    cd.chart.poly(s).unwrap()
}

fn s3(cd: &ContactData, comps: &[(&[usize], &str)]) -> STensors {
    let c: Vec<_> = comps.iter().map(|(i, s)| (i.to_vec(), poly(cd, s))).collect();
    STensors::from_components(cd, &[], &c).unwrap()
}

fn conn(cd: &ContactData, comps: &[(&[usize], &str)]) -> ContactConnection {
    build_connection(cd, &s3(cd, comps)).unwrap()
}

fn circle_orbit(cd: &ContactData, q: i64, p: i64) -> ClosedCharacteristic {
    let base: BTreeMap<String, Rational> = [("q".to_string(), rat(q, 1)), ("p".to_string(), rat(p, 1))].into();
    characteristic_curve(cd, &base).unwrap()
}

#[test]
fn delta_two_closed_form_examples() {
    let cd = darboux(None);
    let flat = conn(&cd, &[]);
    assert!(delta2_closed_form(&cd, &flat, &poly(&cd, "q^3*p^2")).unwrap().is_zero());
    let curved = conn(&cd, &[(&[Q, Q, Q], "p")]);
    assert!(delta2_closed_form(&cd, &curved, &poly(&cd, "1")).unwrap().is_zero());
    assert!(matches!(
        delta2_closed_form(&cd, &curved, &poly(&cd, "t*q")),
        Err(ObstructError::NotInvariant(_))
    ));
    let alg = Arc::new(WeylAlgebra::new(&cd).unwrap());
    let fd = solve_r(&alg, &curved, &[], 6).unwrap();
    for a in ["q^3*p", "p^4 + q^2*p", "q*p"] {
        let a0 = poly(&cd, a);
        let d = fd.delta_to_order(&Observable::classical(&a0, 2), 2).unwrap();
        assert_eq!(d.coeff(2), &delta2_closed_form(&cd, &curved, &a0).unwrap(), "{a}");
    }
}

#[test]
fn curvature_term_of_the_closed_form() {
    let cd = darboux(None);
    let cases: [&[(&[usize], &str)]; 3] = [
        &[(&[Q, Q, Q], "t"), (&[Q, P, P], "q")],
        &[(&[Q, Q, Q], "t*p"), (&[P, P, P], "q")],
        &[(&[Q, Q, P], "t*q"), (&[P, P, P], "t + p")],
    ];
    for comps in cases {
        let c = conn(&cd, comps);
        for a in ["p^3", "q^2*p", "q^3 + p^2*q^2"] {
            let a0 = poly(&cd, a);
            let got = delta2_compositional(&cd, &c, &a0).unwrap();
            assert_eq!(got, delta2_adjusted_form(&cd, &c, &a0).unwrap(), "{comps:?} {a}");
        }
    }
    // S_qqq = t, S_qpp = q, a₀ = p³: the ½ curvature term of the closed form gives
    // −1/4 − 3/4 qp − 3/8 q²p², the compositional operator −1/4 − 3/4 qp
    let c = conn(&cd, cases[0]);
    let a0 = poly(&cd, "p^3");
    assert_eq!(delta2_closed_form(&cd, &c, &a0).unwrap(), poly(&cd, "-1/4 - 3/4*q*p - 3/8*q^2*p^2"));
    assert_eq!(delta2_compositional(&cd, &c, &a0).unwrap(), poly(&cd, "-1/4 - 3/4*q*p"));
}

#[test]
fn character_is_the_adjoint_of_the_closed_form() {
    let cd = darboux(None);
    assert!(chi_character(&cd, &conn(&cd, &[]), true).is_zero());
    for comps in [vec![(&[Q, Q, P][..], "t*p^2 + q")], vec![(&[Q, Q, Q][..], "t*q"), (&[P, P, P][..], "t^2")]] {
        let c = conn(&cd, &comps);
        let l = |a: &MultiPoly| Ok(delta2_formula(&cd, &c, a, &rat(1, 2)).scale(&rat(24, 1)));
        let oracle = -&formal_adjoint_on_one(cd.vars(), l, 5).unwrap();
        let chi = chi_character(&cd, &c, true);
        assert_eq!(chi, oracle, "{comps:?}");
        assert!(!chi.is_zero());
    }
    // separately expanded by hand: S_qqp = t p² + q gives χ = −54 t p² − 12 q
    let c = conn(&cd, &[(&[Q, Q, P], "t*p^2 + q")]);
    assert_eq!(chi_character(&cd, &c, true), poly(&cd, "-54*t*p^2 - 12*q"));
}

#[test]
fn character_on_the_circle() {
    let cd = darboux(Some(rat(1, 1)));
    assert!(chi_character(&cd, &conn(&cd, &[(&[Q, Q, Q], "p")]), true).is_zero());
    let cc = circle_orbit(&cd, 2, 3);
    for s in ["t", "t*p", "t + q^2"] {
        let c = conn(&cd, &[(&[Q, Q, Q], s)]);
        let with = characteristic_integral(&cc, &cd, &chi_character(&cd, &c, true)).unwrap();
        let without = characteristic_integral(&cc, &cd, &chi_character(&cd, &c, false)).unwrap();
        assert_eq!(with, without, "{s}");
        assert_eq!(chi_period(&cc, &cd, &c).unwrap(), with);
    }
}

#[test]
fn psi_shift_examples() {
    let cd = darboux(None);
    let flat = conn(&cd, &[]);
    assert!(psi_shift(&cd, &flat, &STensors::zero(&cd)).is_zero());
    // constant S over the flat base: only the curvature term could survive,
    // and it vanishes with R
    let s = s3(&cd, &[(&[Q, Q, P], "2"), (&[P, P, P], "-1")]);
    assert!(psi_shift(&cd, &flat, &s).is_zero());
}

#[test]
fn psi_shift_is_the_adjoint_of_the_g2_closed_form() {
    let cd = darboux(None);
    let alg = Arc::new(WeylAlgebra::new(&cd).unwrap());
    let fd = solve_r(&alg, &conn(&cd, &[]), &[], 6).unwrap();
    let s = s3(&cd, &[(&[P, P, Q], "t*q")]);
    let eq = equivalence_g(&fd, &s).unwrap();
    let adj = formal_adjoint_on_one(cd.vars(), |a| Ok(eq.g2_closed_form(a).scale(&rat(-24, 1))), 5).unwrap();
    assert_eq!(psi_shift(&cd, &fd.conn, &s), adj);
}

#[test]
fn character_shift_over_a_flat_base() {
    let cd = darboux(None);
    let alg = Arc::new(WeylAlgebra::new(&cd).unwrap());
    let flat = conn(&cd, &[]);
    let s = s3(&cd, &[(&[P, P, Q], "t*q")]);
    let psi = psi_shift(&cd, &flat, &s);
    // the operator adjoint transforms with ξψ of the opposite sign
    let fd0 = solve_r(&alg, &flat, &[], 6).unwrap();
    let fd1 = solve_r(&alg, &build_connection(&cd, &s).unwrap(), &[], 6).unwrap();
    let d = &chi_from_delta(&fd1, 5).unwrap() - &chi_from_delta(&fd0, 5).unwrap();
    assert_eq!(d, -&cd.xi_apply(&psi));
    // the closed-form representative does not satisfy either sign
    let dr = &chi_shifted(&cd, &flat, &s).unwrap() - &chi_character(&cd, &flat, true);
    assert_eq!(dr, poly(&cd, "15*q*p - 9*t"));
    assert_eq!(cd.xi_apply(&psi), poly(&cd, "-24*q*p + 12*t"));
}

#[test]
fn characteristic_integral_examples() {
    let cd = darboux(Some(rat(1, 1)));
    let cc = circle_orbit(&cd, 2, 3);
    assert_eq!(characteristic_integral(&cc, &cd, &poly(&cd, "1")).unwrap(), rat(1, 1));
    assert_eq!(tau_period(&cc, &cd).unwrap(), rat(1, 1));
    assert_eq!(characteristic_integral(&cc, &cd, &poly(&cd, "0")).unwrap(), rat(0, 1));
    assert_eq!(characteristic_integral(&cc, &cd, &poly(&cd, "q^2*p")).unwrap(), rat(12, 1));
    assert!(matches!(
        characteristic_integral(&cc, &cd, &poly(&cd, "t*q")),
        Err(ObstructError::NotPeriodic { .. })
    ));
    let cd5 = darboux(Some(rat(5, 2)));
    assert_eq!(tau_period(&circle_orbit(&cd5, 0, 0), &cd5).unwrap(), rat(5, 2));
}

#[test]
fn xi_gradient_examples() {
    let open = darboux(None);
    assert_eq!(solve_xi_gradient(&open, &poly(&open, "2*t")).unwrap(), Ok(poly(&open, "t^2")));
    assert_eq!(solve_xi_gradient(&open, &poly(&open, "0")).unwrap(), Ok(poly(&open, "0")));
    let circle = darboux(Some(rat(1, 1)));
    assert_eq!(solve_xi_gradient(&circle, &poly(&circle, "3")).unwrap(), Err(poly(&circle, "3")));
    assert_eq!(solve_xi_gradient(&circle, &poly(&circle, "0")).unwrap(), Ok(poly(&circle, "0")));
}

#[test]
fn quantize_without_obstructions() {
    let cd = darboux(None);
    let alg = Arc::new(WeylAlgebra::new(&cd).unwrap());
    let flat = solve_r(&alg, &conn(&cd, &[]), &[], 7).unwrap();
    let a0 = poly(&cd, "q^2*p + p^3");
    assert_eq!(quantize(&flat, &a0, 3, &[]).unwrap().unwrap(), Observable::classical(&a0, 3));
    let curved = solve_r(&alg, &conn(&cd, &[(&[Q, Q, Q], "t")]), &[], 7).unwrap();
    let one = poly(&cd, "1");
    assert_eq!(quantize(&curved, &one, 3, &[]).unwrap().unwrap(), Observable::classical(&one, 3));
    let a = quantize(&curved, &poly(&cd, "p^3"), 3, &[]).unwrap().unwrap();
    assert!(a.coeff(1).is_zero());
    assert_eq!(a.coeff(2), &poly(&cd, "1/4*t"));
    assert!(curved.delta_to_order(&a, 3).unwrap().is_zero());
    assert!(quantize(&curved, &poly(&cd, "t"), 2, &[]).is_err());
}

#[test]
fn unquantizable_observable_on_the_circle() {
    let cd = darboux(Some(rat(2, 1)));
    let alg = Arc::new(WeylAlgebra::new(&cd).unwrap());
    let c = conn(&cd, &[(&[Q, Q, Q], "t")]);
    let fd = solve_r(&alg, &c, &[], 6).unwrap();
    let cc = circle_orbit(&cd, 1, 3);
    let a0 = poly(&cd, "p^3");
    let report = quantize(&fd, &a0, 2, std::slice::from_ref(&cc)).unwrap().unwrap_err();
    assert_eq!(report.order, 2);
    assert_eq!(report.residual, poly(&cd, "-1/4"));
    let psi = psi_gamma(&cc, &cd, &c, &a0).unwrap();
    assert_eq!(psi, rat(-1, 2));
    assert_eq!(report.psi_values, vec![(cc, psi)]);
    assert_eq!(
        report.to_string(),
        "obstruction at order nu^2\nresidual: -1/4\npsi[t@(p=3,q=1)/2]: -1/2\n"
    );
    // quantizable observables on the same circle have vanishing characteristics
    for a in ["q", "p^2", "q*p"] {
        let a0 = poly(&cd, a);
        assert!(quantize(&fd, &a0, 2, &[]).unwrap().is_ok());
        assert_eq!(psi_gamma(&circle_orbit(&cd, 1, 3), &cd, &c, &a0).unwrap(), rat(0, 1));
    }
}

#[test]
fn characteristics_under_a_change_of_connection() {
    let cd = darboux(Some(rat(2, 1)));
    let alg = Arc::new(WeylAlgebra::new(&cd).unwrap());
    let cc = circle_orbit(&cd, 1, 3);
    let base = conn(&cd, &[(&[Q, Q, Q], "t")]);
    let fd = solve_r(&alg, &base, &[], 6).unwrap();
    for add in [(&[P, P, P][..], "1"), (&[Q, P, P][..], "q"), (&[Q, Q, P][..], "p + 1")] {
        let s = s3(&cd, &[add]);
        let shifted = build_connection(&cd, &base.s.add(&s)).unwrap();
        let eq = equivalence_g(&fd, &s).unwrap();
        for a in ["p^3", "q*p", "q^2*p^2"] {
            let a0 = poly(&cd, a);
            // Ψ' − Ψ = −∫λ ξ(G₂a₀), which vanishes whenever G₂a₀ is periodic
            let drift = characteristic_integral(&cc, &cd, &cd.xi_apply(&eq.g2(&a0).unwrap())).unwrap();
            let psi0 = psi_gamma(&cc, &cd, &base, &a0).unwrap();
            let psi1 = psi_gamma(&cc, &cd, &shifted, &a0).unwrap();
            assert_eq!(psi1 - psi0, -drift, "{add:?} {a}");
        }
    }
    // t-independent connections are Reeb-invariant: every characteristic vanishes
    let inv = conn(&cd, &[(&[Q, Q, Q], "p"), (&[Q, P, P], "q^2")]);
    assert_eq!(psi_gamma(&cc, &cd, &inv, &poly(&cd, "p^3 + q")).unwrap(), rat(0, 1));
    assert!(matches!(psi_gamma(&cc, &cd, &base, &poly(&cd, "t")), Err(ObstructError::NotInvariant(_))));
}

#[test]
fn characteristic_is_linear() {
    let cd = darboux(Some(rat(2, 1)));
    let cc = circle_orbit(&cd, 1, 3);
    let c = conn(&cd, &[(&[Q, Q, Q], "t*p")]);
    let (a, b) = (poly(&cd, "p^3"), poly(&cd, "q^2*p^2 + p"));
    let (x, y) = (rat(3, 2), rat(-5, 1));
    let comb = &a.scale(&x) + &b.scale(&y);
    let lhs = psi_gamma(&cc, &cd, &c, &comb).unwrap();
    let rhs = x * psi_gamma(&cc, &cd, &c, &a).unwrap() + y * psi_gamma(&cc, &cd, &c, &b).unwrap();
    assert_eq!(lhs, rhs);
}

