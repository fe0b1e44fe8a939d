mod common;

use common::*;
use contactq::coeffring::rat;
use contactq::fedosov::{solve_r, FedosovError, Observable};
use contactq::obstruct::{chi_period, describe, psi_gamma, quantize, tau_period, ObstructError};

#[test]
fn flat_circle_has_no_obstructions() {
    let cd = circle(1);
    let fd = solve_r(&algebra(&cd), &connection(&cd, &[]), &[], 7).unwrap();
    let cc = orbit(&cd, &[]);
    assert_eq!(tau_period(&cc, &cd).unwrap(), rat(1, 1));
    assert_eq!(chi_period(&cc, &cd, &fd.conn).unwrap(), rat(0, 1));
    for a in ["q*p", "p^3 + q^2", "q^4*p"] {
        let a0 = poly(&cd, a);
        let got = quantize(&fd, &a0, 3, std::slice::from_ref(&cc)).unwrap().unwrap();
        assert_eq!(got, Observable::classical(&a0, 3), "{a}");
    }
}

#[test]
fn obstruction_on_a_curved_circle() {
    let cd = circle(1);
    let conn = connection(&cd, &[(&[1, 1, 1], "t")]);
    let fd = solve_r(&algebra(&cd), &conn, &[], 6).unwrap();
    let cc = orbit(&cd, &[("q", 1), ("p", 3)]);
    let a0 = poly(&cd, "p^3");
    let rep = quantize(&fd, &a0, 2, std::slice::from_ref(&cc)).unwrap().unwrap_err();
    assert_eq!(rep.order, 2);
    assert_eq!(rep.residual, poly(&cd, "-1/4"));
    assert_eq!(rep.psi_values, vec![(cc.clone(), rat(-1, 4))]);
    assert_eq!(psi_gamma(&cc, &cd, &conn, &a0).unwrap(), rat(-1, 4));
    assert_eq!(describe(&cc), "t@(p=3,q=1)/1");
    // the same observable quantizes on the open chart
    let open = darboux3();
    let fd = solve_r(&algebra(&open), &connection(&open, &[(&[1, 1, 1], "t")]), &[], 6).unwrap();
    let a = quantize(&fd, &poly(&open, "p^3"), 2, &[]).unwrap().unwrap();
    assert_eq!(a.coeff(2), &poly(&open, "1/4*t"));
}

#[test]
fn rejections() {
    let cd = darboux3();
    let fd = solve_r(&algebra(&cd), &connection(&cd, &[]), &[], 4).unwrap();
    let a = Observable::classical(&poly(&cd, "q"), 2);
    assert!(matches!(fd.delta_to_order(&a, 2), Err(FedosovError::Truncation { requested: 2, exact: 1 })));
    assert!(matches!(quantize(&fd, &poly(&cd, "t*q"), 1, &[]), Err(ObstructError::NotInvariant(_))));
}

#[test]
fn five_dimensional_quantization() {
    let cd = darboux(2, None);
    let conn = connection(&cd, &[(&[1, 1, 2], "p2")]);
    let fd = solve_r(&algebra(&cd), &conn, &[], 5).unwrap();
    assert!(fd.leading_terms_check().passed);
    let q1 = Observable::classical(&poly(&cd, "q1"), 2);
    let p1 = Observable::classical(&poly(&cd, "p1"), 2);
    let c = fd.star(&q1, &p1).sub(&fd.star(&p1, &q1));
    assert_eq!(c, Observable::new(cd.vars(), vec![cd.zero(), poly(&cd, "1")], 2));
}
