#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use contactq::coeffring::{rat, MultiPoly, Monomial, Rational};
use contactq::contact::{
    build_connection, characteristic_curve, validate_contact, Chart, ClosedCharacteristic, ContactConnection,
    ContactData, STensors,
};
use contactq::weyl::{WeylAlgebra, WeylElement};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Darboux chart `λ = dt + Σ p_i dq_i` with `pairs` conjugate pairs.
pub fn darboux(pairs: usize, period: Option<Rational>) -> ContactData {
    let mut names = vec!["t".to_string()];
    let (qs, ps): (Vec<String>, Vec<String>) = if pairs == 1 {
        (vec!["q".into()], vec!["p".into()])
    } else {
        ((1..=pairs).map(|i| format!("q{i}")).collect(), (1..=pairs).map(|i| format!("p{i}")).collect())
    };
    names.extend(qs.iter().cloned());
    names.extend(ps.iter().cloned());
    let mut periods = vec![period];
    periods.resize(names.len(), None);
    let chart = Chart::new(&names, periods).unwrap();
    let mut lambda = vec![MultiPoly::one(chart.vars())];
    lambda.extend(ps.iter().map(|p| chart.poly(p).unwrap()));
    lambda.extend(ps.iter().map(|_| MultiPoly::zero(chart.vars())));
    validate_contact(chart, lambda).unwrap()
}

pub fn darboux3() -> ContactData {
    darboux(1, None)
}

pub fn circle(period: i64) -> ContactData {
    darboux(1, Some(rat(period, 1)))
}

pub fn poly(cd: &ContactData, s: &str) -> MultiPoly {
    cd.chart.poly(s).unwrap()
}

pub fn small_rational(r: &mut TestRng) -> Rational {
    let mut n = r.gen_range(-5i64..=5);
    if n == 0 {
        n = 1;
    }
    rat(n, r.gen_range(1..=3))
}

/// A random polynomial in the coordinates `idx` of total degree at most
/// `max_deg`.
pub fn random_poly(r: &mut TestRng, cd: &ContactData, idx: &[usize], max_deg: u32, max_terms: usize) -> MultiPoly {
    let n = cd.dim();
    let terms = r.gen_range(1..=max_terms);
    let mut out = Vec::new();
    for _ in 0..terms {
        let deg = r.gen_range(0..=max_deg);
        let mut m = Monomial::one(n);
        for _ in 0..deg {
            m.0[*idx.choose(r).unwrap()] += 1;
        }
        out.push((m, small_rational(r)));
    }
    MultiPoly::from_terms(cd.vars(), out)
}

pub fn all_coords(cd: &ContactData) -> Vec<usize> {
    (0..cd.dim()).collect()
}

/// A random element of weight at most `max_weight` and form degree at most
/// `max_form`, with coefficients of degree at most `coeff_deg`.
pub fn random_weyl(r: &mut TestRng, alg: &WeylAlgebra, max_weight: u32, max_form: usize, coeff_deg: u32) -> WeylElement {
    let cd = alg.contact();
    let fiber = alg.fiber_coords();
    let coords = all_coords(cd);
    let mut a = alg.zero(contactq::weyl::EXACT);
    for _ in 0..r.gen_range(1..=4) {
        let w = r.gen_range(0..=max_weight);
        let nu = r.gen_range(0..=w / 2);
        let ys: Vec<usize> = (0..w - 2 * nu).map(|_| *fiber.choose(r).unwrap()).collect();
        let form = r.gen_range(0..=max_form.min(cd.dim()));
        let dxs: Vec<usize> = coords.choose_multiple(r, form).cloned().collect();
        let c = random_poly(r, cd, &coords, coeff_deg, 2);
        a = &a + &WeylElement::monomial(cd.vars(), nu, &ys, &dxs, &c);
    }
    a
}

/// A random curved connection: a few `S_ijk` components on fiber indices.
pub fn random_connection(r: &mut TestRng, cd: &ContactData, coeff_deg: u32) -> ContactConnection {
    let fiber = cd.transverse_coords();
    let coords = all_coords(cd);
    loop {
        let mut comps: BTreeMap<Vec<usize>, MultiPoly> = BTreeMap::new();
        for _ in 0..r.gen_range(1..=2) {
            let mut idx: Vec<usize> = (0..3).map(|_| *fiber.choose(r).unwrap()).collect();
            idx.sort();
            comps.insert(idx, random_poly(r, cd, &coords, coeff_deg, 2));
        }
        let comps: Vec<_> = comps.into_iter().collect();
        let s = STensors::from_components(cd, &[], &comps).unwrap();
        let c = build_connection(cd, &s).unwrap();
        if !c.is_flat() {
            return c;
        }
    }
}

pub fn s3(cd: &ContactData, comps: &[(&[usize], &str)]) -> STensors {
    let c: Vec<_> = comps.iter().map(|(i, s)| (i.to_vec(), poly(cd, s))).collect();
    STensors::from_components(cd, &[], &c).unwrap()
}

pub fn connection(cd: &ContactData, comps: &[(&[usize], &str)]) -> ContactConnection {
    build_connection(cd, &s3(cd, comps)).unwrap()
}

pub fn algebra(cd: &ContactData) -> Arc<WeylAlgebra> {
    Arc::new(WeylAlgebra::new(cd).unwrap())
}

pub fn orbit(cd: &ContactData, point: &[(&str, i64)]) -> ClosedCharacteristic {
    let base: BTreeMap<String, Rational> = point.iter().map(|(k, v)| (k.to_string(), rat(*v, 1))).collect();
    characteristic_curve(cd, &base).unwrap()
}
