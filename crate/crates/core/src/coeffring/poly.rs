use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::{CoeffError, Rational};

/// Ordered list of coordinate names shared by every polynomial of a chart.
#[derive(Clone)]
pub struct Vars(Arc<[String]>);

impl Vars {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        Vars(names.iter().map(|s| s.as_ref().to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|v| v == name)
    }

    fn describe(&self) -> String {
        self.0.join(",")
    }
}

impl PartialEq for Vars {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Vars {}

impl fmt::Debug for Vars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vars[{}]", self.describe())
    }
}

/// Exponent vector, one entry per chart coordinate.
///
/// Ordered graded-lexicographically: total degree first, then exponents
/// compared coordinate by coordinate in chart order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub SmallVec<[u16; 8]>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(SmallVec::from_elem(0, n))
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exps(&self) -> &[u16] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Vars,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(vars: &Vars) -> Self {
        MultiPoly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn from_int(vars: &Vars, n: i64) -> Self {
        Self::constant(vars, Rational::from_integer(n.into()))
    }

    /// The coordinate function with the given index.
    pub fn coord(vars: &Vars, i: usize) -> Self {
        let mut m = Monomial::one(vars.len());
        m.0[i] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(m, Rational::one());
        p
    }

    pub fn var(vars: &Vars, name: &str) -> Result<Self, CoeffError> {
        let i = vars
            .index_of(name)
            .ok_or_else(|| CoeffError::UnknownCoordinate(name.to_string()))?;
        Ok(Self::coord(vars, i))
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(vars: &Vars, terms: I) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.0.len(), vars.len(), "exponent vector length");
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// Value of a constant polynomial, `None` otherwise.
    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one(self.vars.len()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, i: usize) -> Option<u16> {
        self.terms.keys().map(|m| m.0[i]).max()
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.0[i] > 0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_vars(&self, other: &MultiPoly) -> Result<(), CoeffError> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(CoeffError::VarMismatch {
                left: self.vars.describe(),
                right: other.vars.describe(),
            })
        }
    }

    pub fn try_add(&self, other: &MultiPoly) -> Result<MultiPoly, CoeffError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &MultiPoly) -> Result<MultiPoly, CoeffError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &MultiPoly) -> Result<MultiPoly, CoeffError> {
        self.check_vars(other)?;
        let mut out = MultiPoly::zero(&self.vars);
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Divides by a nonzero constant polynomial; anything else is not a unit.
    pub fn div_by_unit(&self, d: &MultiPoly) -> Result<MultiPoly, CoeffError> {
        match d.constant_value() {
            Some(c) if !c.is_zero() => Ok(self.scale(&c.recip())),
            _ => Err(CoeffError::NonUnitDivision),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(&self.vars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to the coordinate with index `i`.
    pub fn diff(&self, i: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] = e - 1;
            out.add_term(m2, c * Rational::from_integer(e.into()));
        }
        out
    }

    pub fn diff_by(&self, coord: &str) -> Result<MultiPoly, CoeffError> {
        let i = self
            .vars
            .index_of(coord)
            .ok_or_else(|| CoeffError::UnknownCoordinate(coord.to_string()))?;
        Ok(self.diff(i))
    }

    /// Antiderivative in coordinate `i` with zero constant of integration.
    pub fn antiderivative(&self, i: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            m2.0[i] += 1;
            out.add_term(m2, c / Rational::from_integer((m.0[i] + 1).into()));
        }
        out
    }

    /// Replaces coordinate `i` by a rational constant.
    pub fn eval_coord(&self, i: usize, value: &Rational) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            let mut m2 = m.clone();
            m2.0[i] = 0;
            let mut f = c.clone();
            for _ in 0..e {
                f *= value;
            }
            out.add_term(m2, f);
        }
        out
    }

    /// Exact definite integral `∫_lo^hi a d(coord)`; the result is free of `coord`.
    pub fn integrate_segment(
        &self,
        coord: &str,
        lo: &Rational,
        hi: &Rational,
    ) -> Result<MultiPoly, CoeffError> {
        let i = self
            .vars
            .index_of(coord)
            .ok_or_else(|| CoeffError::UnknownCoordinate(coord.to_string()))?;
        let anti = self.antiderivative(i);
        Ok(&anti.eval_coord(i, hi) - &anti.eval_coord(i, lo))
    }

    /// Composition: each listed coordinate is replaced by the given polynomial.
    ///
    /// All assigned polynomials must share one variable list, which becomes
    /// the variable list of the result; unassigned coordinates map to the
    /// same-named coordinate of that list.
    pub fn substitute(&self, assignments: &[(&str, MultiPoly)]) -> Result<MultiPoly, CoeffError> {
        let target = match assignments.first() {
            None => return Ok(self.clone()),
            Some((_, p)) => p.vars.clone(),
        };
        let mut images: Vec<Option<MultiPoly>> = vec![None; self.vars.len()];
        for (name, p) in assignments {
            if p.vars != target {
                return Err(CoeffError::VarMismatch {
                    left: target.describe(),
                    right: p.vars.describe(),
                });
            }
            let i = self
                .vars
                .index_of(name)
                .ok_or_else(|| CoeffError::UnknownCoordinate(name.to_string()))?;
            images[i] = Some(p.clone());
        }
        for (i, img) in images.iter_mut().enumerate() {
            if img.is_none() && self.depends_on(i) {
                let name = self.vars.name(i);
                *img = Some(MultiPoly::var(&target, name)?);
            }
        }
        let mut powers: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|img| match img {
                Some(_) => vec![MultiPoly::one(&target)],
                None => Vec::new(),
            })
            .collect();
        let mut out = MultiPoly::zero(&target);
        for (m, c) in &self.terms {
            let mut term = MultiPoly::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = images[i].as_ref().expect("image present for used coordinate");
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * base;
                    powers[i].push(next);
                }
                term = &term * &powers[i][e as usize];
            }
            out += &term;
        }
        Ok(out)
    }

    /// Same polynomial over another variable list containing all used coordinates.
    pub fn rebase(&self, target: &Vars) -> Result<MultiPoly, CoeffError> {
        let map: Vec<Option<usize>> = (0..self.vars.len())
            .map(|i| target.index_of(self.vars.name(i)))
            .collect();
        let mut out = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut m2 = Monomial::one(target.len());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let j = map[i].ok_or_else(|| CoeffError::UnknownCoordinate(self.vars.name(i).to_string()))?;
                m2.0[j] = e;
            }
            out.add_term(m2, c.clone());
        }
        Ok(out)
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_add(rhs).expect("polynomial variable lists must match")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_sub(rhs).expect("polynomial variable lists must match")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_mul(rhs).expect("polynomial variable lists must match")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl AddAssign<&MultiPoly> for MultiPoly {
    fn add_assign(&mut self, rhs: &MultiPoly) {
        assert!(self.vars == rhs.vars, "polynomial variable lists must match");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&MultiPoly> for MultiPoly {
    fn sub_assign(&mut self, rhs: &MultiPoly) {
        assert!(self.vars == rhs.vars, "polynomial variable lists must match");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

fn fmt_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for MultiPoly {
    /// Terms in descending graded-lex order, e.g. `q^2 - 2*q*p + 1/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.degree() == 0 {
                factors.push(fmt_rational(&abs));
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.vars.name(i).to_string()),
                    _ => factors.push(format!("{}^{}", self.vars.name(i), e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}
