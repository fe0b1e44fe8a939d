use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use smallvec::SmallVec;

use crate::coeffring::{parse_poly, MultiPoly, Rational, Vars};

use super::WeylError;

/// Truncation weight meaning "no truncation".
pub const EXACT: i64 = 1 << 40;

pub(crate) fn clamp_trunc(t: i64) -> i64 {
    if t >= EXACT / 2 {
        EXACT
    } else {
        t
    }
}

pub(crate) fn shift_trunc(t: i64, by: i64) -> i64 {
    if t == EXACT {
        EXACT
    } else {
        clamp_trunc(t + by)
    }
}

/// Multi-index of a Weyl monomial `ν^k y^{i1}⋯y^{iq} dx^{j1}∧⋯∧dx^{jp}`.
///
/// `y` is sorted; `dx` is a bitmask of the strictly increasing form indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Key {
    pub nu: u32,
    pub y: SmallVec<[u8; 8]>,
    pub dx: u32,
}

impl Key {
    pub fn scalar() -> Self {
        Key {
            nu: 0,
            y: SmallVec::new(),
            dx: 0,
        }
    }

    /// Fedosov weight `2k + |y|`.
    pub fn weight(&self) -> i64 {
        2 * self.nu as i64 + self.y.len() as i64
    }

    pub fn y_degree(&self) -> usize {
        self.y.len()
    }

    pub fn form_degree(&self) -> u32 {
        self.dx.count_ones()
    }

    pub fn dx_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |j| self.dx >> j & 1 == 1)
    }

    pub(crate) fn y_counts(&self, n: usize) -> SmallVec<[u8; 8]> {
        let mut c = SmallVec::from_elem(0u8, n);
        for &i in &self.y {
            c[i as usize] += 1;
        }
        c
    }
}

fn dx_cmp(a: u32, b: u32) -> Ordering {
    let ia = (0..32).filter(|j| a >> j & 1 == 1);
    let ib = (0..32).filter(|j| b >> j & 1 == 1);
    ia.cmp(ib)
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then(self.nu.cmp(&other.nu))
            .then_with(|| self.y.cmp(&other.y))
            .then_with(|| dx_cmp(self.dx, other.dx))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sign of `dx^A ∧ dx^B` relative to the sorted product, or `None` if the
/// sets overlap.
pub(crate) fn wedge_sign(a: u32, b: u32) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    for j in 0..32 {
        if b >> j & 1 == 1 {
            inversions += (a >> j >> 1).count_ones();
        }
    }
    Some(inversions % 2 == 1)
}

/// `i_{∂_j} dx^A`: the remaining mask and whether the sign is negative.
pub(crate) fn interior(a: u32, j: usize) -> Option<(u32, bool)> {
    if a >> j & 1 == 0 {
        return None;
    }
    let before = (a & ((1u32 << j) - 1)).count_ones();
    Some((a & !(1 << j), before % 2 == 1))
}

/// Sorts a list of form indices, returning the mask and whether the sorting
/// permutation is odd; `None` on repeated indices.
pub(crate) fn normalize_dx(dx: &[usize]) -> Option<(u32, bool)> {
    let mut mask = 0u32;
    let mut odd = false;
    for &j in dx {
        let (m, s) = wedge_sign(mask, 1 << j).map(|s| (mask | 1 << j, s))?;
        mask = m;
        odd ^= s;
    }
    Some((mask, odd))
}

/// Truncated element of the Weyl algebra bundle with polynomial
/// coefficients. Every term of weight at most `trunc` is exact; heavier
/// terms are unknown and never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct WeylElement {
    vars: Vars,
    terms: BTreeMap<Key, MultiPoly>,
    trunc: i64,
}

impl WeylElement {
    pub fn zero(vars: &Vars, trunc: i64) -> Self {
        WeylElement {
            vars: vars.clone(),
            terms: BTreeMap::new(),
            trunc: clamp_trunc(trunc),
        }
    }

    /// Function `f(x)` as an exact element.
    pub fn from_poly(f: &MultiPoly) -> Self {
        let mut out = Self::zero(f.vars(), EXACT);
        out.add_term(Key::scalar(), f);
        out
    }

    pub fn one(vars: &Vars) -> Self {
        Self::from_poly(&MultiPoly::one(vars))
    }

    /// Exact monomial `coeff · ν^nu · y^{ys} · dx^{dxs}`; index order is
    /// arbitrary, dx indices are sign-normalized.
    pub fn monomial(vars: &Vars, nu: u32, ys: &[usize], dxs: &[usize], coeff: &MultiPoly) -> Self {
        let mut out = Self::zero(vars, EXACT);
        out.add_monomial(nu, ys, dxs, coeff);
        out
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc == EXACT
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &MultiPoly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &Key) -> Option<&MultiPoly> {
        self.terms.get(key)
    }

    /// Coefficient of a monomial given in arbitrary index order, with the
    /// sign of the dx permutation applied.
    pub fn coeff_of(&self, nu: u32, ys: &[usize], dxs: &[usize]) -> MultiPoly {
        let Some((dx, odd)) = normalize_dx(dxs) else {
            return MultiPoly::zero(&self.vars);
        };
        let key = make_key(nu, ys, dx);
        match self.terms.get(&key) {
            Some(c) if odd => -c,
            Some(c) => c.clone(),
            None => MultiPoly::zero(&self.vars),
        }
    }

    /// Lowest stored weight, or the first unknown weight if nothing is stored.
    pub fn low_weight(&self) -> i64 {
        self.terms
            .keys()
            .map(Key::weight)
            .min()
            .unwrap_or(shift_trunc(self.trunc, 1))
    }

    /// Lowest weight among terms with positive y-degree.
    pub fn low_noncentral_weight(&self) -> i64 {
        self.terms
            .keys()
            .filter(|k| !k.y.is_empty())
            .map(Key::weight)
            .min()
            .unwrap_or(shift_trunc(self.trunc, 1))
            .max(1)
    }

    pub fn max_form_degree(&self) -> u32 {
        self.terms.keys().map(Key::form_degree).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, key: Key, c: &MultiPoly) {
        if c.is_zero() || key.weight() > self.trunc {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    pub(crate) fn add_term_signed(&mut self, key: Key, c: &MultiPoly, negative: bool) {
        if negative {
            self.add_term(key, &-c);
        } else {
            self.add_term(key, c);
        }
    }

    pub fn add_monomial(&mut self, nu: u32, ys: &[usize], dxs: &[usize], coeff: &MultiPoly) {
        if let Some((dx, odd)) = normalize_dx(dxs) {
            self.add_term_signed(make_key(nu, ys, dx), coeff, odd);
        }
    }

    /// Lowers the truncation weight, dropping terms above it.
    pub fn truncated(&self, trunc: i64) -> Self {
        let t = clamp_trunc(trunc.min(self.trunc));
        WeylElement {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.weight() <= t)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            trunc: t,
        }
    }

    /// Subset of terms selected by `keep`, same truncation.
    pub fn filter(&self, keep: impl Fn(&Key) -> bool) -> Self {
        WeylElement {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            trunc: self.trunc,
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Key, &MultiPoly) -> MultiPoly) -> Self {
        let mut out = Self::zero(&self.vars, self.trunc);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), &f(k, v));
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map_coeffs(|_, v| v.scale(c))
    }

    /// Product with a function of `x`.
    pub fn mul_poly(&self, f: &MultiPoly) -> Self {
        self.map_coeffs(|_, v| v * f)
    }

    /// Product with `ν^k`.
    pub fn mul_nu(&self, k: u32) -> Self {
        let mut out = Self::zero(&self.vars, shift_trunc(self.trunc, 2 * k as i64));
        for (key, v) in &self.terms {
            let mut nk = key.clone();
            nk.nu += k;
            out.add_term(nk, v);
        }
        out
    }

    /// Terms of y-degree 0 and form degree 0 as a series in ν.
    pub fn scalar_part(&self) -> BTreeMap<u32, MultiPoly> {
        self.terms
            .iter()
            .filter(|(k, _)| k.y.is_empty() && k.dx == 0)
            .map(|(k, v)| (k.nu, v.clone()))
            .collect()
    }

    /// True when both agree on every weight up to the smaller truncation.
    pub fn agrees_with(&self, other: &WeylElement) -> bool {
        let t = self.trunc.min(other.trunc);
        let a = self.terms.iter().filter(|(k, _)| k.weight() <= t);
        let b = other.terms.iter().filter(|(k, _)| k.weight() <= t);
        a.eq(b)
    }

    /// First term on which `self` and `other` differ below the common truncation.
    pub fn first_difference(&self, other: &WeylElement) -> Option<(Key, MultiPoly)> {
        let t = self.trunc.min(other.trunc);
        let d = (self - other).truncated(t);
        d.terms.into_iter().next()
    }

    /// Canonical serialization: one line `nu^k y[..] dx[..] : coeff` per term,
    /// ordered by weight, ν-power, y-index and dx-index; `0` when empty.
    pub fn to_canonical_string(&self) -> String {
        if self.terms.is_empty() {
            return "0\n".into();
        }
        let mut out = String::new();
        for (k, v) in &self.terms {
            let ys: Vec<&str> = k.y.iter().map(|&i| self.vars.name(i as usize)).collect();
            let dxs: Vec<&str> = k.dx_indices().map(|j| self.vars.name(j)).collect();
            out.push_str(&format!("nu^{} y[{}] dx[{}] : {}\n", k.nu, ys.join(","), dxs.join("<"), v));
        }
        out
    }

    /// Inverse of [`to_canonical_string`](Self::to_canonical_string); the
    /// result carries the given truncation.
    pub fn parse_canonical(vars: &Vars, text: &str, trunc: i64) -> Result<Self, WeylError> {
        let mut out = Self::zero(vars, trunc);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line == "0" {
                continue;
            }
            let bad = |msg: &str| WeylError::Parse {
                line: lineno + 1,
                msg: msg.to_string(),
            };
            let (head, coeff) = line.split_once(':').ok_or_else(|| bad("missing `:`"))?;
            let mut parts = head.split_whitespace();
            let nu = parts
                .next()
                .and_then(|s| s.strip_prefix("nu^"))
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| bad("expected `nu^k`"))?;
            let list = |s: Option<&str>, prefix: &str, sep: char| -> Result<Vec<usize>, WeylError> {
                let inner = s
                    .and_then(|s| s.strip_prefix(prefix))
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| bad(&format!("expected `{prefix}..]`")))?;
                inner
                    .split(sep)
                    .filter(|s| !s.is_empty())
                    .map(|name| vars.index_of(name.trim()).ok_or_else(|| bad(&format!("unknown coordinate `{name}`"))))
                    .collect()
            };
            let ys = list(parts.next(), "y[", ',')?;
            let dxs = list(parts.next(), "dx[", '<')?;
            let c = parse_poly(coeff.trim(), vars).map_err(|e| bad(&e.to_string()))?;
            out.add_monomial(nu, &ys, &dxs, &c);
        }
        Ok(out)
    }

    fn combine(&self, other: &WeylElement, negate: bool) -> WeylElement {
        assert!(self.vars == other.vars, "Weyl elements over different charts");
        let mut out = self.truncated(other.trunc);
        for (k, v) in &other.terms {
            out.add_term_signed(k.clone(), v, negate);
        }
        out
    }
}

pub(crate) fn make_key(nu: u32, ys: &[usize], dx: u32) -> Key {
    let mut y: SmallVec<[u8; 8]> = ys.iter().map(|&i| i as u8).collect();
    y.sort_unstable();
    Key { nu, y, dx }
}

impl Add for &WeylElement {
    type Output = WeylElement;
    fn add(self, rhs: &WeylElement) -> WeylElement {
        self.combine(rhs, false)
    }
}

impl Sub for &WeylElement {
    type Output = WeylElement;
    fn sub(self, rhs: &WeylElement) -> WeylElement {
        self.combine(rhs, true)
    }
}

impl Neg for &WeylElement {
    type Output = WeylElement;
    fn neg(self) -> WeylElement {
        self.map_coeffs(|_, v| -v)
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = if self.is_exact() { "exact".to_string() } else { self.trunc.to_string() };
        write!(f, "WeylElement(trunc {t})\n{}", self.to_canonical_string())
    }
}
