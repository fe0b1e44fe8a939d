use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use smallvec::SmallVec;

use super::element::{interior, make_key, shift_trunc, wedge_sign, Key, WeylElement, EXACT};
use super::WeylError;
use crate::coeffring::{rat, rat_int, MultiPoly, Rational, Vars};
use crate::contact::{ContactConnection, ContactData};

/// One monomial `c(x) u^μ v^κ` of `(π^ij u_i v_j)^n / n!`.
struct Contraction {
    left: SmallVec<[u8; 8]>,
    right: SmallVec<[u8; 8]>,
    coeff: MultiPoly,
}

/// Which Moyal orders to keep, and how to weight them.
#[derive(Clone, Copy)]
enum MoyalMode {
    /// `a ∘ b`.
    Product,
    /// `ν^{-1}[a, b]`: twice the odd orders, one ν fewer.
    NuInvCommutator,
}

/// The Weyl algebra bundle over an adapted chart, in which the Reeb field is
/// a coordinate field `∂/∂x^c`. Fiber variables are the `y^i` with `i ≠ c`;
/// this realizes ξ-transversality of the symmetric slots.
pub struct WeylAlgebra {
    cd: ContactData,
    reeb: usize,
    contractions: Mutex<Vec<Arc<Vec<Contraction>>>>,
}

impl std::fmt::Debug for WeylAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeylAlgebra").field("coords", self.cd.vars()).finish()
    }
}

impl WeylAlgebra {
    pub fn new(cd: &ContactData) -> Result<Self, WeylError> {
        let reeb = cd.reeb_coord.ok_or(WeylError::NotAdapted)?;
        if cd.dim() > 32 {
            return Err(WeylError::TooManyCoordinates(cd.dim()));
        }
        Ok(WeylAlgebra {
            cd: cd.clone(),
            reeb,
            contractions: Mutex::new(Vec::new()),
        })
    }

    pub fn contact(&self) -> &ContactData {
        &self.cd
    }

    pub fn vars(&self) -> &Vars {
        self.cd.vars()
    }

    pub fn dim(&self) -> usize {
        self.cd.dim()
    }

    pub fn reeb(&self) -> usize {
        self.reeb
    }

    pub fn fiber_coords(&self) -> Vec<usize> {
        self.cd.transverse_coords()
    }

    /// Checks chart and ξ-transversality of `a`.
    pub fn check(&self, a: &WeylElement) -> Result<(), WeylError> {
        if a.vars() != self.vars() {
            return Err(WeylError::ChartMismatch);
        }
        if let Some((k, _)) = a.terms().find(|(k, _)| k.y.contains(&(self.reeb as u8))) {
            return Err(WeylError::NotTransverse(format!("{k:?}")));
        }
        Ok(())
    }

    pub fn one(&self) -> WeylElement {
        WeylElement::one(self.vars())
    }

    pub fn zero(&self, trunc: i64) -> WeylElement {
        WeylElement::zero(self.vars(), trunc)
    }

    pub fn function(&self, f: &MultiPoly) -> WeylElement {
        WeylElement::from_poly(f)
    }

    /// Fiber generator `y^i`; fails for the Reeb index.
    pub fn y(&self, i: usize) -> Result<WeylElement, WeylError> {
        if i == self.reeb || i >= self.dim() {
            return Err(WeylError::NotTransverse(format!("y^{i}")));
        }
        Ok(WeylElement::monomial(self.vars(), 0, &[i], &[], &MultiPoly::one(self.vars())))
    }

    pub fn dx(&self, i: usize) -> WeylElement {
        WeylElement::monomial(self.vars(), 0, &[], &[i], &MultiPoly::one(self.vars()))
    }

    /// The contact form `λ = λ_i dx^i`.
    pub fn lambda_form(&self) -> WeylElement {
        let mut out = self.zero(EXACT);
        for (i, l) in self.cd.lambda.iter().enumerate() {
            out.add_monomial(0, &[], &[i], l);
        }
        out
    }

    /// `ω = ½ ω_ij dx^i ∧ dx^j`.
    pub fn omega_form(&self) -> WeylElement {
        let mut out = self.zero(EXACT);
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                out.add_monomial(0, &[], &[i, j], self.cd.omega.get(&[i, j]));
            }
        }
        out
    }

    /// `ω_ij y^i dx^j`, the element generating `δ`.
    pub fn omega_y_dx(&self) -> WeylElement {
        let mut out = self.zero(EXACT);
        for i in self.fiber_coords() {
            for j in 0..self.dim() {
                out.add_monomial(0, &[i], &[j], self.cd.omega.get(&[i, j]));
            }
        }
        out
    }

    /// `R = ¼ R_ijkl y^i y^j dx^k ∧ dx^l`.
    pub fn curvature_element(&self, conn: &ContactConnection) -> WeylElement {
        let mut out = self.zero(EXACT);
        let quarter = rat(1, 4);
        for idx in conn.riemann_low.indices() {
            let c = conn.riemann_low.get(&idx);
            if c.is_zero() || idx[0] == self.reeb || idx[1] == self.reeb {
                continue;
            }
            out.add_monomial(0, &idx[..2], &idx[2..], &c.scale(&quarter));
        }
        out
    }

    fn contractions(&self, order: usize) -> Arc<Vec<Contraction>> {
        let mut cache = self.contractions.lock().expect("contraction cache poisoned");
        if cache.is_empty() {
            let n = self.dim();
            cache.push(Arc::new(vec![Contraction {
                left: SmallVec::from_elem(0, n),
                right: SmallVec::from_elem(0, n),
                coeff: MultiPoly::one(self.vars()),
            }]));
        }
        while cache.len() <= order {
            let prev = cache.last().unwrap().clone();
            let k = cache.len() as i64;
            let inv_k = rat(1, k);
            let fiber = self.fiber_coords();
            let mut acc: BTreeMap<(SmallVec<[u8; 8]>, SmallVec<[u8; 8]>), MultiPoly> = BTreeMap::new();
            for c in prev.iter() {
                for &i in &fiber {
                    for &j in &fiber {
                        let p = self.cd.pi.get(&[i, j]);
                        if p.is_zero() {
                            continue;
                        }
                        let mut l = c.left.clone();
                        let mut r = c.right.clone();
                        l[i] += 1;
                        r[j] += 1;
                        let v = (&c.coeff * p).scale(&inv_k);
                        let e = acc.entry((l, r)).or_insert_with(|| MultiPoly::zero(self.vars()));
                        *e += &v;
                    }
                }
            }
            let next = acc
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|((left, right), coeff)| Contraction { left, right, coeff })
                .collect();
            cache.push(Arc::new(next));
        }
        cache[order].clone()
    }

    fn moyal(&self, a: &WeylElement, b: &WeylElement, mode: MoyalMode) -> WeylElement {
        assert!(a.vars() == self.vars() && b.vars() == self.vars(), "Weyl element over a different chart");
        let trunc = match mode {
            MoyalMode::Product => (shift_trunc(a.trunc(), b.low_weight())).min(shift_trunc(b.trunc(), a.low_weight())),
            MoyalMode::NuInvCommutator => shift_trunc(
                shift_trunc(a.trunc(), b.low_noncentral_weight()).min(shift_trunc(b.trunc(), a.low_noncentral_weight())),
                -2,
            ),
        };
        let n = self.dim();
        let mut out = WeylElement::zero(self.vars(), trunc);
        let shift = match mode {
            MoyalMode::Product => 0,
            MoyalMode::NuInvCommutator => 2,
        };
        let b_terms: Vec<(&Key, SmallVec<[u8; 8]>, &MultiPoly)> =
            b.terms().map(|(k, v)| (k, k.y_counts(n), v)).collect();
        let mut max_order = 0;
        for (ka, _) in a.terms() {
            max_order = max_order.max(ka.y.len());
        }
        let mut tables = Vec::with_capacity(max_order + 1);
        for order in 0..=max_order {
            tables.push(self.contractions(order));
        }
        for (ka, va) in a.terms() {
            let ca = ka.y_counts(n);
            for (kb, cb, vb) in &b_terms {
                if ka.weight() + kb.weight() - shift > trunc {
                    continue;
                }
                let Some(neg) = wedge_sign(ka.dx, kb.dx) else { continue };
                let top = ka.y.len().min(kb.y.len());
                let start = match mode {
                    MoyalMode::Product => 0,
                    MoyalMode::NuInvCommutator => 1,
                };
                let ab = va * *vb;
                for order in (start..=top).step_by(if shift == 2 { 2 } else { 1 }) {
                    // (ν/2)^n for products; 2·(ν/2)^n/ν for ν^{-1}[ , ]
                    let scalar = match mode {
                        MoyalMode::Product => rat(1, 1i64 << order),
                        MoyalMode::NuInvCommutator => rat(2, 1i64 << order),
                    };
                    let nu = ka.nu + kb.nu + order as u32 - (shift / 2) as u32;
                    for c in tables[order].iter() {
                        let Some(fa) = falling(&ca, &c.left) else { continue };
                        let Some(fb) = falling(cb, &c.right) else { continue };
                        let mut y: SmallVec<[u8; 8]> = SmallVec::new();
                        for i in 0..n {
                            for _ in 0..(ca[i] - c.left[i] + cb[i] - c.right[i]) {
                                y.push(i as u8);
                            }
                        }
                        let key = Key { nu, y, dx: ka.dx | kb.dx };
                        let factor = &scalar * Rational::from_integer((fa * fb).into());
                        let coeff = (&ab * &c.coeff).scale(&factor);
                        out.add_term_signed(key, &coeff, neg);
                    }
                }
            }
        }
        out
    }

    /// Fiberwise Weyl–Moyal product.
    pub fn circ(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        self.moyal(a, b, MoyalMode::Product)
    }

    /// Graded commutator `a∘b - (-1)^{p₁p₂} b∘a`.
    pub fn commutator(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        self.moyal(a, b, MoyalMode::NuInvCommutator).mul_nu(1)
    }

    /// `ν^{-1}[a, b]`, computed without negative powers of ν.
    pub fn nu_inv_commutator(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        self.moyal(a, b, MoyalMode::NuInvCommutator)
    }

    /// `δa = dx^i ∧ ∂a/∂y^i`.
    pub fn delta(&self, a: &WeylElement) -> WeylElement {
        let mut out = WeylElement::zero(self.vars(), shift_trunc(a.trunc(), -1));
        for (k, v) in a.terms() {
            for pos in 0..k.y.len() {
                if pos > 0 && k.y[pos] == k.y[pos - 1] {
                    continue;
                }
                let i = k.y[pos] as usize;
                let mult = k.y.iter().filter(|&&j| j as usize == i).count() as i64;
                let Some(neg) = wedge_sign(1 << i, k.dx) else { continue };
                let mut y = k.y.clone();
                y.remove(pos);
                let key = Key { nu: k.nu, y, dx: k.dx | 1 << i };
                out.add_term_signed(key, &v.scale(&rat_int(mult)), neg);
            }
        }
        out
    }

    /// `δ*a = y^i P^j_i i_{∂_j} a`.
    pub fn delta_star(&self, a: &WeylElement) -> WeylElement {
        let mut out = WeylElement::zero(self.vars(), shift_trunc(a.trunc(), 1));
        let fiber = self.fiber_coords();
        for (k, v) in a.terms() {
            for j in k.dx_indices() {
                let (dx, neg) = interior(k.dx, j).unwrap();
                for &i in &fiber {
                    let p = self.cd.proj.get(&[j, i]);
                    if p.is_zero() {
                        continue;
                    }
                    let mut ys: Vec<usize> = k.y.iter().map(|&x| x as usize).collect();
                    ys.push(i);
                    out.add_term_signed(make_key(k.nu, &ys, dx), &(v * p), neg);
                }
            }
        }
        out
    }

    /// Interior product with the Reeb field.
    pub fn i_xi(&self, a: &WeylElement) -> WeylElement {
        let mut out = WeylElement::zero(self.vars(), a.trunc());
        for (k, v) in a.terms() {
            for j in k.dx_indices() {
                let x = &self.cd.xi[j];
                if x.is_zero() {
                    continue;
                }
                let (dx, neg) = interior(k.dx, j).unwrap();
                out.add_term_signed(Key { nu: k.nu, y: k.y.clone(), dx }, &(v * x), neg);
            }
        }
        out
    }

    /// `λ ∧ a`.
    pub fn lambda_wedge(&self, a: &WeylElement) -> WeylElement {
        let mut out = WeylElement::zero(self.vars(), a.trunc());
        for (k, v) in a.terms() {
            for (i, l) in self.cd.lambda.iter().enumerate() {
                if l.is_zero() {
                    continue;
                }
                let Some(neg) = wedge_sign(1 << i, k.dx) else { continue };
                out.add_term_signed(Key { nu: k.nu, y: k.y.clone(), dx: k.dx | 1 << i }, &(v * l), neg);
            }
        }
        out
    }

    /// `a = a^ξ + a^λ` with `a^λ = λ ∧ i_ξ a`.
    pub fn xi_lambda_split(&self, a: &WeylElement) -> (WeylElement, WeylElement) {
        let al = self.lambda_wedge(&self.i_xi(a));
        (a - &al, al)
    }

    /// The contracting homotopy of `δ`.
    pub fn delta_inv(&self, a: &WeylElement) -> WeylElement {
        let (ax, al) = self.xi_lambda_split(a);
        let sx = self.delta_star(&ax);
        let sl = self.delta_star(&al);
        // δ* raised each (q, p) to (q+1, p-1); divide by the source q+p
        let mut out = WeylElement::zero(self.vars(), shift_trunc(a.trunc(), 1));
        for (k, v) in sx.terms() {
            let qp = (k.y.len() - 1) as i64 + k.form_degree() as i64 + 1;
            out.add_term(k.clone(), &v.scale(&rat(1, qp)));
        }
        for (k, v) in sl.terms() {
            let qp = (k.y.len() - 1) as i64 + k.form_degree() as i64 + 1;
            if qp > 1 {
                out.add_term(k.clone(), &v.scale(&rat(1, qp - 1)));
            }
        }
        out
    }

    /// `Pa = a|_{y=0,dx=0} + λ (i_ξ a)|_{y=0,dx=0}`.
    pub fn proj_p(&self, a: &WeylElement) -> WeylElement {
        let base = a.filter(|k| k.y.is_empty() && k.dx == 0);
        let ia = self.i_xi(&a.filter(|k| k.y.is_empty() && k.form_degree() == 1));
        &base + &self.lambda_wedge(&ia)
    }

    /// Exterior derivative acting on the coefficients, `dx^i ∧ ∂_i a`.
    pub fn exterior_d(&self, a: &WeylElement) -> WeylElement {
        let mut out = WeylElement::zero(self.vars(), a.trunc());
        for (k, v) in a.terms() {
            for i in 0..self.dim() {
                let Some(neg) = wedge_sign(1 << i, k.dx) else { continue };
                out.add_term_signed(Key { nu: k.nu, y: k.y.clone(), dx: k.dx | 1 << i }, &v.diff(i), neg);
            }
        }
        out
    }

    /// Lift of a contact connection: `dx^i ∧ (∂_i a + y^j Γ^k_ij ∂a/∂y^k)`.
    pub fn nabla(&self, conn: &ContactConnection, a: &WeylElement) -> WeylElement {
        let n = self.dim();
        let mut out = WeylElement::zero(self.vars(), a.trunc());
        for (k, v) in a.terms() {
            for i in 0..n {
                let Some(neg) = wedge_sign(1 << i, k.dx) else { continue };
                let dx = k.dx | 1 << i;
                let dv = v.diff(i);
                if !dv.is_zero() {
                    out.add_term_signed(Key { nu: k.nu, y: k.y.clone(), dx }, &dv, neg);
                }
                for pos in 0..k.y.len() {
                    if pos > 0 && k.y[pos] == k.y[pos - 1] {
                        continue;
                    }
                    let kk = k.y[pos] as usize;
                    let mult = k.y.iter().filter(|&&j| j as usize == kk).count() as i64;
                    for j in 0..n {
                        let g = conn.christoffel(kk, i, j);
                        if g.is_zero() {
                            continue;
                        }
                        let mut ys: Vec<usize> = k.y.iter().map(|&x| x as usize).collect();
                        ys[pos] = j;
                        out.add_term_signed(make_key(k.nu, &ys, dx), &(v * g).scale(&rat_int(mult)), neg);
                    }
                }
            }
        }
        out
    }

    /// Checks `∇²y^i = ν^{-1}[R, y^i]` on every fiber generator; this fixes
    /// the sign convention relating the curvature tensor to the lift.
    pub fn calibrate_curvature(&self, conn: &ContactConnection) -> Result<(), WeylError> {
        let r = self.curvature_element(conn);
        for i in self.fiber_coords() {
            let y = self.y(i)?;
            let lhs = self.nabla(conn, &self.nabla(conn, &y));
            let rhs = self.nu_inv_commutator(&r, &y);
            if let Some((k, v)) = lhs.first_difference(&rhs) {
                return Err(WeylError::Invariant {
                    identity: "∇²a = ν^{-1}[R, a]".into(),
                    detail: format!("generator y^{}: term {k:?} differs by {v}", self.vars().name(i)),
                });
            }
        }
        Ok(())
    }
}

/// `μ ≤ α` componentwise, returning `Π α_i!/(α_i-μ_i)!`.
fn falling(alpha: &[u8], mu: &[u8]) -> Option<i64> {
    let mut f = 1i64;
    for (&a, &m) in alpha.iter().zip(mu) {
        if m > a {
            return None;
        }
        for t in 0..m {
            f *= (a - t) as i64;
        }
    }
    Some(f)
}
