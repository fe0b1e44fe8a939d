//! Fedosov connections on the Weyl algebra bundle: the abelian connection
//! `D = -δ + ∇ + ν⁻¹[r, ·]` for a prescribed Weyl curvature, the quantum
//! lift, the operator `Δ = i_ξ P D Q`, the induced `∗`-product and inner
//! automorphisms `exp∘(ν⁻¹H)`.

mod equivalence;
mod gauge;
mod observable;

pub use equivalence::{equivalence_g, h_closed_form, Equivalence};
pub use gauge::{conj_exp, gauge_connection, weyl_curvature, GaugedConnection};
pub use observable::Observable;

use std::sync::Arc;

use thiserror::Error;

use crate::contact::{ContactConnection, ContactError};
use crate::weyl::{WeylAlgebra, WeylElement, WeylError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FedosovError {
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error("Ω_{k} is not a y-free, ν-free two-form: {detail}")]
    BadOmega { k: u32, detail: String },
    #[error("dΩ_{k} ≠ 0: {detail}")]
    NonClosedOmega { k: u32, detail: String },
    #[error("H must be a function-valued element of weight ≥ 3: {0}")]
    BadGenerator(String),
    #[error("requested ν-order {requested} exceeds the exactly resolved order {exact}")]
    Truncation { requested: u32, exact: u32 },
    #[error("equivalence maps need the canonical Weyl curvature Ω = ω")]
    NotCanonical,
    #[error("internal consistency failure: {identity} ({detail})")]
    Invariant { identity: String, detail: String },
}

pub(crate) fn invariant(identity: &str, detail: impl Into<String>) -> FedosovError {
    FedosovError::Invariant {
        identity: identity.into(),
        detail: detail.into(),
    }
}

/// Outcome of one verified identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Weight through which the identity was tested.
    pub exact_through: i64,
    pub detail: String,
}

impl Check {
    fn zero(name: &str, residual: &WeylElement) -> Self {
        let first = residual.terms().next();
        Check {
            name: name.into(),
            passed: first.is_none(),
            exact_through: residual.trunc(),
            detail: first.map(|(k, v)| format!("{k:?}: {v}")).unwrap_or_default(),
        }
    }
}

/// A solved Fedosov connection.
#[derive(Debug, Clone)]
pub struct FedosovData {
    alg: Arc<WeylAlgebra>,
    pub conn: ContactConnection,
    /// `(k, Ω_k)` for the non-leading terms of the Weyl curvature.
    pub omega_corrections: Vec<(u32, WeylElement)>,
    pub r: WeylElement,
    pub trunc: i64,
    pub checks: Vec<Check>,
}

/// Validates `Ω_k` and returns the exact element `Σ ν^k Ω_k`.
fn omega_tail(alg: &WeylAlgebra, omega: &[(u32, WeylElement)]) -> Result<WeylElement, FedosovError> {
    let mut tail = alg.zero(crate::weyl::EXACT);
    for (k, w) in omega {
        if *k == 0 {
            return Err(FedosovError::BadOmega {
                k: 0,
                detail: "corrections start at ν^1".into(),
            });
        }
        alg.check(w)?;
        if let Some((key, _)) = w.terms().find(|(key, _)| !key.y.is_empty() || key.nu != 0 || key.form_degree() != 2) {
            return Err(FedosovError::BadOmega {
                k: *k,
                detail: format!("term {key:?}"),
            });
        }
        let d = alg.exterior_d(w);
        if let Some((key, v)) = d.terms().next() {
            let names: Vec<&str> = key.dx_indices().map(|j| alg.vars().name(j)).collect();
            return Err(FedosovError::NonClosedOmega {
                k: *k,
                detail: format!("coefficient of d{} is {v}", names.join("∧d")),
            });
        }
        tail = &tail + &w.mul_nu(*k);
    }
    Ok(tail)
}

/// Solves `r = δ⁻¹(ω - Ω + R) + δ⁻¹(∇r + ν⁻¹ r∘r)` through weight `n` and
/// verifies the defining properties of the resulting abelian connection.
pub fn solve_r(
    alg: &Arc<WeylAlgebra>,
    conn: &ContactConnection,
    omega: &[(u32, WeylElement)],
    n: i64,
) -> Result<FedosovData, FedosovError> {
    let tail = omega_tail(alg, omega)?;
    if !conn.is_flat() {
        alg.calibrate_curvature(conn)?;
    }
    let curv = alg.curvature_element(conn);
    let source = alg.delta_inv(&(&curv - &tail)).truncated(n);
    let mut r = alg.zero(n);
    let mut converged = false;
    for _ in 0..n.max(0) + 3 {
        let quad = alg.nu_inv_commutator(&r, &r).scale(&crate::coeffring::rat(1, 2));
        let next = (&source + &alg.delta_inv(&(&alg.nabla(conn, &r) + &quad))).truncated(n);
        if next == r {
            converged = true;
            break;
        }
        r = next;
    }
    if !converged {
        return Err(invariant("fixed point of r", "iteration did not stabilize"));
    }
    let mut fd = FedosovData {
        alg: alg.clone(),
        conn: conn.clone(),
        omega_corrections: omega.to_vec(),
        r,
        trunc: n,
        checks: Vec::new(),
    };
    fd.checks = fd.verify();
    if let Some(c) = fd.checks.iter().find(|c| !c.passed) {
        return Err(invariant(&c.name, c.detail.clone()));
    }
    Ok(fd)
}

impl FedosovData {
    pub fn algebra(&self) -> &Arc<WeylAlgebra> {
        &self.alg
    }

    pub fn is_canonical(&self) -> bool {
        self.omega_corrections.iter().all(|(_, w)| w.is_zero())
    }

    /// `Σ ν^k Ω_k`.
    pub fn omega_tail(&self) -> WeylElement {
        omega_tail(&self.alg, &self.omega_corrections).expect("validated at construction")
    }

    /// `Da = -δa + ∇a + ν⁻¹[r, a]`.
    pub fn covariant_d(&self, a: &WeylElement) -> WeylElement {
        let alg = &self.alg;
        let nabla = alg.nabla(&self.conn, a);
        let inner = alg.nu_inv_commutator(&self.r, a);
        &(&nabla - &alg.delta(a)) + &inner
    }

    /// `R - δr + ∇r + ν⁻¹ r∘r - Σ ν^k Ω_k`, which vanishes for the solved `r`.
    pub fn weyl_curvature_residual(&self) -> WeylElement {
        let alg = &self.alg;
        let r = &self.r;
        let quad = alg.nu_inv_commutator(r, r).scale(&crate::coeffring::rat(1, 2));
        let lhs = &(&(&alg.curvature_element(&self.conn) - &alg.delta(r)) + &alg.nabla(&self.conn, r)) + &quad;
        &lhs - &self.omega_tail()
    }

    /// Runs every postcondition of the construction.
    pub fn verify(&self) -> Vec<Check> {
        let alg = &self.alg;
        let mut out = vec![Check::zero("δ⁻¹r = 0", &alg.delta_inv(&self.r))];
        out.push(Check::zero("r|_{y=0} = 0", &self.r.filter(|k| k.y.is_empty())));
        out.push(Check::zero("r ∈ F³", &self.r.filter(|k| k.weight() < 3)));
        out.push(Check::zero("Weyl curvature equation", &self.weyl_curvature_residual()));
        let mut d2 = alg.zero(crate::weyl::EXACT);
        for i in alg.fiber_coords() {
            let y = alg.y(i).expect("fiber coordinate");
            let dd = self.covariant_d(&self.covariant_d(&y));
            d2 = &d2 + &dd;
            if !dd.is_zero() {
                break;
            }
        }
        for j in 0..alg.dim() {
            let x = alg.function(&crate::coeffring::MultiPoly::coord(alg.vars(), j)).truncated(self.trunc);
            let dd = self.covariant_d(&self.covariant_d(&x));
            d2 = &d2 + &dd;
        }
        out.push(Check::zero("D² = 0 on generators", &d2));
        out
    }

    /// The weight-3 terms of `r` in closed form:
    /// `(1/6)R_ijkl yⁱyʲyᵏξˡλ + (1/8)R_ijkl Pᵏ_m Pˡ_n yⁱyʲyᵐdxⁿ
    /// − 2ν(Ω₁)_kl yᵏξˡλ − ν(Ω₁)_ij Pⁱ_k Pʲ_l yᵏdxˡ`, where
    /// `Ω₁ = (Ω₁)_ij dxⁱ∧dxʲ` summed over all `i, j`.
    pub fn leading_terms(&self) -> WeylElement {
        let alg = &self.alg;
        let cd = alg.contact();
        let n = cd.dim();
        let fib = alg.fiber_coords();
        let mut out = alg.zero(crate::weyl::EXACT);
        let sixth = crate::coeffring::rat(1, 6);
        let eighth = crate::coeffring::rat(1, 8);
        for (idx, c) in self.conn.riemann_low.nonzero() {
            let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
            if !fib.contains(&i) || !fib.contains(&j) {
                continue;
            }
            if fib.contains(&k) && !cd.xi[l].is_zero() {
                for (m, lm) in cd.lambda.iter().enumerate() {
                    out.add_monomial(0, &[i, j, k], &[m], &(&(c * &cd.xi[l]) * lm).scale(&sixth));
                }
            }
            for &m in &fib {
                for nn in 0..n {
                    let coef = &(c * cd.proj_at(k, m)) * cd.proj_at(l, nn);
                    out.add_monomial(0, &[i, j, m], &[nn], &coef.scale(&eighth));
                }
            }
        }
        let half = crate::coeffring::rat(1, 2);
        for (k, om) in &self.omega_corrections {
            if *k != 1 {
                continue;
            }
            // (Ω₁)_ij = ½ × coefficient of dxⁱ∧dxʲ (i < j)
            let o = |i: usize, j: usize| match i.cmp(&j) {
                std::cmp::Ordering::Less => om.coeff_of(0, &[], &[i, j]).scale(&half),
                std::cmp::Ordering::Greater => om.coeff_of(0, &[], &[j, i]).scale(&-half.clone()),
                std::cmp::Ordering::Equal => cd.zero(),
            };
            for &a in &fib {
                for l in 0..n {
                    let okl = o(a, l);
                    if !okl.is_zero() && !cd.xi[l].is_zero() {
                        for (m, lm) in cd.lambda.iter().enumerate() {
                            let coef = &(&okl * &cd.xi[l]) * lm;
                            out.add_monomial(1, &[a], &[m], &coef.scale(&crate::coeffring::rat(-2, 1)));
                        }
                    }
                }
                for b in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let oij = o(i, j);
                            if oij.is_zero() {
                                continue;
                            }
                            let coef = &(&oij * cd.proj_at(i, a)) * cd.proj_at(j, b);
                            out.add_monomial(1, &[a], &[b], &-&coef);
                        }
                    }
                }
            }
        }
        out
    }

    /// Compares the weight-3 part of `r` with [`Self::leading_terms`].
    pub fn leading_terms_check(&self) -> Check {
        let got = self.r.filter(|k| k.weight() == 3);
        let diff = (&got - &self.leading_terms()).filter(|k| k.weight() == 3);
        let mut c = Check::zero("weight-3 terms of r", &diff);
        c.exact_through = 3;
        c
    }

    /// Solution of `b = a + δ⁻¹(D + δ)b`.
    pub fn lift_element(&self, a: &WeylElement) -> WeylElement {
        let alg = &self.alg;
        let target = a.trunc().min(self.trunc);
        let a = a.truncated(target);
        let mut b = a.clone();
        for _ in 0..target.max(0) + 3 {
            let step = &alg.nabla(&self.conn, &b) + &alg.nu_inv_commutator(&self.r, &b);
            let next = &a + &alg.delta_inv(&step);
            if next == b {
                return b;
            }
            b = next;
        }
        b
    }

    /// Quantum lift `Q a`.
    pub fn quantum_lift(&self, a: &Observable) -> WeylElement {
        self.lift_element(&a.to_element())
    }

    /// `Δa = i_ξ P D Q a`, known through the order the truncation resolves.
    pub fn delta_operator(&self, a: &Observable) -> Observable {
        let alg = &self.alg;
        let dq = self.covariant_d(&self.quantum_lift(a));
        let e = alg.i_xi(&alg.proj_p(&dq));
        Observable::from_scalar_part(&e, a.order()).unwrap_or_else(|| Observable::new(a.vars(), vec![], 0))
    }

    /// `Δa` through `ν^order`, or an error naming the exactly resolved order.
    pub fn delta_to_order(&self, a: &Observable, order: u32) -> Result<Observable, FedosovError> {
        let d = self.delta_operator(a);
        if d.order() < order || self.delta_exact_order(a) < order {
            return Err(FedosovError::Truncation {
                requested: order,
                exact: d.order().min(self.delta_exact_order(a)),
            });
        }
        Ok(d.with_order(order))
    }

    fn delta_exact_order(&self, a: &Observable) -> u32 {
        let t = (self.trunc - 1).min(2 * a.order() as i64);
        if t < 0 {
            0
        } else {
            (t / 2) as u32
        }
    }

    /// `a ∗ b = P(Qa ∘ Qb)`.
    pub fn star(&self, a: &Observable, b: &Observable) -> Observable {
        let alg = &self.alg;
        let prod = alg.circ(&self.quantum_lift(a), &self.quantum_lift(b));
        let order = a.order().min(b.order());
        Observable::from_scalar_part(&alg.proj_p(&prod), order).unwrap_or_else(|| Observable::new(a.vars(), vec![], 0))
    }
}

#[cfg(test)]
mod tests;
