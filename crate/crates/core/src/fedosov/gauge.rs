use std::sync::Arc;

use super::{FedosovData, FedosovError};
use crate::coeffring::{rat, rat_int};
use crate::contact::ContactConnection;
use crate::weyl::{WeylAlgebra, WeylElement};

fn check_generator(alg: &WeylAlgebra, h: &WeylElement) -> Result<(), FedosovError> {
    alg.check(h)?;
    if let Some((k, _)) = h.terms().find(|(k, _)| k.form_degree() != 0 || k.weight() < 3) {
        return Err(FedosovError::BadGenerator(format!("offending term {k:?}")));
    }
    Ok(())
}

/// `Σ_k (ν⁻¹ ad_H)^k a / k!` through weight `n`, i.e. `U∘a∘U⁻¹` for
/// `U = exp∘(ν⁻¹H)`.
pub fn conj_exp(alg: &WeylAlgebra, h: &WeylElement, a: &WeylElement, n: i64) -> Result<WeylElement, FedosovError> {
    check_generator(alg, h)?;
    Ok(ad_series(alg, h, a, n, |k| rat(1, 1) / factorial(k)))
}

fn factorial(k: u32) -> crate::coeffring::Rational {
    (1..=k as i64).fold(rat_int(1), |acc, j| acc * rat_int(j))
}

/// `Σ_k c(k) (ν⁻¹ ad_H)^k a`, truncated at `n`. Each application raises the
/// weight by at least one, so the sum is finite.
fn ad_series(
    alg: &WeylAlgebra,
    h: &WeylElement,
    a: &WeylElement,
    n: i64,
    c: impl Fn(u32) -> crate::coeffring::Rational,
) -> WeylElement {
    let mut term = a.truncated(n);
    let mut sum = term.scale(&c(0));
    let mut k = 0;
    while !term.is_zero() {
        k += 1;
        term = alg.nu_inv_commutator(h, &term).truncated(n);
        sum = &sum + &term.scale(&c(k));
    }
    sum.truncated(n)
}

/// `R + ∇γ + ν⁻¹ γ∘γ`.
pub fn weyl_curvature(alg: &WeylAlgebra, conn: &ContactConnection, gamma: &WeylElement) -> WeylElement {
    let half = alg.nu_inv_commutator(gamma, gamma).scale(&rat(1, 2));
    &(&alg.curvature_element(conn) + &alg.nabla(conn, gamma)) + &half
}

/// A connection `Da = ∇a + ν⁻¹[γ, a]` on the Weyl bundle.
#[derive(Debug, Clone)]
pub struct GaugedConnection {
    alg: Arc<WeylAlgebra>,
    pub conn: ContactConnection,
    pub gamma: WeylElement,
}

impl GaugedConnection {
    pub fn new(alg: &Arc<WeylAlgebra>, conn: &ContactConnection, gamma: WeylElement) -> Self {
        GaugedConnection {
            alg: alg.clone(),
            conn: conn.clone(),
            gamma,
        }
    }

    /// `γ = ω_ij yⁱ dxʲ + r` for a solved Fedosov connection.
    pub fn from_fedosov(fd: &FedosovData) -> Self {
        let alg = fd.algebra();
        Self::new(alg, &fd.conn, &alg.omega_y_dx() + &fd.r)
    }

    pub fn algebra(&self) -> &Arc<WeylAlgebra> {
        &self.alg
    }

    pub fn apply(&self, a: &WeylElement) -> WeylElement {
        &self.alg.nabla(&self.conn, a) + &self.alg.nu_inv_commutator(&self.gamma, a)
    }

    pub fn weyl_curvature(&self) -> WeylElement {
        weyl_curvature(&self.alg, &self.conn, &self.gamma)
    }

    /// `D^U a = Da - [DU∘U⁻¹, a]` for `U = exp∘(ν⁻¹H)`, realized as
    /// `γ^U = γ - Σ_k (ν⁻¹ ad_H)^k (DH) / (k+1)!` through weight `n`.
    pub fn gauge(&self, h: &WeylElement, n: i64) -> Result<GaugedConnection, FedosovError> {
        check_generator(&self.alg, h)?;
        let dh = self.apply(h);
        let theta = ad_series(&self.alg, h, &dh, n, |k| rat(1, 1) / factorial(k + 1));
        Ok(GaugedConnection {
            alg: self.alg.clone(),
            conn: self.conn.clone(),
            gamma: (&self.gamma - &theta).truncated(n),
        })
    }
}

/// The gauge transform of a Fedosov connection by `exp∘(ν⁻¹H)`.
pub fn gauge_connection(fd: &FedosovData, h: &WeylElement) -> Result<GaugedConnection, FedosovError> {
    GaugedConnection::from_fedosov(fd).gauge(h, fd.trunc)
}
