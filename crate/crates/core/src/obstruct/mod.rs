//! Obstructions to quantizing classical observables: the closed form of Δ₂,
//! the character χ and its gauge behavior, integrals over closed Reeb
//! orbits, and the order-by-order solver for the correction chain.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::coeffring::{rat, Monomial, MultiPoly, Rational, Vars};
use crate::contact::calculus::{curvature_gradient, derivatives, pair, project_first, r_xi, raise};
use crate::contact::{build_connection, ClosedCharacteristic, ContactConnection, ContactData, ContactError, STensors};
use crate::fedosov::{solve_r, FedosovData, FedosovError, Observable};
use crate::weyl::WeylAlgebra;
use crate::tensor::{Slot, Tensor};

pub use crate::contact::characteristic_curve;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObstructError {
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Fedosov(#[from] FedosovError),
    #[error("observable is not ξ-invariant: ξa = {0}")]
    NotInvariant(String),
    #[error("integrand depends on the periodic coordinate `{coord}`: {poly}")]
    NotPeriodic { coord: String, poly: String },
    #[error("Reeb field is not a coordinate vector field in this chart")]
    NoReebCoordinate,
    #[error("operator has order ≥ {0}; raise the probing degree")]
    OperatorOrder(u16),
}

/// The first order at which the correction chain has no polynomial
/// solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionReport {
    pub order: u32,
    /// The order-`order` coefficient of Δ applied to the partial solution;
    /// solving requires it to be a ξ-gradient.
    pub residual: MultiPoly,
    /// `∫_γ λ · residual` for each closed characteristic supplied.
    pub psi_values: Vec<(ClosedCharacteristic, Rational)>,
}

impl fmt::Display for ObstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "obstruction at order nu^{}", self.order)?;
        writeln!(f, "residual: {}", self.residual)?;
        for (cc, v) in &self.psi_values {
            writeln!(f, "psi[{}]: {v}", describe(cc))?;
        }
        Ok(())
    }
}

/// `reeb_coord@(x=.., y=..)/T`, used as the key of a characteristic in
/// reports.
pub fn describe(cc: &ClosedCharacteristic) -> String {
    let pts: Vec<String> = cc.base_point.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}@({})/{}", cc.reeb_coord, pts.join(","), cc.period)
}

fn require_invariant(cd: &ContactData, a0: &MultiPoly) -> Result<(), ObstructError> {
    let x = cd.xi_apply(a0);
    if x.is_zero() {
        Ok(())
    } else {
        Err(ObstructError::NotInvariant(x.to_string()))
    }
}

/// `(1/24) R_ξ^{ijk} (∇̃_i∇̃_j∇̃_k + ½ R_ijkl π^{ln} ∇_n) a₀`.
pub fn delta2_closed_form(cd: &ContactData, conn: &ContactConnection, a0: &MultiPoly) -> Result<MultiPoly, ObstructError> {
    require_invariant(cd, a0)?;
    Ok(delta2_formula(cd, conn, a0, &rat(1, 2)))
}

/// `(1/24) R_ξ^{ijk} (∇̃_i∇̃_j∇̃_k − R_ijkl π^{ln} ∇_n) a₀`, the coefficient of
/// the curvature term that reproduces the ν²-coefficient of `i_ξ P D Q`.
pub fn delta2_adjusted_form(cd: &ContactData, conn: &ContactConnection, a0: &MultiPoly) -> Result<MultiPoly, ObstructError> {
    require_invariant(cd, a0)?;
    Ok(delta2_formula(cd, conn, a0, &rat(-1, 1)))
}

/// `(1/24) R_ξ^{ijk} (∇̃_i∇̃_j∇̃_k + c R_ijkl π^{ln} ∇_n) a` on any function.
pub(crate) fn delta2_formula(cd: &ContactData, conn: &ContactConnection, a: &MultiPoly, c: &Rational) -> MultiPoly {
    if conn.is_flat() {
        return cd.zero();
    }
    let d = derivatives(cd, conn, a, 3, true);
    let op = d[2].add(&curvature_gradient(cd, conn, a).scale(c));
    pair(&r_xi(cd, conn), &op).scale(&rat(1, 24))
}

/// The ν²-coefficient of `i_ξ P D Q a₀` for the canonical quantization
/// built on `conn`.
pub fn delta2_compositional(cd: &ContactData, conn: &ContactConnection, a0: &MultiPoly) -> Result<MultiPoly, ObstructError> {
    require_invariant(cd, a0)?;
    if conn.is_flat() {
        return Ok(cd.zero());
    }
    let alg = Arc::new(WeylAlgebra::new(cd).map_err(FedosovError::from)?);
    let fd = solve_r(&alg, conn, &[], 5)?;
    Ok(fd.delta_to_order(&Observable::classical(a0, 2), 2)?.coeff(2).clone())
}

/// `∇̃_i ∇̃_j … T^{ij…}` for a fully contravariant `T`: divergences taken
/// one slot at a time from the last, projecting each derivative index when
/// `tilde` is set.
fn nested_divergence(cd: &ContactData, conn: &ContactConnection, t: &Tensor, tilde: bool) -> MultiPoly {
    let mut cur = t.clone();
    while cur.rank() > 0 {
        let r = cur.rank();
        let mut d = conn.covariant_derivative(&cur, &vec![Slot::Up; r]);
        if tilde {
            d = project_first(cd, &d);
        }
        // contract the derivative slot with the last contravariant slot
        cur = trace(&d, 0, r);
    }
    cur.get(&[]).clone()
}

/// Contraction of two slots of one tensor.
fn trace(t: &Tensor, a: usize, b: usize) -> Tensor {
    let keep: Vec<usize> = (0..t.rank()).filter(|&s| s != a && s != b).collect();
    let mut out = Tensor::zeros(t.vars(), t.dim(), keep.len());
    let mut target = vec![0; keep.len()];
    for (idx, p) in t.nonzero() {
        if idx[a] != idx[b] {
            continue;
        }
        for (k, &s) in keep.iter().enumerate() {
            target[k] = idx[s];
        }
        out.add_to(&target, p);
    }
    out
}

/// `∇_n V^n`.
fn divergence(conn: &ContactConnection, v: &Tensor) -> MultiPoly {
    let d = conn.covariant_derivative(v, &[Slot::Up]);
    trace(&d, 0, 1).get(&[]).clone()
}

/// `T^{ijk} R_ijkl π^{ln}` for contravariant `T`.
fn curvature_vector(cd: &ContactData, conn: &ContactConnection, t: &Tensor) -> Tensor {
    let tr = t.contract(&conn.riemann_low, &[(0, 0), (1, 1), (2, 2)]);
    tr.contract(&cd.pi, &[(0, 0)])
}

/// `χ = ∇̃_i∇̃_j∇̃_k R_ξ^{ijk} + ½∇_n(R_ξ^{ijk} R_ijkl π^{ln})`; with
/// `tilde = false` the first term uses plain covariant derivatives.
pub fn chi_character(cd: &ContactData, conn: &ContactConnection, tilde: bool) -> MultiPoly {
    if conn.is_flat() {
        return cd.zero();
    }
    let rx = r_xi(cd, conn);
    let first = nested_divergence(cd, conn, &rx, tilde);
    let second = divergence(conn, &curvature_vector(cd, conn, &rx));
    &first + &second.scale(&rat(1, 2))
}

/// The function ψ with `χ' = χ + ξψ` under `∇ → ∇ + S`:
/// `∇̃_i∇̃_j∇̃_k S^{ijk} − (3/2)∇̃_k∇̃_l(S^{ijk}S_ij^l) + ½∇_n(S^{ijk}R_ijkl π^{ln})
/// − ¼∇_n(S^{ijk}π^{nl}∇_l S_ijk)`, all derivatives and `R` those of `∇`.
pub fn psi_shift(cd: &ContactData, conn: &ContactConnection, s: &STensors) -> MultiPoly {
    if s.s3.is_zero() {
        return cd.zero();
    }
    let s_up = raise(cd, &s.s3, &[0, 1, 2]);
    let first = nested_divergence(cd, conn, &s_up, true);
    // S^{ijk} S_ij^l = S^{ijk} S_ijm π^{ml}
    let ss = s_up.contract(&raise(cd, &s.s3, &[2]), &[(0, 0), (1, 1)]);
    let second = nested_divergence(cd, conn, &ss, true);
    let third = divergence(conn, &curvature_vector(cd, conn, &s_up));
    // ∇_l S_ijk stored at [l, i, j, k]
    let ds = conn.covariant_derivative(&s.s3, &[Slot::Down; 3]);
    let sds = s_up.contract(&ds, &[(0, 1), (1, 2), (2, 3)]);
    let fourth = divergence(conn, &cd.pi.contract(&sds, &[(1, 0)]));
    let mut out = first;
    out -= &second.scale(&rat(3, 2));
    out += &third.scale(&rat(1, 2));
    out -= &fourth.scale(&rat(1, 4));
    out
}

/// `L*1 = Σ_α (−1)^{|α|} ∂^α c_α` for the differential operator
/// `L = Σ_α c_α ∂^α` with polynomial coefficients, the `c_α` recovered from
/// `L` applied to the monomials of degree ≤ `max_degree`. Fails when `L` has
/// order `max_degree` or more.
pub fn formal_adjoint_on_one(
    vars: &Vars,
    l: impl Fn(&MultiPoly) -> Result<MultiPoly, ObstructError>,
    max_degree: u16,
) -> Result<MultiPoly, ObstructError> {
    let n = vars.len();
    let mut exps: Vec<Vec<u16>> = vec![vec![]];
    for _ in 0..n {
        exps = exps
            .into_iter()
            .flat_map(|e| (0..=max_degree).map(move |k| [e.clone(), vec![k]].concat()))
            .filter(|e| e.iter().sum::<u16>() <= max_degree)
            .collect();
    }
    exps.sort_by_key(|e| e.iter().sum::<u16>());
    let mono = |e: &[u16]| MultiPoly::from_terms(vars, [(Monomial(e.iter().copied().collect()), rat(1, 1))]);
    let fact = |k: u16| (1..=k as i64).fold(rat(1, 1), |a, j| a * rat(j, 1));
    let mut coeffs: Vec<(Vec<u16>, MultiPoly)> = Vec::new();
    for b in &exps {
        // L(x^β) = Σ_{α ≤ β} c_α β!/(β−α)! x^{β−α}
        let mut v = l(&mono(b))?;
        for (a, ca) in &coeffs {
            if a.iter().zip(b).all(|(x, y)| x <= y) {
                let rest: Vec<u16> = a.iter().zip(b).map(|(x, y)| y - x).collect();
                let f = a.iter().zip(b).fold(rat(1, 1), |acc, (x, y)| acc * fact(*y) / fact(y - x));
                v -= &(ca * &mono(&rest)).scale(&f);
            }
        }
        let bf = b.iter().fold(rat(1, 1), |acc, y| acc * fact(*y));
        if b.iter().sum::<u16>() == max_degree && !v.is_zero() {
            return Err(ObstructError::OperatorOrder(max_degree));
        }
        coeffs.push((b.clone(), v.scale(&(rat(1, 1) / bf))));
    }
    let mut out = MultiPoly::zero(vars);
    for (a, ca) in coeffs {
        let mut d = ca;
        for (i, &k) in a.iter().enumerate() {
            for _ in 0..k {
                d = d.diff(i);
            }
        }
        if a.iter().sum::<u16>() % 2 == 1 {
            d = -&d;
        }
        out += &d;
    }
    Ok(out)
}

/// `−24 Δ₂*1` with Δ₂ the ν²-coefficient of the compositional operator
/// `i_ξ P D Q` on all functions, rather than of its closed form.
pub fn chi_from_delta(fd: &FedosovData, max_degree: u16) -> Result<MultiPoly, ObstructError> {
    let vars = fd.algebra().contact().vars().clone();
    let l = |a: &MultiPoly| -> Result<MultiPoly, ObstructError> {
        Ok(fd.delta_to_order(&Observable::classical(a, 2), 2)?.coeff(2).scale(&rat(24, 1)))
    };
    Ok(-&formal_adjoint_on_one(&vars, l, max_degree)?)
}

/// `χ` for the connection `∇ + S` built on the same flat chart connection.
pub fn chi_shifted(cd: &ContactData, conn: &ContactConnection, s: &STensors) -> Result<MultiPoly, ObstructError> {
    let shifted = build_connection(cd, &conn.s.add(s))?;
    Ok(chi_character(cd, &shifted, true))
}

/// `∫_γ λ f` over one period of the closed characteristic.
pub fn characteristic_integral(cc: &ClosedCharacteristic, cd: &ContactData, f: &MultiPoly) -> Result<Rational, ObstructError> {
    let c = cd.chart.index_of(&cc.reeb_coord)?;
    let integrand = &cd.lambda[c] * f;
    if integrand.depends_on(c) {
        return Err(ObstructError::NotPeriodic {
            coord: cc.reeb_coord.clone(),
            poly: f.to_string(),
        });
    }
    let mut at_base = integrand;
    for (name, v) in &cc.base_point {
        at_base = at_base.eval_coord(cd.chart.index_of(name)?, v);
    }
    let (lo, hi) = cc.parameter_range();
    let value = at_base.integrate_segment(&cc.reeb_coord, &lo, &hi).map_err(ContactError::from)?;
    value.constant_value().ok_or_else(|| {
        ObstructError::Contact(ContactError::Rejected(format!(
            "characteristic base point does not fix every transverse coordinate: {value}"
        )))
    })
}

/// `τ_γ = ∫_γ λ`.
pub fn tau_period(cc: &ClosedCharacteristic, cd: &ContactData) -> Result<Rational, ObstructError> {
    characteristic_integral(cc, cd, &MultiPoly::one(cd.vars()))
}

/// `χ_γ = ∫_γ λ χ`.
pub fn chi_period(cc: &ClosedCharacteristic, cd: &ContactData, conn: &ContactConnection) -> Result<Rational, ObstructError> {
    characteristic_integral(cc, cd, &chi_character(cd, conn, true))
}

/// `Ψ_γ[a₀] = ∫_γ λ Δ₂a₀`, defined for ξ-invariant `a₀` only. Δ₂ is taken
/// from the compositional operator, the one the correction chain sees.
pub fn psi_gamma(
    cc: &ClosedCharacteristic,
    cd: &ContactData,
    conn: &ContactConnection,
    a0: &MultiPoly,
) -> Result<Rational, ObstructError> {
    let d2 = delta2_compositional(cd, conn, a0)?;
    characteristic_integral(cc, cd, &d2)
}

/// Solves `ξa = f`. Over an open Reeb coordinate the antiderivative with
/// zero integration constant; over a periodic one the image of ξ on
/// polynomials is zero, so any nonzero `f` is returned as the residual.
pub fn solve_xi_gradient(cd: &ContactData, f: &MultiPoly) -> Result<Result<MultiPoly, MultiPoly>, ObstructError> {
    let c = cd.reeb_coord.ok_or(ObstructError::NoReebCoordinate)?;
    if f.is_zero() {
        return Ok(Ok(cd.zero()));
    }
    if cd.chart.period(c).is_some() {
        return Ok(Err(f.clone()));
    }
    Ok(Ok(f.antiderivative(c)))
}

/// Solves the chain `ξa_k = −(Δ(a₀ + … + ν^{k−1}a_{k−1}))_k` for `k = 1..K`
/// with the full operator Δ, taking zero whenever the right side vanishes.
/// On failure the residual's integrals over `characteristics` are reported.
pub fn quantize(
    fd: &FedosovData,
    a0: &MultiPoly,
    order: u32,
    characteristics: &[ClosedCharacteristic],
) -> Result<Result<Observable, ObstructionReport>, ObstructError> {
    let cd = fd.algebra().contact().clone();
    require_invariant(&cd, a0)?;
    let mut a = Observable::classical(a0, order);
    for k in 1..=order {
        let partial = a.with_order(k);
        let residual = fd.delta_to_order(&partial, k)?.coeff(k).clone();
        match solve_xi_gradient(&cd, &-&residual)? {
            Ok(ak) => a.set_coeff(k, a.coeff(k) + &ak),
            Err(_) => {
                let psi_values = characteristics
                    .iter()
                    .map(|cc| Ok((cc.clone(), characteristic_integral(cc, &cd, &residual)?)))
                    .collect::<Result<_, ObstructError>>()?;
                return Ok(Err(ObstructionReport {
                    order: k,
                    residual,
                    psi_values,
                }));
            }
        }
    }
    let check = fd.delta_to_order(&a, order)?;
    if !check.is_zero() {
        return Err(FedosovError::Invariant {
            identity: "Δa = 0 after solving the correction chain".into(),
            detail: check.to_string(),
        }
        .into());
    }
    Ok(Ok(a))
}

#[cfg(test)]
mod tests;
