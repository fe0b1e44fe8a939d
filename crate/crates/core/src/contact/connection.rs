use super::{ContactData, ContactError};
use crate::coeffring::MultiPoly;
use crate::tensor::{Slot, Tensor};

/// The pair `(S_ij, S_ijk)` of fully symmetric ξ-transverse tensors that
/// parametrizes contact connections relative to the flat chart connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct STensors {
    pub s2: Tensor,
    pub s3: Tensor,
}

impl STensors {
    pub fn zero(cd: &ContactData) -> Self {
        STensors {
            s2: Tensor::zeros(cd.vars(), cd.dim(), 2),
            s3: Tensor::zeros(cd.vars(), cd.dim(), 3),
        }
    }

    /// Fills every permutation of each listed index tuple. Listing two
    /// orderings of the same tuple is an error.
    pub fn from_components(
        cd: &ContactData,
        s2: &[(Vec<usize>, MultiPoly)],
        s3: &[(Vec<usize>, MultiPoly)],
    ) -> Result<Self, ContactError> {
        let mut out = Self::zero(cd);
        fill_symmetric(&mut out.s2, s2, 2)?;
        fill_symmetric(&mut out.s3, s3, 3)?;
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.s2.is_zero() && self.s3.is_zero()
    }

    pub fn add(&self, other: &STensors) -> STensors {
        STensors {
            s2: self.s2.add(&other.s2),
            s3: self.s3.add(&other.s3),
        }
    }

    pub fn validate(&self, cd: &ContactData) -> Result<(), ContactError> {
        if !self.s2.is_fully_symmetric() {
            return Err(ContactError::Rejected("S_ij is not symmetric".into()));
        }
        if !self.s3.is_fully_symmetric() {
            return Err(ContactError::Rejected("S_ijk is not fully symmetric".into()));
        }
        let n = cd.dim();
        for idx in self.s2.indices().filter(|i| i[1] == 0) {
            let mut acc = cd.zero();
            for a in 0..n {
                acc += &(&cd.xi[a] * self.s2.get(&[idx[0], a]));
            }
            if !acc.is_zero() {
                return Err(ContactError::Rejected(format!(
                    "S_ij is not ξ-transverse: ξ^a S_a{} = {acc}",
                    idx[0]
                )));
            }
        }
        for idx in self.s3.indices().filter(|i| i[2] == 0) {
            let mut acc = cd.zero();
            for a in 0..n {
                acc += &(&cd.xi[a] * self.s3.get(&[idx[0], idx[1], a]));
            }
            if !acc.is_zero() {
                return Err(ContactError::Rejected(format!(
                    "S_ijk is not ξ-transverse: ξ^a S_{}{}a = {acc}",
                    idx[0], idx[1]
                )));
            }
        }
        Ok(())
    }
}

fn fill_symmetric(t: &mut Tensor, comps: &[(Vec<usize>, MultiPoly)], rank: usize) -> Result<(), ContactError> {
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for (idx, val) in comps {
        if idx.len() != rank || idx.iter().any(|&i| i >= t.dim()) {
            return Err(ContactError::Rejected(format!("bad index tuple {idx:?} for rank-{rank} tensor")));
        }
        let mut key = idx.clone();
        key.sort_unstable();
        if seen.contains(&key) {
            return Err(ContactError::Rejected(format!("component {idx:?} given twice")));
        }
        seen.push(key);
        for perm in permutations(idx) {
            t.set(&perm, val.clone());
        }
    }
    Ok(())
}

fn permutations(idx: &[usize]) -> Vec<Vec<usize>> {
    if idx.len() <= 1 {
        return vec![idx.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..idx.len() {
        let mut rest = idx.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            if !out.contains(&tail) {
                out.push(tail);
            }
        }
    }
    out
}

/// A symmetric connection preserving `ω` and `ξ`.
///
/// Sign convention: `∇_i V^k = ∂_i V^k - Γ^k_ij V^j` and
/// `∇_i α_j = ∂_i α_j + Γ^k_ij α_k`, which is the convention under which the
/// Weyl-bundle lift `dx^i ∧ (∂_i + y^j Γ^k_ij ∂/∂y^k)` is compatible with
/// the fiberwise product. The curvature is `R^m_jkl V^j = [∇_k, ∇_l] V^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactConnection {
    pub s: STensors,
    /// `Γ^k_ij` stored at `[k, i, j]`.
    pub gamma: Tensor,
    /// `R^m_jkl` stored at `[m, j, k, l]`.
    pub riemann: Tensor,
    /// `R_ijkl = ω_im R^m_jkl`.
    pub riemann_low: Tensor,
}

impl ContactConnection {
    pub fn is_flat(&self) -> bool {
        self.riemann.is_zero()
    }

    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> &MultiPoly {
        self.gamma.get(&[k, i, j])
    }

    /// Covariant derivative; the new (lower) index is prepended.
    pub fn covariant_derivative(&self, t: &Tensor, slots: &[Slot]) -> Tensor {
        assert_eq!(slots.len(), t.rank());
        let n = t.dim();
        let mut out = Tensor::zeros(t.vars(), n, t.rank() + 1);
        let mut src = vec![0usize; t.rank()];
        for idx in out.indices() {
            let a = idx[0];
            let rest = &idx[1..];
            let mut acc = t.get(rest).diff(a);
            for (s, slot) in slots.iter().enumerate() {
                src.copy_from_slice(rest);
                for c in 0..n {
                    src[s] = c;
                    let comp = t.get(&src);
                    if comp.is_zero() {
                        continue;
                    }
                    match slot {
                        Slot::Up => {
                            let g = self.gamma.get(&[rest[s], a, c]);
                            if !g.is_zero() {
                                acc -= &(g * comp);
                            }
                        }
                        Slot::Down => {
                            let g = self.gamma.get(&[c, a, rest[s]]);
                            if !g.is_zero() {
                                acc += &(g * comp);
                            }
                        }
                    }
                }
            }
            out.set(&idx, acc);
        }
        out
    }
}

/// Assembles `Γ^k_ij = S_ij ξ^k + S_ijl π^lk` on top of the flat chart
/// connection and verifies the contact-connection identities.
pub fn build_connection(cd: &ContactData, s: &STensors) -> Result<ContactConnection, ContactError> {
    let n = cd.dim();
    let vars = cd.vars();
    for k in 0..n {
        if cd.omega.indices().any(|ij| !cd.omega.get(&ij).diff(k).is_zero())
            || cd.xi.iter().any(|x| !x.diff(k).is_zero())
        {
            return Err(ContactError::Rejected(
                "chart is not Darboux-type: the flat chart connection does not preserve ω and ξ".into(),
            ));
        }
    }
    s.validate(cd)?;

    let gamma = Tensor::from_fn(vars, n, 3, |kij| {
        let (k, i, j) = (kij[0], kij[1], kij[2]);
        let mut acc = s.s2.get(&[i, j]) * &cd.xi[k];
        for l in 0..n {
            let a = s.s3.get(&[i, j, l]);
            if !a.is_zero() {
                acc += &(a * cd.pi.get(&[l, k]));
            }
        }
        acc
    });

    let riemann = Tensor::from_fn(vars, n, 4, |mjkl| {
        let (m, j, k, l) = (mjkl[0], mjkl[1], mjkl[2], mjkl[3]);
        let mut acc = &gamma.get(&[m, k, j]).diff(l) - &gamma.get(&[m, l, j]).diff(k);
        for a in 0..n {
            acc += &(gamma.get(&[m, k, a]) * gamma.get(&[a, l, j]));
            acc -= &(gamma.get(&[m, l, a]) * gamma.get(&[a, k, j]));
        }
        acc
    });
    let riemann_low = Tensor::from_fn(vars, n, 4, |ijkl| {
        let mut acc = cd.zero();
        for m in 0..n {
            let w = cd.omega.get(&[ijkl[0], m]);
            if !w.is_zero() {
                acc += &(w * riemann.get(&[m, ijkl[1], ijkl[2], ijkl[3]]));
            }
        }
        acc
    });

    let conn = ContactConnection {
        s: s.clone(),
        gamma,
        riemann,
        riemann_low,
    };
    check_connection_identities(cd, &conn)?;
    Ok(conn)
}

fn check_connection_identities(cd: &ContactData, conn: &ContactConnection) -> Result<(), ContactError> {
    let n = cd.dim();
    let fail = |name: &str, t: &Tensor| match t.first_nonzero() {
        Some((idx, v)) => Err(ContactError::invariant(name, format!("component {idx:?} = {v}"))),
        None => Ok(()),
    };
    let zero = cd.zero();

    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if conn.christoffel(k, i, j) != conn.christoffel(k, j, i) {
                    return Err(ContactError::invariant("Γ^k_ij = Γ^k_ji", format!("[{k},{i},{j}]")));
                }
            }
        }
    }
    let nabla_omega = conn.covariant_derivative(&cd.omega, &[Slot::Down, Slot::Down]);
    fail("∇ω = 0", &nabla_omega)?;
    let xi_t = Tensor::from_fn(cd.vars(), n, 1, |i| cd.xi[i[0]].clone());
    let nabla_xi = conn.covariant_derivative(&xi_t, &[Slot::Up]);
    fail("∇ξ = 0", &nabla_xi)?;

    // ∇v = 0: the density is constant, so the trace Γ^a_ka must vanish.
    let trace = Tensor::from_fn(cd.vars(), n, 1, |k| {
        let mut acc = zero.clone();
        for a in 0..n {
            acc += conn.christoffel(a, k[0], a);
        }
        acc
    });
    fail("∇v = 0", &trace)?;

    let lambda_t = Tensor::from_fn(cd.vars(), n, 1, |i| cd.lambda[i[0]].clone());
    let nabla_lambda = conn.covariant_derivative(&lambda_t, &[Slot::Down]);
    let nabla_pi = conn.covariant_derivative(&cd.pi, &[Slot::Up, Slot::Up]);
    // ω_ik ∇_x π^kj + ξ^j ∇_x λ_i = 0
    let second = Tensor::from_fn(cd.vars(), n, 3, |xij| {
        let (x, i, j) = (xij[0], xij[1], xij[2]);
        let mut acc = &cd.xi[j] * nabla_lambda.get(&[x, i]);
        for k in 0..n {
            acc += &(cd.omega.get(&[i, k]) * nabla_pi.get(&[x, k, j]));
        }
        acc
    });
    fail("ω_ik ∇π^kj = -ξ^j ∇λ_i", &second)?;
    // ∇_x π^ij = (π^ki ξ^j - π^kj ξ^i) ∇_x λ_k
    let third = Tensor::from_fn(cd.vars(), n, 3, |xij| {
        let (x, i, j) = (xij[0], xij[1], xij[2]);
        let mut acc = nabla_pi.get(&[x, i, j]).clone();
        for k in 0..n {
            let c = &(cd.pi.get(&[k, i]) * &cd.xi[j]) - &(cd.pi.get(&[k, j]) * &cd.xi[i]);
            acc -= &(&c * nabla_lambda.get(&[x, k]));
        }
        acc
    });
    fail("∇π^ij = (π^ki ξ^j - π^kj ξ^i) ∇λ_k", &third)?;

    let sym = Tensor::from_fn(cd.vars(), n, 4, |ijkl| {
        conn.riemann_low.get(ijkl) - conn.riemann_low.get(&[ijkl[1], ijkl[0], ijkl[2], ijkl[3]])
    });
    fail("R_ijkl = R_jikl", &sym)?;

    // Recover (S_ij, S_ijk) from S^k_ij = Γ^k_ij (flat base).
    let s3 = Tensor::from_fn(cd.vars(), n, 3, |ijk| {
        let mut acc = zero.clone();
        for l in 0..n {
            acc += &(conn.christoffel(l, ijk[0], ijk[1]) * cd.omega.get(&[l, ijk[2]]));
        }
        acc
    });
    let s2 = Tensor::from_fn(cd.vars(), n, 2, |ij| {
        let mut acc = zero.clone();
        for k in 0..n {
            acc += &(conn.christoffel(k, ij[0], ij[1]) * &cd.lambda[k]);
        }
        acc
    });
    fail("S_ijk round trip", &s3.sub(&conn.s.s3))?;
    fail("S_ij round trip", &s2.sub(&conn.s.s2))?;
    Ok(())
}
