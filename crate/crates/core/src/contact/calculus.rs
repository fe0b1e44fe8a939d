//! Index gymnastics shared by the closed-form operators: raising with π,
//! transverse covariant derivatives and the symmetrized curvature `R_ξ`.

use super::{ContactConnection, ContactData};
use crate::coeffring::{rat, MultiPoly};
use crate::tensor::{Slot, Tensor};

/// Raises the listed (lower) slots with π: `T^{..i..} = T_{..l..} π^{li}`.
pub fn raise(cd: &ContactData, t: &Tensor, slots: &[usize]) -> Tensor {
    let mut out = t.clone();
    let rank = t.rank();
    for &s in slots {
        // contraction moves the contracted slot to the end; put it back
        let c = out.contract(&cd.pi, &[(s, 0)]);
        let mut order: Vec<usize> = (0..rank - 1).collect();
        order.insert(s, rank - 1);
        out = c.permuted(&order);
    }
    out
}

/// Applies `P^m_i` to the first slot: `out_{i…} = P^m_i t_{m…}`.
pub fn project_first(cd: &ContactData, t: &Tensor) -> Tensor {
    cd.proj.contract(t, &[(0, 0)])
}

/// `[∇a, ∇∇a, …]` up to `order` derivatives, the newest index first. With
/// `tilde` each derivative is projected, `∇̃_i = P^m_i ∇_m`.
pub fn derivatives(cd: &ContactData, conn: &ContactConnection, a: &MultiPoly, order: usize, tilde: bool) -> Vec<Tensor> {
    let mut out = Vec::with_capacity(order);
    let mut cur = Tensor::scalar(a.clone());
    let mut slots = Vec::new();
    for _ in 0..order {
        let mut next = conn.covariant_derivative(&cur, &slots);
        if tilde {
            next = project_first(cd, &next);
        }
        slots.push(Slot::Down);
        out.push(next.clone());
        cur = next;
    }
    out
}

/// `R_ξ^{ijk} = ⅓(R_nmls + R_mlns + R_lnms) ξ^s π^{ni} π^{mj} π^{lk}`.
pub fn r_xi(cd: &ContactData, conn: &ContactConnection) -> Tensor {
    let xi = Tensor::from_fn(cd.vars(), cd.dim(), 1, |i| cd.xi[i[0]].clone());
    let low = conn.riemann_low.contract(&xi, &[(3, 0)]);
    let sym = low.add(&low.permuted(&[1, 2, 0])).add(&low.permuted(&[2, 0, 1]));
    raise(cd, &sym.scale(&rat(1, 3)), &[0, 1, 2])
}

/// `R_ijkl π^{ln} ∂_n a`, a rank-3 tensor in `ijk`.
pub fn curvature_gradient(cd: &ContactData, conn: &ContactConnection, a: &MultiPoly) -> Tensor {
    let grad = Tensor::from_fn(cd.vars(), cd.dim(), 1, |n| a.diff(n[0]));
    let pi_grad = cd.pi.contract(&grad, &[(1, 0)]);
    conn.riemann_low.contract(&pi_grad, &[(3, 0)])
}

/// Full contraction of two tensors of equal rank, slot by slot.
pub fn pair(a: &Tensor, b: &Tensor) -> MultiPoly {
    assert_eq!(a.rank(), b.rank());
    let pairs: Vec<(usize, usize)> = (0..a.rank()).map(|s| (s, s)).collect();
    a.contract(b, &pairs).get(&[]).clone()
}
