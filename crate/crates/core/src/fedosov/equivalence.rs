use super::gauge::{conj_exp, GaugedConnection};
use super::{invariant, solve_r, FedosovData, FedosovError, Observable};
use crate::coeffring::{rat, MultiPoly, Rational};
use crate::contact::calculus::{curvature_gradient, derivatives, pair, project_first, raise};
use crate::contact::{build_connection, ContactConnection, ContactData, STensors};
use crate::tensor::{Slot, Tensor};
use crate::weyl::{WeylAlgebra, WeylElement};

const DOWN3: [Slot; 3] = [Slot::Down; 3];

/// `½ S_ijk yⁱ yʲ dxᵏ`, the shift of the connection form under `∇ → ∇ + S`.
fn connection_shift(alg: &WeylAlgebra, s3: &Tensor) -> Result<WeylElement, FedosovError> {
    let mut out = alg.zero(crate::weyl::EXACT);
    for (idx, c) in s3.nonzero() {
        fiber_guard(alg, &idx[..2])?;
        out.add_monomial(0, &idx[..2], &idx[2..], &c.scale(&rat(1, 2)));
    }
    Ok(out)
}

fn fiber_guard(alg: &WeylAlgebra, ys: &[usize]) -> Result<(), FedosovError> {
    if ys.contains(&alg.reeb()) {
        return Err(invariant("ξ-transversality", "a Reeb index reached a fiber slot"));
    }
    Ok(())
}

/// The generator `H` of the equivalence automorphism in closed form,
/// `(1/6) S_ijk yⁱyʲyᵏ − (1/24) ∇̃_n S_ijk yⁱyʲyᵏyⁿ + (ν²/32) S^{ijk} R_ijkl Pˡ_n yⁿ`,
/// with `∇` and `R` taken from `conn`.
pub fn h_closed_form(alg: &WeylAlgebra, conn: &ContactConnection, s3: &Tensor) -> Result<WeylElement, FedosovError> {
    let cd = alg.contact();
    let mut h = alg.zero(crate::weyl::EXACT);
    for (idx, c) in s3.nonzero() {
        fiber_guard(alg, &idx)?;
        h.add_monomial(0, &idx, &[], &c.scale(&rat(1, 6)));
    }
    let grad = project_first(cd, &conn.covariant_derivative(s3, &DOWN3));
    for (idx, c) in grad.nonzero() {
        fiber_guard(alg, &idx)?;
        h.add_monomial(0, &idx, &[], &c.scale(&rat(-1, 24)));
    }
    let s_up = raise(cd, s3, &[0, 1, 2]);
    let sr = s_up.contract(&conn.riemann_low, &[(0, 0), (1, 1), (2, 2)]);
    for (idx, c) in sr.contract(&cd.proj, &[(0, 0)]).nonzero() {
        fiber_guard(alg, &idx)?;
        h.add_monomial(2, &idx, &[], &c.scale(&rat(1, 32)));
    }
    Ok(h)
}

/// Equivalence between the canonical quantizations built on `∇` and `∇ + S`.
#[derive(Debug, Clone)]
pub struct Equivalence {
    pub source: FedosovData,
    pub target: FedosovData,
    /// The added `S_ijk`.
    pub s3: Tensor,
    /// Closed-form generator of `U`.
    pub h: WeylElement,
    /// Generators `H_1, H_2, …` of the step-by-step construction
    /// `U = ⋯ exp∘(ν⁻¹H_2) exp∘(ν⁻¹H_1)`, each of one weight.
    pub steps: Vec<WeylElement>,
}

/// Builds `∇' = ∇ + S`, its Fedosov connection, the closed-form generator
/// `H` and an independent step-by-step conjugation `D ↦ D'`.
pub fn equivalence_g(fd: &FedosovData, s: &STensors) -> Result<Equivalence, FedosovError> {
    if !fd.is_canonical() {
        return Err(FedosovError::NotCanonical);
    }
    let alg = fd.algebra();
    let cd = alg.contact();
    let conn2 = build_connection(cd, &fd.conn.s.add(s))?;
    let target = solve_r(alg, &conn2, &[], fd.trunc)?;
    let shift = connection_shift(alg, &s.s3)?;
    for i in alg.fiber_coords() {
        let y = alg.y(i)?;
        let lhs = &alg.nabla(&conn2, &y) - &alg.nabla(&fd.conn, &y);
        if lhs != alg.nu_inv_commutator(&shift, &y) {
            return Err(invariant("∇' − ∇ = ν⁻¹[½S yy dx, ·]", format!("on y^{}", alg.vars().name(i))));
        }
    }
    let goal = &(&alg.omega_y_dx() + &target.r) + &shift;
    let n = fd.trunc;
    let mut cur = GaugedConnection::from_fedosov(fd);
    let mut steps = Vec::new();
    loop {
        let rho = (&goal - &cur.gamma).filter(|k| !k.y.is_empty()).truncated(n);
        if rho.is_zero() {
            break;
        }
        let w = rho.low_weight();
        let lead = rho.filter(|k| k.weight() == w);
        if !alg.delta(&lead).is_zero() {
            // only a y-linear piece can have a central δ-image; it is removed
            // by a generator ν^k f_i yⁱ solving dF = B with F_c = 0
            let h = linear_generator(alg, &lead.filter(|k| k.y.len() == 1))?;
            cur = cur.gauge(&h, n)?;
            steps.push(h);
            continue;
        }
        let h = alg.delta_inv(&lead);
        if alg.delta(&h) != lead {
            return Err(invariant("δ-exactness of the leading connection difference", format!("weight {w}")));
        }
        cur = cur.gauge(&h, n)?;
        steps.push(h);
    }
    Ok(Equivalence {
        h: h_closed_form(alg, &fd.conn, &s.s3)?,
        source: fd.clone(),
        target,
        s3: s.s3.clone(),
        steps,
    })
}

fn contact(e: &Equivalence) -> &ContactData {
    e.source.algebra().contact()
}

impl Equivalence {
    /// `Ga = P(U∘Qa∘U⁻¹)` with `U` from the step-by-step construction.
    pub fn apply(&self, a: &Observable) -> Result<Observable, FedosovError> {
        let alg = self.source.algebra();
        let mut e = self.source.quantum_lift(a);
        let n = e.trunc();
        for h in &self.steps {
            e = conj_exp(alg, h, &e, n)?;
        }
        Ok(self.project(&e, a.order()))
    }

    /// `Ga` with `U = exp∘(ν⁻¹H)` for the closed-form `H`.
    pub fn apply_closed_form(&self, a: &Observable) -> Result<Observable, FedosovError> {
        let alg = self.source.algebra();
        let q = self.source.quantum_lift(a);
        let n = q.trunc();
        let c = conj_exp(alg, &self.h, &q, n)?;
        Ok(self.project(&c, a.order()))
    }

    /// `G₂a`, the ν²-coefficient of `Ga` for classical `a`.
    pub fn g2(&self, a: &MultiPoly) -> Result<MultiPoly, FedosovError> {
        let g = self.apply(&Observable::classical(a, 2))?;
        if g.order() < 2 {
            return Err(FedosovError::Truncation { requested: 2, exact: g.order() });
        }
        Ok(g.coeff(2).clone())
    }

    fn project(&self, e: &WeylElement, order: u32) -> Observable {
        let alg = self.source.algebra();
        Observable::from_scalar_part(&alg.proj_p(e), order).unwrap_or_else(|| Observable::new(alg.vars(), vec![], 0))
    }

    /// `G₂a = (1/24) S^{ijk}(∇̃_i∇̃_j∇̃_k + (3/2) Sˡ_ij ∇̃_k∇̃_l + ½ R_ijkl π^{ln}∇_n − ¼ ∇_l S_ijk π^{ln}∇_n) a`.
    pub fn g2_closed_form(&self, a: &MultiPoly) -> MultiPoly {
        let cd = contact(self);
        let conn = &self.source.conn;
        let s_up = raise(cd, &self.s3, &[0, 1, 2]);
        let d = derivatives(cd, conn, a, 3, true);
        let t1 = pair(&s_up, &d[2]);
        let s_mixed = raise(cd, &self.s3, &[2]);
        let t2 = pair(&s_up.contract(&s_mixed, &[(0, 0), (1, 1)]), &d[1]);
        let t3 = pair(&s_up, &curvature_gradient(cd, conn, a));
        let grad_s = conn.covariant_derivative(&self.s3, &DOWN3);
        let t4 = pair(&grad_s.contract(&s_up, &[(1, 0), (2, 1), (3, 2)]), &pi_gradient(cd, a));
        combine(&[(t1, rat(1, 24)), (t2, rat(1, 16)), (t3, rat(1, 48)), (t4, rat(-1, 96))])
    }

    /// `Δ'₂a = (1/24)(R_ξ^{ijk} + ∇_ξ S^{ijk})(∇̃_i∇̃_j∇̃_k + ½ R_ijkm π^{mn}∇_n − ∇_l S_ijk π^{ln}∇_n) a`.
    pub fn delta2_prime_closed_form(&self, a: &MultiPoly) -> MultiPoly {
        let cd = contact(self);
        let conn = &self.source.conn;
        let s_up = raise(cd, &self.s3, &[0, 1, 2]);
        let xi = Tensor::from_fn(cd.vars(), cd.dim(), 1, |i| cd.xi[i[0]].clone());
        let xi_s = xi.contract(&conn.covariant_derivative(&s_up, &[Slot::Up; 3]), &[(0, 0)]);
        let coeff = crate::contact::calculus::r_xi(cd, conn).add(&xi_s);
        let d = derivatives(cd, conn, a, 3, true);
        let grad_s = conn.covariant_derivative(&self.s3, &DOWN3);
        let b = grad_s.contract(&pi_gradient(cd, a), &[(0, 0)]);
        let op = d[2]
            .add(&curvature_gradient(cd, conn, a).scale(&rat(1, 2)))
            .sub(&b);
        pair(&coeff, &op).scale(&rat(1, 24))
    }

    /// `Δ'₂a = Δ₂a − ξ(G₂a) + G₂(ξa)`, read off `Δ'G = GΔ` with `Δ₂` from
    /// the source quantization.
    pub fn delta2_prime_via_g(&self, a: &MultiPoly) -> Result<MultiPoly, FedosovError> {
        let cd = contact(self);
        let d2 = self.source.delta_to_order(&Observable::classical(a, 2), 2)?.coeff(2).clone();
        let g2 = self.g2(a)?;
        let g2_xi = self.g2(&cd.xi_apply(a))?;
        Ok(&(&d2 - &cd.xi_apply(&g2)) + &g2_xi)
    }

    /// `Δ'₂a` computed from the Fedosov connection of `∇ + S` directly.
    pub fn delta2_prime_direct(&self, a: &MultiPoly) -> Result<MultiPoly, FedosovError> {
        Ok(self.target.delta_to_order(&Observable::classical(a, 2), 2)?.coeff(2).clone())
    }
}

/// For `L = ν^k β_ab yᵃ dxᵇ` returns `ν^k f_a yᵃ` with
/// `∂_a f_b − ∂_b f_a = β_ab − β_ba` and `f_c = 0` on the Reeb coordinate, so
/// that gauging by it leaves a δ-exact remainder.
fn linear_generator(alg: &WeylAlgebra, lin: &WeylElement) -> Result<WeylElement, FedosovError> {
    let vars = alg.vars();
    let n = alg.dim();
    let mut b = Tensor::zeros(vars, n, 2);
    let mut nu = None;
    for (key, c) in lin.terms() {
        let j = key.dx_indices().next().expect("one-form");
        let i = key.y[0] as usize;
        nu = Some(key.nu);
        b.add_to(&[i, j], c);
        b.add_to(&[j, i], &-c);
    }
    let Some(nu) = nu else {
        return Err(invariant("y-linear connection difference", "empty"));
    };
    // radial homotopy: F_a = Σ_m x^m B_ma(x) / (deg + 2) monomialwise
    let mut f: Vec<MultiPoly> = (0..n)
        .map(|a| {
            let mut acc = MultiPoly::zero(vars);
            for m in 0..n {
                let xm = MultiPoly::coord(vars, m);
                let scaled = MultiPoly::from_terms(
                    vars,
                    b.get(&[m, a])
                        .terms()
                        .map(|(mono, c)| (mono.clone(), c / Rational::from_integer((mono.degree() + 2).into()))),
                );
                acc += &(&xm * &scaled);
            }
            acc
        })
        .collect();
    let c = alg.reeb();
    let g = f[c].antiderivative(c);
    for (a, fa) in f.iter_mut().enumerate() {
        *fa -= &g.diff(a);
    }
    for a in 0..n {
        for m in 0..n {
            if &(&f[m].diff(a) - &f[a].diff(m)) != b.get(&[a, m]) {
                return Err(invariant("closedness of the y-linear connection difference", format!("({a},{m})")));
            }
        }
    }
    let mut h = alg.zero(crate::weyl::EXACT);
    for a in alg.fiber_coords() {
        h.add_monomial(nu, &[a], &[], &f[a]);
    }
    Ok(h)
}

/// `π^{ln} ∂_n a`.
fn pi_gradient(cd: &ContactData, a: &MultiPoly) -> Tensor {
    let grad = Tensor::from_fn(cd.vars(), cd.dim(), 1, |n| a.diff(n[0]));
    cd.pi.contract(&grad, &[(1, 0)])
}

fn combine(parts: &[(MultiPoly, Rational)]) -> MultiPoly {
    let mut it = parts.iter();
    let (p0, c0) = it.next().expect("nonempty");
    it.fold(p0.scale(c0), |acc, (p, c)| &acc + &p.scale(c))
}
