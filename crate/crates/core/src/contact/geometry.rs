use num_traits::Zero;

use super::ContactError;
use crate::coeffring::{CoeffError, MultiPoly, Rational, Vars};
use crate::tensor::Tensor;

/// Coordinate chart of odd dimension `n = 2m + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    vars: Vars,
    periods: Vec<Option<Rational>>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[S], periods: Vec<Option<Rational>>) -> Result<Self, ContactError> {
        if coords.is_empty() {
            return Err(ContactError::Rejected("chart has no coordinates".into()));
        }
        if coords.len().is_multiple_of(2) {
            return Err(ContactError::Rejected(format!(
                "chart dimension {} is even; contact charts need n = 2m + 1",
                coords.len()
            )));
        }
        if periods.len() != coords.len() {
            return Err(ContactError::Rejected("one period slot per coordinate required".into()));
        }
        for (i, a) in coords.iter().enumerate() {
            let a = a.as_ref();
            if a.is_empty() || !a.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ContactError::Rejected(format!("invalid coordinate name `{a}`")));
            }
            if coords[..i].iter().any(|b| b.as_ref() == a) {
                return Err(ContactError::Rejected(format!("duplicate coordinate `{a}`")));
            }
        }
        if let Some(bad) = periods.iter().flatten().find(|t| t <= &&Rational::zero()) {
            return Err(ContactError::Rejected(format!("period {bad} is not positive")));
        }
        Ok(Chart {
            vars: Vars::new(coords),
            periods,
        })
    }

    /// Chart without periodic coordinates.
    pub fn open<S: AsRef<str>>(coords: &[S]) -> Result<Self, ContactError> {
        Self::new(coords, vec![None; coords.len()])
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    /// `m` in `n = 2m + 1`.
    pub fn half_rank(&self) -> usize {
        (self.dim() - 1) / 2
    }

    pub fn period(&self, i: usize) -> Option<&Rational> {
        self.periods[i].as_ref()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, ContactError> {
        self.vars
            .index_of(name)
            .ok_or_else(|| CoeffError::UnknownCoordinate(name.to_string()).into())
    }

    pub fn poly(&self, src: &str) -> Result<MultiPoly, ContactError> {
        Ok(crate::coeffring::parse_poly(src, &self.vars)?)
    }
}

/// Contact form on a chart together with every tensor derived from it.
///
/// Only constructed through [`validate_contact`], which checks all the
/// algebraic identities relating the fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactData {
    pub chart: Chart,
    /// Components `λ_i`.
    pub lambda: Vec<MultiPoly>,
    /// `ω_ij = ∂_i λ_j - ∂_j λ_i`, so that `dλ = ½ ω_ij dx^i ∧ dx^j`.
    pub omega: Tensor,
    /// Reeb field `ξ^i`.
    pub xi: Vec<MultiPoly>,
    /// Bivector `π^ij`.
    pub pi: Tensor,
    /// Projector `P^i_j = δ^i_j - λ_j ξ^i`, stored as `proj[i][j]`.
    pub proj: Tensor,
    /// Coefficient of `λ ∧ (dλ)^m` against `dx^1 ∧ … ∧ dx^n`.
    pub vol_density: Rational,
    /// Index of `c` when `ξ = ∂/∂x^c`.
    pub reeb_coord: Option<usize>,
}

impl ContactData {
    pub fn vars(&self) -> &Vars {
        self.chart.vars()
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn zero(&self) -> MultiPoly {
        MultiPoly::zero(self.vars())
    }

    /// Derivative of `f` along the Reeb field.
    pub fn xi_apply(&self, f: &MultiPoly) -> MultiPoly {
        let mut out = self.zero();
        for (i, x) in self.xi.iter().enumerate() {
            if !x.is_zero() {
                out += &(x * &f.diff(i));
            }
        }
        out
    }

    /// Indices of the coordinates transverse to the Reeb direction.
    pub fn transverse_coords(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| Some(i) != self.reeb_coord).collect()
    }

    pub fn proj_at(&self, i: usize, j: usize) -> &MultiPoly {
        self.proj.get(&[i, j])
    }
}

fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, bool)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, bool)>) {
        let n = used.len();
        if prefix.len() == n {
            let mut inversions = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if prefix[a] > prefix[b] {
                        inversions += 1;
                    }
                }
            }
            out.push((prefix.clone(), inversions % 2 == 1));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Builds [`ContactData`] from the components of a one-form, computing ξ
/// and π from Levi-Civita contractions of `λ` and `ω`.
pub fn validate_contact(chart: Chart, lambda: Vec<MultiPoly>) -> Result<ContactData, ContactError> {
    let n = chart.dim();
    let m = chart.half_rank();
    let vars = chart.vars().clone();
    if lambda.len() != n {
        return Err(ContactError::Rejected(format!(
            "contact form has {} components, chart has {n} coordinates",
            lambda.len()
        )));
    }
    for l in &lambda {
        if l.vars() != &vars {
            return Err(CoeffError::VarMismatch {
                left: vars.names().join(","),
                right: l.vars().names().join(","),
            }
            .into());
        }
    }
    let zero = MultiPoly::zero(&vars);
    let omega = Tensor::from_fn(&vars, n, 2, |ij| &lambda[ij[1]].diff(ij[0]) - &lambda[ij[0]].diff(ij[1]));

    // One pass over S_n: a permutation σ contributes
    //   denominator: sgn σ · λ_σ0 ω_σ1σ2 ⋯
    //   ξ^σ0:        sgn σ · ω_σ1σ2 ⋯
    //   π^σ1σ0:      sgn σ · λ_σ2 ω_σ3σ4 ⋯   (times 2m)
    let mut denom = zero.clone();
    let mut xi_num = vec![zero.clone(); n];
    let mut pi_num = Tensor::zeros(&vars, n, 2);
    for (perm, odd) in permutations_with_sign(n) {
        let omega_chain = |start: usize| {
            let mut acc = MultiPoly::one(&vars);
            let mut k = start;
            while k + 1 < n {
                acc = &acc * omega.get(&[perm[k], perm[k + 1]]);
                if acc.is_zero() {
                    break;
                }
                k += 2;
            }
            acc
        };
        let sign = |p: MultiPoly| if odd { -&p } else { p };
        let w1 = omega_chain(1);
        denom += &sign(&lambda[perm[0]] * &w1);
        xi_num[perm[0]] += &sign(w1);
        if n >= 3 {
            let w2 = omega_chain(3);
            pi_num.add_to(&[perm[1], perm[0]], &sign(&lambda[perm[2]] * &w2));
        }
    }
    let denom_value = match denom.constant_value() {
        Some(c) if !c.is_zero() => c,
        _ => {
            let density = denom.scale(&Rational::new(1.into(), (1i64 << m).into()));
            return Err(ContactError::Rejected(format!(
                "λ∧(dλ)^m has non-constant or vanishing density `{density}`; the denominator of the ξ/π formulas must be a nonzero constant"
            )))
        }
    };
    let inv = denom_value.clone().recip();
    let xi: Vec<MultiPoly> = xi_num.iter().map(|p| p.scale(&inv)).collect();
    let pi_scale = Rational::from_integer((2 * m as i64).into()) * &inv;
    let pi = pi_num.map(|p| p.scale(&pi_scale));
    let proj = Tensor::from_fn(&vars, n, 2, |ij| {
        let delta = if ij[0] == ij[1] { MultiPoly::one(&vars) } else { zero.clone() };
        &delta - &(&lambda[ij[1]] * &xi[ij[0]])
    });
    let vol_density = denom_value / Rational::from_integer((1i64 << m).into());

    let reeb_coord = (0..n).find(|&c| {
        xi.iter()
            .enumerate()
            .all(|(i, x)| if i == c { x == &MultiPoly::one(&vars) } else { x.is_zero() })
    });

    let cd = ContactData {
        chart,
        lambda,
        omega,
        xi,
        pi,
        proj,
        vol_density,
        reeb_coord,
    };
    check_contact_identities(&cd)?;
    Ok(cd)
}

fn check_contact_identities(cd: &ContactData) -> Result<(), ContactError> {
    let n = cd.dim();
    let m = cd.chart.half_rank();
    let vars = cd.vars();
    let zero = cd.zero();
    let one = MultiPoly::one(vars);
    let sum = |f: &dyn Fn(usize) -> MultiPoly| {
        let mut acc = zero.clone();
        for k in 0..n {
            acc += &f(k);
        }
        acc
    };
    let fail = |name: &str, idx: &[usize], v: &MultiPoly| {
        Err(ContactError::invariant(name, format!("component {idx:?} = {v}")))
    };

    // i_ξ λ = 1, i_ξ ω = 0
    let xl = sum(&|i| &cd.xi[i] * &cd.lambda[i]);
    if xl != one {
        return fail("i_ξ λ = 1", &[], &xl);
    }
    for j in 0..n {
        let v = sum(&|i| &cd.xi[i] * cd.omega.get(&[i, j]));
        if !v.is_zero() {
            return fail("i_ξ ω = 0", &[j], &v);
        }
    }
    for j in 0..n {
        let v = sum(&|i| &cd.lambda[i] * cd.pi.get(&[i, j]));
        if !v.is_zero() {
            return fail("λ_i π^ij = 0", &[j], &v);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if cd.pi.get(&[i, j]) != &-cd.pi.get(&[j, i]) {
                return fail("π antisymmetric", &[i, j], cd.pi.get(&[i, j]));
            }
            let pp = sum(&|k| cd.proj.get(&[i, k]) * cd.proj.get(&[k, j]));
            if &pp != cd.proj.get(&[i, j]) {
                return fail("P^2 = P", &[i, j], &pp);
            }
            if m > 0 {
                let po = sum(&|k| cd.pi.get(&[i, k]) * cd.omega.get(&[k, j]));
                if &po != cd.proj.get(&[i, j]) {
                    return fail("P^i_j = π^ik ω_kj", &[i, j], &po);
                }
            }
            let pw = sum(&|k| cd.proj.get(&[k, i]) * cd.omega.get(&[k, j]));
            if &pw != cd.omega.get(&[i, j]) {
                return fail("P^k_i ω_kj = ω_ij", &[i, j], &pw);
            }
            let pip = sum(&|k| cd.pi.get(&[i, k]) * cd.proj.get(&[j, k]));
            if &pip != cd.pi.get(&[i, j]) {
                return fail("π^ik P^j_k = π^ij", &[i, j], &pip);
            }
        }
        let lp = sum(&|k| &cd.lambda[k] * cd.proj.get(&[k, i]));
        if !lp.is_zero() {
            return fail("λ_i P^i_j = 0", &[i], &lp);
        }
        let px = sum(&|k| cd.proj.get(&[i, k]) * &cd.xi[k]);
        if !px.is_zero() {
            return fail("P^i_j ξ^j = 0", &[i], &px);
        }
    }
    let tr = sum(&|k| cd.proj.get(&[k, k]).clone());
    if tr != MultiPoly::from_int(vars, 2 * m as i64) {
        return fail("Tr P = 2m", &[], &tr);
    }
    Ok(())
}

/// Jacobi bracket `{f,g} = π(df,dg) + f ξg - g ξf`.
pub fn jacobi_bracket(cd: &ContactData, f: &MultiPoly, g: &MultiPoly) -> MultiPoly {
    let n = cd.dim();
    let df: Vec<MultiPoly> = (0..n).map(|i| f.diff(i)).collect();
    let dg: Vec<MultiPoly> = (0..n).map(|i| g.diff(i)).collect();
    let mut out = cd.zero();
    for i in 0..n {
        if df[i].is_zero() {
            continue;
        }
        for j in 0..n {
            let p = cd.pi.get(&[i, j]);
            if p.is_zero() || dg[j].is_zero() {
                continue;
            }
            out += &(&(p * &df[i]) * &dg[j]);
        }
    }
    out += &(f * &cd.xi_apply(g));
    out -= &(g * &cd.xi_apply(f));
    out
}

/// Residuals of the Jacobi-structure identities in coordinates.
///
/// With `[π,π]^{ijk} = 2 ∮ π^{il} ∂_l π^{jk}` (cyclic sum over `ijk`), the
/// residuals are `½[π,π] - π∧ξ` and `[ξ,π] = L_ξ π`.
#[derive(Debug, Clone)]
pub struct SchoutenReport {
    pub pi_pi: Tensor,
    pub xi_pi: Tensor,
}

impl SchoutenReport {
    pub fn holds(&self) -> bool {
        self.pi_pi.is_zero() && self.xi_pi.is_zero()
    }
}

pub fn schouten_check(cd: &ContactData) -> Result<SchoutenReport, ContactError> {
    let n = cd.dim();
    let vars = cd.vars();
    let zero = cd.zero();
    let dpi: Vec<Tensor> = (0..n).map(|l| cd.pi.map(|p| p.diff(l))).collect();
    let cyc = |i: usize, j: usize, k: usize| {
        let mut acc = zero.clone();
        for l in 0..n {
            let a = cd.pi.get(&[i, l]);
            if !a.is_zero() {
                acc += &(a * dpi[l].get(&[j, k]));
            }
        }
        acc -= &(&cd.xi[i] * cd.pi.get(&[j, k]));
        acc
    };
    let pi_pi = Tensor::from_fn(vars, n, 3, |ijk| {
        let (i, j, k) = (ijk[0], ijk[1], ijk[2]);
        let mut acc = cyc(i, j, k);
        acc += &cyc(j, k, i);
        acc += &cyc(k, i, j);
        acc
    });
    let xi_pi = Tensor::from_fn(vars, n, 2, |ij| {
        let (i, j) = (ij[0], ij[1]);
        let mut acc = zero.clone();
        for k in 0..n {
            acc += &(&cd.xi[k] * dpi[k].get(&[i, j]));
            acc -= &(cd.pi.get(&[k, j]) * &cd.xi[i].diff(k));
            acc -= &(cd.pi.get(&[i, k]) * &cd.xi[j].diff(k));
        }
        acc
    });
    let report = SchoutenReport { pi_pi, xi_pi };
    if let Some((idx, v)) = report.pi_pi.first_nonzero() {
        return Err(ContactError::invariant("[π,π] = 2π∧ξ", format!("component {idx:?} = {v}")));
    }
    if let Some((idx, v)) = report.xi_pi.first_nonzero() {
        return Err(ContactError::invariant("[ξ,π] = 0", format!("component {idx:?} = {v}")));
    }
    Ok(report)
}
