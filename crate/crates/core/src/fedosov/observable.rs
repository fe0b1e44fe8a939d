use std::fmt;

use crate::coeffring::{MultiPoly, Vars};
use crate::weyl::{Key, WeylElement};

/// Truncated series `a₀ + ν a₁ + … + ν^K a_K`; coefficients beyond `K` are
/// unknown.
#[derive(Clone, PartialEq, Eq)]
pub struct Observable {
    vars: Vars,
    coeffs: Vec<MultiPoly>,
    order: u32,
}

impl Observable {
    pub fn new(vars: &Vars, mut coeffs: Vec<MultiPoly>, order: u32) -> Self {
        coeffs.truncate(order as usize + 1);
        while coeffs.len() < order as usize + 1 {
            coeffs.push(MultiPoly::zero(vars));
        }
        Observable {
            vars: vars.clone(),
            coeffs,
            order,
        }
    }

    /// A classical function viewed as a series known through `ν^order`.
    pub fn classical(a0: &MultiPoly, order: u32) -> Self {
        Self::new(a0.vars(), vec![a0.clone()], order)
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, k: u32) -> &MultiPoly {
        &self.coeffs[k as usize]
    }

    pub fn coeffs(&self) -> &[MultiPoly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(MultiPoly::is_zero)
    }

    pub fn with_order(&self, order: u32) -> Self {
        Self::new(&self.vars, self.coeffs.clone(), order.min(self.order))
    }

    pub fn set_coeff(&mut self, k: u32, c: MultiPoly) {
        self.coeffs[k as usize] = c;
    }

    pub fn map(&self, f: impl Fn(&MultiPoly) -> MultiPoly) -> Self {
        Self::new(&self.vars, self.coeffs.iter().map(f).collect(), self.order)
    }

    pub fn add(&self, other: &Observable) -> Self {
        let order = self.order.min(other.order);
        let coeffs = (0..=order as usize).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect();
        Self::new(&self.vars, coeffs, order)
    }

    pub fn sub(&self, other: &Observable) -> Self {
        let order = self.order.min(other.order);
        let coeffs = (0..=order as usize).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect();
        Self::new(&self.vars, coeffs, order)
    }

    /// True when both agree through the smaller order.
    pub fn agrees_with(&self, other: &Observable) -> bool {
        let order = self.order.min(other.order) as usize;
        self.coeffs[..=order] == other.coeffs[..=order]
    }

    /// The y-free, form-free Weyl element `Σ ν^k a_k`, exact through weight `2K + 1`.
    pub fn to_element(&self) -> WeylElement {
        let mut out = WeylElement::zero(&self.vars, 2 * self.order as i64 + 1);
        for (k, c) in self.coeffs.iter().enumerate() {
            out.add_term(
                Key {
                    nu: k as u32,
                    ..Key::scalar()
                },
                c,
            );
        }
        out
    }

    /// Scalar part of a Weyl element, known through `ν^{⌊trunc/2⌋}`.
    pub fn from_scalar_part(e: &WeylElement, max_order: u32) -> Option<Self> {
        if e.trunc() < 0 {
            return None;
        }
        let order = ((e.trunc() / 2) as u32).min(max_order);
        let mut coeffs = vec![MultiPoly::zero(e.vars()); order as usize + 1];
        for (k, v) in e.scalar_part() {
            if k <= order {
                coeffs[k as usize] = v;
            }
        }
        Some(Self::new(e.vars(), coeffs, order))
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let nu = match k {
                0 => String::new(),
                1 => "nu".to_string(),
                _ => format!("nu^{k}"),
            };
            let (neg, body) = if c.num_terms() == 1 {
                let s = c.to_string();
                match s.strip_prefix('-') {
                    Some(rest) => (true, rest.to_string()),
                    None => (false, s),
                }
            } else {
                (false, c.to_string())
            };
            let term = match (k, c.num_terms()) {
                (0, _) => body,
                (_, 1) => format!("{body}*{nu}"),
                _ => format!("({body})*{nu}"),
            };
            match (out.is_empty(), neg) {
                (true, true) => out.push_str(&format!("-{term}")),
                (true, false) => out.push_str(&term),
                (false, true) => out.push_str(&format!(" - {term}")),
                (false, false) => out.push_str(&format!(" + {term}")),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{out} + O(nu^{})", self.order + 1)
    }
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observable({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::parse_poly;

    #[test]
    fn display_and_round_trip() {
        let v = Vars::new(&["t", "q", "p"]);
        let a = Observable::new(
            &v,
            vec![parse_poly("q*p", &v).unwrap(), parse_poly("1/2", &v).unwrap(), parse_poly("q - 1", &v).unwrap()],
            3,
        );
        assert_eq!(a.to_string(), "q*p + 1/2*nu + (q - 1)*nu^2 + O(nu^4)");
        let e = a.to_element();
        assert_eq!(e.trunc(), 7);
        assert_eq!(Observable::from_scalar_part(&e, 10).unwrap(), a);
    }
}
