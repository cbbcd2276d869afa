//! Truncated multivariate Taylor series ("jets") for exact derivatives of
//! closed-form expressions.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use crate::opalg::MultiIndex;

/// Index tables for jets in `dim` variables truncated at total degree `order`.
#[derive(Debug)]
pub struct JetSpace {
    pub dim: usize,
    pub order: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `(i, j, k)` with `indices[i] + indices[j] = indices[k]`.
    products: Vec<(u32, u32, u32)>,
    factorials: Vec<f64>,
    /// For each axis, `(src, dst, factor)` realising `∂_axis` into the
    /// space of order `order - 1`.
    shifts: Vec<Vec<(u32, u32, f64)>>,
}

thread_local! {
    static SPACES: RefCell<HashMap<(usize, usize), Arc<JetSpace>>> = RefCell::new(HashMap::new());
}

impl JetSpace {
    fn build(dim: usize, order: usize) -> Self {
        let indices = MultiIndex::all_up_to(dim, order as u32);
        let lookup: HashMap<MultiIndex, usize> = indices.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if (a.order() + b.order()) as usize <= order {
                    let k = lookup[&a.add(b)];
                    products.push((i as u32, j as u32, k as u32));
                }
            }
        }
        let factorials = indices.iter().map(|a| a.factorial()).collect();
        let mut shifts = vec![Vec::new(); dim];
        if order > 0 {
            let lower = MultiIndex::all_up_to(dim, order as u32 - 1);
            for (dst, mu) in lower.iter().enumerate() {
                for (axis, shift) in shifts.iter_mut().enumerate() {
                    let src = lookup[&mu.plus_unit(axis)];
                    let factor = (mu.exponents()[axis] + 1) as f64;
                    shift.push((src as u32, dst as u32, factor));
                }
            }
        }
        JetSpace {
            dim,
            order,
            indices,
            lookup,
            products,
            factorials,
            shifts,
        }
    }

    /// Shared space for `(dim, order)`; cached per thread.
    pub fn get(dim: usize, order: usize) -> Arc<JetSpace> {
        SPACES.with(|s| {
            s.borrow_mut()
                .entry((dim, order))
                .or_insert_with(|| Arc::new(JetSpace::build(dim, order)))
                .clone()
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub fn factorial(&self, i: usize) -> f64 {
        self.factorials[i]
    }
}

/// Taylor coefficients `c_γ` of `f(x + h) = Σ c_γ h^γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(space: &JetSpace, c: f64) -> Self {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = c;
        Jet { coeffs }
    }

    /// The coordinate function `x_axis` expanded at `value`.
    pub fn variable(space: &JetSpace, axis: usize, value: f64) -> Self {
        let mut j = Self::constant(space, value);
        if space.order > 0 {
            j.coeffs[space.lookup[&MultiIndex::unit(space.dim, axis)]] = 1.0;
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn add(&self, other: &Jet) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn add_const(mut self, c: f64) -> Jet {
        self.coeffs[0] += c;
        self
    }

    pub fn scale(mut self, s: f64) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        self
    }

    pub fn mul(&self, other: &Jet, space: &JetSpace) -> Jet {
        let mut out = vec![0.0; space.len()];
        for &(i, j, k) in &space.products {
            out[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Jet { coeffs: out }
    }

    /// `g ∘ self` where `taylor[k] = g^{(k)}(self.value()) / k!`.
    pub fn compose(&self, taylor: &[f64], space: &JetSpace) -> Jet {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut out = Jet::constant(space, taylor[0]);
        let mut power = Jet::constant(space, 1.0);
        for t in taylor.iter().take(space.order + 1).skip(1) {
            power = power.mul(&delta, space);
            if *t != 0.0 {
                out = out.add(&power.clone().scale(*t));
            }
        }
        out
    }

    pub fn exp(&self, space: &JetSpace) -> Jet {
        let e = self.value().exp();
        let mut t = Vec::with_capacity(space.order + 1);
        let mut fact = 1.0;
        for k in 0..=space.order {
            if k > 0 {
                fact *= k as f64;
            }
            t.push(e / fact);
        }
        self.compose(&t, space)
    }

    pub fn recip(&self, space: &JetSpace) -> Jet {
        let v = self.value();
        let t: Vec<f64> = (0..=space.order)
            .map(|k| (if k % 2 == 0 { 1.0 } else { -1.0 }) / v.powi(k as i32 + 1))
            .collect();
        self.compose(&t, space)
    }

    /// `self^p` for real `p` (requires a positive value unless `p` is a
    /// nonnegative integer).
    pub fn powf(&self, p: f64, space: &JetSpace) -> Jet {
        let v = self.value();
        let mut t = Vec::with_capacity(space.order + 1);
        let mut c = 1.0;
        for k in 0..=space.order {
            if k > 0 {
                c *= (p - (k as f64 - 1.0)) / k as f64;
            }
            t.push(c * v.powf(p - k as f64));
        }
        self.compose(&t, space)
    }

    /// `∂_axis self`, living in the space of one lower order.
    pub fn partial(&self, axis: usize, space: &JetSpace, lower: &JetSpace) -> Jet {
        let mut out = vec![0.0; lower.len()];
        for &(src, dst, f) in &space.shifts[axis] {
            out[dst as usize] += f * self.coeffs[src as usize];
        }
        Jet { coeffs: out }
    }

    /// Drop terms above `lower.order`.
    pub fn truncate(&self, lower: &JetSpace) -> Jet {
        Jet {
            coeffs: self.coeffs[..lower.len()].to_vec(),
        }
    }

    /// `∂^γ f` at the expansion point, `γ!·c_γ`.
    pub fn derivative(&self, space: &JetSpace, alpha: &MultiIndex) -> f64 {
        let i = space.lookup[alpha];
        self.coeffs[i] * space.factorials[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_rule_for_xy() {
        let s = JetSpace::get(2, 3);
        let x = Jet::variable(&s, 0, 2.0);
        let y = Jet::variable(&s, 1, 3.0);
        let f = x.mul(&x, &s).mul(&y, &s); // x² y
        let d = |e: Vec<u32>| f.derivative(&s, &MultiIndex::new(e).unwrap());
        assert_eq!(d(vec![0, 0]), 12.0);
        assert_eq!(d(vec![1, 0]), 12.0);
        assert_eq!(d(vec![0, 1]), 4.0);
        assert_eq!(d(vec![2, 1]), 2.0);
        assert_eq!(d(vec![1, 1]), 4.0);
        assert_eq!(d(vec![0, 2]), 0.0);
    }

    #[test]
    fn exp_recip_pow_match_calculus() {
        let s = JetSpace::get(1, 4);
        let x = Jet::variable(&s, 0, 0.7);
        let e = x.clone().scale(2.0).exp(&s);
        for k in 0..=4u32 {
            let a = MultiIndex::new(vec![k]).unwrap();
            assert_relative_eq!(
                e.derivative(&s, &a),
                2f64.powi(k as i32) * 1.4f64.exp(),
                max_relative = 1e-13
            );
        }
        let r = x.recip(&s);
        assert_relative_eq!(
            r.derivative(&s, &MultiIndex::new(vec![3]).unwrap()),
            -6.0 / 0.7f64.powi(4),
            max_relative = 1e-13
        );
        let p = x.powf(2.5, &s);
        assert_relative_eq!(
            p.derivative(&s, &MultiIndex::new(vec![2]).unwrap()),
            2.5 * 1.5 * 0.7f64.powf(0.5),
            max_relative = 1e-13
        );
    }

    #[test]
    fn partial_shifts_coefficients() {
        let s = JetSpace::get(2, 3);
        let lower = JetSpace::get(2, 2);
        let x = Jet::variable(&s, 0, 1.5);
        let y = Jet::variable(&s, 1, -0.5);
        let f = x.mul(&y, &s).mul(&y, &s).exp(&s); // exp(x y²)
        let fx = f.partial(0, &s, &lower);
        for a in lower.indices() {
            let shifted = a.plus_unit(0);
            assert_relative_eq!(
                fx.derivative(&lower, a),
                f.derivative(&s, &shifted),
                max_relative = 1e-13
            );
        }
    }
}
