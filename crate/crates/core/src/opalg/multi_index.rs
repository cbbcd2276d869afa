use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{binomial, factorial};

/// Multi-index `α = (α_1, …, α_N)` of nonnegative exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::arg("multi-index must have length >= 1"));
        }
        Ok(MultiIndex(exponents))
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn plus_unit(&self, axis: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e[axis] += 1;
        MultiIndex(e)
    }

    /// `α!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    /// `binom(α, γ) = Π binom(α_i, γ_i)`.
    pub fn binomial(&self, gamma: &MultiIndex) -> f64 {
        self.0.iter().zip(&gamma.0).map(|(&a, &g)| binomial(a, g)).product()
    }

    /// Monomial `x^α`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&a, &xi)| xi.powi(a as i32)).product()
    }

    /// All multi-indices of dimension `dim` and order exactly `order`, in
    /// descending lexicographic order (`(m,0,…)` first).
    pub fn all_of_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; dim];
        fill(&mut cur, 0, order, &mut out);
        out
    }

    /// All multi-indices with order `<= order`, grouped by increasing order.
    pub fn all_up_to(dim: usize, order: u32) -> Vec<MultiIndex> {
        (0..=order).flat_map(|k| Self::all_of_order(dim, k)).collect()
    }

    /// All `γ` with `0 <= γ <= self`.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.dim())];
        for (axis, &a) in self.0.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (a as usize + 1));
            for g in &out {
                for k in 0..=a {
                    let mut e = g.0.clone();
                    e[axis] = k;
                    next.push(MultiIndex(e));
                }
            }
            out = next;
        }
        out
    }
}

fn fill(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k;
        fill(cur, pos + 1, remaining - k, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_stars_and_bars() {
        assert_eq!(MultiIndex::all_of_order(2, 3).len(), 4);
        assert_eq!(MultiIndex::all_of_order(3, 2).len(), 6);
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 6);
        assert!(MultiIndex::all_of_order(3, 4).iter().all(|a| a.order() == 4));
    }

    #[test]
    fn vandermonde_over_sub_indices() {
        let a = MultiIndex::new(vec![2, 1, 3]).unwrap();
        for j in 0..=6 {
            let s: f64 = a
                .sub_indices()
                .iter()
                .filter(|g| g.order() == j)
                .map(|g| a.binomial(g))
                .sum();
            assert_eq!(s, binomial(6, j));
        }
    }

    #[test]
    fn sub_and_add_roundtrip() {
        let a = MultiIndex::new(vec![2, 1]).unwrap();
        let g = MultiIndex::new(vec![1, 1]).unwrap();
        assert_eq!(a.checked_sub(&g).unwrap().add(&g), a);
        assert!(g.checked_sub(&a).is_none());
        assert_eq!(a.factorial(), 2.0);
        assert_eq!(a.monomial(&[3.0, 2.0]), 18.0);
    }
}
