//! Closed-form test fields with exact derivatives, band-limited families
//! and constraint validation.

pub mod band_limited;
pub mod closed_form;
pub mod constraint;
pub mod jet;
pub mod profile;
pub mod riesz_system;

use std::sync::Arc;

use crate::error::Result;
use crate::opalg::MultiIndex;
use jet::{Jet, JetSpace};

pub use band_limited::{p_lambda_family, BandLimitedField};
pub use closed_form::{
    ball_indicator, bump_mass, divfree_family, gradient_field, make_bump, mollifier_family, random_bump_field,
    random_divfree, random_poly_bump, stream_field, ClosedFormField, Expr,
};
pub use constraint::constraint_residual;
pub use profile::PlateauProfile;
pub use riesz_system::{riesz_system_field, RieszSystem};

/// All partial derivatives `∂^γ f(x)` with `|γ| <= order`.
#[derive(Clone, Debug)]
pub struct DerivativeTable {
    space: Arc<JetSpace>,
    jets: Vec<Jet>,
}

impl DerivativeTable {
    pub fn new(space: Arc<JetSpace>, jets: Vec<Jet>) -> Self {
        DerivativeTable { space, jets }
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn fiber(&self) -> usize {
        self.jets.len()
    }

    /// `∂^γ f` as a fiber vector.
    pub fn get(&self, gamma: &MultiIndex) -> Vec<f64> {
        match self.space.index_of(gamma) {
            Some(i) => {
                let fact = self.space.factorial(i);
                self.jets.iter().map(|j| j.coeffs[i] * fact).collect()
            }
            None => panic!("derivative {gamma} beyond table order {}", self.space.order),
        }
    }

    pub fn value(&self) -> Vec<f64> {
        self.jets.iter().map(|j| j.value()).collect()
    }

    /// `|D^j f| = (Σ_{|γ|=j} |∂^γ f|²)^{1/2}`.
    pub fn norm_of_order(&self, j: usize) -> f64 {
        let mut s = 0.0;
        for (i, g) in self.space.indices().iter().enumerate() {
            if g.order() as usize == j {
                let fact = self.space.factorial(i);
                for jet in &self.jets {
                    s += (jet.coeffs[i] * fact).powi(2);
                }
            }
        }
        s.sqrt()
    }
}

/// Fields that can report exact derivatives.
pub trait Differentiable: Sync {
    fn dim(&self) -> usize;
    fn fiber(&self) -> usize;
    /// Highest available derivative order.
    fn max_order(&self) -> usize;
    fn derivatives(&self, x: &[f64], order: usize) -> Result<DerivativeTable>;
}
