use crate::error::Result;
use crate::quad::transform::{riesz_transform, spectral_derivative};
use crate::quad::FieldSamples;

/// `Ru = (R_1 u, …, R_N u)` together with its curl-structure residuals.
#[derive(Clone, Debug)]
pub struct RieszSystem {
    pub field: FieldSamples,
    /// `max_{i<j} max |∂_i R_j u − ∂_j R_i u|`, relative to `max |∂_i R_j u|`.
    pub curl_residual: f64,
    /// `‖Σ_j R_j R_j u + u‖₂ / ‖u‖₂`
    pub identity_residual: f64,
}

pub fn riesz_system_field(u: &FieldSamples) -> Result<RieszSystem> {
    let dim = u.grid.dim;
    let comps: Vec<FieldSamples> = (0..dim).map(|j| riesz_transform(u, j)).collect::<Result<_>>()?;
    let mut curl = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let a = spectral_derivative(&comps[j], i)?;
            let b = spectral_derivative(&comps[i], j)?;
            for (x, y) in a.values.iter().zip(&b.values) {
                curl = curl.max((x - y).abs());
                scale = scale.max(x.abs()).max(y.abs());
            }
        }
    }
    let mut acc = vec![0.0; u.values.len()];
    for (j, c) in comps.iter().enumerate() {
        let rr = riesz_transform(c, j)?;
        for (a, v) in acc.iter_mut().zip(&rr.values) {
            *a += v;
        }
    }
    let norm = u.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let err = acc
        .iter()
        .zip(&u.values)
        .map(|(a, v)| (a + v).powi(2))
        .sum::<f64>()
        .sqrt();
    let field = FieldSamples::from_components(u.grid, &comps.iter().map(|c| c.values.clone()).collect::<Vec<_>>())?;
    Ok(RieszSystem {
        field,
        curl_residual: if scale == 0.0 { 0.0 } else { curl / scale },
        identity_residual: if norm == 0.0 { 0.0 } else { err / norm },
    })
}
