use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * inv;
        i /= b;
        inv /= base as f64;
    }
    out
}

fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-12 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

/// Low-discrepancy unit vectors: Halton points pushed through the normal
/// quantile and normalized. In one dimension returns `±1`.
pub fn halton_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        return (0..count).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect();
    }
    if dim == 2 {
        return (0..count)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * radical_inverse(i as u64 + 1, 2);
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let v: Vec<f64> = (0..dim)
            .map(|d| {
                let u = radical_inverse(i, PRIMES[d % PRIMES.len()]);
                std::f64::consts::SQRT_2 * puruspe::inverf(2.0 * u - 1.0)
            })
            .collect();
        if let Some(v) = normalize(v) {
            out.push(v);
        }
        i += 1;
    }
    out
}

/// Seeded uniformly random unit vectors.
pub fn random_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(v) = normalize(v) {
            out.push(v);
        }
    }
    out
}

/// Half low-discrepancy, half random directions.
pub fn mixed_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let h = count.div_ceil(2);
    let mut v = halton_directions(dim, h);
    v.extend(random_directions(dim, count - h, seed));
    v
}
