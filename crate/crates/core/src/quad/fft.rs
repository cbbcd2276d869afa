//! Multi-dimensional complex FFT over row-major arrays (axis 0 slowest).

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// In-place transform over every axis. The inverse is unnormalized.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], dir: Direction) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "data length does not match shape");
    let mut planner = FftPlanner::<f64>::new();
    for (axis, &len) in shape.iter().enumerate() {
        let plan = match dir {
            Direction::Forward => planner.plan_fft_forward(len),
            Direction::Inverse => planner.plan_fft_inverse(len),
        };
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        // gather every line along `axis`, transform, scatter back
        let lines: Vec<usize> = (0..outer)
            .flat_map(|o| (0..stride).map(move |s| o * len * stride + s))
            .collect();
        let transformed: Vec<Vec<Complex64>> = lines
            .par_iter()
            .map(|&start| {
                let mut line: Vec<Complex64> = (0..len).map(|k| data[start + k * stride]).collect();
                plan.process(&mut line);
                line
            })
            .collect();
        for (&start, line) in lines.iter().zip(transformed) {
            for (k, v) in line.into_iter().enumerate() {
                data[start + k * stride] = v;
            }
        }
    }
}

/// Signed integer frequency of FFT bin `k` out of `n`.
pub fn freq_index(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let shape = [4, 6];
        let orig: Vec<Complex64> = (0..24).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut d = orig.clone();
        fft_nd(&mut d, &shape, Direction::Forward);
        fft_nd(&mut d, &shape, Direction::Inverse);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a / 24.0 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        let (n0, n1) = (8, 8);
        let mut d: Vec<Complex64> = (0..64)
            .map(|i| {
                let (a, b) = (i / n1, i % n1);
                let t = 2.0 * std::f64::consts::PI * (2.0 * a as f64 / n0 as f64 + 3.0 * b as f64 / n1 as f64);
                Complex64::new(t.cos(), t.sin())
            })
            .collect();
        fft_nd(&mut d, &[n0, n1], Direction::Forward);
        for (i, v) in d.iter().enumerate() {
            let expect = if i == 2 * n1 + 3 { 64.0 } else { 0.0 };
            assert!((v.norm() - expect).abs() < 1e-9);
        }
        assert_eq!(freq_index(5, 8), -3);
        assert_eq!(freq_index(4, 8), -4);
    }
}
