//! Radial integrals and suprema of weights with power-law head and tail
//! corrections.

use std::f64::consts::PI;

use super::weight::Weight;
use crate::numerics::{beta_reg, gauss_legendre, log_nodes, sphere_area};

pub(crate) const PANELS_PER_DECADE: usize = 8;
pub(crate) const ORDER: usize = 16;

/// `∫_a^b f(r) dr` on log panels split at `breaks`.
pub fn log_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&r| r > a && r < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .flat_map(|w| log_nodes(w[0], w[1], PANELS_PER_DECADE, ORDER))
        .map(|(r, w)| w * f(r))
        .sum()
}

/// `∫_{a<|x|<b} w(|x|)^s dx` without head or tail corrections.
pub fn shell_integral(w: &Weight, s: f64, dim: usize, a: f64, b: f64) -> f64 {
    let area = sphere_area(dim);
    log_integral(
        |r| area * w.eval_r(r).powf(s) * r.powi(dim as i32 - 1),
        a,
        b,
        &w.breakpoints(),
    )
}

/// Exponent of `w^s` near the origin; `None` for the zero weight.
pub fn head_exponent(w: &Weight, s: f64) -> Option<f64> {
    w.exponent_at_zero().map(|a| a * s)
}

/// `∫_{|x|<h} w^s` from the power-law head; `∞` if not integrable.
pub fn head_integral(w: &Weight, s: f64, dim: usize, h: f64) -> f64 {
    match head_exponent(w, s) {
        None => 0.0,
        Some(a) if a + dim as f64 <= 0.0 => f64::INFINITY,
        Some(a) => sphere_area(dim) * w.eval_r(h).powf(s) * h.powi(dim as i32) / (a + dim as f64),
    }
}

/// `∫_{|x|>t} w^s · |x|^extra` from the power-law tail; `∞` if divergent,
/// 0 for compactly supported weights beyond their support.
pub fn tail_integral(w: &Weight, s: f64, extra: f64, dim: usize, t: f64) -> f64 {
    if w.support_radius().is_some_and(|r| r <= t) {
        return 0.0;
    }
    match w.exponent_at_infinity() {
        None => 0.0,
        Some(a) => {
            let e = a * s + extra + dim as f64;
            if e >= 0.0 {
                f64::INFINITY
            } else {
                sphere_area(dim) * w.eval_r(t).powf(s) * t.powf(extra + dim as f64) / -e
            }
        }
    }
}

/// `sup_{lo < r < hi} f(r)` over log-spaced samples.
pub fn radial_sup(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let count = 400;
    let (a, b) = (lo.ln(), hi.ln());
    (0..=count)
        .map(|i| f((a + (b - a) * i as f64 / count as f64).exp()))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `sup_{|x| < R} 1/w(x)`, using the power-law head below `h`.
pub fn sup_inverse_inside(w: &Weight, radius: f64, h: f64) -> f64 {
    match w.exponent_at_zero() {
        None => f64::INFINITY,
        Some(a) if a > 0.0 => f64::INFINITY,
        Some(_) => radial_sup(|r| 1.0 / w.eval_r(r), h.min(radius * 1e-6), radius),
    }
}

/// `sup_{|x| > R} 1/w(x)`, using the power-law tail beyond `t`.
pub fn sup_inverse_outside(w: &Weight, radius: f64, t: f64) -> f64 {
    if w.support_radius().is_some() {
        return f64::INFINITY;
    }
    match w.exponent_at_infinity() {
        None => f64::INFINITY,
        Some(a) if a < 0.0 => f64::INFINITY,
        Some(_) => radial_sup(|r| 1.0 / w.eval_r(r), radius, t.max(radius * 1e6)),
    }
}

/// Fraction of the sphere `|x| = r` inside the ball `B(c, R)` with `|c| = dist`.
pub fn sphere_fraction_in_ball(dim: usize, r: f64, dist: f64, radius: f64) -> f64 {
    if dist == 0.0 || r + dist <= radius {
        return if r < radius { 1.0 } else { 0.0 };
    }
    if r <= dist - radius || r >= dist + radius {
        return 0.0;
    }
    let cos0 = ((r * r + dist * dist - radius * radius) / (2.0 * r * dist)).clamp(-1.0, 1.0);
    match dim {
        // points ±r: +r is inside, −r is not
        1 => return 0.5,
        2 => return cos0.acos() / PI,
        3 => return 0.5 * (1.0 - cos0),
        _ => {}
    }
    let sin2 = 1.0 - cos0 * cos0;
    let half = 0.5 * beta_reg(0.5 * (dim as f64 - 1.0), 0.5, sin2);
    if cos0 >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// `∫_{B(c,R)} w(|x|)^s dx` for `|c| = dist`, exact up to quadrature.
pub fn ball_integral(w: &Weight, s: f64, dim: usize, dist: f64, radius: f64, h: f64) -> f64 {
    let area = sphere_area(dim);
    let f = |r: f64| area * w.eval_r(r).powf(s) * r.powi(dim as i32 - 1);
    let lo = (dist - radius).abs();
    let hi = dist + radius;
    let mut total = 0.0;
    if dist < radius {
        let h = h.min(0.5 * lo.max(radius * 1e-12));
        total += head_integral(w, s, dim, h);
        total += log_integral(f, h, lo, &w.breakpoints());
    }
    if dist > 0.0 {
        // the sphere fraction has square-root endpoints; r = m + d cos θ smooths them
        let (m, d) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let rule = gauss_legendre(64);
        let panels = 8;
        for p in 0..panels {
            let (a, b) = (PI * p as f64 / panels as f64, PI * (p + 1) as f64 / panels as f64);
            let (tm, th) = (0.5 * (a + b), 0.5 * (b - a));
            for &(x, wq) in rule {
                let t = tm + th * x;
                let r = m + d * t.cos();
                total += wq * th * d * t.sin() * f(r) * sphere_fraction_in_ball(dim, r, dist, radius);
            }
        }
    }
    total
}

/// Volume of `B(0, R)` in `R^N`.
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    crate::numerics::ball_volume(dim) * radius.powi(dim as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_fraction_matches_circle_geometry() {
        // r = dist = R: the circle |x| = 1 meets B(e1, 1) over |θ| < π/3
        assert_relative_eq!(
            sphere_fraction_in_ball(2, 1.0, 1.0, 1.0),
            1.0 / 3.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(sphere_fraction_in_ball(3, 1.0, 1.0, 1.0), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn ball_integrals() {
        let one = Weight::one();
        for (dist, r) in [(0.0, 1.0), (1.0, 0.5), (0.3, 1.0), (2.0, 2.0)] {
            assert_relative_eq!(
                ball_integral(&one, 1.0, 2, dist, r, 1e-6),
                PI * r * r,
                max_relative = 1e-9
            );
            assert_relative_eq!(
                ball_integral(&one, 1.0, 3, dist, r, 1e-6),
                4.0 / 3.0 * PI * r * r * r,
                max_relative = 1e-9
            );
        }
        // ∫_{B(0,1)} |x|^{-1} dx = 2π in the plane
        let w = Weight::power(-1.0);
        assert_relative_eq!(ball_integral(&w, 1.0, 2, 0.0, 1.0, 1e-4), 2.0 * PI, max_relative = 1e-9);
        assert!(ball_integral(&w, 2.0, 2, 0.0, 1.0, 1e-4).is_infinite());
    }

    #[test]
    fn heads_and_tails() {
        let w = Weight::power(-3.0);
        assert_relative_eq!(tail_integral(&w, 1.0, 0.0, 2, 2.0), PI, max_relative = 1e-12);
        assert!(tail_integral(&Weight::one(), 1.0, 0.0, 2, 2.0).is_infinite());
        assert_relative_eq!(
            sup_inverse_inside(&Weight::power(-1.0), 3.0, 1e-4),
            3.0,
            max_relative = 1e-12
        );
        assert!(sup_inverse_inside(&Weight::power(0.5), 3.0, 1e-4).is_infinite());
    }
}
