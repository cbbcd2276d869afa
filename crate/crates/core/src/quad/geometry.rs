//! Exact and near-exact cell/ball overlap fractions.

/// `F(u) = ∫_0^u sqrt(r² − t²) dt`
fn circle_primitive(u: f64, r: f64) -> f64 {
    let u = u.clamp(-r, r);
    0.5 * (u * (r * r - u * u).max(0.0).sqrt() + r * r * (u / r).asin())
}

/// Area of `{0 <= s <= x, 0 <= t <= y, s² + t² < r²}` for `x, y >= 0`.
fn quadrant_area(x: f64, y: f64, r: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    if x * x + y * y <= r * r {
        return x * y;
    }
    let xs = x.min(r);
    let ys = y.min(r);
    let ustar = (r * r - ys * ys).max(0.0).sqrt();
    let split = xs.min(ustar);
    ys * split + circle_primitive(xs, r) - circle_primitive(split, r)
}

fn signed_corner(x: f64, y: f64, r: f64) -> f64 {
    x.signum() * y.signum() * quadrant_area(x.abs(), y.abs(), r)
}

/// Area of the rectangle `[x0,x1]×[y0,y1]` inside the disk `|p| < r`.
pub fn rect_disk_area(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> f64 {
    signed_corner(x1, y1, r) - signed_corner(x0, y1, r) - signed_corner(x1, y0, r) + signed_corner(x0, y0, r)
}

/// Fraction of the cube of side `h` centred at `rel` lying inside the ball
/// `|p| < r` centred at the origin. Exact in one and two dimensions;
/// midpoint subsampling (16 per axis) in higher dimensions.
pub fn ball_cell_fraction(rel: &[f64], h: f64, r: f64) -> f64 {
    let half = 0.5 * h;
    let dist = rel.iter().map(|v| v * v).sum::<f64>().sqrt();
    let diag = half * (rel.len() as f64).sqrt();
    if dist + diag <= r {
        return 1.0;
    }
    if dist - diag >= r {
        return 0.0;
    }
    match rel.len() {
        1 => {
            let lo = (rel[0] - half).max(-r);
            let hi = (rel[0] + half).min(r);
            ((hi - lo) / h).max(0.0)
        }
        2 => rect_disk_area(rel[0] - half, rel[0] + half, rel[1] - half, rel[1] + half, r) / (h * h),
        dim => {
            let m = 16usize;
            let total = m.pow(dim as u32);
            let mut inside = 0usize;
            let mut idx = vec![0usize; dim];
            for _ in 0..total {
                let d2: f64 = (0..dim)
                    .map(|k| {
                        let p = rel[k] - half + (idx[k] as f64 + 0.5) * h / m as f64;
                        p * p
                    })
                    .sum();
                if d2 < r * r {
                    inside += 1;
                }
                for k in 0..dim {
                    idx[k] += 1;
                    if idx[k] < m {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            inside as f64 / total as f64
        }
    }
}

/// Fraction of the cell inside the annulus `a <= |p| < b`.
pub fn annulus_cell_fraction(rel: &[f64], h: f64, a: f64, b: f64) -> f64 {
    (ball_cell_fraction(rel, h, b) - ball_cell_fraction(rel, h, a)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn full_disk_in_big_square() {
        assert_relative_eq!(rect_disk_area(-2.0, 2.0, -2.0, 2.0, 1.0), PI, max_relative = 1e-14);
        assert_relative_eq!(rect_disk_area(0.0, 2.0, 0.0, 2.0, 1.0), PI / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn fractions_tile_the_disk() {
        let h = 0.1;
        let n = 30;
        let mut s = 0.0;
        for i in -n..n {
            for j in -n..n {
                let c = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
                s += ball_cell_fraction(&c, h, 1.0) * h * h;
            }
        }
        assert_relative_eq!(s, PI, max_relative = 1e-12);
    }

    #[test]
    fn rectangle_against_brute_force() {
        let (x0, x1, y0, y1, r) = (0.3, 0.9, -0.4, 0.7, 0.8);
        let m = 2000;
        let mut hits = 0;
        for i in 0..m {
            for j in 0..m {
                let x = x0 + (i as f64 + 0.5) * (x1 - x0) / m as f64;
                let y = y0 + (j as f64 + 0.5) * (y1 - y0) / m as f64;
                if x * x + y * y < r * r {
                    hits += 1;
                }
            }
        }
        let brute = hits as f64 / (m * m) as f64 * (x1 - x0) * (y1 - y0);
        assert_relative_eq!(rect_disk_area(x0, x1, y0, y1, r), brute, max_relative = 1e-4);
    }
}
