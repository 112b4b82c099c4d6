use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::imgcore::contour::{resample_closed, signed_area};
use crate::imgcore::{Contour, Point};

use super::{SnakeConfig, VectorField};

/// Contour coordinates are kept on a dyadic grid so that integer
/// translations are exact in floating point.
const GRID: f64 = (1u64 << 20) as f64;

#[inline]
fn snap(v: f64) -> f64 {
    (v * GRID).round() / GRID
}

/// Periodic pentadiagonal internal-energy matrix `A` for `n` points:
/// `(A x)_i = β(x_{i-2} − 4x_{i-1} + 6x_i − 4x_{i+1} + x_{i+2}) − α(x_{i-1} − 2x_i + x_{i+1})`.
pub fn internal_matrix(n: usize, alpha: f64, beta: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    let band = [
        (-2isize, beta),
        (-1, -alpha - 4.0 * beta),
        (0, 2.0 * alpha + 6.0 * beta),
        (1, -alpha - 4.0 * beta),
        (2, beta),
    ];
    for i in 0..n {
        for &(d, c) in &band {
            let j = (i as isize + d).rem_euclid(n as isize) as usize;
            a[(i, j)] += c;
        }
    }
    a
}

/// `(I + γA)⁻¹`, or [`Error::SingularSystem`].
fn step_operator(n: usize, cfg: &SnakeConfig) -> Result<DMatrix<f64>> {
    let m = DMatrix::identity(n, n) + internal_matrix(n, cfg.alpha, cfg.beta) * cfg.gamma;
    let inv = m.try_inverse().ok_or(Error::SingularSystem)?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(inv)
}

/// Unit outward normals of a closed polygon from central tangents.
fn outward_normals(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    let n = xs.len();
    let pts: Vec<Point> = xs.iter().zip(ys).map(|(&x, &y)| Point::new(x, y)).collect();
    // negative shoelace area = counterclockwise on screen
    let ccw_on_screen = signed_area(&pts) < 0.0;
    (0..n)
        .map(|i| {
            let (p, q) = ((i + n - 1) % n, (i + 1) % n);
            let (tx, ty) = (xs[q] - xs[p], ys[q] - ys[p]);
            let len = tx.hypot(ty);
            if len == 0.0 {
                return (0.0, 0.0);
            }
            if ccw_on_screen {
                (-ty / len, tx / len)
            } else {
                (ty / len, -tx / len)
            }
        })
        .collect()
}

/// Evolves a closed snake under the field and internal forces.
///
/// Each iteration solves `(I + γA) x_{t+1} = x_t + γ F_ext(x_t)` with
/// `F_ext = κ_gvf · field + κ_balloon · n̂`, clamps points to the field
/// bounds and, every `resample_every` iterations, re-spaces them uniformly in
/// arc length. The point count never changes. Arithmetic runs in
/// coordinates relative to an integer origin on a dyadic grid, so
/// translating the contour and the field by whole pixels translates the
/// result exactly.
pub fn evolve(contour: &Contour, field: &VectorField, cfg: &SnakeConfig) -> Result<Contour> {
    let n = contour.len();
    if n < 3 {
        return Err(Error::TooFewPoints);
    }
    let inv = step_operator(n, cfg)?;

    let ox = contour.points().iter().map(|p| p.x).fold(f64::INFINITY, f64::min).floor();
    let oy = contour.points().iter().map(|p| p.y).fold(f64::INFINITY, f64::min).floor();
    let (oxi, oyi) = (ox as i64, oy as i64);
    let (min_x, max_x) = (-ox, (field.width - 1) as f64 - ox);
    let (min_y, max_y) = (-oy, (field.height - 1) as f64 - oy);

    let mut xs: Vec<f64> = contour
        .points()
        .iter()
        .map(|p| snap(p.x - ox).clamp(min_x, max_x))
        .collect();
    let mut ys: Vec<f64> = contour
        .points()
        .iter()
        .map(|p| snap(p.y - oy).clamp(min_y, max_y))
        .collect();

    let sample = |lx: f64, ly: f64| {
        let (fx, fy) = (lx.floor(), ly.floor());
        let gx = (fx as i64 + oxi).clamp(0, field.width as i64 - 1) as usize;
        let gy = (fy as i64 + oyi).clamp(0, field.height as i64 - 1) as usize;
        field.sample_at(gx, gy, lx - fx, ly - fy)
    };

    let mut rhs_x = nalgebra::DVector::zeros(n);
    let mut rhs_y = nalgebra::DVector::zeros(n);
    for it in 0..cfg.iterations {
        let normals = outward_normals(&xs, &ys);
        for i in 0..n {
            let (mut fu, mut fv) = sample(xs[i], ys[i]);
            if cfg.normalize_field {
                let mag = fu.hypot(fv);
                if mag > 1e-12 {
                    fu /= mag;
                    fv /= mag;
                } else {
                    fu = 0.0;
                    fv = 0.0;
                }
            }
            let ext_x = cfg.kappa_gvf * fu + cfg.kappa_balloon * normals[i].0;
            let ext_y = cfg.kappa_gvf * fv + cfg.kappa_balloon * normals[i].1;
            rhs_x[i] = xs[i] + cfg.gamma * ext_x;
            rhs_y[i] = ys[i] + cfg.gamma * ext_y;
        }
        let nx = &inv * &rhs_x;
        let ny = &inv * &rhs_y;
        for i in 0..n {
            xs[i] = snap(nx[i]).clamp(min_x, max_x);
            ys[i] = snap(ny[i]).clamp(min_y, max_y);
        }
        if cfg.resample_every > 0 && (it + 1) % cfg.resample_every == 0 && it + 1 < cfg.iterations {
            let pts: Vec<Point> = xs.iter().zip(&ys).map(|(&x, &y)| Point::new(x, y)).collect();
            let re = resample_closed(&pts, n);
            if re.len() == n {
                for (i, p) in re.iter().enumerate() {
                    xs[i] = snap(p.x).clamp(min_x, max_x);
                    ys[i] = snap(p.y).clamp(min_y, max_y);
                }
            }
        }
    }
    if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let points = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| Point::new(x + ox, y + oy))
        .collect();
    Contour::new(points)
}
