//! Rectilinear heightfield bottom: depths on a (possibly non-uniform) grid,
//! bilinear inside each cell and held constant beyond the grid edge.

use crate::error::{Error, Result};
use crate::vec3::Vec3;

#[derive(Clone, Debug, PartialEq)]
pub struct Heightfield {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major, `depths[j * nx + i]` is the depth at `(xs[i], ys[j])`.
    depths: Vec<f64>,
    min_depth: f64,
}

fn strictly_increasing(field: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::validation(field, "needs at least one grid line"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation(field, "grid coordinates must be finite"));
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(field, "grid spacing must be positive"));
    }
    Ok(())
}

/// Roots of `a t^2 + b t + c` in ascending order.
fn quadratic_roots(a: f64, b: f64, c: f64) -> ([f64; 2], usize) {
    let scale = b.abs().max(c.abs()).max(1.0);
    if a.abs() <= 1e-14 * scale {
        if b == 0.0 {
            return ([0.0; 2], 0);
        }
        return ([-c / b, 0.0], 1);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return ([0.0; 2], 0);
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    ([r1.min(r2), r1.max(r2)], 2)
}

struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    a: f64,
    b: f64,
    c: f64,
    e: f64,
}

impl Cell {
    fn uv(&self, x: f64, y: f64) -> (f64, f64, f64, f64) {
        let (du, dv) = (self.x1 - self.x0, self.y1 - self.y0);
        let (u, su) = if du > 0.0 {
            ((x - self.x0) / du, 1.0 / du)
        } else {
            (0.0, 0.0)
        };
        let (v, sv) = if dv > 0.0 {
            ((y - self.y0) / dv, 1.0 / dv)
        } else {
            (0.0, 0.0)
        };
        (u, v, su, sv)
    }

    fn depth(&self, x: f64, y: f64) -> f64 {
        let (u, v, _, _) = self.uv(x, y);
        self.a + self.b * u + self.c * v + self.e * u * v
    }

    fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let (u, v, su, sv) = self.uv(x, y);
        ((self.b + self.e * v) * su, (self.c + self.e * u) * sv)
    }
}

impl Heightfield {
    /// `depths[j][i]` is the depth (positive down) at `(xs[i], ys[j])`.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, depths: Vec<Vec<f64>>) -> Result<Self> {
        strictly_increasing("xs", &xs)?;
        strictly_increasing("ys", &ys)?;
        if depths.len() != ys.len() || depths.iter().any(|row| row.len() != xs.len()) {
            return Err(Error::validation(
                "depths",
                format!("expected {} rows of {} values", ys.len(), xs.len()),
            ));
        }
        let depths: Vec<f64> = depths.into_iter().flatten().collect();
        if depths.iter().any(|z| !z.is_finite() || *z <= 0.0) {
            return Err(Error::validation(
                "depths",
                "every depth must be finite and below the surface",
            ));
        }
        let min_depth = depths.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Heightfield {
            xs,
            ys,
            depths,
            min_depth,
        })
    }

    /// A single step in depth across the line `x = x_step`, over a ramp of width `ramp`.
    pub fn step(x_step: f64, ramp: f64, near_depth: f64, far_depth: f64, half_width: f64) -> Result<Self> {
        let far = x_step + half_width.max(1.0);
        let near = (x_step - ramp) - half_width.max(1.0);
        let xs = vec![near, x_step - ramp, x_step, far];
        let row = vec![near_depth, near_depth, far_depth, far_depth];
        Self::new(xs, vec![-half_width, half_width], vec![row.clone(), row])
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.depths.chunks(self.xs.len()).map(|r| r.to_vec()).collect()
    }

    pub fn min_depth(&self) -> f64 {
        self.min_depth
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.depths[j * self.xs.len() + i]
    }

    /// Extended cell index along one axis: 0 is below the first line, `len` above the last.
    fn cell_index(lines: &[f64], x: f64) -> usize {
        lines.partition_point(|&l| l <= x)
    }

    fn bounds(lines: &[f64], k: usize) -> (f64, f64) {
        let lo = if k == 0 { f64::NEG_INFINITY } else { lines[k - 1] };
        let hi = if k == lines.len() { f64::INFINITY } else { lines[k] };
        (lo, hi)
    }

    fn cell(&self, i: usize, j: usize) -> Cell {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        let (i0, i1) = (i.saturating_sub(1), i.min(nx - 1));
        let (j0, j1) = (j.saturating_sub(1), j.min(ny - 1));
        let h00 = self.at(i0, j0);
        let h10 = self.at(i1, j0);
        let h01 = self.at(i0, j1);
        let h11 = self.at(i1, j1);
        Cell {
            x0: self.xs[i0],
            x1: self.xs[i1],
            y0: self.ys[j0],
            y1: self.ys[j1],
            a: h00,
            b: h10 - h00,
            c: h01 - h00,
            e: h00 - h10 - h01 + h11,
        }
    }

    pub fn depth_at(&self, x: f64, y: f64) -> f64 {
        self.cell(Self::cell_index(&self.xs, x), Self::cell_index(&self.ys, y))
            .depth(x, y)
    }

    /// Unit normal pointing up into the water (negative z).
    pub fn normal_at(&self, x: f64, y: f64) -> Vec3 {
        let (gx, gy) = self
            .cell(Self::cell_index(&self.xs, x), Self::cell_index(&self.ys, y))
            .gradient(x, y);
        Vec3::new(gx, gy, -1.0).normalized()
    }

    /// First crossing into the floor along `origin + t dir` for `t` in `(t_min, t_max]`.
    pub fn intersect(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Option<(f64, Vec3)> {
        let deepest_reach = origin.z.max(origin.z + dir.z * t_max);
        if deepest_reach < self.min_depth {
            return None;
        }
        let mut i = Self::cell_index(&self.xs, origin.x);
        let mut j = Self::cell_index(&self.ys, origin.y);
        let mut t_in = 0.0;
        loop {
            let (xlo, xhi) = Self::bounds(&self.xs, i);
            let (ylo, yhi) = Self::bounds(&self.ys, j);
            let tx = if dir.x > 0.0 {
                (xhi - origin.x) / dir.x
            } else if dir.x < 0.0 {
                (xlo - origin.x) / dir.x
            } else {
                f64::INFINITY
            };
            let ty = if dir.y > 0.0 {
                (yhi - origin.y) / dir.y
            } else if dir.y < 0.0 {
                (ylo - origin.y) / dir.y
            } else {
                f64::INFINITY
            };
            let t_out = tx.min(ty).min(t_max);
            if let Some(t) = self.cell_crossing(i, j, origin, dir, t_in, t_out, t_min) {
                let p = origin + dir * t;
                return Some((t, self.normal_at(p.x, p.y)));
            }
            if t_out >= t_max {
                return None;
            }
            if tx <= ty {
                i = if dir.x > 0.0 { i + 1 } else { i - 1 };
            }
            if ty <= tx {
                j = if dir.y > 0.0 { j + 1 } else { j - 1 };
            }
            t_in = t_out;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn cell_crossing(&self, i: usize, j: usize, o: Vec3, d: Vec3, t_in: f64, t_out: f64, t_min: f64) -> Option<f64> {
        let cell = self.cell(i, j);
        let (u0, v0, su, sv) = cell.uv(o.x, o.y);
        let (su, sv) = (d.x * su, d.y * sv);
        // depth along the ray minus floor depth; positive once inside the floor
        let qa = -cell.e * su * sv;
        let qb = d.z - cell.b * su - cell.c * sv - cell.e * (u0 * sv + v0 * su);
        let qc = o.z - (cell.a + cell.b * u0 + cell.c * v0 + cell.e * u0 * v0);
        let (roots, n) = quadratic_roots(qa, qb, qc);
        let slack = 1e-12 * (1.0 + t_out.abs());
        roots[..n]
            .iter()
            .copied()
            .filter(|&t| t > t_min && t >= t_in - slack && t <= t_out + slack)
            .find(|&t| 2.0 * qa * t + qb > 0.0)
    }
}
