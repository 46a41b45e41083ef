//! Panel-doubling composite trapezoid rule over piecewise-smooth integrands.

use crate::error::{Error, Result};

/// Convergence contract for the beam-pattern averages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    /// Stop once a doubling changes the integral by less than this many dB.
    pub tol_db: f64,
    pub min_panels: usize,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            tol_db: 0.01,
            min_panels: 32,
            max_panels: 1 << 18,
        }
    }
}

impl Quadrature {
    /// Integrates `f` over `[a, b]`. `breaks` are interior points where `f` may be
    /// discontinuous; each segment's endpoints are sampled just inside the segment
    /// so a jump at a gate edge is seen from the open side. Segments for which
    /// `active(midpoint)` is false contribute nothing.
    pub fn integrate<F, A>(&self, f: F, active: A, a: f64, b: f64, breaks: &[f64]) -> Result<f64>
    where
        F: Fn(f64) -> f64,
        A: Fn(f64) -> bool,
    {
        let mut points: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
        points.push(a);
        points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        points.push(b);
        points.sort_by(f64::total_cmp);
        points.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));

        let segments: Vec<(f64, f64)> = points
            .windows(2)
            .map(|w| (w[0], w[1]))
            .filter(|&(lo, hi)| hi > lo && active(0.5 * (lo + hi)))
            .collect();
        if segments.is_empty() {
            return Ok(0.0);
        }

        let nudge = |lo: f64, hi: f64| 1e-12 * (hi - lo);
        // Per segment: current panel count, trapezoid estimate.
        let mut state: Vec<(usize, f64)> = segments
            .iter()
            .map(|&(lo, hi)| {
                let e = nudge(lo, hi);
                let n = self.min_panels;
                let h = (hi - lo) / n as f64;
                let mut sum = 0.5 * (f(lo + e) + f(hi - e));
                for i in 1..n {
                    sum += f(lo + i as f64 * h);
                }
                (n, sum * h)
            })
            .collect();

        let rel_tol = 10f64.powf(self.tol_db / 10.0) - 1.0;
        let mut total: f64 = state.iter().map(|s| s.1).sum();
        let mut settled = 0;
        loop {
            let mut next_total = 0.0;
            for (&(lo, hi), s) in segments.iter().zip(state.iter_mut()) {
                let (n, est) = *s;
                let h = (hi - lo) / n as f64;
                let mids: f64 = (0..n).map(|i| f(lo + (i as f64 + 0.5) * h)).sum();
                let refined = 0.5 * est + 0.5 * h * mids;
                *s = (2 * n, refined);
                next_total += refined;
            }
            let delta = (next_total - total).abs();
            let converged = delta <= rel_tol * next_total.abs() || (next_total == 0.0 && total == 0.0);
            total = next_total;
            settled = if converged { settled + 1 } else { 0 };
            if settled >= 2 {
                return Ok(total);
            }
            if state.iter().any(|s| s.0 >= self.max_panels) {
                return Err(Error::Numerical(format!(
                    "quadrature did not settle to {} dB within {} panels",
                    self.tol_db, self.max_panels
                )));
            }
        }
    }
}

/// Roots in `[-pi, pi]` of `a cos t + b sin t + c = 0`.
pub fn trig_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let r = a.hypot(b);
    if r == 0.0 || c.abs() >= r {
        return Vec::new();
    }
    let phi = b.atan2(a);
    let delta = (-c / r).acos();
    [phi + delta, phi - delta]
        .into_iter()
        .map(crate::acoustics::wrap_angle)
        .collect()
}
