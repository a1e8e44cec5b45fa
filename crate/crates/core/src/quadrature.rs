//! Gauss–Legendre rules.

use crate::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const MAX_ORDER: usize = 32;

impl GaussRule {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::invalid(format!(
                "quadrature order must be in 1..={MAX_ORDER}, got {order}"
            )));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for k in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(GaussRule { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature points and absolute weights on `[a, b]`, with the interval
    /// split at every breakpoint strictly inside it.
    pub fn panel_points(&self, a: f64, b: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
        let mut cuts = vec![a];
        cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
        cuts.push(b);
        cuts.sort_by(|x, y| x.total_cmp(y));
        let mut out = Vec::with_capacity((cuts.len() - 1) * self.order());
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, half * wt));
            }
        }
        out
    }

    /// Composite integral of `f` over `[a, b]` with `panels` equal panels,
    /// additionally split at `breakpoints`.
    pub fn integrate(
        &self,
        f: impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        panels: usize,
        breakpoints: &[f64],
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut cuts: Vec<f64> = (0..=panels).map(|k| a + k as f64 * h).collect();
        cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
        cuts.sort_by(|x, y| x.total_cmp(y));
        cuts.windows(2)
            .map(|w| {
                self.panel_points(w[0], w[1], &[])
                    .into_iter()
                    .map(|(x, wt)| wt * f(x))
                    .sum::<f64>()
            })
            .sum()
    }
}

// (P_n(x), P_n'(x)) by the three-term recurrence
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_rule() {
        let r = GaussRule::new(3).unwrap();
        let s = (0.6_f64).sqrt();
        assert!((r.nodes()[0] + s).abs() < 1e-15);
        assert!(r.nodes()[1].abs() < 1e-15);
        assert!((r.weights()[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((r.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..=12 {
            let r = GaussRule::new(n).unwrap();
            for deg in 0..2 * n {
                let got: f64 = r
                    .panel_points(0.0, 2.0, &[])
                    .iter()
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                let want = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
                assert!((got - want).abs() < 1e-12 * want, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn rejects_bad_order() {
        assert!(GaussRule::new(0).is_err());
        assert!(GaussRule::new(MAX_ORDER + 1).is_err());
    }

    #[test]
    fn breakpoints_make_kinks_exact() {
        let r = GaussRule::new(2).unwrap();
        let got = r.integrate(|x: f64| x.abs(), -0.3, 1.0, 1, &[0.0]);
        assert!((got - (0.045 + 0.5)).abs() < 1e-15);
    }
}
