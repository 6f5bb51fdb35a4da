//! Gauss–Legendre rules.

use std::f64::consts::PI;

/// Nodes and weights of an `n`-point Gauss–Legendre rule.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule on `[-1, 1]`, nodes in increasing order.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Same rule mapped affinely onto `[a, b]`.
    pub fn on_interval(n: usize, a: f64, b: f64) -> Self {
        let base = Self::new(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Self {
            nodes: base.nodes.iter().map(|&z| mid + half * z).collect(),
            weights: base.weights.iter().map(|&w| w * half).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre over the subintervals given by `breaks`.
pub fn composite(breaks: &[f64], per_panel: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(per_panel);
    breaks
        .windows(2)
        .map(|w| {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[1] + w[0]);
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&z, &wt)| wt * half * f(mid + half * z))
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(7);
        for p in 0..14 {
            let got = rule.integrate(|x| x.powi(p));
            let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "degree {p}: {got} vs {want}");
        }
    }

    #[test]
    fn weights_sum_to_length() {
        for n in [1, 2, 5, 64, 257] {
            let rule = GaussLegendre::on_interval(n, -3.0, 5.0);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 8.0).abs() < 1e-12);
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn large_rule_is_accurate() {
        let rule = GaussLegendre::on_interval(512, 0.0, 40.0);
        let got = rule.integrate(|x| (-x).exp() * x.cos());
        let want = 0.5 * (1.0 - (-40.0f64).exp() * (40f64.cos() - 40f64.sin()));
        assert!((got - want).abs() < 1e-13);
    }
}
