//! One-dimensional interpolants.

use num_complex::Complex64 as C64;

/// Shape-preserving piecewise cubic (Fritsch–Carlson slopes) on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2, "need at least two samples");
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Self { x, y, d }
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn ys(&self) -> &[f64] {
        &self.y
    }

    /// Value at `t`; outside the grid the end values are held constant.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

/// Natural cubic spline on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self::with_end_curvature(x, y, 0.0, 0.0)
    }

    /// End second derivatives taken from one-sided differences of the first four samples, which
    /// keeps the error near the ends at fourth order on smooth data.
    pub fn with_estimated_ends(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        if n < 4 {
            return Self::new(x, y);
        }
        let second = |i: [usize; 4]| {
            let h = x[i[1]] - x[i[0]];
            (2.0 * y[i[0]] - 5.0 * y[i[1]] + 4.0 * y[i[2]] - y[i[3]]) / (h * h)
        };
        let m0 = second([0, 1, 2, 3]);
        let mn = second([n - 1, n - 2, n - 3, n - 4]);
        Self::with_end_curvature(x, y, m0, mn)
    }

    /// Spline with prescribed second derivatives at both ends.
    pub fn with_end_curvature(x: Vec<f64>, y: Vec<f64>, m0: f64, mn: f64) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 3, "need at least three samples");
        let n = x.len();
        let mut m = vec![0.0; n];
        m[0] = m0;
        m[n - 1] = mn;
        // Thomas algorithm for the second derivatives.
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let cc = h1 / 6.0;
            let mut rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            if i == 1 {
                rhs -= a * m0;
            }
            if i == n - 2 {
                rhs -= cc * mn;
            }
            let (cp, rp) = if i == 1 { (0.0, 0.0) } else { (c[i - 1], r[i - 1]) };
            let denom = b - a * cp;
            c[i] = cc / denom;
            r[i] = (rhs - a * rp) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = if i == n - 2 { r[i] } else { r[i] - c[i] * m[i + 1] };
        }
        Self { x, y, m }
    }

    /// First derivative at `t`.
    pub fn derivative(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= t).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    /// Value at `t`; outside the grid the end cubic pieces are extended.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= t).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Local Lagrange interpolation of complex samples on a uniform grid, using the `width` samples
/// nearest to the evaluation point (one-sided near the ends).
#[derive(Clone, Debug, PartialEq)]
pub struct UniformLagrange {
    start: f64,
    step: f64,
    values: Vec<C64>,
    width: usize,
}

impl UniformLagrange {
    pub fn new(start: f64, step: f64, values: Vec<C64>, width: usize) -> Self {
        assert!(width >= 2 && values.len() >= width, "need at least `width` samples");
        Self { start, step, values, width }
    }

    fn stencil(&self, x: f64) -> usize {
        let centre = (x - self.start) / self.step - 0.5 * (self.width - 1) as f64;
        (centre.round().max(0.0) as usize).min(self.values.len() - self.width)
    }

    pub fn eval(&self, x: f64) -> C64 {
        let first = self.stencil(x);
        let s = (x - self.start) / self.step - first as f64;
        let mut out = C64::new(0.0, 0.0);
        for j in 0..self.width {
            let mut l = 1.0;
            for m in 0..self.width {
                if m != j {
                    l *= (s - m as f64) / (j as f64 - m as f64);
                }
            }
            out += self.values[first + j] * l;
        }
        out
    }

    pub fn derivative(&self, x: f64) -> C64 {
        let first = self.stencil(x);
        let s = (x - self.start) / self.step - first as f64;
        let mut out = C64::new(0.0, 0.0);
        for j in 0..self.width {
            let mut dl = 0.0;
            for m in 0..self.width {
                if m == j {
                    continue;
                }
                let mut term = 1.0 / (j as f64 - m as f64);
                for p in 0..self.width {
                    if p != j && p != m {
                        term *= (s - p as f64) / (j as f64 - p as f64);
                    }
                }
                dl += term;
            }
            out += self.values[first + j] * dl;
        }
        out / self.step
    }
}

/// Table of a function and its first two derivatives on a uniform grid, interpolated by
/// piecewise quintic Hermite polynomials. Derivatives of the interpolant are returned exactly,
/// so anything that differentiates the table sees one consistent C^2 function.
#[derive(Clone, Debug)]
pub struct QuinticTable {
    pub start: f64,
    pub step: f64,
    pub f: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl QuinticTable {
    pub fn end(&self) -> f64 {
        self.start + self.step * (self.f.len() - 1) as f64
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.start && v <= self.end()
    }

    /// Value, first and second derivative at `v`. Caller guarantees `v` lies inside the table.
    pub fn eval(&self, v: f64) -> (f64, f64, f64) {
        let n = self.f.len();
        let pos = (v - self.start) / self.step;
        let i = (pos.floor().max(0.0) as usize).min(n - 2);
        let t = pos - i as f64;
        let h = self.step;
        let (f0, f1) = (self.f[i], self.f[i + 1]);
        let (d0, d1) = (h * self.f1[i], h * self.f1[i + 1]);
        let (s0, s1) = (h * h * self.f2[i], h * h * self.f2[i + 1]);
        let df = f1 - f0;
        let c0 = f0;
        let c1 = d0;
        let c2 = 0.5 * s0;
        let c3 = 10.0 * df - 6.0 * d0 - 4.0 * d1 - 0.5 * (3.0 * s0 - s1);
        let c4 = -15.0 * df + 8.0 * d0 + 7.0 * d1 + 0.5 * (3.0 * s0 - 2.0 * s1);
        let c5 = 6.0 * df - 3.0 * (d0 + d1) - 0.5 * (s0 - s1);
        let p = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        let dp = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
        let ddp = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
        (p, dp / h, ddp / (h * h))
    }
}
