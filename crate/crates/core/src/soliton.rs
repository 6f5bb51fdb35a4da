//! Closed-form reflectionless (multi-soliton) solutions.
//!
//! For data `{(kappa_n, c_n)}` the tau function is a sum over subsets `S` of
//! `exp(E_S)` with
//! `E_S = sum_{n in S} (8 kappa_n^3 t - 2 kappa_n x + ln(c_n / 2 kappa_n))
//!        + sum_{m < n in S} 2 ln |(kappa_m - kappa_n) / (kappa_m + kappa_n)|`.
//! Then `q = -2 (ln tau)''` equals `-8` times the variance of `K_S = sum_{n in S} kappa_n`
//! under the weights `exp(E_S)`, which is how it is evaluated here.

/// Subset expansion of the tau function, precomputed for repeated evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiSoliton {
    /// `(sum of kappa, sum of 8 kappa^3, constant part of E_S)` per subset
    terms: Vec<(f64, f64, f64)>,
}

impl MultiSoliton {
    pub fn new(kappa: &[f64], c: &[f64]) -> Self {
        assert_eq!(kappa.len(), c.len());
        let n = kappa.len();
        assert!(n < 24, "too many solitons for subset expansion");
        let terms = (0..1usize << n)
            .map(|mask| {
                let mut k = 0.0;
                let mut cube = 0.0;
                let mut e = 0.0;
                for i in (0..n).filter(|i| mask >> i & 1 == 1) {
                    k += kappa[i];
                    cube += 8.0 * kappa[i].powi(3);
                    e += (c[i] / (2.0 * kappa[i])).ln();
                    for j in (i + 1..n).filter(|j| mask >> j & 1 == 1) {
                        e += 2.0 * ((kappa[i] - kappa[j]) / (kappa[i] + kappa[j])).abs().ln();
                    }
                }
                (k, cube, e)
            })
            .collect();
        Self { terms }
    }

    /// Logarithm of the tau function and `q` at `(x, t)`.
    pub fn tau_and_q(&self, x: f64, t: f64) -> (f64, f64) {
        let emax = self
            .terms
            .iter()
            .map(|&(k, cube, e)| e + cube * t - 2.0 * k * x)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for &(k, cube, e) in &self.terms {
            let w = (e + cube * t - 2.0 * k * x - emax).exp();
            z += w;
            m1 += w * k;
            m2 += w * k * k;
        }
        let mean = m1 / z;
        let var = (m2 / z - mean * mean).max(0.0);
        (emax + z.ln(), -8.0 * var)
    }

    pub fn q(&self, x: f64, t: f64) -> f64 {
        self.tau_and_q(x, t).1
    }
}

/// Logarithm of the tau function and `q` at `(x, t)`.
pub fn tau_and_q(kappa: &[f64], c: &[f64], x: f64, t: f64) -> (f64, f64) {
    MultiSoliton::new(kappa, c).tau_and_q(x, t)
}

/// `q(x, t)` of the multi-soliton with the given data.
pub fn q(kappa: &[f64], c: &[f64], x: f64, t: f64) -> f64 {
    tau_and_q(kappa, c, x, t).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_soliton_profile() {
        for &x in &[-3.0, -0.4, 0.0, 1.7, 6.0] {
            let want = -2.0 / (x - 4.0 * 0.3f64).cosh().powi(2);
            assert!((q(&[1.0], &[2.0], x, 0.3) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn reflectionless_two_soliton_is_minus_six_sech2() {
        // kappa = 1, 2 with norming constants 6 and 12 give q(x, 0) = -6 sech^2 x.
        for i in 0..40 {
            let x = -5.0 + 0.25 * i as f64;
            let want = -6.0 / x.cosh().powi(2);
            assert!((q(&[1.0, 2.0], &[6.0, 12.0], x, 0.0) - want).abs() < 1e-12);
        }
    }
}
