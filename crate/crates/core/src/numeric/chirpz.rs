//! Chirp-z transform (Bluestein): `S_m = sum_j a_j w^(j m)` for `w = exp(i theta)` and an
//! arbitrary angle `theta`, evaluated with FFTs.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

/// Evaluates the sums for every input vector in `inputs` (all of equal length `n`) at
/// `m = 0..outputs`.
pub fn chirp_z(inputs: &[Vec<C64>], theta: f64, outputs: usize) -> Vec<Vec<C64>> {
    if inputs.is_empty() {
        return Vec::new();
    }
    let n = inputs[0].len();
    let size = (n + outputs).next_power_of_two();
    let chirp = |j: usize| {
        let jf = j as f64;
        C64::from_polar(1.0, 0.5 * theta * jf * jf)
    };
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    let mut b = vec![C64::new(0.0, 0.0); size];
    for m in 0..outputs {
        b[m] = chirp(m).conj();
    }
    for j in 1..n {
        b[size - j] = chirp(j).conj();
    }
    fwd.process(&mut b);

    let scale = 1.0 / size as f64;
    inputs
        .iter()
        .map(|input| {
            assert_eq!(input.len(), n);
            let mut a = vec![C64::new(0.0, 0.0); size];
            for (j, &v) in input.iter().enumerate() {
                a[j] = v * chirp(j);
            }
            fwd.process(&mut a);
            for (x, y) in a.iter_mut().zip(&b) {
                *x *= y;
            }
            inv.process(&mut a);
            (0..outputs).map(|m| a[m] * chirp(m) * scale).collect()
        })
        .collect()
}
