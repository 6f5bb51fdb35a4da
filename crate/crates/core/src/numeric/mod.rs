//! Numerical building blocks shared by the solver modules.

pub mod chirpz;
pub mod interp;
pub mod ode;
pub mod quad;

use num_complex::Complex64 as C64;

/// Square root on the branch with non-negative imaginary part.
pub fn sqrt_upper(z: C64) -> C64 {
    let r = z.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// Finds a root of `f` in `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
