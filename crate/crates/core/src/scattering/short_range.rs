//! Scattering for potentials vanishing at both ends.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::jost::{self, faddeev_right, reflection_at, weyl_left};
use super::spectrum;
use super::ReflectionSample;
use crate::error::{Error, Result};
use crate::potential::Potential;

/// `|W(psi_-, psi_+)|` below this flags a grid point as near a zero-energy resonance.
const WRONSKIAN_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ShortRangeScattering {
    pub samples: Vec<ReflectionSample>,
    /// Grid points where the Wronskian nearly vanished.
    pub flagged: Vec<f64>,
}

fn ensure_short_range(p: &Potential) -> Result<()> {
    if p.is_short_range() {
        Ok(())
    } else {
        Err(Error::param("potential", "short-range scattering needs q -> 0 at both ends"))
    }
}

/// Matching point used for real-`k` Wronskians.
pub(crate) fn matching_point(p: &Potential) -> Result<f64> {
    let lo = jost::left_start(p)?;
    let hi = jost::right_start(p);
    Ok(0.5 * (lo + hi))
}

/// `R(k)`, `T(k)` and the unitarity residual on a grid of nonzero real `k`.
pub fn scatter_short_range(p: &Potential, ks: &[f64]) -> Result<ShortRangeScattering> {
    ensure_short_range(p)?;
    if ks.iter().any(|&k| k == 0.0 || !k.is_finite()) {
        return Err(Error::param("k_grid", "k = 0 is not allowed"));
    }
    let xm = matching_point(p)?;
    let rows: Vec<(ReflectionSample, bool)> = ks
        .par_iter()
        .map(|&k| {
            let kc = C64::new(k, 0.0);
            let y = faddeev_right(p, kc, xm)?;
            let z = weyl_left(p, kc, 0.0, xm)?;
            let (r, w) = reflection_at(k, k, xm, y, z);
            let t = 2.0 * jost::I * k / w;
            let residual = (r.norm_sqr() + t.norm_sqr() - 1.0).abs();
            Ok((ReflectionSample { k, r, t, residual }, w.norm() < WRONSKIAN_FLOOR))
        })
        .collect::<Result<_>>()?;
    let flagged = rows.iter().filter(|(_, f)| *f).map(|(s, _)| s.k).collect();
    Ok(ShortRangeScattering { samples: rows.into_iter().map(|(s, _)| s).collect(), flagged })
}

/// Bound state `-kappa^2` with norming constant `c = 1 / ||psi_+||^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundState {
    pub kappa: f64,
    pub norming: f64,
}

/// All bound states, sorted by increasing `kappa`.
pub fn bound_states(p: &Potential) -> Result<Vec<BoundState>> {
    ensure_short_range(p)?;
    let eig = spectrum::eigenvalues(p, 0.0)?;
    let mut out: Vec<BoundState> = eig
        .par_iter()
        .map(|e| {
            Ok(BoundState { kappa: e.kappa, norming: spectrum::norming_constant(p, e, 0.0)? })
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| a.kappa.total_cmp(&b.kappa));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Catalog;

    #[test]
    fn soliton_bound_state() {
        let p = Potential::from_catalog(&Catalog::OneSoliton { kappa: 1.0, c: 2.0 }).unwrap();
        let b = bound_states(&p).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].kappa - 1.0).abs() < 1e-8, "{:?}", b);
        assert!((b[0].norming - 2.0).abs() < 1e-6, "{:?}", b);
    }

    #[test]
    fn reflectionless_soliton() {
        let p = Potential::from_catalog(&Catalog::OneSoliton { kappa: 1.0, c: 2.0 }).unwrap();
        let s = scatter_short_range(&p, &[-3.0, -0.1, 0.05, 0.5, 2.0, 10.0]).unwrap();
        for row in &s.samples {
            assert!(row.r.norm() < 1e-8, "{row:?}");
            // T = (k + i) / (k - i)
            let want = (C64::new(row.k, 0.0) + jost::I) / (C64::new(row.k, 0.0) - jost::I);
            assert!((row.t - want).norm() < 1e-8);
        }
    }
}
