mod common;

use common::{piecewise_constant_scattering, pure_step_reflection};
use kdvist::potential::{Catalog, Potential};
use kdvist::scattering::{self, Atom, KGrid, ScatterOptions, ScatteringData};
use proptest::prelude::*;
use kdvist::Complex64 as C64;

fn pot(c: Catalog) -> Potential {
    Potential::from_catalog(&c).unwrap()
}

#[test]
fn box_reflection_matches_transfer_matrix() {
    let p = pot(Catalog::Box { depth: 1.0, width: 1.0 });
    let ks = [-7.3, -0.2, 0.01, 0.3, 1.0, 2.5, 19.0, 40.0];
    let s = scattering::scatter_short_range(&p, &ks).unwrap();
    for row in &s.samples {
        let (r, t) = piecewise_constant_scattering(&[(0.0, 1.0, -1.0)], row.k);
        assert!((row.r - r).norm() < 1e-8, "k={} {} vs {}", row.k, row.r, r);
        assert!((row.t - t).norm() < 1e-8, "k={} {} vs {}", row.k, row.t, t);
        assert!(row.residual < 1e-9);
    }
}

#[test]
fn rough_truncation_matches_transfer_matrix() {
    let p = pot(Catalog::RoughLeft { seed: 11, amplitude: 1.0 }).truncate_left(-20.0);
    let cells: Vec<(f64, f64, f64)> =
        (0..20).rev().map(|n| (-(n as f64) - 1.0, -(n as f64), p.eval(-(n as f64) - 0.5))).collect();
    let s = scattering::scatter_short_range(&p, &[0.05, 0.7, 3.0, 12.0]).unwrap();
    for row in &s.samples {
        let (r, _) = piecewise_constant_scattering(&cells, row.k);
        assert!((row.r - r).norm() < 1e-7, "k={} {} vs {}", row.k, row.r, r);
    }
}

#[test]
fn box_bound_state_matches_transcendental_equation() {
    // even state of a well of depth 1 on [0, 1]: K tan(K/2) = kappa with K^2 + kappa^2 = 1
    let p = pot(Catalog::Box { depth: 1.0, width: 1.0 });
    let b = scattering::bound_states(&p).unwrap();
    assert_eq!(b.len(), 1);
    let kappa = b[0].kappa;
    let big_k = (1.0 - kappa * kappa).sqrt();
    assert!((big_k * (big_k / 2.0).tan() - kappa).abs() < 1e-9, "{kappa}");
    // norm: psi_+ = e^{-kappa x} on x > 1, matched cosine inside, e^{kappa x} left
    let c_ref = {
        let phase = big_k / 2.0;
        let amp = (-kappa).exp() / phase.cos();
        let inside = amp * amp * (0.5 + (big_k).sin() / (2.0 * big_k));
        let outside = (-2.0 * kappa).exp() / (2.0 * kappa);
        1.0 / (inside + 2.0 * outside)
    };
    assert!((b[0].norming - c_ref).abs() < 1e-8, "{} vs {c_ref}", b[0].norming);
}

#[test]
fn reflectionless_two_soliton_data() {
    let p = pot(Catalog::NSoliton { kappa: vec![1.0, 2.0], c: vec![6.0, 12.0] });
    let b = scattering::bound_states(&p).unwrap();
    assert_eq!(b.len(), 2);
    assert!((b[0].kappa - 1.0).abs() < 1e-8 && (b[1].kappa - 2.0).abs() < 1e-8);
    assert!((b[0].norming - 6.0).abs() < 1e-6 && (b[1].norming - 12.0).abs() < 1e-6, "{b:?}");
}

#[test]
fn pure_step_reflection_and_split() {
    let p = pot(Catalog::PureStep { h: 1.0 });
    for &a in &[0.0, -0.5, 1.0] {
        let rows = scattering::reflection_steplike(&p, a, &[0.01, 0.4, 1.0, 3.0, 25.0]).unwrap();
        for row in &rows {
            let want = pure_step_reflection(1.0, row.k);
            assert!((row.r - want).norm() < 1e-9, "a={a} k={} {} vs {want}", row.k, row.r);
            assert!(row.residual < 1e-9, "{row:?}");
        }
        let resid = scattering::analytic_split_check(&p, a, &[0.05, 0.5, 2.0, 10.0]).unwrap();
        assert!(resid < 1e-8, "{resid}");
    }
    let split = scattering::analytic_split(&p, 0.0, 1.0).unwrap();
    let want = 2.0 / (1.0 + 2f64.sqrt());
    assert!((split.a_term - C64::new(want, 0.0)).norm() < 1e-12);
    assert!((split.r_term + 1.0).norm() < 1e-12);
}

#[test]
fn pure_step_density_closed_form() {
    let p = pot(Catalog::PureStep { h: 1.0 });
    for &a in &[0.0, -0.9, 0.5, 2.0] {
        for &s in &[0.01, 0.2, 0.5, 0.9, 0.999] {
            let d = scattering::rho_density(&p, a, s).unwrap();
            let want = 2.0 * s * (1.0 - s * s).sqrt() / std::f64::consts::PI;
            assert!((d - want).abs() < 1e-8, "a={a} s={s}: {d} vs {want}");
        }
    }
    let atoms = scattering::rho_atoms(&p, 0.0).unwrap();
    assert!(atoms.is_empty());
    let ex = scattering::rho_density_extrapolated(&p, 0.0, 0.5, &atoms).unwrap();
    assert!((ex - 0.75f64.sqrt() / std::f64::consts::PI).abs() < 1e-5, "{ex}");
}

#[test]
fn soliton_atom_from_wronskian_derivative() {
    let p = pot(Catalog::OneSoliton { kappa: 1.0, c: 2.0 });
    for &a in &[0.0, 3.0, 10.0] {
        let atoms = scattering::rho_atoms(&p, a).unwrap();
        assert_eq!(atoms.len(), 1);
        let Atom { kappa, mass } = atoms[0];
        assert!((kappa - 1.0).abs() < 1e-8);
        assert!((mass - 2.0).abs() < 1e-6, "a={a}: {mass}");
    }
}

#[test]
fn herglotz_m_functions() {
    let p = pot(Catalog::PureStep { h: 1.0 });
    let q = pot(Catalog::Box { depth: 2.0, width: 1.5 });
    for pot in [&p, &q] {
        for &lam in &[C64::new(-3.0, 0.1), C64::new(0.5, 2.0), C64::new(4.0, 0.01)] {
            let mp = scattering::m_plus(pot, lam, 0.3).unwrap();
            let mm = scattering::weyl_m_minus(pot, lam, 0.3).unwrap();
            assert!(mp.im > 0.0 && mm.im > 0.0, "{lam}: {mp} {mm}");
        }
    }
}

#[test]
fn rough_m_minus_converges() {
    let p = pot(Catalog::RoughLeft { seed: 1, amplitude: 1.0 });
    let m = scattering::weyl_m_minus(&p, C64::new(-2.0, 0.0), 0.0).unwrap();
    assert!(m.re.is_finite() && m.im.abs() < 1e-12, "{m}");
    // a reasonably far truncation gives the same value
    let t = p.truncate_left(-200.0);
    let mt = scattering::weyl_m_minus(&t, C64::new(-2.0, 0.0), 0.0).unwrap();
    assert!((m - mt).norm() < 1e-9, "{m} vs {mt}");
}

#[test]
fn faddeev_trivial_cases() {
    let zero = pot(Catalog::Zero);
    let y = scattering::faddeev_right(&zero, C64::new(1.0, 0.0), 0.0).unwrap();
    assert_eq!(y, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let b = pot(Catalog::Box { depth: 1.0, width: 1.0 });
    let y = scattering::faddeev_right(&b, C64::new(2.0, 0.0), 1.0).unwrap();
    assert!((y[0] - 1.0).norm() < 1e-15 && y[1].norm() < 1e-15, "{y:?}");
}

#[test]
fn weyl_m_examples() {
    let step = pot(Catalog::PureStep { h: 1.0 });
    let m = scattering::weyl_m_minus(&step, C64::new(0.0, 1.0), 0.0).unwrap();
    let want = C64::new(0.0, 1.0) * C64::new(1.0, 1.0).sqrt();
    assert!((m - want).norm() < 1e-10, "{m} vs {want}");
    let zero = pot(Catalog::Zero);
    let m = scattering::weyl_m_minus(&zero, C64::new(-1.0, 0.0), 0.0).unwrap();
    assert!((m + 1.0).norm() < 1e-10, "{m}");
}

#[test]
fn zero_potential_data() {
    let d = scattering::scatter(&pot(Catalog::Zero), &ScatterOptions::default()).unwrap();
    assert!(d.atoms.is_empty() && d.density.is_empty());
    assert!(d.reflection.iter().all(|s| s.r.norm() == 0.0 && (s.t - 1.0).norm() < 1e-15));
}

#[test]
fn data_file_round_trip_and_evolution() {
    let opts = ScatterOptions { grid: KGrid { k_max: 10.0, dk: 0.05, symmetric: true }, ..Default::default() };
    let d = scattering::scatter(&pot(Catalog::PureStep { h: 1.0 }), &opts).unwrap();
    let back = ScatteringData::from_file_string(&d.to_file_string()).unwrap();
    assert_eq!(back, d);
    let e = scattering::evolve_data(&d, 0.25);
    assert_eq!(e.time, 0.25);
    for (a, b) in d.reflection.iter().zip(&e.reflection) {
        assert!((a.r.norm() - b.r.norm()).abs() < 1e-15);
        assert!((b.r - a.r * C64::from_polar(1.0, 2.0 * a.k.powi(3))).norm() < 1e-14);
    }
    for (a, b) in d.density.iter().zip(&e.density) {
        assert!((b.density - a.density * (2.0 * a.s.powi(3)).exp()).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reflection_is_symmetric_and_contractive(depth in 0.1f64..3.0, width in 0.2f64..3.0, k in 0.01f64..30.0) {
        let p = pot(Catalog::Box { depth, width });
        let s = scattering::scatter_short_range(&p, &[-k, k]).unwrap();
        let (neg, pos) = (s.samples[0], s.samples[1]);
        prop_assert!((neg.r - pos.r.conj()).norm() < 1e-10);
        prop_assert!(pos.r.norm() <= 1.0 + 1e-12);
        prop_assert!((pos.r.norm_sqr() + pos.t.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn step_reflection_is_contractive(h in 0.2f64..2.0, k in 0.01f64..30.0) {
        let p = pot(Catalog::PureStep { h });
        let r = scattering::reflection_steplike(&p, 0.0, &[k]).unwrap()[0];
        prop_assert!(r.r.norm() <= 1.0 + 1e-12);
        prop_assert!((r.r - pure_step_reflection(h, k)).norm() < 1e-8);
    }

    #[test]
    fn m_functions_are_herglotz(re in -4.0f64..4.0, im in 0.01f64..3.0, depth in 0.1f64..2.0) {
        let p = pot(Catalog::Box { depth, width: 1.0 });
        let lam = C64::new(re, im);
        prop_assert!(scattering::weyl_m_minus(&p, lam, 0.5).unwrap().im > 0.0);
        prop_assert!(scattering::m_plus(&p, lam, 0.5).unwrap().im > 0.0);
    }
}

#[test]
fn jost_asymptotics_on_the_imaginary_axis() {
    // y = 1 + (i / 2k) int_a^inf q + O(k^-2), so 2ik (y - 1) + int_a^inf q -> 0 like 1/k
    let p = pot(Catalog::Box { depth: 1.0, width: 1.0 });
    let a = 0.3;
    let integral = -(1.0 - a);
    let defects: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&tau| {
            let k = C64::new(0.0, tau);
            let y = scattering::faddeev_right(&p, k, a).unwrap()[0];
            (2.0 * C64::i() * k * (y - 1.0) + integral).norm()
        })
        .collect();
    assert!(defects[2] < 0.05, "{defects:?}");
    for w in defects.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.35..0.65).contains(&ratio), "{defects:?}");
    }
}
