mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;

use common::{adaptive_simpson, pure_step_reflection};
use kdvist::hankel::{
    self, fredholm_logdet, kernel_at, singular_spectrum, solve_q, truncation_length, FourierOptions, HankelKernel,
    HankelOptions, NystromDiscretization, ReflectionTransform, Route, DATA_RELATIVE_ACCURACY,
};
use kdvist::numeric::quad::GaussLegendre;
use kdvist::potential::{Catalog, Potential};
use kdvist::scattering::{self, Atom, KGrid, ReflectionSample, ScatterOptions, ScatteringData};
use kdvist::Complex64 as C64;
use proptest::prelude::*;

fn atom_data(atoms: &[(f64, f64)]) -> ScatteringData {
    ScatteringData {
        time: 0.0,
        split_point: 0.0,
        step_height: 0.0,
        h0: atoms.iter().map(|a| a.0).fold(0.0, f64::max),
        truncation: None,
        atoms: atoms.iter().map(|&(kappa, mass)| Atom { kappa, mass }).collect(),
        reflection: Vec::new(),
        density: Vec::new(),
        flagged: Vec::new(),
    }
}

fn synthetic_reflection(step_height: f64, r: impl Fn(f64) -> C64) -> ScatteringData {
    let grid = KGrid::default();
    let reflection = grid
        .points()
        .into_iter()
        .map(|k| ReflectionSample { k, r: r(k), t: C64::new(0.0, 0.0), residual: 0.0 })
        .collect();
    ScatteringData { step_height, reflection, ..atom_data(&[]) }
}

fn scattered(tag: &str) -> ScatteringData {
    let p = Potential::from_catalog(&Catalog::parse(tag).unwrap()).unwrap();
    scattering::scatter(&p, &ScatterOptions::default()).unwrap()
}

fn box_data() -> &'static ScatteringData {
    static DATA: OnceLock<ScatteringData> = OnceLock::new();
    DATA.get_or_init(|| scattered("box(1,1)"))
}

fn step_data() -> &'static ScatteringData {
    static DATA: OnceLock<ScatteringData> = OnceLock::new();
    DATA.get_or_init(|| scattered("pure_step(1)"))
}

/// `det(delta_mn + a_m / (kappa_m + kappa_n))` with `a_m = c_m e^{8 kappa^3 t - 2 kappa x}`.
fn gram_logdet(atoms: &[(f64, f64)], x: f64, t: f64) -> f64 {
    let n = atoms.len();
    let mut m = vec![vec![0.0; n]; n];
    for (i, &(ki, ci)) in atoms.iter().enumerate() {
        let a = ci * (8.0 * ki.powi(3) * t - 2.0 * ki * x).exp();
        for (j, &(kj, _)) in atoms.iter().enumerate() {
            m[i][j] = a / (ki + kj) + if i == j { 1.0 } else { 0.0 };
        }
    }
    let mut logdet = 0.0;
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
        m.swap(c, p);
        let pivot = m[c][c];
        logdet += pivot.abs().ln();
        for r in c + 1..n {
            let f = m[r][c] / pivot;
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    logdet
}

fn atom_kernel(atoms: &[(f64, f64)], t: f64) -> HankelKernel {
    kernel_at(&atom_data(atoms), t, -5.0, 5.0, &HankelOptions::default()).unwrap()
}

#[test]
fn kernel_of_a_single_atom() {
    let k = atom_kernel(&[(1.0, 2.0)], 0.0);
    assert!((k.eval(0.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
    let k = atom_kernel(&[(1.0, 2.0)], 1.0);
    let v = k.eval(0.0, 1.0).unwrap();
    assert!((v / (2.0 * 7f64.exp()) - 1.0).abs() < 1e-14, "{v}");
}

#[test]
fn step_density_kernel_matches_quadrature() {
    let mut data = step_data().clone();
    data.reflection.clear();
    let k = kernel_at(&data, 0.0, 2.0, 2.0, &HankelOptions::default()).unwrap();
    let f = |s: f64| (-4.0 * s).exp() * 2.0 * s / PI * (1.0 - s * s).max(0.0).sqrt();
    let reference = adaptive_simpson(&f, 0.0, 1.0, 1e-14);
    let v = k.eval(2.0, 0.0).unwrap();
    assert!((v - reference).abs() < 1e-10, "{v} vs {reference}");
}

#[test]
fn zero_reflection_gives_no_table() {
    let data = synthetic_reflection(0.0, |_| C64::new(0.0, 0.0));
    let t = ReflectionTransform::build(&data, -10.0, 10.0, &FourierOptions::default(), 1.0).unwrap();
    assert!(t.is_reflectionless());
    assert_eq!(t.eval(3.0).unwrap(), (0.0, 0.0, 0.0));
}

#[test]
fn rational_reflection_transform() {
    // 1 / (1 + ik)^6 has its only pole at k = i; closing upward gives v^5 e^{-v} / 120
    let data = synthetic_reflection(0.0, |k| C64::new(1.0, k).powi(-6));
    let t = ReflectionTransform::build(&data, 0.0, 30.0, &FourierOptions::default(), 1.0).unwrap();
    for i in 1..=60 {
        let v = 0.5 * i as f64;
        let exact = v.powi(5) * (-v).exp() / 120.0;
        let got = t.eval(v).unwrap().0;
        assert!((got - exact).abs() < 1e-6, "v={v}: {got} vs {exact}");
    }
}

/// `(1/pi) Re int_0^kmax R(k) e^{i(8k^3 t + kv)} dk` on panels a fraction of a wavelength wide.
fn oscillatory_reference(r: impl Fn(f64) -> C64, t: f64, v: f64, k_max: f64) -> f64 {
    let rule = GaussLegendre::new(16);
    let mut total = 0.0;
    let mut a = 0.0;
    while a < k_max {
        let rate = 24.0 * a * a * t + v.abs() + 1.0;
        let b = (a + 2.0 / rate).min(k_max);
        let half = 0.5 * (b - a);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let k = a + half * (1.0 + x);
            total += w * half * (r(k) * C64::from_polar(1.0, 8.0 * k.powi(3) * t + k * v)).re;
        }
        a = b;
    }
    total / PI
}

#[test]
fn step_reflection_transform_matches_oscillatory_quadrature() {
    let t = 0.01;
    let data = scattering::evolve_data(&synthetic_reflection(1.0, |k| pure_step_reflection(1.0, k)), t);
    let tr = ReflectionTransform::build(&data, 0.0, 20.0, &FourierOptions::default(), 1.0).unwrap();
    let reference = oscillatory_reference(|k| pure_step_reflection(1.0, k), t, 4.0, 150.0);
    let got = tr.eval(4.0).unwrap().0;
    assert!((got - reference).abs() < 1e-6, "{got} vs {reference}");
}

#[test]
fn empty_kernel_has_unit_determinant() {
    let k = atom_kernel(&[], 0.3);
    let d = NystromDiscretization::assemble(&k, 0.0, 10.0, 32, false).unwrap();
    assert!(d.matrix().iter().all(|&v| v == 0.0));
    assert_eq!(fredholm_logdet(&d).unwrap(), (0.0, 1.0));
    let s = singular_spectrum(&d, DATA_RELATIVE_ACCURACY);
    assert!(s.values.iter().all(|&v| v == 0.0));
    assert!(s.fit.is_none());
}

#[test]
fn rank_one_determinant() {
    let k = atom_kernel(&[(1.0, 2.0)], 0.0);
    let d = NystromDiscretization::assemble(&k, 0.0, 40.0, 64, false).unwrap();
    let (logdet, lambda_min) = fredholm_logdet(&d).unwrap();
    assert!((logdet - 2f64.ln()).abs() < 1e-10, "{logdet}");
    assert!(lambda_min >= 1.0 - 1e-12);
    let s = singular_spectrum(&d, DATA_RELATIVE_ACCURACY);
    assert!((s.values[0] - 1.0).abs() < 1e-10, "{}", s.values[0]);
    assert!(s.values[1] < 1e-12);
}

#[test]
fn two_atoms_match_gram_determinant() {
    let atoms = [(1.0, 2.0), (2.0, 12.0)];
    let k = atom_kernel(&atoms, 0.0);
    let d = NystromDiscretization::assemble(&k, 0.0, 40.0, 64, false).unwrap();
    let (logdet, _) = fredholm_logdet(&d).unwrap();
    let exact = gram_logdet(&atoms, 0.0, 0.0);
    assert!((logdet - exact).abs() < 1e-10, "{logdet} vs {exact}");
}

#[test]
fn step_determinant_settles_under_refinement() {
    let opts = HankelOptions::default();
    let k = kernel_at(step_data(), 0.1, 0.0, 0.0, &opts).unwrap();
    let l = truncation_length(&k, 0.0, &opts).unwrap();
    let ld = |n| fredholm_logdet(&NystromDiscretization::assemble(&k, 0.0, l, n, false).unwrap()).unwrap().0;
    let (a, b) = (ld(128), ld(256));
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
}

#[test]
fn determinant_converges_geometrically() {
    let opts = HankelOptions::default();
    let k = kernel_at(box_data(), 0.1, 0.0, 0.0, &opts).unwrap();
    let l = truncation_length(&k, 0.0, &opts).unwrap();
    let ld = |n| fredholm_logdet(&NystromDiscretization::assemble(&k, 0.0, l, n, false).unwrap()).unwrap().0;
    let values: Vec<f64> = [4, 8, 16, 32, 64].iter().map(|&n| ld(n)).collect();
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for w in diffs.windows(2) {
        if w[0] > 1e-12 {
            assert!(w[1] < 0.5 * w[0], "{diffs:?}");
        }
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    let p = solve_q(&atom_data(&[]), 1.5, 0.4, Route::Trace, &HankelOptions::default()).unwrap();
    assert_eq!(p.q, 0.0);
    assert_eq!(p.logdet, 0.0);
}

#[test]
fn one_soliton_peak() {
    let p = solve_q(&atom_data(&[(1.0, 2.0)]), 4.0, 1.0, Route::Trace, &HankelOptions::default()).unwrap();
    assert!((p.q + 2.0).abs() < 1e-9, "{}", p.q);
    assert!(p.residual < 1e-6);
}

#[test]
fn step_solution_negligible_far_right() {
    let p = solve_q(step_data(), 10.0, 0.01, Route::Trace, &HankelOptions::default()).unwrap();
    assert!(p.q.abs() < 1e-6, "{}", p.q);
}

#[test]
fn box_singular_values_decay_geometrically() {
    let opts = HankelOptions::default();
    let k = kernel_at(box_data(), 0.1, 0.0, 0.0, &opts).unwrap();
    let l = truncation_length(&k, 0.0, &opts).unwrap();
    let d = NystromDiscretization::assemble(&k, 0.0, l, 64, false).unwrap();
    let s = singular_spectrum(&d, DATA_RELATIVE_ACCURACY);
    assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
    let fit = s.fit.expect("enough values above the floor");
    assert!((0.8..=1.2).contains(&fit.omega), "{fit:?}");
    assert!(fit.r_squared > 0.95, "{fit:?}");
}

#[test]
fn positivity_of_trivial_and_atomic_kernels() {
    let xs = [-3.0, 0.0, 3.0];
    let ts = [0.01, 0.3];
    let opts = HankelOptions::default();
    let zero = hankel::positivity_report(&atom_data(&[]), &xs, &ts, &opts).unwrap();
    assert!(zero.entries.iter().all(|e| e.lambda_min == 1.0));
    let one = hankel::positivity_report(&atom_data(&[(1.0, 2.0)]), &xs, &ts, &opts).unwrap();
    assert!(one.entries.iter().all(|e| e.lambda_min >= 1.0 - 1e-12));
    assert!(one.all_hold());
}

#[test]
fn flipped_sign_breaks_the_soliton() {
    let opts = HankelOptions { flip_sign: true, ..Default::default() };
    let p = solve_q(&atom_data(&[(1.0, 2.0)]), 4.0, 1.0, Route::Trace, &opts).unwrap();
    assert!((p.q + 2.0).abs() > 0.5, "{}", p.q);
}

#[test]
fn box_routes_agree() {
    let opts = HankelOptions::default();
    for x in [-3.0, 0.0, 1.0, 4.0] {
        let p = solve_q(box_data(), x, 0.1, Route::Trace, &opts).unwrap();
        assert!(p.residual < 1e-6, "x={x}: {p:?}");
        assert!(p.converged);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn atomic_determinant_is_a_gram_determinant(
        kappa in prop::collection::vec(0.3f64..3.0, 1..4),
        log_c in prop::collection::vec(-2.0f64..2.5, 3),
        x in -2.0f64..2.0,
        t in 0.0f64..0.1,
    ) {
        let mut kappa = kappa;
        kappa.sort_by(|a, b| b.total_cmp(a));
        kappa.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        let atoms: Vec<(f64, f64)> = kappa.iter().zip(&log_c).map(|(&k, &c)| (k, c.exp())).collect();
        let opts = HankelOptions::default();
        let k = kernel_at(&atom_data(&atoms), t, x, x, &opts).unwrap();
        let l = truncation_length(&k, x, &opts).unwrap();
        let d = NystromDiscretization::assemble(&k, x, l, 64, false).unwrap();
        let m = d.matrix();
        prop_assert!(m == m.transpose());
        let (logdet, lambda_min) = fredholm_logdet(&d).unwrap();
        let exact = gram_logdet(&atoms, x, t);
        prop_assert!((logdet - exact).abs() < 1e-9 * exact.abs().max(1.0), "{} vs {}", logdet, exact);
        prop_assert!(lambda_min > 0.0);
    }

    #[test]
    fn assembled_matrix_is_symmetric(x in -3.0f64..3.0, t in 0.01f64..0.5, n in 4usize..48) {
        let opts = HankelOptions::default();
        let k = kernel_at(box_data(), t, x, x, &opts).unwrap();
        let d = NystromDiscretization::assemble(&k, x, 10.0, n, false).unwrap();
        let m = d.matrix();
        prop_assert!(m == m.transpose());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solution_is_translation_covariant(x0 in -1.0f64..1.0, x in -2.0f64..2.0) {
        let data = box_data();
        let mut shifted = data.clone();
        for a in &mut shifted.atoms {
            a.mass *= (-2.0 * a.kappa * x0).exp();
        }
        for s in &mut shifted.reflection {
            s.r *= C64::from_polar(1.0, 2.0 * s.k * x0);
        }
        let opts = HankelOptions { check_routes: false, ..Default::default() };
        let a = solve_q(&shifted, x, 0.1, Route::Trace, &opts).unwrap();
        let b = solve_q(data, x + x0, 0.1, Route::Trace, &opts).unwrap();
        prop_assert!((a.q - b.q).abs() < 1e-8, "{} vs {}", a.q, b.q);
        prop_assert!((a.logdet - b.logdet).abs() < 1e-8, "{} vs {}", a.logdet, b.logdet);
    }
}
