use kdvist::potential::{Catalog, Potential, TailKind};
use proptest::prelude::*;

fn pot(tag: &str) -> Potential {
    Potential::from_catalog(&Catalog::parse(tag).unwrap()).unwrap()
}

#[test]
fn catalog_examples() {
    let zero = pot("zero");
    assert_eq!(zero.eval(3.7), 0.0);
    assert!(matches!(zero.left.kind, TailKind::Zero) && matches!(zero.right.kind, TailKind::Zero));

    let step = pot("pure_step(1)");
    assert_eq!(step.eval(-5.0), -1.0);
    assert_eq!(step.eval(0.0), 0.0);
    assert!(matches!(step.left.kind, TailKind::ConstantStep { level } if level == -1.0));

    let s = pot("one_soliton(1, 2)");
    assert!((s.eval(0.0) + 2.0).abs() < 1e-15);
    for x in [-3.0, -0.4, 1.1, 6.0] {
        assert!((s.eval(x) + 2.0 / x.cosh().powi(2)).abs() < 1e-14, "x={x}");
    }
}

#[test]
fn bad_parameters_are_rejected() {
    for tag in ["one_soliton(-1, 2)", "one_soliton(1, 0)", "pure_step(0)", "box(1, -1)", "wave(3)"] {
        assert!(Catalog::parse(tag).and_then(|c| Potential::from_catalog(&c)).is_err(), "{tag}");
    }
}

#[test]
fn truncation_examples() {
    let step = pot("pure_step(1)").truncate_left(0.0);
    assert!(step.samples().iter().all(|&(_, q)| q == 0.0));
    assert!(matches!(step.left.kind, TailKind::Zero));

    let s = pot("one_soliton(1, 2)");
    let t = s.truncate_left(-20.0);
    for x in [-20.0, -5.0, 0.0, 7.5] {
        assert_eq!(t.eval(x), s.eval(x));
    }
    assert_eq!(t.eval(-20.5), 0.0);

    let b = pot("box(1, 1)");
    let tb = b.truncate_left(-1.0);
    assert!(b.samples().iter().zip(tb.samples()).all(|(p, q)| p.1 == q.1));
}

fn any_tag() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("zero".to_string()),
        (0.3f64..3.0, 0.1f64..10.0).prop_map(|(k, c)| format!("one_soliton({k}, {c})")),
        (0.1f64..3.0, 0.2f64..4.0).prop_map(|(v, l)| format!("box({v}, {l})")),
        (0.1f64..2.0).prop_map(|h| format!("pure_step({h})")),
        (0.1f64..4.0, 0.3f64..3.0).prop_map(|(a, w)| format!("sech2({a}, {w})")),
        (0u64..1000, 0.1f64..2.0).prop_map(|(s, a)| format!("rough_left({s}, {a})")),
    ]
}

proptest! {
    #[test]
    fn samples_are_real_and_bounded(tag in any_tag(), x in -60.0f64..60.0) {
        let p = pot(&tag);
        let q = p.eval(x);
        prop_assert!(q.is_finite());
        prop_assert!(q >= p.inf() - 1e-12 && q <= 1e-12);
    }

    #[test]
    fn tails_follow_their_descriptors(h in 0.1f64..2.0, depth in 0.0f64..500.0) {
        let p = pot(&format!("pure_step({h})"));
        let level = -h * h;
        prop_assert_eq!(p.eval(p.left.cutoff - depth - 1e-9), level);
        prop_assert_eq!(p.eval(p.right.cutoff + depth), 0.0);
    }

    #[test]
    fn truncation_converges_on_compacts(tag in any_tag(), b in 1.0f64..30.0) {
        // L1 distance on [-10, 10] shrinks to zero once the cut passes the interval
        let p = pot(&tag);
        let near = p.truncate_left(-b);
        let far = p.truncate_left(-b - 10.0);
        let l1 = |t: &Potential| -> f64 {
            (0..2000).map(|i| -10.0 + 0.01 * (i as f64 + 0.5)).map(|x| (p.eval(x) - t.eval(x)).abs() * 0.01).sum()
        };
        prop_assert!(l1(&far) <= l1(&near) + 1e-12);
        if b >= 10.0 {
            prop_assert_eq!(l1(&near), 0.0);
        }
    }

    #[test]
    fn file_round_trip(tag in any_tag()) {
        let p = pot(&tag);
        let back = Potential::from_file_string(&p.to_file_string()).unwrap();
        for x in [-7.25, -0.5, 0.0, 0.75, 12.0] {
            prop_assert_eq!(back.eval(x).to_bits(), p.eval(x).to_bits());
        }
    }
}
