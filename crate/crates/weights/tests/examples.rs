use dyadic_core::{DyadicInterval, DyadicStepFunction};
use weights::*;

/// Brute force over every dyadic interval, straight from the definition.
fn brute_a1(w: &DyadicStepFunction) -> f64 {
    DyadicInterval::all_up_to(w.depth())
        .map(|i| w.average(i) / w.min_on(i))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn constant_weight() {
    let w = DyadicStepFunction::constant(5, 3.0).unwrap();
    assert_eq!(a1_constant(&w).unwrap(), 1.0);
    assert_eq!(doubling_report(&w, 2).unwrap().constant, 1.0);
    assert_eq!(doubling_report(&w, 4).unwrap().constant, 1.0);
}

#[test]
fn two_valued_weight_has_constant_q() {
    for &q in &[1.0, 2.0, 4.0, 32.0] {
        let w = two_valued_extremal_weight(q).unwrap();
        assert_eq!(w.a1_constant(), q);
        let d = doubling_report(w.weight(), 2).unwrap();
        assert_eq!(d.constant, 2.0 * q - 1.0);
        if q > 1.0 {
            assert_eq!(d.worst_pair.0.generation, 1);
            assert_eq!(d.worst_pair.1.generation, 1);
        }
    }
}

#[test]
fn quarter_bump_weight() {
    let w = DyadicStepFunction::new(2, vec![4.0, 1.0, 1.0, 1.0]).unwrap();
    assert_eq!(w.average(DyadicInterval::root()), 7.0 / 4.0);
    assert_eq!(w.average(DyadicInterval::root().left()), 5.0 / 2.0);
    let (q, at) = a1_constant_with_witness(&w).unwrap();
    assert_eq!(q, 2.5);
    assert_eq!(at, DyadicInterval::root().left());
    assert_eq!(q, brute_a1(&w));
}

#[test]
fn obstacle_weight() {
    let w = build_obstacle_weight(1.0, 3).unwrap();
    assert!(w.weight().values().iter().all(|&v| v == 1.0));

    let w = build_obstacle_weight(4.0, 2).unwrap();
    assert_eq!(w.weight().values(), &[1.0, 4.0, 4.0, 1.0]);
    assert_eq!(w.weight().average(DyadicInterval::root()), 2.5);
    assert_eq!(w.a1_constant(), brute_a1(w.weight()));
    assert_eq!(w.a1_constant(), 2.5);

    for &q in &[2.0, 4.0, 8.0, 16.0] {
        let w = build_obstacle_weight(q, 2).unwrap();
        assert_eq!(w.a1_constant(), brute_a1(w.weight()));
        assert!(w.a1_constant() <= q);
        let d = doubling_report(w.weight(), 2).unwrap();
        assert!(d.constant <= 2.0 * q - 1.0);
        assert_eq!(d.constant, q);
    }
    assert!(build_obstacle_weight(0.5, 2).is_err());
    assert!(build_obstacle_weight(2.0, 1).is_err());
}

#[test]
fn errors() {
    let bad = DyadicStepFunction::new(1, vec![1.0, 0.0]).unwrap();
    assert!(matches!(
        a1_constant(&bad),
        Err(WeightError::NonPositive(_))
    ));
    let w = DyadicStepFunction::constant(2, 1.0).unwrap();
    assert!(matches!(
        doubling_report(&w, 3),
        Err(WeightError::BadArity(3))
    ));
}

#[test]
fn four_adic_doubling_of_quarter_pattern() {
    let w = DyadicStepFunction::new(
        4,
        (0..16)
            .map(|i| if i / 4 == 2 { 3.0 } else { 1.0 })
            .collect(),
    )
    .unwrap();
    let d = doubling_report(&w, 4).unwrap();
    // siblings at generation 1 have averages 3 and 1
    assert_eq!(d.constant, 3.0);
}

#[test]
fn json_cross_checks_cache() {
    let w = build_obstacle_weight(8.0, 3).unwrap();
    let s = w.to_json();
    assert_eq!(A1Weight::from_json(&s).unwrap(), w);
    let tampered = s.replace("\"a1Constant\":4.5", "\"a1Constant\":8.0");
    assert!(matches!(
        A1Weight::from_json(&tampered),
        Err(WeightError::CacheMismatch { .. })
    ));
}
