#[path = "support/oracles.rs"]
mod oracles;

use icboot_core::gcm::{gcm_left_slopes, isotonic_weighted, CusumDiagram};
use proptest::prelude::*;

const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn all_sequences(len: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                GRID.iter().map(move |&g| {
                    let mut s = s.clone();
                    s.push(g);
                    s
                })
            })
            .collect();
    }
    out
}

#[test]
fn hull_oracle_agrees_on_documented_diagrams() {
    let pts = [(0., 0.), (1., 1.), (2., 1.), (3., 2.)];
    assert_eq!(oracles::hull_slopes(&pts), vec![0.5, 0.5, 1.0]);
    let pts = [(0., 0.), (1., 0.), (2., 2.)];
    assert_eq!(oracles::hull_slopes(&pts), vec![0.0, 2.0]);
    for pts in [
        vec![(0., 0.), (1., 1.), (2., 1.), (3., 2.)],
        vec![(0., 0.), (1., 0.), (2., 2.)],
        vec![(0., 0.), (0.5, 3.), (1.5, -1.), (4., 0.), (5., 7.)],
    ] {
        let got = gcm_left_slopes(&CusumDiagram::new(&pts).unwrap());
        let want = oracles::hull_slopes(&pts);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn isotonic_matches_level_set_oracle_exhaustively() {
    let weight_patterns: [&[f64]; 3] = [
        &[1.0; 6],
        &[1.0, 2.0, 0.5, 3.0, 1.0, 0.25],
        &[4.0, 1.0, 1.0, 0.5, 2.0, 1.5],
    ];
    for len in 1..=6 {
        for values in all_sequences(len) {
            for w in weight_patterns {
                let w = &w[..len];
                let fit = isotonic_weighted(&values, w).unwrap();
                let want = oracles::level_set_isotonic(&values, w);
                for (a, b) in fit.values.iter().zip(&want) {
                    assert!(
                        (a - b).abs() < 1e-12,
                        "{values:?} {w:?}: {:?} vs {want:?}",
                        fit.values
                    );
                }
            }
        }
    }
}

fn weighted_instance(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_len).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(0.01f64..5.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn isotonic_equals_gcm_slopes((values, weights) in weighted_instance(50)) {
        let fit = isotonic_weighted(&values, &weights).unwrap();
        let slopes = gcm_left_slopes(&CusumDiagram::from_weighted(&values, &weights).unwrap());
        for (a, b) in fit.values.iter().zip(&slopes) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn isotonic_invariants((values, weights) in weighted_instance(50)) {
        let fit = isotonic_weighted(&values, &weights).unwrap();
        prop_assert!(fit.values.windows(2).all(|w| w[0] <= w[1]));
        let raw: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();
        prop_assert!((fit.weighted_sum() - raw).abs() <= 1e-10 * raw.abs().max(1.0));
        let again = isotonic_weighted(&fit.values, &weights).unwrap();
        prop_assert_eq!(again.values, fit.values);
    }

    #[test]
    fn gcm_slopes_match_hull_and_are_monotone(
        steps in prop::collection::vec((0.05f64..3.0, -5.0f64..5.0), 1..12)
    ) {
        let mut pts = vec![(0.0, 0.0)];
        for (dx, y) in steps {
            let x = pts.last().unwrap().0 + dx;
            pts.push((x, y));
        }
        let slopes = gcm_left_slopes(&CusumDiagram::new(&pts).unwrap());
        prop_assert!(slopes.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let want = oracles::hull_slopes(&pts);
        for (a, b) in slopes.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }
}
