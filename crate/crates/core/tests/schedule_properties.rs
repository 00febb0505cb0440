use irsuav::schedule::{optimal_schedule, RateMatrix, Schedule};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=6, 1usize..=12).prop_flat_map(|(k, m)| prop::collection::vec(prop::collection::vec(0.0..12.0f64, m), k))
}

/// Max-min value over a grid of time shares, two nodes.
fn grid_value(r: &[Vec<f64>], delta: f64, step: f64) -> f64 {
    let m = r[0].len();
    let levels = (1.0 / step).round() as usize;
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; m];
    loop {
        let tau: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        let a: f64 = (0..m).map(|t| tau[t] * delta * r[0][t]).sum();
        let b: f64 = if r.len() > 1 {
            (0..m).map(|t| (1.0 - tau[t]) * delta * r[1][t]).sum()
        } else {
            f64::INFINITY
        };
        best = best.max(a.min(b));
        let mut t = 0;
        while t < m && idx[t] == levels {
            idx[t] = 0;
            t += 1;
        }
        if t == m {
            return best;
        }
        idx[t] += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn schedule_is_feasible_and_attains_its_value(rows in matrix(), delta in 0.01..2.0f64) {
        let rates = RateMatrix::new(rows.clone()).unwrap();
        let (sched, value) = optimal_schedule(&rates, delta).unwrap();
        prop_assert!(sched.check_feasible(1e-9).is_ok());
        for row in &sched.fractions {
            prop_assert!(row.iter().all(|&x| (0.0..=1.0 + 1e-9).contains(&x)));
        }
        let got = sched.min_throughput(&rates, delta);
        prop_assert!(got >= value - 1e-9 * value.abs().max(1.0));
        prop_assert!(value >= Schedule::uniform(rows.len(), rows[0].len()).min_throughput(&rates, delta) - 1e-9);
        // Nobody can beat having every slot to themselves.
        let cap = rows.iter().map(|r| r.iter().sum::<f64>() * delta).fold(f64::INFINITY, f64::min);
        prop_assert!(value <= cap + 1e-9 * cap.max(1.0));
    }

    #[test]
    fn lp_matches_grid_search_on_small_instances(
        rows in (1usize..=2, 1usize..=3).prop_flat_map(|(k, m)| prop::collection::vec(prop::collection::vec(0.0..4.0f64, m), k)),
    ) {
        let rates = RateMatrix::new(rows.clone()).unwrap();
        let (_, value) = optimal_schedule(&rates, 1.0).unwrap();
        let grid = grid_value(&rows, 1.0, 0.05);
        let resolution: f64 = 0.05 * (0..rows[0].len()).map(|t| rows.iter().map(|r| r[t]).fold(0.0, f64::max)).sum::<f64>();
        prop_assert!(value >= grid - 1e-9);
        prop_assert!(value - grid <= resolution + 1e-9);
    }

    #[test]
    fn rescaling_rates_rescales_value(rows in matrix(), scale in 0.1..10.0f64) {
        let (_, v1) = optimal_schedule(&RateMatrix::new(rows.clone()).unwrap(), 1.0).unwrap();
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
        let (_, v2) = optimal_schedule(&RateMatrix::new(scaled).unwrap(), 1.0).unwrap();
        prop_assert!((v2 - scale * v1).abs() <= 1e-8 * v2.abs().max(1.0));
    }
}

#[test]
fn deterministic_across_calls() {
    let rows: Vec<Vec<f64>> = (0..5)
        .map(|k| (0..40).map(|t| ((k * 7 + t * 3) % 11) as f64 * 0.5).collect())
        .collect();
    let rates = RateMatrix::new(rows).unwrap();
    let a = optimal_schedule(&rates, 0.1).unwrap();
    let b = optimal_schedule(&rates, 0.1).unwrap();
    assert_eq!(a, b);
}
