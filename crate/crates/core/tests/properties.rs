use owcoreset::centers::{exact_center_1d, SampledCenters, SortedLine};
use owcoreset::coreset_nd::{build_pcentrum_coreset, CoresetParams};
use owcoreset::objective::{cost_p, cost_v, owa_decompose, p_grid};
use owcoreset::projection::{direction_net, project};
use owcoreset::splitting::{split_by_delta, split_by_length, Direction};
use owcoreset::verify::{
    brute_cost_p, brute_cost_v, claim_check, coreset_error, random_center_sets, Objective,
};
use owcoreset::{Dataset, Point, WeightVector, WeightedCoreset, WeightedPoints};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn points(d: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-50.0..50.0f64, d), 1..max)
}

fn centers(d: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(-60.0..60.0f64, d), 1..4)
        .prop_map(|cs| cs.into_iter().map(|c| Point::new(c).unwrap()).collect())
}

/// Sorted coordinates with frequent repeats and positive integer weights.
fn line() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((-30i32..30, 1u32..5), 1..120).prop_map(|mut v| {
        v.sort();
        v.into_iter()
            .map(|(x, w)| (x as f64 * 0.5, w as f64))
            .unzip()
    })
}

proptest! {
    #[test]
    fn top_p_cost_is_concave_in_p(rows in points(2, 60), cs in centers(2)) {
        let data = Dataset::from_rows(&rows).unwrap();
        let n = data.total_weight();
        let costs: Vec<f64> = (1..=n).map(|p| cost_p(&data, &cs, p).unwrap()).collect();
        let mut prev_inc = f64::INFINITY;
        let mut prev = 0.0;
        for c in costs {
            let inc = c - prev;
            prop_assert!(inc >= -1e-9);
            prop_assert!(inc <= prev_inc + 1e-9);
            prev_inc = inc;
            prev = c;
        }
    }

    #[test]
    fn multiplicities_match_expansion(
        rows in points(3, 40),
        mult in prop::collection::vec(1u64..5, 40),
        cs in centers(3),
        pick in 0.0..1.0f64,
    ) {
        let weights: Vec<u64> = mult[..rows.len()].to_vec();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let weighted = Dataset::with_multiplicities(3, flat, weights.clone()).unwrap();
        let expanded_rows: Vec<Vec<f64>> = rows
            .iter()
            .zip(&weights)
            .flat_map(|(r, &w)| std::iter::repeat_n(r.clone(), w as usize))
            .collect();
        let expanded = Dataset::from_rows(&expanded_rows).unwrap();
        let n = weighted.total_weight();
        let p = 1 + ((n - 1) as f64 * pick) as u64;
        let a = cost_p(&weighted, &cs, p).unwrap();
        prop_assert!(close(a, cost_p(&expanded, &cs, p).unwrap(), 1e-12));
        prop_assert!(close(a, brute_cost_p(&weighted, &cs, p), 1e-12));
        let v = WeightVector::power_law(n as usize, 1.0).unwrap();
        prop_assert!(close(cost_v(&weighted, &cs, &v).unwrap(), brute_cost_v(&expanded, &cs, &v), 1e-12));
    }

    #[test]
    fn decomposition_rebuilds_weights(mut v in prop::collection::vec(0.0..10.0f64, 1..50)) {
        v.sort_by(|a, b| b.total_cmp(a));
        let w = WeightVector::new(v.clone()).unwrap();
        let terms = owa_decompose(&w);
        for (i, &vi) in v.iter().enumerate() {
            let rebuilt: f64 = terms.iter().filter(|&&(p, _)| p as usize > i).map(|&(_, c)| c).sum();
            prop_assert!(close(rebuilt, vi, 1e-12));
        }
    }

    #[test]
    fn grid_is_geometric(n in 1u64..100_000, eps in 0.01..1.0f64) {
        let g = p_grid(n, eps).unwrap();
        prop_assert_eq!(g[0], 1);
        prop_assert_eq!(*g.last().unwrap(), n);
        for w in g.windows(2) {
            prop_assert!(w[0] < w[1]);
            prop_assert!(w[1] == w[0] + 1 || (w[1] as f64) <= (1.0 + eps) * w[0] as f64 + 1.0);
        }
    }

    #[test]
    fn delta_split_is_a_greedy_partition((xs, ws) in line(), frac in 0.0..1.0f64, right in any::<bool>()) {
        let total = owcoreset::objective::interval_stats(&xs, &ws).unwrap().delta;
        let t = total * frac;
        let dir = if right { Direction::RightToLeft } else { Direction::LeftToRight };
        let set = split_by_delta(&xs, &ws, t, dir).unwrap();
        set.validate(xs.len()).unwrap();
        let mut start = 0;
        for iv in &set.intervals {
            prop_assert_eq!(iv.start, start);
            start = iv.end;
            let single_atom = xs[iv.start] == xs[iv.end - 1];
            prop_assert!(single_atom || iv.stats.delta <= t * (1.0 + 1e-9) + 1e-12);
            // Cuts fall between distinct coordinates.
            prop_assert!(iv.end == xs.len() || xs[iv.end] != xs[iv.end - 1]);
        }
        prop_assert_eq!(start, xs.len());
    }

    #[test]
    fn length_split_bounds_width((xs, ws) in line(), len in 0.1..20.0f64) {
        let set = split_by_length(&xs, &ws, len).unwrap();
        set.validate(xs.len()).unwrap();
        for pair in set.intervals.windows(2) {
            // Maximal: the next atom would not fit.
            prop_assert!(xs[pair[1].start] - xs[pair[0].start] > len);
        }
        for iv in &set.intervals {
            prop_assert!(xs[iv.end - 1] - xs[iv.start] <= len);
        }
    }

    #[test]
    fn net_covers_random_directions(d in 1usize..5, eps in 0.2..0.9f64, raw in prop::collection::vec(-1.0..1.0f64, 4)) {
        let u: Vec<f64> = raw[..d].to_vec();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-6);
        let u: Vec<f64> = u.iter().map(|x| x / norm).collect();
        let net = direction_net(d, eps).unwrap();
        let best = net
            .iter()
            .map(|w| {
                let minus: f64 = u.iter().zip(w).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let plus: f64 = u.iter().zip(w).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
                minus.min(plus)
            })
            .fold(f64::INFINITY, f64::min);
        prop_assert!(best <= eps + 1e-12);
    }

    #[test]
    fn projection_keeps_every_point(rows in points(2, 80), cs in centers(2), eps in 0.1..0.5f64) {
        let data = Dataset::from_rows(&rows).unwrap();
        let proj = project(&data, &cs, eps).unwrap();
        prop_assert_eq!(proj.assignment.len(), data.len());
        let mut seen = vec![0u32; data.len()];
        for (li, entries) in proj.entries.iter().enumerate() {
            for w in entries.windows(2) {
                prop_assert!(w[0].coord <= w[1].coord);
            }
            for e in entries {
                prop_assert_eq!(proj.assignment[e.source], li);
                seen[e.source] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(proj.to_dataset().total_weight(), data.total_weight());
    }

    #[test]
    fn coreset_error_ignores_entry_order(rows in points(2, 40), seed in any::<u64>(), rot in 0usize..40) {
        let data = Dataset::from_rows(&rows).unwrap();
        let n = data.len();
        let half: Vec<(Vec<f64>, u64)> = (0..n).step_by(2).map(|i| {
            let w = if i + 1 < n { 2 } else { 1 };
            (data.point(i).to_vec(), w)
        }).collect();
        let mut shuffled = half.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        let raw = |entries: &[(Vec<f64>, u64)]| {
            let coords = entries.iter().flat_map(|e| e.0.clone()).collect();
            WeightedCoreset::new(2, coords, entries.iter().map(|e| e.1).collect()).unwrap()
        };
        let (a, b) = (raw(&half), raw(&shuffled));
        let cs = random_center_sets(&data, 2, 5, seed);
        let obj = Objective::TopPList((1..=n as u64).collect());
        let ea = coreset_error(&data, &a, &cs, &obj).unwrap();
        let eb = coreset_error(&data, &b, &cs, &obj).unwrap();
        prop_assert_eq!(ea.max_error, eb.max_error);
    }

    #[test]
    fn admissible_claims_are_violated(eps in 0.001..0.49f64, a in 1u64..100_000, stretch in 1.0..100.0f64) {
        let b_min = (1.0 + 1.0 / eps).powi(2).max((1.0 + 12.0 * eps.sqrt()).powi(4) * a as f64).ceil();
        let b = (b_min * stretch).ceil() as u64;
        let c = claim_check(a, b, eps).unwrap();
        prop_assert!(c.violated);
        prop_assert!(a <= c.p_hat && c.p_hat <= b);
    }

    #[test]
    fn fast_line_cost_matches_direct(xs in prop::collection::vec(-100.0..100.0f64, 1..200), y in -150.0..150.0f64, pick in 0.0..1.0f64) {
        let line = SortedLine::new(&xs).unwrap();
        let p = 1 + ((xs.len() - 1) as f64 * pick) as u64;
        let direct = brute_cost_p(&Dataset::from_coords_1d(&xs).unwrap(), &[Point::new(vec![y]).unwrap()], p);
        prop_assert!(close(line.cost(y, p).unwrap(), direct, 1e-12));
        let best = exact_center_1d(&xs, p).unwrap();
        prop_assert!(best.objective <= direct * (1.0 + 1e-12) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pcentrum_coreset_keeps_weight_and_bound(
        rows in points(2, 400),
        seed in any::<u64>(),
        pick in 0.0..1.0f64,
        eps in 0.1..0.5f64,
    ) {
        let data = Dataset::from_rows(&rows).unwrap();
        let n = data.total_weight();
        let p = 1 + ((n - 1) as f64 * pick) as u64;
        let c = build_pcentrum_coreset(&data, 2, p, &CoresetParams::new(eps), &SampledCenters::new(seed)).unwrap();
        prop_assert_eq!(c.total_weight(), n);
        prop_assert!(c.size() <= data.len());
        let cs = random_center_sets(&data, 2, 20, seed ^ 1);
        let err = coreset_error(&data, &c, &cs, &Objective::TopP(p)).unwrap();
        prop_assert!(err.max_error <= eps, "error {} at eps {}", err.max_error, eps);
    }
}
