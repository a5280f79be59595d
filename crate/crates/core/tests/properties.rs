// Copyright 2026 The colocate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::collections::BTreeSet;
use std::path::Path;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use colocate::baseline::run_baseline;
use colocate::bench::synthetic_problem;
use colocate::geom::{
    normalized_buffer_distance, point_in_polygon, BoundingBox, GridSpec, Point2D, Shape, SpatialObject,
};
use colocate::io::{parse_dataset, serialize_dataset};
use colocate::measures::{confidence, expected_confidence, expected_support, support, Pattern, Rule};
use colocate::nullmodels::{generate_null, NullModelSpec, PlacementRegion, Strategy as NullStrategy};
use colocate::significance::{mine_significant, SignificanceConfig};
use colocate::transact::{build_buffers, get_transactions, grid_for_dataset, BufferParams, TransactionSet};
use colocate::uncertainty::UncertaintyModel;

fn random_points(rng: &mut ChaCha8Rng, n: usize, features: &[&str], extent: f64) -> Vec<SpatialObject> {
    (0..n)
        .map(|i| {
            let f = features[rng.gen_range(0..features.len())];
            let p = Point2D::new(rng.gen_range(0.0..extent), rng.gen_range(0.0..extent));
            SpatialObject::point(format!("o{i}"), f, p).with_radius(rng.gen_range(0.3..2.0))
        })
        .collect()
}

#[test]
fn halving_spacing_never_loses_transactions() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = BufferParams::default();
    for _ in 0..20 {
        let n = rng.gen_range(1..15);
        let d = random_points(&mut rng, n, &["A", "B", "C"], 10.0);
        let s = rng.gen_range(0.1..1.0);
        let coarse = grid_for_dataset(&d, s, &params, None).unwrap();
        let fine = grid_for_dataset(&d, s / 2.0, &params, None).unwrap();
        let a = get_transactions(&d, &coarse, &UncertaintyModel::Curve, &params).unwrap();
        let b = get_transactions(&d, &fine, &UncertaintyModel::Curve, &params).unwrap();
        assert!(b.len() >= a.len(), "spacing {s}: {} < {}", b.len(), a.len());
    }
}

#[test]
fn closer_pairs_share_more_transactions() {
    let grid = GridSpec::new(-3.0, -3.0, 5.0, 3.0, 0.05).unwrap();
    let params = BufferParams::default();
    let both = |d: f64| {
        let data = vec![
            SpatialObject::point("a", "A", Point2D::new(0.0, 0.0)).with_radius(1.0),
            SpatialObject::point("b", "B", Point2D::new(d, 0.0)).with_radius(1.0),
        ];
        let ts = get_transactions(&data, &grid, &UncertaintyModel::Curve, &params).unwrap();
        ts.transactions.iter().filter(|t| t.entries.len() == 2).count()
    };
    let counts: Vec<usize> = (0..=40).map(|k| both(k as f64 * 0.05)).collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    assert!(counts[0] > 0 && counts[40] == 0);
}

#[test]
fn certain_model_degenerates_to_deterministic_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = BufferParams::default();
    for _ in 0..20 {
        let d = random_points(&mut rng, 25, &["A", "B", "C"], 8.0);
        let grid = grid_for_dataset(&d, 0.25, &params, None).unwrap();
        let ts = get_transactions(&d, &grid, &UncertaintyModel::Certain, &params).unwrap();
        assert!(ts.transactions.iter().all(|t| t.entries.iter().all(|e| e.1 == 1.0)));
        for p in ["A", "A+B", "A+B+C", "B+C"] {
            let Ok(pat) = p.parse::<Pattern>() else { continue };
            if pat.resolve(&ts).is_none() {
                continue;
            }
            assert_eq!(expected_support(&pat, &ts), support(&pat, &ts) as f64);
        }
        let rule: Rule = "A->B".parse().unwrap();
        if let (Ok(a), Ok(b)) = (expected_confidence(&rule, &ts), confidence(&rule, &ts)) {
            assert_eq!(a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entries_only_where_a_buffer_reaches(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = BufferParams::default();
        let d = random_points(&mut rng, 8, &["A", "B"], 6.0);
        let grid = grid_for_dataset(&d, 0.3, &params, None).unwrap();
        let ts = get_transactions(&d, &grid, &UncertaintyModel::Curve, &params).unwrap();
        let buffers = build_buffers(&d, &params).unwrap();
        for t in &ts.transactions {
            for &(f, _) in &t.entries {
                let name = &ts.features[f as usize];
                let reached = d.iter().zip(&buffers).any(|(o, b)| {
                    &o.feature == name && normalized_buffer_distance(&t.grid_point, &b.shape).is_some()
                });
                prop_assert!(reached);
            }
        }
    }

    #[test]
    fn expected_support_is_anti_monotone(rows in prop::collection::vec(
        prop::collection::vec((0usize..5, 1u32..=10), 0..5), 1..15)
    ) {
        let names = ["A", "B", "C", "D", "E"];
        let rows: Vec<Vec<(&str, f64)>> = rows
            .iter()
            .map(|r| r.iter().map(|&(f, p)| (names[f], p as f64 / 10.0)).collect())
            .collect();
        let ts = TransactionSet::from_rows(&rows).unwrap();
        let feats = ts.features.clone();
        for (i, a) in feats.iter().enumerate() {
            for b in &feats[i + 1..] {
                let p = Pattern::new([a.as_str()]).unwrap();
                let q = Pattern::new([b.as_str()]).unwrap();
                let pq = p.union(&q);
                let joint = expected_support(&pq, &ts);
                prop_assert!(joint <= expected_support(&p, &ts).min(expected_support(&q, &ts)) + 1e-12);
                let rule = Rule::new(p, q).unwrap();
                if let Ok(c) = expected_confidence(&rule, &ts) {
                    prop_assert!((0.0..=1.0).contains(&c));
                }
            }
        }
    }
}

fn arb_point() -> impl Strategy<Value = Point2D> {
    (-1e6f64..1e6, -1e6f64..1e6).prop_map(|(x, y)| Point2D::new(x, y))
}

fn arb_shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        arb_point().prop_map(Shape::Point),
        prop::collection::vec(arb_point(), 2..6).prop_map(Shape::Polyline),
        // vertices on a circle in angular order form a simple polygon
        (arb_point(), 0.5f64..100.0, prop::collection::btree_set(0u32..360, 3..8)).prop_map(|(c, r, angles)| {
            Shape::Polygon(
                angles
                    .into_iter()
                    .map(|a| {
                        let t = (a as f64).to_radians();
                        Point2D::new(c.x + r * t.cos(), c.y + r * t.sin())
                    })
                    .collect(),
            )
        }),
    ]
}

fn arb_dataset() -> impl Strategy<Value = Vec<SpatialObject>> {
    prop::collection::vec(
        ("[A-Z][A-Z0-9_]{0,6}", arb_shape(), prop::option::of(0.0f64..1e7), prop::option::of(0.01f64..50.0)),
        0..20,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (feature, shape, amount, radius))| SpatialObject {
                id: format!("obj-{i}"),
                feature,
                shape,
                amount,
                fixed_radius: radius,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn csv_round_trip(d in arb_dataset()) {
        let mut buf = Vec::new();
        serialize_dataset(&mut buf, &d).unwrap();
        let back = parse_dataset(Path::new("mem.csv"), buf.as_slice()).unwrap();
        prop_assert_eq!(back, d);
    }
}

fn square(x0: f64, y0: f64, s: f64) -> Vec<Point2D> {
    vec![Point2D::new(x0, y0), Point2D::new(x0 + s, y0), Point2D::new(x0 + s, y0 + s), Point2D::new(x0, y0 + s)]
}

#[test]
fn stratified_placement_follows_weights() {
    let weights = [1.0, 2.0, 3.0, 4.0];
    let regions: Vec<PlacementRegion> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| PlacementRegion {
            id: format!("r{i}"),
            stratum: "urban".into(),
            weight: w,
            ring: square(10.0 * i as f64, 0.0, 5.0),
        })
        .collect();
    let dataset = vec![
        SpatialObject::point("case", "CASE", Point2D::new(1.0, 1.0)).with_radius(1.0),
        SpatialObject::point("src", "SRC", Point2D::new(50.0, 50.0)).with_radius(1.0),
    ];
    let spec = NullModelSpec::new(NullStrategy::RandomizeCasesOnly).with_cases(["CASE"]).with_regions(regions.clone());
    let draws = 1000;
    let mut observed = [0.0; 4];
    for seed in 0..draws {
        let null = generate_null(&dataset, &spec, seed).unwrap();
        let p = null[0].shape.anchor();
        let hit = regions.iter().position(|r| point_in_polygon(&p, &r.ring)).expect("case left its stratum");
        observed[hit] += 1.0;
    }
    let total: f64 = weights.iter().sum();
    let chi2: f64 = weights
        .iter()
        .zip(observed)
        .map(|(w, o)| {
            let e = draws as f64 * w / total;
            (o - e).powi(2) / e
        })
        .sum();
    let p = 1.0 - ChiSquared::new(3.0).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2}, p {p}, counts {observed:?}");
}

#[test]
fn baseline_survivors_are_found_by_the_main_miner() {
    let problem = synthetic_problem(2, 0.5, UncertaintyModel::Curve).unwrap();
    let cfg = SignificanceConfig { runs: 39, master_seed: 5, ..Default::default() };
    let main: BTreeSet<String> =
        mine_significant(&problem, &cfg).unwrap().significant.into_iter().map(|s| s.label).collect();
    let base = run_baseline(&problem, &cfg, true).unwrap();
    let tested = base.significance.unwrap();
    assert!(!tested.significant.is_empty());
    for s in &tested.significant {
        assert!(main.contains(&s.label), "{} missing from the main report", s.label);
    }
    assert!(base.prevalent.len() < base.candidates);
}

#[test]
fn stations_morph_amount_buffers_in_the_pipeline() {
    use colocate::windfield::WindStation;
    let d = vec![SpatialObject::point("f", "A", Point2D::new(0.0, 0.0)).with_amount(1000.0)];
    let calm = BufferParams::default();
    let windy = BufferParams {
        stations: vec![WindStation { id: "w".into(), location: Point2D::new(5.0, 5.0), speed: 20.0, direction: 270.0 }],
        ..BufferParams::default()
    };
    let region = BoundingBox { min_x: -30.0, min_y: -30.0, max_x: 30.0, max_y: 30.0 };
    let grid = grid_for_dataset(&d, 0.5, &windy, Some(&region)).unwrap();
    let a = get_transactions(&d, &grid, &UncertaintyModel::Certain, &calm).unwrap();
    let b = get_transactions(&d, &grid, &UncertaintyModel::Certain, &windy).unwrap();
    // same area, shifted downwind (east for a westerly wind)
    let mean_x = |ts: &TransactionSet| ts.transactions.iter().map(|t| t.grid_point.x).sum::<f64>() / ts.len() as f64;
    assert!(mean_x(&b) > mean_x(&a) + 1.0);
    let ratio = b.len() as f64 / a.len() as f64;
    assert!((ratio - 1.0).abs() < 0.05, "area ratio {ratio}");
}
