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

//! Null-model dataset generators and synthetic benchmark datasets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{point_in_polygon, BoundingBox, Point2D, Shape, SpatialObject};
use crate::{Error, Result};

/// Side length of the synthetic study square.
pub const SYNTH_EXTENT: f64 = 100.0;
/// Buffer radius used by every synthetic object.
pub const SYNTH_RADIUS: f64 = 1.0;
/// Radius of the disk in which an associated D case is placed around its
/// source.
pub const CASE_SPREAD: f64 = 0.6;

const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Shuffle source labels across source sites and re-place cases.
    #[default]
    RandomizeBoth,
    RandomizeSourcesOnly,
    RandomizeCasesOnly,
    /// Move every object to a uniform position in the study region.
    FullyRandom,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::RandomizeBoth => "randomize_both",
            Strategy::RandomizeSourcesOnly => "randomize_sources_only",
            Strategy::RandomizeCasesOnly => "randomize_cases_only",
            Strategy::FullyRandom => "fully_random",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "randomize_both" | "both" => Strategy::RandomizeBoth,
            "randomize_sources_only" | "sources" => Strategy::RandomizeSourcesOnly,
            "randomize_cases_only" | "cases" => Strategy::RandomizeCasesOnly,
            "fully_random" | "random" => Strategy::FullyRandom,
            _ => return Err(Error::validation(format!("unknown null model strategy {s:?}"))),
        })
    }
}

/// Area into which cases of one stratum are placed, weighted against the
/// other regions of the same stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRegion {
    pub id: String,
    pub stratum: String,
    pub weight: f64,
    pub ring: Vec<Point2D>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NullModelSpec {
    pub strategy: Strategy,
    /// Features treated as cases; everything else is a source.
    pub case_features: BTreeSet<String>,
    pub regions: Vec<PlacementRegion>,
    /// Defaults to the bounding box of the observed dataset.
    pub study_region: Option<BoundingBox>,
}

impl NullModelSpec {
    pub fn new(strategy: Strategy) -> Self {
        NullModelSpec { strategy, ..Default::default() }
    }

    pub fn with_cases<I, S>(mut self, features: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.case_features = features.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_regions(mut self, regions: Vec<PlacementRegion>) -> Self {
        self.regions = regions;
        self
    }

    pub fn with_study_region(mut self, bbox: BoundingBox) -> Self {
        self.study_region = Some(bbox);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut totals: BTreeMap<&str, f64> = BTreeMap::new();
        for r in &self.regions {
            Shape::Polygon(r.ring.clone())
                .validate()
                .map_err(|e| Error::validation(format!("region {}: {e}", r.id)))?;
            if !(r.weight.is_finite() && r.weight >= 0.0) {
                return Err(Error::validation(format!("region {}: weight must be >= 0", r.id)));
            }
            *totals.entry(&r.stratum).or_default() += r.weight;
        }
        if let Some((s, _)) = totals.iter().find(|(_, w)| **w <= 0.0) {
            return Err(Error::validation(format!("weights of stratum {s} sum to 0")));
        }
        if let Some(b) = &self.study_region {
            if !(b.width() >= 0.0 && b.height() >= 0.0) {
                return Err(Error::validation("study region is inverted"));
            }
        }
        Ok(())
    }

    fn study_region_for(&self, dataset: &[SpatialObject]) -> Result<BoundingBox> {
        if let Some(b) = self.study_region {
            return Ok(b);
        }
        BoundingBox::of_points(dataset.iter().flat_map(|o| o.shape.vertices()))
            .ok_or_else(|| Error::validation("cannot derive a study region from an empty dataset"))
    }
}

fn uniform_in(rng: &mut impl Rng, b: &BoundingBox) -> Point2D {
    Point2D::new(b.min_x + rng.gen::<f64>() * b.width(), b.min_y + rng.gen::<f64>() * b.height())
}

fn uniform_in_polygon(rng: &mut impl Rng, ring: &[Point2D]) -> Result<Point2D> {
    let b = BoundingBox::of_points(ring).ok_or_else(|| Error::validation("empty region"))?;
    for _ in 0..MAX_REJECTIONS {
        let p = uniform_in(rng, &b);
        if point_in_polygon(&p, ring) {
            return Ok(p);
        }
    }
    Err(Error::validation("region has too little area for rejection sampling"))
}

fn uniform_in_disk(rng: &mut impl Rng, center: Point2D, radius: f64) -> Point2D {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    Point2D::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

fn move_to(obj: &SpatialObject, to: Point2D) -> SpatialObject {
    let a = obj.shape.anchor();
    SpatialObject { shape: obj.shape.translated(to.x - a.x, to.y - a.y), ..obj.clone() }
}

/// Stratum of the first region containing `p`.
fn stratum_of<'a>(regions: &'a [PlacementRegion], p: &Point2D) -> Option<&'a str> {
    regions.iter().find(|r| point_in_polygon(p, &r.ring)).map(|r| r.stratum.as_str())
}

fn place_cases(
    dataset: &mut [SpatialObject],
    case_idx: &[usize],
    spec: &NullModelSpec,
    study: &BoundingBox,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mut strata: BTreeMap<&str, Vec<&PlacementRegion>> = BTreeMap::new();
    for r in &spec.regions {
        strata.entry(&r.stratum).or_default().push(r);
    }
    // stratum membership is read from the observed positions before moving
    let targets: Vec<Option<String>> =
        case_idx.iter().map(|&i| stratum_of(&spec.regions, &dataset[i].shape.anchor()).map(str::to_owned)).collect();
    for (&i, stratum) in case_idx.iter().zip(targets) {
        let to = match stratum {
            None => uniform_in(rng, study),
            Some(s) => {
                let regions = &strata[s.as_str()];
                let total: f64 = regions.iter().map(|r| r.weight).sum();
                let mut u = rng.gen::<f64>() * total;
                let mut pick = regions[regions.len() - 1];
                for r in regions {
                    if u < r.weight {
                        pick = r;
                        break;
                    }
                    u -= r.weight;
                }
                uniform_in_polygon(rng, &pick.ring)?
            }
        };
        dataset[i] = move_to(&dataset[i], to);
    }
    Ok(())
}

/// Draws one randomized dataset under `spec`. Per-feature instance counts
/// are preserved exactly and the result depends only on the inputs and
/// `seed`.
pub fn generate_null(dataset: &[SpatialObject], spec: &NullModelSpec, seed: u64) -> Result<Vec<SpatialObject>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_null_with(dataset, spec, &mut rng)
}

pub fn generate_null_with(
    dataset: &[SpatialObject],
    spec: &NullModelSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<SpatialObject>> {
    spec.validate()?;
    let mut out = dataset.to_vec();
    if out.is_empty() {
        return Ok(out);
    }
    let study = spec.study_region_for(dataset)?;
    let (cases, sources): (Vec<usize>, Vec<usize>) =
        (0..out.len()).partition(|&i| spec.case_features.contains(&out[i].feature));

    let shuffle_sources = matches!(spec.strategy, Strategy::RandomizeBoth | Strategy::RandomizeSourcesOnly);
    let move_cases = matches!(spec.strategy, Strategy::RandomizeBoth | Strategy::RandomizeCasesOnly);
    match spec.strategy {
        Strategy::FullyRandom => {
            for o in out.iter_mut() {
                *o = move_to(o, uniform_in(rng, &study));
            }
        }
        _ => {
            if shuffle_sources {
                let mut payloads: Vec<_> =
                    sources.iter().map(|&i| (out[i].feature.clone(), out[i].amount, out[i].fixed_radius)).collect();
                payloads.shuffle(rng);
                for (&i, (feature, amount, radius)) in sources.iter().zip(payloads) {
                    out[i].feature = feature;
                    out[i].amount = amount;
                    out[i].fixed_radius = radius;
                }
            }
            if move_cases {
                place_cases(&mut out, &cases, spec, &study, rng)?;
            }
        }
    }
    Ok(out)
}

fn synth_obj(feature: &str, n: usize, at: Point2D) -> SpatialObject {
    SpatialObject::point(format!("{feature}_{n}"), feature, at).with_radius(SYNTH_RADIUS)
}

fn synth_square() -> BoundingBox {
    BoundingBox { min_x: 0.0, min_y: 0.0, max_x: SYNTH_EXTENT, max_y: SYNTH_EXTENT }
}

/// Uniform in the disk of `radius` around `center`, redrawn until inside
/// the study square.
fn near(rng: &mut impl Rng, center: Point2D, radius: f64) -> Point2D {
    let sq = synth_square();
    loop {
        let p = uniform_in_disk(rng, center, radius);
        if p.x >= sq.min_x && p.x <= sq.max_x && p.y >= sq.min_y && p.y <= sq.max_y {
            return p;
        }
    }
}

fn midpoint(a: Point2D, b: Point2D) -> Point2D {
    Point2D::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
}

/// Synthetic association benchmark over a 100x100 square with unit buffers.
///
/// * C1, C2: 20 instances each, every C2 within one unit of a C1.
/// * C3, C4: 30 instances each, 20 of them in associated pairs.
/// * C5: 40 instances, 30 of which have a nearby D.
/// * C6: 30 independent instances.
/// * C7: 30 instances, none within two units of any D.
/// * D: 20 near C1/C2 pairs, 20 near C3/C4 pairs, 30 near C5, 30 random.
///   "Near" means uniform within [`CASE_SPREAD`] of the pair midpoint or
///   the C5 instance.
pub fn gen_synthetic_assoc(seed: u64) -> Vec<SpatialObject> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sq = synth_square();
    let mut out = Vec::with_capacity(300);
    let mut d = Vec::with_capacity(100);

    for i in 0..20 {
        let c1 = uniform_in(&mut rng, &sq);
        let c2 = near(&mut rng, c1, SYNTH_RADIUS);
        out.push(synth_obj("C1", i, c1));
        out.push(synth_obj("C2", i, c2));
        d.push(near(&mut rng, midpoint(c1, c2), CASE_SPREAD));
    }
    for i in 0..30 {
        let c3 = uniform_in(&mut rng, &sq);
        let c4 = if i < 20 { near(&mut rng, c3, SYNTH_RADIUS) } else { uniform_in(&mut rng, &sq) };
        out.push(synth_obj("C3", i, c3));
        out.push(synth_obj("C4", i, c4));
        if i < 20 {
            d.push(near(&mut rng, midpoint(c3, c4), CASE_SPREAD));
        }
    }
    for i in 0..40 {
        let c5 = uniform_in(&mut rng, &sq);
        out.push(synth_obj("C5", i, c5));
        if i < 30 {
            d.push(near(&mut rng, c5, CASE_SPREAD));
        }
    }
    for _ in 0..30 {
        d.push(uniform_in(&mut rng, &sq));
    }
    for i in 0..30 {
        out.push(synth_obj("C6", i, uniform_in(&mut rng, &sq)));
    }
    for i in 0..30 {
        let c7 = loop {
            let p = uniform_in(&mut rng, &sq);
            if d.iter().all(|q| q.distance(&p) > 2.0 * SYNTH_RADIUS) {
                break p;
            }
        };
        out.push(synth_obj("C7", i, c7));
    }
    out.extend(d.into_iter().enumerate().map(|(i, p)| synth_obj("D", i, p)));
    out
}

/// Number of pairs in a distance-pair dataset.
pub const DISTANCE_PAIRS: usize = 30;

/// 30 `f1` instances uniform in the square, each with an `f2` partner at a
/// distance drawn uniformly from `[lo, hi)` in a uniform direction.
pub fn gen_distance_pair(lo: f64, hi: f64, seed: u64) -> Result<Vec<SpatialObject>> {
    if !(lo >= 0.0 && lo < hi && hi <= 2.0 * SYNTH_RADIUS) {
        return Err(Error::validation(format!("distance range [{lo}, {hi}) must satisfy 0 <= lo < hi <= 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sq = synth_square();
    let mut out = Vec::with_capacity(2 * DISTANCE_PAIRS);
    for i in 0..DISTANCE_PAIRS {
        let a = uniform_in(&mut rng, &sq);
        let dist = rng.gen_range(lo..hi);
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        let b = Point2D::new(a.x + dist * theta.cos(), a.y + dist * theta.sin());
        out.push(synth_obj("f1", i, a));
        out.push(synth_obj("f2", i, b));
    }
    Ok(out)
}

/// Instance count per feature.
pub fn feature_counts(dataset: &[SpatialObject]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for o in dataset {
        *m.entry(o.feature.clone()).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert_eq, proptest};

    fn square(x0: f64, y0: f64, s: f64) -> Vec<Point2D> {
        vec![Point2D::new(x0, y0), Point2D::new(x0 + s, y0), Point2D::new(x0 + s, y0 + s), Point2D::new(x0, y0 + s)]
    }

    fn region(id: &str, stratum: &str, weight: f64, ring: Vec<Point2D>) -> PlacementRegion {
        PlacementRegion { id: id.into(), stratum: stratum.into(), weight, ring }
    }

    fn small_dataset() -> Vec<SpatialObject> {
        let mut d = Vec::new();
        for i in 0..6 {
            let f = ["A", "B", "A"][i % 3];
            d.push(
                SpatialObject::point(format!("s{i}"), f, Point2D::new(i as f64, 2.0 * i as f64))
                    .with_amount(10.0 + i as f64),
            );
        }
        for i in 0..5 {
            d.push(SpatialObject::point(format!("c{i}"), "CASE", Point2D::new(1.0 + i as f64, 1.0)).with_radius(0.5));
        }
        d
    }

    #[test]
    fn synthetic_counts() {
        let d = gen_synthetic_assoc(7);
        let c = feature_counts(&d);
        let expect = [("C1", 20), ("C2", 20), ("C3", 30), ("C4", 30), ("C5", 40), ("C6", 30), ("C7", 30), ("D", 100)];
        for (f, n) in expect {
            assert_eq!(c[f], n, "{f}");
        }
        assert_eq!(c.len(), 8);
    }

    #[test]
    fn synthetic_c7_avoids_d() {
        let d = gen_synthetic_assoc(11);
        let ds: Vec<Point2D> = d.iter().filter(|o| o.feature == "D").map(|o| o.shape.anchor()).collect();
        for o in d.iter().filter(|o| o.feature == "C7") {
            let p = o.shape.anchor();
            assert!(ds.iter().all(|q| q.distance(&p) > 2.0));
        }
    }

    #[test]
    fn synthetic_is_deterministic_and_in_range() {
        let a = gen_synthetic_assoc(3);
        assert_eq!(a, gen_synthetic_assoc(3));
        assert_ne!(a, gen_synthetic_assoc(4));
        for o in &a {
            let p = o.shape.anchor();
            assert!((0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y));
            assert_eq!(o.fixed_radius, Some(1.0));
        }
    }

    #[test]
    fn distance_pairs_respect_range() {
        for (lo, hi) in [(0.0, 0.2), (1.8, 2.0), (0.6, 0.8)] {
            let d = gen_distance_pair(lo, hi, 5).unwrap();
            assert_eq!(d.len(), 60);
            for pair in d.chunks(2) {
                let dist = pair[0].shape.anchor().distance(&pair[1].shape.anchor());
                assert!(dist >= lo - 1e-12 && dist < hi + 1e-12, "{dist}");
                // unit buffers: lens width is 2 - dist
                if lo >= 1.8 {
                    assert!(2.0 - dist < 0.2 + 1e-12);
                }
            }
        }
        assert!(gen_distance_pair(0.5, 0.5, 1).is_err());
        assert!(gen_distance_pair(1.0, 2.5, 1).is_err());
    }

    #[test]
    fn fully_random_preserves_counts_inside_region() {
        let d = gen_synthetic_assoc(1);
        let spec = NullModelSpec::new(Strategy::FullyRandom).with_study_region(synth_square());
        let n = generate_null(&d, &spec, 9).unwrap();
        assert_eq!(feature_counts(&n), feature_counts(&d));
        assert_ne!(n, d);
        assert!(n.iter().all(|o| {
            let p = o.shape.anchor();
            (0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y)
        }));
    }

    #[test]
    fn sources_only_keeps_cases_and_sites() {
        let d = small_dataset();
        let spec = NullModelSpec::new(Strategy::RandomizeSourcesOnly).with_cases(["CASE"]);
        let n = generate_null(&d, &spec, 2).unwrap();
        for (a, b) in d.iter().zip(&n) {
            assert_eq!(a.shape, b.shape);
            assert_eq!(a.id, b.id);
            if a.feature == "CASE" {
                assert_eq!(a, b);
            }
        }
        assert_eq!(feature_counts(&n), feature_counts(&d));
    }

    #[test]
    fn both_permutes_labels_over_sites() {
        let d = small_dataset();
        let spec = NullModelSpec::new(Strategy::RandomizeBoth).with_cases(["CASE"]);
        let n = generate_null(&d, &spec, 4).unwrap();
        let sites = |x: &[SpatialObject]| {
            let mut v: Vec<String> =
                x.iter().filter(|o| o.feature != "CASE").map(|o| format!("{:?}", o.shape)).collect();
            v.sort();
            v
        };
        let labels = |x: &[SpatialObject]| {
            let mut v: Vec<(String, String)> = x
                .iter()
                .filter(|o| o.feature != "CASE")
                .map(|o| (o.feature.clone(), format!("{:?}", o.amount)))
                .collect();
            v.sort();
            v
        };
        assert_eq!(sites(&n), sites(&d));
        assert_eq!(labels(&n), labels(&d));
        assert_eq!(feature_counts(&n), feature_counts(&d));
    }

    #[test]
    fn cases_only_keeps_sources() {
        let d = small_dataset();
        let spec = NullModelSpec::new(Strategy::RandomizeCasesOnly).with_cases(["CASE"]);
        let n = generate_null(&d, &spec, 4).unwrap();
        for (a, b) in d.iter().zip(&n) {
            if a.feature != "CASE" {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn zero_weight_stratum_is_an_error() {
        let d = small_dataset();
        let spec = NullModelSpec::new(Strategy::RandomizeCasesOnly).with_cases(["CASE"]).with_regions(vec![region(
            "r1",
            "s",
            0.0,
            square(0.0, 0.0, 10.0),
        )]);
        assert!(matches!(generate_null(&d, &spec, 1), Err(Error::Validation(_))));
    }

    #[test]
    fn stratum_counts_are_preserved() {
        let d = small_dataset();
        let regions = vec![
            region("u1", "urban", 1.0, square(0.0, 0.0, 2.5)),
            region("u2", "urban", 3.0, square(10.0, 10.0, 1.0)),
            region("r1", "rural", 1.0, square(2.5, 0.0, 10.0)),
        ];
        let spec = NullModelSpec::new(Strategy::RandomizeCasesOnly).with_cases(["CASE"]).with_regions(regions.clone());
        let count = |x: &[SpatialObject], s: &str| {
            x.iter().filter(|o| o.feature == "CASE" && stratum_of(&regions, &o.shape.anchor()) == Some(s)).count()
        };
        for seed in 0..20 {
            let n = generate_null(&d, &spec, seed).unwrap();
            assert_eq!(count(&n, "urban"), count(&d, "urban"));
            assert_eq!(count(&n, "rural"), count(&d, "rural"));
        }
    }

    #[test]
    fn generators_are_seed_pure() {
        let d = small_dataset();
        let spec = NullModelSpec::new(Strategy::RandomizeBoth).with_cases(["CASE"]);
        assert_eq!(generate_null(&d, &spec, 77).unwrap(), generate_null(&d, &spec, 77).unwrap());
        assert_eq!(gen_distance_pair(0.0, 0.2, 8).unwrap(), gen_distance_pair(0.0, 0.2, 8).unwrap());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [
            Strategy::RandomizeBoth,
            Strategy::RandomizeSourcesOnly,
            Strategy::RandomizeCasesOnly,
            Strategy::FullyRandom,
        ] {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
        assert!("bogus".parse::<Strategy>().is_err());
    }

    proptest! {
        #[test]
        fn null_counts_match(seed in any::<u64>(), strategy in 0usize..4) {
            let d = small_dataset();
            let s = [Strategy::RandomizeBoth, Strategy::RandomizeSourcesOnly, Strategy::RandomizeCasesOnly, Strategy::FullyRandom][strategy];
            let spec = NullModelSpec::new(s).with_cases(["CASE"]);
            let n = generate_null(&d, &spec, seed).unwrap();
            prop_assert_eq!(feature_counts(&n), feature_counts(&d));
        }
    }
}
