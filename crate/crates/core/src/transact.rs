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

//! Grid transactionization: every grid point covered by at least one buffer
//! becomes a transaction listing the covering features and their presence
//! probabilities.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geom::{
    buffer_radius_from_amount, morph_to_ellipse, normalized_buffer_distance, BoundingBox, Buffer, BufferShape,
    GridSpec, Point2D, Shape, SpatialObject,
};
use crate::uncertainty::UncertaintyModel;
use crate::windfield::{interpolate_components, WindStation};
use crate::{Error, Result};

/// Probabilities at or below this are treated as absence.
pub const MIN_PROBABILITY: f64 = 1e-12;

/// How buffers are derived from objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferParams {
    /// Floor for amount-based radii, km.
    pub r_min: f64,
    /// Wind stretching coefficient.
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gamma_by_feature: BTreeMap<String, f64>,
    /// Inverse-distance weighting exponent for wind interpolation.
    pub idw_power: f64,
    /// Wind stations; empty means windless (circular buffers).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stations: Vec<WindStation>,
}

impl Default for BufferParams {
    fn default() -> Self {
        BufferParams { r_min: 0.1, gamma: 0.3, gamma_by_feature: BTreeMap::new(), idw_power: 2.0, stations: Vec::new() }
    }
}

impl BufferParams {
    pub fn gamma_for(&self, feature: &str) -> f64 {
        self.gamma_by_feature.get(feature).copied().unwrap_or(self.gamma)
    }
}

/// Builds the buffer zone of one object.
///
/// A `fixed_radius` wins over the release amount and is never reshaped by
/// wind. Amount-based point sources are stretched into ellipses when wind
/// stations are configured. Lines and polygons always get a uniform-width
/// zone.
pub fn build_buffer(obj: &SpatialObject, params: &BufferParams) -> Result<Buffer> {
    obj.validate()?;
    let (radius, from_amount) = match (obj.fixed_radius, obj.amount) {
        (Some(r), _) => (r, false),
        (None, Some(a)) => (buffer_radius_from_amount(a, params.r_min)?, true),
        (None, None) => {
            return Err(Error::validation(format!("object {} has neither an amount nor a fixed radius", obj.id)))
        }
    };
    let shape = match &obj.shape {
        Shape::Point(p) if from_amount && !params.stations.is_empty() => {
            let wind = interpolate_components(&params.stations, p, params.idw_power)?;
            morph_to_ellipse(*p, radius, wind, params.gamma_for(&obj.feature))
        }
        Shape::Point(p) => BufferShape::Circle { center: *p, radius },
        other => BufferShape::Extended { base: other.clone(), radius },
    };
    Ok(Buffer { owner: obj.id.clone(), shape })
}

pub fn build_buffers(dataset: &[SpatialObject], params: &BufferParams) -> Result<Vec<Buffer>> {
    dataset.iter().map(|o| build_buffer(o, params)).collect()
}

/// Bounding box of the dataset (and `region`, if any), grown by the largest
/// buffer reach so that no buffer is clipped by the grid edge.
pub fn dataset_extent(
    dataset: &[SpatialObject],
    params: &BufferParams,
    region: Option<&BoundingBox>,
) -> Result<BoundingBox> {
    let buffers = build_buffers(dataset, params)?;
    let mut bbox = BoundingBox::of_points(dataset.iter().flat_map(|o| o.shape.vertices()));
    if let Some(r) = region {
        bbox = Some(bbox.map_or(*r, |b| b.union(r)));
    }
    let bbox = bbox.ok_or_else(|| Error::validation("cannot derive a grid from an empty dataset"))?;
    let reach = buffers.iter().map(|b| b.shape.reach()).fold(0.0, f64::max);
    Ok(bbox.expand(reach))
}

/// Grid anchored at the minimum corner of [`dataset_extent`].
pub fn grid_for_dataset(
    dataset: &[SpatialObject],
    spacing: f64,
    params: &BufferParams,
    region: Option<&BoundingBox>,
) -> Result<GridSpec> {
    GridSpec::covering(&dataset_extent(dataset, params, region)?, spacing)
}

/// Default spacing: a quarter of the mean buffer reach.
pub fn suggested_spacing(dataset: &[SpatialObject], params: &BufferParams) -> Result<f64> {
    let buffers = build_buffers(dataset, params)?;
    if buffers.is_empty() {
        return Err(Error::validation("cannot suggest a spacing for an empty dataset"));
    }
    let mean = buffers.iter().map(|b| b.shape.reach()).sum::<f64>() / buffers.len() as f64;
    Ok(mean / 4.0)
}

/// Index into [`TransactionSet::features`].
pub type FeatureId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transaction {
    pub grid_index: usize,
    pub grid_point: Point2D,
    /// Sorted by feature id, one entry per feature, probabilities in (0, 1].
    pub entries: Vec<(FeatureId, f64)>,
}

impl Transaction {
    pub fn probability(&self, feature: FeatureId) -> f64 {
        self.entries.binary_search_by_key(&feature, |e| e.0).map_or(0.0, |i| self.entries[i].1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransactionSet {
    pub grid: GridSpec,
    /// Sorted feature labels; a [`FeatureId`] indexes this list.
    pub features: Vec<String>,
    pub fingerprint: String,
    /// In grid order.
    pub transactions: Vec<Transaction>,
}

impl TransactionSet {
    pub fn feature_id(&self, name: &str) -> Option<FeatureId> {
        self.features.binary_search_by(|f| f.as_str().cmp(name)).ok().map(|i| i as FeatureId)
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Builds a set directly from labelled entries, bypassing geometry.
    /// Rows with no entries are skipped; grid points are left at the origin.
    pub fn from_rows<S: AsRef<str>>(rows: &[Vec<(S, f64)>]) -> Result<Self> {
        let mut features: Vec<String> = rows.iter().flatten().map(|(f, _)| f.as_ref().to_owned()).collect();
        features.sort();
        features.dedup();
        let mut transactions = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let mut entries: BTreeMap<FeatureId, f64> = BTreeMap::new();
            for (f, p) in row {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(Error::validation(format!("probability {p} outside (0, 1]")));
                }
                let id = features.binary_search_by(|x| x.as_str().cmp(f.as_ref())).unwrap() as FeatureId;
                let slot = entries.entry(id).or_insert(0.0);
                *slot = slot.max(*p);
            }
            if !entries.is_empty() {
                transactions.push(Transaction {
                    grid_index: i,
                    grid_point: Point2D::new(0.0, 0.0),
                    entries: entries.into_iter().collect(),
                });
            }
        }
        Ok(TransactionSet {
            grid: GridSpec { min_x: 0.0, min_y: 0.0, max_x: 0.0, max_y: 0.0, spacing: 1.0 },
            features,
            fingerprint: String::new(),
            transactions,
        })
    }
}

/// Sorted, de-duplicated feature labels of a dataset.
pub fn feature_table(dataset: &[SpatialObject]) -> Vec<String> {
    let mut f: Vec<String> = dataset.iter().map(|o| o.feature.clone()).collect();
    f.sort();
    f.dedup();
    f
}

/// 64-bit digest of the dataset with objects ordered by id, as 16 hex digits.
pub fn fingerprint(dataset: &[SpatialObject]) -> String {
    let mut objs: Vec<&SpatialObject> = dataset.iter().collect();
    objs.sort_by(|a, b| a.id.cmp(&b.id));
    let mut hasher = Sha256::new();
    for o in objs {
        hasher.update(serde_json::to_vec(o).expect("objects serialize"));
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Converts a dataset into probabilistic transactions over `grid`.
pub fn get_transactions(
    dataset: &[SpatialObject],
    grid: &GridSpec,
    model: &UncertaintyModel,
    params: &BufferParams,
) -> Result<TransactionSet> {
    transactionize(dataset, grid, model, params, feature_table(dataset))
}

/// As [`get_transactions`] but with a caller-supplied feature table, so that
/// sets built from different datasets share feature ids. Every feature in
/// the dataset must appear in `features`.
pub fn transactionize(
    dataset: &[SpatialObject],
    grid: &GridSpec,
    model: &UncertaintyModel,
    params: &BufferParams,
    features: Vec<String>,
) -> Result<TransactionSet> {
    grid.validate()?;
    model.validate()?;
    let buffers = build_buffers(dataset, params)?;
    let ids = dataset
        .iter()
        .map(|o| {
            features
                .binary_search(&o.feature)
                .map(|i| i as FeatureId)
                .map_err(|_| Error::validation(format!("feature {} missing from feature table", o.feature)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut hits: Vec<(usize, FeatureId, f64)> = buffers
        .par_iter()
        .zip(ids.par_iter())
        .flat_map_iter(|(buf, &fid)| covered_points(grid, &buf.shape, model).map(move |(g, p)| (g, fid, p)))
        .collect();
    hits.par_sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));

    let mut transactions: Vec<Transaction> = Vec::new();
    for (g, fid, p) in hits {
        match transactions.last_mut() {
            Some(t) if t.grid_index == g => match t.entries.last_mut() {
                // sorted ascending, so the last duplicate is the maximum
                Some(e) if e.0 == fid => e.1 = p,
                _ => t.entries.push((fid, p)),
            },
            _ => transactions.push(Transaction { grid_index: g, grid_point: grid.point(g), entries: vec![(fid, p)] }),
        }
    }
    Ok(TransactionSet { grid: *grid, features, fingerprint: fingerprint(dataset), transactions })
}

/// Grid points inside `shape` with their presence probabilities.
fn covered_points<'a>(
    grid: &'a GridSpec,
    shape: &'a BufferShape,
    model: &'a UncertaintyModel,
) -> impl Iterator<Item = (usize, f64)> + 'a {
    let cells = grid.cells_within(&shape.bbox());
    let ((c0, c1), (r0, r1)) = cells.unwrap_or(((1, 0), (1, 0)));
    (r0..=r1).flat_map(move |row| {
        (c0..=c1).filter_map(move |col| {
            let x = normalized_buffer_distance(&grid.point_at(col, row), shape)?;
            let p = model.eval(x);
            (p > MIN_PROBABILITY).then(|| (grid.index(col, row), p))
        })
    })
}
