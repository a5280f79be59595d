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

//! Co-location mining over uncertain spatial data.
//!
//! A spatial dataset (points, polylines, polygons) is turned into a set of
//! probabilistic transactions by laying a regular grid over the study area
//! and recording, at each grid point, which feature buffers cover it and
//! with what existential probability. Candidate patterns and rules are then
//! scored by expected support / expected confidence and kept only if they
//! survive a Monte-Carlo randomization test against null-model datasets.

pub mod baseline;
pub mod bench;
pub mod candidates;
pub mod error;
pub mod geom;
pub mod io;
pub mod measures;
pub mod nullmodels;
pub mod pipeline;
pub mod significance;
pub mod transact;
pub mod uncertainty;
pub mod windfield;

pub use error::{Error, Result};
