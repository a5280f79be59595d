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

//! Wind at arbitrary points, interpolated from station observations.
//!
//! Directions are angles, so they cannot be averaged directly (the mean of
//! 350 and 10 degrees is not 180). Each station vector is split into its two
//! axial components, the components are interpolated independently, and the
//! direction is rebuilt from the interpolated components quadrant by
//! quadrant.

use serde::{Deserialize, Serialize};

use crate::geom::Point2D;
use crate::{Error, Result};

/// Distance under which a query point is treated as sitting on a station.
const COINCIDENCE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindStation {
    pub id: String,
    pub location: Point2D,
    /// km/h
    pub speed: f64,
    /// Meteorological bearing in degrees, `[0, 360)`.
    pub direction: f64,
}

impl WindStation {
    pub fn validate(&self) -> Result<()> {
        if !self.location.is_finite() {
            return Err(Error::validation(format!("station {}: non-finite location", self.id)));
        }
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            return Err(Error::validation(format!("station {}: speed must be >= 0", self.id)));
        }
        if !(0.0..360.0).contains(&self.direction) {
            return Err(Error::validation(format!(
                "station {}: direction must lie in [0, 360), got {}",
                self.id, self.direction
            )));
        }
        Ok(())
    }

    pub fn components(&self) -> WindVector {
        decompose(self.speed, self.direction)
    }
}

/// Axial wind components. `x = S sin(theta)` and `y = S cos(theta)`, which in
/// a planar frame with +x east and +y north is the vector pointing along the
/// bearing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WindVector {
    pub x: f64,
    pub y: f64,
}

impl WindVector {
    pub fn speed(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

pub fn decompose(speed: f64, direction_deg: f64) -> WindVector {
    let (sin, cos) = direction_deg.to_radians().sin_cos();
    WindVector { x: speed * sin, y: speed * cos }
}

/// Inverse-distance weighted components at `p`. A point closer than
/// `1e-9` to a station takes that station's components verbatim.
pub fn interpolate_components(stations: &[WindStation], p: &Point2D, power: f64) -> Result<WindVector> {
    if stations.is_empty() {
        return Err(Error::validation("wind interpolation needs at least one station"));
    }
    let mut wsum = 0.0;
    let (mut xs, mut ys) = (0.0, 0.0);
    for s in stations {
        let d = p.distance(&s.location);
        if d < COINCIDENCE_EPS {
            return Ok(s.components());
        }
        let w = d.powf(-power);
        let v = s.components();
        wsum += w;
        xs += w * v.x;
        ys += w * v.y;
    }
    Ok(WindVector { x: xs / wsum, y: ys / wsum })
}

/// Speed and bearing (degrees, `[0, 360)`) of a component vector.
///
/// On the axes: `x = 0, y > 0` is 0, `x > 0, y = 0` is 90, `x = 0, y < 0`
/// is 180, `x < 0, y = 0` is 270. The zero vector is calm, `(0, 0)`.
pub fn reconstruct(v: WindVector) -> (f64, f64) {
    let speed = v.speed();
    let (x, y) = (v.x, v.y);
    let theta = if x == 0.0 && y == 0.0 {
        0.0
    } else if x == 0.0 {
        if y > 0.0 {
            0.0
        } else {
            180.0
        }
    } else if y == 0.0 {
        if x > 0.0 {
            90.0
        } else {
            270.0
        }
    } else if x > 0.0 && y > 0.0 {
        (x / y).atan().to_degrees()
    } else if x > 0.0 {
        (-y / x).atan().to_degrees() + 90.0
    } else if y < 0.0 {
        (x / y).atan().to_degrees() + 180.0
    } else {
        (y / -x).atan().to_degrees() + 270.0
    };
    (speed, if theta >= 360.0 { theta - 360.0 } else { theta })
}
