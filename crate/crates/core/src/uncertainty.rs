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

//! Existential-probability models: how likely a feature is present at a
//! point, given its normalized distance `x` in `[0, 1]` from the source.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub upper_bound: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "steps", rename_all = "lowercase")]
pub enum UncertaintyModel {
    /// Piecewise-constant probability over distance bands.
    Categorical(Vec<Step>),
    /// `1 - x`
    Linear,
    /// `cos(pi x) / 2 + 0.5`
    #[default]
    Curve,
    /// Presence is certain anywhere inside the buffer.
    Certain,
}

impl UncertaintyModel {
    pub fn default_categorical() -> Self {
        UncertaintyModel::Categorical(vec![
            Step { upper_bound: 0.25, probability: 1.0 },
            Step { upper_bound: 0.5, probability: 0.75 },
            Step { upper_bound: 0.75, probability: 0.5 },
            Step { upper_bound: 1.0, probability: 0.25 },
        ])
    }

    pub fn validate(&self) -> Result<()> {
        let UncertaintyModel::Categorical(steps) = self else {
            return Ok(());
        };
        if steps.is_empty() {
            return Err(Error::validation("categorical model needs at least one step"));
        }
        let mut prev_bound = 0.0;
        let mut prev_prob = 1.0;
        for s in steps {
            if s.upper_bound.is_nan() || s.upper_bound <= prev_bound {
                return Err(Error::validation("categorical bounds must be strictly increasing and > 0"));
            }
            if !(0.0..=prev_prob).contains(&s.probability) {
                return Err(Error::validation("categorical probabilities must lie in [0, 1] and be nonincreasing"));
            }
            prev_bound = s.upper_bound;
            prev_prob = s.probability;
        }
        if prev_bound != 1.0 {
            return Err(Error::validation("last categorical bound must be 1.0"));
        }
        Ok(())
    }

    /// Presence probability at normalized distance `x`.
    ///
    /// Points outside a buffer have no `x`; callers treat them as absent
    /// instead of calling this.
    pub fn presence_probability(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::validation(format!("normalized distance must lie in [0, 1], got {x}")));
        }
        Ok(self.eval(x))
    }

    /// Unchecked evaluation for `x` already known to lie in `[0, 1]`.
    pub(crate) fn eval(&self, x: f64) -> f64 {
        match self {
            UncertaintyModel::Curve => (std::f64::consts::PI * x).cos() / 2.0 + 0.5,
            UncertaintyModel::Linear => 1.0 - x,
            UncertaintyModel::Certain => 1.0,
            UncertaintyModel::Categorical(steps) => {
                steps.iter().find(|s| x <= s.upper_bound).map_or(0.0, |s| s.probability)
            }
        }
    }
}

impl fmt::Display for UncertaintyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UncertaintyModel::Curve => f.write_str("curve"),
            UncertaintyModel::Linear => f.write_str("linear"),
            UncertaintyModel::Certain => f.write_str("certain"),
            UncertaintyModel::Categorical(steps) => {
                f.write_str("categorical:")?;
                for (i, s) in steps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}={}", s.upper_bound, s.probability)?;
                }
                Ok(())
            }
        }
    }
}

/// Accepts `curve`, `linear`, `certain`, `categorical` (default bands) or
/// `categorical:0.25=1,0.5=0.75,...`.
impl FromStr for UncertaintyModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let model = match s.trim() {
            "curve" => UncertaintyModel::Curve,
            "linear" => UncertaintyModel::Linear,
            "certain" => UncertaintyModel::Certain,
            "categorical" => UncertaintyModel::default_categorical(),
            other => {
                let Some(spec) = other.strip_prefix("categorical:") else {
                    return Err(Error::validation(format!("unknown uncertainty model '{other}'")));
                };
                let steps = spec
                    .split(',')
                    .map(|band| {
                        let (b, p) = band
                            .split_once('=')
                            .ok_or_else(|| Error::validation(format!("bad categorical band '{band}'")))?;
                        let parse = |v: &str| {
                            v.trim().parse::<f64>().map_err(|_| Error::validation(format!("bad number '{v}'")))
                        };
                        Ok(Step { upper_bound: parse(b)?, probability: parse(p)? })
                    })
                    .collect::<Result<Vec<_>>>()?;
                UncertaintyModel::Categorical(steps)
            }
        };
        model.validate()?;
        Ok(model)
    }
}
