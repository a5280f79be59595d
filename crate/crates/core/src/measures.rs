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

//! Prevalence measures over transaction sets.
//!
//! Under uncertainty a pattern occurs in a transaction with the product of
//! its features' probabilities; its expected support is the sum of that
//! over all transactions. The deterministic variants treat any positive
//! probability as presence.
//!
//! Sums always run in transaction order and products in feature order, so
//! the row-wise functions here and the column-wise [`FeatureIndex`] produce
//! bit-identical results.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::transact::{FeatureId, Transaction, TransactionSet};
use crate::{Error, Result};

/// Non-empty set of feature labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pattern(Vec<String>);

impl Pattern {
    pub fn new<I, S>(features: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let raw: Vec<String> = features.into_iter().map(Into::into).collect();
        let set: BTreeSet<String> = raw.iter().cloned().collect();
        if set.is_empty() {
            return Err(Error::validation("a pattern needs at least one feature"));
        }
        if set.len() != raw.len() {
            return Err(Error::validation(format!("duplicate feature in pattern {raw:?}")));
        }
        Ok(Pattern(set.into_iter().collect()))
    }

    /// Sorted feature labels.
    pub fn features(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &Pattern) -> Pattern {
        let set: BTreeSet<&String> = self.0.iter().chain(&other.0).collect();
        Pattern(set.into_iter().cloned().collect())
    }

    pub fn is_disjoint(&self, other: &Pattern) -> bool {
        !self.0.iter().any(|f| other.0.binary_search(f).is_ok())
    }

    /// Feature ids in `ts`, or `None` if some feature never occurs there.
    pub fn resolve(&self, ts: &TransactionSet) -> Option<Vec<FeatureId>> {
        self.0.iter().map(|f| ts.feature_id(f)).collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("+"))
    }
}

impl FromStr for Pattern {
    type Err = Error;

    /// `A+B+C`
    fn from_str(s: &str) -> Result<Self> {
        Pattern::new(s.split('+').map(str::trim).filter(|f| !f.is_empty()))
    }
}

/// Co-location rule `antecedent -> consequent` over disjoint feature sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: Pattern,
    pub consequent: Pattern,
}

impl Rule {
    pub fn new(antecedent: Pattern, consequent: Pattern) -> Result<Self> {
        if !antecedent.is_disjoint(&consequent) {
            return Err(Error::validation(format!(
                "rule {antecedent}->{consequent}: antecedent and consequent overlap"
            )));
        }
        Ok(Rule { antecedent, consequent })
    }

    pub fn joint(&self) -> Pattern {
        self.antecedent.union(&self.consequent)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.antecedent, self.consequent)
    }
}

impl FromStr for Rule {
    type Err = Error;

    /// `A+B->C`
    fn from_str(s: &str) -> Result<Self> {
        let (x, y) = s.split_once("->").ok_or_else(|| Error::validation(format!("rule '{s}' lacks '->'")))?;
        Rule::new(x.parse()?, y.parse()?)
    }
}

/// Which prevalence family scores candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Expected support / expected confidence.
    #[default]
    Expected,
    /// Deterministic support / confidence.
    Certain,
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected" | "um" => Ok(Measure::Expected),
            "certain" | "cm" => Ok(Measure::Certain),
            other => Err(Error::validation(format!("unknown measure '{other}'"))),
        }
    }
}

fn ids_probability(ids: &[FeatureId], t: &Transaction) -> f64 {
    let mut p = 1.0;
    for &f in ids {
        p *= t.probability(f);
    }
    p
}

/// Probability that every feature of `pattern` is present in `t`.
pub fn pattern_probability(pattern: &Pattern, t: &Transaction, ts: &TransactionSet) -> f64 {
    pattern.resolve(ts).map_or(0.0, |ids| ids_probability(&ids, t))
}

pub fn expected_support(pattern: &Pattern, ts: &TransactionSet) -> f64 {
    let Some(ids) = pattern.resolve(ts) else {
        return 0.0;
    };
    let mut sum = 0.0;
    for t in &ts.transactions {
        let p = ids_probability(&ids, t);
        if p > 0.0 {
            sum += p;
        }
    }
    sum
}

pub fn expected_confidence(rule: &Rule, ts: &TransactionSet) -> Result<f64> {
    let base = expected_support(&rule.antecedent, ts);
    if base == 0.0 {
        return Err(Error::UndefinedConfidence { antecedent: rule.antecedent.to_string() });
    }
    Ok(expected_support(&rule.joint(), ts) / base)
}

/// Number of transactions containing every feature of `pattern`.
pub fn support(pattern: &Pattern, ts: &TransactionSet) -> usize {
    let Some(ids) = pattern.resolve(ts) else {
        return 0;
    };
    ts.transactions.iter().filter(|t| ids.iter().all(|&f| t.probability(f) > 0.0)).count()
}

pub fn confidence(rule: &Rule, ts: &TransactionSet) -> Result<f64> {
    let base = support(&rule.antecedent, ts);
    if base == 0 {
        return Err(Error::UndefinedConfidence { antecedent: rule.antecedent.to_string() });
    }
    Ok(support(&rule.joint(), ts) as f64 / base as f64)
}

/// Column-wise (per feature) view of a transaction set for fast repeated
/// support queries.
#[derive(Debug, Clone)]
pub struct FeatureIndex {
    columns: Vec<Vec<(u32, f64)>>,
}

impl FeatureIndex {
    pub fn new(ts: &TransactionSet) -> Self {
        let mut columns = vec![Vec::new(); ts.features.len()];
        for (i, t) in ts.transactions.iter().enumerate() {
            for &(f, p) in &t.entries {
                columns[f as usize].push((i as u32, p));
            }
        }
        FeatureIndex { columns }
    }

    /// Visits transactions containing all of `ids` in ascending order,
    /// passing their per-feature probabilities in `ids` order.
    fn for_each_joint(&self, ids: &[FeatureId], mut visit: impl FnMut(&[f64])) {
        let Some(cols) = ids.iter().map(|&f| self.columns.get(f as usize)).collect::<Option<Vec<_>>>() else {
            return;
        };
        if cols.is_empty() {
            return;
        }
        let lead = (0..cols.len()).min_by_key(|&i| cols[i].len()).unwrap();
        let mut cursors = vec![0usize; cols.len()];
        let mut probs = vec![0.0; cols.len()];
        'outer: for &(tx, p) in cols[lead] {
            for (k, col) in cols.iter().enumerate() {
                if k == lead {
                    probs[k] = p;
                    continue;
                }
                let c = &mut cursors[k];
                while *c < col.len() && col[*c].0 < tx {
                    *c += 1;
                }
                if *c == col.len() {
                    break 'outer;
                }
                if col[*c].0 != tx {
                    continue 'outer;
                }
                probs[k] = col[*c].1;
            }
            visit(&probs);
        }
    }

    pub fn expected_support(&self, ids: &[FeatureId]) -> f64 {
        let mut sum = 0.0;
        self.for_each_joint(ids, |probs| {
            let mut p = 1.0;
            for &q in probs {
                p *= q;
            }
            if p > 0.0 {
                sum += p;
            }
        });
        sum
    }

    pub fn support(&self, ids: &[FeatureId]) -> usize {
        let mut n = 0;
        self.for_each_joint(ids, |_| n += 1);
        n
    }
}
