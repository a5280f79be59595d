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

//! Candidate enumeration and zero-prevalence pruning.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::measures::{FeatureIndex, Measure, Pattern, Rule};
use crate::transact::{FeatureId, TransactionSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Candidate {
    Pattern { pattern: Pattern },
    Rule { rule: Rule },
}

impl Candidate {
    /// Feature set whose joint occurrence is counted.
    pub fn joint(&self) -> Pattern {
        match self {
            Candidate::Pattern { pattern } => pattern.clone(),
            Candidate::Rule { rule } => rule.joint(),
        }
    }

    /// Observed prevalence on `ts`: expected support (or support) for
    /// patterns, expected confidence (or confidence) for rules. `None` when
    /// a rule's antecedent never occurs.
    pub fn prevalence(&self, ts: &TransactionSet, measure: Measure) -> Option<f64> {
        CompiledCandidate::new(self, ts).prevalence(&FeatureIndex::new(ts), measure)
    }
}

impl From<Pattern> for Candidate {
    fn from(pattern: Pattern) -> Self {
        Candidate::Pattern { pattern }
    }
}

impl From<Rule> for Candidate {
    fn from(rule: Rule) -> Self {
        Candidate::Rule { rule }
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Candidate::Pattern { pattern } => pattern.fmt(f),
            Candidate::Rule { rule } => rule.fmt(f),
        }
    }
}

/// A candidate with its features resolved against one feature table.
/// `None` marks a feature absent from the table.
#[derive(Debug, Clone)]
pub enum CompiledCandidate {
    Pattern(Option<Vec<FeatureId>>),
    Rule { antecedent: Option<Vec<FeatureId>>, joint: Option<Vec<FeatureId>> },
}

impl CompiledCandidate {
    pub fn new(candidate: &Candidate, ts: &TransactionSet) -> Self {
        match candidate {
            Candidate::Pattern { pattern } => CompiledCandidate::Pattern(pattern.resolve(ts)),
            Candidate::Rule { rule } => {
                CompiledCandidate::Rule { antecedent: rule.antecedent.resolve(ts), joint: rule.joint().resolve(ts) }
            }
        }
    }

    pub fn prevalence(&self, index: &FeatureIndex, measure: Measure) -> Option<f64> {
        let score = |ids: &Option<Vec<FeatureId>>| match ids {
            None => 0.0,
            Some(ids) => match measure {
                Measure::Expected => index.expected_support(ids),
                Measure::Certain => index.support(ids) as f64,
            },
        };
        match self {
            CompiledCandidate::Pattern(ids) => Some(score(ids)),
            CompiledCandidate::Rule { antecedent, joint } => {
                let base = score(antecedent);
                (base > 0.0).then(|| score(joint) / base)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub items: Vec<Candidate>,
    /// Largest pattern size, or largest antecedent size for rules.
    pub max_size: usize,
    /// Observed prevalence per item, filled in by pruning.
    pub observed: Vec<Option<f64>>,
}

impl CandidateSet {
    pub fn new(items: Vec<Candidate>, max_size: usize) -> Self {
        let observed = vec![None; items.len()];
        CandidateSet { items, max_size, observed }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

fn sorted_unique<I, S>(features: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    features.into_iter().map(Into::into).collect::<BTreeSet<_>>().into_iter().collect()
}

/// All rules `X -> {consequent}` with `X` a subset of `causes` of size
/// `1..=max_antecedent`, ordered by size then lexicographically.
pub fn enumerate_rules<I, S>(causes: I, consequent: &str, max_antecedent: usize) -> Result<CandidateSet>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let causes = sorted_unique(causes);
    if causes.iter().any(|c| c == consequent) {
        return Err(Error::validation(format!("consequent {consequent} is also a cause feature")));
    }
    if max_antecedent == 0 {
        return Err(Error::validation("maximum antecedent size must be >= 1"));
    }
    let y = Pattern::new([consequent])?;
    let mut items = Vec::new();
    for k in 1..=max_antecedent.min(causes.len()) {
        for combo in causes.iter().combinations(k) {
            let x = Pattern::new(combo.into_iter().cloned())?;
            items.push(Candidate::from(Rule::new(x, y.clone())?));
        }
    }
    Ok(CandidateSet::new(items, max_antecedent))
}

/// All feature subsets of size `2..=max_size`, ordered by size then
/// lexicographically.
pub fn enumerate_patterns<I, S>(features: I, max_size: usize) -> Result<CandidateSet>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    if max_size < 2 {
        return Err(Error::validation("maximum pattern size must be >= 2"));
    }
    let features = sorted_unique(features);
    let mut items = Vec::new();
    for k in 2..=max_size.min(features.len()) {
        for combo in features.iter().combinations(k) {
            items.push(Candidate::from(Pattern::new(combo.into_iter().cloned())?));
        }
    }
    Ok(CandidateSet::new(items, max_size))
}

/// Scores every candidate on `ts` and drops those whose prevalence does not
/// exceed `min_prevalence`. Rules with an undefined confidence count as 0.
pub fn prune_zero_prevalence(
    cands: CandidateSet,
    ts: &TransactionSet,
    measure: Measure,
    min_prevalence: f64,
) -> CandidateSet {
    let index = FeatureIndex::new(ts);
    let mut items = Vec::new();
    let mut observed = Vec::new();
    for c in cands.items {
        let value = CompiledCandidate::new(&c, ts).prevalence(&index, measure).unwrap_or(0.0);
        if value > min_prevalence {
            items.push(c);
            observed.push(Some(value));
        }
    }
    CandidateSet { items, max_size: cands.max_size, observed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::tests::table2;

    fn binomial(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("F{i:02}")).collect()
    }

    #[test]
    fn rule_counts() {
        assert_eq!(enumerate_rules(names(47), "CANCER", 3).unwrap().len(), 17_343);
        assert_eq!(enumerate_rules(names(7), "CANCER", 3).unwrap().len(), 63);
        assert_eq!(enumerate_rules(names(1), "CANCER", 1).unwrap().len(), 1);
    }

    #[test]
    fn rule_counts_match_binomial_sums() {
        for n in 1..=50u64 {
            for d in 1..=3u64 {
                let expect: u64 = (1..=d).map(|k| binomial(n, k)).sum();
                let got = enumerate_rules(names(n as usize), "Y", d as usize).unwrap().len() as u64;
                assert_eq!(got, expect, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn pattern_counts() {
        assert_eq!(enumerate_patterns(names(4), 2).unwrap().len(), 6);
        assert_eq!(enumerate_patterns(names(3), 3).unwrap().len(), 4);
        assert_eq!(enumerate_patterns(names(2), 2).unwrap().len(), 1);
        assert!(enumerate_patterns(names(3), 1).is_err());
    }

    #[test]
    fn enumeration_is_ordered_and_deterministic() {
        let a = enumerate_rules(["C", "A", "B"], "D", 2).unwrap();
        let labels: Vec<String> = a.items.iter().map(ToString::to_string).collect();
        assert_eq!(labels, ["A->D", "B->D", "C->D", "A+B->D", "A+C->D", "B+C->D"]);
        assert_eq!(a, enumerate_rules(["B", "C", "A"], "D", 2).unwrap());
    }

    #[test]
    fn rule_enumeration_preconditions() {
        assert!(enumerate_rules(["A", "D"], "D", 2).is_err());
        assert!(enumerate_rules(["A"], "D", 0).is_err());
    }

    #[test]
    fn pruning() {
        let ts = table2();
        let cands = CandidateSet::new(
            vec![
                Candidate::from("A+B".parse::<Pattern>().unwrap()),
                Candidate::from("F+G".parse::<Pattern>().unwrap()),
                Candidate::from("A+C".parse::<Pattern>().unwrap()),
            ],
            2,
        );
        let kept = prune_zero_prevalence(cands.clone(), &ts, Measure::Expected, 0.0);
        let labels: Vec<String> = kept.items.iter().map(ToString::to_string).collect();
        assert_eq!(labels, ["A+B", "A+C"]);
        assert!((kept.observed[0].unwrap() - 0.76).abs() < 1e-12);

        // threshold semantics: A+C has 0.7*0.2 + 0.1*0.7 = 0.21
        let kept = prune_zero_prevalence(cands.clone(), &ts, Measure::Expected, 0.5);
        assert_eq!(kept.len(), 1);
        let kept = prune_zero_prevalence(cands, &ts, Measure::Expected, 1.0);
        assert!(kept.is_empty());
    }

    #[test]
    fn pruning_keeps_all_prevalent() {
        let ts = table2();
        let cands = enumerate_rules(["A"], "B", 1).unwrap();
        let kept = prune_zero_prevalence(cands.clone(), &ts, Measure::Expected, 0.0);
        assert_eq!(kept.items, cands.items);
    }

    #[test]
    fn undefined_confidence_is_pruned() {
        let ts = table2();
        let cands = enumerate_rules(["Q"], "A", 1).unwrap();
        assert_eq!(cands.items[0].prevalence(&ts, Measure::Expected), None);
        assert!(prune_zero_prevalence(cands, &ts, Measure::Expected, 0.0).is_empty());
    }
}
