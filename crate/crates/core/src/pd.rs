//! The probabilistic-dynamical (P-D) hybrid.
//!
//! Preparations are ordinary distributions over a finite set of ontic points.
//! A measurement first pushes the system along a trajectory that depends on
//! its starting point, and the outcome is then read off the whole trajectory.
//! Two rules constrain an instance:
//!
//! - **(a)** `p(E | 𝒫, M) > 0` iff a point tagged with `E` lies on `𝒫`.
//! - **(b)** for a trajectory triggered by `M` from a point tagged with an
//!   outcome of measurement `M'`:
//!   - **(i)** `M ≠ M'`: tag points of every outcome of `M` lie on the path;
//!   - **(ii)** `M = M'`: the start's own outcome is tagged on the path and no
//!     other outcome of `M` is.
//!
//! Trajectories that start at untagged points fall outside rule (b); the
//! validator lists them as unchecked instead of failing them.
//!
//! Unless a trajectory carries an explicit response, `p(E | 𝒫, M)` is the
//! share of the path's tag visits that belong to `E`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdError {
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("no trajectory for measurement `{measurement}` from point `{start}`")]
    MissingTrajectory { start: String, measurement: String },
    #[error("trajectory {trajectory} yields no outcome: none of its points is tagged by `{measurement}`")]
    NoOutcome {
        trajectory: usize,
        measurement: String,
    },
    #[error("unknown preparation `{0}`")]
    UnknownPreparation(String),
    #[error("unknown measurement `{0}`")]
    UnknownMeasurement(String),
}

fn malformed(msg: impl Into<String>) -> PdError {
    PdError::MalformedInstance(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTag {
    pub label: String,
    /// Points `λ_E` that trigger this outcome.
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdMeasurement {
    pub id: String,
    pub outcomes: Vec<OutcomeTag>,
}

impl PdMeasurement {
    fn outcome_of(&self, point: &str) -> Option<usize> {
        self.outcomes
            .iter()
            .position(|o| o.tags.iter().any(|t| t == point))
    }
}

/// `[λ; M]`: the path measurement `M` triggers from `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggeredTrajectory {
    pub start: String,
    pub measurement: String,
    pub path: Vec<String>,
    /// Explicit `p(E | 𝒫, M)` by outcome label; overrides the tag-share
    /// policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdPreparation {
    pub label: String,
    /// `p(λ | ψ)`.
    pub distribution: BTreeMap<String, f64>,
}

impl PdPreparation {
    pub fn point(label: &str, point: &str) -> Self {
        let mut distribution = BTreeMap::new();
        distribution.insert(point.to_string(), 1.0);
        Self {
            label: label.to_string(),
            distribution,
        }
    }

    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.distribution
            .iter()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, _)| k.as_str())
    }
}

/// A finite P-D model. This is also the JSON document format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdInstance {
    pub points: Vec<String>,
    pub measurements: Vec<PdMeasurement>,
    pub trajectories: Vec<TriggeredTrajectory>,
    #[serde(default)]
    pub preparations: Vec<PdPreparation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleClause {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b.i")]
    BI,
    #[serde(rename = "b.ii")]
    BII,
}

impl fmt::Display for RuleClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleClause::A => "rule (a)",
            RuleClause::BI => "rule (b)(i)",
            RuleClause::BII => "rule (b)(ii)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub trajectory: usize,
    pub start: String,
    pub measurement: String,
    pub clause: RuleClause,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Trajectories whose start carries no tag; rule (b) says nothing
    /// about them.
    pub unchecked: Vec<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairClass {
    OrthogonalDistinguishable,
    Indistinguishable,
    Neither,
}

impl PdInstance {
    /// Structural checks: every reference resolves, tag sets of one
    /// measurement are disjoint, `(start, measurement)` pairs are unique and
    /// distributions are normalised.
    pub fn check(&self) -> Result<(), PdError> {
        let points: BTreeSet<&str> = self.points.iter().map(String::as_str).collect();
        if points.len() != self.points.len() {
            return Err(malformed("duplicate point labels"));
        }
        let known = |p: &str, what: &str| {
            if points.contains(p) {
                Ok(())
            } else {
                Err(malformed(alloc::format!(
                    "{what} references unknown point `{p}`"
                )))
            }
        };
        let mut ids = BTreeSet::new();
        for m in &self.measurements {
            if !ids.insert(m.id.as_str()) {
                return Err(malformed(alloc::format!(
                    "duplicate measurement `{}`",
                    m.id
                )));
            }
            if m.outcomes.is_empty() {
                return Err(malformed(alloc::format!(
                    "measurement `{}` has no outcomes",
                    m.id
                )));
            }
            let mut tagged = BTreeSet::new();
            for o in &m.outcomes {
                for t in &o.tags {
                    known(t, &alloc::format!("tag of `{}`/`{}`", m.id, o.label))?;
                    if !tagged.insert(t.as_str()) {
                        return Err(malformed(alloc::format!(
                            "point `{t}` tags more than one outcome of `{}`",
                            m.id
                        )));
                    }
                }
            }
        }
        let mut pairs = BTreeSet::new();
        for (i, t) in self.trajectories.iter().enumerate() {
            known(&t.start, &alloc::format!("trajectory {i}"))?;
            let m = self.measurement(&t.measurement)?;
            if t.path.is_empty() {
                return Err(malformed(alloc::format!("trajectory {i} is empty")));
            }
            if t.path[0] != t.start {
                return Err(malformed(alloc::format!(
                    "trajectory {i} does not begin at its start point"
                )));
            }
            for p in &t.path {
                known(p, &alloc::format!("trajectory {i}"))?;
            }
            if !pairs.insert((t.start.as_str(), t.measurement.as_str())) {
                return Err(malformed(alloc::format!(
                    "two trajectories for `{}` from `{}`",
                    t.measurement,
                    t.start
                )));
            }
            if let Some(response) = &t.response {
                for label in response.keys() {
                    if !m.outcomes.iter().any(|o| &o.label == label) {
                        return Err(malformed(alloc::format!(
                            "trajectory {i} responds with unknown outcome `{label}`"
                        )));
                    }
                }
                check_distribution(
                    response.values().copied(),
                    &alloc::format!("response of trajectory {i}"),
                )?;
            }
        }
        for prep in &self.preparations {
            for p in prep.distribution.keys() {
                known(p, &alloc::format!("preparation `{}`", prep.label))?;
            }
            check_distribution(
                prep.distribution.values().copied(),
                &alloc::format!("preparation `{}`", prep.label),
            )?;
        }
        Ok(())
    }

    pub fn measurement(&self, id: &str) -> Result<&PdMeasurement, PdError> {
        self.measurements
            .iter()
            .find(|m| m.id == id)
            .ok_or_else(|| PdError::UnknownMeasurement(id.to_string()))
    }

    pub fn preparation(&self, label: &str) -> Result<&PdPreparation, PdError> {
        self.preparations
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| PdError::UnknownPreparation(label.to_string()))
    }

    fn trajectory(
        &self,
        start: &str,
        measurement: &str,
    ) -> Result<(usize, &TriggeredTrajectory), PdError> {
        self.trajectories
            .iter()
            .enumerate()
            .find(|(_, t)| t.start == start && t.measurement == measurement)
            .ok_or_else(|| PdError::MissingTrajectory {
                start: start.to_string(),
                measurement: measurement.to_string(),
            })
    }

    /// `p(E | 𝒫, M)` for every outcome of the trajectory's measurement, in
    /// the measurement's outcome order.
    pub fn response(&self, index: usize) -> Result<Vec<f64>, PdError> {
        let t = self
            .trajectories
            .get(index)
            .ok_or_else(|| malformed(alloc::format!("no trajectory {index}")))?;
        let m = self.measurement(&t.measurement)?;
        if let Some(explicit) = &t.response {
            return Ok(m
                .outcomes
                .iter()
                .map(|o| explicit.get(&o.label).copied().unwrap_or(0.0))
                .collect());
        }
        let mut hits = alloc::vec![0u32; m.outcomes.len()];
        for p in &t.path {
            if let Some(k) = m.outcome_of(p) {
                hits[k] += 1;
            }
        }
        let total: u32 = hits.iter().sum();
        if total == 0 {
            return Err(PdError::NoOutcome {
                trajectory: index,
                measurement: t.measurement.clone(),
            });
        }
        Ok(hits
            .iter()
            .map(|&h| f64::from(h) / f64::from(total))
            .collect())
    }

    /// Checks rules (a) and (b) on every trajectory.
    pub fn validate_rules(&self) -> Result<ValidationReport, PdError> {
        self.check()?;
        let mut report = ValidationReport::default();
        for (index, t) in self.trajectories.iter().enumerate() {
            let m = self.measurement(&t.measurement)?;
            let on_path: Vec<bool> = m
                .outcomes
                .iter()
                .map(|o| o.tags.iter().any(|tag| t.path.contains(tag)))
                .collect();
            let mut found = Vec::new();
            let mut push = |clause, detail: String| {
                found.push(Violation {
                    trajectory: index,
                    start: t.start.clone(),
                    measurement: t.measurement.clone(),
                    clause,
                    detail,
                })
            };

            match self.response(index) {
                Ok(response) => {
                    let mismatched: Vec<&str> = m
                        .outcomes
                        .iter()
                        .zip(&response)
                        .zip(&on_path)
                        .filter(|((_, p), present)| (**p > 0.0) != **present)
                        .map(|((o, _), _)| o.label.as_str())
                        .collect();
                    if !mismatched.is_empty() {
                        push(
                            RuleClause::A,
                            alloc::format!(
                                "outcome probability is positive exactly when a tag is on the path fails for {}",
                                mismatched.join(", ")
                            ),
                        );
                    }
                }
                Err(PdError::NoOutcome { .. }) => {
                    push(
                        RuleClause::A,
                        "no tag point of any outcome lies on the path".to_string(),
                    );
                }
                Err(e) => return Err(e),
            }

            let start_tags: Vec<(&PdMeasurement, usize)> = self
                .measurements
                .iter()
                .filter_map(|tm| tm.outcome_of(&t.start).map(|k| (tm, k)))
                .collect();
            if start_tags.is_empty() {
                report.unchecked.push(index);
            }
            for (tagging, own) in start_tags {
                if tagging.id == m.id {
                    let intruders: Vec<&str> = m
                        .outcomes
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != own && on_path[*k])
                        .map(|(_, o)| o.label.as_str())
                        .collect();
                    if !on_path[own] || !intruders.is_empty() {
                        push(
                            RuleClause::BII,
                            alloc::format!(
                                "same-axis trajectory must carry only `{}`; complement tags on path: [{}]",
                                m.outcomes[own].label,
                                intruders.join(", ")
                            ),
                        );
                    }
                } else {
                    let missing: Vec<&str> = m
                        .outcomes
                        .iter()
                        .zip(&on_path)
                        .filter(|(_, present)| !**present)
                        .map(|(o, _)| o.label.as_str())
                        .collect();
                    if !missing.is_empty() {
                        push(
                            RuleClause::BI,
                            alloc::format!(
                                "start is tagged by `{}` but path lacks tags for [{}]",
                                tagging.id,
                                missing.join(", ")
                            ),
                        );
                    }
                }
            }
            found.dedup_by(|a, b| a.clause == b.clause);
            report.violations.extend(found);
        }
        Ok(report)
    }

    /// `p(E | ψ, M) = Σ_λ p(λ|ψ) p(E | [λ; M], M)`, in the measurement's
    /// outcome order.
    pub fn outcome_probability(
        &self,
        prep: &PdPreparation,
        measurement: &str,
    ) -> Result<Vec<(String, f64)>, PdError> {
        let m = self.measurement(measurement)?;
        let mut totals = alloc::vec![0.0; m.outcomes.len()];
        for (point, &weight) in &prep.distribution {
            if weight == 0.0 {
                continue;
            }
            let (index, _) = self.trajectory(point, measurement)?;
            for (total, p) in totals.iter_mut().zip(self.response(index)?) {
                *total += weight * p;
            }
        }
        Ok(m.outcomes
            .iter()
            .map(|o| o.label.clone())
            .zip(totals)
            .collect())
    }

    /// Union of the points on trajectories `M` triggers from the support of
    /// `prep`.
    fn reach(&self, prep: &PdPreparation, measurement: &str) -> Result<BTreeSet<&str>, PdError> {
        let mut points = BTreeSet::new();
        for start in prep.support() {
            let (_, t) = self.trajectory(start, measurement)?;
            points.extend(t.path.iter().map(String::as_str));
        }
        Ok(points)
    }

    /// Orthogonal-distinguishable: disjoint supports and some measurement
    /// whose triggered paths never meet and whose outcome supports are
    /// disjoint. Indistinguishable: under every measurement the two families
    /// of paths meet at a tag point of an outcome both preparations can
    /// produce.
    pub fn classify_pair(
        &self,
        prep1: &PdPreparation,
        prep2: &PdPreparation,
    ) -> Result<PairClass, PdError> {
        let support1: BTreeSet<&str> = prep1.support().collect();
        let support2: BTreeSet<&str> = prep2.support().collect();

        let mut separating = false;
        let mut always_meet = true;
        for m in &self.measurements {
            let reach1 = self.reach(prep1, &m.id)?;
            let reach2 = self.reach(prep2, &m.id)?;
            let p1 = self.outcome_probability(prep1, &m.id)?;
            let p2 = self.outcome_probability(prep2, &m.id)?;

            let paths_disjoint = reach1.is_disjoint(&reach2);
            let outcomes_disjoint = p1
                .iter()
                .zip(&p2)
                .all(|((_, a), (_, b))| *a == 0.0 || *b == 0.0);
            if paths_disjoint && outcomes_disjoint {
                separating = true;
            }

            let meet = m.outcomes.iter().enumerate().any(|(k, o)| {
                p1[k].1 > 0.0
                    && p2[k].1 > 0.0
                    && o.tags
                        .iter()
                        .any(|t| reach1.contains(t.as_str()) && reach2.contains(t.as_str()))
            });
            always_meet &= meet;
        }

        Ok(if support1.is_disjoint(&support2) && separating {
            PairClass::OrthogonalDistinguishable
        } else if always_meet {
            PairClass::Indistinguishable
        } else {
            PairClass::Neither
        })
    }
}

fn check_distribution(values: impl Iterator<Item = f64>, what: &str) -> Result<(), PdError> {
    let mut sum = 0.0;
    for v in values {
        if !v.is_finite() || v < 0.0 {
            return Err(malformed(alloc::format!(
                "{what} has a negative or non-finite entry"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(malformed(alloc::format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

fn traj(start: &str, measurement: &str, path: &[&str]) -> TriggeredTrajectory {
    TriggeredTrajectory {
        start: start.to_string(),
        measurement: measurement.to_string(),
        path: path.iter().map(|p| p.to_string()).collect(),
        response: None,
    }
}

/// Six points: four tag points `z±`, `x±` and two untagged relay points
/// `r1`, `r2`. Same-axis measurements move the system onto a private relay;
/// cross-axis measurements sweep it across both tags of the measured axis.
///
/// Preparations `|z+>`, `|z->`, `|x+>` are point distributions on `z+`, `z-`
/// and `x+`.
pub fn builtin_minimal_instance() -> PdInstance {
    let outcome = |label: &str| OutcomeTag {
        label: label.to_string(),
        tags: alloc::vec![label.to_string()],
    };
    PdInstance {
        points: ["z+", "z-", "x+", "x-", "r1", "r2"]
            .map(str::to_string)
            .to_vec(),
        measurements: alloc::vec![
            PdMeasurement {
                id: "Mz".to_string(),
                outcomes: alloc::vec![outcome("z+"), outcome("z-")]
            },
            PdMeasurement {
                id: "Mx".to_string(),
                outcomes: alloc::vec![outcome("x+"), outcome("x-")]
            },
        ],
        trajectories: alloc::vec![
            traj("z+", "Mz", &["z+", "r1"]),
            traj("z-", "Mz", &["z-", "r2"]),
            traj("x+", "Mx", &["x+", "r1"]),
            traj("x-", "Mx", &["x-", "r2"]),
            traj("z+", "Mx", &["z+", "x+", "x-"]),
            traj("z-", "Mx", &["z-", "x-", "x+"]),
            traj("x+", "Mz", &["x+", "z+", "z-"]),
            traj("x-", "Mz", &["x-", "z-", "z+"]),
        ],
        preparations: alloc::vec![
            PdPreparation::point("|z+>", "z+"),
            PdPreparation::point("|z->", "z-"),
            PdPreparation::point("|x+>", "x+"),
        ],
    }
}

/// The minimal instance with the same-axis trajectory from `z+` given an
/// explicit response that fires `z-` although no `z-` tag is on its path.
pub fn counterexample_rule_a() -> PdInstance {
    let mut instance = builtin_minimal_instance();
    let mut response = BTreeMap::new();
    response.insert("z+".to_string(), 0.9);
    response.insert("z-".to_string(), 0.1);
    instance.trajectories[0].response = Some(response);
    instance
}

/// The minimal instance with the complement tag `z-` planted on the
/// same-axis trajectory from `z+`.
pub fn counterexample_rule_b_ii() -> PdInstance {
    let mut instance = builtin_minimal_instance();
    instance.trajectories[0].path = ["z+", "z-", "r1"].map(str::to_string).to_vec();
    instance
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_instance_satisfies_both_rules() {
        let report = builtin_minimal_instance().validate_rules().unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
        assert!(report.unchecked.is_empty());
    }

    #[test]
    fn planted_rule_a_violation_is_the_only_one() {
        let report = counterexample_rule_a().validate_rules().unwrap();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].clause, RuleClause::A);
        assert_eq!(report.violations[0].trajectory, 0);
    }

    #[test]
    fn planted_rule_b_ii_violation_is_the_only_one() {
        let report = counterexample_rule_b_ii().validate_rules().unwrap();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].clause, RuleClause::BII);
    }

    #[test]
    fn missing_cross_axis_tag_violates_b_i() {
        let mut instance = builtin_minimal_instance();
        instance.trajectories[4].path = ["z+", "x+"].map(str::to_string).to_vec();
        let report = instance.validate_rules().unwrap();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].clause, RuleClause::BI);
    }

    #[test]
    fn untagged_starts_are_reported_not_failed() {
        let mut instance = builtin_minimal_instance();
        instance.trajectories.push(traj("r1", "Mz", &["r1", "z+"]));
        let report = instance.validate_rules().unwrap();
        assert!(report.is_valid());
        assert_eq!(report.unchecked, [8]);
    }

    #[test]
    fn unknown_tag_is_malformed() {
        let mut instance = builtin_minimal_instance();
        instance.measurements[0].outcomes[0]
            .tags
            .push("nowhere".to_string());
        assert!(matches!(
            instance.validate_rules(),
            Err(PdError::MalformedInstance(_))
        ));
    }

    #[test]
    fn unnormalized_preparation_is_malformed() {
        let mut instance = builtin_minimal_instance();
        instance.preparations[0]
            .distribution
            .insert("z-".to_string(), 0.5);
        assert!(matches!(
            instance.check(),
            Err(PdError::MalformedInstance(_))
        ));
    }

    #[test]
    fn outcome_probabilities_of_point_preparations() {
        let instance = builtin_minimal_instance();
        let z_plus = instance.preparation("|z+>").unwrap();
        let mz = instance.outcome_probability(z_plus, "Mz").unwrap();
        assert_eq!(mz, [("z+".to_string(), 1.0), ("z-".to_string(), 0.0)]);
        let mx = instance.outcome_probability(z_plus, "Mx").unwrap();
        assert!(mx.iter().all(|(_, p)| *p > 0.0));
        assert_eq!(mx.iter().map(|(_, p)| p).sum::<f64>(), 1.0);
    }

    #[test]
    fn untouched_outcome_has_zero_probability() {
        let mut instance = builtin_minimal_instance();
        instance
            .preparations
            .push(PdPreparation::point("relay", "r1"));
        instance.trajectories.push(traj("r1", "Mz", &["r1", "z+"]));
        let relay = instance.preparation("relay").unwrap().clone();
        let mz = instance.outcome_probability(&relay, "Mz").unwrap();
        assert_eq!(mz[1], ("z-".to_string(), 0.0));
    }

    #[test]
    fn pair_classification() {
        let instance = builtin_minimal_instance();
        let get = |l: &str| instance.preparation(l).unwrap();
        assert_eq!(
            instance.classify_pair(get("|z+>"), get("|z->")).unwrap(),
            PairClass::OrthogonalDistinguishable
        );
        assert_eq!(
            instance.classify_pair(get("|z+>"), get("|x+>")).unwrap(),
            PairClass::Indistinguishable
        );
        assert_eq!(
            instance.classify_pair(get("|x+>"), get("|x+>")).unwrap(),
            PairClass::Indistinguishable
        );
    }

    #[test]
    fn missing_trajectory_is_reported() {
        let mut instance = builtin_minimal_instance();
        instance.trajectories.remove(1);
        let z_minus = instance.preparation("|z->").unwrap();
        assert!(matches!(
            instance.outcome_probability(z_minus, "Mz"),
            Err(PdError::MissingTrajectory { .. })
        ));
    }
}
