//! The dynamical-probabilistic (D-P) hybrid.
//!
//! Four abstract ontic states `a, b, c, d`. Each preparation is a two-state
//! cycle; a measurement samples the cycle at a single moment and a detection
//! rule maps the visited state to one of two outcomes. Everything is finite,
//! so probabilities are exact rationals obtained by enumerating the two cycle
//! slots.
//!
//! | preparation | cycle  |
//! |-------------|--------|
//! | `z+`        | a, b   |
//! | `m+`        | b, c   |
//! | `z-`        | c, d   |
//! | `m-` (ext.) | d, a   |
//!
//! | setting | first outcome | second outcome | qubit analogue |
//! |---------|---------------|----------------|----------------|
//! | i       | a, b → m1     | c, d → m2      | z              |
//! | ii      | b, c → n1     | d, a → n2      | y              |
//! | iii     | b, d → k1     | a, c → k2      | x              |
//!
//! `m-` is not one of the three built-in preparations; it is the cycle that
//! makes setting ii deterministic on both of its eigenstates and completes the
//! toy-model analogy. It is only present in the extended model.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact probability.
pub type Probability = Ratio<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("cycle of `{0}` repeats the same ontic state")]
    DegenerateCycle(String),
    #[error("rule `{0}` does not split {{a,b,c,d}} into two non-empty classes")]
    DegenerateRule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstractOntic {
    A,
    B,
    C,
    D,
}

impl AbstractOntic {
    pub const ALL: [AbstractOntic; 4] = [
        AbstractOntic::A,
        AbstractOntic::B,
        AbstractOntic::C,
        AbstractOntic::D,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for AbstractOntic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            AbstractOntic::A => 'a',
            AbstractOntic::B => 'b',
            AbstractOntic::C => 'c',
            AbstractOntic::D => 'd',
        };
        write!(f, "{c}")
    }
}

/// A preparation: the system repeats `cycle[0], cycle[1], cycle[0], ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicPrep {
    pub name: String,
    pub cycle: [AbstractOntic; 2],
}

impl CyclicPrep {
    pub fn new(name: &str, cycle: [AbstractOntic; 2]) -> Result<Self, DpError> {
        if cycle[0] == cycle[1] {
            return Err(DpError::DegenerateCycle(name.to_string()));
        }
        Ok(Self {
            name: name.to_string(),
            cycle,
        })
    }

    pub fn visits(&self, state: AbstractOntic) -> bool {
        self.cycle.contains(&state)
    }
}

/// Two-outcome detection rule. `first` holds the states that trigger
/// `outcomes[0]`; the rest trigger `outcomes[1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionRule {
    pub name: String,
    pub outcomes: [String; 2],
    first: u8,
}

impl DetectionRule {
    pub fn new(
        name: &str,
        outcomes: [&str; 2],
        first_class: &[AbstractOntic],
    ) -> Result<Self, DpError> {
        let first = first_class.iter().fold(0u8, |mask, s| mask | s.bit());
        Self::from_mask(name, outcomes, first)
    }

    fn from_mask(name: &str, outcomes: [&str; 2], first: u8) -> Result<Self, DpError> {
        if first == 0 || first == 0b1111 {
            return Err(DpError::DegenerateRule(name.to_string()));
        }
        Ok(Self {
            name: name.to_string(),
            outcomes: outcomes.map(|o| o.to_string()),
            first,
        })
    }

    /// Index (0 or 1) of the outcome `state` triggers.
    pub fn outcome_index(&self, state: AbstractOntic) -> usize {
        if self.first & state.bit() != 0 {
            0
        } else {
            1
        }
    }

    pub fn class(&self, index: usize) -> Vec<AbstractOntic> {
        AbstractOntic::ALL
            .into_iter()
            .filter(|s| self.outcome_index(*s) == index)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpModel {
    pub preparations: Vec<CyclicPrep>,
    pub rules: Vec<DetectionRule>,
}

impl DpModel {
    pub fn preparation(&self, name: &str) -> Option<&CyclicPrep> {
        self.preparations.iter().find(|p| p.name == name)
    }

    pub fn rule(&self, name: &str) -> Option<&DetectionRule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

/// The three preparations and three settings of the D-P model, plus `m-`
/// when `extended` is set.
pub fn builtin_model(extended: bool) -> DpModel {
    use AbstractOntic::*;
    let mut preparations = alloc::vec![
        CyclicPrep::new("z+", [A, B]).unwrap(),
        CyclicPrep::new("m+", [B, C]).unwrap(),
        CyclicPrep::new("z-", [C, D]).unwrap(),
    ];
    if extended {
        preparations.push(CyclicPrep::new("m-", [D, A]).unwrap());
    }
    let rules = alloc::vec![
        DetectionRule::new("i", ["m1", "m2"], &[A, B]).unwrap(),
        DetectionRule::new("ii", ["n1", "n2"], &[B, C]).unwrap(),
        DetectionRule::new("iii", ["k1", "k2"], &[B, D]).unwrap(),
    ];
    DpModel {
        preparations,
        rules,
    }
}

/// Qubit axis each built-in setting plays in the toy-model analogy.
pub fn analogue_axis(rule: &str) -> Option<&'static str> {
    match rule {
        "i" => Some("z"),
        "ii" => Some("y"),
        "iii" => Some("x"),
        _ => None,
    }
}

/// Exact outcome probabilities `[P(outcomes[0]), P(outcomes[1])]` for a
/// measurement at a uniformly chosen moment of the cycle.
pub fn outcome_distribution(prep: &CyclicPrep, rule: &DetectionRule) -> [Probability; 2] {
    let mut hits = [0u32; 2];
    for slot in prep.cycle {
        hits[rule.outcome_index(slot)] += 1;
    }
    let slots = prep.cycle.len() as u32;
    hits.map(|h| Ratio::new(h, slots))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distinguishability {
    OneShotDistinguishable,
    Indistinguishable,
}

/// What one outcome says about which of the two preparations was used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeEvidence {
    pub outcome: String,
    /// `[P(outcome | prep1), P(outcome | prep2)]`.
    pub likelihood: [Probability; 2],
    /// Posterior over `[prep1, prep2]` from a uniform prior; `None` when the
    /// outcome is impossible under both.
    pub posterior: Option<[Probability; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinguishabilityReport {
    pub verdict: Distinguishability,
    pub evidence: [OutcomeEvidence; 2],
}

/// One-shot distinguishable iff no outcome is possible under both
/// preparations.
pub fn distinguishability(
    prep1: &CyclicPrep,
    prep2: &CyclicPrep,
    rule: &DetectionRule,
) -> DistinguishabilityReport {
    let d1 = outcome_distribution(prep1, rule);
    let d2 = outcome_distribution(prep2, rule);
    let zero = Ratio::from_integer(0);
    let overlapping = (0..2).any(|k| d1[k] > zero && d2[k] > zero);
    let evidence = [0usize, 1].map(|k| {
        let total = d1[k] + d2[k];
        let posterior = (total > zero).then(|| [d1[k] / total, d2[k] / total]);
        OutcomeEvidence {
            outcome: rule.outcomes[k].clone(),
            likelihood: [d1[k], d2[k]],
            posterior,
        }
    });
    DistinguishabilityReport {
        verdict: if overlapping {
            Distinguishability::Indistinguishable
        } else {
            Distinguishability::OneShotDistinguishable
        },
        evidence,
    }
}

/// Every assignment of `{a,b,c,d}` to two non-empty outcome classes: the
/// `2⁴ − 2 = 14` ordered splits (7 unordered bipartitions, each twice).
pub fn all_two_outcome_rules() -> Vec<DetectionRule> {
    (1u8..0b1111)
        .map(|mask| {
            let name = alloc::format!("split{mask:04b}");
            DetectionRule::from_mask(&name, ["o1", "o2"], mask).expect("mask is a proper subset")
        })
        .collect()
}

/// Rules from [`all_two_outcome_rules`] that tell `prep1` and `prep2` apart
/// in one shot.
pub fn distinguishing_rules(prep1: &CyclicPrep, prep2: &CyclicPrep) -> Vec<DetectionRule> {
    all_two_outcome_rules()
        .into_iter()
        .filter(|rule| {
            distinguishability(prep1, prep2, rule).verdict
                == Distinguishability::OneShotDistinguishable
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub preparation: String,
    /// One distribution per rule, in the model's rule order.
    pub cells: Vec<[Probability; 2]>,
}

/// Outcome table of the extended model: four preparations by three settings.
pub fn spekkens_table() -> (DpModel, Vec<TableRow>) {
    let model = builtin_model(true);
    let rows = model
        .preparations
        .iter()
        .map(|prep| TableRow {
            preparation: prep.name.clone(),
            cells: model
                .rules
                .iter()
                .map(|rule| outcome_distribution(prep, rule))
                .collect(),
        })
        .collect();
    (model, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use AbstractOntic::*;

    fn r(n: u32, d: u32) -> Probability {
        Ratio::new(n, d)
    }

    #[test]
    fn builtin_cycles_and_rules() {
        let model = builtin_model(false);
        assert_eq!(model.preparations.len(), 3);
        assert_eq!(model.preparation("z+").unwrap().cycle, [A, B]);
        assert_eq!(model.preparation("m+").unwrap().cycle, [B, C]);
        assert_eq!(model.preparation("z-").unwrap().cycle, [C, D]);
        assert!(model.preparation("m-").is_none());
        let i = model.rule("i").unwrap();
        assert_eq!(i.class(0), [A, B]);
        assert_eq!(i.class(1), [C, D]);
        assert_eq!(model.rule("ii").unwrap().class(1), [A, D]);
        assert_eq!(model.rule("iii").unwrap().class(0), [B, D]);
        assert_eq!(builtin_model(true).preparation("m-").unwrap().cycle, [D, A]);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(CyclicPrep::new("bad", [A, A]).is_err());
        assert!(DetectionRule::new("bad", ["x", "y"], &[]).is_err());
        assert!(DetectionRule::new("bad", ["x", "y"], &[A, B, C, D]).is_err());
    }

    #[test]
    fn rule_i_distributions() {
        let model = builtin_model(false);
        let i = model.rule("i").unwrap();
        let dist = |p: &str| outcome_distribution(model.preparation(p).unwrap(), i);
        assert_eq!(dist("z+"), [r(1, 1), r(0, 1)]);
        assert_eq!(dist("m+"), [r(1, 2), r(1, 2)]);
        assert_eq!(dist("z-"), [r(0, 1), r(1, 1)]);
    }

    #[test]
    fn orthogonal_pair_is_one_shot_distinguishable() {
        let model = builtin_model(false);
        let i = model.rule("i").unwrap();
        let report = distinguishability(
            model.preparation("z+").unwrap(),
            model.preparation("z-").unwrap(),
            i,
        );
        assert_eq!(report.verdict, Distinguishability::OneShotDistinguishable);
        assert_eq!(report.evidence[0].posterior, Some([r(1, 1), r(0, 1)]));
        assert_eq!(report.evidence[1].posterior, Some([r(0, 1), r(1, 1)]));
    }

    #[test]
    fn overlapping_pair_posterior_is_bayesian() {
        let model = builtin_model(false);
        let i = model.rule("i").unwrap();
        let report = distinguishability(
            model.preparation("z+").unwrap(),
            model.preparation("m+").unwrap(),
            i,
        );
        assert_eq!(report.verdict, Distinguishability::Indistinguishable);
        assert_eq!(report.evidence[0].likelihood, [r(1, 1), r(1, 2)]);
        assert_eq!(report.evidence[0].posterior, Some([r(2, 3), r(1, 3)]));
        assert_eq!(report.evidence[1].posterior, Some([r(0, 1), r(1, 1)]));
    }

    #[test]
    fn no_rule_separates_states_sharing_b() {
        let model = builtin_model(false);
        let rules = all_two_outcome_rules();
        assert_eq!(rules.len(), 14);
        let found = distinguishing_rules(
            model.preparation("z+").unwrap(),
            model.preparation("m+").unwrap(),
        );
        assert!(found.is_empty());
        // Sanity check on the scan itself: z+ and z- share nothing and are
        // separated by both orderings of {a,b} | {c,d}.
        let found = distinguishing_rules(
            model.preparation("z+").unwrap(),
            model.preparation("z-").unwrap(),
        );
        assert_eq!(found.len(), 2);
    }

    #[test]
    fn table_is_normalized_and_deterministic_on_eigenstates() {
        let (model, rows) = spekkens_table();
        assert_eq!(rows.len(), 4);
        let one = r(1, 1);
        let half = r(1, 2);
        for row in &rows {
            let mut deterministic = 0;
            for cell in &row.cells {
                assert_eq!(cell[0] + cell[1], one);
                if cell[0] == one || cell[1] == one {
                    deterministic += 1;
                } else {
                    assert_eq!(*cell, [half, half]);
                }
            }
            assert_eq!(deterministic, 1, "row {}", row.preparation);
        }
        let iii = model.rules.iter().position(|r| r.name == "iii").unwrap();
        assert_eq!(rows[0].cells[iii], [half, half]);
    }
}
