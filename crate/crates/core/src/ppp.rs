//! Process-based probability-probability (PPP) models.
//!
//! A preparation is a distribution over paths `p([λ]|ψ)` and a measurement
//! responds to a whole path with `p(k|[λ], M)`. Measurements are spin
//! measurements along grid axes, identified by axis index, with outcomes
//! [`Sign`]. When every path is a single point a PPP model is a standard
//! ontological model, and [`reduce_to_standard`] / [`StandardModel::lift`]
//! convert between the two.
//!
//! Nothing here proves the non-overlap statement for processes. The module
//! checks its single-system consequence for orthogonal states: a path shared
//! by two orthogonal preparations cannot respond with certainty to both
//! outcomes of their common axis.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::{DdPreparation, OnticStateId, ProcessPath, VisitCounts};
use crate::path::Path;
use crate::qubit::{born_probability, DirectionGrid, Eigenstate, Sign};

/// Tolerance for equality of response probabilities.
pub const RESPONSE_TOLERANCE: f64 = 1e-12;
/// Tolerance for the reproduction check against Born probabilities.
pub const REPRODUCTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PppError {
    #[error("path space must not be empty")]
    EmptySpace,
    #[error("distribution for {0:?} is not normalised (sum {1})")]
    NotNormalized(Eigenstate, f64),
    #[error("distribution for {0:?} has a negative or non-finite entry")]
    NegativeProbability(Eigenstate),
    #[error(
        "response for measurement {measurement} is not a probability vector: {plus} + {minus}"
    )]
    BadResponse {
        measurement: usize,
        plus: f64,
        minus: f64,
    },
    #[error("preparation {state:?} puts weight on a path of length {length}; reduction needs singleton paths")]
    NotSingleton { state: Eigenstate, length: usize },
    #[error("no response for measurement {measurement} on an ontic state in the support")]
    MissingResponse { measurement: usize },
    #[error("{0:?} and {1:?} are not an orthogonal pair")]
    NotOrthogonal(Eigenstate, Eigenstate),
    #[error("measurement set does not include the shared axis {0}")]
    MissingMeasurement(usize),
    #[error("eigenstate {0:?} is not on the grid")]
    UnknownState(Eigenstate),
}

/// `p(k | [λ], M)`.
pub trait PathResponse<T> {
    /// `None` when the response is undefined for this path and measurement.
    fn probability(&self, path: &Path<T>, measurement: usize, outcome: Sign) -> Option<f64>;
}

/// The D-D response: the chance of outcome `α` along `θ` is the share of
/// the path's `θ` visits that land on `λ_θα`. Undefined if the path never
/// visits `θ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RelativeFrequencyResponse;

impl PathResponse<OnticStateId> for RelativeFrequencyResponse {
    fn probability(&self, path: &ProcessPath, measurement: usize, outcome: Sign) -> Option<f64> {
        VisitCounts::from_path(path).relative_frequency(measurement, outcome)
    }
}

/// Explicit response table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TabulatedResponse<T: Ord> {
    table: BTreeMap<Path<T>, BTreeMap<usize, [f64; 2]>>,
}

impl<T: Ord + Clone> TabulatedResponse<T> {
    pub fn new() -> Self {
        Self {
            table: BTreeMap::new(),
        }
    }

    /// Sets `[p(+), p(−)]` for `path` under `measurement`.
    pub fn insert(
        &mut self,
        path: Path<T>,
        measurement: usize,
        plus: f64,
        minus: f64,
    ) -> Result<(), PppError> {
        let valid = plus >= 0.0 && minus >= 0.0 && (plus + minus - 1.0).abs() <= RESPONSE_TOLERANCE;
        if !valid {
            return Err(PppError::BadResponse {
                measurement,
                plus,
                minus,
            });
        }
        self.table
            .entry(path)
            .or_default()
            .insert(measurement, [plus, minus]);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Path<T>, usize, [f64; 2])> {
        self.table
            .iter()
            .flat_map(|(path, row)| row.iter().map(move |(m, p)| (path, *m, *p)))
    }
}

impl<T: Ord> PathResponse<T> for TabulatedResponse<T> {
    fn probability(&self, path: &Path<T>, measurement: usize, outcome: Sign) -> Option<f64> {
        let p = self.table.get(path)?.get(&measurement)?;
        Some(match outcome {
            Sign::Plus => p[0],
            Sign::Minus => p[1],
        })
    }
}

impl<T, R: PathResponse<T> + ?Sized> PathResponse<T> for &R {
    fn probability(&self, path: &Path<T>, measurement: usize, outcome: Sign) -> Option<f64> {
        (**self).probability(path, measurement, outcome)
    }
}

/// A finite set of distinct paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSpace<T: Ord> {
    paths: BTreeSet<Path<T>>,
}

impl<T: Ord> PathSpace<T> {
    pub fn new(paths: impl IntoIterator<Item = Path<T>>) -> Result<Self, PppError> {
        let paths: BTreeSet<_> = paths.into_iter().collect();
        if paths.is_empty() {
            return Err(PppError::EmptySpace);
        }
        Ok(Self { paths })
    }

    pub fn iter(&self) -> impl Iterator<Item = &Path<T>> {
        self.paths.iter()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// `p([λ] | ψ)` for one eigenstate `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPrep<T: Ord> {
    state: Eigenstate,
    distribution: BTreeMap<Path<T>, f64>,
}

impl<T: Ord + Clone> PathPrep<T> {
    /// Entries for the same path are merged. Weights must be non-negative
    /// and sum to 1 within `1e-12`.
    pub fn new(
        state: Eigenstate,
        entries: impl IntoIterator<Item = (Path<T>, f64)>,
    ) -> Result<Self, PppError> {
        let mut distribution = BTreeMap::new();
        let mut sum = 0.0;
        for (path, p) in entries {
            if !p.is_finite() || p < 0.0 {
                return Err(PppError::NegativeProbability(state));
            }
            sum += p;
            *distribution.entry(path).or_insert(0.0) += p;
        }
        if (sum - 1.0).abs() > RESPONSE_TOLERANCE {
            return Err(PppError::NotNormalized(state, sum));
        }
        Ok(Self {
            state,
            distribution,
        })
    }

    pub fn state(&self) -> Eigenstate {
        self.state
    }

    pub fn probability(&self, path: &Path<T>) -> f64 {
        self.distribution.get(path).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Path<T>, f64)> {
        self.distribution.iter().map(|(k, v)| (k, *v))
    }

    /// Paths with positive weight, in path order.
    pub fn support(&self) -> impl Iterator<Item = &Path<T>> {
        self.distribution
            .iter()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, _)| k)
    }

    /// `Σ_[λ] p([λ]|ψ) p(k|[λ],M)`; `None` if the response is undefined on
    /// some path of the support.
    pub fn outcome_probability<R: PathResponse<T>>(
        &self,
        response: &R,
        measurement: usize,
        outcome: Sign,
    ) -> Option<f64> {
        self.iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(path, w)| {
                response
                    .probability(path, measurement, outcome)
                    .map(|p| w * p)
            })
            .sum()
    }
}

impl PathPrep<OnticStateId> {
    /// Empirical distribution of `samples` paths drawn from a D-D
    /// preparation.
    pub fn from_dd<R: Rng + ?Sized>(
        prep: &DdPreparation<'_>,
        samples: usize,
        rng: &mut R,
    ) -> Result<Self, PppError> {
        let weight = 1.0 / samples as f64;
        let mut counts: BTreeMap<ProcessPath, usize> = BTreeMap::new();
        for _ in 0..samples {
            *counts.entry(prep.generate_path(rng)).or_insert(0) += 1;
        }
        let entries = counts
            .into_iter()
            .map(|(path, n)| (path, n as f64 * weight));
        PathPrep::new(prep.state.label(), entries)
    }
}

/// A standard ontological model over a finite `Λ`: `p(λ|ψ)` per state and
/// `p(E|λ,M)` per ontic state. Neither carries a dependence on the other's
/// conditioning variables, which is all the two independence assumptions
/// ask for.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardModel<T: Ord> {
    preparations: BTreeMap<Eigenstate, BTreeMap<T, f64>>,
    responses: BTreeMap<T, BTreeMap<usize, [f64; 2]>>,
}

impl<T: Ord + Clone> StandardModel<T> {
    /// Checks normalisation of every `p(λ|ψ)` and `p(·|λ,M)`, and that every
    /// supported `λ` responds to every measurement any `λ` responds to.
    pub fn new(
        preparations: BTreeMap<Eigenstate, BTreeMap<T, f64>>,
        responses: BTreeMap<T, BTreeMap<usize, [f64; 2]>>,
    ) -> Result<Self, PppError> {
        for (state, dist) in &preparations {
            let mut sum = 0.0;
            for p in dist.values() {
                if !p.is_finite() || *p < 0.0 {
                    return Err(PppError::NegativeProbability(*state));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > RESPONSE_TOLERANCE {
                return Err(PppError::NotNormalized(*state, sum));
            }
        }
        let measurements: BTreeSet<usize> =
            responses.values().flat_map(|r| r.keys().copied()).collect();
        for row in responses.values() {
            for (m, [plus, minus]) in row {
                if !(*plus >= 0.0
                    && *minus >= 0.0
                    && (plus + minus - 1.0).abs() <= RESPONSE_TOLERANCE)
                {
                    return Err(PppError::BadResponse {
                        measurement: *m,
                        plus: *plus,
                        minus: *minus,
                    });
                }
            }
        }
        for dist in preparations.values() {
            for (lambda, p) in dist {
                if *p == 0.0 {
                    continue;
                }
                let row = responses.get(lambda);
                if let Some(&m) = measurements
                    .iter()
                    .find(|m| row.is_none_or(|r| !r.contains_key(m)))
                {
                    return Err(PppError::MissingResponse { measurement: m });
                }
            }
        }
        Ok(Self {
            preparations,
            responses,
        })
    }

    /// The ψ-ontic model on `grid`: `Λ` is the set of eigenstates,
    /// `p(λ|ψ) = δ(λ, ψ)` and `p(E|λ,M)` is the Born probability.
    pub fn psi_ontic(grid: &DirectionGrid) -> StandardModel<Eigenstate> {
        let mut preparations = BTreeMap::new();
        let mut responses = BTreeMap::new();
        for state in grid.eigenstates() {
            let label = state.label();
            preparations.insert(label, BTreeMap::from([(label, 1.0)]));
            let row: BTreeMap<usize, [f64; 2]> = grid
                .directions()
                .iter()
                .map(|axis| {
                    let plus = born_probability(&state, axis, Sign::Plus);
                    let minus = born_probability(&state, axis, Sign::Minus);
                    (axis.id(), [plus, minus])
                })
                .collect();
            responses.insert(label, row);
        }
        StandardModel::new(preparations, responses).expect("Born responses are normalised")
    }

    pub fn preparations(&self) -> &BTreeMap<Eigenstate, BTreeMap<T, f64>> {
        &self.preparations
    }

    pub fn responses(&self) -> &BTreeMap<T, BTreeMap<usize, [f64; 2]>> {
        &self.responses
    }

    pub fn measurements(&self) -> BTreeSet<usize> {
        self.responses
            .values()
            .flat_map(|r| r.keys().copied())
            .collect()
    }

    /// `Σ_λ p(λ|ψ) p(E|λ,M)`.
    pub fn outcome_probability(
        &self,
        state: Eigenstate,
        measurement: usize,
        outcome: Sign,
    ) -> Option<f64> {
        let dist = self.preparations.get(&state)?;
        dist.iter()
            .filter(|(_, p)| **p > 0.0)
            .map(|(lambda, p)| {
                let r = self.responses.get(lambda)?.get(&measurement)?;
                Some(p * if outcome == Sign::Plus { r[0] } else { r[1] })
            })
            .sum()
    }

    /// Each `λ` becomes the singleton path `[λ]`.
    pub fn lift(&self) -> PppModel<T> {
        let preparations = self
            .preparations
            .iter()
            .map(|(state, dist)| PathPrep {
                state: *state,
                distribution: dist
                    .iter()
                    .map(|(l, p)| (Path::singleton(l.clone()), *p))
                    .collect(),
            })
            .collect();
        let table = self
            .responses
            .iter()
            .map(|(l, row)| (Path::singleton(l.clone()), row.clone()))
            .collect();
        PppModel {
            preparations,
            response: TabulatedResponse { table },
        }
    }
}

/// Preparations plus a tabulated response.
#[derive(Debug, Clone, PartialEq)]
pub struct PppModel<T: Ord> {
    pub preparations: Vec<PathPrep<T>>,
    pub response: TabulatedResponse<T>,
}

/// Collapses singleton paths to points. Fails with
/// [`PppError::NotSingleton`] as soon as a supported path is longer than one
/// visit. Response entries for longer paths are ignored.
pub fn reduce_to_standard<T: Ord + Clone>(
    model: &PppModel<T>,
) -> Result<StandardModel<T>, PppError> {
    let mut preparations = BTreeMap::new();
    for prep in &model.preparations {
        let mut dist = BTreeMap::new();
        for (path, p) in prep.iter() {
            if p > 0.0 && !path.is_singleton() {
                return Err(PppError::NotSingleton {
                    state: prep.state,
                    length: path.len(),
                });
            }
            if path.is_singleton() {
                dist.insert(path[0].clone(), p);
            }
        }
        preparations.insert(prep.state, dist);
    }
    let mut responses: BTreeMap<T, BTreeMap<usize, [f64; 2]>> = BTreeMap::new();
    for (path, m, p) in model.response.iter() {
        if path.is_singleton() {
            responses.entry(path[0].clone()).or_default().insert(m, p);
        }
    }
    StandardModel::new(preparations, responses)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionRow {
    pub state: Eigenstate,
    pub measurement: usize,
    pub outcome: Sign,
    pub model: f64,
    pub born: f64,
    pub pass: bool,
}

/// Compares `Σ_λ p(λ|ψ) p(E|λ,M)` with `|⟨E|ψ⟩|²` for every prepared state,
/// every measurement the model responds to and both outcomes.
pub fn check_reproduction<T: Ord + Clone>(
    model: &StandardModel<T>,
    grid: &DirectionGrid,
) -> Result<Vec<ReproductionRow>, PppError> {
    let measurements = model.measurements();
    let mut rows = Vec::new();
    for &label in model.preparations.keys() {
        let state = grid.state(label).ok_or(PppError::UnknownState(label))?;
        for &m in &measurements {
            let axis = grid
                .get(m)
                .ok_or(PppError::UnknownState(Eigenstate::new(m, Sign::Plus)))?;
            for outcome in Sign::BOTH {
                let predicted = model
                    .outcome_probability(label, m, outcome)
                    .ok_or(PppError::MissingResponse { measurement: m })?;
                let born = born_probability(&state, &axis, outcome);
                rows.push(ReproductionRow {
                    state: label,
                    measurement: m,
                    outcome,
                    model: predicted,
                    born,
                    pass: (predicted - born).abs() <= REPRODUCTION_TOLERANCE,
                });
            }
        }
    }
    Ok(rows)
}

/// `p(k|[λ]₁,M) = p(k|[λ]₂,M)` for every listed measurement and both
/// outcomes. Two undefined responses count as equal.
pub fn m_equivalent<T, R: PathResponse<T>>(
    path1: &Path<T>,
    path2: &Path<T>,
    response: &R,
    measurements: &[usize],
) -> bool {
    measurements.iter().all(|&m| {
        Sign::BOTH.iter().all(|&k| {
            match (
                response.probability(path1, m, k),
                response.probability(path2, m, k),
            ) {
                (Some(a), Some(b)) => (a - b).abs() <= RESPONSE_TOLERANCE,
                (None, None) => true,
                _ => false,
            }
        })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClass<T> {
    /// Sorted; the first member represents the class.
    pub members: Vec<Path<T>>,
    /// `p(+ | class, M)` per listed measurement.
    pub profile: Vec<(usize, Option<f64>)>,
    /// First grid eigenstate whose Born profile matches within tolerance.
    pub quantum_state: Option<Eigenstate>,
}

impl<T> EquivalenceClass<T> {
    pub fn is_q_equivalent(&self) -> bool {
        self.quantum_state.is_some()
    }
}

/// Partitions `space` into M-equivalence classes (each path joins the first
/// class whose representative it matches) and tags each class with the grid
/// eigenstate its response profile reproduces, if any, within `tolerance`.
/// Classes are ordered by their smallest member.
pub fn q_equivalence_classes<T: Ord + Clone, R: PathResponse<T>>(
    space: &PathSpace<T>,
    response: &R,
    measurements: &[usize],
    grid: &DirectionGrid,
    tolerance: f64,
) -> Vec<EquivalenceClass<T>> {
    let mut classes: Vec<Vec<Path<T>>> = Vec::new();
    for path in space.iter() {
        match classes
            .iter_mut()
            .find(|class| m_equivalent(&class[0], path, response, measurements))
        {
            Some(class) => class.push(path.clone()),
            None => classes.push(alloc::vec![path.clone()]),
        }
    }
    classes
        .into_iter()
        .map(|members| {
            let profile: Vec<(usize, Option<f64>)> = measurements
                .iter()
                .map(|&m| (m, response.probability(&members[0], m, Sign::Plus)))
                .collect();
            let quantum_state = grid
                .eigenstates()
                .find(|state| {
                    profile.iter().all(|&(m, p)| match (p, grid.get(m)) {
                        (Some(p), Some(axis)) => {
                            (p - born_probability(state, &axis, Sign::Plus)).abs() <= tolerance
                        }
                        _ => false,
                    })
                })
                .map(|s| s.label());
            EquivalenceClass {
                members,
                profile,
                quantum_state,
            }
        })
        .collect()
}

/// Evidence that two orthogonal preparations share a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize + Clone",
    deserialize = "T: Deserialize<'de>"
))]
pub struct OverlapWitness<T> {
    pub path: Path<T>,
    pub weights: [f64; 2],
    pub measurement: usize,
    /// `[p(+|path,M), p(−|path,M)]`; `None` where undefined.
    pub response: [Option<f64>; 2],
    /// Each preparation whose certain outcome the shared path cannot deliver
    /// with probability 1, with that outcome.
    pub contaminated: Vec<(Eigenstate, Sign)>,
}

/// For orthogonal `prep1`, `prep2` along a shared axis: quantum theory wants
/// the axis measurement to return each preparation's own sign with
/// certainty. A path both preparations can produce would then need
/// `p(+)=p(−)=1`, so the first shared path is returned as a witness naming
/// the certainty it breaks. `None` when the supports are disjoint.
pub fn overlap_contradiction<T: Ord + Clone, R: PathResponse<T>>(
    prep1: &PathPrep<T>,
    prep2: &PathPrep<T>,
    response: &R,
    measurements: &[usize],
) -> Result<Option<OverlapWitness<T>>, PppError> {
    let (s1, s2) = (prep1.state, prep2.state);
    if !s1.is_orthogonal_to(&s2) {
        return Err(PppError::NotOrthogonal(s1, s2));
    }
    let axis = s1.direction;
    if !measurements.contains(&axis) {
        return Err(PppError::MissingMeasurement(axis));
    }
    let Some(shared) = prep1.support().find(|path| prep2.probability(path) > 0.0) else {
        return Ok(None);
    };
    let response = [Sign::Plus, Sign::Minus].map(|k| response.probability(shared, axis, k));
    let at = |sign: Sign| {
        if sign == Sign::Plus {
            response[0]
        } else {
            response[1]
        }
    };
    let contaminated = [s1, s2]
        .into_iter()
        .filter(|s| at(s.sign).is_none_or(|p| p < 1.0))
        .map(|s| (s, s.sign))
        .collect();
    Ok(Some(OverlapWitness {
        path: shared.clone(),
        weights: [prep1.probability(shared), prep2.probability(shared)],
        measurement: axis,
        response,
        contaminated,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathVerdict {
    /// Exactly one preparation produces this path.
    DeterminesState,
    /// Several preparations produce it.
    Shared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathClassification<T> {
    pub path: Path<T>,
    pub verdict: PathVerdict,
    pub states: Vec<Eigenstate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateClassification<T> {
    pub paths: Vec<PathClassification<T>>,
    /// For each ontic state on any supported path, the preparations whose
    /// paths visit it.
    pub elements: BTreeMap<T, BTreeSet<Eigenstate>>,
}

impl<T> StateClassification<T> {
    pub fn all_paths_determine_state(&self) -> bool {
        self.paths
            .iter()
            .all(|p| p.verdict == PathVerdict::DeterminesState)
    }
}

/// Path-level onticity next to state-level sharing: does each path pin down
/// the preparation, and which preparations reach each ontic state?
pub fn classify_state<T: Ord + Clone>(preps: &[PathPrep<T>]) -> StateClassification<T> {
    let mut owners: BTreeMap<&Path<T>, BTreeSet<Eigenstate>> = BTreeMap::new();
    let mut elements: BTreeMap<T, BTreeSet<Eigenstate>> = BTreeMap::new();
    for prep in preps {
        for path in prep.support() {
            owners.entry(path).or_default().insert(prep.state);
            for visit in path.iter() {
                elements
                    .entry(visit.clone())
                    .or_default()
                    .insert(prep.state);
            }
        }
    }
    let paths = owners
        .into_iter()
        .map(|(path, states)| PathClassification {
            path: path.clone(),
            verdict: if states.len() == 1 {
                PathVerdict::DeterminesState
            } else {
                PathVerdict::Shared
            },
            states: states.into_iter().collect(),
        })
        .collect();
    StateClassification { paths, elements }
}

/// Tag sets `{λ}_{E_k}` per measurement and outcome.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Taggings<T: Ord> {
    map: BTreeMap<usize, BTreeMap<Sign, BTreeSet<T>>>,
}

impl<T: Ord> Taggings<T> {
    pub fn new() -> Self {
        Self {
            map: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, measurement: usize, outcome: Sign, tags: impl IntoIterator<Item = T>) {
        self.map
            .entry(measurement)
            .or_default()
            .entry(outcome)
            .or_default()
            .extend(tags);
    }

    pub fn measurements(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.keys().copied()
    }
}

impl Taggings<OnticStateId> {
    /// `{λ}_{θ±} = {λ_θ±}` for each listed axis.
    pub fn axes(axes: &[usize]) -> Self {
        let mut t = Self::new();
        for &axis in axes {
            for sign in Sign::BOTH {
                t.insert(axis, sign, [OnticStateId::new(axis, sign)]);
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndistinguishabilityReport {
    pub holds: bool,
    /// True when there were no measurements to check.
    pub vacuous: bool,
    /// For each measurement, the first outcome whose tag set both
    /// preparations reach, if any.
    pub shared_outcomes: Vec<(usize, Option<Sign>)>,
}

/// Holds when, for every tagged measurement, some outcome's tag set meets a
/// supported path of each preparation. The two paths need not meet each
/// other.
pub fn indistinguishability_condition<T: Ord + Clone>(
    prep1: &PathPrep<T>,
    prep2: &PathPrep<T>,
    taggings: &Taggings<T>,
) -> IndistinguishabilityReport {
    let reaches = |prep: &PathPrep<T>, tags: &BTreeSet<T>| {
        prep.support()
            .any(|path| path.iter().any(|v| tags.contains(v)))
    };
    let shared_outcomes: Vec<(usize, Option<Sign>)> = taggings
        .map
        .iter()
        .map(|(&m, outcomes)| {
            let hit = outcomes
                .iter()
                .find(|(_, tags)| reaches(prep1, tags) && reaches(prep2, tags))
                .map(|(k, _)| *k);
            (m, hit)
        })
        .collect();
    IndistinguishabilityReport {
        holds: shared_outcomes.iter().all(|(_, hit)| hit.is_some()),
        vacuous: shared_outcomes.is_empty(),
        shared_outcomes,
    }
}
