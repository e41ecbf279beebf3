//! The fully dynamical (D-D) model.
//!
//! The ontic space is `Λ = {λ_θα}`: one state per grid axis θ and sign α. A
//! system prepared in `|ψ⟩` is in a process that visits every ontic state
//! except the one orthogonal to `|ψ⟩`, subject only to the relative frequency
//! rule
//!
//! ```text
//! N_ψ(θ_α) / (N_ψ(θ_+) + N_ψ(θ_-)) = |⟨θ_α|ψ⟩|²
//! ```
//!
//! Integer counts cannot hit irrational ratios, so every axis gets exactly
//! `R` visits, `N(θ_+) = round(R·p)` (ties away from zero) and
//! `N(θ_-) = R − N(θ_+)`. The per-axis error is at most `1/(2R)`.
//!
//! A measurement along `m̂` only sees the visits to `λ_m+` and `λ_m-` in the
//! measurement window (one generated path) and picks one of them uniformly.
//! Afterwards the system is re-prepared in the eigenstate of the outcome.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::path::Path;
use crate::qubit::{born_probability, Direction, DirectionGrid, QubitState, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DdError {
    #[error("resolution must be at least 2, got {0}")]
    Resolution(u32),
    #[error("axis {0} is not part of the preparation's grid")]
    AxisNotInGrid(usize),
    #[error("path has no visit along axis {0}; nothing for the measurement to select")]
    EmptyVisibleSet(usize),
}

/// `λ_θα`: grid axis index and sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OnticStateId {
    pub direction_id: usize,
    pub sign: Sign,
}

impl OnticStateId {
    pub fn new(direction_id: usize, sign: Sign) -> Self {
        Self { direction_id, sign }
    }
}

/// A path through the D-D ontic space: one measurement window.
pub type ProcessPath = Path<OnticStateId>;

/// Visits per ontic state, `N_ψ(θ_α)`. Only positive counts are stored, so
/// two values compare equal exactly when they describe the same multiset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VisitCounts {
    counts: BTreeMap<OnticStateId, u32>,
}

impl VisitCounts {
    pub fn get(&self, state: OnticStateId) -> u32 {
        self.counts.get(&state).copied().unwrap_or(0)
    }

    /// `(N(θ_+), N(θ_-))`.
    pub fn pair(&self, direction_id: usize) -> (u32, u32) {
        (
            self.get(OnticStateId::new(direction_id, Sign::Plus)),
            self.get(OnticStateId::new(direction_id, Sign::Minus)),
        )
    }

    /// `N(θ_+) / (N(θ_+) + N(θ_-))`, or `None` when the axis is never visited.
    pub fn relative_frequency(&self, direction_id: usize, sign: Sign) -> Option<f64> {
        let (plus, minus) = self.pair(direction_id);
        let total = plus + minus;
        if total == 0 {
            return None;
        }
        let hits = match sign {
            Sign::Plus => plus,
            Sign::Minus => minus,
        };
        Some(f64::from(hits) / f64::from(total))
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&n| u64::from(n)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (OnticStateId, u32)> + '_ {
        self.counts.iter().map(|(k, v)| (*k, *v))
    }

    pub fn add(&mut self, state: OnticStateId, n: u32) {
        if n > 0 {
            *self.counts.entry(state).or_insert(0) += n;
        }
    }

    pub fn from_path(path: &ProcessPath) -> Self {
        let mut counts = Self::default();
        for &visit in path.iter() {
            counts.add(visit, 1);
        }
        counts
    }

    /// Selects one of the visits along `axis` uniformly at random and returns
    /// its sign. Only the counts matter: this has the same distribution as
    /// [`select_visible`] on any ordering of the same visits.
    pub fn select<R: Rng + ?Sized>(&self, axis: usize, rng: &mut R) -> Result<Sign, DdError> {
        let (plus, minus) = self.pair(axis);
        let visible = plus + minus;
        if visible == 0 {
            return Err(DdError::EmptyVisibleSet(axis));
        }
        let pick = rng.gen_range(0..visible);
        Ok(if pick < plus { Sign::Plus } else { Sign::Minus })
    }
}

/// Number of visits along `axis` in `path`: what a measurement along that
/// axis can see.
pub fn visible_count(path: &ProcessPath, axis: usize) -> usize {
    path.iter().filter(|v| v.direction_id == axis).count()
}

/// Sign of the `index`-th visit along `axis`, in path order.
pub fn visible_visit(path: &ProcessPath, axis: usize, index: usize) -> Option<Sign> {
    path.iter()
        .filter(|v| v.direction_id == axis)
        .nth(index)
        .map(|v| v.sign)
}

/// Picks one visit to `λ_axis±` uniformly among all such visits in `path`.
pub fn select_visible<R: Rng + ?Sized>(
    path: &ProcessPath,
    axis: usize,
    rng: &mut R,
) -> Result<Sign, DdError> {
    let visible = visible_count(path, axis);
    if visible == 0 {
        return Err(DdError::EmptyVisibleSet(axis));
    }
    let pick = rng.gen_range(0..visible);
    Ok(visible_visit(path, axis, pick).expect("pick is below the visible count"))
}

/// Visits per axis in one measurement window. At least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Resolution(u32);

impl Resolution {
    pub fn new(visits_per_axis: u32) -> Result<Self, DdError> {
        if visits_per_axis < 2 {
            Err(DdError::Resolution(visits_per_axis))
        } else {
            Ok(Self(visits_per_axis))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `1/(2R)`, the worst-case gap between a quantized relative frequency
    /// and its Born probability.
    pub fn quantization_bound(self) -> f64 {
        1.0 / (2.0 * f64::from(self.0))
    }
}

impl TryFrom<u32> for Resolution {
    type Error = DdError;

    fn try_from(value: u32) -> Result<Self, DdError> {
        Resolution::new(value)
    }
}

impl From<Resolution> for u32 {
    fn from(r: Resolution) -> u32 {
        r.0
    }
}

/// How the visits of a path are ordered. Outcome statistics do not depend
/// on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathOrdering {
    /// Uniform random permutation of the visit multiset.
    #[default]
    Shuffled,
    /// Axis-interleaved: one visit per axis per round, `+` visits first.
    RoundRobin,
}

/// How [`DdPreparation::run_sequential`] realises each measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// Generate the full path and select among its visible visits.
    #[default]
    FullPath,
    /// Select directly from the visit counts. Same outcome distribution,
    /// no path materialised.
    VisitCounts,
}

/// Per-axis quantized counts for one state. Shared by [`DdPreparation`] and
/// the precomputed tables used in bulk simulation.
pub fn quantized_counts_for(
    state: &QubitState,
    grid: &DirectionGrid,
    resolution: Resolution,
) -> VisitCounts {
    let r = resolution.get();
    let mut counts = VisitCounts::default();
    for axis in grid.directions() {
        let p = born_probability(state, axis, Sign::Plus);
        // round() is half-away-from-zero, so ties go to the + outcome.
        let plus = (libm::round(f64::from(r) * p) as u32).min(r);
        counts.add(OnticStateId::new(axis.id(), Sign::Plus), plus);
        counts.add(OnticStateId::new(axis.id(), Sign::Minus), r - plus);
    }
    counts
}

/// A system prepared in `state`, traversing the ontic space of `grid`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdPreparation<'g> {
    pub state: QubitState,
    pub grid: &'g DirectionGrid,
    pub resolution: Resolution,
    pub ordering: PathOrdering,
}

/// Result of one measurement: the outcome and the re-prepared system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement<'g> {
    pub outcome: Sign,
    pub post: DdPreparation<'g>,
}

impl<'g> DdPreparation<'g> {
    pub fn new(
        state: QubitState,
        grid: &'g DirectionGrid,
        resolution: Resolution,
        ordering: PathOrdering,
    ) -> Result<Self, DdError> {
        if !grid.contains(&state.direction) {
            return Err(DdError::AxisNotInGrid(state.direction.id()));
        }
        Ok(Self {
            state,
            grid,
            resolution,
            ordering,
        })
    }

    /// Same grid, resolution and ordering; different state.
    pub fn with_state(&self, state: QubitState) -> Self {
        Self { state, ..*self }
    }

    pub fn quantized_counts(&self) -> VisitCounts {
        quantized_counts_for(&self.state, self.grid, self.resolution)
    }

    /// One measurement window: every ontic state appears exactly as often as
    /// [`quantized_counts`](Self::quantized_counts) says, the orthogonal
    /// state never.
    pub fn generate_path<R: Rng + ?Sized>(&self, rng: &mut R) -> ProcessPath {
        let counts = self.quantized_counts();
        let visits = match self.ordering {
            PathOrdering::Shuffled => {
                let mut visits: Vec<OnticStateId> = counts
                    .iter()
                    .flat_map(|(state, n)| core::iter::repeat_n(state, n as usize))
                    .collect();
                visits.shuffle(rng);
                visits
            }
            PathOrdering::RoundRobin => round_robin(&counts, self.grid, self.resolution),
        };
        Path::new(visits).expect("every axis contributes R >= 2 visits")
    }

    /// Measures `path` along `axis` and re-prepares the system in the
    /// outcome eigenstate.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        path: &ProcessPath,
        axis: &Direction,
        rng: &mut R,
    ) -> Result<Measurement<'g>, DdError> {
        self.check_axis(axis)?;
        let outcome = select_visible(path, axis.id(), rng)?;
        Ok(self.after(axis, outcome))
    }

    /// Like [`measure`](Self::measure) on a fresh path, but draws straight
    /// from the quantized counts.
    pub fn measure_counts<R: Rng + ?Sized>(
        &self,
        axis: &Direction,
        rng: &mut R,
    ) -> Result<Measurement<'g>, DdError> {
        self.check_axis(axis)?;
        let outcome = self.quantized_counts().select(axis.id(), rng)?;
        Ok(self.after(axis, outcome))
    }

    /// Measures each axis in turn, regenerating the process from the previous
    /// outcome's eigenstate before every step.
    pub fn run_sequential<R: Rng + ?Sized>(
        &self,
        axes: &[Direction],
        sampler: Sampler,
        rng: &mut R,
    ) -> Result<Vec<Sign>, DdError> {
        let mut current = *self;
        let mut outcomes = Vec::with_capacity(axes.len());
        for axis in axes {
            let step = match sampler {
                Sampler::FullPath => {
                    let path = current.generate_path(rng);
                    current.measure(&path, axis, rng)?
                }
                Sampler::VisitCounts => current.measure_counts(axis, rng)?,
            };
            outcomes.push(step.outcome);
            current = step.post;
        }
        Ok(outcomes)
    }

    fn check_axis(&self, axis: &Direction) -> Result<(), DdError> {
        if self.grid.contains(axis) {
            Ok(())
        } else {
            Err(DdError::AxisNotInGrid(axis.id()))
        }
    }

    fn after(&self, axis: &Direction, outcome: Sign) -> Measurement<'g> {
        Measurement {
            outcome,
            post: self.with_state(QubitState::new(*axis, outcome)),
        }
    }
}

fn round_robin(
    counts: &VisitCounts,
    grid: &DirectionGrid,
    resolution: Resolution,
) -> Vec<OnticStateId> {
    let per_axis: Vec<Vec<OnticStateId>> = grid
        .directions()
        .iter()
        .map(|axis| {
            let (plus, minus) = counts.pair(axis.id());
            let mut visits = Vec::with_capacity((plus + minus) as usize);
            visits.extend(core::iter::repeat_n(
                OnticStateId::new(axis.id(), Sign::Plus),
                plus as usize,
            ));
            visits.extend(core::iter::repeat_n(
                OnticStateId::new(axis.id(), Sign::Minus),
                minus as usize,
            ));
            visits
        })
        .collect();
    let rounds = resolution.get() as usize;
    let mut out = Vec::with_capacity(rounds * per_axis.len());
    for round in 0..rounds {
        for visits in &per_axis {
            if let Some(&v) = visits.get(round) {
                out.push(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid_zx() -> DirectionGrid {
        let mut grid = DirectionGrid::new();
        grid.push("z", [0.0, 0.0, 1.0]).unwrap();
        grid.push("x", [1.0, 0.0, 0.0]).unwrap();
        grid.push_polar("polar60", 60.0).unwrap();
        grid
    }

    fn prep<'g>(grid: &'g DirectionGrid, axis: &str, sign: Sign, r: u32) -> DdPreparation<'g> {
        let state = QubitState::new(grid.find(axis).unwrap(), sign);
        DdPreparation::new(
            state,
            grid,
            Resolution::new(r).unwrap(),
            PathOrdering::Shuffled,
        )
        .unwrap()
    }

    #[test]
    fn resolution_below_two_is_rejected() {
        assert_eq!(Resolution::new(1), Err(DdError::Resolution(1)));
        assert_eq!(Resolution::new(2).unwrap().quantization_bound(), 0.25);
    }

    #[test]
    fn quantized_counts_anchor_values() {
        let grid = grid_zx();
        let counts = prep(&grid, "z", Sign::Plus, 4).quantized_counts();
        assert_eq!(counts.pair(0), (4, 0));
        assert_eq!(counts.pair(1), (2, 2));
        assert_eq!(counts.pair(2), (3, 1));
        assert_eq!(counts.total(), 12);
    }

    #[test]
    fn ties_round_toward_plus() {
        let grid = grid_zx();
        // p = 1/2 on x̂, R = 3 → 1.5 rounds up.
        let counts = prep(&grid, "z", Sign::Plus, 3).quantized_counts();
        assert_eq!(counts.pair(1), (2, 1));
    }

    #[test]
    fn single_axis_path_has_only_the_allowed_state() {
        let mut grid = DirectionGrid::new();
        grid.push("z", [0.0, 0.0, 1.0]).unwrap();
        let p = prep(&grid, "z", Sign::Plus, 2);
        let path = p.generate_path(&mut ChaCha8Rng::seed_from_u64(3));
        let z_plus = OnticStateId::new(0, Sign::Plus);
        assert_eq!(path.visits(), &[z_plus, z_plus]);
    }

    #[test]
    fn two_axis_path_is_a_permutation_of_the_counts() {
        let mut grid = DirectionGrid::new();
        grid.push("z", [0.0, 0.0, 1.0]).unwrap();
        grid.push("x", [1.0, 0.0, 0.0]).unwrap();
        let p = prep(&grid, "z", Sign::Plus, 2);
        let path = p.generate_path(&mut ChaCha8Rng::seed_from_u64(9));
        let mut sorted = path.visits().to_vec();
        sorted.sort();
        assert_eq!(
            sorted,
            [
                OnticStateId::new(0, Sign::Plus),
                OnticStateId::new(0, Sign::Plus),
                OnticStateId::new(1, Sign::Plus),
                OnticStateId::new(1, Sign::Minus),
            ]
        );
    }

    #[test]
    fn same_seed_same_path() {
        let grid = DirectionGrid::standard();
        let p = prep(&grid, "x", Sign::Minus, 10);
        let a = p.generate_path(&mut ChaCha8Rng::seed_from_u64(77));
        let b = p.generate_path(&mut ChaCha8Rng::seed_from_u64(77));
        assert_eq!(a, b);
    }

    #[test]
    fn round_robin_interleaves_axes() {
        let mut grid = DirectionGrid::new();
        grid.push("z", [0.0, 0.0, 1.0]).unwrap();
        grid.push("x", [1.0, 0.0, 0.0]).unwrap();
        let mut p = prep(&grid, "z", Sign::Plus, 2);
        p.ordering = PathOrdering::RoundRobin;
        let path = p.generate_path(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(
            path.visits(),
            &[
                OnticStateId::new(0, Sign::Plus),
                OnticStateId::new(1, Sign::Plus),
                OnticStateId::new(0, Sign::Plus),
                OnticStateId::new(1, Sign::Minus),
            ]
        );
    }

    #[test]
    fn measuring_the_preparation_axis_is_certain() {
        let grid = grid_zx();
        let p = prep(&grid, "z", Sign::Plus, 4);
        let z = grid.find("z").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let path = p.generate_path(&mut rng);
            let m = p.measure(&path, &z, &mut rng).unwrap();
            assert_eq!(m.outcome, Sign::Plus);
            assert_eq!(m.post.state, QubitState::new(z, Sign::Plus));
        }
    }

    #[test]
    fn hand_built_path_without_visible_visits_errors() {
        let grid = grid_zx();
        let p = prep(&grid, "z", Sign::Plus, 4);
        let path = Path::new(alloc::vec![OnticStateId::new(0, Sign::Plus)]).unwrap();
        let x = grid.find("x").unwrap();
        let err = p
            .measure(&path, &x, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap_err();
        assert_eq!(err, DdError::EmptyVisibleSet(1));
    }

    #[test]
    fn foreign_axes_are_rejected() {
        let grid = grid_zx();
        let other = DirectionGrid::standard();
        let p = prep(&grid, "z", Sign::Plus, 4);
        let y = other.find("y").unwrap();
        let err = p
            .measure_counts(&y, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap_err();
        assert_eq!(err, DdError::AxisNotInGrid(y.id()));
    }

    #[test]
    fn repeated_axis_gives_repeated_outcome() {
        let grid = grid_zx();
        let p = prep(&grid, "z", Sign::Plus, 4);
        let x = grid.find("x").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for sampler in [Sampler::FullPath, Sampler::VisitCounts] {
            for _ in 0..100 {
                let out = p.run_sequential(&[x, x], sampler, &mut rng).unwrap();
                assert_eq!(out[0], out[1]);
            }
        }
    }
}
