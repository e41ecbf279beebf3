//! Exact single-qubit reference layer.
//!
//! States and measurement axes are real Bloch vectors. Every state the models
//! prepare is a spin eigenstate `|θ_α⟩` along some configured axis, so a state
//! is just an axis plus a sign, and the Born probability has the closed form
//! `(1 + s·t·(n̂·m̂)) / 2`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for "same axis" when building a grid (antipodes included).
pub const DUPLICATE_TOLERANCE: f64 = 1e-9;

const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("axis `{0}` has zero length")]
    ZeroVector(String),
    #[error("axis `{0}` has a non-finite component")]
    NonFinite(String),
    #[error("grid must contain at least one axis")]
    Empty,
    #[error("unknown axis `{0}`")]
    UnknownAxis(String),
    #[error("cannot parse eigenstate `{0}`; expected an axis name followed by + or -")]
    BadEigenstate(String),
}

/// Outcome sign of a spin measurement, `α ∈ {+1, −1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    fn factor(self) -> f64 {
        f64::from(self.value())
    }
}

impl From<Sign> for i8 {
    fn from(sign: Sign) -> i8 {
        sign.value()
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(value: i8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(alloc::format!("sign must be +1 or -1, got {other}")),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A measurement axis: a unit Bloch vector tagged with its index in the grid
/// it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    id: usize,
    vector: [f64; 3],
}

impl Direction {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn vector(&self) -> [f64; 3] {
        self.vector
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        dot(&self.vector, &other.vector)
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Normalises `v` and snaps components that are rounding noise (such as
/// `cos(π/2)`) to exact zeros, so axes like x̂ come out as `(1, 0, 0)`.
fn unit_vector(name: &str, v: [f64; 3]) -> Result<[f64; 3], GridError> {
    if v.iter().any(|c| !c.is_finite()) {
        return Err(GridError::NonFinite(name.to_string()));
    }
    let norm = libm::sqrt(dot(&v, &v));
    if norm == 0.0 {
        return Err(GridError::ZeroVector(name.to_string()));
    }
    let mut u = v.map(|c| c / norm);
    for c in u.iter_mut() {
        if c.abs() < SNAP {
            *c = 0.0;
        }
    }
    let norm = libm::sqrt(dot(&u, &u));
    Ok(u.map(|c| c / norm))
}

/// Spin eigenstate `|θ_α⟩` along a grid axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub direction: Direction,
    pub sign: Sign,
}

impl QubitState {
    pub fn new(direction: Direction, sign: Sign) -> Self {
        Self { direction, sign }
    }

    /// The orthogonal eigenstate along the same axis.
    pub fn orthogonal(&self) -> Self {
        Self::new(self.direction, self.sign.flip())
    }

    pub fn label(&self) -> Eigenstate {
        Eigenstate::new(self.direction.id, self.sign)
    }
}

/// Grid-relative name of an eigenstate: axis index plus sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Eigenstate {
    pub direction: usize,
    pub sign: Sign,
}

impl Eigenstate {
    pub fn new(direction: usize, sign: Sign) -> Self {
        Self { direction, sign }
    }

    pub fn is_orthogonal_to(&self, other: &Eigenstate) -> bool {
        self.direction == other.direction && self.sign != other.sign
    }
}

/// Ordered, duplicate-free set of named measurement axes.
///
/// Antipodal axes are identified: adding `−m̂` to a grid that already holds
/// `m̂` is a no-op, and "measuring along `−m̂`" is expressed as measuring along
/// `m̂` with the signs swapped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DirectionGrid {
    directions: Vec<Direction>,
    names: Vec<String>,
}

impl DirectionGrid {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n` axes evenly spaced over half of the xz great circle, at polar
    /// angles `kπ/n`. The first axis is ẑ; x̂ appears when `n` is even.
    pub fn great_circle(n: usize) -> Self {
        let mut grid = Self::new();
        grid.extend_great_circle(n);
        grid
    }

    /// The default verification grid: twelve great-circle axes (15° apart,
    /// containing ẑ and x̂) plus ŷ.
    pub fn standard() -> Self {
        let mut grid = Self::great_circle(12);
        grid.push("y", [0.0, 1.0, 0.0]).expect("ŷ is a unit vector");
        grid
    }

    pub fn extend_great_circle(&mut self, n: usize) {
        for k in 0..n {
            let degrees = 180.0 * k as f64 / n as f64;
            let name = polar_name(degrees);
            self.push_polar(&name, degrees)
                .expect("great-circle axes are unit vectors");
        }
    }

    /// Adds an axis in the xz-plane at the given polar angle (degrees from ẑ).
    pub fn push_polar(&mut self, name: &str, degrees: f64) -> Result<usize, GridError> {
        let theta = degrees.to_radians();
        self.push(name, [libm::sin(theta), 0.0, libm::cos(theta)])
    }

    /// Adds an axis and returns its id. If the axis (or its antipode) is
    /// already present, the existing id is returned and the name is dropped.
    pub fn push(&mut self, name: &str, vector: [f64; 3]) -> Result<usize, GridError> {
        let vector = unit_vector(name, vector)?;
        if let Some(existing) = self
            .directions
            .iter()
            .find(|d| (dot(&d.vector, &vector).abs() - 1.0).abs() <= DUPLICATE_TOLERANCE)
        {
            return Ok(existing.id);
        }
        let id = self.directions.len();
        self.directions.push(Direction { id, vector });
        self.names.push(name.to_string());
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<Direction> {
        self.directions.get(id).copied()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn find(&self, name: &str) -> Option<Direction> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|id| self.directions[id])
    }

    /// True when `direction` is this grid's axis with the same id.
    pub fn contains(&self, direction: &Direction) -> bool {
        self.get(direction.id) == Some(*direction)
    }

    pub fn state(&self, label: Eigenstate) -> Option<QubitState> {
        self.get(label.direction)
            .map(|d| QubitState::new(d, label.sign))
    }

    /// All `2·len` eigenstates, `+` before `−` for each axis.
    pub fn eigenstates(&self) -> impl Iterator<Item = QubitState> + '_ {
        self.directions
            .iter()
            .flat_map(|d| Sign::BOTH.into_iter().map(move |s| QubitState::new(*d, s)))
    }

    /// Parses `"z+"`, `"polar60-"`, ... against this grid's axis names.
    pub fn parse_eigenstate(&self, text: &str) -> Result<Eigenstate, GridError> {
        let text = text.trim();
        let sign = match text.chars().last() {
            Some('+') => Sign::Plus,
            Some('-') => Sign::Minus,
            _ => return Err(GridError::BadEigenstate(text.to_string())),
        };
        let axis = &text[..text.len() - 1];
        let direction = self
            .find(axis)
            .ok_or_else(|| GridError::UnknownAxis(axis.to_string()))?;
        Ok(Eigenstate::new(direction.id, sign))
    }

    pub fn eigenstate_name(&self, label: Eigenstate) -> String {
        let axis = self.name(label.direction).unwrap_or("?");
        alloc::format!("{axis}{}", label.sign)
    }
}

fn polar_name(degrees: f64) -> String {
    if degrees == 0.0 {
        "z".to_string()
    } else if degrees == 90.0 {
        "x".to_string()
    } else if degrees == libm::round(degrees) {
        alloc::format!("polar{}", degrees as i64)
    } else {
        alloc::format!("polar{degrees}")
    }
}

/// `|⟨E|ψ⟩|²` for the eigenstate `state` measured along `axis` with outcome
/// `outcome`.
///
/// The two outcome probabilities always sum to exactly 1: the larger one is
/// computed as `(1 + |c|)/2 ∈ [½, 1]` and the smaller as its exact complement.
/// Measuring along the state's own axis yields exactly 1 or 0.
pub fn born_probability(state: &QubitState, axis: &Direction, outcome: Sign) -> f64 {
    let cosine = if state.direction.id == axis.id && state.direction.vector == axis.vector {
        1.0
    } else {
        state.direction.dot(axis).clamp(-1.0, 1.0)
    };
    let signed = state.sign.factor() * outcome.factor() * cosine;
    let larger = (1.0 + signed.abs()) / 2.0;
    if signed >= 0.0 {
        larger
    } else {
        1.0 - larger
    }
}

/// Probability of observing the given outcome sequence under ideal projective
/// measurements, each step collapsing to the eigenstate of its outcome.
///
/// An empty chain has probability 1.
pub fn sequential_probability(prep: &QubitState, chain: &[(Direction, Sign)]) -> f64 {
    let mut state = *prep;
    let mut probability = 1.0;
    for &(axis, outcome) in chain {
        probability *= born_probability(&state, &axis, outcome);
        state = QubitState::new(axis, outcome);
    }
    probability
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zx() -> DirectionGrid {
        let mut grid = DirectionGrid::new();
        grid.push("z", [0.0, 0.0, 1.0]).unwrap();
        grid.push("x", [1.0, 0.0, 0.0]).unwrap();
        grid
    }

    #[test]
    fn standard_grid_has_thirteen_axes() {
        let grid = DirectionGrid::standard();
        assert_eq!(grid.len(), 13);
        assert_eq!(grid.find("z").unwrap().vector(), [0.0, 0.0, 1.0]);
        assert_eq!(grid.find("x").unwrap().vector(), [1.0, 0.0, 0.0]);
        assert_eq!(grid.find("y").unwrap().vector(), [0.0, 1.0, 0.0]);
        assert!(grid.find("polar60").is_some());
        for d in grid.directions() {
            assert!((d.dot(d) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn duplicate_and_antipodal_axes_are_merged() {
        let mut grid = zx();
        assert_eq!(grid.push("z again", [0.0, 0.0, 2.0]).unwrap(), 0);
        assert_eq!(grid.push("minus x", [-1.0, 0.0, 0.0]).unwrap(), 1);
        assert_eq!(grid.len(), 2);
        assert!(grid.find("minus x").is_none());
    }

    #[test]
    fn degenerate_axes_are_rejected() {
        let mut grid = DirectionGrid::new();
        assert_eq!(
            grid.push("zero", [0.0; 3]),
            Err(GridError::ZeroVector("zero".into()))
        );
        assert!(matches!(
            grid.push("nan", [f64::NAN, 0.0, 1.0]),
            Err(GridError::NonFinite(_))
        ));
    }

    #[test]
    fn born_anchor_values() {
        let grid = zx();
        let z = grid.find("z").unwrap();
        let x = grid.find("x").unwrap();
        let z_plus = QubitState::new(z, Sign::Plus);
        assert_eq!(born_probability(&z_plus, &z, Sign::Plus), 1.0);
        assert_eq!(born_probability(&z_plus, &z, Sign::Minus), 0.0);
        assert_eq!(born_probability(&z_plus, &x, Sign::Plus), 0.5);
        assert_eq!(born_probability(&z_plus, &x, Sign::Minus), 0.5);
    }

    #[test]
    fn born_complement_is_exact_on_standard_grid() {
        let grid = DirectionGrid::standard();
        for state in grid.eigenstates() {
            for axis in grid.directions() {
                let plus = born_probability(&state, axis, Sign::Plus);
                let minus = born_probability(&state, axis, Sign::Minus);
                assert_eq!(plus + minus, 1.0);
                let flipped = state.orthogonal();
                assert_eq!(plus, born_probability(&flipped, axis, Sign::Minus));
            }
            assert_eq!(born_probability(&state, &state.direction, state.sign), 1.0);
            assert_eq!(
                born_probability(&state, &state.direction, state.sign.flip()),
                0.0
            );
        }
    }

    #[test]
    fn sequential_anchor_values() {
        let grid = zx();
        let z = grid.find("z").unwrap();
        let x = grid.find("x").unwrap();
        let z_plus = QubitState::new(z, Sign::Plus);
        assert_eq!(sequential_probability(&z_plus, &[(z, Sign::Plus)]), 1.0);
        assert_eq!(
            sequential_probability(&z_plus, &[(x, Sign::Plus), (x, Sign::Plus)]),
            0.5
        );
        assert_eq!(
            sequential_probability(&z_plus, &[(x, Sign::Plus), (x, Sign::Minus)]),
            0.0
        );
        assert_eq!(
            sequential_probability(&z_plus, &[(x, Sign::Plus), (z, Sign::Plus)]),
            0.25
        );
        assert_eq!(sequential_probability(&z_plus, &[]), 1.0);
    }

    #[test]
    fn eigenstate_names_round_trip() {
        let grid = DirectionGrid::standard();
        let label = grid.parse_eigenstate("polar60-").unwrap();
        assert_eq!(grid.eigenstate_name(label), "polar60-");
        assert_eq!(
            grid.parse_eigenstate("q+"),
            Err(GridError::UnknownAxis("q".into()))
        );
        assert!(matches!(
            grid.parse_eigenstate("z"),
            Err(GridError::BadEigenstate(_))
        ));
    }

    #[test]
    fn sign_serializes_as_integer() {
        assert_eq!(Sign::try_from(1i8), Ok(Sign::Plus));
        assert_eq!(Sign::try_from(-1i8), Ok(Sign::Minus));
        assert!(Sign::try_from(0i8).is_err());
        assert_eq!(i8::from(Sign::Minus), -1);
    }
}
