//! Run configuration: CLI flags or a JSON file, resolved against a grid.

use std::path::PathBuf;

use ontic_core::dd::{PathOrdering, Resolution, Sampler};
use ontic_core::{Direction, DirectionGrid, QubitState};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const DEFAULT_GRID: &str = "greatcircle:12,y";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    #[default]
    Dd,
    Dp,
    Pd,
    Ppp,
    StandardCheck,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Dd => "dd",
            ModelKind::Dp => "dp",
            ModelKind::Pd => "pd",
            ModelKind::Ppp => "ppp",
            ModelKind::StandardCheck => "standard-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    /// Comma-separated axis tokens, see [`parse_grid`].
    pub grid: String,
    pub resolution: u32,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub z: f64,
    /// Eigenstate names such as `z+`.
    pub preparations: Vec<String>,
    /// Measurement chains as axis names. Empty means one single-shot chain
    /// per grid axis.
    pub chains: Vec<Vec<String>>,
    pub sampler: Sampler,
    pub ordering: PathOrdering,
    /// P-D instance file; the built-in minimal instance when absent.
    pub instance: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Dd,
            grid: DEFAULT_GRID.to_string(),
            resolution: 100,
            trials: 100_000,
            seed: 42,
            workers: 1,
            z: 4.0,
            preparations: vec!["z+".into(), "x+".into(), "y+".into()],
            chains: Vec::new(),
            sampler: Sampler::VisitCounts,
            ordering: PathOrdering::Shuffled,
            instance: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("config file: {e}")))
    }

    pub fn resolve(&self) -> Result<Resolved, HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Config(
                "trial count must be at least 1".into(),
            ));
        }
        if self.workers == 0 {
            return Err(HarnessError::Config(
                "worker count must be at least 1".into(),
            ));
        }
        if !(self.z.is_finite() && self.z > 0.0) {
            return Err(HarnessError::Config(format!(
                "z must be positive, got {}",
                self.z
            )));
        }
        let resolution =
            Resolution::new(self.resolution).map_err(|e| HarnessError::Config(e.to_string()))?;
        let grid = parse_grid(&self.grid)?;
        let preparations = self
            .preparations
            .iter()
            .map(|name| {
                grid.parse_eigenstate(name)
                    .map(|label| grid.state(label).expect("parsed labels are on the grid"))
                    .map_err(|e| HarnessError::Config(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let chains = if self.chains.is_empty() {
            grid.directions().iter().map(|d| vec![*d]).collect()
        } else {
            self.chains
                .iter()
                .map(|chain| {
                    if chain.is_empty() {
                        return Err(HarnessError::Config(
                            "measurement chains must not be empty".into(),
                        ));
                    }
                    chain.iter().map(|name| axis(&grid, name)).collect()
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Resolved {
            grid,
            resolution,
            preparations,
            chains,
        })
    }
}

/// A [`RunConfig`] with names resolved against its grid.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: DirectionGrid,
    pub resolution: Resolution,
    pub preparations: Vec<QubitState>,
    pub chains: Vec<Vec<Direction>>,
}

pub fn axis(grid: &DirectionGrid, name: &str) -> Result<Direction, HarnessError> {
    grid.find(name.trim())
        .ok_or_else(|| HarnessError::Config(format!("unknown axis `{}`", name.trim())))
}

/// Parses a grid spec: comma-separated tokens, each one of
///
/// - `x`, `y`, `z`
/// - `greatcircle:N`: N axes at polar angles `k·180°/N` in the xz-plane
/// - `polar:DEG`: one xz-plane axis at `DEG` degrees from ẑ, named `polarDEG`
/// - `vec:X:Y:Z[:NAME]`: an arbitrary axis
///
/// Duplicate and antipodal axes are merged, keeping the first name.
pub fn parse_grid(spec: &str) -> Result<DirectionGrid, HarnessError> {
    let bad = |msg: String| HarnessError::Config(format!("grid `{spec}`: {msg}"));
    let mut grid = DirectionGrid::new();
    for token in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = token.split(':').collect();
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(format!("`{s}` is not a number")))
        };
        let pushed = match parts.as_slice() {
            ["x"] => grid.push("x", [1.0, 0.0, 0.0]).map(|_| ()),
            ["y"] => grid.push("y", [0.0, 1.0, 0.0]).map(|_| ()),
            ["z"] => grid.push("z", [0.0, 0.0, 1.0]).map(|_| ()),
            ["greatcircle", n] => {
                let n: usize = n
                    .parse()
                    .map_err(|_| bad(format!("`{n}` is not a positive integer")))?;
                if n == 0 {
                    return Err(bad("greatcircle needs at least one axis".into()));
                }
                grid.extend_great_circle(n);
                Ok(())
            }
            ["polar", deg] => {
                let d = number(deg)?;
                grid.push_polar(&format!("polar{deg}"), d).map(|_| ())
            }
            ["vec", x, y, z] => {
                let v = [number(x)?, number(y)?, number(z)?];
                grid.push(&format!("vec{}", grid.len()), v).map(|_| ())
            }
            ["vec", x, y, z, name] => {
                let v = [number(x)?, number(y)?, number(z)?];
                grid.push(name, v).map(|_| ())
            }
            _ => return Err(bad(format!("unrecognised axis token `{token}`"))),
        };
        pushed.map_err(|e| bad(e.to_string()))?;
    }
    if grid.is_empty() {
        return Err(bad("no axes".into()));
    }
    Ok(grid)
}
