//! File formats: P-D instances, PPP preparation files, path traces, and the
//! D-P table export.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path as FsPath;

use ontic_core::dd::{OnticStateId, ProcessPath};
use ontic_core::dp::spekkens_table;
use ontic_core::pd::PdInstance;
use ontic_core::ppp::{
    classify_state, indistinguishability_condition, overlap_contradiction, q_equivalence_classes,
    PathPrep, PathResponse, PathSpace, PathVerdict, RelativeFrequencyResponse, TabulatedResponse,
    Taggings,
};
use ontic_core::{DirectionGrid, Eigenstate, Path, Sign};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{axis, parse_grid};
use crate::error::HarnessError;
use crate::report::{grid_axes, GridAxis};

pub fn read_json<T: DeserializeOwned>(path: &FsPath) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_pd_instance(path: &FsPath) -> Result<PdInstance, HarnessError> {
    let instance: PdInstance = read_json(path)?;
    instance.check()?;
    Ok(instance)
}

/// D-P outcome table: one row per preparation, one column per setting, each
/// cell `outcome:probability` pairs separated by a space.
pub fn dp_table_csv() -> Result<String, HarnessError> {
    let (model, rows) = spekkens_table();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["prep".to_string()];
    header.extend(model.rules.iter().map(|r| r.name.clone()));
    writer.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.preparation.clone()];
        for (rule, cell) in model.rules.iter().zip(&row.cells) {
            record.push(format!(
                "{}:{} {}:{}",
                rule.outcomes[0], cell[0], rule.outcomes[1], cell[1]
            ));
        }
        writer.write_record(&record)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// One generated path as a JSON array of `{direction_id, sign}`.
pub fn trace_json(path: &ProcessPath) -> String {
    serde_json::to_string(path.visits()).expect("paths always serialize") + "\n"
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PppFile {
    /// Grid spec, as for `--grid`.
    pub grid: String,
    pub preparations: Vec<PppPrepEntry>,
    #[serde(default)]
    pub response: ResponseSpec,
    /// Axis names. Defaults to every grid axis.
    #[serde(default)]
    pub measurements: Option<Vec<String>>,
    /// Q-equivalence tolerance. Defaults to `1/(2R)` for the run's `R`.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PppPrepEntry {
    /// Eigenstate name such as `z+`.
    pub state: String,
    pub paths: Vec<WeightedPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPath {
    /// Visits as eigenstate names.
    pub path: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseSpec {
    #[default]
    RelativeFrequency,
    Table(Vec<ResponseEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseEntry {
    pub path: Vec<String>,
    pub measurement: String,
    pub plus: f64,
    pub minus: f64,
}

/// A response loaded from a [`PppFile`].
#[derive(Debug, Clone)]
pub enum FileResponse {
    RelativeFrequency,
    Table(TabulatedResponse<OnticStateId>),
}

impl PathResponse<OnticStateId> for FileResponse {
    fn probability(&self, path: &ProcessPath, measurement: usize, outcome: Sign) -> Option<f64> {
        match self {
            FileResponse::RelativeFrequency => {
                RelativeFrequencyResponse.probability(path, measurement, outcome)
            }
            FileResponse::Table(t) => t.probability(path, measurement, outcome),
        }
    }
}

/// A [`PppFile`] resolved against its grid.
#[derive(Debug, Clone)]
pub struct PppInput {
    pub grid: DirectionGrid,
    pub preparations: Vec<PathPrep<OnticStateId>>,
    pub response: FileResponse,
    pub measurements: Vec<usize>,
    pub tolerance: Option<f64>,
}

fn parse_path(grid: &DirectionGrid, names: &[String]) -> Result<ProcessPath, HarnessError> {
    let visits = names
        .iter()
        .map(|n| {
            grid.parse_eigenstate(n)
                .map(|e| OnticStateId::new(e.direction, e.sign))
                .map_err(|e| HarnessError::Config(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Path::new(visits).map_err(|_| HarnessError::Config("paths must have at least one visit".into()))
}

impl PppFile {
    pub fn resolve(&self) -> Result<PppInput, HarnessError> {
        let grid = parse_grid(&self.grid)?;
        let preparations = self
            .preparations
            .iter()
            .map(|entry| {
                let state = grid
                    .parse_eigenstate(&entry.state)
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                let paths = entry
                    .paths
                    .iter()
                    .map(|w| Ok((parse_path(&grid, &w.path)?, w.probability)))
                    .collect::<Result<Vec<_>, HarnessError>>()?;
                Ok(PathPrep::new(state, paths)?)
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let response = match &self.response {
            ResponseSpec::RelativeFrequency => FileResponse::RelativeFrequency,
            ResponseSpec::Table(entries) => {
                let mut table = TabulatedResponse::new();
                for e in entries {
                    let m = axis(&grid, &e.measurement)?;
                    table.insert(parse_path(&grid, &e.path)?, m.id(), e.plus, e.minus)?;
                }
                FileResponse::Table(table)
            }
        };
        let measurements = match &self.measurements {
            Some(names) => names
                .iter()
                .map(|n| axis(&grid, n).map(|d| d.id()))
                .collect::<Result<_, _>>()?,
            None => grid.directions().iter().map(|d| d.id()).collect(),
        };
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(HarnessError::Config(format!(
                    "tolerance must be non-negative, got {t}"
                )));
            }
        }
        Ok(PppInput {
            grid,
            preparations,
            response,
            measurements,
            tolerance: self.tolerance,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PppClassification {
    pub grid: Vec<GridAxis>,
    pub measurements: Vec<String>,
    pub tolerance: f64,
    pub classes: Vec<ClassOut>,
    pub paths: Vec<PathOut>,
    /// True when every supported path belongs to one preparation only.
    pub process_level_ontic: bool,
    pub elements: Vec<ElementOut>,
    pub overlaps: Vec<OverlapOut>,
    pub indistinguishability: Vec<PairOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassOut {
    pub members: Vec<Vec<String>>,
    pub profile: Vec<ProfileOut>,
    pub quantum_state: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileOut {
    pub measurement: String,
    pub plus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathOut {
    pub path: Vec<String>,
    pub verdict: PathVerdict,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementOut {
    pub ontic: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapOut {
    pub states: [String; 2],
    pub witness: Option<WitnessOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessOut {
    pub path: Vec<String>,
    pub weights: [f64; 2],
    pub measurement: String,
    pub response: [Option<f64>; 2],
    /// States whose certain outcome the shared path breaks.
    pub contaminated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOut {
    pub states: [String; 2],
    pub holds: bool,
    pub shared_outcomes: Vec<SharedOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharedOut {
    pub measurement: String,
    pub outcome: Option<Sign>,
}

/// Equivalence classes over the union of supports, path- and state-level
/// onticity, overlap checks for every orthogonal pair and the
/// indistinguishability condition for every other pair.
pub fn classify_ppp(
    input: &PppInput,
    default_tolerance: f64,
) -> Result<PppClassification, HarnessError> {
    let grid = &input.grid;
    let axis_name = |id: usize| grid.name(id).unwrap_or("?").to_string();
    let visit_name =
        |v: &OnticStateId| grid.eigenstate_name(Eigenstate::new(v.direction_id, v.sign));
    let path_names = |p: &ProcessPath| p.iter().map(visit_name).collect::<Vec<_>>();
    let state_name = |s: Eigenstate| grid.eigenstate_name(s);
    let tolerance = input.tolerance.unwrap_or(default_tolerance);

    let support: BTreeSet<ProcessPath> = input
        .preparations
        .iter()
        .flat_map(|p| p.support().cloned())
        .collect();
    let classes = match PathSpace::new(support) {
        Ok(space) => q_equivalence_classes(
            &space,
            &input.response,
            &input.measurements,
            grid,
            tolerance,
        ),
        Err(_) => Vec::new(),
    };
    let classes = classes
        .into_iter()
        .map(|c| ClassOut {
            members: c.members.iter().map(path_names).collect(),
            profile: c
                .profile
                .iter()
                .map(|(m, p)| ProfileOut {
                    measurement: axis_name(*m),
                    plus: *p,
                })
                .collect(),
            quantum_state: c.quantum_state.map(state_name),
        })
        .collect();

    let classification = classify_state(&input.preparations);
    let process_level_ontic = classification.all_paths_determine_state();
    let paths = classification
        .paths
        .iter()
        .map(|p| PathOut {
            path: path_names(&p.path),
            verdict: p.verdict,
            states: p.states.iter().map(|s| state_name(*s)).collect(),
        })
        .collect();
    let elements = classification
        .elements
        .iter()
        .map(|(v, states)| ElementOut {
            ontic: visit_name(v),
            states: states.iter().map(|s| state_name(*s)).collect(),
        })
        .collect();

    let taggings = Taggings::axes(&input.measurements);
    let mut overlaps = Vec::new();
    let mut indistinguishability = Vec::new();
    for (i, p1) in input.preparations.iter().enumerate() {
        for p2 in &input.preparations[i + 1..] {
            let states = [state_name(p1.state()), state_name(p2.state())];
            if p1.state().is_orthogonal_to(&p2.state()) {
                let witness = overlap_contradiction(p1, p2, &input.response, &input.measurements)?
                    .map(|w| WitnessOut {
                        path: path_names(&w.path),
                        weights: w.weights,
                        measurement: axis_name(w.measurement),
                        response: w.response,
                        contaminated: w.contaminated.iter().map(|(s, _)| state_name(*s)).collect(),
                    });
                overlaps.push(OverlapOut { states, witness });
            } else {
                let report = indistinguishability_condition(p1, p2, &taggings);
                indistinguishability.push(PairOut {
                    states,
                    holds: report.holds,
                    shared_outcomes: report
                        .shared_outcomes
                        .iter()
                        .map(|(m, k)| SharedOut {
                            measurement: axis_name(*m),
                            outcome: *k,
                        })
                        .collect(),
                });
            }
        }
    }

    Ok(PppClassification {
        grid: grid_axes(grid),
        measurements: input.measurements.iter().map(|m| axis_name(*m)).collect(),
        tolerance,
        classes,
        paths,
        process_level_ontic,
        elements,
        overlaps,
        indistinguishability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const OVERLAP: &str = r#"{
        "grid": "z,x",
        "preparations": [
            {"state": "z+", "paths": [{"path": ["z+", "x+"], "probability": 0.5}, {"path": ["z+", "x-"], "probability": 0.5}]},
            {"state": "z-", "paths": [{"path": ["z-", "x+"], "probability": 0.5}, {"path": ["z+", "x-"], "probability": 0.5}]}
        ]
    }"#;

    #[test]
    fn overlapping_file_yields_a_witness() {
        let file: PppFile = serde_json::from_str(OVERLAP).unwrap();
        let input = file.resolve().unwrap();
        let out = classify_ppp(&input, 0.005).unwrap();
        assert_eq!(out.overlaps.len(), 1);
        let witness = out.overlaps[0].witness.as_ref().unwrap();
        assert_eq!(witness.path, ["z+", "x-"]);
        assert_eq!(witness.measurement, "z");
        assert_eq!(witness.contaminated, ["z-"]);
        assert!(!out.process_level_ontic);
    }

    #[test]
    fn tabulated_responses_load() {
        let text = r#"{
            "grid": "z",
            "preparations": [{"state": "z+", "paths": [{"path": ["z+"], "probability": 1.0}]}],
            "response": {"table": [{"path": ["z+"], "measurement": "z", "plus": 1.0, "minus": 0.0}]}
        }"#;
        let input = serde_json::from_str::<PppFile>(text)
            .unwrap()
            .resolve()
            .unwrap();
        let out = classify_ppp(&input, 0.0).unwrap();
        assert_eq!(out.classes.len(), 1);
        assert_eq!(out.classes[0].quantum_state.as_deref(), Some("z+"));
        assert!(out.process_level_ontic);
    }

    #[test]
    fn bad_files_are_config_errors() {
        let unknown = OVERLAP.replace("\"x-\"", "\"w-\"");
        let file: PppFile = serde_json::from_str(&unknown).unwrap();
        assert!(matches!(file.resolve(), Err(HarnessError::Config(_))));
        let unnormalised = OVERLAP.replace("0.5}]}", "0.4}]}");
        let file: PppFile = serde_json::from_str(&unnormalised).unwrap();
        assert!(matches!(file.resolve(), Err(HarnessError::Ppp(_))));
    }

    #[test]
    fn dp_table_cells() {
        let csv = dp_table_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("prep,i,ii,iii"));
        assert_eq!(
            lines.next(),
            Some("z+,m1:1 m2:0,n1:1/2 n2:1/2,k1:1/2 k2:1/2")
        );
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn trace_is_an_array_of_visits() {
        let path = Path::new(vec![
            OnticStateId::new(0, Sign::Plus),
            OnticStateId::new(2, Sign::Minus),
        ])
        .unwrap();
        assert_eq!(
            trace_json(&path),
            "[{\"direction_id\":0,\"sign\":1},{\"direction_id\":2,\"sign\":-1}]\n"
        );
    }
}
