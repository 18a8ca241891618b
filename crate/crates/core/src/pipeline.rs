//! End-to-end pipeline: field → graph → merge tree → profile → artifacts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::field::parse_field;
use crate::graph::{
    connected_components, default_k, exact_knn, nn_descent, symmetrize_mutual, KnnLists, DEFAULT_EXACT_THRESHOLD,
};
use crate::merge_tree::{branch_decomposition, compute_merge_tree, simplify, BranchDecomposition, TreeDump};
use crate::render::to_svg;
use crate::{
    Error, Execution, FieldFormat, KnnMethod, LandscapeProfile, MergeTree, NeighborhoodGraph, NnDescentParams,
    RenderStyle, ScalarField,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Exact up to `exact_threshold` points, NN-Descent above.
    #[default]
    Auto,
    Exact,
    NnDescent,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            other => other.parse::<KnnMethod>().map(|m| match m {
                KnnMethod::Exact => MethodChoice::Exact,
                KnnMethod::NnDescent => MethodChoice::NnDescent,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    /// Taken from the input extension when absent.
    pub format: Option<FieldFormat>,
    /// Defaults to `4 n`.
    pub k: Option<usize>,
    pub method: MethodChoice,
    pub exact_threshold: usize,
    pub nn_descent: NnDescentParams,
    /// Absolute simplification threshold. `0` or absent leaves the tree as is.
    pub epsilon: Option<f64>,
    /// Threshold as a fraction of the value range.
    pub relative_epsilon: Option<f64>,
    pub svg: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub tree: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub seed: u64,
    pub execution: Execution,
    pub style: RenderStyle,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            format: None,
            k: None,
            method: MethodChoice::Auto,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            nn_descent: NnDescentParams::default(),
            epsilon: None,
            relative_epsilon: None,
            svg: None,
            json: None,
            tree: None,
            graph: None,
            seed: 0,
            execution: Execution::default(),
            style: RenderStyle::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json_file(path: &Path) -> crate::Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    /// Absolute threshold for a field with the given value range.
    pub fn effective_epsilon(&self, value_range: (f64, f64)) -> crate::Result<f64> {
        match (self.epsilon, self.relative_epsilon) {
            (Some(_), Some(_)) => Err(Error::param("set either epsilon or relative_epsilon, not both")),
            (Some(e), None) if e >= 0.0 => Ok(e),
            (None, Some(f)) if f >= 0.0 => Ok(f * (value_range.1 - value_range.0)),
            (None, None) => Ok(0.0),
            _ => Err(Error::param("simplification threshold must be non-negative")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Parse,
    Graph,
    Tree,
    Simplify,
    Profile,
    Render,
    Write,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Parse => "parse",
            Stage::Graph => "graph",
            Stage::Tree => "tree",
            Stage::Simplify => "simplify",
            Stage::Profile => "profile",
            Stage::Render => "render",
            Stage::Write => "write",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A module error tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub type PipelineResult<T> = std::result::Result<T, PipelineError>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> PipelineResult<T>;
}

impl<T> StageExt<T> for crate::Result<T> {
    fn stage(self, stage: Stage) -> PipelineResult<T> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(rename = "N")]
    pub points: usize,
    pub n: usize,
    pub k: usize,
    pub method: KnnMethod,
    pub converged: bool,
    pub edges: usize,
    pub components: usize,
    pub minima: usize,
    pub saddles: usize,
    pub max_persistence: Option<f64>,
    pub epsilon: f64,
    pub basins: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(flatten)]
    pub summary: Summary,
    pub artifacts: Artifacts,
}

/// Every intermediate product of one run, before anything is written.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub knn: KnnLists,
    pub graph: NeighborhoodGraph,
    pub tree: MergeTree,
    pub decomposition: BranchDecomposition,
    pub profile: LandscapeProfile,
    pub svg: String,
    pub summary: Summary,
}

/// Chooses k and the search method and builds the mutual kNN graph.
pub fn build_graph(field: &ScalarField, config: &PipelineConfig) -> crate::Result<(KnnLists, NeighborhoodGraph)> {
    let k = config.k.unwrap_or_else(|| default_k(field.dims()));
    let method = match config.method {
        MethodChoice::Exact => KnnMethod::Exact,
        MethodChoice::NnDescent => KnnMethod::NnDescent,
        MethodChoice::Auto if field.len() > config.exact_threshold => KnnMethod::NnDescent,
        MethodChoice::Auto => KnnMethod::Exact,
    };
    let knn = match method {
        KnnMethod::Exact => exact_knn(field, k, config.execution)?,
        KnnMethod::NnDescent => {
            let params = NnDescentParams { seed: config.seed, ..config.nn_descent.clone() };
            nn_descent(field, k, &params, config.execution)?
        }
    };
    let graph = symmetrize_mutual(&knn);
    Ok((knn, graph))
}

/// Runs every stage on an in-memory field.
pub fn run_on_field(field: &ScalarField, config: &PipelineConfig) -> PipelineResult<PipelineOutput> {
    config.style.validate().stage(Stage::Config)?;
    let range = field.value_range().unwrap_or((0.0, 0.0));
    let epsilon = config.effective_epsilon(range).stage(Stage::Config)?;

    let (knn, graph) = build_graph(field, config).stage(Stage::Graph)?;
    let components = connected_components(&graph).count;
    info!("graph: {} edges, {components} components", graph.edges.len());

    let mut tree = compute_merge_tree(field, &graph).stage(Stage::Tree)?;
    let mut decomposition = branch_decomposition(&tree);
    if epsilon > 0.0 {
        tree = simplify(&tree, &decomposition, epsilon).stage(Stage::Simplify)?;
        decomposition = branch_decomposition(&tree);
    }
    let profile = LandscapeProfile::from_tree(&tree, &decomposition, field).stage(Stage::Profile)?;
    let svg = to_svg(&profile, &config.style).stage(Stage::Render)?;

    let summary = Summary {
        points: field.len(),
        n: field.dims(),
        k: knn.k,
        method: knn.method,
        converged: knn.converged,
        edges: graph.edges.len(),
        components: tree.component_count(),
        minima: tree.minima().count(),
        saddles: tree.saddles().count(),
        max_persistence: decomposition.max_persistence(),
        epsilon,
        basins: profile.basins.len(),
    };
    Ok(PipelineOutput { knn, graph, tree, decomposition, profile, svg, summary })
}

/// Reads the configured input, runs every stage and writes the requested artifacts.
pub fn run_pipeline(config: &PipelineConfig) -> PipelineResult<Report> {
    let input = config
        .input
        .as_deref()
        .ok_or_else(|| Error::param("no input field given"))
        .stage(Stage::Config)?;
    let format = config.format.unwrap_or_else(|| FieldFormat::from_path(input));
    let field = parse_field(input, format).stage(Stage::Parse)?;
    let out = run_on_field(&field, config)?;
    let artifacts = write_artifacts(&out, config).stage(Stage::Write)?;
    Ok(Report { summary: out.summary, artifacts })
}

fn write_artifacts(out: &PipelineOutput, config: &PipelineConfig) -> crate::Result<Artifacts> {
    let write = |path: &Path, text: &str| fs::write(path, text).map_err(|e| Error::io(path, e));
    if let Some(p) = &config.svg {
        write(p, &out.svg)?;
    }
    if let Some(p) = &config.json {
        write(p, &out.profile.to_json()?)?;
    }
    if let Some(p) = &config.tree {
        write(p, &serde_json::to_string_pretty(&TreeDump::new(&out.tree, &out.decomposition))?)?;
    }
    if let Some(p) = &config.graph {
        write(p, &out.graph.to_edge_list())?;
    }
    Ok(Artifacts {
        svg: config.svg.clone(),
        json: config.json.clone(),
        tree: config.tree.clone(),
        graph: config.graph.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{synth_wells, write_field};
    use crate::Well;

    fn two_wells() -> ScalarField {
        let wells = vec![
            Well { center: vec![5.0, 5.0], depth: 1.0, width: 2.0 },
            Well { center: vec![15.0, 15.0], depth: 0.8, width: 2.0 },
        ];
        synth_wells(2, 21, &wells, 0.0).unwrap()
    }

    #[test]
    fn two_wells_give_two_minima_one_saddle() {
        let out = run_on_field(&two_wells(), &PipelineConfig::default()).unwrap();
        assert_eq!(out.summary.components, 1);
        assert_eq!(out.summary.k, 8);
        assert_eq!(out.summary.method, KnnMethod::Exact);
        let simplified = PipelineConfig { relative_epsilon: Some(0.01), ..Default::default() };
        let out = run_on_field(&two_wells(), &simplified).unwrap();
        assert_eq!((out.summary.minima, out.summary.saddles), (2, 1));
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "alpha_1,loss\n0.0,abc\n").unwrap();
        let config = PipelineConfig { input: Some(path), ..Default::default() };
        let err = run_pipeline(&config).unwrap_err();
        assert_eq!(err.stage, Stage::Parse);
        assert!(err.to_string().starts_with("parse: "));
    }

    #[test]
    fn writes_requested_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("f.tlpf");
        write_field(&two_wells(), &input, FieldFormat::Binary).unwrap();
        let config = PipelineConfig {
            input: Some(input),
            svg: Some(dir.path().join("p.svg")),
            json: Some(dir.path().join("p.json")),
            tree: Some(dir.path().join("t.json")),
            graph: Some(dir.path().join("g.txt")),
            ..Default::default()
        };
        let report = run_pipeline(&config).unwrap();
        for p in [&config.svg, &config.json, &config.tree, &config.graph] {
            assert!(p.as_ref().unwrap().exists());
        }
        let json = fs::read_to_string(config.json.unwrap()).unwrap();
        assert_eq!(LandscapeProfile::from_json(&json).unwrap().basins.len(), report.summary.basins);
    }

    #[test]
    fn conflicting_thresholds_rejected() {
        let config = PipelineConfig { epsilon: Some(0.1), relative_epsilon: Some(0.1), ..Default::default() };
        let err = run_on_field(&two_wells(), &config).unwrap_err();
        assert_eq!(err.stage, Stage::Config);
    }

    #[test]
    fn config_json_round_trip() {
        let config = PipelineConfig { k: Some(6), method: MethodChoice::NnDescent, ..Default::default() };
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&text).unwrap(), config);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"kk": 3}"#).is_err());
    }
}
