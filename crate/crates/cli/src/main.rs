use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use serde_json::json;

use losstopo::exec::configure_threads;
use losstopo::field::{parse_field, scatter_wells, synth_wells, write_field};
use losstopo::graph::connected_components;
use losstopo::pipeline::{build_graph, run_pipeline, MethodChoice, PipelineConfig, PipelineError, Stage};
use losstopo::render::{to_svg, WidthScale};
use losstopo::{Error, Execution, FieldFormat, LandscapeProfile, Well};

#[derive(Parser)]
#[command(name = "losstopo", version, about = "Topological landscape profiles of sampled loss fields")]
struct Cli {
    /// JSON pipeline config; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for the parallel stages.
    #[arg(long, global = true, env = "LOSSTOPO_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic field with Gaussian wells on a lattice.
    Synth(SynthArgs),
    /// Build the mutual kNN graph and write it as an edge list.
    Graph {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compute the merge tree and write it as JSON.
    Tree {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        simplify: SimplifyArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compute the landscape profile and write it as JSON.
    Profile {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        simplify: SimplifyArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Render a profile JSON file to SVG.
    Render {
        /// Profile JSON written by `profile` or `pipeline --json`.
        profile: PathBuf,
        #[command(flatten)]
        style: StyleArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run every stage and write the requested artifacts.
    Pipeline {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        simplify: SimplifyArgs,
        #[command(flatten)]
        style: StyleArgs,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        graph_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 21)]
    r: usize,
    /// Number of randomly placed wells.
    #[arg(long, default_value_t = 2)]
    wells: usize,
    /// JSON array of wells (`center`, `depth`, `width`), instead of random ones.
    #[arg(long, conflicts_with = "wells")]
    wells_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    baseline: f64,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct GraphArgs {
    /// Input field (TLPF binary, or CSV when the extension is .csv).
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Neighbors per point (default 4n).
    #[arg(short, long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Largest field searched exactly under `--method auto`.
    #[arg(long)]
    exact_threshold: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    sample_rate: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SimplifyArgs {
    /// Absolute persistence threshold.
    #[arg(long, conflicts_with = "relative_epsilon")]
    epsilon: Option<f64>,
    /// Persistence threshold as a fraction of the value range.
    #[arg(long)]
    relative_epsilon: Option<f64>,
}

#[derive(Args)]
struct StyleArgs {
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    #[arg(long, value_enum)]
    width_scale: Option<ScaleArg>,
    #[arg(long)]
    no_axis: bool,
    /// Basin color for the lowest average loss.
    #[arg(long)]
    dark: Option<String>,
    /// Basin color for the highest average loss.
    #[arg(long)]
    light: Option<String>,
    #[arg(long)]
    background: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Binary,
}

impl From<FormatArg> for FieldFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => FieldFormat::Csv,
            FormatArg::Binary => FieldFormat::Binary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Exact,
    NnDescent,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Linear,
    Sqrt,
}

impl GraphArgs {
    fn apply(self, c: &mut PipelineConfig) {
        c.input = self.input.or(c.input.take());
        c.format = self.format.map(Into::into).or(c.format);
        c.k = self.k.or(c.k);
        if let Some(m) = self.method {
            c.method = match m {
                MethodArg::Auto => MethodChoice::Auto,
                MethodArg::Exact => MethodChoice::Exact,
                MethodArg::NnDescent => MethodChoice::NnDescent,
            };
        }
        set(&mut c.exact_threshold, self.exact_threshold);
        set(&mut c.seed, self.seed);
        set(&mut c.nn_descent.max_iterations, self.max_iterations);
        set(&mut c.nn_descent.sample_rate, self.sample_rate);
        set(&mut c.nn_descent.delta, self.delta);
        if self.sequential {
            c.execution = Execution::Sequential;
        }
    }
}

impl SimplifyArgs {
    fn apply(self, c: &mut PipelineConfig) {
        if self.epsilon.is_some() || self.relative_epsilon.is_some() {
            c.epsilon = self.epsilon;
            c.relative_epsilon = self.relative_epsilon;
        }
    }
}

impl StyleArgs {
    fn apply(self, c: &mut PipelineConfig) {
        let s = &mut c.style;
        set(&mut s.width, self.width);
        set(&mut s.height, self.height);
        if let Some(w) = self.width_scale {
            s.width_scale = match w {
                ScaleArg::Linear => WidthScale::Linear,
                ScaleArg::Sqrt => WidthScale::Sqrt,
            };
        }
        if self.no_axis {
            s.axis = false;
        }
        set(&mut s.ramp.dark, self.dark);
        set(&mut s.ramp.light, self.light);
        set(&mut s.background, self.background);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn fail(stage: Stage) -> impl FnOnce(Error) -> PipelineError {
    move |source| PipelineError { stage, source }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), PipelineError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| fail(Stage::Write)(Error::Io { path: p.into(), source: e })),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<serde_json::Value, PipelineError> {
    if let Some(t) = cli.threads {
        if t == 0 || !configure_threads(t) {
            warn!("ignoring thread count {t}");
        }
    }
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::from_json_file(p).map_err(fail(Stage::Config))?,
        None => PipelineConfig::default(),
    };

    match cli.command {
        Command::Synth(a) => {
            let wells: Vec<Well> = match &a.wells_file {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| fail(Stage::Parse)(Error::Io { path: p.clone(), source: e }))?;
                    serde_json::from_str(&text).map_err(|e| fail(Stage::Parse)(e.into()))?
                }
                None => scatter_wells(a.n, a.r, a.wells, a.seed).map_err(fail(Stage::Config))?,
            };
            let field = synth_wells(a.n, a.r, &wells, a.baseline).map_err(fail(Stage::Config))?;
            let format = a.format.map_or_else(|| FieldFormat::from_path(&a.out), Into::into);
            write_field(&field, &a.out, format).map_err(fail(Stage::Write))?;
            Ok(json!({"N": field.len(), "n": field.dims(), "wells": wells.len(), "out": a.out}))
        }
        Command::Graph { graph, out } => {
            graph.apply(&mut config);
            let input = config.input.clone().ok_or_else(|| fail(Stage::Config)(no_input()))?;
            let format = config.format.unwrap_or_else(|| FieldFormat::from_path(&input));
            let field = parse_field(&input, format).map_err(fail(Stage::Parse))?;
            let (knn, g) = build_graph(&field, &config).map_err(fail(Stage::Graph))?;
            write_text(out.as_deref(), &g.to_edge_list())?;
            Ok(json!({
                "N": field.len(), "n": field.dims(), "k": knn.k, "method": knn.method,
                "converged": knn.converged, "edges": g.edges.len(),
                "components": connected_components(&g).count,
            }))
        }
        Command::Tree { graph, simplify, out } => {
            graph.apply(&mut config);
            simplify.apply(&mut config);
            config.tree = out;
            report(&config)
        }
        Command::Profile { graph, simplify, out } => {
            graph.apply(&mut config);
            simplify.apply(&mut config);
            config.json = out;
            report(&config)
        }
        Command::Render { profile, style, out } => {
            style.apply(&mut config);
            let text = fs::read_to_string(&profile).map_err(|e| fail(Stage::Parse)(Error::Io { path: profile.clone(), source: e }))?;
            let p = LandscapeProfile::from_json(&text).map_err(fail(Stage::Parse))?;
            let svg = to_svg(&p, &config.style).map_err(fail(Stage::Render))?;
            write_text(out.as_deref(), &svg)?;
            Ok(json!({"basins": p.basins.len(), "markers": p.markers.len(), "out": out}))
        }
        Command::Pipeline { graph, simplify, style, svg, json, tree, graph_out } => {
            graph.apply(&mut config);
            simplify.apply(&mut config);
            style.apply(&mut config);
            set(&mut config.svg, svg.map(Some));
            set(&mut config.json, json.map(Some));
            set(&mut config.tree, tree.map(Some));
            set(&mut config.graph, graph_out.map(Some));
            report(&config)
        }
    }
}

fn no_input() -> Error {
    Error::Parameter("no input field given".into())
}

fn report(config: &PipelineConfig) -> Result<serde_json::Value, PipelineError> {
    let r = run_pipeline(config)?;
    serde_json::to_value(r).map_err(|e| fail(Stage::Write)(e.into()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error [{}]: {}", e.stage, e.source);
            ExitCode::from(match e.stage {
                Stage::Config => 2,
                _ => 1,
            })
        }
    }
}
