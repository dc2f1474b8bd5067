//! Command-line front end. `run` parses arguments, executes one subcommand
//! and returns the process exit code; errors are reported on stderr as a
//! single JSON object.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hydap_core::density::{detect_troughs_with, optics, OpticsParams, ReachabilityProfile};
use hydap_core::dissimilarity::pairwise_matrix;
use hydap_core::pipeline::{identify_structure, select_variables, CautionAction, Diagnostics, StructureReport};
use hydap_core::simgen::SimSetting;
use hydap_core::{dataset, Measure, MixedDataset};
use serde::Serialize;

use crate::bench::{fit, run_benchmark, Algorithm, BenchPlan, FitDetail};
use crate::config::Config;
use crate::formats::{
    create, write_assignments, write_bcss_screen, write_consensus, write_hdm1, write_json, write_matrix_csv,
    write_reachability,
};
use crate::plot::{line_svg, reachability_svg};
use crate::schema::load_schema;
use crate::sim::write_replicates;
use crate::table::load_csv;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "hydap", version, about = "Two-step clustering of mixed continuous and categorical data")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (all cores when omitted). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML configuration file; see --print-config for every key.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a dataset with HyDaP or one of the comparators.
    Cluster(ClusterArgs),
    /// Write replicates of a simulation setting.
    Simulate(SimulateArgs),
    /// Replicated comparison of methods on the simulation settings.
    Benchmark(BenchmarkArgs),
    /// OPTICS reachability profile and trough count of the continuous block.
    Optics(OpticsArgs),
    /// Pairwise dissimilarity matrix.
    Dissim(DissimArgs),
    /// Step 1 only: data structure and variable selection.
    Structure(StructureArgs),
}

#[derive(Debug, Args)]
pub struct Input {
    /// Data file (CSV with a header row).
    #[arg(long)]
    pub input: PathBuf,
    /// Schema file (TOML) listing the variables in column order.
    #[arg(long)]
    pub schema: PathBuf,
}

/// Command-line overrides of the configuration file.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long)]
    pub min_pts: Option<usize>,
    #[arg(long)]
    pub xi: Option<f64>,
    /// Largest K tried by consensus K-means.
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Subsampling runs per K in consensus K-means.
    #[arg(long)]
    pub h_iters: Option<usize>,
    #[arg(long)]
    pub weight_threshold: Option<f64>,
    #[arg(long)]
    pub cramers_v_cutoff: Option<f64>,
    /// Comma-separated L1 bounds for sparse K-means.
    #[arg(long, value_delimiter = ',')]
    pub sparsity_grid: Option<Vec<f64>>,
    /// K-prototypes categorical weight.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum)]
    pub caution_action: Option<CautionArg>,
    /// Skip the bootstrap BCSS screen.
    #[arg(long)]
    pub no_bcss_screen: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CautionArg {
    Warn,
    Homogeneous,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_enum, default_value = "hydap")]
    pub algorithm: Algorithm,
    /// Cluster count for the comparators (the mixture model picks one by
    /// BIC when omitted).
    #[arg(long)]
    pub k: Option<usize>,
    /// Restrict the analysis to these variables (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub keep: Option<Vec<String>>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_setting)]
    pub setting: SimSetting,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Correlate the continuous variables within clusters.
    #[arg(long)]
    pub correlated: bool,
    #[arg(long, default_value_t = hydap_core::simgen::DEFAULT_RHO)]
    pub rho: f64,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Comma-separated settings (all five by default).
    #[arg(long, value_delimiter = ',', value_parser = parse_setting)]
    pub settings: Option<Vec<SimSetting>>,
    /// Comma-separated methods (all five by default).
    #[arg(long, value_delimiter = ',', value_enum)]
    pub methods: Option<Vec<Algorithm>>,
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    #[arg(long)]
    pub correlated: bool,
    #[arg(long, default_value_t = hydap_core::simgen::DEFAULT_RHO)]
    pub rho: f64,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct OpticsArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub min_pts: Option<usize>,
    /// Neighborhood radius (unbounded by default).
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MatrixFormat {
    Csv,
    Hdm1,
}

#[derive(Debug, Args)]
pub struct DissimArgs {
    #[command(flatten)]
    pub input: Input,
    /// gower, hydap, famd, famd_factor, euclidean or manhattan.
    #[arg(long, default_value = "hydap", value_parser = parse_measure)]
    pub measure: Measure,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: MatrixFormat,
}

#[derive(Debug, Args)]
pub struct StructureArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub overrides: Overrides,
}

fn parse_setting(s: &str) -> std::result::Result<SimSetting, String> {
    SimSetting::parse(s).ok_or_else(|| format!("unknown setting `{s}` (sim1a, sim1b, sim2a, sim2b, sim3)"))
}

fn parse_measure(s: &str) -> std::result::Result<Measure, String> {
    Measure::parse(s).ok_or_else(|| format!("unknown measure `{s}`"))
}

impl Overrides {
    fn apply(&self, cfg: &mut Config) {
        let p = &mut cfg.pipeline;
        if self.min_pts.is_some() {
            p.min_pts = self.min_pts;
        }
        if let Some(xi) = self.xi {
            p.troughs.xi = xi;
        }
        if let Some(k) = self.k_max {
            p.consensus.k_max = k;
        }
        if let Some(h) = self.h_iters {
            p.consensus.h_iters = h;
        }
        if let Some(w) = self.weight_threshold {
            p.weight_threshold = w;
        }
        if let Some(v) = self.cramers_v_cutoff {
            p.cramers_v_cutoff = v;
        }
        if let Some(g) = &self.sparsity_grid {
            p.sparsity_grid = Some(g.clone());
        }
        if let Some(a) = self.caution_action {
            p.caution_action = match a {
                CautionArg::Warn => CautionAction::Warn,
                CautionArg::Homogeneous => CautionAction::Homogeneous,
            };
        }
        if self.no_bcss_screen {
            p.bcss_screen = false;
        }
        if self.gamma.is_some() {
            cfg.kprototypes.gamma = self.gamma;
        }
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

fn report_error(kind: &str, message: String, exit_code: i32) -> i32 {
    let e = ErrorReport {
        error: kind,
        message,
        exit_code,
    };
    eprintln!("{}", serde_json::to_string(&e).expect("plain struct"));
    exit_code
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            return report_error("UsageError", e.kind().to_string() + ": " + &strip(&e.to_string()), 2);
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => report_error(e.kind(), e.to_string(), e.exit_code()),
    }
}

/// First line of a clap message, without the "error: " prefix.
fn strip(msg: &str) -> String {
    msg.lines()
        .next()
        .unwrap_or_default()
        .trim_start_matches("error: ")
        .to_string()
}

fn execute(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) if !path.exists() => {
            return Err(Error::Usage(format!("config file {} does not exist", path.display())))
        }
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(o) = cli.command.as_ref().and_then(Command::overrides) {
        o.apply(&mut cfg);
    }
    if cli.print_config {
        // TOML has no null: optional keys left unset do not appear
        println!("# optional, unset unless given: pipeline.min_pts, pipeline.sparsity_grid,");
        println!("# pipeline.consensus.inner_seed, kprototypes.gamma");
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    let Some(command) = &cli.command else {
        return Err(Error::Usage("no subcommand given (try --help)".into()));
    };
    if let Some(input) = command.input() {
        for (what, p) in [("input", &input.input), ("schema", &input.schema)] {
            if !p.is_file() {
                return Err(Error::Usage(format!("{what} file {} does not exist", p.display())));
            }
        }
    }
    fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    let ctx = Ctx {
        seed: cli.seed,
        out: &cli.out,
        cfg: &cfg,
    };
    let go = || match command {
        Command::Cluster(a) => cmd_cluster(&ctx, a),
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Benchmark(a) => cmd_benchmark(&ctx, a),
        Command::Optics(a) => cmd_optics(&ctx, a),
        Command::Dissim(a) => cmd_dissim(&ctx, a),
        Command::Structure(a) => cmd_structure(&ctx, a),
    };
    match cli.threads {
        Some(0) => Err(Error::Usage("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Usage(e.to_string()))?
            .install(go),
        None => go(),
    }
}

impl Command {
    fn overrides(&self) -> Option<&Overrides> {
        match self {
            Command::Cluster(a) => Some(&a.overrides),
            Command::Benchmark(a) => Some(&a.overrides),
            Command::Structure(a) => Some(&a.overrides),
            _ => None,
        }
    }

    fn input(&self) -> Option<&Input> {
        match self {
            Command::Cluster(a) => Some(&a.input),
            Command::Optics(a) => Some(&a.input),
            Command::Dissim(a) => Some(&a.input),
            Command::Structure(a) => Some(&a.input),
            _ => None,
        }
    }
}

struct Ctx<'a> {
    seed: u64,
    out: &'a Path,
    cfg: &'a Config,
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    }
}

fn load(input: &Input) -> Result<MixedDataset> {
    let schema = load_schema(&input.schema)?;
    load_csv(&input.input, &schema.variables)
}

/// Files shared by `cluster` and `structure`.
fn write_step1_files(ctx: &Ctx<'_>, diag: &Diagnostics) -> Result<()> {
    if let Some(p) = &diag.profile {
        write_profile(ctx, p)?;
    }
    if let Some(c) = &diag.consensus {
        write_consensus(create(&ctx.path("consensus.csv"))?, c)?;
    }
    if let Some(s) = &diag.bcss_screen {
        write_bcss_screen(create(&ctx.path("bcss_screen.csv"))?, s)?;
    }
    Ok(())
}

fn write_profile(ctx: &Ctx<'_>, p: &ReachabilityProfile) -> Result<()> {
    write_reachability(create(&ctx.path("reachability.csv"))?, p)?;
    ctx.write_text("reachability.svg", &reachability_svg(&p.reach, "Reachability plot"))
}

#[derive(Serialize)]
struct ClusterOutput<'a> {
    algorithm: &'a str,
    seed: u64,
    n: usize,
    variables: Vec<String>,
    k: usize,
    cluster_sizes: Vec<usize>,
    #[serde(flatten)]
    detail: serde_json::Value,
}

fn cmd_cluster(ctx: &Ctx<'_>, a: &ClusterArgs) -> Result<()> {
    let mut ds = load(&a.input)?;
    if let Some(keep) = &a.keep {
        ds = ds.select(keep)?;
    }
    let f = fit(&ds, a.algorithm, a.k, ctx.cfg, ctx.seed)?;
    let mut detail = serde_json::to_value(&f.detail)?;
    if let Some(obj) = detail.as_object_mut() {
        obj.remove("assign");
    }
    let mut sizes = vec![0; f.k];
    for &c in &f.assign {
        sizes[c] += 1;
    }
    if let FitDetail::Hydap(h) = &f.detail {
        write_step1_files(ctx, &h.diagnostics)?;
        if !h.diagnostics.elbow.is_empty() {
            let pts: Vec<(f64, f64)> = h.diagnostics.elbow.iter().map(|&(k, c)| (k as f64, c)).collect();
            let mark = h.diagnostics.elbow.iter().position(|&(k, _)| k == h.k);
            ctx.write_text("elbow.svg", &line_svg(&pts, mark, "Elbow", "K", "within-cluster dissimilarity"))?;
        }
    }
    write_json(
        &ctx.path("report.json"),
        &ClusterOutput {
            algorithm: a.algorithm.name(),
            seed: ctx.seed,
            n: ds.n(),
            variables: ds.meta().iter().map(|m| m.name.clone()).collect(),
            k: f.k,
            cluster_sizes: sizes.clone(),
            detail,
        },
    )?;
    write_assignments(create(&ctx.path("assignments.csv"))?, &f.assign)?;
    println!("{}: k = {}, cluster sizes {:?}", a.algorithm.name(), f.k, sizes);
    Ok(())
}

fn cmd_simulate(ctx: &Ctx<'_>, a: &SimulateArgs) -> Result<()> {
    if a.replicates == 0 {
        return Err(Error::Usage("--replicates must be at least 1".into()));
    }
    let rho = a.correlated.then_some(a.rho);
    let m = write_replicates(ctx.out, a.setting, a.replicates, ctx.seed, rho)?;
    println!(
        "{}: wrote {} replicate(s) to {}",
        a.setting.name(),
        m.replicates,
        ctx.out.display()
    );
    Ok(())
}

fn cmd_benchmark(ctx: &Ctx<'_>, a: &BenchmarkArgs) -> Result<()> {
    let plan = BenchPlan {
        settings: a.settings.clone().unwrap_or_else(|| SimSetting::ALL.to_vec()),
        methods: a.methods.clone().unwrap_or_else(|| Algorithm::ALL.to_vec()),
        replicates: a.replicates,
        seed: ctx.seed,
        rho: a.correlated.then_some(a.rho),
    };
    let table = run_benchmark(&plan, ctx.cfg)?;
    let md = table.to_markdown();
    table.write_cells_csv(create(&ctx.path("benchmark.csv"))?)?;
    table.write_runs_csv(create(&ctx.path("benchmark_runs.csv"))?)?;
    ctx.write_text("benchmark.md", &md)?;
    write_json(&ctx.path("benchmark.json"), &table)?;
    print!("{md}");
    Ok(())
}

#[derive(Serialize)]
struct OpticsOutput<'a> {
    min_pts: usize,
    eps: Option<f64>,
    troughs: &'a hydap_core::density::TroughReport,
}

fn cmd_optics(ctx: &Ctx<'_>, a: &OpticsArgs) -> Result<()> {
    let ds = load(&a.input)?;
    let view = dataset::standardize(&ds)?;
    let mut params = OpticsParams::default_for(ds.n());
    if let Some(m) = a.min_pts.or(ctx.cfg.pipeline.min_pts) {
        params.min_pts = m;
    }
    if let Some(e) = a.eps {
        params.eps = e;
    }
    let mut tp = ctx.cfg.pipeline.troughs;
    if let Some(xi) = a.xi {
        tp.xi = xi;
    }
    let profile = optics(&view.matrix, params)?;
    let troughs = detect_troughs_with(&profile, &tp)?;
    write_profile(ctx, &profile)?;
    write_json(
        &ctx.path("troughs.json"),
        &OpticsOutput {
            min_pts: params.min_pts,
            eps: a.eps,
            troughs: &troughs,
        },
    )?;
    println!("troughs: {}", troughs.trough_count);
    Ok(())
}

fn cmd_dissim(ctx: &Ctx<'_>, a: &DissimArgs) -> Result<()> {
    let ds = load(&a.input)?;
    let dm = pairwise_matrix(&ds, a.measure)?;
    let name = match a.format {
        MatrixFormat::Csv => {
            write_matrix_csv(create(&ctx.path("dissim.csv"))?, &dm)?;
            "dissim.csv"
        }
        MatrixFormat::Hdm1 => {
            write_hdm1(&ctx.path("dissim.hdm1"), &dm)?;
            "dissim.hdm1"
        }
    };
    println!("{}: {} x {} matrix in {}", a.measure.name(), dm.n(), dm.n(), name);
    Ok(())
}

#[derive(Serialize)]
struct StructureOutput<'a> {
    seed: u64,
    n: usize,
    report: &'a StructureReport,
    selected: Vec<String>,
    diagnostics: &'a Diagnostics,
}

fn cmd_structure(ctx: &Ctx<'_>, a: &StructureArgs) -> Result<()> {
    let ds = load(&a.input)?;
    let cfg = &ctx.cfg.pipeline;
    let (mut report, mut diag) = identify_structure(&ds, cfg, ctx.seed)?;
    select_variables(&ds, &mut report, &mut diag, cfg, ctx.seed)?;
    write_step1_files(ctx, &diag)?;
    write_json(
        &ctx.path("structure.json"),
        &StructureOutput {
            seed: ctx.seed,
            n: ds.n(),
            report: &report,
            selected: report.selected(),
            diagnostics: &diag,
        },
    )?;
    println!(
        "structure {}: k = {}, selected {}",
        report.structure as u8,
        report.k,
        report.selected().join(", ")
    );
    Ok(())
}
