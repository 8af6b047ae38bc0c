//! Argument definitions and subcommand dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use symvar::counter::{self, CapSpec};
use symvar::families::{self, Norm};
use symvar::presets::{lookup_preset, preset_kinds, preset_registry, Preset};
use symvar::quadrature::QuadOptions;
use symvar::rootlat::{self, RootSystemDesc, Weight};
use symvar::testfn::parse_test_function;
use symvar::volasym::ExpMapSpec;

use crate::error::{CliError, CliResult, EXIT_BUDGET, EXIT_OK};
use crate::manifest::{self, RunManifest, RunOptions};
use crate::output::{emit, parse_ladder, read_text, resolve_out, to_json};
use crate::tasks::{self, parse_weight};

#[derive(Debug, Parser)]
#[command(name = "symvar", version, about = "Asymptotic counting on symmetric varieties")]
pub struct Cli {
    /// Worker threads for enumeration and quadrature (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Integrand evaluation budget per quadrature.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub budget_evals: usize,

    /// Seed recorded with manifest runs; overrides the manifest value.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file, or a directory receiving the default file name.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Growth exponents (a, b, I) of a highest weight.
    Exponents(SystemArgs),
    /// Lambda-connected strata, global exponents and the closure poset.
    Strata(StrataArgs),
    /// Finite-T chamber integrals against the limiting constant.
    Volume(VolumeArgs),
    /// Integral-point counts over a ladder of norm bounds.
    Count(CountArgs),
    /// Angular distribution of quadric points against the predicted density.
    Compare(CompareArgs),
    /// Run a manifest and write its summary and report.
    Report(ReportArgs),
    /// List preset kinds and the built-in instances.
    Presets,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Preset name such as `detsurface:3` or `tworho:A,3,1`.
    #[arg(long, conflicts_with = "system")]
    pub preset: Option<String>,
    /// Root-system JSON file; requires --weight or --omega.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Highest weight in simple-root coordinates, e.g. `4/3,2/3`.
    #[arg(long, requires = "system", conflicts_with = "omega")]
    pub weight: Option<String>,
    /// Highest weight in fundamental-weight coordinates, e.g. `2,0`.
    #[arg(long, requires = "system")]
    pub omega: Option<String>,
}

#[derive(Debug, Args)]
pub struct StrataArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Print the closure poset as Graphviz DOT instead of JSON.
    #[arg(long)]
    pub dot: bool,
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    /// Expansion-map JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long = "T-ladder", default_value = "1e2,1e3,1e4,1e5,1e6")]
    pub t_ladder: String,
    /// Test function, e.g. `log_bump:0,0.5` or `tent:1`.
    #[arg(long = "test-function", default_value = "log_bump:0,0.5")]
    pub test_function: String,
    #[arg(long, default_value_t = 1e-7)]
    pub rel_tol: f64,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Family spec, e.g. `quadric:2,2,1`, `detsurface:2,1`, `symmat:2,1`.
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value = "euclidean")]
    pub norm: String,
    /// `50:800:x2`, `10:40:+10` or a comma list.
    #[arg(long)]
    pub ladder: String,
    /// Cap `c1,...,cd@radius`; repeatable.
    #[arg(long)]
    pub cap: Vec<String>,
    /// Work budget per enumeration, in inner-loop steps.
    #[arg(long, default_value_t = 1e11)]
    pub max_work: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value = "euclidean")]
    pub norm: String,
    #[arg(long = "T")]
    pub t: f64,
    #[arg(long, default_value_t = 36)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Manifest JSON file.
    pub manifest: PathBuf,
}

/// Parses arguments, configures the thread pool and runs the command,
/// returning the process exit code.
pub fn execute(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return crate::error::EXIT_INTERNAL;
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn quad_options(cli: &Cli, rel_tol: f64) -> QuadOptions {
    QuadOptions { rel_tol, max_evals: cli.budget_evals, ..QuadOptions::default() }
}

fn dispatch(cli: &Cli) -> CliResult<i32> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Exponents(a) => {
            let p = resolve_system(a)?;
            emit(resolve_out(out, "exponents.json").as_deref(), &to_json(&tasks::exponents_doc(&p)?)?)?;
        }
        Command::Strata(a) => {
            let p = resolve_system(&a.system)?;
            let (doc, poset) = tasks::strata_doc(&p.rs, &p.lam)?;
            if a.dot {
                emit(resolve_out(out, "strata.dot").as_deref(), &poset.to_dot())?;
            } else {
                emit(resolve_out(out, "strata.json").as_deref(), &to_json(&doc)?)?;
            }
        }
        Command::Volume(a) => {
            let spec = ExpMapSpec::from_json(&read_text(&a.spec)?)?;
            let f = parse_test_function(&a.test_function)?;
            let ladder = parse_ladder(&a.t_ladder)?;
            let run = tasks::volume_run(&spec, f.as_ref(), &ladder, &quad_options(cli, a.rel_tol))?;
            emit(resolve_out(out, "ratios.csv").as_deref(), &tasks::volume_csv(&run.rows)?)?;
        }
        Command::Count(a) => {
            let fam = families::parse_family(&a.family)?;
            let norm: Norm = a.norm.parse()?;
            let caps = a.cap.iter().map(|c| CapSpec::parse(c)).collect::<symvar::Result<Vec<_>>>()?;
            let ladder = parse_ladder(&a.ladder)?;
            let res = counter::count_ladder(fam.as_ref(), norm, &caps, &ladder, a.max_work)?;
            emit(resolve_out(out, "counts.csv").as_deref(), &tasks::count_csv(&res.records, caps.len(), true)?)?;
            if let Some(t) = res.truncated {
                eprintln!("ladder truncated: {t}");
                return Ok(EXIT_BUDGET);
            }
        }
        Command::Compare(a) => {
            let fam = families::parse_family(&a.family)?;
            let c = counter::angular_compare(fam.as_ref(), a.norm.parse()?, a.t, a.bins)?;
            emit(resolve_out(out, "compare.csv").as_deref(), &tasks::compare_csv(&c)?)?;
            eprintln!("T = {}, points = {}, KS distance = {}", c.t, c.n_points, c.ks_distance);
        }
        Command::Report(a) => return report(cli, &a.manifest),
        Command::Presets => emit(resolve_out(out, "presets.txt").as_deref(), &presets_text()?)?,
    }
    Ok(EXIT_OK)
}

fn report(cli: &Cli, path: &Path) -> CliResult<i32> {
    let mut m = RunManifest::load(path)?;
    if let Some(dir) = &cli.out {
        m.output_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        m.seed = seed;
    }
    let opts = RunOptions { quad: quad_options(cli, QuadOptions::default().rel_tol) };
    let outcome = manifest::run(&m, &opts);
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    for c in &outcome.summary.checks {
        eprintln!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(outcome.exit_code)
}

fn resolve_system(a: &SystemArgs) -> CliResult<Preset> {
    match (&a.preset, &a.system) {
        (Some(name), None) => Ok(lookup_preset(name)?),
        (None, Some(path)) => {
            let rs = RootSystemDesc::from_json(&read_text(path)?)?;
            let lam = match (&a.weight, &a.omega) {
                (Some(w), None) => Weight::new(parse_weight(w)?),
                (None, Some(o)) => rootlat::weight_from_fundamental(&rs, &parse_weight(o)?)?,
                _ => return Err(CliError::Schema("--system needs exactly one of --weight, --omega".into())),
            };
            if lam.rank() != rs.rank() {
                return Err(symvar::Error::DimensionMismatch { expected: rs.rank(), got: lam.rank() }.into());
            }
            Ok(Preset { name: path.display().to_string(), family: None, rs, lam })
        }
        _ => Err(CliError::Schema("give either --preset or --system".into())),
    }
}

fn presets_text() -> CliResult<String> {
    let mut s = String::from("kinds:\n");
    for k in preset_kinds() {
        s.push_str(&format!("  {:<24} {}\n", k.usage(), k.description()));
    }
    s.push_str("\ninstances:\n");
    for p in preset_registry()? {
        let omega: Vec<String> = rootlat::fundamental_coords(&p.rs, &p.lam).iter().map(ToString::to_string).collect();
        s.push_str(&format!(
            "  {:<18} {}{}  lambda = ({}) in fundamental weights\n",
            p.name,
            p.rs.family(),
            p.rs.rank(),
            omega.join(", ")
        ));
    }
    Ok(s)
}

