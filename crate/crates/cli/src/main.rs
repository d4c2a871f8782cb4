//! `exshock`: validate, sample, diagnose and convert exchangeable shock copulas.
//!
//! Exit codes: 0 success or pass, 1 a validity or diagnostic check failed,
//! 2 usage or input error.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use exshock::diagnostics::{
    default_lattice, estimate_tail_dependence, ks_uniform, mc_check_g_on_batch, sup_distance, DiagnosticReport,
    TAIL_THRESHOLD,
};
use exshock::families::Preset;
use exshock::frailty::{sample_frailty_with_cells, DEFAULT_GRID_CELLS};
use exshock::{
    build_shock_model, copula_from_bernstein, detect_extreme_value, g_from_h, h_from_g, sample_shock,
    tail_dependence, validate, validate_h_family, BernsteinFamily, Condition, GridSpec, HFamily,
    OrderedFactorCopula, SampleBatch, SampleMethod, Verdict,
};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "exshock", version, about = "Exchangeable exogenous-shock copulas")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a validity condition on a grid and print the report.
    Validate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "ii", value_parser = parse_condition)]
        condition: Condition,
        /// Points of the pairwise (u, v) grid.
        #[arg(long, default_value_t = 257)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a batch and write it as CSV with a `.meta.json` sidecar.
    Sample {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a batch and compare it with the analytic copula.
    Diagnose {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert between factor (g) and shock-law (H) representations.
    Convert {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe a family or copula.
    Info {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Args)]
struct Input {
    #[command(flatten)]
    source: Source,
    /// Dimension for Bernstein family files that do not carry `d`.
    #[arg(long, default_value_t = 2)]
    dim: usize,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Family descriptor `{name, params, d}` or Bernstein family `{kind, psi1, H}`.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Copula `{d, g}` or shock-law family `{d, H}`.
    #[arg(long)]
    copula: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "shock")]
    method: Method,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability cells of the frailty time grid.
    #[arg(long, default_value_t = DEFAULT_GRID_CELLS)]
    grid: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Shock,
    Frailty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    #[value(name = "g")]
    G,
    #[value(name = "H")]
    H,
}

fn parse_condition(s: &str) -> Result<Condition, String> {
    match s {
        "ii" | "iii" | "iv" => s.parse().map_err(|e: exshock::Error| e.to_string()),
        _ => Err(format!("expected ii, iii or iv, got `{s}`")),
    }
}

/// Failures that map to exit code 1 rather than 2.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

enum Loaded {
    Preset { preset: Preset, canonical: Value },
    Copula { copula: OrderedFactorCopula, canonical: Value },
    Shocks { h: HFamily, canonical: Value },
}

impl Loaded {
    fn canonical(&self) -> &Value {
        match self {
            Self::Preset { canonical, .. } | Self::Copula { canonical, .. } | Self::Shocks { canonical, .. } => {
                canonical
            }
        }
    }

    fn label(&self) -> String {
        match self {
            Self::Preset { preset, .. } => preset.label(),
            Self::Copula { copula, .. } => format!("copula(d={})", copula.d()),
            Self::Shocks { h, .. } => format!("shock-laws(d={})", h.d()),
        }
    }

    /// The copula with all preset preconditions enforced.
    fn copula(&self) -> anyhow::Result<OrderedFactorCopula> {
        Ok(match self {
            Self::Preset { preset, .. } => preset.copula()?,
            Self::Copula { copula, .. } => copula.clone(),
            Self::Shocks { h, .. } => g_from_h(h)?,
        })
    }

    fn bernstein(&self) -> Option<BernsteinFamily> {
        match self {
            Self::Preset { preset, .. } => preset.bernstein(),
            _ => None,
        }
    }

    fn family_hash(&self) -> String {
        let bytes = serde_json::to_vec(self.canonical()).expect("JSON values serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load(input: &Input) -> anyhow::Result<Loaded> {
    if let Some(path) = &input.source.family {
        let value = read_json(path)?;
        let preset = Preset::from_json(&value, input.dim).with_context(|| format!("in {}", path.display()))?;
        return Ok(Loaded::Preset { preset, canonical: value });
    }
    let path = input.source.copula.as_ref().expect("clap enforces one input");
    let value = read_json(path)?;
    if value.get("H").is_some() {
        let h = serde_json::from_value(value.clone()).with_context(|| format!("in {}", path.display()))?;
        Ok(Loaded::Shocks { h, canonical: value })
    } else {
        let copula = serde_json::from_value(value.clone()).with_context(|| format!("in {}", path.display()))?;
        Ok(Loaded::Copula { copula, canonical: value })
    }
}

fn write_output(out: Option<&Path>, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn validate_cmd(input: &Input, condition: Condition, grid: usize, out: Option<&Path>) -> anyhow::Result<()> {
    let loaded = load(input)?;
    let grid = GridSpec { pair_points: grid, ..GridSpec::default() };
    let report = match &loaded {
        Loaded::Shocks { h, .. } => validate_h_family(h, &grid),
        Loaded::Preset { preset, .. } => validate(&preset.raw_copula()?, condition, &grid),
        Loaded::Copula { copula, .. } => validate(copula, condition, &grid),
    };
    write_output(out, &report)?;
    match report.verdict {
        Verdict::Pass => Ok(()),
        v => Err(CheckFailed(format!("{} witnesses, verdict {v:?}", report.witnesses.len())).into()),
    }
}

fn draw(loaded: &Loaded, run: &RunArgs) -> anyhow::Result<(SampleBatch, OrderedFactorCopula)> {
    match run.method {
        Method::Shock => {
            let copula = loaded.copula()?;
            let spec = build_shock_model(&copula)?.with_label(loaded.label());
            Ok((sample_shock(&spec, run.n, run.seed)?, copula))
        }
        Method::Frailty => {
            let f = loaded
                .bernstein()
                .ok_or_else(|| anyhow!("method frailty needs a Bernstein-backed family (sato_gamma, bernstein or {{kind, psi1}})"))?;
            let d = loaded.copula()?.d();
            let mut batch = sample_frailty_with_cells(&f, d, run.n, run.seed, run.grid)?;
            batch.family = loaded.label();
            Ok((batch, copula_from_bernstein(&f, d)?))
        }
    }
}

#[derive(Serialize)]
struct Sidecar {
    method: SampleMethod,
    seed: u64,
    n: usize,
    d: usize,
    family: String,
    family_hash: String,
    grid_cells: Option<usize>,
    crate_version: &'static str,
}

fn sample_cmd(input: &Input, run: &RunArgs, out: &Path) -> anyhow::Result<()> {
    let loaded = load(input)?;
    let (batch, _) = draw(&loaded, run)?;
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    batch.write_csv(BufWriter::new(file))?;
    let sidecar = Sidecar {
        method: batch.method,
        seed: batch.seed,
        n: batch.n(),
        d: batch.d(),
        family: batch.family.clone(),
        family_hash: loaded.family_hash(),
        grid_cells: matches!(run.method, Method::Frailty).then_some(run.grid),
        crate_version: env!("CARGO_PKG_VERSION"),
    };
    let mut meta = out.as_os_str().to_owned();
    meta.push(".meta.json");
    write_output(Some(Path::new(&meta)), &sidecar)
}

fn diagnose_cmd(input: &Input, run: &RunArgs, out: Option<&Path>) -> anyhow::Result<()> {
    let loaded = load(input)?;
    let (batch, copula) = draw(&loaded, run)?;
    let d = batch.d();
    let n = batch.n() as f64;
    let mut reports = Vec::new();

    let dist = sup_distance(&batch, &copula, &default_lattice(d))?;
    let stderr = 0.5 / n.sqrt();
    reports.push(DiagnosticReport {
        test: "sup_distance(5^d lattice)".into(),
        analytic: 0.0,
        estimate: dist,
        stderr,
        sigmas: dist / stderr,
        // 0.01 at n = 2e5, scaled with the sample size
        verdict: if dist <= 4.5 / n.sqrt() + 1.0 / DEFAULT_GRID_CELLS as f64 { Verdict::Pass } else { Verdict::Fail },
    });
    for k in 0..d {
        let ks = ks_uniform(&batch.column(k));
        reports.push(DiagnosticReport {
            test: format!("ks_uniform(u{})", k + 1),
            analytic: 0.0,
            estimate: ks,
            stderr: 1.0 / n.sqrt(),
            sigmas: ks * n.sqrt(),
            verdict: if ks * n.sqrt() <= 1.63 { Verdict::Pass } else { Verdict::Fail },
        });
    }
    if d == 2 {
        let t = tail_dependence(copula.g(2));
        let e = estimate_tail_dependence(&batch, TAIL_THRESHOLD)?;
        for (name, analytic, estimate, stderr) in
            [("lambda_L", t.lambda_l, e.lambda_l, e.stderr_l), ("lambda_U", t.lambda_u, e.lambda_u, e.stderr_u)]
        {
            let verdict = if e.inconclusive {
                Verdict::Inconclusive
            } else if (estimate - analytic).abs() <= 0.05 {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            reports.push(DiagnosticReport {
                test: format!("tail_dependence({name}, t={TAIL_THRESHOLD})"),
                analytic,
                estimate,
                stderr,
                sigmas: (estimate - analytic).abs() / stderr,
                verdict,
            });
        }
    }
    for j in 1..=d {
        for k in 0..=d - j {
            reports.push(mc_check_g_on_batch(&copula, &batch, j, k, 0.3, 0.7)?);
        }
    }
    write_output(out, &reports)?;
    let failed = reports.iter().filter(|r| r.verdict == Verdict::Fail).count();
    if failed > 0 {
        return Err(CheckFailed(format!("{failed} of {} diagnostics failed", reports.len())).into());
    }
    Ok(())
}

fn convert_cmd(input: &Input, to: Target, out: Option<&Path>) -> anyhow::Result<()> {
    let loaded = load(input)?;
    match to {
        Target::G => write_output(out, &loaded.copula()?),
        Target::H => match &loaded {
            Loaded::Shocks { h, .. } => write_output(out, h),
            _ => write_output(out, &h_from_g(&loaded.copula()?)?),
        },
    }
}

fn info_cmd(input: &Input) -> anyhow::Result<()> {
    let loaded = load(input)?;
    let copula = match &loaded {
        Loaded::Preset { preset, .. } => preset.raw_copula()?,
        _ => loaded.copula()?,
    };
    let report = validate(&copula, Condition::TopShockLaws, &GridSpec::default());
    let tail = tail_dependence(copula.g(2));
    let mut info = json!({
        "label": loaded.label(),
        "d": copula.d(),
        "family_hash": loaded.family_hash(),
        "condition_iv": report.verdict,
        "bivariate_tail_dependence": tail,
        "extreme_value_exponents": detect_extreme_value(&copula, 1e-10),
    });
    if let Some(f) = loaded.bernstein() {
        info["bernstein"] = json!({
            "describe": f.describe(),
            "levy_measure": f.levy_measure(),
        });
    }
    write_output(None, &info)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(workers).build_global()?;
    }
    match &cli.command {
        Command::Validate { input, condition, grid, out } => validate_cmd(input, *condition, *grid, out.as_deref()),
        Command::Sample { input, run, out } => sample_cmd(input, run, out),
        Command::Diagnose { input, run, out } => diagnose_cmd(input, run, out.as_deref()),
        Command::Convert { input, to, out } => convert_cmd(input, *to, out.as_deref()),
        Command::Info { input } => info_cmd(input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let check_failed = e.downcast_ref::<CheckFailed>().is_some()
                || matches!(e.downcast_ref::<exshock::Error>(), Some(exshock::Error::Invalid(_)));
            ExitCode::from(if check_failed { 1 } else { 2 })
        }
    }
}
