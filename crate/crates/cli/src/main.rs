use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use bk_core::demo;
use bk_core::io::EventFile;
use bk_core::rational::{format_ratio, parse_ratio_list, to_f64};
use bk_core::verify::{
    self, CandidateSource, Classification, Inequality, ProjectionParams, SearchConfig, SweepOptions, Universe,
};
use bk_core::{weighted_k_out_of_n_measure, Config, Event, IndexSet, Measure, MeasureSpec, WeightedSampler};

/// Exact checks of BK-type inequalities on {0,1}^n.
///
/// Exit status: 0 when the inequality holds (or the command succeeded),
/// 1 when a violation or non-BK candidate was found, 2 on any error.
#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[command(name = "bkcheck", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct Common {
    /// Root seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores). Reports do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
enum Command {
    /// Check one inequality on one pair of events.
    Verify(VerifyArgs),
    /// Check an inequality on every pair of a universe of events.
    Sweep(SweepArgs),
    /// Classify mixing variables X by whether the mixture measure is BK.
    Search(SearchArgs),
    /// Draw configurations from a weighted k-out-of-n measure.
    Sample(SampleArgs),
    /// Print a worked example.
    Demo(DemoArgs),
    /// Re-run the command recorded in a JSON report.
    Replay(ReplayArgs),
}

/// A measure given by a file or by family name plus parameters.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct MeasureArgs {
    /// Measure file (JSON) or family: product, k_out_of_n, weighted, hat, mixture.
    #[arg(long)]
    measure: Option<String>,
    /// Dimension.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Even dimension for hat measures and prop2.
    #[arg(long)]
    m: Option<usize>,
    /// Per-coordinate probabilities, e.g. 1/2,1/3.
    #[arg(long)]
    p: Option<String>,
    /// Weights, e.g. 1,2,3.
    #[arg(long)]
    w: Option<String>,
    /// Mixing pmf P(X = 0), …, P(X = n).
    #[arg(long)]
    pmf: Option<String>,
    /// Pair-alternating permutation π(1),…,π(m), 1-based.
    #[arg(long)]
    perm: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum IneqArg {
    Bk,
    Reimer,
    Prop2,
    Na,
}

impl From<IneqArg> for Inequality {
    fn from(i: IneqArg) -> Inequality {
        match i {
            IneqArg::Bk => Inequality::Bk,
            IneqArg::Reimer => Inequality::Reimer,
            IneqArg::Prop2 => Inequality::Prop2,
            IneqArg::Na => Inequality::Na,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    inequality: IneqArg,
    /// Event file for A.
    #[arg(long)]
    a: PathBuf,
    /// Event file for B.
    #[arg(long)]
    b: PathBuf,
    /// Coordinates A depends on (NA only), e.g. 1,2; defaults to its dependence set.
    #[arg(long)]
    k_set: Option<String>,
    #[arg(long)]
    l_set: Option<String>,
    #[command(flatten)]
    measure: MeasureArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum UniverseArg {
    All,
    Monotone,
    Random,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SweepArgs {
    #[arg(long, value_enum)]
    inequality: IneqArg,
    #[arg(long, value_enum)]
    universe: UniverseArg,
    /// Pairs to draw for the random universe.
    #[arg(long, default_value_t = 100_000)]
    count: u64,
    /// Violations listed in the summary.
    #[arg(long, default_value_t = 100)]
    max_witnesses: usize,
    #[command(flatten)]
    measure: MeasureArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    /// Mixture weights (default all 1).
    #[arg(long)]
    w: Option<String>,
    /// Grid of pmfs with entries in multiples of 1/D.
    #[arg(long, default_value_t = 2)]
    grid: u64,
    /// Draw this many random pmfs instead of the grid.
    #[arg(long)]
    random: Option<usize>,
    /// Skip grid/random candidates; classify projections only.
    #[arg(long)]
    projections_only: bool,
    #[arg(long)]
    no_projections: bool,
    /// Largest number of auxiliary coordinates in the projection grid.
    #[arg(long, default_value_t = 2)]
    aux_m: usize,
    #[arg(long, default_value = "1,2")]
    aux_weights: String,
    /// Stop after classifying this many candidates.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Weights (default all 1).
    #[arg(long)]
    w: Option<String>,
    /// Number of draws.
    #[arg(long = "N", default_value_t = 10_000)]
    draws: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct DemoArgs {
    /// remark-counterexample or alice-bob.
    name: String,
    /// Monte Carlo draws for alice-bob.
    #[arg(long, default_value_t = 1_000_000)]
    draws: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct ReplayArgs {
    report: PathBuf,
}

/// Outcome of a command: what to write and the exit status.
struct Outcome {
    json: Option<serde_json::Value>,
    text: Option<String>,
    violation: bool,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    run_config: &'a Cli,
    report: serde_json::Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(violation) => ExitCode::from(violation as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let out = match &cli.command {
        Command::Verify(a) => cmd_verify(cli, a)?,
        Command::Sweep(a) => cmd_sweep(cli, a)?,
        Command::Search(a) => cmd_search(cli, a)?,
        Command::Sample(a) => cmd_sample(cli, a)?,
        Command::Demo(a) => cmd_demo(cli, a)?,
        Command::Replay(a) => {
            let text = fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let config = value.get("run_config").ok_or_else(|| anyhow!("report has no run_config"))?;
            let mut replayed: Cli = serde_json::from_value(config.clone())?;
            if matches!(replayed.command, Command::Replay(_)) {
                bail!("a replay report cannot be replayed");
            }
            replayed.common.out = cli.common.out.clone();
            return run(&replayed);
        }
    };
    if let Some(text) = &out.text {
        emit(&cli.common.out, text)?;
    }
    if let Some(report) = out.json {
        let env = Envelope { tool: "bkcheck", version: bk_core::VERSION, run_config: cli, report };
        let body = serde_json::to_string_pretty(&env)? + "\n";
        match (&cli.common.out, out.text.is_some()) {
            (Some(path), true) => fs::write(summary_path(path), body)?,
            (None, true) => eprint!("{body}"),
            (_, false) => emit(&cli.common.out, &body)?,
        }
    }
    Ok(out.violation)
}

fn summary_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn ratios(s: &str) -> Result<Vec<bk_core::Rational>> {
    Ok(parse_ratio_list(s)?)
}

fn indices(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad index {t:?}")))
        .collect()
}

fn unit_weights(n: usize, w: &Option<String>) -> Result<Vec<bk_core::Rational>> {
    match w {
        Some(w) => ratios(w),
        None => Ok(vec![bk_core::rational::int(1); n]),
    }
}

fn measure_spec(m: &MeasureArgs) -> Result<MeasureSpec> {
    let family = m.measure.as_deref().ok_or_else(|| anyhow!("--measure is required"))?;
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| anyhow!("--measure {family} needs --{flag}"));
    Ok(match family {
        "product" => MeasureSpec::Product {
            p: ratios(m.p.as_deref().ok_or_else(|| anyhow!("--measure product needs --p"))?)?,
        },
        "k_out_of_n" => MeasureSpec::KOutOfN { n: need(m.n, "n")?, k: need(m.k, "k")? },
        "weighted" => {
            let n = need(m.n, "n")?;
            MeasureSpec::Weighted { n, k: need(m.k, "k")?, w: unit_weights(n, &m.w)? }
        }
        "hat" => MeasureSpec::Hat { m: need(m.m, "m")?, perm: m.perm.as_deref().map(indices).transpose()? },
        "mixture" => {
            let n = need(m.n, "n")?;
            MeasureSpec::Mixture {
                n,
                pmf: ratios(m.pmf.as_deref().ok_or_else(|| anyhow!("--measure mixture needs --pmf"))?)?,
                w: unit_weights(n, &m.w)?,
            }
        }
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading measure file {path}"))?;
            serde_json::from_str(&text).with_context(|| format!("parsing measure file {path}"))?
        }
    })
}

fn build_measure(m: &MeasureArgs) -> Result<Measure> {
    Ok(measure_spec(m)?.build()?)
}

fn read_event(path: &Path) -> Result<Event> {
    let text = fs::read_to_string(path).with_context(|| format!("reading event file {}", path.display()))?;
    let file: EventFile =
        serde_json::from_str(&text).with_context(|| format!("parsing event file {}", path.display()))?;
    Ok(file.to_event()?)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<Outcome> {
    let (ea, eb) = (read_event(&a.a)?, read_event(&a.b)?);
    let report = match Inequality::from(a.inequality) {
        Inequality::Bk => verify::check_bk(&build_measure(&a.measure)?, &ea, &eb)?,
        Inequality::Reimer => verify::check_reimer_cardinality(&ea, &eb)?,
        Inequality::Prop2 => verify::check_prop2(a.measure.m.unwrap_or(ea.n()), &ea, &eb)?,
        Inequality::Na => {
            let set = |s: &Option<String>, e: &Event| -> Result<IndexSet> {
                match s {
                    Some(s) => Ok(IndexSet::from_indices(e.n(), &indices(s)?)?),
                    None => Ok(verify::dependence_set(e)),
                }
            };
            let (k, l) = (set(&a.k_set, &ea)?, set(&a.l_set, &eb)?);
            verify::check_na(&build_measure(&a.measure)?, &ea, &eb, &k, &l)?
        }
    };
    let violation = !report.holds;
    Ok(match cli.common.format {
        Format::Json => Outcome { json: Some(serde_json::to_value(&report)?), text: None, violation },
        Format::Csv => Outcome {
            text: Some(format!(
                "inequality,lhs,rhs,slack,verdict\n{},{},{},{},{}\n",
                report.inequality,
                format_ratio(&report.lhs),
                format_ratio(&report.rhs),
                format_ratio(&report.slack),
                if report.holds { "holds" } else { "violation" }
            )),
            json: Some(serde_json::to_value(&report)?),
            violation,
        },
    })
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> Result<Outcome> {
    let inequality = Inequality::from(a.inequality);
    let universe = match a.universe {
        UniverseArg::All => Universe::AllEvents,
        UniverseArg::Monotone => Universe::AllMonotone,
        UniverseArg::Random => Universe::RandomSample { count: a.count, seed: cli.common.seed },
    };
    let measure = match inequality {
        Inequality::Bk | Inequality::Na => Some(build_measure(&a.measure)?),
        _ => None,
    };
    let n = match (&measure, inequality) {
        (Some(mu), _) => mu.n(),
        (None, Inequality::Prop2) => a.measure.m.or(a.measure.n).ok_or_else(|| anyhow!("prop2 needs --m"))?,
        (None, _) => a.measure.n.ok_or_else(|| anyhow!("--n is required"))?,
    };
    let opts = SweepOptions {
        workers: cli.common.workers,
        record_rows: cli.common.format == Format::Csv,
        max_witnesses: a.max_witnesses,
    };
    let report = verify::sweep(measure.as_ref(), n, &universe, inequality, &opts)?;
    let text = if cli.common.format == Format::Csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        Some(String::from_utf8(buf)?)
    } else {
        None
    };
    Ok(Outcome { json: Some(serde_json::to_value(&report)?), text, violation: !report.holds() })
}

fn cmd_search(cli: &Cli, a: &SearchArgs) -> Result<Outcome> {
    let source = if a.projections_only {
        CandidateSource::None
    } else if let Some(count) = a.random {
        CandidateSource::Random { count, seed: cli.common.seed, denominator: a.grid.max(1) }
    } else {
        CandidateSource::Grid { denominator: a.grid }
    };
    let cfg = SearchConfig {
        n: a.n,
        w: unit_weights(a.n, &a.w)?,
        source,
        projections: (!a.no_projections)
            .then(|| -> Result<ProjectionParams> {
                Ok(ProjectionParams { max_aux_m: a.aux_m, aux_weights: ratios(&a.aux_weights)? })
            })
            .transpose()?,
        budget: a.budget,
        workers: cli.common.workers,
    };
    let report = verify::search_mixtures(&cfg)?;
    let text = (cli.common.format == Format::Csv).then(|| {
        let mut s = String::from("index,origin,pmf,classification,min_slack,projection_match\n");
        for r in &report.results {
            let origin = serde_json::to_value(&r.origin).ok().and_then(|v| v["kind"].as_str().map(String::from));
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.index,
                origin.unwrap_or_default(),
                r.pmf.iter().map(format_ratio).collect::<Vec<_>>().join(";"),
                match r.classification {
                    Classification::Bk => "bk",
                    Classification::NonBk => "non_bk",
                    Classification::Invalid => "invalid",
                },
                r.min_slack.as_ref().map(format_ratio).unwrap_or_default(),
                r.projection_match.is_some()
            ));
        }
        s
    });
    Ok(Outcome { json: Some(serde_json::to_value(&report)?), text, violation: report.non_bk_count > 0 })
}

#[derive(Serialize)]
struct Frequency {
    config: String,
    count: u64,
    frequency: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
    /// `(frequency − exact) / binomial standard error`.
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<f64>,
}

#[derive(Serialize)]
struct SampleSummary {
    n: usize,
    k: usize,
    w: Vec<String>,
    draws: u64,
    seed: u64,
    distinct: usize,
    /// Largest |z| over the support when exact masses are available.
    max_abs_z: Option<f64>,
    within_3_sigma: Option<bool>,
    frequencies: Vec<Frequency>,
}

/// Draw `i` uses stream `i / 65536` of the seed, so the draws are the same
/// for any worker count.
fn cmd_sample(cli: &Cli, a: &SampleArgs) -> Result<Outcome> {
    const CHUNK: u64 = 1 << 16;
    let w = unit_weights(a.n, &a.w)?;
    let sampler = WeightedSampler::new(a.k, a.n, w.iter().map(to_f64).collect())?;
    let mut draws = Vec::with_capacity(a.draws as usize);
    for c in 0..a.draws.div_ceil(CHUNK) {
        let mut rng = bk_core::rng::stream_rng(cli.common.seed, c);
        for _ in c * CHUNK..((c + 1) * CHUNK).min(a.draws) {
            draws.push(sampler.draw_config(&mut rng)?);
        }
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for d in &draws {
        *counts.entry(d.bits()).or_default() += 1;
    }
    let exact = if a.n <= bk_core::limits::limits().dense_max_n {
        Some(weighted_k_out_of_n_measure(a.k, a.n, &w)?)
    } else {
        None
    };
    let total = a.draws as f64;
    let mut frequencies = Vec::new();
    let mut push = |bits: u64, count: u64| -> Result<()> {
        let c = Config::new(a.n, bits)?;
        let p = exact.as_ref().map(|mu| mu.mass(&c)).transpose()?;
        let z = p.as_ref().map(|p| {
            let pf = to_f64(p);
            let se = (pf * (1.0 - pf) / total).sqrt();
            let diff = count as f64 / total - pf;
            if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        });
        frequencies.push(Frequency {
            config: c.to_string(),
            count,
            frequency: count as f64 / total,
            exact: p.as_ref().map(format_ratio),
            z,
        });
        Ok(())
    };
    match &exact {
        Some(mu) if a.n <= 16 => {
            for c in mu.support()? {
                push(c.bits(), counts.get(&c.bits()).copied().unwrap_or(0))?;
            }
        }
        _ => {
            for (&bits, &count) in &counts {
                push(bits, count)?;
            }
        }
    }
    let max_abs_z = frequencies.iter().filter_map(|f| f.z).map(f64::abs).reduce(f64::max);
    let summary = SampleSummary {
        n: a.n,
        k: a.k,
        w: w.iter().map(format_ratio).collect(),
        draws: a.draws,
        seed: cli.common.seed,
        distinct: counts.len(),
        max_abs_z,
        within_3_sigma: max_abs_z.map(|z| z <= 3.0),
        frequencies,
    };
    let text = match (&cli.common.out, cli.common.format) {
        (_, Format::Csv) => {
            let mut s = String::from("config,count,frequency,exact,z\n");
            for f in &summary.frequencies {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    f.config,
                    f.count,
                    f.frequency,
                    f.exact.clone().unwrap_or_default(),
                    f.z.map(|z| z.to_string()).unwrap_or_default()
                ));
            }
            Some(s)
        }
        (Some(_), Format::Json) => Some(draws.iter().map(|c| c.to_string() + "\n").collect()),
        (None, Format::Json) => None,
    };
    Ok(Outcome { json: Some(serde_json::to_value(&summary)?), text, violation: false })
}

/// Demos always print their walkthrough; `--out` additionally receives the JSON report.
fn cmd_demo(cli: &Cli, a: &DemoArgs) -> Result<Outcome> {
    if cli.common.format == Format::Csv {
        bail!("demos have no CSV output");
    }
    let (text, json) = match a.name.as_str() {
        "remark-counterexample" => {
            let w = demo::remark_counterexample()?;
            let json = serde_json::json!({
                "a": EventFile::explicit(&w.a),
                "b": EventFile::explicit(&w.b),
                "box": EventFile::explicit(&w.box_full),
                "box_alternating": EventFile::explicit(&w.box_alternating),
                "t_lhs": EventFile::explicit(&w.lhs),
                "t_a": EventFile::explicit(&w.t_a),
                "t_b": EventFile::explicit(&w.t_b),
                "t_rhs": EventFile::explicit(&w.rhs),
            });
            (w.text, json)
        }
        "alice-bob" => {
            let (text, report) = demo::alice_bob(a.draws, cli.common.seed, cli.common.workers)?;
            (text, serde_json::to_value(&report)?)
        }
        other => bail!("unknown demo {other:?}; available: {}", demo::DEMOS.join(", ")),
    };
    print!("{text}");
    Ok(Outcome { json: cli.common.out.is_some().then_some(json), text: None, violation: false })
}
