//! Command-line front end: every analysis in the library as a subcommand,
//! with inline-flag or CSV input and table/csv/json output.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 analytic non-result
//! (unattainable sample size), 4 I/O failure.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use replicore::broad::{self, bi_p_value_asymptotic, min_detectable_effect};
use replicore::eer::{
    eer_bound_from_icc, eer_from_variance_proportions, rcb_variance_components, RcbLayout,
    RcbObservation,
};
use replicore::fmt::sig6;
use replicore::power::{
    followup_sample_size, followup_sample_size_exact, initial_sample_size, limiting_power,
    relative_efficiency, replicability_power_exact,
};
use replicore::profile::{build_profile, ProfileColumn, SvgOptions};
use replicore::sim::run_tally;
use replicore::{
    DesignSpec, EffectContext, MixedModelParams, SampleSizeResult, SimConfig, TwoSampleSummary,
};

#[derive(Parser)]
#[command(name = "replicore", version, about = "Replicability inference for two-sample t-tests under a changing research environment")]
struct Cli {
    /// Output format; falls back to the REPLICORE_FORMAT environment
    /// variable, then to `table`.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replicability power breakdown at a given effect size and EER.
    Power(PowerArgs),
    /// Initial and follow-up per-arm sample sizes and relative efficiency.
    Samplesize(SampleSizeArgs),
    /// Broad-inference p-value, confidence level, and interval.
    Bi(BiArgs),
    /// Sweep the EER and emit profile CSV/SVG plus threshold crossings.
    Profile(ProfileArgs),
    /// EER estimates and bounds from data or published summaries.
    #[command(subcommand)]
    Eer(EerCmd),
    /// Seeded Monte Carlo simulation of the follow-up mixed model.
    Simulate(SimulateArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PowerArgs {
    /// Treatment effect size (mu1 - mu2)/(sigma_e sqrt(2)).
    #[arg(long)]
    delta: f64,
    /// Environmental effect ratio sigma_delta/sigma_e.
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    n1: u64,
    #[arg(long)]
    n2: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SampleSizeArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Target replicability power.
    #[arg(long, default_value_t = 0.8)]
    power: f64,
    /// Refine the follow-up size with the exact noncentral-t power.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct BiArgs {
    /// Raw-data CSV with header `group,value` and exactly two group labels.
    #[arg(long, conflicts_with_all = ["mean1", "mean2", "sd", "delta_star"])]
    data: Option<PathBuf>,
    /// Group label to treat as arm 1 (default: first appearance order).
    #[arg(long, requires = "data")]
    arm1_label: Option<String>,
    #[arg(long, requires_all = ["mean2", "sd", "n1", "n2"])]
    mean1: Option<f64>,
    #[arg(long)]
    mean2: Option<f64>,
    /// Pooled standard deviation.
    #[arg(long)]
    sd: Option<f64>,
    /// Observed effect size; summary-free mode (no interval is printed).
    #[arg(long, conflicts_with_all = ["mean1", "mean2", "sd"], requires_all = ["n1", "n2"])]
    delta_star: Option<f64>,
    #[arg(long)]
    n1: Option<u64>,
    #[arg(long)]
    n2: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Assumed EER.
    #[arg(long)]
    omega: f64,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ProfileArgs {
    #[arg(long)]
    delta_star: f64,
    #[arg(long)]
    n1: u64,
    #[arg(long)]
    n2: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_max: f64,
    #[arg(long, default_value_t = 101)]
    steps: usize,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    /// Threshold for the reported confidence-level crossing.
    #[arg(long, default_value_t = 0.8)]
    conf_threshold: f64,
}

#[derive(Subcommand)]
enum EerCmd {
    /// Upper bound from an intraclass correlation: omega < sqrt(rho/(1-rho)).
    Icc {
        #[arg(long)]
        rho: f64,
    },
    /// EER from published proportions of total variance.
    Table {
        #[arg(long)]
        interaction: f64,
        #[arg(long)]
        error: f64,
    },
    /// ANOVA variance components from a balanced RCB CSV
    /// (header `block,treatment,rep,value`).
    Rcb {
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[arg(long)]
    mu1: f64,
    #[arg(long)]
    mu2: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_e: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_delta: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_theta: f64,
    #[arg(long)]
    n1: u64,
    #[arg(long)]
    n2: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

/// One output cell: numbers print at 6 significant digits everywhere.
enum Value {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Num(x) => sig6(*x),
            Value::Int(i) => i.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

type Report = Vec<(&'static str, Value)>;

fn print_report(report: &Report, format: OutputFormat, out: &mut impl Write) -> anyhow::Result<()> {
    match format {
        OutputFormat::Table => {
            let width = report.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in report {
                writeln!(out, "{k:<width$}  {}", v.render())?;
            }
        }
        OutputFormat::Csv => {
            let keys: Vec<&str> = report.iter().map(|(k, _)| *k).collect();
            let vals: Vec<String> = report.iter().map(|(_, v)| v.render()).collect();
            writeln!(out, "{}", keys.join(","))?;
            writeln!(out, "{}", vals.join(","))?;
        }
        OutputFormat::Json => {
            writeln!(out, "{{")?;
            for (i, (k, v)) in report.iter().enumerate() {
                let comma = if i + 1 < report.len() { "," } else { "" };
                match v {
                    Value::Text(s) => writeln!(out, "  \"{k}\": \"{s}\"{comma}")?,
                    _ => writeln!(out, "  \"{k}\": {}{comma}", v.render())?,
                }
            }
            writeln!(out, "}}")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format.unwrap_or_else(|| {
        match std::env::var("REPLICORE_FORMAT").ok().as_deref() {
            Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            _ => OutputFormat::Table,
        }
    });
    match run(cli.cmd, format) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}

/// Map failures onto the exit-code contract: I/O -> 4, everything else
/// (flag/domain/data problems) -> 2.
fn classify(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 4;
        }
        if let Some(err) = cause.downcast_ref::<replicore::Error>() {
            if matches!(err, replicore::Error::Io(_)) {
                return 4;
            }
        }
    }
    2
}

fn run(cmd: Cmd, format: OutputFormat) -> anyhow::Result<ExitCode> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cmd {
        Cmd::Power(a) => {
            let ctx = EffectContext::new(a.delta, a.omega)?;
            let design = DesignSpec::new(a.n1, a.n2, a.alpha)?;
            let b = replicability_power_exact(&ctx, &design)?;
            let initial = replicability_power_exact(&EffectContext::new(a.delta, 0.0)?, &design)?;
            let report: Report = vec![
                ("delta", Value::Num(a.delta)),
                ("omega", Value::Num(a.omega)),
                ("n1", Value::Int(a.n1)),
                ("n2", Value::Int(a.n2)),
                ("alpha", Value::Num(a.alpha)),
                ("p_rep", Value::Num(b.p_rep)),
                ("p_wrong_direction", Value::Num(b.p_wrong_direction)),
                ("p_nonsig", Value::Num(b.p_nonsig)),
                ("initial_power", Value::Num(initial.p_rep)),
                ("limiting_power", Value::Num(limiting_power(&ctx))),
            ];
            print_report(&report, format, &mut out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Samplesize(a) => {
            let ctx = EffectContext::new(a.delta, a.omega)?;
            let n_i = initial_sample_size(a.delta, a.alpha, a.power)?
                .n_per_arm()
                .expect("initial size always attainable");
            let followup = if a.exact {
                followup_sample_size_exact(&ctx, a.alpha, a.power)?
            } else {
                followup_sample_size(&ctx, a.alpha, a.power)?
            };
            match followup {
                SampleSizeResult::Attainable { n_per_arm, achieved_power } => {
                    let report: Report = vec![
                        ("delta", Value::Num(a.delta)),
                        ("omega", Value::Num(a.omega)),
                        ("alpha", Value::Num(a.alpha)),
                        ("target_power", Value::Num(a.power)),
                        ("n_initial", Value::Int(n_i)),
                        ("n_followup", Value::Int(n_per_arm)),
                        ("relative_efficiency", Value::Num(relative_efficiency(&ctx, a.alpha, a.power)?)),
                        ("achieved_power", Value::Num(achieved_power)),
                    ];
                    print_report(&report, format, &mut out)?;
                    Ok(ExitCode::SUCCESS)
                }
                SampleSizeResult::Unattainable { limiting_power } => {
                    let report: Report = vec![
                        ("delta", Value::Num(a.delta)),
                        ("omega", Value::Num(a.omega)),
                        ("alpha", Value::Num(a.alpha)),
                        ("target_power", Value::Num(a.power)),
                        ("n_initial", Value::Int(n_i)),
                        ("status", Value::Text("UNATTAINABLE".into())),
                        ("limiting_power", Value::Num(limiting_power)),
                    ];
                    print_report(&report, format, &mut out)?;
                    eprintln!(
                        "no follow-up sample size attains power {}: the limiting power Phi(delta/omega) = {} falls below the target",
                        sig6(a.power),
                        sig6(limiting_power)
                    );
                    Ok(ExitCode::from(3))
                }
            }
        }
        Cmd::Bi(a) => {
            let report = cmd_bi(&a)?;
            print_report(&report, format, &mut out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Profile(a) => {
            let design = DesignSpec::new(a.n1, a.n2, a.alpha)?;
            let grid = build_profile(a.delta_star, &design, a.omega_max, a.steps)?;
            if let Some(path) = &a.out_csv {
                let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
                grid.emit_csv(f)?;
            }
            if let Some(path) = &a.out_svg {
                let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
                let opts = SvgOptions {
                    title: format!("Broad inference vs EER (delta* = {})", sig6(a.delta_star)),
                    columns: vec![ProfileColumn::BiPValue, ProfileColumn::BiConfLevel],
                    reference_lines: vec![a.alpha, 1.0 - a.alpha],
                };
                grid.emit_svg(&opts, f)?;
            }
            let mut report: Report = vec![
                ("delta_star", Value::Num(a.delta_star)),
                ("n1", Value::Int(a.n1)),
                ("n2", Value::Int(a.n2)),
                ("alpha", Value::Num(a.alpha)),
                ("omega_max", Value::Num(a.omega_max)),
                ("steps", Value::Int(a.steps as u64)),
            ];
            let p_cross = grid.crossing_point(ProfileColumn::BiPValue, a.alpha)?;
            report.push(match p_cross {
                Some(w) => ("p_value_crossing", Value::Num(w)),
                None => ("p_value_crossing", Value::Text("none".into())),
            });
            if let Some(w) = p_cross {
                report.push((
                    "conf_level_at_crossing",
                    Value::Num(broad::bi_confidence_level(&design, w)?),
                ));
            }
            match grid.crossing_point(ProfileColumn::BiConfLevel, a.conf_threshold)? {
                Some(w) => report.push(("conf_level_crossing", Value::Num(w))),
                None => report.push(("conf_level_crossing", Value::Text("none".into()))),
            }
            print_report(&report, format, &mut out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Eer(sub) => {
            let report = cmd_eer(sub)?;
            print_report(&report, format, &mut out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Simulate(a) => {
            let report = cmd_simulate(&a)?;
            print_report(&report, format, &mut out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_bi(a: &BiArgs) -> anyhow::Result<Report> {
    let omega = a.omega;
    let (summary, delta_star, n1, n2) = if let Some(path) = &a.data {
        let (g1, g2, labels) = read_two_group_csv(path, a.arm1_label.as_deref())?;
        let s = TwoSampleSummary::from_groups(&g1, &g2)
            .with_context(|| format!("groups {:?} from {}", labels, path.display()))?;
        (Some(s), s.observed_effect_size(), s.n1(), s.n2())
    } else if let Some(mean1) = a.mean1 {
        let (n1, n2) = (req(a.n1, "--n1")?, req(a.n2, "--n2")?);
        let s = TwoSampleSummary::new(mean1, req(a.mean2, "--mean2")?, req(a.sd, "--sd")?, n1, n2)?;
        (Some(s), s.observed_effect_size(), n1, n2)
    } else if let Some(ds) = a.delta_star {
        (None, ds, req(a.n1, "--n1")?, req(a.n2, "--n2")?)
    } else {
        bail!("provide one input source: --data FILE, summary flags (--mean1 --mean2 --sd --n1 --n2), or --delta-star --n1 --n2");
    };

    let design = DesignSpec::new(n1, n2, a.alpha)?;
    let mut report: Report = vec![
        ("delta_star", Value::Num(delta_star)),
        ("n1", Value::Int(n1)),
        ("n2", Value::Int(n2)),
        ("alpha", Value::Num(a.alpha)),
        ("omega", Value::Num(omega)),
        ("classical_p", Value::Num(broad::bi_p_value(delta_star, &design, 0.0)?)),
        ("bi_p_value", Value::Num(broad::bi_p_value(delta_star, &design, omega)?)),
        ("bi_conf_level", Value::Num(broad::bi_confidence_level(&design, omega)?)),
        ("min_detectable_effect", Value::Num(min_detectable_effect(a.alpha, omega)?)),
    ];
    if omega > 0.0 {
        report.push(("bi_p_value_asymptotic", Value::Num(bi_p_value_asymptotic(delta_star, omega)?)));
    }
    if let Some(s) = summary {
        let full = broad::report(&s, a.alpha, omega)?;
        let (c_lo, c_hi) = broad::bi_confidence_interval(&s, a.alpha, 0.0)?;
        report.push(("classical_interval_low", Value::Num(c_lo)));
        report.push(("classical_interval_high", Value::Num(c_hi)));
        report.push(("bi_interval_low", Value::Num(full.bi_interval_low)));
        report.push(("bi_interval_high", Value::Num(full.bi_interval_high)));
    }
    Ok(report)
}

fn req<T>(v: Option<T>, flag: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow!("missing required flag {flag}"))
}

fn cmd_eer(sub: EerCmd) -> anyhow::Result<Report> {
    match sub {
        EerCmd::Icc { rho } => {
            let b = eer_bound_from_icc(rho)?;
            Ok(vec![
                ("rho", Value::Num(b.rho)),
                ("omega_upper", Value::Num(b.omega_upper)),
            ])
        }
        EerCmd::Table { interaction, error } => Ok(vec![
            ("prop_interaction", Value::Num(interaction)),
            ("prop_error", Value::Num(error)),
            ("eer", Value::Num(eer_from_variance_proportions(interaction, error)?)),
        ]),
        EerCmd::Rcb { data } => {
            let (obs, layout) = read_rcb_csv(&data)?;
            let vc = rcb_variance_components(&obs, &layout)?;
            Ok(vec![
                ("blocks", Value::Int(layout.blocks)),
                ("treatments", Value::Int(layout.treatments)),
                ("reps", Value::Int(layout.reps)),
                ("sigma2_block", Value::Num(vc.sigma2_block)),
                ("sigma2_interaction", Value::Num(vc.sigma2_interaction)),
                ("sigma2_error", Value::Num(vc.sigma2_error)),
                ("eer_hat", Value::Num(vc.eer_hat)),
                ("truncated", Value::Text(vc.truncated.to_string())),
            ])
        }
    }
}

fn cmd_simulate(a: &SimulateArgs) -> anyhow::Result<Report> {
    let params = MixedModelParams::new(a.mu1, a.mu2, a.sigma_e, a.sigma_delta, a.sigma_theta)?;
    let cfg = SimConfig {
        params,
        design: DesignSpec::new(a.n1, a.n2, a.alpha)?,
        n_reps: a.reps,
        seed: a.seed,
    };
    let tally = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| anyhow!("thread pool: {e}"))?
            .install(|| run_tally(&cfg, a.alpha))?,
        None => run_tally(&cfg, a.alpha)?,
    };
    Ok(vec![
        ("seed", Value::Int(a.seed)),
        ("n_reps", Value::Int(tally.n_reps)),
        ("significant_correct", Value::Int(tally.significant_correct)),
        ("significant_wrong", Value::Int(tally.significant_wrong)),
        ("non_significant", Value::Int(tally.non_significant)),
        ("rate_correct", Value::Num(tally.rate_correct())),
        ("rate_wrong", Value::Num(tally.rate_wrong())),
        ("rate_nonsig", Value::Num(tally.rate_nonsig())),
        ("naive_covered", Value::Int(tally.naive_covered)),
        ("bi_covered", Value::Int(tally.bi_covered)),
        ("mean_t", Value::Num(tally.mean_t())),
        ("sd_t", Value::Num(tally.sd_t())),
    ])
}

/// Read a `group,value` CSV into two arms. Arms follow first-appearance
/// order unless `arm1_label` overrides; exactly two labels are required.
fn read_two_group_csv(
    path: &Path,
    arm1_label: Option<&str>,
) -> anyhow::Result<(Vec<f64>, Vec<f64>, [String; 2])> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    {
        let headers = reader.headers()?;
        if headers.len() != 2 || &headers[0] != "group" || &headers[1] != "value" {
            bail!("expected CSV header `group,value`, got `{}`", headers.iter().collect::<Vec<_>>().join(","));
        }
    }
    let mut labels: Vec<String> = Vec::new();
    let mut arms: Vec<Vec<f64>> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        if row.len() != 2 {
            bail!("line {line}: expected 2 fields, got {}", row.len());
        }
        let value: f64 = row[1]
            .trim()
            .parse()
            .map_err(|_| anyhow!("line {line}: non-numeric value `{}`", &row[1]))?;
        let label = row[0].to_string();
        let idx = match labels.iter().position(|l| *l == label) {
            Some(idx) => idx,
            None => {
                if labels.len() == 2 {
                    bail!("more than two group labels: {:?} and `{label}`", labels);
                }
                labels.push(label);
                arms.push(Vec::new());
                labels.len() - 1
            }
        };
        arms[idx].push(value);
    }
    if labels.len() != 2 {
        bail!("expected exactly two group labels, found {:?}", labels);
    }
    if let Some(want) = arm1_label {
        match labels.iter().position(|l| l == want) {
            Some(1) => {
                labels.swap(0, 1);
                arms.swap(0, 1);
            }
            Some(_) => {}
            None => bail!("--arm1-label `{want}` does not appear in the data (labels: {labels:?})"),
        }
    }
    for (l, arm) in labels.iter().zip(&arms) {
        if arm.len() < 2 {
            bail!("group `{l}` has {} observation(s); at least 2 are required", arm.len());
        }
    }
    let g2 = arms.pop().unwrap();
    let g1 = arms.pop().unwrap();
    let l2 = labels.pop().unwrap();
    let l1 = labels.pop().unwrap();
    Ok((g1, g2, [l1, l2]))
}

/// Read a `block,treatment,rep,value` CSV; the balanced layout is inferred
/// from the distinct labels and validated by the estimator.
fn read_rcb_csv(path: &Path) -> anyhow::Result<(Vec<RcbObservation>, RcbLayout)> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    {
        let headers = reader.headers()?;
        let want = ["block", "treatment", "rep", "value"];
        if headers.len() != 4 || headers.iter().zip(want).any(|(h, w)| h != w) {
            bail!("expected CSV header `block,treatment,rep,value`, got `{}`", headers.iter().collect::<Vec<_>>().join(","));
        }
    }
    let mut obs = Vec::new();
    let mut blocks: Vec<String> = Vec::new();
    let mut trts: Vec<String> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        if row.len() != 4 {
            bail!("line {line}: expected 4 fields, got {}", row.len());
        }
        let value: f64 = row[3]
            .trim()
            .parse()
            .map_err(|_| anyhow!("line {line}: non-numeric value `{}`", &row[3]))?;
        if !blocks.iter().any(|b| *b == row[0]) {
            blocks.push(row[0].to_string());
        }
        if !trts.iter().any(|t| *t == row[1]) {
            trts.push(row[1].to_string());
        }
        obs.push(RcbObservation {
            block: row[0].to_string(),
            treatment: row[1].to_string(),
            rep: row[2].to_string(),
            value,
        });
    }
    let (b, t) = (blocks.len() as u64, trts.len() as u64);
    if b == 0 || t == 0 || obs.is_empty() {
        bail!("no data rows in {}", path.display());
    }
    if !(obs.len() as u64).is_multiple_of(b * t) {
        bail!(
            "{} observations cannot form a balanced table over {b} blocks x {t} treatments",
            obs.len()
        );
    }
    let layout = RcbLayout::new(b, t, obs.len() as u64 / (b * t))?;
    Ok((obs, layout))
}
