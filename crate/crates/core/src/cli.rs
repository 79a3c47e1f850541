//! The `ordsurv` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 statistical
//! degeneracy (no events, degenerate split, singular covariance).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use itertools::Itertools;

use crate::agreement::{
    absolute_agreement_curve, ordinal_to_observations, signed_agreement_groups, PairedSample, Scale,
    TiePolicy,
};
use crate::dataio::report::{
    CrossingSummary, CurveSummary, DatasetDigest, GroupDigest, Method, PairCrossing, ResultReport,
    SCHEMA_VERSION,
};
use crate::dataio::{
    parse_grouped_csv, parse_paired_csv, render_step_svg, to_canonical_json, write_report_json, PlotOptions,
};
use crate::error::Error;
use crate::rank::{
    permutation_pvalue, simulate_null_calibration, weighted_rank_test, PermutationMode, WeightScheme,
};
use crate::surv::{detect_crossings, GroupedSample, StepCurve};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ordsurv",
    version,
    about = "Compare ordinal qualitative data with Kaplan-Meier curves and weighted rank tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kaplan-Meier curve per group of a grouped CSV (id,group,score[,event]).
    Km(KmArgs),
    /// Test equality of the group curves of a grouped CSV.
    Compare(CompareArgs),
    /// Survival-agreement analysis of a paired CSV (id,a,b).
    Agreement(AgreementArgs),
    /// Type-I error of the asymptotic test on simulated null data.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Logrank,
    Gehan,
    TaroneWare,
}

impl From<SchemeArg> for WeightScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Logrank => WeightScheme::LogRank,
            SchemeArg::Gehan => WeightScheme::Gehan,
            SchemeArg::TaroneWare => WeightScheme::TaroneWare,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TiesArg {
    Exclude,
    ZeroInBoth,
}

impl From<TiesArg> for TiePolicy {
    fn from(t: TiesArg) -> Self {
        match t {
            TiesArg::Exclude => TiePolicy::ExcludeTies,
            TiesArg::ZeroInBoth => TiePolicy::ZeroInBoth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AgreementMode {
    Absolute,
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PermutationArg {
    None,
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write an SVG figure of the curves.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long = "test", value_enum, default_value_t = SchemeArg::TaroneWare)]
    pub scheme: SchemeArg,
    /// Significance level for the printed summary, in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = PermutationArg::None)]
    pub permutation: PermutationArg,
    /// Monte Carlo permutation replicates.
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for resampling; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KmArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Ordinal scale bounds as min:max.
    #[arg(long)]
    pub scale: Option<Scale>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub scale: Option<Scale>,
    #[command(flatten)]
    pub test: TestArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = AgreementMode::Absolute)]
    pub mode: AgreementMode,
    #[arg(long, value_enum, default_value_t = TiesArg::Exclude)]
    pub ties: TiesArg,
    #[arg(long)]
    pub scale: Option<Scale>,
    #[command(flatten)]
    pub test: TestArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Subjects per group.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long = "test", value_enum, default_value_t = SchemeArg::TaroneWare)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// A failed run: exit code plus the message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoEvents | Error::SingularCovariance | Error::DegenerateSplit(_) => EXIT_DEGENERATE,
        Error::InvalidAlpha(_)
        | Error::InvalidArgument(_)
        | Error::TooLargeForExhaustive(_)
        | Error::TwoGroupsOnly
        | Error::InvalidScale(..) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

type RunResult = Result<(), Failure>;

/// Parses arguments, runs, reports errors on standard error, and returns
/// the exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: Cli) -> RunResult {
    match cli.command {
        Command::Km(args) => run_km(&args),
        Command::Compare(args) => run_compare(&args),
        Command::Agreement(args) => run_agreement(&args),
        Command::Calibrate(args) => run_calibrate(&args),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_DATA, message: format!("cannot read {}: {e}", path.display()) })
}

fn write_output(path: &Path, text: &str) -> RunResult {
    fs::write(path, text)
        .map_err(|e| Failure { code: EXIT_DATA, message: format!("cannot write {}: {e}", path.display()) })
}

fn check_alpha(alpha: f64) -> RunResult {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_test_args(t: &TestArgs) -> RunResult {
    check_alpha(t.alpha)?;
    if t.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    if t.threads == Some(0) {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    Ok(())
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Failure::usage(format!("cannot start {n} threads: {e}"))),
    }
}

fn grouped_input(path: &Path, scale: Option<Scale>) -> Result<(GroupedSample, f64), Failure> {
    let records = parse_grouped_csv(&read_input(path)?)?;
    let groups = ordinal_to_observations(&records, scale)?;
    Ok((groups.sample, groups.offset))
}

fn paired_input(path: &Path, scale: Option<Scale>) -> Result<PairedSample, Failure> {
    let parsed = parse_paired_csv(&read_input(path)?)?;
    Ok(PairedSample::new(parsed.records().to_vec(), scale)?)
}

fn labelled_curves(sample: &GroupedSample) -> Result<Vec<(String, StepCurve)>, Failure> {
    Ok(sample.labels().iter().cloned().zip(sample.curves()?).collect())
}

fn summaries(curves: &[(String, StepCurve)], offset: f64) -> Vec<CurveSummary> {
    curves.iter().map(|(label, c)| CurveSummary::new(label.clone(), c, offset)).collect()
}

/// Crossing screen over every pair of curves that have at least one jump.
fn crossing_screen(curves: &[(String, StepCurve)]) -> Result<CrossingSummary, Failure> {
    let mut pairs = Vec::new();
    for ((l1, c1), (l2, c2)) in curves.iter().tuple_combinations() {
        if c1.is_empty() || c2.is_empty() {
            continue;
        }
        let r = detect_crossings(c1, c2)?;
        pairs.push(PairCrossing {
            first: l1.clone(),
            second: l2.clone(),
            curves_cross: r.curves_cross,
            crossings: r.crossings,
        });
    }
    Ok(CrossingSummary::new(pairs))
}

fn emit(
    report: &ResultReport,
    curves: &[(String, StepCurve)],
    offset: f64,
    out: &OutputArgs,
    default_title: &str,
    x_label: &str,
    y_label: &str,
) -> RunResult {
    let json = write_report_json(report);
    if let Some(path) = &out.svg {
        let opts = PlotOptions {
            title: out.title.clone().unwrap_or_else(|| default_title.to_owned()),
            x_label: x_label.to_owned(),
            y_label: y_label.to_owned(),
            x_offset: offset,
            ..PlotOptions::default()
        };
        write_output(path, &render_step_svg(curves, &opts)?)?;
    }
    match &out.json {
        Some(path) => {
            write_output(path, &json)?;
            print!("{}", human_summary(report));
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn human_summary(report: &ResultReport) -> String {
    let mut s = String::new();
    for g in &report.dataset.groups {
        s.push_str(&format!("group {}: n = {}, events = {}\n", g.label, g.n, g.events));
    }
    if let Some(ties) = report.dataset.ties {
        s.push_str(&format!("tied pairs: {ties}\n"));
    }
    if let Some(t) = &report.test {
        s.push_str(&format!(
            "{} test: chi-square = {:.5}, df = {}, p = {:.5}",
            t.scheme, t.statistic, t.df, t.p_value
        ));
        if let Some(alpha) = report.method.alpha {
            let verdict = if t.p_value < alpha { "significant" } else { "not significant" };
            s.push_str(&format!(" ({verdict} at alpha = {alpha})"));
        }
        s.push('\n');
    }
    if let Some(p) = &report.permutation {
        s.push_str(&format!(
            "permutation p = {:.5} ({} of {} reassignments)\n",
            p.p_value, p.extreme, p.assignments
        ));
    }
    if let Some(c) = &report.crossings {
        s.push_str(&c.note);
        s.push('\n');
    }
    s
}

fn permutation_mode(arg: PermutationArg) -> Option<PermutationMode> {
    match arg {
        PermutationArg::None => None,
        PermutationArg::Exhaustive => Some(PermutationMode::Exhaustive),
        PermutationArg::MonteCarlo => Some(PermutationMode::MonteCarlo),
    }
}

/// Builds the report for a rank-test comparison of `sample`.
fn comparison_report(
    sample: &GroupedSample,
    curves: &[(String, StepCurve)],
    offset: f64,
    method: Method,
    t: &TestArgs,
) -> Result<ResultReport, Failure> {
    let scheme = WeightScheme::from(t.scheme);
    let test = weighted_rank_test(sample, scheme)?;
    let permutation = match permutation_mode(t.permutation) {
        None => None,
        Some(mode) => {
            Some(with_threads(t.threads, || permutation_pvalue(sample, scheme, mode, t.reps, t.seed))??)
        }
    };
    Ok(ResultReport {
        schema_version: SCHEMA_VERSION.into(),
        method,
        dataset: DatasetDigest::of(sample),
        curves: summaries(curves, offset),
        test: Some(test),
        permutation,
        crossings: Some(crossing_screen(curves)?),
    })
}

pub fn run_km(args: &KmArgs) -> RunResult {
    let (sample, offset) = grouped_input(&args.input, args.scale)?;
    let curves = labelled_curves(&sample)?;
    let report = ResultReport {
        schema_version: SCHEMA_VERSION.into(),
        method: Method {
            command: "km".into(),
            construction: "grouped".into(),
            scheme: None,
            tie_policy: None,
            alpha: None,
            scale: args.scale,
        },
        dataset: DatasetDigest::of(&sample),
        curves: summaries(&curves, offset),
        test: None,
        permutation: None,
        crossings: None,
    };
    emit(
        &report,
        &curves,
        offset,
        &args.output,
        "Kaplan-Meier curves",
        "score",
        "proportion with a higher score",
    )
}

pub fn run_compare(args: &CompareArgs) -> RunResult {
    check_test_args(&args.test)?;
    let (sample, offset) = grouped_input(&args.input, args.scale)?;
    if sample.group_count() < 2 {
        return Err(Error::NeedTwoGroups.into());
    }
    let curves = labelled_curves(&sample)?;
    let method = Method {
        command: "compare".into(),
        construction: "grouped".into(),
        scheme: Some(args.test.scheme.into()),
        tie_policy: None,
        alpha: Some(args.test.alpha),
        scale: args.scale,
    };
    let report = comparison_report(&sample, &curves, offset, method, &args.test)?;
    emit(
        &report,
        &curves,
        offset,
        &args.output,
        "Survival curves by group",
        "score",
        "proportion with a higher score",
    )
}

pub fn run_agreement(args: &AgreementArgs) -> RunResult {
    check_test_args(&args.test)?;
    let pairs = paired_input(&args.input, args.scale)?;
    let policy = TiePolicy::from(args.ties);
    let ties = pairs.records().iter().filter(|r| r.a == r.b).count();
    match args.mode {
        AgreementMode::Absolute => {
            let curve = absolute_agreement_curve(&pairs)?;
            let label = "|A-B|".to_owned();
            let curves = vec![(label.clone(), curve)];
            let report = ResultReport {
                schema_version: SCHEMA_VERSION.into(),
                method: Method {
                    command: "agreement".into(),
                    construction: "absolute".into(),
                    scheme: None,
                    tie_policy: None,
                    alpha: None,
                    scale: args.scale,
                },
                dataset: DatasetDigest {
                    groups: vec![GroupDigest { label, n: pairs.len(), events: pairs.len() }],
                    ties: Some(ties),
                },
                curves: summaries(&curves, 0.0),
                test: None,
                permutation: None,
                crossings: None,
            };
            emit(
                &report,
                &curves,
                0.0,
                &args.output,
                "Survival-agreement plot",
                "absolute difference",
                "proportion of discordant pairs",
            )
        }
        AgreementMode::Signed => {
            let split = signed_agreement_groups(&pairs, policy)?;
            let curves = labelled_curves(&split.groups)?;
            let method = Method {
                command: "agreement".into(),
                construction: "signed".into(),
                scheme: Some(args.test.scheme.into()),
                tie_policy: Some(policy),
                alpha: Some(args.test.alpha),
                scale: args.scale,
            };
            let mut report = comparison_report(&split.groups, &curves, 0.0, method, &args.test)?;
            report.dataset.ties = Some(split.ties);
            emit(
                &report,
                &curves,
                0.0,
                &args.output,
                "Signed survival-agreement curves",
                "difference",
                "proportion of discordant pairs",
            )
        }
    }
}

pub fn run_calibrate(args: &CalibrateArgs) -> RunResult {
    check_alpha(args.alpha)?;
    if args.threads == Some(0) {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    let res = with_threads(args.threads, || {
        simulate_null_calibration(args.n, args.reps, args.scheme.into(), args.alpha, args.seed)
    })??;
    let json = to_canonical_json(&res);
    match &args.json {
        Some(path) => {
            write_output(path, &json)?;
            println!(
                "{} rejection rate at alpha = {}: {:.4} +/- {:.4} ({} of {})",
                res.scheme, res.alpha, res.rejection_rate, res.standard_error, res.rejections, res.reps
            );
        }
        None => print!("{json}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::NoEvents), EXIT_DEGENERATE);
        assert_eq!(exit_code(&Error::DegenerateSplit("A<B")), EXIT_DEGENERATE);
        assert_eq!(exit_code(&Error::NeedTwoGroups), EXIT_DATA);
        assert_eq!(exit_code(&Error::BadNumber(2)), EXIT_DATA);
        assert_eq!(exit_code(&Error::InvalidAlpha(2.0)), EXIT_USAGE);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["ordsurv", "calibrate", "--alpha", "1.5"]), EXIT_USAGE);
        assert_eq!(main_with_args(["ordsurv", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_with_args(["ordsurv", "compare"]), EXIT_USAGE);
        assert_eq!(main_with_args(["ordsurv", "km", "--input", "x.csv", "--scale", "5:1"]), EXIT_USAGE);
    }

    #[test]
    fn missing_file_is_a_data_error() {
        assert_eq!(main_with_args(["ordsurv", "km", "--input", "/nonexistent/ordsurv.csv"]), EXIT_DATA);
    }
}
