//! The five subcommand implementations. Each command computes its entire
//! output in memory first and only then touches the output path, so a
//! failure never leaves a partial file behind.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qspois::{
    format_significant, generate_two_group, one_group_decide_eb, one_group_decide_tuned,
    posterior_kappa_mean_closed_form, posterior_kappa_mean_gh_quadrature,
    posterior_kappa_mean_quadrature, posterior_theta_mean, risk_ratio_conventions,
    risk_ratio_upper_bound, run_experiment, run_rule_comparison, run_tau_sweep,
    write_comparison_csv, write_sweep_wide_csv, BuiltPrior, ComparisonCell, ComparisonRow,
    ConjugateFamily, CoreError, DecisionOutcome, ExperimentConfig, ExperimentReport,
    GeneratedDataset, ReplicationFailure, Result as CoreResult, RuleSummary, ShrinkageEstimate,
    ShrinkageEvidence, StudyRule, TauHatConfig, TauPolicy, TauSweepCell, TwoGroupModel,
};

use crate::{
    numeric, usage_from, AnalyzeArgs, BoundsArgs, CliError, ExperimentArgs, PosteriorCurveArgs,
    SimulateArgs,
};
use crate::input::{read_count_table, CountTable};

/// Significant digits used for every floating-point field in CSV output.
const CSV_DIGITS: usize = 6;

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|error| CliError::Io(format!("cannot write {}: {error}", path.display())))
}

fn render_failure(error: csv::Error) -> CliError {
    CliError::Io(format!("cannot render output: {error}"))
}

fn require_flag_positive(flag: &str, value: f64) -> Result<(), CliError> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(CliError::usage(format!(
            "{flag} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

fn require_flag_tau(flag: &str, tau: f64) -> Result<(), CliError> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(CliError::usage(format!(
            "{flag} must lie in (0, 1], got {tau}"
        )));
    }
    Ok(())
}

/// Builds the evidence cache for a configured prior; failures here mean the
/// hyperparameters were unusable, which is a usage error.
fn evidence_for(prior: &BuiltPrior, alpha: f64) -> Result<ShrinkageEvidence, CliError> {
    match prior {
        BuiltPrior::GlobalLocal(prior) => ShrinkageEvidence::new(prior, alpha),
        BuiltPrior::GaussHypergeometric(gh) => {
            ShrinkageEvidence::from_conjugate(ConjugateFamily::GaussHypergeometric(*gh), alpha)
        }
    }
    .map_err(usage_from)
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    require_flag_positive("--alpha", args.alpha)?;
    require_flag_positive("--delta", args.delta)?;
    let prior = args.prior.to_config()?.build().map_err(usage_from)?;
    let evidence = evidence_for(&prior, args.alpha)?;
    let table = read_count_table(&args.input)?;

    let (tau, outcomes) = match (args.tau_mode.tau, args.tau_mode.eb_threshold) {
        (Some(tau), None) => {
            require_flag_tau("--tau", tau)?;
            let outcomes = one_group_decide_tuned(&evidence, args.delta, tau, &table.counts, None)
                .map_err(numeric)?;
            (tau, outcomes)
        }
        (None, Some(k)) => {
            let config = TauHatConfig::new(k).map_err(usage_from)?;
            let decision = one_group_decide_eb(&evidence, args.delta, &table.counts, &config, None)
                .map_err(numeric)?;
            (decision.tau_hat, decision.outcomes)
        }
        _ => unreachable!("clap enforces exactly one tau mode"),
    };

    let buffer = render_analysis_csv(&outcomes, &table, args.alpha)?;
    write_output(&args.output, &buffer)?;
    println!(
        "analyzed {} counts at tau = {}; wrote {}",
        outcomes.len(),
        format_significant(tau, CSV_DIGITS),
        args.output.display()
    );
    Ok(())
}

fn render_analysis_csv(
    outcomes: &[DecisionOutcome],
    table: &CountTable,
    alpha: f64,
) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index", "count", "e_theta", "evidence", "reject"];
    if table.labels.is_some() {
        header.push("region");
    }
    writer.write_record(&header).map_err(render_failure)?;
    for outcome in outcomes {
        let e_theta = posterior_theta_mean(outcome.evidence, outcome.count, alpha);
        let mut record = vec![
            outcome.index.to_string(),
            outcome.count.to_string(),
            format_significant(e_theta, CSV_DIGITS),
            format_significant(outcome.evidence, CSV_DIGITS),
            outcome.reject.to_string(),
        ];
        if let Some(labels) = &table.labels {
            record.push(labels[outcome.index].clone());
        }
        writer.write_record(&record).map_err(render_failure)?;
    }
    writer
        .into_inner()
        .map_err(|error| CliError::Io(format!("cannot render output: {error}")))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let model =
        TwoGroupModel::new(args.alpha, args.beta, args.delta, args.p).map_err(usage_from)?;
    if args.n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let dataset: GeneratedDataset =
        generate_two_group(&model, args.n as usize, args.seed).map_err(numeric)?;
    let mut buffer = Vec::new();
    dataset.write_csv(&mut buffer).map_err(numeric)?;
    write_output(&args.output, &buffer)?;
    println!(
        "wrote {} simulated counts to {}",
        dataset.counts.len(),
        args.output.display()
    );
    Ok(())
}

/// The nine-row reference grid for the risk-ratio ceiling, with the value
/// published alongside each row. The computed conventions are reported next
/// to the published number so disagreements stay visible instead of being
/// reconciled away.
const REFERENCE_GRID: [(f64, f64, f64, f64); 9] = [
    (1.1, 1.1, 0.5, 1.058),
    (1.2, 1.1, 0.5, 1.085),
    (1.3, 1.2, 0.5, 1.113),
    (1.5, 1.5, 1.0, 1.241),
    (1.2, 1.4, 1.0, 1.173),
    (1.3, 1.3, 1.0, 1.182),
    (1.3, 1.2, 2.0, 1.119),
    (1.4, 1.3, 2.0, 1.225),
    (1.2, 1.4, 2.0, 1.192),
];

pub fn bounds(args: &BoundsArgs) -> Result<(), CliError> {
    let grid: Vec<(f64, f64, f64)> = match &args.grid {
        Some(path) => read_bound_grid(path)?,
        None => REFERENCE_GRID
            .iter()
            .map(|&(a, alpha, delta, _)| (a, alpha, delta))
            .collect(),
    };

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "a",
            "alpha",
            "delta",
            "cutoff",
            "discrete",
            "continuous",
            "restricted",
            "published_reference",
            "valid",
        ])
        .map_err(render_failure)?;
    for &(a, alpha, delta) in &grid {
        let conventions = risk_ratio_conventions(a, alpha, delta).map_err(numeric)?;
        let report = risk_ratio_upper_bound(a, alpha, delta).map_err(numeric)?;
        let published = REFERENCE_GRID
            .iter()
            .find(|&&(ga, gal, gd, _)| (ga, gal, gd) == (a, alpha, delta))
            .map(|&(_, _, _, value)| format_significant(value, CSV_DIGITS))
            .unwrap_or_default();
        writer
            .write_record([
                format_significant(a, CSV_DIGITS),
                format_significant(alpha, CSV_DIGITS),
                format_significant(delta, CSV_DIGITS),
                format_significant(conventions.cutoff, CSV_DIGITS),
                format_significant(conventions.discrete, CSV_DIGITS),
                format_significant(conventions.continuous, CSV_DIGITS),
                format_significant(conventions.restricted, CSV_DIGITS),
                published,
                report.valid.to_string(),
            ])
            .map_err(render_failure)?;
    }
    let buffer = writer
        .into_inner()
        .map_err(|error| CliError::Io(format!("cannot render output: {error}")))?;
    write_output(&args.output, &buffer)?;
    println!(
        "wrote {} bound rows to {}",
        grid.len(),
        args.output.display()
    );
    Ok(())
}

fn read_bound_grid(path: &Path) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|error| CliError::Io(format!("cannot read {}: {error}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());
    let mut grid = Vec::new();
    let usage = |line: usize, message: String| {
        CliError::Usage(format!("{}: row {line}: {message}", path.display()))
    };
    for (row, record) in reader.records().enumerate() {
        let line = row + 1;
        let record = record.map_err(|error| usage(line, error.to_string()))?;
        if row == 0
            && record
                .get(0)
                .is_some_and(|field| field.eq_ignore_ascii_case("a"))
        {
            continue;
        }
        if record.len() != 3 {
            return Err(usage(
                line,
                format!("expected 3 columns (a,alpha,delta), found {}", record.len()),
            ));
        }
        let mut values = [0.0_f64; 3];
        for (slot, (value, name)) in values
            .iter_mut()
            .zip(record.iter().zip(["a", "alpha", "delta"]))
        {
            *slot = value
                .parse()
                .map_err(|_| usage(line, format!("cannot parse {name} '{value}' as a number")))?;
            if !(*slot > 0.0 && slot.is_finite()) {
                return Err(usage(line, format!("{name} must be positive, got {slot}")));
            }
        }
        grid.push((values[0], values[1], values[2]));
    }
    Ok(grid)
}

/// A declarative study: the shared base configuration plus optional
/// comparison and sweep sections. A file with neither section runs the base
/// configuration once and writes its per-rule summary.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    /// Model, prior, rules, replication count, and seed shared by all cells.
    pub base: ExperimentConfig,
    /// Re-runs the configured rules over a grid of (p, beta) cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonSection>,
    /// Sweeps the tuned rule over an (n, p, policy) grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonSection {
    pub cells: Vec<ComparisonCell>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_values: Vec<u64>,
    pub p_values: Vec<f64>,
    pub policies: Vec<TauPolicy>,
}

/// Everything one experiment run produced, serialized at full precision.
/// Wall-clock runtime is deliberately excluded so identical configs produce
/// byte-identical reports.
#[derive(Serialize)]
struct RunJson<'a> {
    config: &'a ExperimentFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<&'a [ComparisonRow]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<&'a [TauSweepCell]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<BareRunJson<'a>>,
}

#[derive(Serialize)]
struct BareRunJson<'a> {
    summaries: &'a [RuleSummary],
    failures: &'a [ReplicationFailure],
    completed_replications: u64,
}

pub fn experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let raw = fs::read_to_string(&args.config).map_err(|error| {
        CliError::Io(format!("cannot read {}: {error}", args.config.display()))
    })?;
    let file: ExperimentFile = toml::from_str(&raw).map_err(|error| {
        CliError::Usage(format!(
            "invalid experiment config {}: {error}",
            args.config.display()
        ))
    })?;
    validate_experiment_file(&file)?;

    if args.check {
        println!("config OK: {}", describe_plan(&file));
        return Ok(());
    }

    // run everything before writing anything
    let comparison_rows = file
        .comparison
        .as_ref()
        .map(|section| run_rule_comparison(&file.base, &section.cells))
        .transpose()
        .map_err(numeric)?;
    let sweep_cells = file
        .sweep
        .as_ref()
        .map(|section| {
            run_tau_sweep(
                &file.base,
                &section.n_values,
                &section.p_values,
                &section.policies,
            )
        })
        .transpose()
        .map_err(numeric)?;
    let bare_report: Option<ExperimentReport> = (comparison_rows.is_none()
        && sweep_cells.is_none())
    .then(|| run_experiment(&file.base))
    .transpose()
    .map_err(numeric)?;

    let mut outputs: Vec<(&str, Vec<u8>)> = Vec::new();
    if let Some(rows) = &comparison_rows {
        let mut buffer = Vec::new();
        write_comparison_csv(rows, &mut buffer).map_err(numeric)?;
        outputs.push(("comparison.csv", buffer));
    }
    if let Some(cells) = &sweep_cells {
        let mut buffer = Vec::new();
        write_sweep_wide_csv(cells, &mut buffer).map_err(numeric)?;
        outputs.push(("sweep.csv", buffer));
    }
    if let Some(report) = &bare_report {
        outputs.push(("summary.csv", render_summary_csv(&report.summaries)?));
    }
    let report_json = RunJson {
        config: &file,
        comparison: comparison_rows.as_deref(),
        sweep: sweep_cells.as_deref(),
        run: bare_report.as_ref().map(|report| BareRunJson {
            summaries: &report.summaries,
            failures: &report.failures,
            completed_replications: report.completed_replications,
        }),
    };
    let json = serde_json::to_vec_pretty(&report_json)
        .map_err(|error| CliError::Io(format!("cannot render report.json: {error}")))?;
    outputs.push(("report.json", json));

    fs::create_dir_all(&args.out_dir).map_err(|error| {
        CliError::Io(format!("cannot create {}: {error}", args.out_dir.display()))
    })?;
    for (name, bytes) in &outputs {
        let path = args.out_dir.join(name);
        write_output(&path, bytes)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn validate_experiment_file(file: &ExperimentFile) -> Result<(), CliError> {
    file.base.validate().map_err(usage_from)?;
    if let Some(section) = &file.comparison {
        if section.cells.is_empty() {
            return Err(CliError::usage(
                "comparison.cells must list at least one (p, beta) cell",
            ));
        }
    }
    if let Some(section) = &file.sweep {
        if section.n_values.is_empty()
            || section.p_values.is_empty()
            || section.policies.is_empty()
        {
            return Err(CliError::usage(
                "sweep.n_values, sweep.p_values, and sweep.policies must all be non-empty",
            ));
        }
        if !file.base.rules.contains(&StudyRule::OneGroupTuned) {
            return Err(CliError::usage(
                "the sweep tracks the ONE_GROUP_TUNED rule; add it to base.rules",
            ));
        }
    }
    Ok(())
}

fn describe_plan(file: &ExperimentFile) -> String {
    let mut parts = Vec::new();
    if let Some(section) = &file.comparison {
        parts.push(format!("{} comparison cells", section.cells.len()));
    }
    if let Some(section) = &file.sweep {
        parts.push(format!(
            "{} sweep cells",
            section.n_values.len() * section.p_values.len() * section.policies.len()
        ));
    }
    if parts.is_empty() {
        parts.push("1 bare run".to_string());
    }
    format!(
        "{}; rules: {}, replications: {}",
        parts.join(", "),
        file.base.rules.len(),
        file.base.replications
    )
}

fn render_summary_csv(summaries: &[RuleSummary]) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "rule",
            "misclassification",
            "misclassification_se",
            "type1",
            "type1_se",
            "type2",
            "type2_se",
            "estimated_bayes_risk",
        ])
        .map_err(render_failure)?;
    for summary in summaries {
        writer
            .write_record([
                summary.rule.to_string(),
                format_significant(summary.mean_misclassification, CSV_DIGITS),
                format_significant(summary.mc_standard_error, CSV_DIGITS),
                format_significant(summary.mean_type1, CSV_DIGITS),
                format_significant(summary.type1_standard_error, CSV_DIGITS),
                format_significant(summary.mean_type2, CSV_DIGITS),
                format_significant(summary.type2_standard_error, CSV_DIGITS),
                format_significant(summary.estimated_bayes_risk, CSV_DIGITS),
            ])
            .map_err(render_failure)?;
    }
    writer
        .into_inner()
        .map_err(|error| CliError::Io(format!("cannot render output: {error}")))
}

pub fn posterior_curve(args: &PosteriorCurveArgs) -> Result<(), CliError> {
    require_flag_positive("--alpha", args.alpha)?;
    require_flag_tau("--tau", args.tau)?;
    let prior = args.prior.to_config()?.build().map_err(usage_from)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["y", "e_kappa", "e_one_minus_kappa", "e_theta", "method"])
        .map_err(render_failure)?;
    for y in 0..=args.y_max {
        let estimate = shrinkage_estimate(&prior, args.alpha, y, args.tau).map_err(numeric)?;
        writer
            .write_record([
                y.to_string(),
                format_significant(estimate.e_kappa, CSV_DIGITS),
                format_significant(estimate.e_one_minus_kappa, CSV_DIGITS),
                format_significant(estimate.e_theta, CSV_DIGITS),
                estimate.method.to_string(),
            ])
            .map_err(render_failure)?;
    }
    let buffer = writer
        .into_inner()
        .map_err(|error| CliError::Io(format!("cannot render output: {error}")))?;
    write_output(&args.output, &buffer)?;
    println!(
        "traced y = 0..={} to {}",
        args.y_max,
        args.output.display()
    );
    Ok(())
}

/// Closed form where the family has one, falling back to quadrature when the
/// closed form reports non-convergence; direct quadrature otherwise. This is
/// the same route-selection policy the decision rules use internally.
fn shrinkage_estimate(
    prior: &BuiltPrior,
    alpha: f64,
    y: u64,
    tau: f64,
) -> CoreResult<ShrinkageEstimate> {
    match prior {
        BuiltPrior::GaussHypergeometric(gh) => {
            let family = ConjugateFamily::GaussHypergeometric(*gh);
            match posterior_kappa_mean_closed_form(&family, alpha, y, tau) {
                Ok(estimate) => Ok(estimate),
                Err(CoreError::NonConvergence { .. }) => {
                    posterior_kappa_mean_gh_quadrature(gh, alpha, y, tau)
                }
                Err(error) => Err(error),
            }
        }
        BuiltPrior::GlobalLocal(local) => match ConjugateFamily::from_global_local(local) {
            Ok(family) => match posterior_kappa_mean_closed_form(&family, alpha, y, tau) {
                Ok(estimate) => Ok(estimate),
                Err(CoreError::NonConvergence { .. }) => {
                    posterior_kappa_mean_quadrature(local, alpha, y, tau)
                }
                Err(error) => Err(error),
            },
            Err(_) => posterior_kappa_mean_quadrature(local, alpha, y, tau),
        },
    }
}
