//! Simulation studies comparing the two-group Bayes-oracle rule with the
//! one-group shrinkage rules on synthetic quasi-sparse count data.
//!
//! A study is described declaratively by an [`ExperimentConfig`]: the
//! two-group sampling model, the number of coordinates and replications, the
//! one-group prior, a [`TauPolicy`] mapping the signal proportion (or the
//! observed counts) to the global shrinkage scale τ, and the set of
//! [`StudyRule`]s to evaluate. [`run_experiment`] executes the replications
//! in parallel and reduces them to per-rule error summaries; higher-level
//! drivers sweep τ policies over (n, p) grids ([`run_tau_sweep`]), compare
//! rules across (p, β) settings ([`run_rule_comparison`]), and track the
//! Monte-Carlo risk ratio against its closed-form ceiling
//! ([`risk_ratio_track`]).
//!
//! Reports are bitwise reproducible: replication `r` draws from the RNG
//! substream keyed by `(base_seed, r)`, parallel results are collected back
//! into replication order, and all reductions use pairwise summation, so the
//! numbers depend only on the configuration — never on thread count or
//! scheduling.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{risk_ratio_upper_bound, BoundReport};
use crate::error::{require_positive, require_unit_open, CoreError, Result};
use crate::posterior::ConjugateFamily;
use crate::priors::{BuiltPrior, PriorConfig, PriorFamilyConfig};
use crate::rules::{
    one_group_decide_eb, one_group_decide_tuned, oracle_decide, tau_hat, DecisionOutcome,
    ShrinkageEvidence, TauHatConfig,
};
use crate::samplers::{generate_two_group, replication_seed, TwoGroupModel};

/// Largest tolerated fraction of failed replications. Failures are recorded
/// and excluded from the summaries; past this fraction the whole experiment
/// is declared unusable instead.
pub const FAILURE_BUDGET: f64 = 0.01;

/// Policy mapping the signal proportion `p` (and, for the empirical-Bayes
/// variant, the observed counts) to the global shrinkage scale τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TauPolicy {
    /// A constant τ supplied directly.
    Fixed { tau: f64 },
    /// τ = p².
    PSquared,
    /// τ = p/2.
    HalfP,
    /// τ = p.
    EqualP,
    /// τ = 2p, clamped to 1.
    TwiceP,
    /// τ = √p.
    SqrtP,
    /// τ = τ̂: the proportion of counts at or above `k`, floored at `1/n`.
    Eb { k: u64 },
}

/// Validates `p` for the policies that consume it.
fn checked_p(p: f64) -> Result<f64> {
    require_unit_open("TauPolicy::resolve", "p", p)?;
    Ok(p)
}

impl TauPolicy {
    /// Resolves the policy to a concrete τ for one dataset.
    pub fn resolve(&self, p: f64, counts: &[u64]) -> Result<f64> {
        let raw = match *self {
            TauPolicy::Fixed { tau } => {
                if !(tau > 0.0 && tau <= 1.0) {
                    return Err(CoreError::domain(
                        "TauPolicy::resolve",
                        format!("fixed tau must lie in (0, 1], got {tau}"),
                    ));
                }
                return Ok(tau);
            }
            TauPolicy::Eb { k } => return tau_hat(counts, &TauHatConfig::new(k)?),
            TauPolicy::PSquared => checked_p(p)? * p,
            TauPolicy::HalfP => 0.5 * checked_p(p)?,
            TauPolicy::EqualP => checked_p(p)?,
            TauPolicy::TwiceP => 2.0 * checked_p(p)?,
            TauPolicy::SqrtP => checked_p(p)?.sqrt(),
        };
        Ok(raw.min(1.0))
    }
}

impl fmt::Display for TauPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TauPolicy::Fixed { tau } => write!(f, "FIXED({tau})"),
            TauPolicy::PSquared => f.write_str("P_SQUARED"),
            TauPolicy::HalfP => f.write_str("HALF_P"),
            TauPolicy::EqualP => f.write_str("EQUAL_P"),
            TauPolicy::TwiceP => f.write_str("TWICE_P"),
            TauPolicy::SqrtP => f.write_str("SQRT_P"),
            TauPolicy::Eb { k } => write!(f, "EB({k})"),
        }
    }
}

impl FromStr for TauPolicy {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        const CONTEXT: &str = "TauPolicy::from_str";
        match s {
            "P_SQUARED" => return Ok(TauPolicy::PSquared),
            "HALF_P" => return Ok(TauPolicy::HalfP),
            "EQUAL_P" => return Ok(TauPolicy::EqualP),
            "TWICE_P" => return Ok(TauPolicy::TwiceP),
            "SQRT_P" => return Ok(TauPolicy::SqrtP),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("FIXED(").and_then(|r| r.strip_suffix(')')) {
            let tau: f64 = inner.trim().parse().map_err(|_| {
                CoreError::domain(CONTEXT, format!("cannot parse '{inner}' as a tau value"))
            })?;
            return Ok(TauPolicy::Fixed { tau });
        }
        if let Some(inner) = s.strip_prefix("EB(").and_then(|r| r.strip_suffix(')')) {
            let k: u64 = inner.trim().parse().map_err(|_| {
                CoreError::domain(
                    CONTEXT,
                    format!("cannot parse '{inner}' as a count threshold"),
                )
            })?;
            return Ok(TauPolicy::Eb { k });
        }
        Err(CoreError::domain(
            CONTEXT,
            format!(
                "unknown tau policy '{s}'; expected FIXED(tau), P_SQUARED, HALF_P, \
                 EQUAL_P, TWICE_P, SQRT_P, or EB(k)"
            ),
        ))
    }
}

/// A decision rule included in a simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StudyRule {
    /// Two-group Bayes rule using the true mixture parameters.
    Oracle,
    /// One-group shrinkage rule with τ set by the study's policy.
    OneGroupTuned,
    /// One-group shrinkage rule with τ̂ estimated from the counts.
    OneGroupEb,
    /// One-group rule under the κ-space Gauss-hypergeometric prior.
    Gh,
}

impl fmt::Display for StudyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyRule::Oracle => "ORACLE",
            StudyRule::OneGroupTuned => "ONE_GROUP_TUNED",
            StudyRule::OneGroupEb => "ONE_GROUP_EB",
            StudyRule::Gh => "GH",
        })
    }
}

impl FromStr for StudyRule {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ORACLE" => Ok(StudyRule::Oracle),
            "ONE_GROUP_TUNED" => Ok(StudyRule::OneGroupTuned),
            "ONE_GROUP_EB" => Ok(StudyRule::OneGroupEb),
            "GH" => Ok(StudyRule::Gh),
            _ => Err(CoreError::domain(
                "StudyRule::from_str",
                format!(
                    "unknown rule '{s}'; expected ORACLE, ONE_GROUP_TUNED, ONE_GROUP_EB, or GH"
                ),
            )),
        }
    }
}

/// Declarative description of one simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Two-group data-generating model.
    pub model: TwoGroupModel,
    /// Coordinates per replication.
    pub n: u64,
    /// Number of independent replications.
    pub replications: u64,
    /// Study-level seed; replication `r` draws from the substream keyed by
    /// `(base_seed, r)`.
    pub base_seed: u64,
    /// One-group prior used by the tuned and empirical-Bayes rules.
    pub prior: PriorConfig,
    /// Shape α of the gamma likelihood layer assumed by the one-group rules.
    pub alpha_prior: f64,
    /// Policy choosing τ for the tuned and GH rules.
    pub tau_policy: TauPolicy,
    /// Rules to evaluate, in report order.
    pub rules: Vec<StudyRule>,
    /// κ-space prior for the GH rule; `None` selects a1 = a2 = 1/2, γ = 1.
    #[serde(default)]
    pub gh_prior: Option<PriorConfig>,
}

impl ExperimentConfig {
    /// Checks every field, including re-validating a hand-built model.
    pub fn validate(&self) -> Result<()> {
        const CONTEXT: &str = "ExperimentConfig";
        TwoGroupModel::new(
            self.model.alpha,
            self.model.beta,
            self.model.delta,
            self.model.p,
        )?;
        if self.n == 0 {
            return Err(CoreError::domain(CONTEXT, "n must be at least 1"));
        }
        if self.replications == 0 {
            return Err(CoreError::domain(CONTEXT, "replications must be at least 1"));
        }
        require_positive(CONTEXT, "alpha_prior", self.alpha_prior)?;
        if self.rules.is_empty() {
            return Err(CoreError::domain(CONTEXT, "at least one rule must be requested"));
        }
        for (i, rule) in self.rules.iter().enumerate() {
            if self.rules[..i].contains(rule) {
                return Err(CoreError::domain(CONTEXT, format!("duplicate rule {rule}")));
            }
        }
        match self.tau_policy {
            TauPolicy::Fixed { tau } if !(tau > 0.0 && tau <= 1.0) => {
                return Err(CoreError::domain(
                    CONTEXT,
                    format!("fixed tau must lie in (0, 1], got {tau}"),
                ));
            }
            TauPolicy::Eb { k: 0 } => {
                return Err(CoreError::domain(
                    CONTEXT,
                    "the EB policy's count threshold k must be at least 1",
                ));
            }
            _ => {}
        }
        self.prior.build()?;
        if let Some(gh) = &self.gh_prior {
            if gh.family != PriorFamilyConfig::Gh {
                return Err(CoreError::domain(CONTEXT, "gh_prior must use the gh family"));
            }
            gh.build()?;
        }
        Ok(())
    }
}

/// Monte-Carlo summary of one rule across the completed replications.
///
/// The type-I rate of a replication is the proportion of true nulls falsely
/// rejected and the type-II rate the proportion of true signals missed; a
/// replication with an empty class contributes zero for that class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub rule: StudyRule,
    pub mean_misclassification: f64,
    /// Monte-Carlo standard error of the misclassification mean.
    pub mc_standard_error: f64,
    pub mean_type1: f64,
    pub type1_standard_error: f64,
    pub mean_type2: f64,
    pub type2_standard_error: f64,
    /// `n ×` mean misclassification: the additive-risk estimate.
    pub estimated_bayes_risk: f64,
}

/// A replication that aborted with a numeric error; it is recorded here and
/// excluded from the summaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub replication: u64,
    pub message: String,
}

/// Full output of a study: per-rule summaries plus reproduction metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// One summary per configured rule, in configuration order.
    pub summaries: Vec<RuleSummary>,
    pub failures: Vec<ReplicationFailure>,
    pub completed_replications: u64,
    /// Wall-clock runtime; the only field that varies between identical runs.
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    /// The summary for a rule, if it was part of the study.
    pub fn summary(&self, rule: StudyRule) -> Option<&RuleSummary> {
        self.summaries.iter().find(|s| s.rule == rule)
    }
}

/// Error proportions from a single replication of a single rule.
#[derive(Debug, Clone, Copy)]
struct ReplicationTally {
    misclassification: f64,
    type1: f64,
    type2: f64,
}

type ReplicationResults = Vec<(u64, Result<Vec<ReplicationTally>>)>;

/// Builds a memoizing evidence evaluator for either prior class.
fn evidence_for(prior: &BuiltPrior, alpha: f64) -> Result<ShrinkageEvidence> {
    match prior {
        BuiltPrior::GlobalLocal(prior) => ShrinkageEvidence::new(prior, alpha),
        BuiltPrior::GaussHypergeometric(gh) => {
            ShrinkageEvidence::from_conjugate(ConjugateFamily::GaussHypergeometric(*gh), alpha)
        }
    }
}

/// κ-prior the GH rule falls back to when `gh_prior` is unset: a1 = a2 = 1/2
/// with γ = 1.
fn default_gh_prior() -> PriorConfig {
    PriorConfig {
        family: PriorFamilyConfig::Gh,
        a1: 0.5,
        a2: 0.5,
        gamma: Some(1.0),
    }
}

/// The polynomial tail exponent governing the risk-ratio ceiling: the
/// λ²-tail index for the global-local class, `a1` for the κ-space GH prior.
fn tail_exponent(prior: &BuiltPrior) -> f64 {
    match prior {
        BuiltPrior::GlobalLocal(p) => p.a,
        BuiltPrior::GaussHypergeometric(gh) => gh.a1,
    }
}

/// Runs the full study described by `config`.
///
/// Replications run in parallel, are collected back into replication order,
/// and are reduced with pairwise summation, so the report is identical
/// across thread counts and repeated runs. A replication that fails is
/// recorded and excluded; more than [`FAILURE_BUDGET`] of them fails the
/// whole experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let needs_one_group = config
        .rules
        .iter()
        .any(|r| matches!(r, StudyRule::OneGroupTuned | StudyRule::OneGroupEb));
    let one_group = if needs_one_group {
        Some(evidence_for(&config.prior.build()?, config.alpha_prior)?)
    } else {
        None
    };
    let gh = if config.rules.contains(&StudyRule::Gh) {
        let gh_config = config.gh_prior.unwrap_or_else(default_gh_prior);
        Some(evidence_for(&gh_config.build()?, config.alpha_prior)?)
    } else {
        None
    };
    run_prepared(config, one_group.as_ref(), gh.as_ref())
}

/// Study driver over prebuilt evidence evaluators, shared across
/// replications so their memo caches accumulate.
fn run_prepared(
    config: &ExperimentConfig,
    one_group: Option<&ShrinkageEvidence>,
    gh: Option<&ShrinkageEvidence>,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let results: ReplicationResults = (0..config.replications)
        .into_par_iter()
        .map(|replication| {
            (
                replication,
                run_replication(config, one_group, gh, replication),
            )
        })
        .collect();
    let (summaries, failures, completed_replications) = aggregate_replications(config, results)?;
    Ok(ExperimentReport {
        config: config.clone(),
        summaries,
        failures,
        completed_replications,
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

/// One replication: draw a dataset from the replication's RNG substream and
/// apply every configured rule to it.
fn run_replication(
    config: &ExperimentConfig,
    one_group: Option<&ShrinkageEvidence>,
    gh: Option<&ShrinkageEvidence>,
    replication: u64,
) -> Result<Vec<ReplicationTally>> {
    let seed = replication_seed(config.base_seed, replication);
    let dataset = generate_two_group(&config.model, config.n as usize, seed)?;
    let one_group_rule = || {
        one_group.ok_or_else(|| {
            CoreError::domain("run_replication", "one-group rules need the one-group prior")
        })
    };
    let mut tallies = Vec::with_capacity(config.rules.len());
    for rule in &config.rules {
        let outcomes = match rule {
            StudyRule::Oracle => oracle_decide(&config.model, &dataset.counts)?,
            StudyRule::OneGroupTuned => {
                let tau = config.tau_policy.resolve(config.model.p, &dataset.counts)?;
                one_group_decide_tuned(
                    one_group_rule()?,
                    config.model.delta,
                    tau,
                    &dataset.counts,
                    None,
                )?
            }
            StudyRule::OneGroupEb => {
                let tau_config = match config.tau_policy {
                    TauPolicy::Eb { k } => TauHatConfig::new(k)?,
                    _ => TauHatConfig::default(),
                };
                one_group_decide_eb(
                    one_group_rule()?,
                    config.model.delta,
                    &dataset.counts,
                    &tau_config,
                    None,
                )?
                .outcomes
            }
            StudyRule::Gh => {
                let evidence = gh.ok_or_else(|| {
                    CoreError::domain("run_replication", "the GH rule needs its kappa prior")
                })?;
                let tau = config.tau_policy.resolve(config.model.p, &dataset.counts)?;
                one_group_decide_tuned(evidence, config.model.delta, tau, &dataset.counts, None)?
            }
        };
        tallies.push(tally(&outcomes, &dataset.truth));
    }
    Ok(tallies)
}

/// Classification error proportions of one rule on one dataset.
fn tally(outcomes: &[DecisionOutcome], truth: &[u8]) -> ReplicationTally {
    let mut nulls = 0u64;
    let mut signals = 0u64;
    let mut false_rejections = 0u64;
    let mut missed_signals = 0u64;
    for (outcome, &label) in outcomes.iter().zip(truth) {
        if label == 0 {
            nulls += 1;
            if outcome.reject {
                false_rejections += 1;
            }
        } else {
            signals += 1;
            if !outcome.reject {
                missed_signals += 1;
            }
        }
    }
    let proportion = |errors: u64, class: u64| {
        if class == 0 {
            0.0
        } else {
            errors as f64 / class as f64
        }
    };
    ReplicationTally {
        misclassification: (false_rejections + missed_signals) as f64 / outcomes.len() as f64,
        type1: proportion(false_rejections, nulls),
        type2: proportion(missed_signals, signals),
    }
}

/// Splits replication results into per-rule series and failure records,
/// enforces the failure budget, and summarizes each rule.
fn aggregate_replications(
    config: &ExperimentConfig,
    results: ReplicationResults,
) -> Result<(Vec<RuleSummary>, Vec<ReplicationFailure>, u64)> {
    let mut per_rule: Vec<Vec<ReplicationTally>> = (0..config.rules.len())
        .map(|_| Vec::with_capacity(results.len()))
        .collect();
    let mut failures = Vec::new();
    for (replication, result) in results {
        match result {
            Ok(tallies) => {
                for (series, tally) in per_rule.iter_mut().zip(tallies) {
                    series.push(tally);
                }
            }
            Err(error) => failures.push(ReplicationFailure {
                replication,
                message: error.to_string(),
            }),
        }
    }
    let failed_fraction = failures.len() as f64 / config.replications as f64;
    if failed_fraction > FAILURE_BUDGET {
        return Err(CoreError::NonConvergence {
            context: "run_experiment",
            iterations: failures.len(),
            estimate: failed_fraction,
            target: FAILURE_BUDGET,
        });
    }
    let completed = per_rule.first().map_or(0, Vec::len) as u64;
    let summaries = config
        .rules
        .iter()
        .zip(&per_rule)
        .map(|(&rule, series)| summarize(rule, series, config.n as f64))
        .collect();
    Ok((summaries, failures, completed))
}

/// Summarizes one rule's per-replication error series.
fn summarize(rule: StudyRule, series: &[ReplicationTally], n: f64) -> RuleSummary {
    let misclassification: Vec<f64> = series.iter().map(|t| t.misclassification).collect();
    let type1: Vec<f64> = series.iter().map(|t| t.type1).collect();
    let type2: Vec<f64> = series.iter().map(|t| t.type2).collect();
    let (mean_misclassification, mc_standard_error) = mean_and_se(&misclassification);
    let (mean_type1, type1_standard_error) = mean_and_se(&type1);
    let (mean_type2, type2_standard_error) = mean_and_se(&type2);
    RuleSummary {
        rule,
        mean_misclassification,
        mc_standard_error,
        mean_type1,
        type1_standard_error,
        mean_type2,
        type2_standard_error,
        estimated_bayes_risk: n * mean_misclassification,
    }
}

/// Sample mean and Monte-Carlo standard error (`s/√m`) of a series. The
/// empty case cannot arise after the failure-budget check but is kept total.
fn mean_and_se(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let count = values.len() as f64;
    let mean = pairwise_sum(values) / count;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let squared: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let variance = pairwise_sum(&squared) / (count - 1.0);
    (mean, (variance / count).sqrt())
}

/// Sums by recursive halving: the result depends only on the slice's
/// contents and order — never on thread scheduling — and rounding error
/// grows with the logarithm of the length rather than the length.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let (low, high) = values.split_at(len / 2);
            pairwise_sum(low) + pairwise_sum(high)
        }
    }
}

/// One cell of a τ-policy sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauSweepCell {
    pub n: u64,
    pub p: f64,
    pub policy: TauPolicy,
    pub misclassification: f64,
    pub mc_standard_error: f64,
}

/// Sweeps the tuned rule's misclassification over an (n, p, policy) grid.
///
/// Every cell reruns `base` with its `n`, signal proportion, and τ policy
/// replaced; `base_seed` is kept fixed so cells share common random numbers.
/// Cells are emitted in n-major, then p, then policy order.
pub fn run_tau_sweep(
    base: &ExperimentConfig,
    n_values: &[u64],
    p_values: &[f64],
    policies: &[TauPolicy],
) -> Result<Vec<TauSweepCell>> {
    const CONTEXT: &str = "run_tau_sweep";
    if !base.rules.contains(&StudyRule::OneGroupTuned) {
        return Err(CoreError::domain(
            CONTEXT,
            "the sweep tracks the ONE_GROUP_TUNED rule, which is missing from the rule set",
        ));
    }
    if n_values.is_empty() || p_values.is_empty() || policies.is_empty() {
        return Err(CoreError::domain(
            CONTEXT,
            "the n, p, and policy grids must all be non-empty",
        ));
    }
    let mut cells = Vec::with_capacity(n_values.len() * p_values.len() * policies.len());
    for &n in n_values {
        for &p in p_values {
            let model =
                TwoGroupModel::new(base.model.alpha, base.model.beta, base.model.delta, p)?;
            for &policy in policies {
                let config = ExperimentConfig {
                    model,
                    n,
                    tau_policy: policy,
                    ..base.clone()
                };
                let report = run_experiment(&config)?;
                let summary = report
                    .summary(StudyRule::OneGroupTuned)
                    .expect("checked: the tuned rule is configured");
                cells.push(TauSweepCell {
                    n,
                    p,
                    policy,
                    misclassification: summary.mean_misclassification,
                    mc_standard_error: summary.mc_standard_error,
                });
            }
        }
    }
    Ok(cells)
}

/// One (p, β) setting of a rule-comparison study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub p: f64,
    pub beta: f64,
}

/// Per-rule summaries at one comparison cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub p: f64,
    pub beta: f64,
    /// One summary per configured rule, in configuration order.
    pub summaries: Vec<RuleSummary>,
}

/// Runs the configured rules across (p, β) cells, keeping α, δ, n, the seed,
/// and the τ policy fixed.
pub fn run_rule_comparison(
    base: &ExperimentConfig,
    cells: &[ComparisonCell],
) -> Result<Vec<ComparisonRow>> {
    if cells.is_empty() {
        return Err(CoreError::domain(
            "run_rule_comparison",
            "at least one (p, beta) cell is required",
        ));
    }
    let mut rows = Vec::with_capacity(cells.len());
    for cell in cells {
        let model =
            TwoGroupModel::new(base.model.alpha, cell.beta, base.model.delta, cell.p)?;
        let config = ExperimentConfig {
            model,
            ..base.clone()
        };
        let report = run_experiment(&config)?;
        rows.push(ComparisonRow {
            p: cell.p,
            beta: cell.beta,
            summaries: report.summaries,
        });
    }
    Ok(rows)
}

/// Monte-Carlo risk ratio of the tuned rule against the oracle, paired with
/// the closed-form ceiling it is expected to sit under.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskRatioTrack {
    pub report: ExperimentReport,
    /// Estimated tuned risk over estimated oracle risk; `None` when the
    /// oracle risk estimate is zero.
    pub estimated_ratio: Option<f64>,
    /// First-order (delta-method) standard error of the ratio.
    pub combined_standard_error: f64,
    pub ratio_bound: BoundReport,
}

/// Runs the study and reduces it to the tuned-versus-oracle risk ratio next
/// to its closed-form ceiling. Requires both rules in the configuration.
pub fn risk_ratio_track(config: &ExperimentConfig) -> Result<RiskRatioTrack> {
    const CONTEXT: &str = "risk_ratio_track";
    if !(config.rules.contains(&StudyRule::Oracle)
        && config.rules.contains(&StudyRule::OneGroupTuned))
    {
        return Err(CoreError::domain(
            CONTEXT,
            "the ratio needs both the ORACLE and ONE_GROUP_TUNED rules",
        ));
    }
    let report = run_experiment(config)?;
    let (oracle_mean, oracle_se) = {
        let s = report.summary(StudyRule::Oracle).expect("checked above");
        (s.mean_misclassification, s.mc_standard_error)
    };
    let (tuned_mean, tuned_se) = {
        let s = report
            .summary(StudyRule::OneGroupTuned)
            .expect("checked above");
        (s.mean_misclassification, s.mc_standard_error)
    };
    let (estimated_ratio, combined_standard_error) = if oracle_mean > 0.0 {
        let ratio = tuned_mean / oracle_mean;
        let se = ((tuned_se / oracle_mean).powi(2)
            + (ratio * oracle_se / oracle_mean).powi(2))
        .sqrt();
        (Some(ratio), se)
    } else {
        (None, 0.0)
    };
    let ratio_bound = risk_ratio_upper_bound(
        tail_exponent(&config.prior.build()?),
        config.alpha_prior,
        config.model.delta,
    )?;
    Ok(RiskRatioTrack {
        report,
        estimated_ratio,
        combined_standard_error,
        ratio_bound,
    })
}

/// Formats a value to `digits` significant figures: positional notation when
/// the decimal exponent lies in `[−4, digits)`, scientific otherwise, with
/// trailing zeros trimmed.
pub fn format_significant(value: f64, digits: usize) -> String {
    assert!(digits >= 1, "need at least one significant digit");
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }
    let scientific = format!("{value:.*e}", digits - 1);
    let (mantissa, exponent) = scientific
        .split_once('e')
        .expect("float scientific notation always has an exponent");
    let exponent: i32 = exponent
        .parse()
        .expect("float exponent is a valid integer");
    if exponent < -4 || exponent >= digits as i32 {
        format!("{}e{exponent}", trim_trailing_zeros(mantissa))
    } else {
        let fractional = (digits as i32 - 1 - exponent).max(0) as usize;
        trim_trailing_zeros(&format!("{value:.fractional$}"))
    }
}

/// Drops trailing fractional zeros (and a bare trailing point) from a fixed
/// or mantissa rendering.
fn trim_trailing_zeros(rendered: &str) -> String {
    if !rendered.contains('.') {
        return rendered.to_string();
    }
    rendered.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Writes sweep cells as an `n,p,policy,misclassification,mc_standard_error`
/// table with values at six significant figures.
pub fn write_sweep_csv<W: io::Write>(cells: &[TauSweepCell], writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(["n", "p", "policy", "misclassification", "mc_standard_error"])?;
    for cell in cells {
        csv_writer.write_record([
            cell.n.to_string(),
            format_significant(cell.p, 6),
            cell.policy.to_string(),
            format_significant(cell.misclassification, 6),
            format_significant(cell.mc_standard_error, 6),
        ])?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Writes sweep cells as a wide table matching the printed layout: `n,p`
/// plus one `<POLICY>,<POLICY>_se` column pair per policy, one row per
/// (n, p) pair, at six significant figures. Cells must arrive in the order
/// [`run_tau_sweep`] emits them: policy fastest, every (n, p) pair covering
/// the same policy sequence.
pub fn write_sweep_wide_csv<W: io::Write>(cells: &[TauSweepCell], writer: W) -> Result<()> {
    const CONTEXT: &str = "write_sweep_wide_csv";
    if cells.is_empty() {
        return Err(CoreError::domain(
            CONTEXT,
            "no cells to write: the policy columns are unknown for an empty table",
        ));
    }
    let lead = (cells[0].n, cells[0].p);
    let width = cells
        .iter()
        .position(|cell| (cell.n, cell.p) != lead)
        .unwrap_or(cells.len());
    if cells.len() % width != 0 {
        return Err(CoreError::domain(
            CONTEXT,
            "cells do not tile into complete (n, p) rows",
        ));
    }
    let policies: Vec<TauPolicy> = cells[..width].iter().map(|cell| cell.policy).collect();
    let mut header = vec!["n".to_string(), "p".to_string()];
    for policy in &policies {
        header.push(policy.to_string());
        header.push(format!("{policy}_se"));
    }
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(&header)?;
    for group in cells.chunks(width) {
        let (n, p) = (group[0].n, group[0].p);
        let mut record = vec![n.to_string(), format_significant(p, 6)];
        for (cell, policy) in group.iter().zip(&policies) {
            if (cell.n, cell.p) != (n, p) || cell.policy != *policy {
                return Err(CoreError::domain(
                    CONTEXT,
                    "cells are not grouped by (n, p) under a constant policy sequence",
                ));
            }
            record.push(format_significant(cell.misclassification, 6));
            record.push(format_significant(cell.mc_standard_error, 6));
        }
        csv_writer.write_record(&record)?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Writes comparison rows as `p,beta` plus one `<RULE>,<RULE>_se` column
/// pair per configured rule, at six significant figures.
pub fn write_comparison_csv<W: io::Write>(rows: &[ComparisonRow], writer: W) -> Result<()> {
    const CONTEXT: &str = "write_comparison_csv";
    let Some(first) = rows.first() else {
        return Err(CoreError::domain(
            CONTEXT,
            "no rows to write: the rule columns are unknown for an empty table",
        ));
    };
    let rules: Vec<StudyRule> = first.summaries.iter().map(|s| s.rule).collect();
    let mut header = vec!["p".to_string(), "beta".to_string()];
    for rule in &rules {
        header.push(rule.to_string());
        header.push(format!("{rule}_se"));
    }
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(&header)?;
    for row in rows {
        let row_rules: Vec<StudyRule> = row.summaries.iter().map(|s| s.rule).collect();
        if row_rules != rules {
            return Err(CoreError::domain(CONTEXT, "rows disagree on the rule set"));
        }
        let mut record = vec![format_significant(row.p, 6), format_significant(row.beta, 6)];
        for summary in &row.summaries {
            record.push(format_significant(summary.mean_misclassification, 6));
            record.push(format_significant(summary.mc_standard_error, 6));
        }
        csv_writer.write_record(&record)?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Serializes a report as indented JSON at full precision.
pub fn write_report_json<W: io::Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, report)?;
    Ok(())
}
