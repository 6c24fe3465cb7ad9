//! Multiple-testing decision rules.
//!
//! Three rules share one outcome type:
//!
//! * the **oracle** rule, which knows the true two-group model and rejects
//!   when the count exceeds the risk-optimal threshold `C`;
//! * the **tuned one-group** rule, which rejects when the posterior shrinkage
//!   evidence `E(1−κ | y, τ)` at a caller-chosen τ exceeds `δ/(2(δ+1))`;
//! * the **empirical-Bayes one-group** rule, identical to the tuned rule with
//!   τ replaced by the plug-in estimate
//!   `τ̂ = max{1/n, (1/n)·#{i : Yᵢ ≥ k}}` shared across all n tests.
//!
//! Every rule uses a strict `>` comparison, so ties at the threshold are
//! accepted. Shrinkage evidence is memoized per distinct `(y, τ)` pair since
//! quasi-sparse data repeats small counts heavily.

use std::collections::HashMap;
use std::io;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, CoreError, Result};
use crate::posterior::{
    posterior_kappa_mean_closed_form, posterior_kappa_mean_gh_quadrature,
    posterior_kappa_mean_quadrature, ConjugateFamily,
};
use crate::priors::GlobalLocalPrior;
use crate::samplers::TwoGroupModel;

/// Which rule produced an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RuleTag {
    Oracle,
    OneGroupTuned,
    OneGroupEb,
}

impl std::fmt::Display for RuleTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RuleTag::Oracle => write!(f, "ORACLE"),
            RuleTag::OneGroupTuned => write!(f, "ONE_GROUP_TUNED"),
            RuleTag::OneGroupEb => write!(f, "ONE_GROUP_EB"),
        }
    }
}

/// One test's decision: the evidence scalar, the threshold it was compared
/// against, and the strict-inequality verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub index: usize,
    pub count: u64,
    /// The scalar compared to the threshold: the count itself for the oracle
    /// rule, `E(1−κ | y, τ)` for the one-group rules.
    pub evidence: f64,
    pub threshold: f64,
    /// `evidence > threshold`, strictly; ties are accepted.
    pub reject: bool,
    pub rule: RuleTag,
}

/// Count threshold for the empirical-Bayes τ̂ indicator; `k = 1` counts every
/// nonzero observation, larger `k` only "large" ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauHatConfig {
    pub k: u64,
}

impl TauHatConfig {
    pub fn new(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::domain(
                "TauHatConfig",
                "the count threshold k must be at least 1",
            ));
        }
        Ok(TauHatConfig { k })
    }
}

impl Default for TauHatConfig {
    fn default() -> Self {
        TauHatConfig { k: 1 }
    }
}

/// Risk-optimal count threshold under the two-group model:
///
/// ```text
/// C = [log((1−p)/p) + α·log((β+δ+1)/(β+1))] / log[(β+δ)(β+1) / (β(β+δ+1))]
/// ```
///
/// Rejecting when `y > C` is the Bayes rule for 0–1 loss.
pub fn oracle_threshold(model: &TwoGroupModel) -> Result<f64> {
    let TwoGroupModel {
        alpha,
        beta,
        delta,
        p,
    } = *model;
    let numerator = ((1.0 - p) / p).ln() + alpha * ((beta + delta + 1.0) / (beta + 1.0)).ln();
    let denominator = ((beta + delta) * (beta + 1.0) / (beta * (beta + delta + 1.0))).ln();
    if !(denominator > 0.0 && denominator.is_finite()) {
        return Err(CoreError::domain(
            "oracle_threshold",
            format!("degenerate model: the log-odds slope per count is {denominator}"),
        ));
    }
    Ok(numerator / denominator)
}

/// Applies the oracle rule `reject ⟺ y > C` to every count.
pub fn oracle_decide(model: &TwoGroupModel, counts: &[u64]) -> Result<Vec<DecisionOutcome>> {
    require_counts("oracle_decide", counts)?;
    let threshold = oracle_threshold(model)?;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(index, &count)| {
            let evidence = count as f64;
            DecisionOutcome {
                index,
                count,
                evidence,
                threshold,
                reject: evidence > threshold,
                rule: RuleTag::Oracle,
            }
        })
        .collect())
}

/// Default one-group rejection threshold `δ/(2(δ+1))`, derived for the
/// near-zero-β regime; it climbs toward 1/2 as the separation δ grows.
pub fn tuned_threshold(delta: f64) -> Result<f64> {
    require_positive("tuned_threshold", "delta", delta)?;
    Ok(delta / (2.0 * (delta + 1.0)))
}

/// Memoizing evaluator of the shrinkage evidence `E(1−κ | y, τ)`.
///
/// Dispatches to the closed form when the prior has one and to adaptive
/// quadrature otherwise. The closed form refuses to answer when its two
/// hypergeometric ratios stop reconciling — which happens once `1−τ²` sits
/// within a few ulps of 1 — and the evaluator then falls back to the
/// quadrature route, which is stable there. Results are cached per distinct
/// `(y, τ)` (keyed by the τ bit pattern) and safe to share across threads.
pub struct ShrinkageEvidence {
    pub alpha: f64,
    route: EvidenceRoute,
    cache: RwLock<HashMap<(u64, u64), f64>>,
}

enum EvidenceRoute {
    /// A λ²-space prior: closed form when the family has one, t-space
    /// quadrature otherwise.
    GlobalLocal {
        prior: GlobalLocalPrior,
        closed_form: Option<ConjugateFamily>,
    },
    /// A κ-space conjugate family evaluated by its hypergeometric closed form.
    Conjugate(ConjugateFamily),
}

impl ShrinkageEvidence {
    pub fn new(prior: &GlobalLocalPrior, alpha: f64) -> Result<Self> {
        require_positive("ShrinkageEvidence", "alpha", alpha)?;
        Ok(ShrinkageEvidence {
            alpha,
            route: EvidenceRoute::GlobalLocal {
                prior: prior.clone(),
                closed_form: ConjugateFamily::from_global_local(prior).ok(),
            },
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Evidence under a κ-space conjugate family given directly, for rules
    /// whose prior is specified in κ space rather than as a λ² density.
    pub fn from_conjugate(family: ConjugateFamily, alpha: f64) -> Result<Self> {
        require_positive("ShrinkageEvidence", "alpha", alpha)?;
        Ok(ShrinkageEvidence {
            alpha,
            route: EvidenceRoute::Conjugate(family),
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// `E(1−κ | y, τ)`, memoized.
    pub fn evidence(&self, y: u64, tau: f64) -> Result<f64> {
        let key = (y, tau.to_bits());
        if let Some(&hit) = self.cache.read().expect("evidence cache poisoned").get(&key) {
            return Ok(hit);
        }
        let estimate = match &self.route {
            EvidenceRoute::GlobalLocal {
                prior,
                closed_form: Some(family),
            } => match posterior_kappa_mean_closed_form(family, self.alpha, y, tau) {
                Ok(estimate) => estimate,
                Err(CoreError::NonConvergence { .. }) => {
                    posterior_kappa_mean_quadrature(prior, self.alpha, y, tau)?
                }
                Err(error) => return Err(error),
            },
            EvidenceRoute::Conjugate(family) => {
                match (
                    posterior_kappa_mean_closed_form(family, self.alpha, y, tau),
                    family,
                ) {
                    (Ok(estimate), _) => estimate,
                    // only the GH family has a κ-space quadrature to fall
                    // back on; a TPBN prior handed over in conjugate form
                    // carries no λ²-space object to integrate
                    (
                        Err(CoreError::NonConvergence { .. }),
                        ConjugateFamily::GaussHypergeometric(gh),
                    ) => posterior_kappa_mean_gh_quadrature(gh, self.alpha, y, tau)?,
                    (Err(error), _) => return Err(error),
                }
            }
            EvidenceRoute::GlobalLocal {
                prior,
                closed_form: None,
            } => posterior_kappa_mean_quadrature(prior, self.alpha, y, tau)?,
        };
        let value = estimate.e_one_minus_kappa;
        self.cache
            .write()
            .expect("evidence cache poisoned")
            .insert(key, value);
        Ok(value)
    }
}

fn one_group_decide(
    evidence: &ShrinkageEvidence,
    delta: f64,
    tau: f64,
    counts: &[u64],
    threshold_override: Option<f64>,
    rule: RuleTag,
) -> Result<Vec<DecisionOutcome>> {
    let threshold = match threshold_override {
        Some(t) => {
            if !t.is_finite() {
                return Err(CoreError::domain(
                    "one_group_decide",
                    format!("threshold override must be finite, got {t}"),
                ));
            }
            t
        }
        None => tuned_threshold(delta)?,
    };
    counts
        .iter()
        .enumerate()
        .map(|(index, &count)| {
            let e = evidence.evidence(count, tau)?;
            Ok(DecisionOutcome {
                index,
                count,
                evidence: e,
                threshold,
                reject: e > threshold,
                rule,
            })
        })
        .collect()
}

/// One-group rule at a caller-fixed τ: reject when
/// `E(1−κ | y, τ) > δ/(2(δ+1))` (or the override threshold).
///
/// When the signal proportion is known, choosing τ of the order of that
/// proportion makes this rule track the oracle.
pub fn one_group_decide_tuned(
    evidence: &ShrinkageEvidence,
    delta: f64,
    tau: f64,
    counts: &[u64],
    threshold_override: Option<f64>,
) -> Result<Vec<DecisionOutcome>> {
    require_counts("one_group_decide_tuned", counts)?;
    one_group_decide(
        evidence,
        delta,
        tau,
        counts,
        threshold_override,
        RuleTag::OneGroupTuned,
    )
}

/// Plug-in global parameter `τ̂ = max{1/n, (1/n)·#{i : Yᵢ ≥ k}}`.
///
/// The `1/n` floor keeps the estimate strictly positive even for all-zero
/// data, so the posterior never degenerates.
pub fn tau_hat(counts: &[u64], config: &TauHatConfig) -> Result<f64> {
    require_counts("tau_hat", counts)?;
    if config.k == 0 {
        return Err(CoreError::domain(
            "tau_hat",
            "the count threshold k must be at least 1",
        ));
    }
    let n = counts.len() as f64;
    let exceedances = counts.iter().filter(|&&y| y >= config.k).count() as f64;
    Ok((exceedances / n).max(1.0 / n))
}

/// The empirical-Bayes rule's τ̂ together with its per-index outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbDecision {
    pub tau_hat: f64,
    pub outcomes: Vec<DecisionOutcome>,
}

/// Empirical-Bayes one-group rule: estimates τ̂ from the counts once, then
/// applies the tuned rule with that shared τ̂ at every index.
pub fn one_group_decide_eb(
    evidence: &ShrinkageEvidence,
    delta: f64,
    counts: &[u64],
    config: &TauHatConfig,
    threshold_override: Option<f64>,
) -> Result<EbDecision> {
    require_counts("one_group_decide_eb", counts)?;
    let tau = tau_hat(counts, config)?;
    let outcomes = one_group_decide(
        evidence,
        delta,
        tau,
        counts,
        threshold_override,
        RuleTag::OneGroupEb,
    )?;
    Ok(EbDecision {
        tau_hat: tau,
        outcomes,
    })
}

/// Writes outcomes as CSV with header `index,count,evidence,threshold,reject,rule`.
pub fn write_outcomes_csv<W: io::Write>(outcomes: &[DecisionOutcome], writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(["index", "count", "evidence", "threshold", "reject", "rule"])?;
    for o in outcomes {
        csv_writer.write_record([
            o.index.to_string(),
            o.count.to_string(),
            o.evidence.to_string(),
            o.threshold.to_string(),
            o.reject.to_string(),
            o.rule.to_string(),
        ])?;
    }
    csv_writer.flush()?;
    Ok(())
}

fn require_counts(context: &'static str, counts: &[u64]) -> Result<()> {
    if counts.is_empty() {
        return Err(CoreError::domain(context, "counts must be nonempty"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::two_group_posterior;
    use crate::priors::{make_gdp, make_tpbn};
    use crate::samplers::nb_log_pmf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_rel(got: f64, want: f64, tol: f64, label: &str) {
        let rel = if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        };
        assert!(rel <= tol, "{label}: got {got}, want {want} (rel {rel:.3e})");
    }

    #[test]
    fn oracle_threshold_matches_reference_values() {
        // frozen from the 50-digit oracle (tools/gen_reference_values.py)
        let cases = [
            (0.01, 1.3, 0.005, 3.0, 1.2744005447303096),
            (0.05, 1.3, 0.005, 3.0, 0.94531998826961696),
            (0.1, 1.3, 0.05, 3.0, 1.4314396830606459),
            (0.2, 1.3, 0.05, 3.0, 1.1377251811254699),
            (0.1, 1.5, 0.005, 10.0, 1.1112179742286766),
        ];
        for (p, alpha, beta, delta, want) in cases {
            let model = TwoGroupModel::new(alpha, beta, delta, p).unwrap();
            assert_rel(
                oracle_threshold(&model).unwrap(),
                want,
                1e-12,
                &format!("C({p},{alpha},{beta},{delta})"),
            );
        }
    }

    #[test]
    fn oracle_threshold_even_odds_drops_log_odds_term() {
        // at p = 1/2 the log-odds term vanishes and only the α term remains
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.5).unwrap();
        let denominator = (3.05f64 * 1.05 / (0.05 * 4.05)).ln();
        let want = 1.3 * (4.05f64 / 1.05).ln() / denominator;
        assert_rel(oracle_threshold(&model).unwrap(), want, 1e-14, "C(p=1/2)");
    }

    #[test]
    fn oracle_threshold_grows_as_signals_rarify() {
        let rare = TwoGroupModel::new(1.3, 0.05, 3.0, 0.01).unwrap();
        let common = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        assert!(oracle_threshold(&rare).unwrap() > oracle_threshold(&common).unwrap());
    }

    #[test]
    fn oracle_decide_compares_counts_to_threshold() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        // C ≈ 1.4314: y = 2 is the first rejected count
        let outcomes = oracle_decide(&model, &[0, 1, 2]).unwrap();
        let rejects: Vec<bool> = outcomes.iter().map(|o| o.reject).collect();
        assert_eq!(rejects, [false, false, true]);
        for (i, o) in outcomes.iter().enumerate() {
            assert_eq!(o.index, i);
            assert_eq!(o.count, i as u64);
            assert_eq!(o.evidence, i as f64);
            assert_rel(o.threshold, 1.4314396830606459, 1e-12, "threshold");
            assert_eq!(o.rule, RuleTag::Oracle);
            assert_eq!(o.reject, o.evidence > o.threshold);
        }
        // all-zero counts are never rejected for a positive threshold
        let zeros = oracle_decide(&model, &[0; 20]).unwrap();
        assert!(zeros.iter().all(|o| !o.reject));
    }

    #[test]
    fn oracle_rule_equals_likelihood_ratio_and_posterior_odds() {
        // the count-threshold form, the marginal likelihood-ratio form, and
        // the posterior-probability form are one rule written three ways
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0C1A);
        for trial in 0..25 {
            let alpha = rng.gen_range(0.5..3.0);
            let beta = rng.gen_range(0.005..1.0);
            let delta = rng.gen_range(0.5..10.0);
            let p = rng.gen_range(0.01..0.45);
            let model = TwoGroupModel::new(alpha, beta, delta, p).unwrap();
            let c = oracle_threshold(&model).unwrap();
            let log_prior_odds = ((1.0 - p) / p).ln();
            for y in 0..=50u64 {
                let by_count = y as f64 > c;
                let log_lr = nb_log_pmf(y, alpha, model.signal_success_prob()).unwrap()
                    - nb_log_pmf(y, alpha, model.null_success_prob()).unwrap();
                let by_lr = log_lr > log_prior_odds;
                let by_posterior = two_group_posterior(&model, y).unwrap().w > 0.5;
                assert_eq!(
                    by_count, by_lr,
                    "count vs likelihood ratio at trial {trial}, y={y}"
                );
                assert_eq!(
                    by_lr, by_posterior,
                    "likelihood ratio vs posterior at trial {trial}, y={y}"
                );
            }
        }
    }

    #[test]
    fn tuned_threshold_examples_and_limit() {
        assert_eq!(tuned_threshold(3.0).unwrap(), 0.375);
        let mut prev = 0.0;
        for delta in [0.5, 1.0, 2.0, 3.0, 10.0, 100.0, 1e6] {
            let t = tuned_threshold(delta).unwrap();
            assert!(t > prev && t < 0.5, "threshold {t} out of order at {delta}");
            prev = t;
        }
        assert!((tuned_threshold(1e6).unwrap() - 0.5).abs() < 1e-6);
        assert!(tuned_threshold(0.0).is_err());
    }

    #[test]
    fn tuned_rule_rejects_exactly_above_threshold() {
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let evidence = ShrinkageEvidence::new(&prior, 1.3).unwrap();
        let counts = [0u64, 1, 3, 5, 426];
        let outcomes = one_group_decide_tuned(&evidence, 3.0, 0.05, &counts, None).unwrap();
        for o in &outcomes {
            assert_eq!(o.threshold, 0.375);
            assert_eq!(o.rule, RuleTag::OneGroupTuned);
            assert_eq!(o.reject, o.evidence > o.threshold);
        }
        // small counts shrink hard, the huge count passes through
        assert!(!outcomes[0].reject);
        assert!(outcomes[4].reject);
        assert!(outcomes[4].evidence > 0.99);
        // evidence is nondecreasing in the count
        for pair in outcomes.windows(2) {
            assert!(pair[1].evidence >= pair[0].evidence - 1e-12);
        }
    }

    #[test]
    fn tie_at_threshold_is_accepted() {
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let evidence = ShrinkageEvidence::new(&prior, 1.3).unwrap();
        let e = evidence.evidence(3, 0.1).unwrap();
        let outcomes = one_group_decide_tuned(&evidence, 3.0, 0.1, &[3], Some(e)).unwrap();
        assert_eq!(outcomes[0].evidence, e);
        assert!(!outcomes[0].reject, "a tie must not reject");
        // one ulp below the evidence flips the decision
        let outcomes =
            one_group_decide_tuned(&evidence, 3.0, 0.1, &[3], Some(e - e * 1e-15)).unwrap();
        assert!(outcomes[0].reject);
    }

    #[test]
    fn tau_hat_counts_exceedances_with_floor() {
        let k1 = TauHatConfig::default();
        assert_eq!(k1.k, 1);
        assert_eq!(tau_hat(&[0, 0, 0, 0], &k1).unwrap(), 0.25);
        let counts = [0u64, 2, 0, 0, 7, 0, 0, 0, 1, 0];
        assert_eq!(tau_hat(&counts, &k1).unwrap(), 0.3);
        let k2 = TauHatConfig::new(2).unwrap();
        assert_eq!(tau_hat(&counts, &k2).unwrap(), 0.2);
        // saturated data pins τ̂ at 1, still a valid global parameter
        assert_eq!(tau_hat(&[5, 9, 3], &k1).unwrap(), 1.0);
        // the floor keeps τ̂ positive for all-zero data
        assert_eq!(tau_hat(&[0; 100], &k1).unwrap(), 0.01);
        assert!(TauHatConfig::new(0).is_err());
    }

    #[test]
    fn eb_rule_shares_one_tau_hat_across_indices() {
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let evidence = ShrinkageEvidence::new(&prior, 1.3).unwrap();
        let counts = [0u64, 6, 0, 2, 0, 0, 11, 0, 0, 0];
        let eb = one_group_decide_eb(&evidence, 3.0, &counts, &TauHatConfig::default(), None)
            .unwrap();
        assert_eq!(eb.tau_hat, 0.3);
        let tuned = one_group_decide_tuned(&evidence, 3.0, eb.tau_hat, &counts, None).unwrap();
        for (e, t) in eb.outcomes.iter().zip(&tuned) {
            assert_eq!(e.evidence, t.evidence, "EB must reuse the tuned evidence");
            assert_eq!(e.reject, t.reject);
            assert_eq!(e.rule, RuleTag::OneGroupEb);
        }
    }

    #[test]
    fn eb_rule_on_null_data_rejects_nothing() {
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let evidence = ShrinkageEvidence::new(&prior, 1.5).unwrap();
        let counts = vec![0u64; 100];
        let eb = one_group_decide_eb(&evidence, 3.0, &counts, &TauHatConfig::default(), None)
            .unwrap();
        assert_eq!(eb.tau_hat, 0.01);
        assert!(eb.outcomes.iter().all(|o| !o.reject));
    }

    #[test]
    fn eb_rule_flags_a_lone_huge_count() {
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let evidence = ShrinkageEvidence::new(&prior, 1.5).unwrap();
        let mut counts = vec![0u64; 100];
        counts[37] = 500;
        let eb = one_group_decide_eb(&evidence, 3.0, &counts, &TauHatConfig::default(), None)
            .unwrap();
        assert_eq!(eb.tau_hat, 0.01);
        for o in &eb.outcomes {
            assert_eq!(o.reject, o.count == 500, "index {}", o.index);
        }
        // a nearly-unshrunk huge count: evidence ≈ 1 − (a+α)/(y+α)
        assert!(eb.outcomes[37].evidence > 1.0 - 3.0 / 501.5 - 0.01);
    }

    #[test]
    fn evidence_cache_is_deterministic_and_family_agnostic() {
        let tpbn = make_tpbn(1.5, 1.5).unwrap();
        let evidence = ShrinkageEvidence::new(&tpbn, 1.3).unwrap();
        let first = evidence.evidence(4, 0.2).unwrap();
        let second = evidence.evidence(4, 0.2).unwrap();
        assert_eq!(first.to_bits(), second.to_bits());
        // quadrature-only families flow through the same interface
        let gdp = make_gdp(2.5, 1.0).unwrap();
        let gdp_evidence = ShrinkageEvidence::new(&gdp, 1.3).unwrap();
        assert_rel(
            gdp_evidence.evidence(2, 0.1).unwrap(),
            0.069960919068776657,
            1e-6,
            "GDP evidence",
        );
        // repeated decide calls give identical outcome vectors
        let counts = [0u64, 4, 4, 9];
        let a = one_group_decide_tuned(&evidence, 3.0, 0.2, &counts, None).unwrap();
        let b = one_group_decide_tuned(&evidence, 3.0, 0.2, &counts, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn evidence_falls_back_to_quadrature_where_the_closed_form_breaks() {
        // at τ = 1e-6, 1−τ² sits within a few ulps of 1 and the closed form's
        // two hypergeometric ratios stop reconciling for small counts
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let family = ConjugateFamily::from_global_local(&prior).unwrap();
        assert!(matches!(
            posterior_kappa_mean_closed_form(&family, 1.3, 1, 1e-6),
            Err(CoreError::NonConvergence { .. })
        ));

        // the evaluator hands those keys to quadrature instead of failing
        let evidence = ShrinkageEvidence::new(&prior, 1.3).unwrap();
        let quadrature = posterior_kappa_mean_quadrature(&prior, 1.3, 1, 1e-6)
            .unwrap()
            .e_one_minus_kappa;
        assert_eq!(evidence.evidence(1, 1e-6).unwrap(), quadrature);

        // and the fallback values sit on the analytic τ→0 limit (y−a)/(y+α)
        assert!(evidence.evidence(1, 1e-6).unwrap() < 1e-5);
        assert_rel(
            evidence.evidence(5, 1e-6).unwrap(),
            (5.0 - 1.5) / (5.0 + 1.3),
            1e-9,
            "shrinkage weight at the no-pooling limit",
        );
    }

    #[test]
    fn outcomes_serialize_with_stable_header() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        let outcomes = oracle_decide(&model, &[0, 2]).unwrap();
        let mut buffer = Vec::new();
        write_outcomes_csv(&outcomes, &mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "index,count,evidence,threshold,reject,rule"
        );
        // floats print in shortest-round-trip form
        let c = oracle_threshold(&model).unwrap().to_string();
        assert_eq!(lines.next().unwrap(), format!("0,0,0,{c},false,ORACLE"));
        assert_eq!(lines.next().unwrap(), format!("1,2,2,{c},true,ORACLE"));
        assert!(lines.next().is_none());
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        assert!(oracle_decide(&model, &[]).is_err());
        assert!(tau_hat(&[], &TauHatConfig::default()).is_err());
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let evidence = ShrinkageEvidence::new(&prior, 1.3).unwrap();
        assert!(one_group_decide_tuned(&evidence, 3.0, 0.1, &[], None).is_err());
        assert!(
            one_group_decide_eb(&evidence, 3.0, &[], &TauHatConfig::default(), None).is_err()
        );
        assert!(ShrinkageEvidence::new(&prior, 0.0).is_err());
    }
}
