//! Posterior computation under the one-group shrinkage model and the
//! two-group benchmark.
//!
//! Conditional on the global parameter τ and a count `y`, the shrinkage
//! coefficient `κ = 1/(1 + τ²λ²)` has posterior density proportional to
//! `κ^{a+α−1} (1−κ)^{y−a−1} L((1/τ²)(1/κ − 1))`, and the Poisson mean
//! satisfies `E(θ | y, τ) = (1 − E(κ | y, τ)) · (y + α)`. Everything testing
//! and estimation needs downstream reduces to the posterior mean of κ.
//!
//! Two routes are maintained deliberately and cross-checked in tests:
//!
//! * a generic quadrature route for any member of the prior class, working in
//!   `t = λ²` coordinates entirely in the log domain;
//! * a closed-form route for the TPBN and GH families, whose κ-posteriors are
//!   Gauss-hypergeometric with ratio-of-₂F₁ moments.
//!
//! Both expectations `E(κ)` and `E(1−κ)` are computed as their own integral
//! ratios (never as one minus the other) and then reconciled, which turns an
//! algebra or normalization slip into a loud failure instead of a silent
//! bias.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, CoreError, Result};
use crate::logquad::{integrate_halfline_log, integrate_unit_pow_log, sigmoid};
use crate::priors::{GaussHypergeometricPrior, GlobalLocalPrior, PriorFamily};
use crate::samplers::{nb_log_pmf, TwoGroupModel};
use crate::specfun::gauss_2f1;

/// Relative tolerance requested from each posterior integral.
const POSTERIOR_REL_TOL: f64 = 1e-9;
/// The two expectations must sum to 1 within this much before reconciliation.
const RECONCILE_TOL: f64 = 1e-7;

/// How a [`ShrinkageEstimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    ClosedForm,
    Quadrature,
}

impl std::fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimateMethod::ClosedForm => write!(f, "closed_form"),
            EstimateMethod::Quadrature => write!(f, "quadrature"),
        }
    }
}

/// Posterior summary of the shrinkage coefficient for one count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageEstimate {
    pub y: u64,
    pub tau: f64,
    /// `E(κ | y, τ)`, strictly inside (0, 1).
    pub e_kappa: f64,
    /// `E(1−κ | y, τ)`, strictly inside (0, 1); computed directly, not as a
    /// complement, then reconciled so the pair sums to one.
    pub e_one_minus_kappa: f64,
    /// `E(θ | y, τ) = e_one_minus_kappa · (y + α)`.
    pub e_theta: f64,
    pub method: EstimateMethod,
    /// Estimated relative error of the expectations.
    pub rel_error_estimate: f64,
}

/// Exact posterior quantities under the two-group Gamma–Poisson benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoGroupPosterior {
    /// Posterior signal probability `P(signal | y)`.
    pub w: f64,
    /// Posterior mean of the Gamma scale mixture,
    /// `(1−w)·β/(β+1) + w·(β+δ)/(β+δ+1)`.
    pub w_star: f64,
    /// `E(θ | y) = w_star · (y + α)`.
    pub e_theta: f64,
}

fn validate_alpha(context: &'static str, alpha: f64) -> Result<()> {
    require_positive(context, "alpha", alpha)
}

fn validate_tau(context: &'static str, tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(CoreError::domain(
            context,
            format!("tau must lie in (0,1], got {tau}"),
        ));
    }
    Ok(())
}

/// Log of the unnormalized κ-posterior density
/// `κ^{a+α−1} (1−κ)^{y−a−1} L((1/τ²)(1/κ−1))` at `κ ∈ (0,1)`.
pub fn kappa_log_density_unnormalized(
    prior: &GlobalLocalPrior,
    alpha: f64,
    y: u64,
    tau: f64,
    kappa: f64,
) -> Result<f64> {
    validate_alpha("kappa_log_density_unnormalized", alpha)?;
    validate_tau("kappa_log_density_unnormalized", tau)?;
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(CoreError::domain(
            "kappa_log_density_unnormalized",
            format!("kappa must lie strictly in (0,1), got {kappa}"),
        ));
    }
    let t = (1.0 / kappa - 1.0) / (tau * tau);
    Ok((prior.a + alpha - 1.0) * kappa.ln()
        + (y as f64 - prior.a - 1.0) * (-kappa).ln_1p()
        + prior.log_l(t)?)
}

/// Builds a reconciled estimate from the two independently computed
/// expectations.
fn reconcile(
    y: u64,
    tau: f64,
    alpha: f64,
    e_kappa: f64,
    e_one_minus_kappa: f64,
    method: EstimateMethod,
    rel_error_estimate: f64,
) -> Result<ShrinkageEstimate> {
    let sum = e_kappa + e_one_minus_kappa;
    let context = match method {
        EstimateMethod::ClosedForm => "posterior_kappa_mean_closed_form",
        EstimateMethod::Quadrature => "posterior_kappa_mean_quadrature",
    };
    if !(sum.is_finite() && (sum - 1.0).abs() <= RECONCILE_TOL) {
        return Err(CoreError::NonConvergence {
            context,
            iterations: 0,
            estimate: (sum - 1.0).abs(),
            target: RECONCILE_TOL,
        });
    }
    let e_kappa = e_kappa / sum;
    let e_one_minus_kappa = e_one_minus_kappa / sum;
    if !(e_kappa > 0.0 && e_kappa < 1.0) {
        return Err(CoreError::domain(
            context,
            format!("posterior mean of kappa left (0,1): {e_kappa}"),
        ));
    }
    Ok(ShrinkageEstimate {
        y,
        tau,
        e_kappa,
        e_one_minus_kappa,
        e_theta: e_one_minus_kappa * (y as f64 + alpha),
        method,
        rel_error_estimate: rel_error_estimate.max((sum - 1.0).abs()),
    })
}

/// Log of the t-space posterior integrand
/// `(τ²t)^{b_pow−1} τ² (1+τ²t)^{−c_pow} L(t)`; the `t = exp(u)` Jacobian is
/// supplied by the half-line integrator.
fn t_space_log_integrand<'a>(
    prior: &'a GlobalLocalPrior,
    tau: f64,
    b_pow: f64,
    c_pow: f64,
) -> impl Fn(f64) -> f64 + 'a {
    let log_tau2 = 2.0 * tau.ln();
    move |t: f64| {
        (b_pow - 1.0) * (log_tau2 + t.ln()) + log_tau2 - c_pow * (tau * tau * t).ln_1p()
            + prior.log_l_unchecked(t)
    }
}

/// Posterior mean of κ (and of 1−κ) by adaptive log-domain quadrature in
/// `t = λ²` coordinates, for any member of the prior class.
///
/// The κ-posterior transforms to `(τ²t)^{y−a−1} τ² (1+τ²t)^{−(y+α)} L(t)` on
/// `t ∈ (0, ∞)`; the extra factor κ contributes `(1+τ²t)^{−1}` and the extra
/// factor 1−κ contributes `τ²t (1+τ²t)^{−1}`. Counts at or below the tail
/// exponent of a prior whose `L` does not vanish at the origin make the
/// posterior non-integrable, which is reported as such rather than truncated.
pub fn posterior_kappa_mean_quadrature(
    prior: &GlobalLocalPrior,
    alpha: f64,
    y: u64,
    tau: f64,
) -> Result<ShrinkageEstimate> {
    validate_alpha("posterior_kappa_mean_quadrature", alpha)?;
    validate_tau("posterior_kappa_mean_quadrature", tau)?;
    let yf = y as f64;
    let b = yf - prior.a;
    let c = yf + alpha;
    let full = (0.0, f64::INFINITY);

    let den = integrate_halfline_log(
        t_space_log_integrand(prior, tau, b, c),
        full,
        POSTERIOR_REL_TOL,
    )?;
    let num_kappa = integrate_halfline_log(
        t_space_log_integrand(prior, tau, b, c + 1.0),
        full,
        POSTERIOR_REL_TOL,
    )?;
    let num_one_minus = integrate_halfline_log(
        t_space_log_integrand(prior, tau, b + 1.0, c + 1.0),
        full,
        POSTERIOR_REL_TOL,
    )?;

    let e_kappa = (num_kappa.log_value - den.log_value).exp();
    let e_one_minus = (num_one_minus.log_value - den.log_value).exp();
    let rel = den.rel_error + num_kappa.rel_error.max(num_one_minus.rel_error);
    reconcile(
        y,
        tau,
        alpha,
        e_kappa,
        e_one_minus,
        EstimateMethod::Quadrature,
        rel,
    )
}

/// `P(κ < ε | y, τ)` by the same t-space quadrature (`κ < ε ⟺ t > (1/ε−1)/τ²`).
pub fn posterior_kappa_below(
    prior: &GlobalLocalPrior,
    alpha: f64,
    y: u64,
    tau: f64,
    eps: f64,
) -> Result<f64> {
    posterior_kappa_tail(prior, alpha, y, tau, eps, true)
}

/// `P(κ > η | y, τ)` by the same t-space quadrature (`κ > η ⟺ t < (1/η−1)/τ²`).
pub fn posterior_kappa_above(
    prior: &GlobalLocalPrior,
    alpha: f64,
    y: u64,
    tau: f64,
    eta: f64,
) -> Result<f64> {
    posterior_kappa_tail(prior, alpha, y, tau, eta, false)
}

fn posterior_kappa_tail(
    prior: &GlobalLocalPrior,
    alpha: f64,
    y: u64,
    tau: f64,
    cut: f64,
    below: bool,
) -> Result<f64> {
    let context = if below {
        "posterior_kappa_below"
    } else {
        "posterior_kappa_above"
    };
    validate_alpha(context, alpha)?;
    validate_tau(context, tau)?;
    if !(cut > 0.0 && cut < 1.0) {
        return Err(CoreError::domain(
            context,
            format!("the kappa cutoff must lie strictly in (0,1), got {cut}"),
        ));
    }
    let yf = y as f64;
    let b = yf - prior.a;
    let c = yf + alpha;
    let t_cut = (1.0 / cut - 1.0) / (tau * tau);
    let range = if below {
        (t_cut, f64::INFINITY)
    } else {
        (0.0, t_cut)
    };
    let den = integrate_halfline_log(
        t_space_log_integrand(prior, tau, b, c),
        (0.0, f64::INFINITY),
        POSTERIOR_REL_TOL,
    )?;
    let num = integrate_halfline_log(
        t_space_log_integrand(prior, tau, b, c),
        range,
        POSTERIOR_REL_TOL,
    )?;
    Ok((num.log_value - den.log_value).exp().min(1.0))
}

/// A prior whose κ-posterior has the Gauss-hypergeometric closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConjugateFamily {
    /// TPBN with hyperparameters `(a1, a2)`.
    Tpbn { a1: f64, a2: f64 },
    /// The GH κ-prior itself.
    GaussHypergeometric(GaussHypergeometricPrior),
}

impl ConjugateFamily {
    /// Extracts the closed-form family from a λ²-class prior, failing for
    /// families without one.
    pub fn from_global_local(prior: &GlobalLocalPrior) -> Result<Self> {
        match (prior.family, prior.a1, prior.a2) {
            (PriorFamily::Tpbn, Some(a1), Some(a2)) => Ok(ConjugateFamily::Tpbn { a1, a2 }),
            _ => Err(CoreError::domain(
                "ConjugateFamily::from_global_local",
                format!("the {} family has no closed-form posterior", prior.family),
            )),
        }
    }

    /// The κ-posterior's GH-form exponents `(A, B, γ)` given `(α, y)`: the
    /// posterior density is `∝ κ^{A−1}(1−κ)^{B−1}[1−(1−τ²)κ]^{−γ}`.
    fn posterior_exponents(&self, alpha: f64, y: u64) -> (f64, f64, f64) {
        match *self {
            ConjugateFamily::Tpbn { a1, a2 } => (a2 + alpha, y as f64 + a1, a1 + a2),
            ConjugateFamily::GaussHypergeometric(gh) => {
                (gh.a1 + alpha, gh.a2 + y as f64, gh.gamma)
            }
        }
    }
}

/// Posterior mean of κ (and of 1−κ) in closed form for the TPBN and GH
/// families: with `z = 1−τ²` and GH-form exponents `(A, B, γ)`,
///
/// ```text
/// E(κ)   = A/(A+B) · ₂F₁(γ, A+1; A+B+1; z) / ₂F₁(γ, A; A+B; z)
/// E(1−κ) = B/(A+B) · ₂F₁(γ, A;   A+B+1; z) / ₂F₁(γ, A; A+B; z)
/// ```
pub fn posterior_kappa_mean_closed_form(
    family: &ConjugateFamily,
    alpha: f64,
    y: u64,
    tau: f64,
) -> Result<ShrinkageEstimate> {
    validate_alpha("posterior_kappa_mean_closed_form", alpha)?;
    validate_tau("posterior_kappa_mean_closed_form", tau)?;
    let (a_exp, b_exp, gamma) = family.posterior_exponents(alpha, y);
    let z = 1.0 - tau * tau;
    let den = gauss_2f1(gamma, a_exp, a_exp + b_exp, z)?;
    let num_kappa = gauss_2f1(gamma, a_exp + 1.0, a_exp + b_exp + 1.0, z)?;
    let num_one_minus = gauss_2f1(gamma, a_exp, a_exp + b_exp + 1.0, z)?;

    // relative errors via logs: the ₂F₁ values themselves may overflow f64
    let rel_of = |eval: &crate::specfun::HypergeometricEval| {
        if eval.abs_error_estimate == 0.0 {
            0.0
        } else {
            (eval.abs_error_estimate.ln() - eval.log_value).exp()
        }
    };
    let e_kappa =
        a_exp / (a_exp + b_exp) * (num_kappa.log_value - den.log_value).exp();
    let e_one_minus =
        b_exp / (a_exp + b_exp) * (num_one_minus.log_value - den.log_value).exp();
    let rel = rel_of(&den) + rel_of(&num_kappa).max(rel_of(&num_one_minus));
    reconcile(
        y,
        tau,
        alpha,
        e_kappa,
        e_one_minus,
        EstimateMethod::ClosedForm,
        rel,
    )
}

/// Posterior mean of κ for the GH prior by direct quadrature of the GH-form
/// κ-density (endpoint powers folded analytically). This is the independent
/// cross-check of the closed-form route and carries the `Quadrature` tag.
pub fn posterior_kappa_mean_gh_quadrature(
    prior: &GaussHypergeometricPrior,
    alpha: f64,
    y: u64,
    tau: f64,
) -> Result<ShrinkageEstimate> {
    validate_alpha("posterior_kappa_mean_gh_quadrature", alpha)?;
    validate_tau("posterior_kappa_mean_gh_quadrature", tau)?;
    let family = ConjugateFamily::GaussHypergeometric(*prior);
    let (a_exp, b_exp, gamma) = family.posterior_exponents(alpha, y);
    let z = 1.0 - tau * tau;
    let log_h = |k: f64| -gamma * (-z * k).ln_1p();
    let full = (0.0, 1.0);

    let den = integrate_unit_pow_log(a_exp, b_exp, log_h, full, POSTERIOR_REL_TOL)?;
    let num_kappa = integrate_unit_pow_log(a_exp + 1.0, b_exp, log_h, full, POSTERIOR_REL_TOL)?;
    let num_one_minus =
        integrate_unit_pow_log(a_exp, b_exp + 1.0, log_h, full, POSTERIOR_REL_TOL)?;

    let e_kappa = (num_kappa.log_value - den.log_value).exp();
    let e_one_minus = (num_one_minus.log_value - den.log_value).exp();
    let rel = den.rel_error + num_kappa.rel_error.max(num_one_minus.rel_error);
    reconcile(
        y,
        tau,
        alpha,
        e_kappa,
        e_one_minus,
        EstimateMethod::Quadrature,
        rel,
    )
}

/// `E(θ | y, τ)` from an already-computed posterior mean of 1−κ.
pub fn posterior_theta_mean(e_one_minus_kappa: f64, y: u64, alpha: f64) -> f64 {
    e_one_minus_kappa * (y as f64 + alpha)
}

/// Natural log of the unnormalized κ-posterior mass
/// `∫₀¹ κ^{a+α−1} (1−κ)^{y−a−1} L((1/τ²)(1/κ−1)) dκ`,
/// evaluated by the t-space quadrature route. This is the marginal-likelihood
/// kernel whose lower bound the bounds module certifies.
pub fn posterior_log_normalizer(
    prior: &GlobalLocalPrior,
    alpha: f64,
    y: u64,
    tau: f64,
) -> Result<f64> {
    validate_alpha("posterior_log_normalizer", alpha)?;
    validate_tau("posterior_log_normalizer", tau)?;
    let yf = y as f64;
    integrate_halfline_log(
        t_space_log_integrand(prior, tau, yf - prior.a, yf + alpha),
        (0.0, f64::INFINITY),
        POSTERIOR_REL_TOL,
    )
    .map(|r| r.log_value)
}

/// Exact posterior under the two-group benchmark: the signal probability
/// `w = p·f₁(y) / (p·f₁(y) + (1−p)·f₀(y))` with the negative binomial
/// marginals of each group, evaluated in the log domain, and the posterior
/// mean `E(θ|y) = w_star · (y + α)`.
pub fn two_group_posterior(model: &TwoGroupModel, y: u64) -> Result<TwoGroupPosterior> {
    let log_null = (1.0 - model.p).ln() + nb_log_pmf(y, model.alpha, model.null_success_prob())?;
    let log_signal = model.p.ln() + nb_log_pmf(y, model.alpha, model.signal_success_prob())?;
    let w = sigmoid(log_signal - log_null);

    let null_mean_factor = model.beta / (model.beta + 1.0);
    let signal_mean_factor = (model.beta + model.delta) / (model.beta + model.delta + 1.0);
    let w_star = (1.0 - w) * null_mean_factor + w * signal_mean_factor;
    Ok(TwoGroupPosterior {
        w,
        w_star,
        e_theta: w_star * (y as f64 + model.alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::{make_gdp, make_generic, make_tpbn};
    use std::sync::Arc;

    fn assert_rel(got: f64, want: f64, tol: f64, label: &str) {
        let rel = if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        };
        assert!(rel <= tol, "{label}: got {got}, want {want} (rel {rel:.3e})");
    }

    /// 50-digit-oracle posterior means for TPBN(1.5,1.5), α = 1.3:
    /// (y, τ, E(κ), E(1−κ)).
    const TPBN_13_ROWS: [(u64, f64, f64, f64); 28] = [
        (0, 0.01, 0.99971252445879113, 0.00028747554120887282),
        (0, 0.1, 0.97952641658455730, 0.020473583415442700),
        (0, 0.5, 0.81170332265455079, 0.18829667734544921),
        (0, 1.0, 0.65116279069767442, 0.34883720930232558),
        (1, 0.01, 0.99069319076460265, 0.0093068092353973451),
        (1, 0.1, 0.91451408789406840, 0.085485912105931598),
        (1, 0.5, 0.68606489122966937, 0.31393510877033063),
        (1, 1.0, 0.52830188679245283, 0.47169811320754717),
        (2, 0.01, 0.84050464055985202, 0.15949535944014798),
        (2, 0.1, 0.77519257810743325, 0.22480742189256675),
        (2, 0.5, 0.57945159984858954, 0.42054840015141046),
        (2, 1.0, 0.44444444444444444, 0.55555555555555556),
        (5, 0.01, 0.44439114713454369, 0.55560885286545631),
        (5, 0.1, 0.43941597041406351, 0.56058402958593649),
        (5, 0.5, 0.37513849680406172, 0.62486150319593828),
        (5, 1.0, 0.30107526881720430, 0.69892473118279570),
        (10, 0.01, 0.24777770032248237, 0.75222229967751763),
        (10, 0.1, 0.24680830293495464, 0.75319169706504536),
        (10, 0.5, 0.22824534766475420, 0.77175465233524580),
        (10, 1.0, 0.19580419580419580, 0.80419580419580420),
        (50, 0.01, 0.054580551969879171, 0.94541944803012083),
        (50, 0.1, 0.054546476156935518, 0.94545352384306448),
        (50, 0.5, 0.053749857426120450, 0.94625014257387955),
        (50, 1.0, 0.051565377532228361, 0.94843462246777164),
        (426, 0.01, 0.0065527685853782524, 0.99344723141462175),
        (426, 0.1, 0.0065523091151465319, 0.99344769088485347),
        (426, 0.5, 0.0065412151313791325, 0.99345878486862087),
        (426, 1.0, 0.0065070880780850569, 0.99349291192191494),
    ];

    #[test]
    fn closed_form_matches_reference_values() {
        let family = ConjugateFamily::Tpbn { a1: 1.5, a2: 1.5 };
        for (y, tau, e_k, e_1mk) in TPBN_13_ROWS {
            let est = posterior_kappa_mean_closed_form(&family, 1.3, y, tau).unwrap();
            assert_rel(est.e_kappa, e_k, 1e-9, &format!("E(kappa|{y},{tau})"));
            assert_rel(
                est.e_one_minus_kappa,
                e_1mk,
                1e-9,
                &format!("E(1-kappa|{y},{tau})"),
            );
            assert_eq!(est.method, EstimateMethod::ClosedForm);
        }
        // second shape parameter to catch α-wiring mistakes
        let rows_15: [(u64, f64, f64); 6] = [
            (0, 0.05, 0.99392755108655656),
            (0, 0.5, 0.81858808843273562),
            (3, 0.05, 0.65948310926373175),
            (3, 0.5, 0.50994709014090847),
            (7, 0.05, 0.35235667549443430),
            (7, 0.5, 0.31350485038143286),
        ];
        for (y, tau, e_k) in rows_15 {
            let est = posterior_kappa_mean_closed_form(&family, 1.5, y, tau).unwrap();
            assert_rel(est.e_kappa, e_k, 1e-9, &format!("alpha 1.5 ({y},{tau})"));
        }
    }

    #[test]
    fn gh_closed_form_matches_reference_values() {
        let gh = GaussHypergeometricPrior::new(0.5, 0.5, 1.0).unwrap();
        let family = ConjugateFamily::GaussHypergeometric(gh);
        let rows: [(u64, f64, f64); 8] = [
            (0, 0.05, 0.97860447888136305),
            (0, 0.5, 0.85291124745815157),
            (1, 0.05, 0.75964980163394606),
            (1, 0.5, 0.62328866927110449),
            (5, 0.05, 0.28551107581573853),
            (5, 0.5, 0.27047167293453020),
            (20, 0.05, 0.084495628735809629),
            (20, 0.5, 0.083423900574881633),
        ];
        for (y, tau, e_k) in rows {
            let est = posterior_kappa_mean_closed_form(&family, 1.3, y, tau).unwrap();
            assert_rel(est.e_kappa, e_k, 1e-9, &format!("GH ({y},{tau})"));
        }
    }

    #[test]
    fn quadrature_matches_reference_values_for_gdp() {
        // no closed form exists for GDP: the nested-quadrature route is the
        // only one, pinned directly to the oracle
        let prior = make_gdp(2.5, 1.0).unwrap();
        let rows: [(u64, f64, f64, f64); 6] = [
            (0, 0.1, 0.99838265679962785, 0.0016173432003721488),
            (0, 0.5, 0.96985036177658238, 0.030149638223417711),
            (2, 0.1, 0.93003908093122334, 0.069960919068776657),
            (2, 0.5, 0.78631847064257104, 0.21368152935742896),
            (10, 0.1, 0.32836132439778939, 0.67163867560221061),
            (10, 0.5, 0.30124614622335914, 0.69875385377664086),
        ];
        for (y, tau, e_k, e_1mk) in rows {
            let est = posterior_kappa_mean_quadrature(&prior, 1.3, y, tau).unwrap();
            assert_rel(est.e_kappa, e_k, 1e-6, &format!("GDP E(kappa|{y},{tau})"));
            assert_rel(
                est.e_one_minus_kappa,
                e_1mk,
                1e-6,
                &format!("GDP E(1-kappa|{y},{tau})"),
            );
            assert_eq!(est.method, EstimateMethod::Quadrature);
        }
    }

    #[test]
    fn closed_form_and_quadrature_agree_on_grid() {
        // the two routes share no code beyond ln Γ: one goes through ₂F₁,
        // the other through adaptive quadrature in t-space
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let family = ConjugateFamily::from_global_local(&prior).unwrap();
        for alpha in [1.0, 1.3, 1.5] {
            for y in [0u64, 1, 2, 5, 10, 50, 200] {
                for tau in [1.0, 0.3, 0.05, 1e-3] {
                    let cf = posterior_kappa_mean_closed_form(&family, alpha, y, tau).unwrap();
                    let qd = posterior_kappa_mean_quadrature(&prior, alpha, y, tau).unwrap();
                    let label = format!("alpha={alpha}, y={y}, tau={tau}");
                    assert_rel(qd.e_kappa, cf.e_kappa, 1e-6, &label);
                    assert_rel(qd.e_one_minus_kappa, cf.e_one_minus_kappa, 1e-6, &label);
                }
            }
        }
    }

    #[test]
    fn gh_closed_form_matches_direct_quadrature() {
        let gh = GaussHypergeometricPrior::new(0.5, 0.5, 1.0).unwrap();
        let family = ConjugateFamily::GaussHypergeometric(gh);
        for (alpha, y, tau) in [(1.0, 10u64, 0.02), (1.3, 0, 0.5), (1.3, 20, 0.05)] {
            let cf = posterior_kappa_mean_closed_form(&family, alpha, y, tau).unwrap();
            let qd = posterior_kappa_mean_gh_quadrature(&gh, alpha, y, tau).unwrap();
            let label = format!("GH alpha={alpha}, y={y}, tau={tau}");
            assert_rel(qd.e_kappa, cf.e_kappa, 1e-6, &label);
            assert_rel(qd.e_one_minus_kappa, cf.e_one_minus_kappa, 1e-6, &label);
        }
    }

    #[test]
    fn uniform_global_parameter_reduces_to_beta_moments() {
        // τ = 1 makes z = 0 and both ₂F₁ factors 1: E(κ) = A/(A+B)
        let family = ConjugateFamily::Tpbn { a1: 1.5, a2: 1.5 };
        let est = posterior_kappa_mean_closed_form(&family, 1.3, 2, 1.0).unwrap();
        assert_rel(est.e_kappa, 4.0 / 9.0, 1e-12, "tau=1, alpha=1.3, y=2");
        let est = posterior_kappa_mean_closed_form(&family, 1.5, 4, 1.0).unwrap();
        assert_rel(est.e_kappa, 3.0 / 8.5, 1e-12, "tau=1, alpha=1.5, y=4");
    }

    #[test]
    fn estimates_are_reconciled_and_consistent() {
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let family = ConjugateFamily::from_global_local(&prior).unwrap();
        for (y, tau) in [(0u64, 0.05), (3, 0.3), (50, 1.0)] {
            for est in [
                posterior_kappa_mean_closed_form(&family, 1.3, y, tau).unwrap(),
                posterior_kappa_mean_quadrature(&prior, 1.3, y, tau).unwrap(),
            ] {
                assert!(
                    (est.e_kappa + est.e_one_minus_kappa - 1.0).abs() <= 1e-12,
                    "reconciled sum off at ({y},{tau})"
                );
                assert_rel(
                    est.e_theta,
                    est.e_one_minus_kappa * (y as f64 + 1.3),
                    1e-12,
                    "theta identity",
                );
                assert!(est.rel_error_estimate >= 0.0);
                assert_eq!(
                    est.e_theta,
                    posterior_theta_mean(est.e_one_minus_kappa, y, 1.3)
                );
            }
        }
    }

    #[test]
    fn shrinkage_weakens_as_tau_grows() {
        // more prior mass on large λ²τ² means less shrinkage: E(1−κ) rises
        // with τ at every count
        let family = ConjugateFamily::Tpbn { a1: 1.5, a2: 1.5 };
        for y in [0u64, 3, 10] {
            let mut prev = -1.0;
            for tau in [1e-3, 0.05, 0.3, 1.0] {
                let est = posterior_kappa_mean_closed_form(&family, 1.3, y, tau).unwrap();
                assert!(
                    est.e_one_minus_kappa >= prev - 1e-12,
                    "E(1-kappa) not monotone at y={y}, tau={tau}"
                );
                prev = est.e_one_minus_kappa;
            }
        }
    }

    #[test]
    fn vanishing_tau_limit_matches_posterior_mean_ratio() {
        // as τ → 0 with y above the tail exponent, E(κ|y,τ) → (a+α)/(y+α)
        let family = ConjugateFamily::Tpbn { a1: 1.5, a2: 1.5 };
        for alpha in [1.0, 1.5] {
            for y in [2u64, 5, 10, 20, 50] {
                let est = posterior_kappa_mean_closed_form(&family, alpha, y, 1e-4).unwrap();
                let m = (1.5 + alpha) / (y as f64 + alpha);
                assert!(
                    (est.e_kappa - m).abs() <= 1e-2,
                    "limit miss at alpha={alpha}, y={y}: {} vs {m}",
                    est.e_kappa
                );
            }
        }
        // the worked instance: alpha = 1.5, y = 6 gives m = 3/7.5 = 0.4
        let est = posterior_kappa_mean_closed_form(&family, 1.5, 6, 1e-4).unwrap();
        assert!((est.e_kappa - 0.4).abs() <= 1e-2);
    }

    #[test]
    fn large_counts_pass_through_nearly_unshrunk() {
        let family = ConjugateFamily::Tpbn { a1: 1.5, a2: 1.5 };
        for tau in [1e-2, 1e-3] {
            let est = posterior_kappa_mean_closed_form(&family, 1.5, 426, tau).unwrap();
            let floor = 1.0 - (1.5 + 1.5) / (426.0 + 1.5) - 0.01;
            assert!(
                est.e_one_minus_kappa >= floor,
                "over-shrinkage of a large count at tau={tau}"
            );
            assert!(est.e_theta > 420.0 && est.e_theta < 427.5);
        }
    }

    #[test]
    fn two_group_posterior_matches_reference_values() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        let rows: [(u64, f64, f64, f64); 3] = [
            (0, 0.018851537520548678, 0.060918192254355329, 0.079193649930661927),
            (2, 0.82775010245008610, 0.63156973717819125, 2.0841801326880311),
            (5, 0.99994739287732196, 0.75304930714449521, 4.7442106350103198),
        ];
        for (y, w, w_star, e_theta) in rows {
            let post = two_group_posterior(&model, y).unwrap();
            assert_rel(post.w, w, 1e-12, &format!("w({y})"));
            assert_rel(post.w_star, w_star, 1e-12, &format!("w_star({y})"));
            assert_rel(post.e_theta, e_theta, 1e-12, &format!("e_theta({y})"));
        }
    }

    #[test]
    fn two_group_signal_probability_closed_case() {
        // unit-shape case where every factor is rational: f0(0) = 1/2,
        // f1(0) = 1/4, so w = 0.025/0.475 = 1/19
        let model = TwoGroupModel::new(1.0, 1.0, 2.0, 0.1).unwrap();
        let post = two_group_posterior(&model, 0).unwrap();
        assert_rel(post.w, 1.0 / 19.0, 1e-13, "w(0)");
    }

    #[test]
    fn two_group_signal_probability_is_monotone_in_count() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        let mut prev = -1.0;
        for y in 0..=30 {
            let w = two_group_posterior(&model, y).unwrap().w;
            assert!(w >= prev - 1e-14, "w not monotone at y={y}");
            prev = w;
        }
    }

    #[test]
    fn two_group_posterior_mean_stays_between_group_means() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        let lo = model.beta / (model.beta + 1.0);
        let hi = (model.beta + model.delta) / (model.beta + model.delta + 1.0);
        for y in [0u64, 1, 4, 9, 40] {
            let post = two_group_posterior(&model, y).unwrap();
            assert!(post.w_star >= lo && post.w_star <= hi);
            let direct =
                (1.0 - post.w) * lo + post.w * hi;
            assert_rel(post.w_star, direct, 1e-15, "affine identity");
        }
    }

    #[test]
    fn vanishing_separation_makes_signal_probability_equal_prior() {
        // with δ ≈ 0 the groups coincide, so the data carry no information
        // and w stays at the prior signal fraction for every count
        let model = TwoGroupModel::new(1.3, 0.05, 1e-9, 0.1).unwrap();
        for y in [0u64, 5, 20] {
            let post = two_group_posterior(&model, y).unwrap();
            assert!(
                (post.w - 0.1).abs() <= 1e-6,
                "w({y}) = {} far from prior fraction",
                post.w
            );
        }
    }

    #[test]
    fn kappa_density_rejects_boundary_points() {
        let prior = make_tpbn(1.5, 1.5).unwrap();
        assert!(kappa_log_density_unnormalized(&prior, 1.3, 2, 0.5, 0.0).is_err());
        assert!(kappa_log_density_unnormalized(&prior, 1.3, 2, 0.5, 1.0).is_err());
        assert!(kappa_log_density_unnormalized(&prior, 1.3, 2, 0.5, 0.3).is_ok());
    }

    #[test]
    fn flat_local_component_below_tail_exponent_is_non_integrable() {
        // with L ≡ 1 the κ-posterior behaves like (1−κ)^{y−a−1} near κ = 1;
        // at y ≤ a that is not integrable and must be reported, not truncated
        let flat = make_generic(1.0, 1.0, Arc::new(|_| 0.0), 1.0, 1.0, Some(1.0)).unwrap();
        for y in [0u64, 1] {
            let err = posterior_kappa_mean_quadrature(&flat, 1.3, y, 0.5);
            assert!(
                matches!(err, Err(CoreError::NonIntegrable(_))),
                "y={y}: {err:?}"
            );
        }
        // one count above the tail exponent the posterior is proper again
        assert!(posterior_kappa_mean_quadrature(&flat, 1.3, 2, 0.5).is_ok());
    }

    #[test]
    fn t_space_and_kappa_space_normalizers_agree() {
        // substituting κ = 1/(1+τ²t) maps the t-space kernel
        // (τ²t)^{y−a2−1} τ² (1+τ²t)^{−(y+α)} L(t) dt exactly onto the κ-space
        // kernel κ^{a2+α−1}(1−κ)^{y+a1−1}[1−(1−τ²)κ]^{−(a1+a2)} dκ, with no
        // leftover constant; the two quadrature routes must agree in the log
        let (a1, a2) = (1.5, 1.5);
        let prior = make_tpbn(a1, a2).unwrap();
        let alpha = 1.3;
        for (y, tau) in [(0u64, 0.05), (3, 0.5), (10, 0.01)] {
            let yf = y as f64;
            let t_route = integrate_halfline_log(
                t_space_log_integrand(&prior, tau, yf - prior.a, yf + alpha),
                (0.0, f64::INFINITY),
                1e-10,
            )
            .unwrap();
            let z = 1.0 - tau * tau;
            let k_route = integrate_unit_pow_log(
                a2 + alpha,
                yf + a1,
                |k: f64| -(a1 + a2) * (-z * k).ln_1p(),
                (0.0, 1.0),
                1e-10,
            )
            .unwrap();
            let got = t_route.log_value - k_route.log_value;
            assert!(
                got.abs() <= 1e-7,
                "normalizer routes disagree at ({y},{tau}): log ratio {got}"
            );
        }
    }

    #[test]
    fn truncated_probabilities_are_coherent() {
        let prior = make_tpbn(1.5, 1.5).unwrap();
        let below = posterior_kappa_below(&prior, 1.3, 3, 0.1, 0.4).unwrap();
        let above = posterior_kappa_above(&prior, 1.3, 3, 0.1, 0.4).unwrap();
        assert!((below + above - 1.0).abs() <= 1e-7, "{below} + {above}");
        // nested events keep nested probabilities
        let below_wider = posterior_kappa_below(&prior, 1.3, 3, 0.1, 0.7).unwrap();
        assert!(below_wider >= below);
        // tiny τ concentrates κ near 1 for a null-like count
        let p_small = posterior_kappa_below(&prior, 1.5, 0, 0.01, 0.5).unwrap();
        assert_rel(p_small, 3.7666650158098624e-7, 1e-5, "P(kappa<1/2|0,0.01)");
    }

    #[test]
    fn posterior_rejects_invalid_arguments() {
        let prior = make_tpbn(1.5, 1.5).unwrap();
        assert!(posterior_kappa_mean_quadrature(&prior, 0.0, 1, 0.5).is_err());
        assert!(posterior_kappa_mean_quadrature(&prior, 1.3, 1, 0.0).is_err());
        assert!(posterior_kappa_mean_quadrature(&prior, 1.3, 1, 1.5).is_err());
        let family = ConjugateFamily::Tpbn { a1: 1.5, a2: 1.5 };
        assert!(posterior_kappa_mean_closed_form(&family, -1.0, 1, 0.5).is_err());
        assert!(posterior_kappa_below(&prior, 1.3, 1, 0.5, 0.0).is_err());
        assert!(posterior_kappa_above(&prior, 1.3, 1, 0.5, 1.0).is_err());
        let gdp = make_gdp(2.5, 1.0).unwrap();
        assert!(ConjugateFamily::from_global_local(&gdp).is_err());
    }
}
