//! Data generation for the two-group Gamma–Poisson benchmark and exact
//! pmf/cdf evaluation for the negative binomial with real-valued size.
//!
//! The generative chain per coordinate is: a Bernoulli signal indicator, a
//! Gamma mean (scale parametrization: density `x^{α−1} e^{−x/σ} / (Γ(α) σ^α)`,
//! so the mean is `α·σ`), then a Poisson count. Marginally each count is a
//! two-component negative-binomial mixture with success probabilities
//! `1/(β+1)` (null) and `1/(β+δ+1)` (signal).
//!
//! Reproducibility contract: every coordinate draws from its own ChaCha8
//! substream keyed by `(seed, index)` through a SplitMix64-style avalanche,
//! so datasets are bitwise identical regardless of evaluation order or
//! parallelism, and simulation replications can derive independent master
//! seeds via [`replication_seed`].

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, require_unit_open, CoreError, Result};
use crate::specfun::log_binom;

/// Two-group mixture of Gamma means: with probability `1−p` the mean is
/// `Ga(alpha, beta)` (scale parametrization), with probability `p` it is
/// `Ga(alpha, beta+delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoGroupModel {
    /// Gamma shape α.
    pub alpha: f64,
    /// Null-component Gamma scale β.
    pub beta: f64,
    /// Signal-component scale increment δ; the signal scale is β+δ.
    pub delta: f64,
    /// Proportion of signal coordinates, strictly inside (0, 1).
    pub p: f64,
}

impl TwoGroupModel {
    pub fn new(alpha: f64, beta: f64, delta: f64, p: f64) -> Result<Self> {
        require_positive("TwoGroupModel", "alpha", alpha)?;
        require_positive("TwoGroupModel", "beta", beta)?;
        require_positive("TwoGroupModel", "delta", delta)?;
        require_unit_open("TwoGroupModel", "p", p)?;
        Ok(TwoGroupModel {
            alpha,
            beta,
            delta,
            p,
        })
    }

    /// Success probability of the null marginal component, `1/(β+1)`.
    #[must_use]
    pub fn null_success_prob(&self) -> f64 {
        1.0 / (self.beta + 1.0)
    }

    /// Success probability of the signal marginal component, `1/(β+δ+1)`.
    #[must_use]
    pub fn signal_success_prob(&self) -> f64 {
        1.0 / (self.beta + self.delta + 1.0)
    }
}

/// A simulated dataset: counts, their latent signal labels, and the seed that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedDataset {
    /// Observed Poisson counts.
    pub counts: Vec<u64>,
    /// Latent labels: 1 marks a signal coordinate, 0 a null coordinate.
    pub truth: Vec<u8>,
    /// Seed the dataset was generated from.
    pub seed: u64,
}

impl GeneratedDataset {
    /// Writes the dataset as CSV with header `index,count,truth`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["index", "count", "truth"])?;
        for (i, (count, truth)) in self.counts.iter().zip(&self.truth).enumerate() {
            wtr.write_record([i.to_string(), count.to_string(), truth.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// SplitMix64 avalanche (finalization) function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the master seed of one simulation replication from the study seed.
/// Distinct replications get statistically independent ChaCha8 key streams.
#[must_use]
pub fn replication_seed(study_seed: u64, replication: u64) -> u64 {
    mix64(mix64(study_seed ^ 0x243F_6A88_85A3_08D3) ^ replication.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Independent ChaCha8 substream for one coordinate of one dataset.
pub(crate) fn substream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let state = mix64(mix64(seed ^ 0x4528_21E6_38D0_1377) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    let mut key = [0u8; 32];
    let mut ctr = state;
    for chunk in key.chunks_exact_mut(8) {
        ctr = ctr.wrapping_add(0x9E37_79B9_7F4A_7C15);
        chunk.copy_from_slice(&mix64(ctr).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn validate_nb_params(context: &'static str, size: f64, success_prob: f64) -> Result<()> {
    require_positive(context, "size", size)?;
    if !(success_prob > 0.0 && success_prob < 1.0) {
        return Err(CoreError::domain(
            context,
            format!("success_prob must lie strictly in (0,1), got {success_prob}"),
        ));
    }
    Ok(())
}

/// Natural log of the negative-binomial pmf with real-valued size:
/// `ln P(Y=y)` for `P(Y=y) = C(y+size−1, y) (1−q)^y q^size` with
/// `q = success_prob`. Kept in the log domain so extreme counts, whose
/// probabilities underflow f64 linearly, stay usable in likelihood ratios.
pub(crate) fn nb_log_pmf(y: u64, size: f64, success_prob: f64) -> Result<f64> {
    validate_nb_params("nb_log_pmf", size, success_prob)?;
    if y == 0 {
        // C(size−1, 0) = 1 for every size > 0, including size < 1 where the
        // general-binomial route would leave its domain
        return Ok(size * success_prob.ln());
    }
    let yf = y as f64;
    Ok(log_binom(yf + size - 1.0, yf)?
        + yf * (-success_prob).ln_1p()
        + size * success_prob.ln())
}

/// Negative-binomial pmf with real-valued size:
/// `P(Y=y) = C(y+size−1, y) (1−q)^y q^size` with `q = success_prob`,
/// evaluated in the log domain.
#[must_use = "returns the computed probability"]
pub fn nb_pmf(y: u64, size: f64, success_prob: f64) -> Result<f64> {
    Ok(nb_log_pmf(y, size, success_prob)?.exp())
}

/// Negative-binomial cdf at a real threshold:
/// `P(Y ≤ y) = Σ_{k=0}^{⌊y⌋} nb_pmf(k)`; zero when `y < 0`.
#[must_use = "returns the computed probability"]
pub fn nb_cdf(y: f64, size: f64, success_prob: f64) -> Result<f64> {
    validate_nb_params("nb_cdf", size, success_prob)?;
    if !y.is_finite() {
        return Err(CoreError::domain(
            "nb_cdf",
            format!("threshold must be finite, got {y}"),
        ));
    }
    if y < 0.0 {
        return Ok(0.0);
    }
    let top = y.floor() as u64;
    let mut sum = 0.0;
    for k in 0..=top {
        sum += nb_pmf(k, size, success_prob)?;
    }
    Ok(sum.min(1.0))
}

/// Marginal pmf of a count under the two-group model: the mixture
/// `(1−p)·NB(α, 1/(β+1)) + p·NB(α, 1/(β+δ+1))`.
#[must_use = "returns the computed probability"]
pub fn two_group_marginal_pmf(model: &TwoGroupModel, y: u64) -> Result<f64> {
    let null = nb_pmf(y, model.alpha, model.null_success_prob())?;
    let signal = nb_pmf(y, model.alpha, model.signal_success_prob())?;
    Ok((1.0 - model.p) * null + model.p * signal)
}

/// One Gamma draw in the scale parametrization (mean `shape·scale`).
pub fn gamma_sample<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    let dist = Gamma::new(shape, scale).map_err(|e| {
        CoreError::domain("gamma_sample", format!("invalid parameters ({shape}, {scale}): {e}"))
    })?;
    Ok(dist.sample(rng))
}

/// One Poisson draw; a mean of exactly zero yields zero without consuming
/// randomness.
pub fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| {
        CoreError::domain("poisson_sample", format!("invalid mean {mean}: {e}"))
    })?;
    Ok(dist.sample(rng) as u64)
}

/// Generates `n` coordinates from the two-group model: per coordinate, an
/// independent substream draws the signal indicator, then the Gamma mean,
/// then the Poisson count. Bitwise deterministic given `(model, n, seed)`.
pub fn generate_two_group(model: &TwoGroupModel, n: usize, seed: u64) -> Result<GeneratedDataset> {
    if n == 0 {
        return Err(CoreError::domain("generate_two_group", "n must be at least 1"));
    }
    let mut counts = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for index in 0..n {
        let mut rng = substream_rng(seed, index as u64);
        let is_signal = rng.gen::<f64>() < model.p;
        let scale = if is_signal {
            model.beta + model.delta
        } else {
            model.beta
        };
        let theta = gamma_sample(model.alpha, scale, &mut rng)?;
        let y = poisson_sample(theta, &mut rng)?;
        counts.push(y);
        truth.push(u8::from(is_signal));
    }
    Ok(GeneratedDataset {
        counts,
        truth,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{inc_beta_reg, inc_gamma_reg_upper};

    const REL_TOL: f64 = 1e-12;

    fn assert_rel(got: f64, want: f64, tol: f64, label: &str) {
        let rel = if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        };
        assert!(rel <= tol, "{label}: got {got}, want {want} (rel {rel:.3e})");
    }

    #[test]
    fn nb_pmf_matches_reference_values() {
        // frozen from the 50-digit oracle (tools/gen_reference_values.py)
        let cases = [
            (0u64, 1.3, 1.0 / 1.005, 0.99353717053657306),
            (1, 1.3, 1.0 / 1.005, 0.0064258622970027113),
            (0, 1.3, 1.0 / 4.05, 0.16229624426039095),
            (1, 1.3, 1.0 / 4.05, 0.15889002678825929),
            (2, 1.3, 1.0 / 4.05, 0.13760660961970850),
            (5, 1.3, 1.0 / 4.05, 0.073668318625819676),
            (3, 1.5, 1.0 / 11.0, 0.045048566782587113),
            (10, 1.5, 1.0 / 11.0, 0.039102277480116336),
        ];
        for (y, r, q, want) in cases {
            assert_rel(nb_pmf(y, r, q).unwrap(), want, REL_TOL, &format!("nb_pmf({y},{r},{q})"));
        }
    }

    #[test]
    fn nb_pmf_closed_form_spot_checks() {
        // pmf at zero is q^size: with size 1.3, q = 1/4 this is 4^{-1.3}
        assert_rel(
            nb_pmf(0, 1.3, 0.25).unwrap(),
            0.25f64.powf(1.3),
            REL_TOL,
            "pmf(0)",
        );
        // geometric (size 1): pmf(1) = (1-q) q
        assert_rel(nb_pmf(1, 1.0, 0.5).unwrap(), 0.25, REL_TOL, "geometric");
        // real size: C(4.5,3) = 4.5·3.5·2.5/3! = 6.5625 exactly
        assert_rel(
            nb_pmf(3, 2.5, 0.4).unwrap(),
            6.5625 * 0.6f64.powi(3) * 0.4f64.powf(2.5),
            1e-13,
            "real size",
        );
        // size below one exercises the y = 0 special case next to y ≥ 1
        assert_rel(
            nb_pmf(0, 0.5, 0.3).unwrap(),
            0.3f64.powf(0.5),
            REL_TOL,
            "size<1 y=0",
        );
    }

    #[test]
    fn nb_cdf_matches_reference_values() {
        let cases = [
            (0.0, 1.3, 1.0 / 1.005, 0.99353717053657306),
            (1.0, 1.3, 1.0 / 1.005, 0.99996303283357577),
            (2.0, 1.3, 1.0 / 4.05, 0.45879288066835874),
            (5.0, 1.3, 1.0 / 4.05, 0.73873861414192856),
            (3.0, 1.5, 1.0 / 11.0, 0.15231049139383510),
            (10.0, 1.5, 1.0 / 11.0, 0.45678106655839247),
        ];
        for (y, r, q, want) in cases {
            assert_rel(nb_cdf(y, r, q).unwrap(), want, REL_TOL, &format!("nb_cdf({y},{r},{q})"));
        }
    }

    #[test]
    fn nb_cdf_handles_real_thresholds() {
        assert_eq!(nb_cdf(-0.5, 2.0, 0.4).unwrap(), 0.0);
        // floor(1.6667) = 1: geometric cdf = 1 - (1-q)^2 = 0.75
        assert_rel(nb_cdf(1.6667, 1.0, 0.5).unwrap(), 0.75, REL_TOL, "geometric cdf");
        // floor(1.54) = 1 with real size 1.1: pmf(0) + pmf(1) = q^1.1 (1 + 1.1(1-q))
        let q: f64 = 1.0 / 1.5;
        let want = q.powf(1.1) * (1.0 + 1.1 * (1.0 - q));
        assert_rel(nb_cdf(1.54, 1.1, q).unwrap(), want, REL_TOL, "real-size cdf");
    }

    #[test]
    fn nb_cdf_agrees_with_incomplete_beta_route() {
        // independent evaluation: P(Y ≤ k) = I_q(size, k+1)
        for (k, r, q) in [
            (0.0, 1.3, 0.25),
            (3.0, 1.3, 0.25),
            (7.0, 2.5, 0.4),
            (15.0, 1.5, 1.0 / 11.0),
            (40.0, 0.7, 0.1),
        ] {
            let direct = nb_cdf(k, r, q).unwrap();
            let via_beta = inc_beta_reg(r, k + 1.0, q).unwrap();
            assert_rel(direct, via_beta, 1e-11, &format!("cdf routes ({k},{r},{q})"));
        }
    }

    #[test]
    fn nb_pmf_sums_to_one() {
        // cap chosen by the geometric tail bound: once the term ratio rhat
        // stays below 1, the remainder is under pmf·rhat/(1−rhat)
        for (size, q) in [(1.3, 0.25), (1.1, 2.0 / 3.0), (2.5, 0.4), (0.6, 0.15)] {
            let mut sum = 0.0;
            let mut y = 0u64;
            loop {
                let pmf = nb_pmf(y, size, q).unwrap();
                sum += pmf;
                let m = y as f64 + 1.0;
                let rhat = (1.0 - q) * ((size + m) / (1.0 + m)).max(1.0);
                if rhat < 1.0 && pmf * rhat / (1.0 - rhat) < 1e-13 {
                    break;
                }
                y += 1;
                assert!(y < 100_000, "tail bound never reached for ({size},{q})");
            }
            assert!(
                (sum - 1.0).abs() <= 1e-10,
                "nb_pmf({size},{q}) sums to {sum}"
            );
        }
    }

    #[test]
    fn two_group_marginal_matches_reference_values() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        let cases = [
            (0u64, 0.86091781152324428),
            (1, 0.068179223784843392),
            (2, 0.016624173070157521),
            (3, 0.011549257078396565),
            (4, 0.0092361561360089323),
            (5, 0.0073672194307983596),
            (6, 0.0058252734623413754),
        ];
        for (y, want) in cases {
            assert_rel(
                two_group_marginal_pmf(&model, y).unwrap(),
                want,
                REL_TOL,
                &format!("marginal({y})"),
            );
        }
    }

    #[test]
    fn model_validation_rejects_bad_parameters() {
        assert!(TwoGroupModel::new(0.0, 0.1, 1.0, 0.5).is_err());
        assert!(TwoGroupModel::new(1.0, -0.1, 1.0, 0.5).is_err());
        assert!(TwoGroupModel::new(1.0, 0.1, 0.0, 0.5).is_err());
        assert!(TwoGroupModel::new(1.0, 0.1, 1.0, 0.0).is_err());
        assert!(TwoGroupModel::new(1.0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn generation_is_bitwise_deterministic() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        let a = generate_two_group(&model, 500, 42).unwrap();
        let b = generate_two_group(&model, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_two_group(&model, 500, 43).unwrap();
        assert_ne!(a.counts, c.counts, "different seeds must differ");
    }

    #[test]
    fn near_degenerate_mixture_yields_no_signals() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 1e-9).unwrap();
        let data = generate_two_group(&model, 1000, 7).unwrap();
        assert!(data.truth.iter().all(|&t| t == 0));
    }

    #[test]
    fn empirical_zero_fraction_matches_mixture() {
        let model = TwoGroupModel::new(1.3, 0.005, 3.0, 0.05).unwrap();
        let n = 100_000;
        let data = generate_two_group(&model, n, 1).unwrap();
        let zero_frac = data.counts.iter().filter(|&&c| c == 0).count() as f64 / n as f64;
        let expect = two_group_marginal_pmf(&model, 0).unwrap();
        let se = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!(
            (zero_frac - expect).abs() <= 3.0 * se,
            "zero fraction {zero_frac} vs {expect} (3se = {:.2e})",
            3.0 * se
        );
    }

    #[test]
    fn pooled_counts_pass_chi_square_against_marginal() {
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        let n = 100_000usize;
        let data = generate_two_group(&model, n, 20260819).unwrap();

        // individual bins while the expected count stays ≥ 5, tail pooled
        let mut observed: Vec<f64> = Vec::new();
        let mut expected: Vec<f64> = Vec::new();
        let mut y = 0u64;
        let mut tail_expected = n as f64;
        loop {
            let e = n as f64 * two_group_marginal_pmf(&model, y).unwrap();
            if e < 5.0 {
                break;
            }
            let o = data.counts.iter().filter(|&&c| c == y).count() as f64;
            observed.push(o);
            expected.push(e);
            tail_expected -= e;
            y += 1;
        }
        let tail_observed = data.counts.iter().filter(|&&c| c >= y).count() as f64;
        observed.push(tail_observed);
        expected.push(tail_expected);

        let stat: f64 = observed
            .iter()
            .zip(&expected)
            .map(|(o, e)| (o - e) * (o - e) / e)
            .sum();
        let dof = (observed.len() - 1) as f64;
        let p_value = inc_gamma_reg_upper(dof / 2.0, stat / 2.0).unwrap();
        assert!(
            p_value >= 1e-3,
            "chi-square GOF rejected: stat {stat:.2}, dof {dof}, p {p_value:.3e}"
        );
    }

    #[test]
    fn signal_labels_match_conditional_mean() {
        // law of total expectation through the Gamma–Poisson chain:
        // E[Y | signal] = alpha (beta + delta)
        let model = TwoGroupModel::new(1.3, 0.05, 3.0, 0.1).unwrap();
        let n = 100_000usize;
        let data = generate_two_group(&model, n, 11).unwrap();
        let (mut sum, mut count) = (0.0f64, 0usize);
        for (c, t) in data.counts.iter().zip(&data.truth) {
            if *t == 1 {
                sum += *c as f64;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let want = model.alpha * (model.beta + model.delta);
        // Var(Y|signal) = alpha s + alpha s^2 with s = beta + delta
        let s = model.beta + model.delta;
        let var = model.alpha * s + model.alpha * s * s;
        let se = (var / count as f64).sqrt();
        assert!(
            (mean - want).abs() <= 4.0 * se,
            "conditional mean {mean} vs {want} (4se = {:.3e}, signals {count})",
            4.0 * se
        );
    }

    #[test]
    fn gamma_sample_moments() {
        let n = 1_000_000usize;
        let mut rng = substream_rng(99, 0);
        // exponential: mean = scale
        let mean: f64 = (0..n).map(|_| gamma_sample(1.0, 2.0, &mut rng).unwrap()).sum::<f64>() / n as f64;
        let se = 2.0 / (n as f64).sqrt();
        assert!((mean - 2.0).abs() <= 4.0 * se, "exp mean {mean}");

        // sparse-regime parameters: mean = 1.3 * 0.005
        let mut rng = substream_rng(99, 1);
        let mean: f64 = (0..n).map(|_| gamma_sample(1.3, 0.005, &mut rng).unwrap()).sum::<f64>() / n as f64;
        let se = 0.005 * 1.3f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 0.0065).abs() <= 4.0 * se, "sparse mean {mean}");

        // variance = shape * scale^2
        let mut rng = substream_rng(99, 2);
        let draws: Vec<f64> = (0..n).map(|_| gamma_sample(0.5, 1.0, &mut rng).unwrap()).collect();
        let m: f64 = draws.iter().sum::<f64>() / n as f64;
        let var: f64 = draws.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
        // Var(s²) ≈ (mu4 − sigma⁴)/n with mu4 = 3 sigma⁴ + 6 shape scale⁴
        let se_var = ((3.0 * 0.25 + 6.0 * 0.5 - 0.25) / n as f64).sqrt();
        assert!((var - 0.5).abs() <= 4.0 * se_var, "gamma var {var}");
    }

    #[test]
    fn poisson_sample_moments_and_zero_mean() {
        let mut rng = substream_rng(77, 0);
        for _ in 0..100 {
            assert_eq!(poisson_sample(0.0, &mut rng).unwrap(), 0);
        }
        let n = 1_000_000usize;
        let draws: Vec<f64> = (0..n)
            .map(|_| poisson_sample(4.0, &mut rng).unwrap() as f64)
            .collect();
        let mean: f64 = draws.iter().sum::<f64>() / n as f64;
        let se = 2.0 / (n as f64).sqrt();
        assert!((mean - 4.0).abs() <= 4.0 * se, "poisson mean {mean}");
        let var: f64 = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        // Var(s²) ≈ (mu4 − sigma⁴)/n with central mu4 = lambda(1 + 3 lambda)
        let se_var = ((4.0 * 13.0 - 16.0) / n as f64).sqrt();
        assert!((var - 4.0).abs() <= 4.0 * se_var, "poisson var {var}");
    }

    #[test]
    fn csv_serialization_shape() {
        let data = GeneratedDataset {
            counts: vec![3, 0, 12],
            truth: vec![1, 0, 1],
            seed: 5,
        };
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,count,truth");
        assert_eq!(lines[1], "0,3,1");
        assert_eq!(lines[2], "1,0,0");
        assert_eq!(lines[3], "2,12,1");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn replication_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for rep in 0..1000u64 {
            assert!(seen.insert(replication_seed(123, rep)));
        }
    }
}
