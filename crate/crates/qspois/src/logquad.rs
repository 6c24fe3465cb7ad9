//! Adaptive quadrature carried out entirely in the log domain.
//!
//! Every integral in this crate is a positive integrand over `(0, ∞)` or
//! `(0, 1)` whose magnitude can span hundreds of orders (posterior kernels at
//! small τ, hypergeometric Euler integrals at z → 1). Rather than fight
//! overflow case by case, each caller maps its domain onto the whole real
//! line — `t = exp(u)` for half-lines, a logistic map for unit intervals —
//! and hands us the *logarithm* of the transformed integrand (Jacobian
//! included). The integrand value is then `exp(g(u))` with `g` finite or
//! `-inf`, and the transformed function decays exponentially in `|u|`
//! whenever the original integral converges, which is what makes the panel
//! expansion below terminate.
//!
//! The engine locates the mode of `g` with a coarse scan plus ternary
//! refinement — widening the scan window whenever the argmax lands at its edge,
//! so modes far from the origin (e.g. inner integrals probed at extreme outer
//! nodes) are still found — lays down tanh-sinh panels outward from the mode
//! with doubling widths up to the representability limits of the
//! transformation, refines each panel by level doubling until two successive
//! levels agree to the requested relative tolerance, and accumulates
//! everything with a streaming log-sum-exp so no intermediate ever leaves the
//! log domain.

use crate::error::{CoreError, Result};

/// Half-width of the initial mode-scan window in `u`.
const INITIAL_WINDOW: f64 = 300.0;
/// `u` range over which `exp(u)` is a positive finite f64 (with margin for
/// `ln` of the result), used as the hard window of the half-line substitution.
const HALFLINE_HARD: (f64, f64) = (-744.0, 708.0);
/// Hard window of the logistic substitution; the map itself never overflows,
/// so this only caps how slow an exponential tail decay the engine will chase
/// (rate ≳ 1e-3 per unit `u` shows its 40 nats of decay within the window).
const UNIT_HARD: (f64, f64) = (-50_000.0, 50_000.0);
/// Points in the initial coarse mode scan.
const SCAN_POINTS: usize = 601;
/// tanh-sinh argument beyond which the node weight underflows f64.
const TS_TMAX: f64 = 3.6;
/// Deepest tanh-sinh refinement level per panel (step `0.5^level`).
const MAX_LEVEL: u32 = 12;
/// A panel this far (in nats) below the running total is negligible.
const NEGLIGIBLE_NATS: f64 = 40.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadOptions {
    /// Target relative error of the value (not of its logarithm).
    pub rel_tol: f64,
    /// Budget of tanh-sinh panels before giving up.
    pub max_panels: usize,
    /// Optional truncation of the transformed domain (lower, upper) in `u`,
    /// expressing caller intent; mass at a clamp edge is not an error.
    pub clamp: (f64, f64),
    /// Representability limits of the transformation in `u`; mass still
    /// arriving here means the integral diverges (or decays too slowly to be
    /// integrated through this transformation) and is reported loudly.
    pub hard_window: (f64, f64),
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-9,
            max_panels: 10_000,
            clamp: (f64::NEG_INFINITY, f64::INFINITY),
            hard_window: (-INITIAL_WINDOW, INITIAL_WINDOW),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadResult {
    /// Natural log of the integral; `-inf` when the integrand vanishes on the
    /// whole (possibly clamped) domain.
    pub log_value: f64,
    /// Estimated relative error of the value.
    pub rel_error: f64,
    /// Number of integrand evaluations spent.
    pub evaluations: usize,
}

/// Streaming log-sum-exp accumulator for positive terms.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSum {
    max: f64,
    scaled: f64,
}

impl LogSum {
    pub(crate) fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub(crate) fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.max {
            self.scaled = self.scaled * (self.max - log_term).exp() + 1.0;
            self.max = log_term;
        } else {
            self.scaled += (log_term - self.max).exp();
        }
    }

    pub(crate) fn log_total(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Integrates `exp(g(u))` over one panel `[lo, hi]` by tanh-sinh refinement.
/// Returns `(log_integral, relative_error, evaluations)`.
fn panel_tanh_sinh<F: Fn(f64) -> f64>(
    g: &F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> (f64, f64, usize) {
    let center = 0.5 * (lo + hi);
    let radius = 0.5 * (hi - lo);
    let log_radius = radius.ln();
    let half_pi = std::f64::consts::FRAC_PI_2;

    let mut evals = 0usize;
    let mut acc = LogSum::new();
    let mut prev_log: f64 = f64::NAN;
    let mut rel_err = f64::INFINITY;

    for level in 0..=MAX_LEVEL {
        let step = 0.5f64.powi(level as i32);
        let stride = if level == 0 { 1 } else { 2 }; // odd indices only after level 0
        let start = if level == 0 { 0 } else { 1 };
        let mut j = start as i64;
        loop {
            let t = j as f64 * step;
            if t > TS_TMAX {
                break;
            }
            // node and weight of the tanh-sinh rule, carried in logs
            let sh = half_pi * t.sinh();
            let x = sh.tanh();
            let log_w = half_pi.ln() + t.cosh().ln() - 2.0 * sh.cosh().ln();
            for sign in [1.0, -1.0] {
                if t == 0.0 && sign < 0.0 {
                    continue;
                }
                let u = center + sign * radius * x;
                let gu = g(u);
                evals += 1;
                if gu.is_nan() {
                    return (f64::NAN, f64::INFINITY, evals);
                }
                acc.add(gu + log_w + log_radius);
            }
            j += stride as i64;
        }
        // the accumulated sum approximates integral / step
        let log_integral = acc.log_total() + step.ln();
        if level > 0 {
            if prev_log == f64::NEG_INFINITY && log_integral == f64::NEG_INFINITY {
                return (f64::NEG_INFINITY, 0.0, evals);
            }
            rel_err = ((log_integral - prev_log).exp() - 1.0).abs();
            if rel_err <= rel_tol && level >= 2 {
                return (log_integral, rel_err, evals);
            }
        }
        prev_log = log_integral;
    }
    (prev_log, rel_err, evals)
}

/// Integrates `exp(g(u))` for `u` over the real line (or the clamped
/// sub-interval), where `g` is the log of a positive integrand that decays in
/// both directions.
pub(crate) fn integrate_log<F: Fn(f64) -> f64>(g: F, opts: &QuadOptions) -> Result<QuadResult> {
    let lo_bound = opts.clamp.0.max(opts.hard_window.0);
    let hi_bound = opts.clamp.1.min(opts.hard_window.1);
    if lo_bound >= hi_bound {
        return Err(CoreError::domain(
            "integrate_log",
            format!("empty integration domain [{lo_bound}, {hi_bound}]"),
        ));
    }

    let mut evals = 0usize;

    // initial scan window around the origin, or the whole domain when the
    // domain does not meet it
    let mut win_lo = lo_bound.max(-INITIAL_WINDOW);
    let mut win_hi = hi_bound.min(INITIAL_WINDOW);
    if win_lo >= win_hi {
        win_lo = lo_bound;
        win_hi = hi_bound;
    }

    // coarse scan for the mode; when the argmax lands at (or the integrand
    // vanishes on) the window, widen toward the affected side and rescan —
    // the mode may sit far from the origin
    let mut best_u;
    let mut best_g;
    let mut scan_step;
    loop {
        scan_step = (win_hi - win_lo) / (SCAN_POINTS - 1) as f64;
        best_u = win_lo;
        best_g = f64::NEG_INFINITY;
        for i in 0..SCAN_POINTS {
            let u = win_lo + i as f64 * scan_step;
            let gu = g(u);
            evals += 1;
            if gu.is_nan() {
                return Err(CoreError::domain(
                    "integrate_log",
                    format!("integrand log is NaN at u = {u}"),
                ));
            }
            if gu > best_g {
                best_g = gu;
                best_u = u;
            }
        }
        let span = win_hi - win_lo;
        let mut widened = false;
        let vanished = best_g == f64::NEG_INFINITY;
        if (vanished || best_u <= win_lo + 2.0 * scan_step) && win_lo > lo_bound {
            win_lo = (win_lo - span).max(lo_bound);
            widened = true;
        }
        if (vanished || best_u >= win_hi - 2.0 * scan_step) && win_hi < hi_bound {
            win_hi = (win_hi + span).min(hi_bound);
            widened = true;
        }
        if widened {
            continue;
        }
        if vanished {
            // integrand is identically zero on the whole domain
            return Ok(QuadResult {
                log_value: f64::NEG_INFINITY,
                rel_error: 0.0,
                evaluations: evals,
            });
        }
        // an argmax pinned to the hard window (not a caller truncation) means
        // the transformed integrand peaks beyond representability: the
        // integral diverges there or decays too slowly to be captured
        let pinned_lo = best_u <= win_lo + 2.0 * scan_step
            && win_lo <= lo_bound
            && opts.clamp.0 <= opts.hard_window.0;
        let pinned_hi = best_u >= win_hi - 2.0 * scan_step
            && win_hi >= hi_bound
            && opts.clamp.1 >= opts.hard_window.1;
        if pinned_lo || pinned_hi {
            return Err(CoreError::NonIntegrable(format!(
                "integrand attains its maximum at the domain boundary (u = {best_u:.0}); the \
                 integral diverges there or decays too slowly for this transformation"
            )));
        }
        break;
    }

    // ternary refinement of the mode inside the bracketing scan cells
    let mut lo = (best_u - scan_step).max(lo_bound);
    let mut hi = (best_u + scan_step).min(hi_bound);
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        evals += 2;
        if g(m1) < g(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let mode = 0.5 * (lo + hi);

    // curvature-scaled seed panel width
    let g0 = g(mode);
    let probe = scan_step.clamp(1e-3, 0.5);
    let curv = (2.0 * g0 - g(mode - probe) - g(mode + probe)) / (probe * probe);
    evals += 3;
    let seed_half_width = if curv > 1e-4 {
        (6.0 / curv.sqrt()).clamp(1e-3, 4.0)
    } else {
        2.0
    };

    let mut total = LogSum::new();
    let mut err_weighted = 0.0f64; // sum of |panel| * panel_rel_err in linear units of exp(-total)
    let mut panels = 0usize;

    let run_panel = |p_lo: f64,
                         p_hi: f64,
                         total: &mut LogSum,
                         err_weighted: &mut f64,
                         panels: &mut usize,
                         evals: &mut usize|
     -> Result<f64> {
        let (log_i, p_err, p_evals) = panel_tanh_sinh(&g, p_lo, p_hi, opts.rel_tol);
        *evals += p_evals;
        *panels += 1;
        if log_i.is_nan() {
            return Err(CoreError::domain(
                "integrate_log",
                format!("integrand log is NaN inside panel [{p_lo}, {p_hi}]"),
            ));
        }
        if log_i > f64::NEG_INFINITY {
            let before = total.log_total();
            total.add(log_i);
            let after = total.log_total();
            *err_weighted = *err_weighted * (before - after).exp().min(1.0)
                + p_err * (log_i - after).exp();
        }
        Ok(log_i)
    };

    // seed panel around the mode, clipped to the domain
    let seed_lo = (mode - seed_half_width).max(lo_bound);
    let seed_hi = (mode + seed_half_width).min(hi_bound);
    run_panel(seed_lo, seed_hi, &mut total, &mut err_weighted, &mut panels, &mut evals)?;

    // expand outward with doubling widths until contributions become negligible
    for direction in [-1.0f64, 1.0] {
        let mut edge = if direction < 0.0 { seed_lo } else { seed_hi };
        let mut width = 2.0 * seed_half_width;
        let mut quiet_panels = 0u32;
        loop {
            let at_bound = if direction < 0.0 {
                edge <= lo_bound
            } else {
                edge >= hi_bound
            };
            if at_bound {
                break;
            }
            if panels >= opts.max_panels {
                return Err(CoreError::NonConvergence {
                    context: "integrate_log",
                    iterations: panels,
                    estimate: err_weighted,
                    target: opts.rel_tol,
                });
            }
            let next_edge = if direction < 0.0 {
                (edge - width).max(lo_bound)
            } else {
                (edge + width).min(hi_bound)
            };
            let (p_lo, p_hi) = if direction < 0.0 {
                (next_edge, edge)
            } else {
                (edge, next_edge)
            };
            let log_i = run_panel(p_lo, p_hi, &mut total, &mut err_weighted, &mut panels, &mut evals)?;
            let negligible = log_i < total.log_total() - NEGLIGIBLE_NATS;
            if negligible {
                quiet_panels += 1;
                if quiet_panels >= 2 {
                    break;
                }
            } else {
                quiet_panels = 0;
                // Non-negligible mass arriving at the hard window means the
                // integral diverges in the original coordinates — unless the
                // caller truncated the domain here on purpose.
                let at_domain_edge = if direction < 0.0 {
                    next_edge <= lo_bound + 1e-9
                } else {
                    next_edge >= hi_bound - 1e-9
                };
                let caller_truncated = if direction < 0.0 {
                    opts.clamp.0 > opts.hard_window.0
                } else {
                    opts.clamp.1 < opts.hard_window.1
                };
                if at_domain_edge && !caller_truncated {
                    return Err(CoreError::NonIntegrable(format!(
                        "integrand still contributes at u = {next_edge:.0}; the \
                         integral diverges at the domain boundary or decays too \
                         slowly for this transformation"
                    )));
                }
            }
            edge = next_edge;
            width *= 2.0;
        }
    }

    Ok(QuadResult {
        log_value: total.log_total(),
        rel_error: err_weighted.max(f64::EPSILON),
        evaluations: evals,
    })
}

/// Integrates a positive integrand over `t ∈ (t_lo, t_hi) ⊆ (0, ∞)` given its
/// log as a function of `t`; the substitution `t = exp(u)` and its Jacobian
/// are applied here.
pub(crate) fn integrate_halfline_log<F: Fn(f64) -> f64>(
    log_f: F,
    t_range: (f64, f64),
    rel_tol: f64,
) -> Result<QuadResult> {
    let clamp = (
        if t_range.0 > 0.0 {
            t_range.0.ln()
        } else {
            f64::NEG_INFINITY
        },
        if t_range.1.is_finite() {
            t_range.1.ln()
        } else {
            f64::INFINITY
        },
    );
    let opts = QuadOptions {
        rel_tol,
        clamp,
        hard_window: HALFLINE_HARD,
        ..QuadOptions::default()
    };
    integrate_log(|u| log_f(u.exp()) + u, &opts)
}

/// Integrates a positive integrand over `x ∈ (x_lo, x_hi) ⊆ (0, 1)` given its
/// log as a function of `x`; the logistic substitution `x = 1/(1+exp(-u))`
/// and its Jacobian are applied here.
pub(crate) fn integrate_unit_log<F: Fn(f64) -> f64>(
    log_f: F,
    x_range: (f64, f64),
    rel_tol: f64,
) -> Result<QuadResult> {
    let logit = |x: f64| (x / (1.0 - x)).ln();
    let clamp = (
        if x_range.0 > 0.0 {
            logit(x_range.0)
        } else {
            f64::NEG_INFINITY
        },
        if x_range.1 < 1.0 {
            logit(x_range.1)
        } else {
            f64::INFINITY
        },
    );
    let opts = QuadOptions {
        rel_tol,
        clamp,
        hard_window: UNIT_HARD,
        ..QuadOptions::default()
    };
    integrate_log(
        |u| {
            // x = sigma(u), 1-x = sigma(-u); Jacobian dx/du = x(1-x)
            let log_x = -log1p_exp(-u);
            let log_1mx = -log1p_exp(u);
            log_f(interior_unit(u)) + log_x + log_1mx
        },
        &opts,
    )
}

/// Integrates `x^{x_pow−1} (1−x)^{one_minus_x_pow−1} · h(x)` over
/// `x ∈ (x_lo, x_hi) ⊆ (0, 1)`, where `log_h` gives the log of the smooth
/// factor `h`. The endpoint power factors are folded into the logistic
/// substitution analytically, so integrands that are singular (but
/// integrable) at 0 or 1 never evaluate `ln 0` with a negative exponent.
/// Requires `x_pow > 0` and `one_minus_x_pow > 0` (integrability at the
/// endpoints after the fold).
pub(crate) fn integrate_unit_pow_log<F: Fn(f64) -> f64>(
    x_pow: f64,
    one_minus_x_pow: f64,
    log_h: F,
    x_range: (f64, f64),
    rel_tol: f64,
) -> Result<QuadResult> {
    if !(x_pow > 0.0 && one_minus_x_pow > 0.0) {
        return Err(CoreError::domain(
            "integrate_unit_pow_log",
            format!(
                "endpoint exponents must be positive after the fold, got ({x_pow}, {one_minus_x_pow})"
            ),
        ));
    }
    let logit = |x: f64| (x / (1.0 - x)).ln();
    let clamp = (
        if x_range.0 > 0.0 {
            logit(x_range.0)
        } else {
            f64::NEG_INFINITY
        },
        if x_range.1 < 1.0 {
            logit(x_range.1)
        } else {
            f64::INFINITY
        },
    );
    let opts = QuadOptions {
        rel_tol,
        clamp,
        hard_window: UNIT_HARD,
        ..QuadOptions::default()
    };
    integrate_log(
        |u| x_pow * (-log1p_exp(-u)) + one_minus_x_pow * (-log1p_exp(u)) + log_h(interior_unit(u)),
        &opts,
    )
}

#[inline]
pub(crate) fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `sigmoid(u)` nudged strictly inside `(0, 1)`, so callers whose log-factor
/// is undefined at the endpoints (densities on the open interval) can be
/// evaluated at any `u`; the saturation error is below one ulp of 1.
#[inline]
fn interior_unit(u: f64) -> f64 {
    sigmoid(u).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// `ln(1 + exp(v))` without overflow.
#[inline]
pub(crate) fn log1p_exp(v: f64) -> f64 {
    if v > 36.0 {
        v
    } else if v < -36.0 {
        v.exp()
    } else {
        v.exp().ln_1p()
    }
}
