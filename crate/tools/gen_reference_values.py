#!/usr/bin/env python3
"""Generate high-precision reference values for the qspois test suites.

Everything numerical that the Rust tests assert against a frozen constant is
produced here with mpmath at 50 significant digits, so the library under test
never supplies its own expected values. Run from the repo root:

    python3 tools/gen_reference_values.py > tools/reference_values.txt

The script is organized by consumer module. It also performs independent
self-checks (closed form vs direct quadrature) and verifies that the
concentration-bound dominance grids used by the acceptance suite have zero
violations before they are frozen.
"""

import json
import sys

import mpmath as mp

mp.mp.dps = 50


def fmt(x, digits=17):
    """Format an mpmath value as a Rust f64 literal."""
    return mp.nstr(mp.mpf(x), digits, strip_zeros=False)


def lg(x):
    return mp.loggamma(mp.mpf(x))


def log_beta(a, b):
    return lg(a) + lg(b) - lg(a + b)


def log_binom_general(x, k):
    # ln C(x, k) for real x > k-1, integer k >= 0
    return lg(x + 1) - lg(k + 1) - lg(x - k + 1)


# NB(size r, success prob q): pmf(y) = C(y+r-1, y) (1-q)^y q^r
def nb_pmf(y, r, q):
    y, r, q = mp.mpf(y), mp.mpf(r), mp.mpf(q)
    return mp.e ** (log_binom_general(y + r - 1, int(y))) * (1 - q) ** y * q**r


def nb_cdf(cut, r, q):
    if cut < 0:
        return mp.mpf(0)
    return sum(nb_pmf(y, r, q) for y in range(int(mp.floor(cut)) + 1))


def nb_cdf_continuous(cut, r, q):
    # regularized incomplete beta convention: P(Y <= cut) = I_q(r, cut+1)
    if cut < 0:
        return mp.mpf(0)
    return mp.betainc(r, mp.mpf(cut) + 1, 0, q, regularized=True)


# ---------------------------------------------------------------------------
# Posterior machinery (exact, via the hypergeometric closed form and via
# direct quadrature in the t = (1/tau^2)(1/kappa - 1) parametrization).
# ---------------------------------------------------------------------------


def gh_posterior_moments(A, B, g, z):
    """Posterior density on kappa proportional to
    kappa^(A-1) (1-kappa)^(B-1) (1 - z*kappa)^(-g).

    Returns (E kappa, E (1-kappa))."""
    A, B, g, z = map(mp.mpf, (A, B, g, z))
    den = mp.hyp2f1(g, A, A + B, z)
    ek = (A / (A + B)) * mp.hyp2f1(g, A + 1, A + B + 1, z) / den
    e1mk = (B / (A + B)) * mp.hyp2f1(g, A, A + B + 1, z) / den
    return ek, e1mk


def tpbn_posterior(y, tau, alpha, a1, a2):
    """TPBN(a1,a2) local prior; posterior given count y at global scale tau."""
    y, tau, alpha, a1, a2 = map(mp.mpf, (y, tau, alpha, a1, a2))
    A = a2 + alpha
    B = y + a1
    g = a1 + a2
    z = 1 - tau**2
    return gh_posterior_moments(A, B, g, z)


def gh_family_posterior(y, tau, alpha, a1, a2, g):
    y, tau, alpha, a1, a2, g = map(mp.mpf, (y, tau, alpha, a1, a2, g))
    A = a1 + alpha
    B = a2 + y
    z = 1 - tau**2
    return gh_posterior_moments(A, B, g, z)


def gh_t_integrand(A, B, g, tau):
    """After kappa = 1/(1 + tau^2 t) the GH-form posterior kernel becomes
    t^(B-1) (1+t)^(-g) (1 + tau^2 t)^(g - A - B) on (0, inf)."""
    A, B, g, tau = map(mp.mpf, (A, B, g, tau))

    def f(t, extra=0):
        return t ** (B - 1 + extra) * (1 + t) ** (-g) * (1 + tau**2 * t) ** (
            g - A - B - extra
        )

    return f


def gh_trunc_prob(A, B, g, tau, kind, edge):
    """P(kappa < edge) for kind='below', P(kappa > edge) for kind='above'."""
    A, B, g, tau, edge = map(mp.mpf, (A, B, g, tau, edge))
    f = gh_t_integrand(A, B, g, tau)
    t_edge = (1 / edge - 1) / tau**2
    scale = max(B + 1, mp.mpf(1)) / tau**2
    # closed form for the full integral: the kappa-space integral is
    # B(A, B) 2F1(g, A; A+B; z) and the t-substitution carries tau^(2g-2B)
    z = 1 - tau**2
    full = mp.mpf(tau) ** (2 * g - 2 * B) * mp.beta(A, B) * mp.hyp2f1(g, A, A + B, z)
    if kind == "below":
        part = mp.quad(f, [t_edge, max(2 * t_edge, scale), mp.inf])
    else:
        part = mp.quad(f, [0, min(t_edge, 1), t_edge])
    return part / full


def gh_quad_moments(A, B, g, tau):
    """Same moments as gh_posterior_moments but via direct quadrature in t;
    used to cross-check the closed form before anything is frozen."""
    f = gh_t_integrand(A, B, g, tau)
    scale = max(mp.mpf(B) + 1, mp.mpf(1)) / mp.mpf(tau) ** 2
    pts = [0, 1, scale, mp.inf]
    den = mp.quad(lambda t: f(t), pts)
    # E(1-kappa): extra factor (1-kappa) = tau^2 t / (1 + tau^2 t)
    num = mp.quad(lambda t: f(t) * mp.mpf(tau) ** 2 * t / (1 + mp.mpf(tau) ** 2 * t), pts)
    return num / den


# GDP local prior, slowly-varying form: pi1(t) = K t^(-a1-1) L(t) with
# L(t) = 2^(a1-1) Integral_0^inf exp(-a2 sqrt(2 z / t)) exp(-z) z^a1 dz.
def gdp_L(t, a1, a2):
    t, a1, a2 = map(mp.mpf, (t, a1, a2))
    return 2 ** (a1 - 1) * mp.quad(
        lambda z: mp.e ** (-a2 * mp.sqrt(2 * z / t) - z) * z**a1, [0, a1 + 1, mp.inf]
    )


def gdp_posterior(y, tau, alpha, a1, a2):
    """Posterior moments for the GDP prior via nested quadrature over
    lambda^2 (outer) with the exact L integral (inner).

    Marginalizing theta: Y | lambda^2, tau ~ NB(alpha, kappa) with
    kappa = 1/(1 + lambda^2 tau^2), so the posterior weight on t = lambda^2
    is pi1(t) * (1-kappa(t))^y * kappa(t)^alpha."""
    y, tau, alpha = mp.mpf(y), mp.mpf(tau), mp.mpf(alpha)

    def weight(t, extra_kappa=0, extra_1mk=0):
        kap = 1 / (1 + t * tau**2)
        return (
            t ** (-mp.mpf(a1) - 1)
            * gdp_L(t, a1, a2)
            * (1 - kap) ** (y + extra_1mk)
            * kap ** (alpha + extra_kappa)
        )

    scale = max(y, 1) / tau**2
    pts = [0, 1, scale, mp.inf]
    den = mp.quad(lambda t: weight(t), pts)
    ek = mp.quad(lambda t: weight(t, extra_kappa=1), pts) / den
    e1mk = mp.quad(lambda t: weight(t, extra_1mk=1), pts) / den
    return ek, e1mk


# ---------------------------------------------------------------------------
# Bound calculators (mirroring the closed-form statements).
# ---------------------------------------------------------------------------


def small_kappa_bound(a, alpha, c0, Lfun, y, tau, eps, K0, K1):
    a, alpha, c0, y, tau, eps, K0, K1 = map(mp.mpf, (a, alpha, c0, y, tau, eps, K0, K1))
    return (
        (a / (c0 * (a + alpha)))
        * 1 / (K0**-a - K1**-a)
        * (tau**2) ** (a - y)
        * (eps / (1 - eps)) ** (a + alpha)
        * Lfun(1 / tau**2)
        * (1 + K1 * tau**2) ** (y + alpha)
    )


def shrink_mean_bound(a, alpha, c0, K, M, y, tau, K0, K1):
    a, alpha, c0, K, M, y, tau, K0, K1 = map(
        mp.mpf, (a, alpha, c0, K, M, y, tau, K0, K1)
    )
    return (
        (a / c0)
        * 1 / (K0**-a - K1**-a)
        * tau**2
        * (1 / K + M / (a - y - 1))
        * (1 + K1 * tau**2) ** (y + alpha)
    )


def large_kappa_bound(a, alpha, K, c0, y, tau, eta, delta1):
    a, alpha, K, c0, y, tau, eta, delta1 = map(
        mp.mpf, (a, alpha, K, c0, y, tau, eta, delta1)
    )
    return (
        ((a + alpha) / (K * c0))
        * tau ** (-2 * a)
        * ((1 - eta) / (1 - eta * delta1)) ** y
        * (eta * delta1) ** (-(a + alpha))
    )


def lemma2_bound(a, alpha, c0, y, tau, K0, K1):
    a, alpha, c0, y, tau, K0, K1 = map(mp.mpf, (a, alpha, c0, y, tau, K0, K1))
    return (
        (c0 * (K0**-a - K1**-a) / a)
        * (tau**2) ** (y - a)
        * (1 + K1 * tau**2) ** (-(y + alpha))
    )


def lemma2_integral_tpbn(a1, a2, alpha, y, tau):
    """Left side of the lemma: Integral_0^1 u^(a+alpha-1) (1-u)^(y-a-1)
    L((1/tau^2)(1/u-1)) du with the TPBN L and a = a2. Evaluated in the
    GH-form (exactly equal after simplification)."""
    a1, a2, alpha, y, tau = map(mp.mpf, (a1, a2, alpha, y, tau))
    # With the TPBN L the integrand simplifies exactly to
    #   u^(a2+alpha-1) (1-u)^(y+a1-1) (1 - (1-tau^2) u)^-(a1+a2),
    # which is endpoint-safe for a1 >= 1.
    z = 1 - tau**2

    def integrand(u):
        if u <= 0 or u >= 1:
            return mp.mpf(0)
        return u ** (a2 + alpha - 1) * (1 - u) ** (y + a1 - 1) * (1 - z * u) ** (-(a1 + a2))

    return mp.quad(integrand, [0, mp.mpf("0.5"), 1 - tau**2, 1])


def tpbn_c0_t0_M(a1, a2):
    # L(t) = (1+1/t)^-(a1+a2) is increasing; t0 = 1, c0 = L(1) = 2^-(a1+a2), M = 1
    return mp.mpf(2) ** (-(mp.mpf(a1) + mp.mpf(a2))), mp.mpf(1), mp.mpf(1)


def oracle_threshold(p, alpha, beta, delta):
    p, alpha, beta, delta = map(mp.mpf, (p, alpha, beta, delta))
    num = mp.log((1 - p) / p) + alpha * mp.log((beta + delta + 1) / (beta + 1))
    den = mp.log((beta + delta) * (beta + 1) / (beta * (beta + delta + 1)))
    return num / den


def misclass_at_cutoff(c, p, alpha, beta, delta):
    """Expected per-test misclassification of the rule `reject iff Y > c`."""
    q0 = 1 / (mp.mpf(beta) + 1)
    q1 = 1 / (mp.mpf(beta) + mp.mpf(delta) + 1)
    t1 = 1 - nb_cdf(c, alpha, q0)
    t2 = nb_cdf(c, alpha, q1)
    return (1 - mp.mpf(p)) * t1 + mp.mpf(p) * t2


def main():
    out = {}

    # ----- specfun ---------------------------------------------------------
    print("== specfun: log_gamma ==")
    for x in ["0.001", "0.5", "1.0", "1.5", "2.0", "5.0", "10.5", "100.0", "426.0", "1.0e4", "1.0e6"]:
        print(f"  ({x}, {fmt(lg(x))}),")

    print("== specfun: log_beta ==")
    for a, b in [("1", "1"), ("2", "3"), ("0.5", "0.5"), ("1.5", "427.0"), ("3.0", "1.5"), ("1000.0", "2.5")]:
        print(f"  ({a}, {b}, {fmt(log_beta(mp.mpf(a), mp.mpf(b)))}),")

    print("== specfun: log_binom_general  ln C(x, k) ==")
    for x, k in [("5", 2), ("0.3", 0), ("4.3", 4), ("426.3", 426), ("12.5", 3)]:
        print(f"  ({x}, {k}, {fmt(log_binom_general(mp.mpf(x), k))}),")

    print("== specfun: gauss_2f1 (a, b, c, z, value) ==")
    f21_cases = [
        ("1", "1", "2", "0.5"),
        ("1", "2", "4", "0.9"),
        ("1.5", "2.5", "4.0", "0.85"),
        ("1.5", "2.5", "4.0", "0.90"),
        ("1.5", "2.5", "4.0", "0.95"),
        ("3", "3", "4.5", "0.9999"),
        ("3", "2.8", "4.3", "0.99"),
        ("1", "2.8", "4.3", "0.9999999999"),
        ("3", "430.5", "432.0", "0.9999"),
        ("0.5", "0.5", "1.0", "0.99"),
        ("1.2", "1.4", "4.0", "0.99999999"),
        ("2.5", "3.5", "9.5", "0.999999"),
        ("4.5", "2.0", "6.6", "0.75"),
        ("1e4", "1.5", "1.2e4", "0.5"),
    ]
    for a, b, c, z in f21_cases:
        v = mp.hyp2f1(mp.mpf(a), mp.mpf(b), mp.mpf(c), mp.mpf(z))
        print(f"  ({a}, {b}, {c}, {z}, value {fmt(v)}, ln {fmt(mp.log(v))}),")

    # Gauss point for the z->1 contiguity property (c > a+b)
    a, b, c = mp.mpf("1.2"), mp.mpf("1.4"), mp.mpf("4.0")
    gauss = mp.gamma(c) * mp.gamma(c - a - b) / (mp.gamma(c - a) * mp.gamma(c - b))
    print(f"  gauss limit (1.2,1.4;4.0;1) = {fmt(gauss)}")

    # ----- samplers ---------------------------------------------------------
    print("== samplers: nb_pmf / nb_cdf  (y, r, q) ==")
    nb_cases = [
        (0, "1.3", "0.005"), (1, "1.3", "0.005"),
        (0, "1.3", None), (1, "1.3", None), (2, "1.3", None), (5, "1.3", None),
        (3, "1.5", "q11"), (10, "1.5", "q11"),
    ]
    # q entries: explicit beta -> q = 1/(beta+1); 'q11' -> q = 1/11 (delta=10)
    for y, r, tag in nb_cases:
        if tag is None:
            q = 1 / (mp.mpf("0.05") + mp.mpf(3) + 1)  # beta=0.05, delta=3 signal law
            label = f"q=1/4.05 (beta 0.05, delta 3)"
        elif tag == "q11":
            q = mp.mpf(1) / 11
            label = "q=1/11 (delta 10)"
        else:
            q = 1 / (mp.mpf(tag) + 1)
            label = f"q=1/(1+{tag})"
        print(f"  y={y} r={r} {label}: pmf {fmt(nb_pmf(y, mp.mpf(r), q))} cdf {fmt(nb_cdf(y, mp.mpf(r), q))}")

    print("== samplers: two-group marginal pmf, model (alpha 1.3, beta 0.05, delta 3, p 0.1) ==")
    al, be, de, pp = mp.mpf("1.3"), mp.mpf("0.05"), mp.mpf(3), mp.mpf("0.1")
    q0, q1 = 1 / (be + 1), 1 / (be + de + 1)
    for y in range(7):
        v = (1 - pp) * nb_pmf(y, al, q0) + pp * nb_pmf(y, al, q1)
        print(f"  y={y}: {fmt(v)}")

    # ----- priors -----------------------------------------------------------
    print("== priors: TPBN constants ==")
    for a1, a2 in [("1.5", "1.5"), ("0.5", "0.5"), ("2.5", "2.5"), ("1.0", "3.0")]:
        K = mp.gamma(mp.mpf(a1) + mp.mpf(a2)) / (mp.gamma(mp.mpf(a1)) * mp.gamma(mp.mpf(a2)))
        c0, t0, M = tpbn_c0_t0_M(a1, a2)
        print(f"  ({a1},{a2}): K {fmt(K)} c0 {fmt(c0)} L(1e6) {fmt((1+mp.mpf('1e-6'))**(-(mp.mpf(a1)+mp.mpf(a2))))}")

    print("== priors: GDP constants ==")
    for a1, a2 in [("2.5", "1.0"), ("3.0", "2.0")]:
        a1m, a2m = mp.mpf(a1), mp.mpf(a2)
        K = a2m ** (2 * a1m) / mp.gamma(2 * a1m)
        # analytic K check: Integral K t^(-a1-1) L(t) dt over (0,inf) must be 1
        total = K * mp.quad(lambda t: t ** (-a1m - 1) * gdp_L(t, a1m, a2m), [0, 1, 100, mp.inf])
        Linf = 2 ** (a1m - 1) * mp.gamma(a1m + 1)
        assert abs(total - 1) < mp.mpf("1e-12"), total
        print(f"  ({a1},{a2}): K {fmt(K)} L(1) {fmt(gdp_L(1, a1m, a2m))} L(10) {fmt(gdp_L(10, a1m, a2m))} L(1e4) {fmt(gdp_L(mp.mpf('1e4'), a1m, a2m))} L(inf)=M {fmt(Linf)}")

    print("== priors: GH prior density (kappa; a1 0.5, a2 0.5, gamma 1.0, tau 0.1) ==")
    a1, a2, g, tau = mp.mpf("0.5"), mp.mpf("0.5"), mp.mpf(1), mp.mpf("0.1")
    z = 1 - tau**2
    C2inv = mp.beta(a1, a2) * mp.hyp2f1(g, a1, a1 + a2, z)
    total = mp.quad(
        lambda k: k ** (a1 - 1) * (1 - k) ** (a2 - 1) * (1 - z * k) ** (-g) / C2inv,
        [0, mp.mpf("0.5"), 1],
    )
    assert abs(total - 1) < mp.mpf("1e-12"), total
    for kap in ["0.1", "0.3", "0.9"]:
        k = mp.mpf(kap)
        d = k ** (a1 - 1) * (1 - k) ** (a2 - 1) * (1 - z * k) ** (-g) / C2inv
        print(f"  kappa={kap}: {fmt(d)}")
    print(f"  normalizer C2^-1 = {fmt(C2inv)}")

    # ----- posterior ---------------------------------------------------------
    # cross-check closed form vs direct quadrature before freezing
    for (y, tau) in [(0, "0.5"), (3, "0.1"), (20, "0.02")]:
        ek_cf, e1_cf = tpbn_posterior(y, tau, mp.mpf("1.3"), "1.5", "1.5")
        e1_q = gh_quad_moments(mp.mpf("1.5") + mp.mpf("1.3"), mp.mpf(y) + mp.mpf("1.5"), mp.mpf(3), mp.mpf(tau))
        assert abs(e1_cf - e1_q) / e1_q < mp.mpf("1e-35"), (e1_cf, e1_q)

    print("== posterior: TPBN(1.5,1.5) alpha=1.3  (y, tau, E kappa, E 1-kappa) ==")
    tp_cases = []
    for y in [0, 1, 2, 5, 10, 50, 426]:
        for tau in ["0.01", "0.1", "0.5", "1.0"]:
            ek, e1 = tpbn_posterior(y, tau, mp.mpf("1.3"), "1.5", "1.5")
            tp_cases.append((y, tau, ek, e1))
            print(f"  ({y}, {tau}, {fmt(ek)}, {fmt(e1)}),")

    print("== posterior: TPBN(1.5,1.5) alpha=1.5 ==")
    for y in [0, 3, 7]:
        for tau in ["0.05", "0.5"]:
            ek, e1 = tpbn_posterior(y, tau, mp.mpf("1.5"), "1.5", "1.5")
            print(f"  ({y}, {tau}, {fmt(ek)}, {fmt(e1)}),")

    print("== posterior: GH(0.5,0.5,gamma=1.0) alpha=1.3 ==")
    for y in [0, 1, 5, 20]:
        for tau in ["0.05", "0.5"]:
            ek, e1 = gh_family_posterior(y, tau, mp.mpf("1.3"), "0.5", "0.5", 1)
            print(f"  ({y}, {tau}, {fmt(ek)}, {fmt(e1)}),")

    print("== posterior: GDP(2.5,1.0) alpha=1.3 (nested quadrature) ==", flush=True)
    with mp.workdps(20):
        for y in [0, 2, 10]:
            for tau in ["0.1", "0.5"]:
                ek, e1 = gdp_posterior(y, tau, mp.mpf("1.3"), "2.5", "1.0")
                print(f"  ({y}, {tau}, {fmt(ek)}, {fmt(e1)}),", flush=True)

    print("== posterior: two-group  model (1.3, 0.05, 3, 0.1)  (y, w, wstar, e_theta) ==")
    for y in [0, 2, 5]:
        f0 = nb_pmf(y, al, q0)
        f1 = nb_pmf(y, al, q1)
        w = pp * f1 / ((1 - pp) * f0 + pp * f1)
        wstar = (1 - w) * be / (be + 1) + w * (be + de) / (be + de + 1)
        etheta = wstar * (y + al)
        print(f"  ({y}, {fmt(w)}, {fmt(wstar)}, {fmt(etheta)}),")

    print("== posterior: m(y) limit sanity  E(kappa|y, 1e-4) vs (a+alpha)/(y+alpha) ==", flush=True)
    worst = mp.mpf(0)
    with mp.workdps(25):
        for alpha in ["1.0", "1.5"]:
            for y in [2, 3, 4, 5, 6, 8, 12, 20, 35, 50]:
                ek, _ = tpbn_posterior(y, "1e-4", mp.mpf(alpha), "1.5", "1.5")
                m = (mp.mpf("1.5") + mp.mpf(alpha)) / (y + mp.mpf(alpha))
                worst = max(worst, abs(ek - m))
    print(f"  max |E(kappa|y,1e-4) - m(y)| over sampled y in 2..50, alpha in (1,1.5): {fmt(worst, 8)}")

    # ----- rules --------------------------------------------------------------
    print("== rules: oracle thresholds C  (p, alpha, beta, delta, C) ==")
    for p, beta in [("0.01", "0.005"), ("0.05", "0.005"), ("0.1", "0.05"), ("0.2", "0.05")]:
        C = oracle_threshold(p, "1.3", beta, 3)
        print(f"  ({p}, 1.3, {beta}, 3, {fmt(C)}),")
    C = oracle_threshold("0.1", "1.5", "0.005", 10)
    print(f"  (0.1, 1.5, 0.005, 10, {fmt(C)}),")

    # ----- bounds ---------------------------------------------------------------
    print("== bounds: type2_bound_tuned + risk ratio ==")
    for a, alpha, delta in [("1.5", "1.3", "3"), ("1", "1", "1"), ("1.1", "1.1", "0.5")]:
        am, alm, dm = mp.mpf(a), mp.mpf(alpha), mp.mpf(delta)
        cut = 2 * am + alm - 2 * (am + alm) / (dm + 2)
        t2 = nb_cdf(cut, alm, 1 / (dm + 1))
        rr = (dm + 1) ** alm * t2
        print(f"  (a {a}, alpha {alpha}, delta {delta}): cut {fmt(cut)} t2 {fmt(t2)} ratio_bound {fmt(rr)}")

    print("== bounds: table of nine rows, three conventions (a, alpha, delta, literal, continuous, restricted) ==")
    table1 = [
        ("1.1", "1.1", "0.5"), ("1.2", "1.1", "0.5"), ("1.3", "1.2", "0.5"),
        ("1.5", "1.5", "1.0"), ("1.2", "1.4", "1.0"), ("1.3", "1.3", "1.0"),
        ("1.3", "1.2", "2.0"), ("1.4", "1.3", "2.0"), ("1.2", "1.4", "2.0"),
    ]
    for a, alpha, delta in table1:
        am, alm, dm = mp.mpf(a), mp.mpf(alpha), mp.mpf(delta)
        cut = 2 * am + alm - 2 * (am + alm) / (dm + 2)
        q = 1 / (dm + 1)
        lit = (dm + 1) ** alm * nb_cdf(cut, alm, q)
        cont = (dm + 1) ** alm * nb_cdf_continuous(cut, alm, q)
        restr = (dm + 1) ** alm * (nb_cdf(cut, alm, q) - nb_cdf(am, alm, q))
        print(f"  ({a}, {alpha}, {delta}, {fmt(lit)}, {fmt(cont)}, {fmt(restr)}),")

    print("== bounds: type1_bound_eb example ==")
    am, alm, bm = mp.mpf("1.5"), mp.mpf("1.3"), mp.mpf("0.005")
    n, p, dm = 500, mp.mpf("0.05"), mp.mpf(3)
    third = mp.e ** (-(2 * mp.log(2) - 1) * (1 - (bm + dm + 1) ** -alm) * n * p)
    total = 2 * alm * bm / am + alm * bm + third
    print(f"  third term {fmt(third)}  total {fmt(total)}")

    print("== bounds: concentration example values ==")
    c0, t0, M = tpbn_c0_t0_M("1.5", "1.5")
    K_tp = mp.gamma(mp.mpf(3)) / (mp.gamma(mp.mpf("1.5")) ** 2)
    Lfun = lambda t: (1 + 1 / t) ** (-mp.mpf(3))
    v = small_kappa_bound("1.5", "1.5", c0, Lfun, 0, "0.01", "0.5", 2, 10)
    print(f"  thm2 TPBN(1.5,1.5) alpha 1.5 y 0 tau 0.01 eps 0.5 K0 2 K1 10: {fmt(v)}")
    exact = gh_trunc_prob(mp.mpf("1.5") + mp.mpf("1.5"), mp.mpf(0) + mp.mpf("1.5"), 3, mp.mpf("0.01"), "below", mp.mpf("0.5"))
    print(f"      exact P(kappa<0.5|0,0.01) = {fmt(exact)}")
    c0_25, _, M25 = tpbn_c0_t0_M("2.5", "2.5")
    K_25 = mp.gamma(mp.mpf(5)) / (mp.gamma(mp.mpf("2.5")) ** 2)
    v = shrink_mean_bound("2.5", "1.0", c0_25, K_25, M25, 0, "0.05", 2, 10)
    _, e1 = tpbn_posterior(0, "0.05", mp.mpf("1.0"), "2.5", "2.5")
    print(f"  thm3 TPBN(2.5,2.5) alpha 1 y 0 tau 0.05 K0 2 K1 10: {fmt(v)}  exact E(1-kappa) {fmt(e1)}")
    v = large_kappa_bound("1.5", "1.5", K_tp, c0, 60, "0.05", "0.5", "0.5")
    exact = gh_trunc_prob(mp.mpf(3), mp.mpf(60) + mp.mpf("1.5"), 3, mp.mpf("0.05"), "above", mp.mpf("0.5"))
    print(f"  thm4 TPBN(1.5,1.5) alpha 1.5 y 60 tau 0.05 eta 0.5 d1 0.5: {fmt(v)}  exact P(kappa>0.5|60) {fmt(exact)}")
    for (y, tau) in [(0, "0.5"), (0, "0.05"), (3, "0.5"), (3, "0.05")]:
        lhs = lemma2_integral_tpbn("1.5", "1.5", "1.5", y, tau)
        rhs = lemma2_bound("1.5", "1.5", c0, y, tau, 2, 10)
        print(f"  lemma2 y={y} tau={tau}: integral {fmt(lhs)} bound {fmt(rhs)} ok={lhs >= rhs}")

    # ----- dominance grids (verified before freezing) ---------------------------
    print("== dominance grid: thm2 (TPBN(1.5,1.5)), alpha in (1.0, 1.5), y in (0,1), eps in (0.3,0.5,0.7), tau in 6 values ==", flush=True)
    viol = 0
    npts = 0
    min_slack = mp.inf
    with mp.workdps(25):
        for alpha in ["1.0", "1.5"]:
            for y in [0, 1]:
                for eps in ["0.3", "0.5", "0.7"]:
                    for tau in ["0.05", "0.02", "0.01", "0.005", "0.002", "0.001"]:
                        b = small_kappa_bound("1.5", alpha, c0, Lfun, y, tau, eps, 2, 10)
                        ex = gh_trunc_prob(
                            mp.mpf("1.5") + mp.mpf(alpha), mp.mpf(y) + mp.mpf("1.5"), 3,
                            mp.mpf(tau), "below", mp.mpf(eps))
                        npts += 1
                        if ex > b:
                            viol += 1
                        if b > 0:
                            min_slack = min(min_slack, (b - ex) / b)
    print(f"  points {npts} violations {viol} min relative slack {fmt(min_slack, 8)}")

    print("== dominance grid: thm3 (TPBN(2.5,2.5) y in 0..1, TPBN(3.5,3.5) y in 0..2), alpha in (1.0,1.5), tau in 6 values ==")
    viol = 0
    npts = 0
    min_slack = mp.inf
    for (a12, ys) in [("2.5", [0, 1]), ("3.5", [0, 1, 2])]:
        c0x, _, Mx = tpbn_c0_t0_M(a12, a12)
        Kx = mp.gamma(2 * mp.mpf(a12)) / (mp.gamma(mp.mpf(a12)) ** 2)
        for alpha in ["1.0", "1.5"]:
            for y in ys:
                if not (mp.mpf(y) < mp.mpf(a12) - 1):
                    continue
                for tau in ["0.5", "0.2", "0.1", "0.05", "0.02", "0.01"]:
                    b = shrink_mean_bound(a12, alpha, c0x, Kx, Mx, y, tau, 2, 10)
                    _, ex = tpbn_posterior(y, tau, mp.mpf(alpha), a12, a12)
                    npts += 1
                    if ex > b:
                        viol += 1
                    min_slack = min(min_slack, (b - ex) / b)
    print(f"  points {npts} violations {viol} min relative slack {fmt(min_slack, 8)}")

    print("== dominance grid: thm4 (TPBN(1.5,1.5)), alpha in (1.0,1.5), y in (20,40,60,90), eta in (0.3,0.5,0.8), d1 0.5, tau in (0.05,0.02,0.01) ==", flush=True)
    viol = 0
    npts = 0
    min_slack = mp.inf
    with mp.workdps(25):
        for alpha in ["1.0", "1.5"]:
            for y in [20, 40, 60, 90]:
                for eta in ["0.3", "0.5", "0.8"]:
                    for tau in ["0.05", "0.02", "0.01"]:
                        b = large_kappa_bound("1.5", alpha, K_tp, c0, y, tau, eta, "0.5")
                        ex = gh_trunc_prob(
                            mp.mpf("1.5") + mp.mpf(alpha), mp.mpf(y) + mp.mpf("1.5"), 3,
                            mp.mpf(tau), "above", mp.mpf(eta))
                        npts += 1
                        if ex > b:
                            viol += 1
                        if mp.isfinite(b) and b > 0:
                            min_slack = min(min_slack, (b - ex) / b)
    print(f"  points {npts} violations {viol} min relative slack {fmt(min_slack, 8)}")

    print("== dominance grid: lemma2 (TPBN(1.5,1.5)), alpha in (1.0,1.5), y in (0,1,3,7), tau in (0.5,0.2,0.1,0.05,0.02,0.01) ==", flush=True)
    viol = 0
    npts = 0
    min_slack = mp.inf
    with mp.workdps(25):
        for alpha in ["1.0", "1.5"]:
            for y in [0, 1, 3, 7]:
                for tau in ["0.5", "0.2", "0.1", "0.05", "0.02", "0.01"]:
                    lhs = lemma2_integral_tpbn("1.5", "1.5", alpha, y, tau)
                    rhs = lemma2_bound("1.5", alpha, c0, y, tau, 2, 10)
                    npts += 1
                    if lhs < rhs:
                        viol += 1
                    min_slack = min(min_slack, (lhs - rhs) / lhs)
    print(f"  points {npts} violations {viol} min relative slack {fmt(min_slack, 8)}")

    # ----- experiments: analytic threshold-rule predictions -------------------
    print("== experiments: expected misclassification of integer-cutoff rules ==")
    print("  (study grid model: alpha 1.3, delta 3, beta switching; oracle cutoff = floor(C))")
    for p, beta in [("0.01", "0.005"), ("0.05", "0.005"), ("0.1", "0.05"), ("0.2", "0.05")]:
        C = oracle_threshold(p, "1.3", beta, 3)
        co = int(mp.floor(C))
        mis = misclass_at_cutoff(co, p, "1.3", beta, 3)
        best = min(range(0, 61), key=lambda c: misclass_at_cutoff(c, p, "1.3", beta, 3))
        worst_c = max(range(0, 25), key=lambda c: misclass_at_cutoff(c, p, "1.3", beta, 3))
        print(
            f"  p={p}: C={fmt(C, 8)} cutoff {co} misclass {fmt(mis, 8)} "
            f"(best cutoff {best}: {fmt(misclass_at_cutoff(best, p, '1.3', beta, 3), 8)}; "
            f"max over 0..24 at {worst_c}: {fmt(misclass_at_cutoff(worst_c, p, '1.3', beta, 3), 8)})"
        )

    print("== experiments: tuned-rule implied cutoffs (TPBN(1.5,1.5), alpha 1.3, delta 3 -> threshold 3/8) ==", flush=True)
    with mp.workdps(25):
        for p in ["0.01", "0.05", "0.1", "0.2"]:
            for pol, tauv in [("tau=p", mp.mpf(p)), ("tau=p^2", mp.mpf(p) ** 2), ("tau=sqrt p", mp.sqrt(mp.mpf(p)))]:
                cut = None
                for y in range(0, 200):
                    _, e1 = tpbn_posterior(y, tauv, mp.mpf("1.3"), "1.5", "1.5")
                    if e1 > mp.mpf(3) / 8:
                        cut = y  # smallest y with rejection; rule rejects iff Y >= cut
                        break
                beta = "0.005" if mp.mpf(p) < mp.mpf("0.095") else "0.05"
                mis = misclass_at_cutoff(cut - 1, p, "1.3", beta, 3) if cut else None
                print(f"  p={p} {pol}: first rejecting y = {cut}, expected misclass {fmt(mis, 8) if mis else 'n/a'}")

    print("== experiments: second study grid (alpha 1.5, beta 0.005, delta 10), tuned threshold 10/22 ==", flush=True)
    with mp.workdps(25):
        for p in ["0.01", "0.03", "0.05"]:
            for pol, tauv in [
                ("p^2", mp.mpf(p) ** 2), ("p/2", mp.mpf(p) / 2), ("p", mp.mpf(p)),
                ("2p", 2 * mp.mpf(p)), ("sqrt p", mp.sqrt(mp.mpf(p))),
            ]:
                cut = None
                for y in range(0, 200):
                    _, e1 = tpbn_posterior(y, tauv, mp.mpf("1.5"), "1.5", "1.5")
                    if e1 > mp.mpf(10) / 22:
                        cut = y
                        break
                mis = misclass_at_cutoff(cut - 1, p, "1.5", "0.005", 10) if cut else None
                print(f"  p={p} tau={pol}: first rejecting y = {cut}, misclass {fmt(mis, 8) if mis else 'n/a'}")

    # Oracle-threshold misclass for the second grid (two-group row analog)
    for p in ["0.01", "0.03", "0.05"]:
        C = oracle_threshold(p, "1.5", "0.005", 10)
        co = int(mp.floor(C))
        mis = misclass_at_cutoff(co, p, "1.5", "0.005", 10)
        print(f"  oracle p={p}: C {fmt(C, 8)} -> cutoff {co}, misclass {fmt(mis, 8)}")


if __name__ == "__main__":
    main()
