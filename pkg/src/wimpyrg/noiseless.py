"""Error-probability estimators for CK universal (noiseless) coding.

Covers the crude step estimate, the classical error exponent found by
Newton-Raphson, the Gaussian-region erfc closed form, and the critical
exponents and test fractions that drive the RG solver.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from wimpyrg.dist import divergences_from_delta, entropy, probs_of, rel_entropy
from wimpyrg.errors import (
    DegenerateDenominator,
    DegenerateEntropyDelta,
    InvalidDistribution,
    NoInteriorMax,
    NonConvergence,
    UFactorDomain,
    ZeroProbabilityLetter,
)
from wimpyrg.special import erfc

REGULARIZE_TOL = 1e-10
NR_MAX_ITER = 50
NR_TOL = 1e-10


def _positive(q, what="Q"):
    q = probs_of(q).ravel()
    if np.any(q <= 0):
        raise ZeroProbabilityLetter(f"{what} must be strictly positive")
    return q


@dataclass(frozen=True)
class BetaStats:
    """beta(x) = -(ln Q(x) + H(Q)), its second moment, and B = beta Q / <beta^2>."""

    beta: np.ndarray
    beta_sq_mean: float
    B: np.ndarray


@dataclass(frozen=True)
class NoiselessProblem:
    Q: np.ndarray
    n: float
    R: float
    stats: BetaStats = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = _positive(self.Q)
        if abs(q.sum() - 1.0) > 1e-12:
            raise InvalidDistribution("Q must sum to 1")
        if self.n <= 0:
            raise InvalidDistribution("block length must be positive")
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "stats", beta_stats(q))

    kind = "noiseless"

    @property
    def delta_r(self):
        return self.R - entropy(self.Q)

    # hooks used by the RG solver
    def flow_q(self):
        return self.Q

    def flow_b(self):
        return self.stats.B

    def gamma1(self, dp, t_order=None):
        return gamma1_noiseless_delta(self.Q, dp)

    def fractions(self, dp, t_order=None):
        return test_fractions_delta(self.Q, dp)

    def closed_form(self, dr, n, include_u=False, return_clamp=False):
        return perr_gaussian(dr, n, self.stats, include_u, return_clamp)


def zk(q, lam, k):
    """Z_k(lam) = sum Q^(1/(1+lam)) (ln Q)^k."""
    q = _positive(q)
    lq = np.log(q)
    return float(np.sum(np.exp(lq / (1.0 + lam)) * lq**k))


def gamma_of_lambda(q, R, lam):
    """gamma(lam) = lam R - (1+lam) ln Z_0 with its first two derivatives."""
    q = _positive(q)
    lq = np.log(q)
    w = np.exp(lq / (1.0 + lam))
    z0 = w.sum()
    z1 = np.sum(w * lq)
    z2 = np.sum(w * lq * lq)
    g = lam * R - (1.0 + lam) * math.log(z0)
    d1 = R - math.log(z0) + z1 / ((1.0 + lam) * z0)
    d2 = -(z0 * z2 - z1 * z1) / ((1.0 + lam) ** 3 * z0 * z0)
    return float(g), float(d1), float(min(d2, 0.0))


def tilted(q, lam):
    """P^lam(x) = Q(x)^(1/(1+lam)) / Z."""
    q = _positive(q)
    w = np.exp(np.log(q) / (1.0 + lam))
    return w / w.sum()


def error_exponent(q, R):
    """Maximize gamma(lam) over lam >= 0; returns (gamma*, lam*).

    Newton-Raphson from lam = 0 on gamma'(lam) = R - H(P^lam), kept inside a
    sign-change bracket and falling back to bisection when a step leaves it.
    """
    q = _positive(q)
    h = entropy(q)
    if R <= h:
        raise NoInteriorMax(f"R = {R} does not exceed H(Q) = {h}")
    if R >= math.log(q.size):
        raise NoInteriorMax(f"R = {R} is not below ln N = {math.log(q.size)}")
    lo, hi = 0.0, 1.0
    while gamma_of_lambda(q, R, hi)[1] > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise NonConvergence("could not bracket the maximizer of gamma")
    lam = lo
    for _ in range(NR_MAX_ITER):
        g, d1, d2 = gamma_of_lambda(q, R, lam)
        if abs(d1) < NR_TOL:
            return max(g, 0.0), lam
        if d1 > 0:
            lo = max(lo, lam)
        else:
            hi = min(hi, lam)
        step = lam - d1 / d2 if d2 < 0 else math.nan
        lam = step if lo < step < hi else 0.5 * (lo + hi)
    raise NonConvergence(f"Newton-Raphson did not converge in {NR_MAX_ITER} iterations")


def perr_old(prob):
    """exp(-n gamma*), the classical asymptotic estimate."""
    g, _ = error_exponent(prob.Q, prob.R)
    return math.exp(-prob.n * g)


def perr_crude(prob):
    """1 when the source entropy reaches the rate, else 0 (ties count as errors)."""
    return 1.0 if entropy(prob.Q) >= prob.R else 0.0


def beta_stats(q):
    q = _positive(q)
    lq = np.log(q)
    beta = -(lq + entropy(q))
    m2 = float(np.sum(q * beta * beta))
    B = beta * q / m2 if m2 > 0 else np.zeros_like(q)
    return BetaStats(beta=beta, beta_sq_mean=m2, B=B)


def u_factor(beta, beta_sq_mean, dr):
    radicand = 1.0 + beta * dr / beta_sq_mean
    if np.any(radicand <= 0):
        raise UFactorDomain("1 + beta dR / <beta^2> must stay positive")
    return math.sqrt(float(np.prod(radicand)))


def _clamp(p):
    c = min(max(p, 0.0), 1.0)
    return c, c != p


def perr_gaussian(dr, n, stats, include_u=False, return_clamp=False):
    """erfc(dR sqrt(n / 2<beta^2>)) / (2u); u = 1 unless ``include_u``."""
    if stats.beta_sq_mean <= 0:
        raise DegenerateDenominator("<beta^2> vanishes for a uniform source")
    u = u_factor(stats.beta, stats.beta_sq_mean, dr) if include_u else 1.0
    arg = dr * math.sqrt(n / (2.0 * stats.beta_sq_mean))
    p, clamped = _clamp(0.5 * erfc(arg) / u)
    return (p, clamped) if return_clamp else p


def _delta(p, q):
    p = probs_of(p).ravel()
    q = _positive(q)
    if p.shape != q.shape:
        raise InvalidDistribution("P and Q alphabets differ")
    return p - q, q


def gamma0(p, q):
    """D(P//Q) / (D(P//Q) + D(Q//P)); exactly 1/2 at P = Q."""
    dp, q = _delta(p, q)
    _positive(q + dp, "P")
    return gamma0_delta(q, dp)


def gamma0_delta(q, dp):
    if np.max(np.abs(dp)) < REGULARIZE_TOL:
        return 0.5
    fwd, rev = divergences_from_delta(q, dp)
    return fwd / (fwd + rev)


def gamma1_noiseless(p, q):
    """(1 - D(Q//P) / dH(P)) gamma0; exactly 1/2 at P = Q."""
    dp, q = _delta(p, q)
    _positive(q + dp, "P")
    return gamma1_noiseless_delta(q, dp)


def gamma1_noiseless_delta(q, dp):
    if np.max(np.abs(dp)) < REGULARIZE_TOL:
        return 0.5
    fwd, rev = divergences_from_delta(q, dp)
    dh = -float(np.sum(dp * np.log(q))) - fwd
    if abs(dh) <= 1e-14:
        raise DegenerateEntropyDelta("H(P) - H(Q) vanishes")
    g0 = fwd / (fwd + rev)
    return (1.0 - rev / dh) * g0


def test_fractions(pstar, q):
    """(Phi_0, Phi_1): relative misfit of D and dH against their leading Taylor terms."""
    dp, q = _delta(pstar, q)
    _positive(q + dp, "P*")
    return test_fractions_delta(q, dp)


test_fractions.__test__ = False


def test_fractions_delta(q, dp):
    quad = float(np.sum(dp * dp / (2.0 * q)))
    lin = -float(np.sum(dp * np.log(q)))
    if quad == 0.0 or lin == 0.0:
        raise DegenerateDenominator("test fractions undefined at dP = 0")
    fwd, _ = divergences_from_delta(q, dp)
    dh = lin - fwd
    return abs(fwd / quad - 1.0), abs(dh / lin - 1.0)


test_fractions_delta.__test__ = False


def divergence_at_uniform(q):
    """D(Omega//Q), the exponent reached as R -> ln N."""
    q = _positive(q)
    return rel_entropy(np.full(q.size, 1.0 / q.size), q)
