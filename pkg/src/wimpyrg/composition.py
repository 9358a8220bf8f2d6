"""Composition classes (method of types) and the exact CK error oracle."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from wimpyrg.dist import entropy, probs_of
from wimpyrg.errors import (
    InvalidDistribution,
    QuadratureFailure,
    TooManyClasses,
    ZeroProbabilityLetter,
)

MAX_CLASSES = 10**7


@dataclass(frozen=True)
class CompositionClass:
    """All n-letter words sharing the letter counts ``counts``."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts) or sum(counts) < 1:
            raise InvalidDistribution(f"bad letter counts {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self):
        return sum(self.counts)

    @property
    def dist(self):
        return np.array(self.counts, dtype=float) / self.n


def class_size_exact(cc):
    """n! / prod n(x)!, as an exact integer."""
    size = math.factorial(cc.n)
    for c in cc.counts:
        size //= math.factorial(c)
    return size


def class_size_approx(n, p):
    """Stirling estimate exp(nH) / ((2 pi n)^((N-1)/2) sqrt(prod P))."""
    p = probs_of(p)
    if np.any(p <= 0):
        raise ZeroProbabilityLetter("Stirling estimate needs every P(x) > 0")
    log_size = n * entropy(p) - 0.5 * (p.size - 1) * math.log(2 * math.pi * n) - 0.5 * np.sum(np.log(p))
    return math.exp(log_size)


def num_classes_exact(n, N):
    """Number of count vectors of length N summing to n."""
    return math.comb(n + N - 1, N - 1)


def num_classes_approx(n, N):
    return n ** (N - 1) / math.factorial(N - 1)


def class_prob_exact(cc, q):
    """Q(C) = |C| prod Q(x)^n(x)."""
    q = probs_of(q)
    if q.size != len(cc.counts):
        raise InvalidDistribution("class and distribution alphabets differ")
    log_p = 0.0
    for c, qx in zip(cc.counts, q):
        if c == 0:
            continue
        if qx == 0:
            return 0.0
        log_p += c * math.log(qx)
    size = class_size_exact(cc)
    if size < 2**1000:
        return float(size) * math.exp(log_p)
    return math.exp(math.log(size) + log_p)


def _count_vectors(n, N):
    if N == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _count_vectors(n - first, N - 1):
            yield (first,) + rest


def enumerate_classes(n, N, cap=MAX_CLASSES):
    """Every composition class of length-n words over N letters, lexicographic."""
    total = num_classes_exact(n, N)
    if total > cap:
        raise TooManyClasses(f"{total} classes exceeds the cap of {cap}")
    return [CompositionClass(c) for c in _count_vectors(n, N)]


def reduction1_check(n):
    """I(1) / 2^n for a binary alphabet, by quadrature.

    Uses p = sin^2(theta), which turns dp / sqrt(p(1-p)) into 2 dtheta.
    """

    def integrand(theta):
        p = math.sin(theta) ** 2
        h = entropy(np.array([p, 1.0 - p]))
        return 2.0 * math.exp(n * (h - math.log(2.0)))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(integrand, 0.0, math.pi / 2, points=[math.pi / 4],
                                      epsabs=0.0, epsrel=1e-12, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    if not math.isfinite(val) or err > 1e-8 * abs(val):
        raise QuadratureFailure(f"quadrature error estimate {err} too large")
    return math.sqrt(n / (2 * math.pi)) * val


def rate_with_volume_correction(R, n, N):
    """R^V = R - N ln(n+1) / n."""
    return R - N * math.log(n + 1) / n


def ck_perr_exact(q, n, R, volume_corrected=False, cap=MAX_CLASSES):
    """Exact CK universal-code error probability, sum over classes with H(P_C) > R.

    With ``volume_corrected`` the threshold is R^V instead of R.
    """
    q = probs_of(q)
    thresh = rate_with_volume_correction(R, n, q.size) if volume_corrected else R
    total = 0.0
    for cc in enumerate_classes(n, q.size, cap):
        if entropy(cc.dist) > thresh:
            total += class_prob_exact(cc, q)
    return min(max(total, 0.0), 1.0)
