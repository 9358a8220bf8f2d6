"""Finite distributions and the entropy functionals built on them.

All logarithms are natural (nats). ``0 ln 0`` is taken as 0.
"""

from dataclasses import dataclass

import numpy as np

from wimpyrg.errors import DimensionMismatch, InvalidDistribution

NORM_TOL = 1e-12


def _check_probs(p, what):
    if not np.all(np.isfinite(p)):
        raise InvalidDistribution(f"{what} has non-finite entries")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise InvalidDistribution(f"{what} has entries outside [0, 1]")
    if abs(p.sum() - 1.0) > NORM_TOL:
        raise InvalidDistribution(f"{what} sums to {p.sum()!r}, not 1")


@dataclass(frozen=True)
class FiniteDist:
    """Probability vector over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        _check_probs(p, "FiniteDist")

    @classmethod
    def normalized(cls, weights):
        """Build from nonnegative weights, renormalizing explicitly."""
        w = np.asarray(weights, dtype=float).ravel()
        return cls(w / w.sum())

    @classmethod
    def uniform(cls, size):
        return cls(np.full(size, 1.0 / size))

    @property
    def alphabet_size(self):
        return self.probs.size

    def __len__(self):
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)


@dataclass(frozen=True)
class JointDist:
    """Probability matrix P(x, y); rows are x, columns are y."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2:
            raise DimensionMismatch("JointDist needs a 2-D array")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        _check_probs(p, "JointDist")

    @classmethod
    def from_channel(cls, qx, cond):
        """Q(x, y) = Q(x) Q(y|x)."""
        qx = probs_of(qx)
        cond = np.asarray(cond, dtype=float)
        if cond.shape[0] != qx.size:
            raise DimensionMismatch("channel rows must match the input alphabet")
        return cls(qx[:, None] * cond)

    @property
    def shape(self):
        return self.probs.shape

    def marginal_x(self):
        return FiniteDist(_renorm(self.probs.sum(axis=1)))

    def marginal_y(self):
        return FiniteDist(_renorm(self.probs.sum(axis=0)))

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)


@dataclass(frozen=True)
class DeltaDist:
    """Difference of two distributions, P - Q; entries sum to zero."""

    deltas: np.ndarray

    def __post_init__(self):
        d = np.array(self.deltas, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "deltas", d)
        if abs(d.sum()) > NORM_TOL:
            raise InvalidDistribution(f"DeltaDist sums to {d.sum()!r}, not 0")

    @classmethod
    def between(cls, p, q):
        return cls(probs_of(p) - probs_of(q))

    def __array__(self, dtype=None, copy=None):
        return self.deltas if dtype is None else self.deltas.astype(dtype)


def _renorm(m):
    # marginals of a valid joint can drift by an ulp
    return m / m.sum()


def probs_of(p):
    """Plain float array behind a distribution or array-like."""
    if isinstance(p, (FiniteDist, JointDist)):
        return p.probs
    if isinstance(p, DeltaDist):
        return p.deltas
    return np.asarray(p, dtype=float)


def _xlogx(p):
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log(p[nz])
    return out


def entropy(p):
    """Shannon entropy H(P) in nats."""
    p = probs_of(p)
    return float(-_xlogx(p).sum())


def rel_entropy(p, q):
    """D(P//Q) in nats; ``inf`` when P puts mass where Q has none."""
    p = probs_of(p)
    q = probs_of(q)
    if p.shape != q.shape:
        raise DimensionMismatch(f"shapes {p.shape} and {q.shape} differ")
    nz = p > 0
    if np.any(q[nz] == 0):
        return float("inf")
    return float(max(np.sum(p[nz] * np.log(p[nz] / q[nz])), 0.0))


def joint_entropy(pxy):
    return entropy(probs_of(pxy))


def cond_entropy(pxy):
    """H(x|y) = -sum P(x,y) ln P(x|y), rows x and columns y."""
    p = probs_of(pxy)
    py = p.sum(axis=0)
    return float(entropy(p) - entropy(py))


def mutual_info(pxy):
    """H(x:y) = H(x) + H(y) - H(x,y)."""
    p = probs_of(pxy)
    val = entropy(p.sum(axis=1)) + entropy(p.sum(axis=0)) - entropy(p)
    return float(max(val, 0.0))


def entropy_quadratic(q, dp):
    """Second-order Taylor value of H(Q + dP) about Q."""
    q = probs_of(q)
    dp = probs_of(dp)
    return float(entropy(q) - np.sum(dp * np.log(q)) - np.sum(dp**2 / (2.0 * q)))


def rel_entropy_quadratic(q, dp):
    """Leading term of D(Q + dP // Q): sum dP^2 / 2Q."""
    q = probs_of(q)
    dp = probs_of(dp)
    return float(np.sum(dp**2 / (2.0 * q)))


def divergences_from_delta(q, dp):
    """(D(P//Q), D(Q//P)) for P = Q + dP, accurate when dP is tiny.

    Each summand is written so its first-order part cancels analytically.
    """
    q = probs_of(q).ravel()
    dp = probs_of(dp).ravel()
    r = dp / q
    if np.any(r <= -1.0):
        return float("inf"), float("inf")
    lg = np.log1p(r)
    fwd = float(np.sum((q + dp) * lg - dp))
    rev = float(np.sum(dp - q * lg))
    return max(fwd, 0.0), max(rev, 0.0)
