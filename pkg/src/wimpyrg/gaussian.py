"""Closed-form Gaussian integrals with delta and theta constraints.

The measure is dG(x) = exp(-x^T A x / 2 + b^T x) dx over R^N. A delta
constraint delta(v^T x) is the eps -> 0 limit of a narrow Gaussian in v^T x,
which makes the effective precision A + v v^T / eps; its inverse and log
determinant come from the rank-one lemma below.
"""

import math
from dataclasses import dataclass

import numpy as np

from wimpyrg.errors import DegenerateDirection, NotPositiveDefinite
from wimpyrg.special import erfc

MAX_DIM = 8
SYM_TOL = 1e-12
DEGEN_TOL = 1e-12


def _as_spd(a):
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotPositiveDefinite("matrix must be square")
    if a.shape[0] > MAX_DIM:
        raise NotPositiveDefinite(f"dimension {a.shape[0]} exceeds {MAX_DIM}")
    if np.max(np.abs(a - a.T)) > SYM_TOL * max(1.0, np.max(np.abs(a))):
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Cholesky factorization failed") from exc
    return a, chol


@dataclass(frozen=True)
class GaussianSpec:
    """Precision matrix A (SPD) and linear term b of dG."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a, chol = _as_spd(self.A)
        b = np.array(self.b, dtype=float).ravel()
        if b.size != a.shape[0]:
            raise NotPositiveDefinite("b does not match the dimension of A")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self):
        return self.b.size

    def solve(self, rhs):
        y = np.linalg.solve(self._chol, rhs)
        return np.linalg.solve(self._chol.T, y)

    def inv(self):
        return self.solve(np.eye(self.dim))

    def logdet(self):
        return 2.0 * float(np.sum(np.log(np.diag(self._chol))))


def _quad_form(ainv, v):
    val = float(v @ ainv @ v)
    if abs(val) <= DEGEN_TOL:
        raise DegenerateDirection(f"v^T A^-1 v = {val} is degenerate")
    return val


def rank1_inverse(ainv, v):
    """Limit eps -> 0 of (A + v v^T / eps)^-1 given A^-1.

    Equals A^-1 - A^-1 v v^T A^-1 / (v^T A^-1 v), a projector-like matrix
    that annihilates v.
    """
    ainv = np.asarray(ainv, dtype=float)
    v = np.asarray(v, dtype=float).ravel()
    w = ainv @ v
    return ainv - np.outer(w, ainv.T @ v) / _quad_form(ainv, v)


def rank1_logdet(a, v, eps):
    """ln det(A + v v^T / eps) to leading order in eps."""
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float).ravel()
    sign, logdet = np.linalg.slogdet(a)
    if sign <= 0:
        raise NotPositiveDefinite("det A must be positive")
    return logdet + math.log(_quad_form(np.linalg.inv(a), v)) - math.log(eps)


def gauss_norm(g):
    """Integral of dG: (2 pi)^(N/2) / sqrt(det A) exp(b^T A^-1 b / 2)."""
    ainv_b = g.solve(g.b)
    log_val = 0.5 * g.dim * math.log(2 * math.pi) - 0.5 * g.logdet() + 0.5 * float(g.b @ ainv_b)
    return math.exp(log_val)


def gauss_delta(g, v):
    """Integral of dG delta(v^T x)."""
    v = np.asarray(v, dtype=float).ravel()
    vav = _quad_form(g.inv(), v)
    ainv_b = g.solve(g.b)
    # b^T A^-1 Atilde A^-1 b with Atilde = v v^T / (v^T A^-1 v)
    proj = float(v @ ainv_b) ** 2 / vav
    return gauss_norm(g) / math.sqrt(2 * math.pi * vav) * math.exp(-0.5 * proj)


def gauss_theta(g, u, alpha):
    """Integral of dG theta(u^T x >= alpha)."""
    u = np.asarray(u, dtype=float).ravel()
    uau = _quad_form(g.inv(), u)
    arg = (alpha - float(u @ g.solve(g.b))) / math.sqrt(2.0 * uau)
    return gauss_norm(g) * 0.5 * erfc(arg)


def gauss_theta_delta(g, u, v, alpha):
    """Integral of dG delta(v^T x) theta(u^T x >= alpha)."""
    u = np.asarray(u, dtype=float).ravel()
    binv = rank1_inverse(g.inv(), v)
    ubu = float(u @ binv @ u)
    if ubu <= DEGEN_TOL * max(1.0, float(u @ u)):
        raise DegenerateDirection("u lies along v; the theta constraint is degenerate on the hyperplane")
    arg = (alpha - float(u @ binv @ g.b)) / math.sqrt(2.0 * ubu)
    return gauss_delta(g, v) * 0.5 * erfc(arg)


def _orth_complement(v):
    """Orthonormal basis (columns) of the subspace orthogonal to v."""
    n = v.size
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(n)]))
    return q[:, 1:n]


def mc_gauss(g, constraint=None, samples=100_000, seed=0, slab_width=None):
    """Importance-sampled Monte-Carlo estimate of a constrained dG integral.

    ``constraint`` is None, ``("theta", u, alpha)``, ``("delta", v)`` or
    ``("both", u, v, alpha)``. Returns ``(estimate, std_error)``.

    The proposal is an isotropic Gaussian broader than the target, so the
    weights stay bounded. For delta constraints the component along v is drawn
    uniformly inside a slab |v^T x| < w/2 and the slab average is extrapolated
    to w -> 0 from widths w and w/2 (Richardson, bias O(w^2)).
    """
    if samples < 10_000:
        raise ValueError("mc_gauss needs at least 1e4 samples")
    rng = np.random.default_rng(seed)
    n = g.dim
    ainv = g.inv()
    center = ainv @ g.b
    sigma2 = 1.5 * float(np.max(np.linalg.eigvalsh(ainv)))
    kind = None if constraint is None else constraint[0]

    def log_g(x):
        return -0.5 * np.einsum("ij,jk,ik->i", x, g.A, x) + x @ g.b

    if kind in (None, "theta"):
        z = rng.standard_normal((samples, n))
        x = center + math.sqrt(sigma2) * z
        log_q = -0.5 * np.sum(z * z, axis=1) - 0.5 * n * math.log(2 * math.pi * sigma2)
        vals = np.exp(log_g(x) - log_q)
        if kind == "theta":
            _, u, alpha = constraint
            vals = vals * (x @ np.asarray(u, dtype=float) >= alpha)
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))

    if kind == "delta":
        _, v = constraint
        u = alpha = None
    elif kind == "both":
        _, u, v, alpha = constraint
        u = np.asarray(u, dtype=float)
    else:
        raise ValueError(f"unknown constraint {kind!r}")
    v = np.asarray(v, dtype=float).ravel()
    vnorm = float(np.linalg.norm(v))
    vhat = v / vnorm
    if slab_width is None:
        slab_width = 1e-3 * math.sqrt(float(v @ ainv @ v))
    basis = _orth_complement(vhat)
    z = rng.standard_normal((samples, n - 1))
    base = center - vhat * float(vhat @ center)
    inplane = base + math.sqrt(sigma2) * z @ basis.T
    log_q = -0.5 * np.sum(z * z, axis=1) - 0.5 * (n - 1) * math.log(2 * math.pi * sigma2)
    unif = rng.uniform(-0.5, 0.5, samples)

    def slab_values(width):
        # v^T x uniform on (-width/2, width/2); density of tau along vhat is vnorm / width
        x = inplane + np.outer(unif * width / vnorm, vhat)
        vals = np.exp(log_g(x) - log_q) / vnorm
        if u is not None:
            vals = vals * (x @ u >= alpha)
        return vals

    coarse = slab_values(slab_width)
    fine = slab_values(0.5 * slab_width)
    vals = (4.0 * fine - coarse) / 3.0
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))
