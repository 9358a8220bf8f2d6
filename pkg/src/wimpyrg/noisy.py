"""Random encoding with ML decoding over a discrete memoryless channel.

Joint quantities live on (x, y) matrices with rows indexed by the input
letter. The discriminant correction t is carried as a power series in
eps = sum_y P(y) sum_x dP(x|y) L_xy, truncated at order 2, 3 or 4.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from wimpyrg.dist import divergences_from_delta, mutual_info, probs_of
from wimpyrg.errors import (
    DegenerateAlpha2,
    DegenerateDenominator,
    DegenerateT,
    DimensionMismatch,
    InvalidDistribution,
    NonConvergence,
    ZeroMarginal,
    ZeroProbabilityCell,
)
from wimpyrg.noiseless import REGULARIZE_TOL, _clamp, gamma0_delta, u_factor
from wimpyrg.special import erfc

T_ORDERS = (0, 2, 3, 4)


@dataclass(frozen=True)
class Channel:
    """Conditional matrix Q(y|x); each row is a distribution over outputs."""

    cond: np.ndarray

    def __post_init__(self):
        c = np.array(self.cond, dtype=float)
        if c.ndim != 2:
            raise DimensionMismatch("channel matrix must be 2-D")
        if np.any(c < 0) or np.any(np.abs(c.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidDistribution("every channel row must be a distribution")
        c.setflags(write=False)
        object.__setattr__(self, "cond", c)

    @classmethod
    def bsc(cls, flip):
        return cls(np.array([[1.0 - flip, flip], [flip, 1.0 - flip]]))

    @property
    def n_in(self):
        return self.cond.shape[0]

    @property
    def n_out(self):
        return self.cond.shape[1]


@dataclass(frozen=True)
class ChannelStats:
    Q: np.ndarray  # joint Q(x, y)
    Qx: np.ndarray
    Qy: np.ndarray
    Qx_given_y: np.ndarray
    L: np.ndarray
    C1: float
    beta: np.ndarray
    beta_sq_mean: float
    B: np.ndarray
    alpha: np.ndarray
    alpha_sq_mean: float
    a: np.ndarray  # a_k(y) for k = 1..4, shape (4, N_y)


def _cumulant_coeffs(A1, A2, A3, A4):
    a1 = -A1
    a2 = A2 - A1**2
    a3 = -(A1**3) + 1.5 * A1 * A2 - 0.5 * A3
    a4 = -(A1**4) + 2.0 * A2 * A1**2 - (2.0 / 3.0) * A1 * A3 - 0.5 * A2**2 + A4 / 6.0
    return np.array([a1, a2, a3, a4])


def channel_stats(qx, channel):
    """L, C1, beta, alpha and the series coefficients a_k(y) for Q(x)Q(y|x)."""
    qx = probs_of(qx).ravel()
    cond = channel.cond if isinstance(channel, Channel) else np.asarray(channel, dtype=float)
    if cond.shape[0] != qx.size:
        raise DimensionMismatch("input distribution and channel rows differ in size")
    q = qx[:, None] * cond
    if np.any(q <= 0):
        raise ZeroProbabilityCell("every Q(x, y) must be positive")
    qy = q.sum(axis=0)
    L = np.log(q / (qx[:, None] * qy[None, :]))
    c1 = float(np.sum(q * L))
    beta = L - c1
    b2 = float(np.sum(q * beta * beta))
    qxy = q / qy[None, :]
    alpha = L - np.sum(qxy * L, axis=0)[None, :]
    a2m = float(np.sum(q * alpha * alpha))
    A = [np.sum(qxy * L**k, axis=0) for k in (1, 2, 3, 4)]
    return ChannelStats(
        Q=q, Qx=qx, Qy=qy, Qx_given_y=qxy, L=L, C1=c1,
        beta=beta, beta_sq_mean=b2, B=beta * q / b2 if b2 > 0 else np.zeros_like(q),
        alpha=alpha, alpha_sq_mean=a2m, a=_cumulant_coeffs(*A),
    )


def capacity(channel, tol=1e-9, max_iter=10_000):
    """Channel capacity in nats by Blahut-Arimoto; returns (C, maximizing Q_x).

    Stops once the standard upper bound max_x D(W_x // q_y) meets the
    mutual information to within ``tol``.
    """
    W = channel.cond if isinstance(channel, Channel) else np.asarray(channel, dtype=float)
    nx = W.shape[0]
    r = np.full(nx, 1.0 / nx)
    pos = W > 0
    logW = np.where(pos, np.log(np.where(pos, W, 1.0)), 0.0)
    for _ in range(max_iter):
        qy = r @ W
        with np.errstate(divide="ignore"):
            logq = np.where(qy > 0, np.log(qy), 0.0)
        d = np.sum(np.where(pos, W * (logW - logq[None, :]), 0.0), axis=1)
        lower = float(r @ d)
        upper = float(np.max(d))
        if upper - lower < tol:
            return max(lower, 0.0), r
        r = r * np.exp(d - upper)
        r /= r.sum()
    raise NonConvergence(f"Blahut-Arimoto did not reach tol={tol} in {max_iter} iterations")


@dataclass(frozen=True)
class NoisyProblem:
    Qx: np.ndarray
    channel: Channel
    n: float
    R: float
    stats: ChannelStats = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        qx = probs_of(self.Qx).ravel()
        ch = self.channel if isinstance(self.channel, Channel) else Channel(self.channel)
        if self.n <= 0:
            raise InvalidDistribution("block length must be positive")
        object.__setattr__(self, "Qx", qx)
        object.__setattr__(self, "channel", ch)
        object.__setattr__(self, "stats", channel_stats(qx, ch))

    kind = "noisy"

    @property
    def delta_r(self):
        return self.R - self.stats.C1

    def flow_q(self):
        return self.stats.Q.ravel()

    def flow_b(self):
        return self.stats.B.ravel()

    def gamma1(self, dp, t_order=2):
        dp = np.asarray(dp).reshape(self.stats.Q.shape)
        return gamma1_noisy(self.stats.Q + dp, self.stats.Q, self.stats, t_order)

    def fractions(self, dp, t_order=2):
        return noisy_test_fractions(self.stats, np.asarray(dp).reshape(self.stats.Q.shape), t_order)

    def closed_form(self, dr, n, include_u=False, return_clamp=False):
        return perr_gaussian_noisy(dr, n, self.stats, include_u, return_clamp)


def perr_crude_noisy(prob):
    """1 when the rate reaches C1, else 0 (ties count as errors)."""
    return 1.0 if prob.R >= prob.stats.C1 else 0.0


def _joint(p, stats):
    p = probs_of(p)
    if p.shape != stats.Q.shape:
        raise DimensionMismatch("P and Q joint shapes differ")
    return p


def epsilon_of(p, stats):
    """eps = sum_y P(y) sum_x dP(x|y) L_xy."""
    p = _joint(p, stats)
    py = p.sum(axis=0)
    if np.any(py <= 0):
        raise ZeroMarginal("P(y) must be positive")
    return float(np.sum((p - stats.Qx_given_y * py[None, :]) * stats.L))


def _alphas(py, stats):
    # alpha_k = sum_y P(y) a_k(y), index 0 -> k = 1
    return stats.a @ py


def _t_coeffs(al):
    a2, a3, a4 = al[1], al[2], al[3]
    if abs(a2) <= 1e-12:
        raise DegenerateAlpha2(f"alpha_2 = {a2} is too small")
    return {
        2: 1.0 / (2.0 * a2),
        3: a3 / (3.0 * a2**3),
        4: (2.0 * a3**2 - a4 * a2) / (4.0 * a2**5),
    }


def _dt_coeffs(al, dal):
    a2, a3, a4 = al[1], al[2], al[3]
    d2, d3, d4 = dal[1], dal[2], dal[3]
    return {
        2: -d2 / (2.0 * a2**2),
        3: d3 / (3.0 * a2**3) - a3 * d2 / a2**4,
        4: (4.0 * a3 * d3 - d4 * a2 - a4 * d2) / (4.0 * a2**5)
        - 5.0 * (2.0 * a3**2 - a4 * a2) * d2 / (4.0 * a2**6),
    }


def _check_order(order):
    if order not in T_ORDERS:
        raise ValueError(f"t order must be one of {T_ORDERS}, got {order!r}")


def t_series(p, stats, order=2):
    """t = sum_{k=2..order} t_k eps^k; order 0 switches the correction off."""
    _check_order(order)
    if order == 0:
        return 0.0
    p = _joint(p, stats)
    eps = epsilon_of(p, stats)
    tk = _t_coeffs(_alphas(p.sum(axis=0), stats))
    return float(sum(tk[k] * eps**k for k in range(2, order + 1)))


def dt_series(p, dp=None, stats=None, order=2):
    """Dt, the flow derivative of t: sum_k (k t_k eps^k + eps^k Dt_k)."""
    _check_order(order)
    if order == 0:
        return 0.0
    p = _joint(p, stats)
    dp = p - stats.Q if dp is None else probs_of(dp).reshape(stats.Q.shape)
    eps = epsilon_of(p, stats)
    al = _alphas(p.sum(axis=0), stats)
    dal = stats.a @ dp.sum(axis=0)
    tk = _t_coeffs(al)
    dtk = _dt_coeffs(al, dal)
    return float(sum(k * tk[k] * eps**k + dtk[k] * eps**k for k in range(2, order + 1)))


def gamma1_noisy(p, q, stats, order=2):
    """gamma_0 (1 + (Dt - t) / T) with T = sum dP L + t; exactly 1/2 at P = Q."""
    p = _joint(p, stats)
    q = probs_of(q)
    dp = p - q
    if np.max(np.abs(dp)) < REGULARIZE_TOL:
        return 0.5
    g0 = gamma0_delta(q, dp)
    t = t_series(p, stats, order)
    dt = dt_series(p, dp, stats, order)
    T = float(np.sum(dp * stats.L)) + t
    if abs(T) <= 1e-14:
        raise DegenerateT("T = T0 + t vanishes")
    return (1.0 + (dt - t) / T) * g0


def u_factor_noisy(stats, dr):
    return u_factor(stats.beta.ravel(), stats.beta_sq_mean, dr)


def perr_gaussian_noisy(dr, n, stats, include_u=False, return_clamp=False):
    """1 - erfc(dR sqrt(n / 2<beta^2>)) / (2u); u = 1 unless ``include_u``."""
    if stats.beta_sq_mean <= 0:
        raise DegenerateDenominator("<beta^2> vanishes")
    u = u_factor_noisy(stats, dr) if include_u else 1.0
    arg = dr * math.sqrt(n / (2.0 * stats.beta_sq_mean))
    p, clamped = _clamp(1.0 - 0.5 * erfc(arg) / u)
    return (p, clamped) if return_clamp else p


def noisy_test_fractions(stats, dp, order=2):
    """(Phi_0, Phi_1) on the joint simplex.

    Phi_0 compares D(P//Q) with sum dP^2 / 2Q; Phi_1 compares the discriminant
    T = T0 + t with its linear part T0.
    """
    q = stats.Q
    quad = float(np.sum(dp * dp / (2.0 * q)))
    t0 = float(np.sum(dp * stats.L))
    if quad == 0.0 or t0 == 0.0:
        raise DegenerateDenominator("test fractions undefined at dP = 0")
    fwd, _ = divergences_from_delta(q, dp)
    t = t_series(q + dp, stats, order)
    return abs(fwd / quad - 1.0), abs(t / t0)


noisy_test_fractions.__test__ = False


def joint_mutual_info(qx, channel):
    cond = channel.cond if isinstance(channel, Channel) else np.asarray(channel, dtype=float)
    return mutual_info(probs_of(qx)[:, None] * cond)
