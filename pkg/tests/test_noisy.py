import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wimpyrg.errors import ZeroProbabilityCell
from wimpyrg.noisy import (
    Channel,
    NoisyProblem,
    _alphas,
    capacity,
    channel_stats,
    dt_series,
    epsilon_of,
    gamma1_noisy,
    joint_mutual_info,
    perr_crude_noisy,
    perr_gaussian_noisy,
    t_series,
)

BSC = Channel.bsc(0.01)
UNIF = np.array([0.5, 0.5])
DP = np.array([[0.001, -0.0005], [-0.0007, 0.0002]])


def test_c1_and_capacity_bsc():
    s = channel_stats(UNIF, BSC)
    assert s.C1 == pytest.approx(0.637146, abs=1e-6)
    assert s.C1 == pytest.approx(joint_mutual_info(UNIF, BSC), abs=1e-12)
    C, r = capacity(BSC)
    assert C == pytest.approx(s.C1, abs=1e-9)
    assert np.allclose(r, UNIF, atol=1e-6)
    assert C / math.log(2) == pytest.approx(0.919, abs=1e-3)


def test_capacity_z_channel():
    # Z channel with crossover 1/2: C = ln(5/4)
    C, r = capacity(Channel([[1.0, 0.0], [0.5, 0.5]]))
    assert C == pytest.approx(math.log(1.25), abs=1e-8)
    assert r[1] == pytest.approx(0.4, abs=1e-5)


def test_zero_cell_rejected():
    with pytest.raises(ZeroProbabilityCell):
        channel_stats(UNIF, np.eye(2))


def test_stat_identities():
    s = channel_stats([0.3, 0.7], [[0.8, 0.2], [0.25, 0.75]])
    assert np.sum(s.Q * s.beta) == pytest.approx(0.0, abs=1e-15)
    # alpha averages to zero over x for every y
    assert np.allclose(np.sum(s.Qx_given_y * s.alpha, axis=0), 0.0, atol=1e-15)
    assert _alphas(s.Qy, s)[1] == pytest.approx(s.alpha_sq_mean, abs=1e-12)


def test_eps_vanishes_at_q():
    s = channel_stats(UNIF, BSC)
    assert epsilon_of(s.Q, s) == pytest.approx(0.0, abs=1e-15)
    assert t_series(s.Q, s, 4) == pytest.approx(0.0, abs=1e-15)


def test_dt_equals_2t_for_fixed_output_marginal():
    s = channel_stats(UNIF, BSC)
    dp = np.array([[1e-3, -1e-3], [-1e-3, 1e-3]])  # dP(y) = 0
    p = s.Q + dp
    assert dt_series(p, dp, s, 2) == pytest.approx(2 * t_series(p, s, 2), abs=1e-12)


@pytest.mark.parametrize("order", [2, 3, 4])
def test_dt_is_flow_derivative_of_t(order):
    # along P(s) = Q + e^{-s} dP the flow derivative -dt/ds equals Dt
    s = channel_stats(UNIF, BSC)
    h = 1e-4

    def t_at(k):
        return t_series(s.Q + k * DP, s, order)

    fd = (t_at(1 + h) - t_at(1 - h)) / (2 * h)
    assert dt_series(s.Q + DP, DP, s, order) == pytest.approx(fd, rel=1e-6)


def test_order_zero_switches_t_off():
    s = channel_stats(UNIF, BSC)
    assert t_series(s.Q + DP, s, 0) == 0.0


def test_bad_order():
    s = channel_stats(UNIF, BSC)
    with pytest.raises(ValueError):
        t_series(s.Q + DP, s, 5)


@pytest.mark.parametrize("order", [0, 2, 3, 4])
def test_gamma1_noisy_tends_to_half(order):
    s = channel_stats([0.4, 0.6], [[0.9, 0.1], [0.2, 0.8]])
    direction = np.array([[0.3, -0.5], [0.4, -0.2]])
    devs = [abs(gamma1_noisy(s.Q + k * direction, s.Q, s, order) - 0.5) for k in (1e-2, 1e-3, 1e-4)]
    assert devs[1] < 0.01
    assert devs[2] < devs[1] < devs[0]


def test_closed_form_and_crude():
    p = NoisyProblem(UNIF, BSC, 20, 0.5)
    assert perr_gaussian_noisy(0.0, 20, p.stats) == 0.5
    assert perr_gaussian_noisy(-0.3, 20, p.stats) < 0.5 < perr_gaussian_noisy(0.1, 20, p.stats)
    assert perr_crude_noisy(p) == 0.0
    assert perr_crude_noisy(NoisyProblem(UNIF, BSC, 20, p.stats.C1)) == 1.0


@settings(deadline=None, max_examples=25)
@given(st.floats(0.01, 0.45), st.floats(0.1, 0.9))
def test_c1_at_most_capacity(flip, q0):
    ch = Channel.bsc(flip)
    C, _ = capacity(ch)
    assert channel_stats([q0, 1 - q0], ch).C1 <= C + 1e-9


def _exact_t(p, s):
    # t = -lam sum P L - sum_y P(y) ln Z_y(lam) at the stationary lam
    from scipy.optimize import brentq

    py = p.sum(axis=0)
    pl = np.sum(p * s.L)

    def dlnz(lam):
        e = s.Qx_given_y * np.exp(-lam * s.L)
        return -np.sum(e * s.L, axis=0) / e.sum(axis=0)

    lam = brentq(lambda x: pl + np.sum(py * dlnz(x)), -50, 50)
    lnz = np.log(np.sum(s.Qx_given_y * np.exp(-lam * s.L), axis=0))
    return -lam * pl - np.sum(py * lnz)


@pytest.mark.parametrize("order,power", [(2, 3), (3, 4), (4, 5)])
def test_t_series_truncation_order(order, power):
    s = channel_stats([0.4, 0.6], [[0.9, 0.1], [0.2, 0.8]])
    w = np.array([[0.3, -0.5], [0.4, -0.2]])
    d = s.Q * (w - np.sum(s.Q * w))
    errs = [abs(_exact_t(s.Q + k * d, s) - t_series(s.Q + k * d, s, order)) for k in (0.2, 0.1)]
    # halving eps should shrink the remainder by about 2^power
    assert errs[0] / errs[1] == pytest.approx(2**power, rel=0.2)
