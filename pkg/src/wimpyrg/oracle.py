"""Desk-scale ground truth: brute-force CK enumeration and random-coding simulation."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from wimpyrg.composition import ck_perr_exact  # noqa: F401  (re-exported oracle)
from wimpyrg.dist import entropy, probs_of
from wimpyrg.errors import DimensionMismatch, InvalidDistribution
from wimpyrg.noisy import Channel

MAX_N = 16
MAX_M = 256
MIN_TRIALS = 1000
CHUNK = 256
MAX_WORDS = 2_000_000


@dataclass
class McResult:
    estimate: float
    std_error: float
    trials: int
    per_message_perr: np.ndarray


def ck_perr_bruteforce(q, n, R):
    """CK error probability by summing Q^n over every word whose empirical entropy exceeds R."""
    q = probs_of(q).ravel()
    N = q.size
    if N**n > MAX_WORDS:
        raise InvalidDistribution(f"{N}^{n} words is too many to enumerate")
    total = 0.0
    for word in itertools.product(range(N), repeat=n):
        counts = np.bincount(word, minlength=N)
        if entropy(counts / n) > R:
            total += math.prod(q[x] for x in word)
    return total


def _log_channel(channel):
    cond = channel.cond if isinstance(channel, Channel) else Channel(channel).cond
    with np.errstate(divide="ignore"):
        return cond, np.log(cond)


def _check_bounds(qx, cond, n, M, trials=None):
    if cond.shape[0] != qx.size:
        raise DimensionMismatch("input distribution and channel rows differ in size")
    if not 1 <= n <= MAX_N:
        raise InvalidDistribution(f"n must lie in [1, {MAX_N}]")
    if not 2 <= M <= MAX_M:
        raise InvalidDistribution(f"M must lie in [2, {MAX_M}]")
    if trials is not None and trials < MIN_TRIALS:
        raise InvalidDistribution(f"need at least {MIN_TRIALS} trials")


def _chunk_errors(rng, qx, cond, logw, n, M, size):
    nx, ny = cond.shape
    books = rng.choice(nx, size=(size, M, n), p=qx)
    sent = rng.integers(0, M, size=size)
    x0 = books[np.arange(size), sent]
    # inverse-CDF draw of each output letter given its input letter
    cdf = np.cumsum(cond, axis=1)
    u = rng.random((size, n))
    y = np.minimum((u[..., None] > cdf[x0]).sum(axis=-1), ny - 1)
    ll = logw[books, y[:, None, :]].sum(axis=-1)
    ll0 = ll[np.arange(size), sent]
    rivals = ll >= ll0[:, None]
    rivals[np.arange(size), sent] = False
    # strict ML: any rival at least as likely is an error
    return sent, rivals.any(axis=1)


def noisy_mc_perr(qx, channel, n, M, trials=10_000, seed=0):
    """Random encoding plus strict ML decoding, averaged over codebooks and a uniform message.

    Each trial draws a fresh codebook of M words i.i.d. from Qx, a message,
    and a channel output. Trials are generated in fixed-size chunks, each from
    its own stream keyed by (seed, chunk index), so any chunk can be
    reproduced on its own.
    """
    qx = probs_of(qx).ravel()
    cond, logw = _log_channel(channel)
    _check_bounds(qx, cond, n, M, trials)
    errs = np.zeros(M)
    sends = np.zeros(M)
    total = 0
    for chunk, start in enumerate(range(0, trials, CHUNK)):
        size = min(CHUNK, trials - start)
        rng = np.random.default_rng([seed, chunk])
        sent, err = _chunk_errors(rng, qx, cond, logw, n, M, size)
        np.add.at(sends, sent, 1)
        np.add.at(errs, sent, err)
        total += int(err.sum())
    p = total / trials
    with np.errstate(invalid="ignore"):
        per_msg = np.where(sends > 0, errs / np.maximum(sends, 1), np.nan)
    return McResult(
        estimate=p,
        std_error=math.sqrt(p * (1.0 - p) / trials),
        trials=trials,
        per_message_perr=per_msg[sends > 0],
    )


def noisy_exact_perr(qx, channel, n, M):
    """Expected p_err of random coding with strict ML, by enumerating x, y and one rival.

    Given the sent word x and output y, the M - 1 rivals are independent, so
    P(correct | x, y) = (1 - pi)^(M-1) with pi = Pr{ln Q(y|x') >= ln Q(y|x)}.
    """
    qx = probs_of(qx).ravel()
    cond, logw = _log_channel(channel)
    _check_bounds(qx, cond, n, M)
    nx, ny = cond.shape
    if (nx * nx * ny) ** n > MAX_WORDS:
        raise InvalidDistribution("alphabet and n too large for enumeration")
    xs = np.array(list(itertools.product(range(nx), repeat=n)))
    ys = np.array(list(itertools.product(range(ny), repeat=n)))
    px = np.prod(qx[xs], axis=1)
    ll = logw[xs[:, None, :], ys[None, :, :]].sum(axis=-1)  # (words x, words y)
    total = 0.0
    for j in range(len(ys)):
        col = ll[:, j]
        for i in range(len(xs)):
            if not np.isfinite(col[i]):
                continue
            pi = float(px[col >= col[i]].sum())
            total += px[i] * math.exp(col[i]) * (1.0 - (1.0 - pi) ** (M - 1))
    return total


def ruly_half_check(r):
    """Median of the per-message error probabilities against twice their mean."""
    v = np.asarray(r.per_message_perr, dtype=float)
    med = float(np.median(v))
    mean = float(np.mean(v))
    return {"median": med, "mean": mean, "passed": med <= 2.0 * mean}
