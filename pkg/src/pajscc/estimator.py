"""Effective (post-FEC, post-deadline) source loss of one coded block.

``pi_star`` is the expected fraction of the ``k`` source packets the decoder
cannot use: zero when at least ``k`` of the ``n`` packets arrive in time,
otherwise the share of source packets that did not arrive themselves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import LossMode, PathState, stationary
from .errors import InvalidParameter, PathUnavailable
from .fec import FecBlockSpec


def largest_remainder(total: int, weights) -> list[int]:
    """Split ``total`` into integers proportional to ``weights``.

    Ties between equal remainders go to the earlier entry.
    """
    weights = [float(w) for w in weights]
    wsum = sum(weights)
    if total < 0 or not weights or wsum <= 0 or min(weights) < 0:
        raise InvalidParameter("largest_remainder needs total >= 0 and positive weights")
    quotas = [total * w / wsum for w in weights]
    counts = [math.floor(q) for q in quotas]
    short = total - sum(counts)
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


@dataclass(frozen=True)
class PacketAssignment:
    """How the ``n`` packets of a block are spread over paths.

    ``counts[r]`` packets go to ``path_ids[r]``; of those, ``sources[r]`` are
    source packets. Source indices ``0..k-1`` are handed out in contiguous runs
    in path order, then parity indices ``k..n-1`` the same way, so on every
    path the source packets precede its parity packets.
    """

    path_ids: tuple
    counts: tuple
    sources: tuple

    def __post_init__(self):
        if not (len(self.path_ids) == len(self.counts) == len(self.sources)):
            raise InvalidParameter("assignment fields must have equal length")
        if any(c < 0 for c in self.counts) or any(not 0 <= s <= c for s, c in zip(self.sources, self.counts)):
            raise InvalidParameter("inconsistent per-path packet counts")

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def k(self) -> int:
        return sum(self.sources)

    @classmethod
    def from_weights(cls, n: int, k: int, weights: dict) -> PacketAssignment:
        if not 1 <= k <= n:
            raise InvalidParameter(f"need 1 <= k <= n, got k={k}, n={n}")
        ids = tuple(weights)
        counts = largest_remainder(n, [weights[i] for i in ids])
        sources = largest_remainder(k, counts)
        return cls(ids, tuple(counts), tuple(sources))

    def indices(self) -> dict:
        """Packet indices carried by each path, ascending."""
        out = {}
        next_src, next_par = 0, self.k
        for pid, m, s in zip(self.path_ids, self.counts, self.sources):
            out[pid] = list(range(next_src, next_src + s)) + list(range(next_par, next_par + m - s))
            next_src += s
            next_par += m - s
        return out


@dataclass(frozen=True)
class EffectiveLoss:
    pi_star: float
    block_failure_prob: float
    pi_star_se: float | None = None
    block_failure_se: float | None = None


def _check_prob(p, what="p"):
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"{what} must lie in [0, 1], got {p}")


@lru_cache(maxsize=65536)
def _binom_pmf(m: int, q: float) -> np.ndarray:
    """P(X = i) for X ~ Binomial(m, q), i = 0..m."""
    if q == 0.0:
        pmf = np.zeros(m + 1)
        pmf[0] = 1.0
    elif q == 1.0:
        pmf = np.zeros(m + 1)
        pmf[m] = 1.0
    else:
        pmf = np.array([math.comb(m, i) * q**i * (1.0 - q) ** (m - i) for i in range(m + 1)])
    pmf.setflags(write=False)
    return pmf


def block_failure_prob_iid(n: int, k: int, p: float) -> float:
    """P(fewer than ``k`` of ``n`` packets survive independent loss ``p``)."""
    if not 1 <= k <= n <= 255:
        raise InvalidParameter(f"need 1 <= k <= n <= 255, got k={k}, n={n}")
    _check_prob(p)
    return float(_binom_pmf(n, p)[n - k + 1:].sum())


def residual_loss_groups(groups, k: int) -> EffectiveLoss:
    """Effective loss for independent packet groups.

    ``groups`` holds ``(n_source, n_parity, p)`` triples; every packet in a
    group is erased independently with probability ``p``. Source and parity
    arrivals are independent, so the joint law factors into two convolutions.
    """
    src_pmf = np.ones(1)
    par_pmf = np.ones(1)
    n_src = 0
    for s, q, p in groups:
        _check_prob(p)
        if s:
            src_pmf = np.convolve(src_pmf, _binom_pmf(s, 1.0 - p))
        if q:
            par_pmf = np.convolve(par_pmf, _binom_pmf(q, 1.0 - p))
        n_src += s
    if n_src != k:
        raise InvalidParameter(f"groups carry {n_src} source packets, expected k={k}")
    par_cdf = np.cumsum(par_pmf)
    s = np.arange(k + 1)
    # P(parity received <= k - s - 1), zero when k - s - 1 < 0
    need = k - s - 1
    fail_given_s = np.where(need >= 0, par_cdf[np.clip(need, 0, len(par_cdf) - 1)], 0.0)
    fail_given_s = np.where(need >= len(par_cdf), 1.0, fail_given_s)
    fail = float(np.dot(src_pmf, fail_given_s))
    pi_star = float(np.dot(src_pmf * (k - s), fail_given_s)) / k
    return EffectiveLoss(pi_star=min(pi_star, 1.0), block_failure_prob=min(fail, 1.0))


def residual_loss_iid(assignment: PacketAssignment, k: int, p) -> EffectiveLoss:
    """Analytic effective loss when path ``r`` drops each packet with ``p[r]``.

    ``p`` maps path id to loss probability (a sequence aligned with
    ``assignment.path_ids`` also works).
    """
    if assignment.k != k:
        raise InvalidParameter(f"assignment carries {assignment.k} source packets, expected k={k}")
    if not isinstance(p, dict):
        p = dict(zip(assignment.path_ids, p))
    groups = [(s, m - s, float(p[pid]))
              for pid, m, s in zip(assignment.path_ids, assignment.counts, assignment.sources)]
    return residual_loss_groups(groups, k)


def _simulate_losses(state: PathState, trials: int, m: int, rng) -> np.ndarray:
    """(trials, m) loss indicators, each trial starting from the stationary law."""
    loss = state.spec.loss
    u = rng.random((trials, m))
    if state.spec.mode is LossMode.IID:
        return u < loss.pi_b
    _, pi_b = stationary(loss)
    bad = rng.random(trials) < pi_b
    out = np.empty((trials, m), dtype=bool)
    for j in range(m):
        bad = np.where(bad, u[:, j] >= loss.p_bg, u[:, j] < loss.p_gb)
        out[:, j] = bad
    return out


def effective_loss_mc(paths, assignment: PacketAssignment, spec: FecBlockSpec, deadline_s: float,
                      send_schedule, trials: int, seed) -> EffectiveLoss:
    """Monte-Carlo effective loss with burst losses and deadline misses.

    ``paths`` are :class:`PathState` templates (not mutated); their
    serializer backlog is honoured. ``send_schedule`` lists
    ``(index, path_id, send_time_s)`` for every packet of the block.
    """
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    by_id = {st.spec.id: st for st in paths}
    schedule = sorted(send_schedule, key=lambda e: (e[1], e[2], e[0]))
    if sorted(e[0] for e in schedule) != list(range(spec.n)):
        raise InvalidParameter("send schedule must cover every packet index exactly once")

    per_path: dict = {}
    for idx, pid, t in schedule:
        per_path.setdefault(pid, []).append((idx, t))

    seqs = np.random.SeedSequence(seed).spawn(len(per_path))
    erased = np.zeros((trials, spec.n), dtype=bool)
    for slot, pid in enumerate(sorted(per_path, key=str)):
        state = by_id[pid]
        packets = per_path[pid]
        free_at = state.queue_free_at_s
        late = []
        for idx, t in packets:
            if not state.spec.is_available(t):
                raise PathUnavailable(pid, t)
            free_at = max(t, free_at) + state.spec.serialization_s(spec.packet_bytes)
            late.append(free_at + state.spec.prop_delay_ms / 1000.0 > deadline_s)
        lost = _simulate_losses(state, trials, len(packets), np.random.default_rng(seqs[slot]))
        cols = [idx for idx, _ in packets]
        erased[:, cols] = lost | np.asarray(late)[None, :]

    received = ~erased
    total_rx = received.sum(axis=1)
    src_rx = received[:, : spec.k].sum(axis=1)
    failed = total_rx < spec.k
    per_trial = np.where(failed, (spec.k - src_rx) / spec.k, 0.0)
    se = float(per_trial.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    fse = float(failed.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return EffectiveLoss(pi_star=float(per_trial.mean()), block_failure_prob=float(failed.mean()),
                         pi_star_se=se, block_failure_se=fse)



def schedule_for(assignment: PacketAssignment, start_s: float = 0.0):
    """Send schedule matching :meth:`PacketAssignment.indices`.

    Every packet is handed to its path's queue at ``start_s``; the serializer
    sends them back-to-back in index order.
    """
    return [(idx, pid, start_s) for pid, idxs in assignment.indices().items() for idx in idxs]
