"""Per-GoP path selection and flow-rate allocation.

Exhaustive search over path subsets, source rates and FEC block lengths,
scoring each feasible tuple with the distortion model fed by the analytic
effective-loss estimate.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field

from .distortion import DistortionParams, d_src, d_total
from .errors import Infeasible, InvalidParameter, NoPaths
from .estimator import EffectiveLoss, PacketAssignment, residual_loss_groups
from .gop import GopSpec, packetize

MAX_CANDIDATES = 8


@dataclass(frozen=True)
class PathEstimate:
    bandwidth_kbps: float
    delay_ms: float
    loss: float
    burst_len: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.loss <= 1.0:
            raise InvalidParameter(f"estimated loss must lie in [0, 1], got {self.loss}")
        if not self.bandwidth_kbps >= 0:
            raise InvalidParameter("estimated bandwidth must be >= 0")


@dataclass(frozen=True)
class ChannelEstimate:
    """Sender-side view of every path, ``staleness_s`` old."""

    paths: dict
    staleness_s: float = 0.0

    def __getitem__(self, path_id) -> PathEstimate:
        return self.paths[path_id]


@dataclass(frozen=True)
class SearchGrid:
    v_candidates: tuple
    n_max: int = 255
    headroom: float = 0.95
    max_expansion: float = 4.0

    def __post_init__(self):
        v = tuple(float(x) for x in self.v_candidates)
        if not v:
            raise InvalidParameter("grid needs at least one source rate")
        if list(v) != sorted(v) or len(set(v)) != len(v):
            raise InvalidParameter("v_candidates must be strictly ascending")
        if not 1 <= self.n_max <= 255:
            raise InvalidParameter("n_max must lie in 1..255")
        if not 0.0 < self.headroom <= 1.0:
            raise InvalidParameter("headroom must lie in (0, 1]")
        if not self.max_expansion >= 1.0:
            raise InvalidParameter("max_expansion must be >= 1")
        object.__setattr__(self, "v_candidates", v)

    @classmethod
    def default(cls, total_bandwidth_kbps: float, v_min=100.0, v_step=50.0, **kw) -> SearchGrid:
        count = int(math.floor((total_bandwidth_kbps - v_min) / v_step + 1e-9)) + 1
        return cls(v_candidates=tuple(v_min + i * v_step for i in range(max(count, 1))), **kw)

    def n_upper(self, k: int) -> int:
        return min(self.n_max, int(math.floor(self.max_expansion * k)), 255)


@dataclass(frozen=True)
class AllocationDecision:
    selected: tuple
    weights: dict
    source_rate_kbps: float
    fec_k: int
    fec_n: int
    predicted_pi_star: float
    predicted_mse: float
    feasible: bool = True
    counts: tuple = field(default=())

    def assignment(self) -> PacketAssignment:
        return PacketAssignment.from_weights(self.fec_n, self.fec_k, self.weights)


def check_constraints(v_kbps, n, k, weights, estimates, headroom=0.95) -> bool:
    """Per-path and aggregate bandwidth constraints, non-strict, with headroom."""
    load = v_kbps * n / k
    wsum = sum(weights.values())
    if wsum <= 0:
        return False
    cap_total = 0.0
    for pid, w in weights.items():
        cap = estimates[pid].bandwidth_kbps
        cap_total += cap
        if load * w / wsum > headroom * cap:
            return False
    return load <= headroom * cap_total


def _ontime_count(est: PathEstimate, m: int, packet_bytes: int, deadline_s: float) -> int:
    """How many of ``m`` back-to-back packets land by ``deadline_s`` (GoP-relative)."""
    if est.bandwidth_kbps <= 0:
        return 0
    ser = 8.0 * packet_bytes / (1000.0 * est.bandwidth_kbps)
    slack = deadline_s - est.delay_ms / 1000.0
    if slack < ser:
        return 0
    return min(m, int(math.floor(slack / ser + 1e-9)))


def predict_loss(assignment: PacketAssignment, estimates, packet_bytes: int,
                 deadline_s: float) -> EffectiveLoss:
    """Analytic effective loss with deterministic deadline misses.

    Each path's packets go out back-to-back at its estimated bandwidth,
    sources first; the ones modeled to arrive after ``deadline_s`` are erased
    with certainty, the rest with the path's estimated loss rate.
    """
    groups = []
    for pid, m, s in zip(assignment.path_ids, assignment.counts, assignment.sources):
        est = estimates[pid]
        on_time = _ontime_count(est, m, packet_bytes, deadline_s)
        s_ok = min(s, on_time)
        q_ok = min(m - s, on_time - s_ok)
        groups.append((s_ok, q_ok, est.loss))
        if m - s_ok - q_ok:
            groups.append((s - s_ok, m - s - q_ok, 1.0))
    return residual_loss_groups(groups, assignment.k)


def _bandwidth_weights(subset, estimates) -> dict:
    return {pid: estimates[pid].bandwidth_kbps for pid in subset}


def _feasible(v_kbps, k, n, weights, estimates, gop, packet_bytes, headroom) -> bool:
    # Load is checked at the packetized rate (ceil(k) full packets) and on the
    # integer per-path counts, so what is actually sent stays under headroom.
    wire = 8.0 * packet_bytes * k / (1000.0 * gop.gop_duration_s)
    if wire < v_kbps:
        wire = v_kbps
    if not check_constraints(wire, n, k, weights, estimates, headroom):
        return False
    counts = PacketAssignment.from_weights(n, k, weights).counts
    per_packet = 8.0 * packet_bytes / (1000.0 * gop.gop_duration_s)
    return all(c * per_packet <= headroom * estimates[pid].bandwidth_kbps
               for pid, c in zip(weights, counts))


def evaluate(subset, v_kbps, n, estimates, gop: GopSpec, dist: DistortionParams, deadline_s,
             packet_bytes=1000, headroom=0.95) -> float:
    """Predicted MSE of sending this GoP at ``v_kbps`` with ``n``-packet blocks over ``subset``."""
    subset = tuple(sorted(subset))
    k = packetize(v_kbps, gop, packet_bytes)
    weights = _bandwidth_weights(subset, estimates)
    if not (k <= n <= 255) or not _feasible(v_kbps, k, n, weights, estimates, gop,
                                            packet_bytes, headroom):
        raise Infeasible(f"V={v_kbps} n={n} violates the bandwidth constraints on {subset}")
    loss = predict_loss(PacketAssignment.from_weights(n, k, weights), estimates, packet_bytes,
                        deadline_s)
    return d_total(dist, v_kbps, loss.pi_star)


def fixed_decision(selected, weights, v_kbps, n, estimates, gop, dist, deadline_s,
                   packet_bytes=1000, headroom=0.95) -> AllocationDecision:
    """Score a caller-chosen allocation without searching (used by baselines)."""
    k = packetize(v_kbps, gop, packet_bytes)
    n = max(k, min(n, 255))
    assignment = PacketAssignment.from_weights(n, k, weights)
    loss = predict_loss(assignment, estimates, packet_bytes, deadline_s)
    ok = _feasible(v_kbps, k, n, weights, estimates, gop, packet_bytes, headroom)
    return AllocationDecision(selected=tuple(selected), weights=dict(weights),
                              source_rate_kbps=v_kbps, fec_k=k, fec_n=n,
                              predicted_pi_star=loss.pi_star,
                              predicted_mse=d_total(dist, v_kbps, loss.pi_star),
                              feasible=ok, counts=assignment.counts)


def allocate(estimates, candidates, grid: SearchGrid, gop: GopSpec, dist: DistortionParams,
             deadline_s, packet_bytes=1000, fec=True) -> AllocationDecision:
    """Minimum predicted MSE over every (subset, V, n) the constraints allow.

    Ties go to smaller ``n``, then larger ``V``, then fewer paths, then the
    lexicographically smaller id tuple. With ``fec=False`` only ``n == k`` is
    considered. If nothing is feasible, returns the lowest rate without FEC on
    the highest-bandwidth path, flagged ``feasible=False``.
    """
    candidates = sorted(dict.fromkeys(candidates))
    if not candidates:
        raise NoPaths("no candidate paths")
    if len(candidates) > MAX_CANDIDATES:
        raise InvalidParameter(f"at most {MAX_CANDIDATES} candidate paths, got {len(candidates)}")
    usable = [pid for pid in candidates if estimates[pid].bandwidth_kbps > 0]
    subsets = [s for size in range(1, len(usable) + 1) for s in itertools.combinations(usable, size)]
    rates = [v for v in grid.v_candidates if v > dist.v0]

    best = None
    best_key = None
    for v in sorted(rates, reverse=True):
        floor_mse = d_src(dist, v)
        if best is not None and floor_mse > best.predicted_mse:
            break  # d_src only grows as V drops
        k = packetize(v, gop, packet_bytes)
        n_hi = grid.n_upper(k) if fec else k
        for subset in subsets:
            weights = _bandwidth_weights(subset, estimates)
            for n in range(k, max(n_hi, k) + 1):
                if not _feasible(v, k, n, weights, estimates, gop, packet_bytes, grid.headroom):
                    if n * 8.0 * packet_bytes / (1000.0 * gop.gop_duration_s) > \
                            grid.headroom * sum(weights.values()):
                        break  # aggregate bound only tightens with n
                    continue
                assignment = PacketAssignment.from_weights(n, k, weights)
                loss = predict_loss(assignment, estimates, packet_bytes, deadline_s)
                mse = d_total(dist, v, loss.pi_star)
                key = (mse, n, -v, len(subset), subset)
                if best_key is None or key < best_key:
                    best_key = key
                    best = AllocationDecision(selected=subset, weights=weights,
                                              source_rate_kbps=v, fec_k=k, fec_n=n,
                                              predicted_pi_star=loss.pi_star,
                                              predicted_mse=mse, counts=assignment.counts)
                if dist.beta * loss.pi_star == 0.0:
                    break  # larger n cannot lower the MSE and loses the tie-break

    if best is not None:
        return best
    pool = usable or candidates
    top = min(pool, key=lambda pid: (-estimates[pid].bandwidth_kbps, pid))
    v = rates[0] if rates else grid.v_candidates[-1]
    weights = {top: estimates[top].bandwidth_kbps or 1.0}
    k = packetize(v, gop, packet_bytes)
    degraded = fixed_decision((top,), weights, v, k, estimates, gop, dist, deadline_s,
                              packet_bytes, grid.headroom)
    return dataclasses.replace(degraded, feasible=False)
