"""GoP-by-GoP end-to-end simulation of the multipath sender and client.

Sender, per GoP: apply any feedback that has arrived, choose an allocation,
packetize, RS-encode, and hand packets to each path's serializer. Client:
drop whatever misses the GoP deadline, decode, and score the GoP with the
distortion model.
"""
from __future__ import annotations

import dataclasses
import enum
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .allocator import (AllocationDecision, ChannelEstimate, PathEstimate, SearchGrid, allocate,
                        fixed_decision)
from .channel import Fate, PathSpec, PathState, loss_runs
from .distortion import DistortionParams, d_total, mse_to_psnr
from .errors import ConfigError, PathUnavailable
from .estimator import PacketAssignment
from .fec import DecodeFailure, EncodedBlock, FecBlockSpec, decode, encode
from .gop import GopSpec, packetize

_EPS = 1e-9


class Policy(str, enum.Enum):
    OPTIMIZED = "optimized"
    EQUAL_SPLIT = "equal_split"
    BEST_SINGLE_PATH = "best_single_path"
    NO_FEC = "no_fec"


class Outcome(str, enum.Enum):
    INTACT = "intact"          # every source packet on time, no decoding needed
    RECOVERED = "recovered"    # FEC filled the gaps
    FAILED = "failed"          # fewer than k packets on time
    NO_PATH = "no_path"        # nothing available to send on


@dataclass(frozen=True)
class ScenarioConfig:
    paths: tuple
    gop: GopSpec
    dist: DistortionParams
    grid: SearchGrid
    duration_s: float
    packet_bytes: int = 1000
    feedback_delay_s: float | None = None
    feedback_ewma_alpha: float = 0.2
    warm_start: bool = True
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        problems = self.problems()
        if problems:
            raise ConfigError("invalid scenario", problems)

    def problems(self) -> list[str]:
        out = []
        if not self.paths:
            out.append("paths: at least one path is required")
        ids = [p.id for p in self.paths]
        if len(set(ids)) != len(ids):
            out.append("paths: path ids must be unique")
        if len(self.paths) > 8:
            out.append("paths: at most 8 paths are supported")
        if not self.packet_bytes > 0:
            out.append("packet_bytes: must be > 0")
        if not self.duration_s > 0:
            out.append("duration_s: must be > 0")
        else:
            gops = self.duration_s / self.gop.gop_duration_s
            if abs(gops - round(gops)) > 1e-6 or round(gops) < 1:
                out.append(f"duration_s: {self.duration_s} s is not a whole number of "
                           f"GoPs of {self.gop.gop_duration_s:.6g} s")
        if self.feedback_delay_s is not None and not self.feedback_delay_s >= 0:
            out.append("feedback_delay_s: must be >= 0")
        if not 0.0 < self.feedback_ewma_alpha <= 1.0:
            out.append("feedback_ewma_alpha: must lie in (0, 1]")
        if self.grid.v_candidates[0] <= self.dist.v0:
            out.append(f"grid.v_candidates: every rate must exceed distortion.v0={self.dist.v0}")
        return out

    @property
    def num_gops(self) -> int:
        return round(self.duration_s / self.gop.gop_duration_s)

    @property
    def feedback_delay(self) -> float:
        return self.gop.gop_duration_s if self.feedback_delay_s is None else self.feedback_delay_s


@dataclass(frozen=True)
class GopRecord:
    gop_index: int
    time_s: float
    paths: tuple
    v_kbps: float
    k: int
    n: int
    predicted_pi_star: float
    realized_loss: float
    mse: float
    psnr_db: float
    outcome: Outcome
    feasible: bool = True
    sent: dict = field(default_factory=dict)


@dataclass
class SimReport:
    policy: Policy
    rows: list
    path_bandwidth_kbps: dict
    gop_duration_s: float
    headroom: float

    @property
    def mean_psnr(self) -> float:
        return statistics.fmean(r.psnr_db for r in self.rows)

    @property
    def stddev_psnr(self) -> float:
        return statistics.pstdev(r.psnr_db for r in self.rows)

    @property
    def mean_realized_loss(self) -> float:
        return statistics.fmean(r.realized_loss for r in self.rows)

    @property
    def mean_predicted_pi_star(self) -> float:
        return statistics.fmean(r.predicted_pi_star for r in self.rows)

    def gop_utilization(self, row: GopRecord, packet_bytes: int) -> dict:
        """Fraction of each path's bandwidth the GoP's packets occupy."""
        return {pid: row.sent.get(pid, 0) * 8.0 * packet_bytes
                / (1000.0 * bw * self.gop_duration_s)
                for pid, bw in self.path_bandwidth_kbps.items()}

    def utilization(self, packet_bytes: int) -> dict:
        total = self.gop_duration_s * len(self.rows)
        return {pid: sum(r.sent.get(pid, 0) for r in self.rows) * 8.0 * packet_bytes
                / (1000.0 * bw * total)
                for pid, bw in self.path_bandwidth_kbps.items()}

    def summary(self, packet_bytes: int) -> dict:
        return {
            "gops": len(self.rows),
            "mean_psnr_db": self.mean_psnr,
            "stddev_psnr_db": self.stddev_psnr,
            "mean_realized_loss": self.mean_realized_loss,
            "mean_predicted_pi_star": self.mean_predicted_pi_star,
            "utilization": self.utilization(packet_bytes),
        }

    def check(self, dist: DistortionParams, packet_bytes: int) -> list[str]:
        """Internal-consistency violations; an empty list means the run is sound."""
        problems = []
        for row in self.rows:
            if not 0.0 <= row.realized_loss <= 1.0:
                problems.append(f"GoP {row.gop_index}: realized loss {row.realized_loss} outside [0, 1]")
            expected = mse_to_psnr(d_total(dist, row.v_kbps, row.realized_loss))
            if row.psnr_db != expected:
                problems.append(f"GoP {row.gop_index}: psnr {row.psnr_db} != model value {expected}")
            if row.feasible and self.policy is not Policy.EQUAL_SPLIT:
                for pid, u in self.gop_utilization(row, packet_bytes).items():
                    if u > self.headroom + _EPS:
                        problems.append(f"GoP {row.gop_index}: path {pid} utilization {u:.4f} "
                                        f"exceeds headroom {self.headroom}")
        if [r.gop_index for r in self.rows] != list(range(len(self.rows))):
            problems.append("rows are not ordered by gop_index")
        return problems


def distribute(block: EncodedBlock, decision: AllocationDecision, gop_start_s: float,
               paths: dict | None = None) -> list:
    """Send schedule ``[(index, path_id, send_time_s)]`` for one coded block.

    Per-path counts follow the decision's weights by largest remainder; each
    path gets its packets at ``gop_start_s`` and serializes them back-to-back
    in ascending index order. ``paths`` (id -> PathSpec), when given, is used
    to reject paths that are down at ``gop_start_s``.
    """
    assignment = PacketAssignment.from_weights(block.spec.n, block.spec.k, decision.weights)
    schedule = []
    for pid, idxs in assignment.indices().items():
        if paths is not None and idxs and not paths[pid].is_available(gop_start_s):
            raise PathUnavailable(pid, gop_start_s)
        schedule.extend((idx, pid, gop_start_s) for idx in idxs)
    return schedule


def client_receive(arrivals, spec: FecBlockSpec, gop: GopSpec, gop_start_s: float,
                   block: EncodedBlock | None = None) -> tuple[Outcome, float]:
    """Deadline filter plus FEC decode for one GoP.

    ``arrivals`` are ``(index, arrival_time_s)`` for delivered packets only.
    Payloads come from ``block`` when given (and the decoded sources are
    checked against it); otherwise zero payloads stand in, which is enough to
    exercise erasure recovery. Returns the outcome and the fraction of source
    packets left unrecovered.
    """
    deadline = gop_start_s + gop.deadline_offset_s
    on_time = sorted(idx for idx, t in arrivals if t <= deadline + _EPS)
    if block is not None:
        payloads = dict(block.packets)
    else:
        payloads = dict.fromkeys(range(spec.n), bytes(spec.packet_bytes))
    got_sources = sum(1 for i in on_time if i < spec.k)
    if got_sources == spec.k:
        return Outcome.INTACT, 0.0
    try:
        recovered = decode([(i, payloads[i]) for i in on_time], spec)
    except DecodeFailure as exc:
        return Outcome.FAILED, (spec.k - len(exc.recovered_sources)) / spec.k
    if block is not None and recovered != [payloads[i] for i in range(spec.k)]:
        raise AssertionError("FEC decode returned corrupted source packets")
    return Outcome.RECOVERED, 0.0


@dataclass
class PathObservation:
    """Receiver-side measurements of one path over one GoP."""

    sent: int = 0
    lost: int = 0
    delay_s: float = math.inf
    bandwidth_kbps: float | None = None
    runs: list = field(default_factory=list)

    @property
    def loss_fraction(self) -> float:
        return self.lost / self.sent if self.sent else math.nan


def feedback_update(est: ChannelEstimate, observation: dict, ewma_alpha: float,
                    staleness_s: float = 0.0) -> ChannelEstimate:
    """EWMA-blend per-path observations into the estimate.

    Fields a path did not observe this round (nothing sent, nothing delivered,
    no losses) keep their previous value.
    """
    if not 0.0 < ewma_alpha <= 1.0:
        raise ValueError("ewma_alpha must lie in (0, 1]")
    a = ewma_alpha

    def blend(old, new):
        return (1.0 - a) * old + a * new

    paths = dict(est.paths)
    for pid, obs in observation.items():
        old = paths[pid]
        loss, delay, bw, burst = old.loss, old.delay_ms, old.bandwidth_kbps, old.burst_len
        if obs.sent:
            loss = min(max(blend(old.loss, obs.loss_fraction), 0.0), 1.0)
        if math.isfinite(obs.delay_s):
            delay = blend(old.delay_ms, obs.delay_s * 1000.0)
        if obs.bandwidth_kbps is not None:
            bw = blend(old.bandwidth_kbps, obs.bandwidth_kbps)
        if obs.runs:
            burst = blend(old.burst_len, statistics.fmean(obs.runs))
        paths[pid] = PathEstimate(bandwidth_kbps=bw, delay_ms=delay, loss=loss, burst_len=burst)
    return ChannelEstimate(paths=paths, staleness_s=staleness_s)


def _truth(spec: PathSpec) -> PathEstimate:
    return PathEstimate(bandwidth_kbps=spec.bandwidth_kbps, delay_ms=spec.prop_delay_ms,
                        loss=spec.loss.pi_b, burst_len=spec.loss.mean_burst_len)


def _decide(policy: Policy, est: ChannelEstimate, available: list, config: ScenarioConfig):
    gop, grid, dist, S = config.gop, config.grid, config.dist, config.packet_bytes
    deadline = gop.deadline_offset_s
    if policy is Policy.OPTIMIZED:
        return allocate(est, available, grid, gop, dist, deadline, S)
    if policy is Policy.NO_FEC:
        return allocate(est, available, grid, gop, dist, deadline, S, fec=False)
    if policy is Policy.BEST_SINGLE_PATH:
        top = min(available, key=lambda pid: (-est[pid].bandwidth_kbps, pid))
        return allocate(est, [top], grid, gop, dist, deadline, S)
    # equal split: every available path, equal weights, mid-grid rate, n/k = 1.5
    rates = [v for v in grid.v_candidates if v > dist.v0]
    v = rates[len(rates) // 2]
    k = packetize(v, gop, S)
    ids = tuple(sorted(available))
    return fixed_decision(ids, dict.fromkeys(ids, 1.0), v, math.ceil(1.5 * k), est, gop, dist,
                          deadline, S, grid.headroom)


def run_scenario(config: ScenarioConfig, policy: Policy | str = Policy.OPTIMIZED) -> SimReport:
    """Simulate every GoP of the scenario under ``policy``; deterministic in ``config.seed``."""
    policy = Policy(policy)
    gop, S, dist = config.gop, config.packet_bytes, config.dist
    T = gop.duration
    specs = {p.id: p for p in config.paths}
    streams = np.random.SeedSequence(config.seed).spawn(len(config.paths) + 1)
    states = {p.id: PathState(p, np.random.default_rng(ss))
              for p, ss in zip(config.paths, streams)}
    payload_rng = np.random.default_rng(streams[-1])

    if config.warm_start:
        est = ChannelEstimate({pid: _truth(p) for pid, p in specs.items()})
    else:
        est = ChannelEstimate({pid: PathEstimate(p.bandwidth_kbps, p.prop_delay_ms, 0.0, 1.0)
                               for pid, p in specs.items()})
    pending = []  # (ready_time_s, observed_at_s, {pid: PathObservation})
    last_obs_at = 0.0
    rows = []

    for g in range(config.num_gops):
        t0 = float(g * T)
        while pending and pending[0][0] <= t0 + _EPS:
            _, observed_at, obs = pending.pop(0)
            est = feedback_update(est, obs, config.feedback_ewma_alpha)
            last_obs_at = observed_at
        est = dataclasses.replace(est, staleness_s=t0 - last_obs_at)

        available = [pid for pid, p in specs.items() if p.is_available(t0)]
        if not available:
            v = config.grid.v_candidates[0]
            k = packetize(v, gop, S)
            mse = d_total(dist, v, 1.0)
            rows.append(GopRecord(g, t0, (), v, k, k, 1.0, 1.0, mse, mse_to_psnr(mse),
                                  Outcome.NO_PATH, feasible=False))
            continue

        decision = _decide(policy, est, available, config)
        spec = FecBlockSpec(decision.fec_k, decision.fec_n, S)
        source = [payload_rng.bytes(S) for _ in range(spec.k)]
        block = encode(source, spec)
        schedule = distribute(block, decision, t0, specs)

        obs = {pid: PathObservation(bandwidth_kbps=specs[pid].bandwidth_kbps) for pid in available}
        arrivals = []
        fates = {pid: [] for pid in available}
        for idx, pid, ts in schedule:
            state = states[pid]
            arrival, fate = state.transit(ts, S)
            o = obs[pid]
            o.sent += 1
            fates[pid].append(fate is Fate.LOST)
            if fate is Fate.LOST:
                o.lost += 1
            else:
                arrivals.append((idx, arrival))
                # one-way delay net of the packet's own serialization and queueing
                o.delay_s = min(o.delay_s, arrival - state.queue_free_at_s)
        for pid, lost in fates.items():
            obs[pid].runs = [int(r) for r in loss_runs(np.array(lost, dtype=bool))]

        outcome, realized = client_receive(arrivals, spec, gop, t0, block)
        mse = d_total(dist, decision.source_rate_kbps, realized)
        sent = {pid: obs[pid].sent for pid in available if obs[pid].sent}
        rows.append(GopRecord(g, t0, tuple(pid for pid in decision.selected if pid in sent),
                              decision.source_rate_kbps, spec.k, spec.n,
                              decision.predicted_pi_star, realized, mse, mse_to_psnr(mse),
                              outcome, decision.feasible, sent))
        pending.append((float((g + 1) * T) + config.feedback_delay, t0, obs))

    return SimReport(policy=policy, rows=rows,
                     path_bandwidth_kbps={pid: p.bandwidth_kbps for pid, p in specs.items()},
                     gop_duration_s=float(Fraction(T)), headroom=config.grid.headroom)
