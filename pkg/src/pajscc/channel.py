"""Per-path burst-loss channel: a two-state Good/Bad Markov chain advanced once
per packet, in front of a bandwidth-limited serializer and a fixed
propagation delay.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, PathUnavailable

_TOL = 1e-12
_BUFFER = 4096


class LossMode(str, enum.Enum):
    GILBERT = "gilbert"
    IID = "iid"


class ChainState(str, enum.Enum):
    GOOD = "Good"
    BAD = "Bad"


class Fate(str, enum.Enum):
    DELIVERED = "Delivered"
    LOST = "Lost"


@dataclass(frozen=True)
class GilbertParams:
    """Burst-loss parameters.

    ``p_gb`` and ``p_bg`` are the per-packet Good->Bad and Bad->Good
    transition probabilities; ``pi_b`` and ``mean_burst_len`` are the
    calibration statistics they were derived from.
    """

    pi_b: float
    mean_burst_len: float
    p_gb: float
    p_bg: float

    def __post_init__(self):
        if not 0.0 <= self.pi_b <= 1.0:
            raise InvalidParameter(f"pi_b must lie in [0, 1], got {self.pi_b}")
        if self.mean_burst_len < 1.0:
            raise InvalidParameter(f"mean_burst_len must be >= 1, got {self.mean_burst_len}")
        if not 0.0 <= self.p_gb <= 1.0:
            raise InvalidParameter(f"p_gb must lie in [0, 1], got {self.p_gb}")
        if not 0.0 < self.p_bg <= 1.0:
            raise InvalidParameter(f"p_bg must lie in (0, 1], got {self.p_bg}")


def gilbert_from_stats(pi_b: float, mean_burst_len: float) -> GilbertParams:
    """Chain parameters that reproduce a loss rate and a mean loss-run length."""
    if not 0.0 <= pi_b < 1.0:
        raise InvalidParameter(f"pi_b must lie in [0, 1), got {pi_b}")
    if not mean_burst_len >= 1.0:
        raise InvalidParameter(f"mean_burst_len must be >= 1, got {mean_burst_len}")
    p_bg = 1.0 / mean_burst_len
    p_gb = pi_b / (mean_burst_len * (1.0 - pi_b))
    if p_gb > 1.0 + _TOL:
        raise InvalidParameter(
            f"pi_b={pi_b} with mean_burst_len={mean_burst_len} implies p_gb={p_gb:.6g} > 1"
        )
    return GilbertParams(pi_b=pi_b, mean_burst_len=mean_burst_len,
                         p_gb=min(max(p_gb, 0.0), 1.0), p_bg=min(max(p_bg, 0.0), 1.0))


def stationary(params: GilbertParams) -> tuple[float, float]:
    """Return ``(pi_g, pi_b)`` for the chain's transition probabilities."""
    total = params.p_gb + params.p_bg
    if total <= 0.0:
        raise InvalidParameter("both transition probabilities are zero")
    pi_b = params.p_gb / total
    return 1.0 - pi_b, pi_b


@dataclass(frozen=True)
class PathSpec:
    """Static description of one access network.

    An empty ``availability`` means the path is usable at all times.
    """

    id: str
    bandwidth_kbps: float
    prop_delay_ms: float
    loss: GilbertParams
    mode: LossMode = LossMode.GILBERT
    availability: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.bandwidth_kbps > 0:
            raise InvalidParameter(f"path {self.id!r}: bandwidth_kbps must be > 0")
        if not self.prop_delay_ms >= 0:
            raise InvalidParameter(f"path {self.id!r}: prop_delay_ms must be >= 0")
        object.__setattr__(self, "mode", LossMode(self.mode))
        windows = tuple((float(a), float(b)) for a, b in self.availability)
        for a, b in windows:
            if not b > a:
                raise InvalidParameter(f"path {self.id!r}: empty availability window [{a}, {b})")
        for (_, end), (start, _) in zip(windows, windows[1:]):
            if start < end:
                raise InvalidParameter(
                    f"path {self.id!r}: availability windows must be sorted and non-overlapping"
                )
        object.__setattr__(self, "availability", windows)

    def is_available(self, t: float) -> bool:
        if not self.availability:
            return True
        return any(a <= t < b for a, b in self.availability)

    def serialization_s(self, packet_bytes: int) -> float:
        return 8.0 * packet_bytes / (1000.0 * self.bandwidth_kbps)


class PathState:
    """Live state of one path: chain state, serializer queue, random stream.

    Uniform variates are drawn from ``rng`` in fixed-size blocks, so the fate
    sequence depends only on the stream and the number of calls made.
    """

    def __init__(self, spec: PathSpec, rng=None, chain_state: ChainState | None = None):
        self.spec = spec
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self._buf = np.empty(0)
        self._pos = 0
        self.queue_free_at_s = 0.0
        if chain_state is None:
            _, pi_b = stationary(spec.loss)
            chain_state = ChainState.BAD if self._uniform() < pi_b else ChainState.GOOD
        self.chain_state = ChainState(chain_state)

    def _uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self.rng.random(_BUFFER)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return float(u)

    def next_fate(self) -> Fate:
        return next_fate(self)

    def transit(self, send_time_s: float, packet_bytes: int):
        return transit(self, send_time_s, packet_bytes)


def next_fate(state: PathState) -> Fate:
    """Advance the loss process by one packet and report that packet's fate."""
    loss = state.spec.loss
    u = state._uniform()
    if state.spec.mode is LossMode.IID:
        return Fate.LOST if u < loss.pi_b else Fate.DELIVERED
    if state.chain_state is ChainState.GOOD:
        if u < loss.p_gb:
            state.chain_state = ChainState.BAD
    elif u < loss.p_bg:
        state.chain_state = ChainState.GOOD
    return Fate.LOST if state.chain_state is ChainState.BAD else Fate.DELIVERED


def transit(state: PathState, send_time_s: float, packet_bytes: int) -> tuple[float, Fate]:
    """Push one packet through the path; returns ``(arrival_time_s, fate)``.

    Lost packets still occupy the serializer.
    """
    spec = state.spec
    if packet_bytes <= 0:
        raise InvalidParameter("packet_bytes must be > 0")
    if not spec.is_available(send_time_s):
        raise PathUnavailable(spec.id, send_time_s)
    start = max(send_time_s, state.queue_free_at_s)
    end = start + spec.serialization_s(packet_bytes)
    state.queue_free_at_s = end
    arrival = end + spec.prop_delay_ms / 1000.0
    return arrival, next_fate(state)


def simulate_fates(params: GilbertParams, steps: int, rng, mode: LossMode = LossMode.GILBERT,
                   start: ChainState | None = None) -> np.ndarray:
    """Boolean loss indicators for ``steps`` consecutive packets.

    A thin convenience over :func:`next_fate` on a throwaway infinite-bandwidth
    path; used by calibration checks and examples.
    """
    spec = PathSpec(id="_", bandwidth_kbps=math.inf, prop_delay_ms=0.0, loss=params, mode=mode)
    state = PathState(spec, rng, chain_state=start)
    out = np.empty(steps, dtype=bool)
    for i in range(steps):
        out[i] = next_fate(state) is Fate.LOST
    return out


def loss_runs(lost: np.ndarray) -> np.ndarray:
    """Lengths of maximal runs of consecutive losses."""
    x = np.concatenate(([0], np.asarray(lost, dtype=np.int8), [0]))
    d = np.diff(x)
    return np.flatnonzero(d == -1) - np.flatnonzero(d == 1)

