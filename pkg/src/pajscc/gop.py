"""GoP timing and source packetization."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidParameter


@dataclass(frozen=True)
class GopSpec:
    frames_per_gop: int = 8
    frame_rate_fps: float = 30.0
    playout_offset_s: float = 0.4

    def __post_init__(self):
        if self.frames_per_gop < 1 or not self.frame_rate_fps > 0:
            raise InvalidParameter("frames_per_gop and frame_rate_fps must be positive")
        if not self.playout_offset_s >= 0:
            raise InvalidParameter("playout_offset_s must be >= 0")

    @property
    def duration(self) -> Fraction:
        return Fraction(self.frames_per_gop) / Fraction(self.frame_rate_fps)

    @property
    def gop_duration_s(self) -> float:
        return self.frames_per_gop / self.frame_rate_fps

    @property
    def deadline_offset_s(self) -> float:
        """Delay from GoP start until the whole block must be at the client."""
        return self.playout_offset_s + self.gop_duration_s


def packetize(v_kbps: float, gop: GopSpec, packet_bytes: int) -> int:
    """Number of source packets one GoP encoded at ``v_kbps`` fills.

    Exact rational arithmetic, so rates that fill a whole number of packets
    are not bumped up by float round-off.
    """
    if not v_kbps > 0:
        raise InvalidParameter(f"source rate must be > 0, got {v_kbps}")
    bits = Fraction(v_kbps) * 1000 * gop.duration
    return max(1, math.ceil(bits / (8 * packet_bytes)))


def wire_rate_kbps(k: int, gop: GopSpec, packet_bytes: int) -> float:
    """Rate actually emitted for ``k`` full packets per GoP (>= the source rate)."""
    return float(Fraction(8 * packet_bytes * k, 1000) / gop.duration)
