"""Systematic Reed-Solomon erasure code over GF(256).

Parity rows come from a Cauchy matrix ``1 / (x_i + y_j)`` with source points
``y_j = j`` and parity points ``x_i = k + i``. Every square submatrix of a
Cauchy matrix is invertible, so ``[I; C]`` recovers the block from any ``k``
of its ``n`` packets.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import gf256
from .errors import CorruptIndex, InvalidSpec

MAX_N = 255


@dataclass(frozen=True)
class FecBlockSpec:
    k: int
    n: int
    packet_bytes: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise InvalidSpec(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.n > MAX_N:
            raise InvalidSpec(f"n={self.n} exceeds the GF(256) limit of {MAX_N}")
        if self.packet_bytes <= 0:
            raise InvalidSpec("packet_bytes must be > 0")

    @property
    def code_rate(self) -> float:
        return self.k / self.n

    @property
    def expansion(self) -> float:
        return self.n / self.k


@dataclass(frozen=True)
class EncodedBlock:
    spec: FecBlockSpec
    packets: list  # [(index, payload bytes)], index order


class DecodeFailure(Exception):
    """Fewer than ``k`` packets arrived; only the systematic ones are usable."""

    def __init__(self, spec: FecBlockSpec, recovered: dict):
        self.spec = spec
        self.recovered = recovered
        self.recovered_sources = frozenset(recovered)
        super().__init__(
            f"received too few packets to decode (k={spec.k}); "
            f"{len(recovered)} source packets arrived directly"
        )


@lru_cache(maxsize=256)
def _parity_matrix(k: int) -> np.ndarray:
    rows = MAX_N - k
    c = np.empty((rows, k), dtype=np.uint8)
    for i in range(rows):
        x = k + i
        for j in range(k):
            c[i, j] = gf256.inv(x ^ j)
    c.setflags(write=False)
    return c


def parity_matrix(k: int, n: int) -> np.ndarray:
    """Coefficients of the ``n - k`` parity packets over the ``k`` sources."""
    return _parity_matrix(k)[: n - k]


def _as_array(payloads, size: int) -> np.ndarray:
    out = np.empty((len(payloads), size), dtype=np.uint8)
    for row, p in enumerate(payloads):
        if len(p) != size:
            raise InvalidSpec(f"payload {row} has {len(p)} bytes, expected {size}")
        out[row] = np.frombuffer(bytes(p), dtype=np.uint8)
    return out


def encode(source, spec: FecBlockSpec) -> EncodedBlock:
    if len(source) != spec.k:
        raise InvalidSpec(f"expected {spec.k} source payloads, got {len(source)}")
    src = _as_array(source, spec.packet_bytes)
    packets = [(i, bytes(src[i])) for i in range(spec.k)]
    if spec.n > spec.k:
        parity = gf256.matmul(parity_matrix(spec.k, spec.n), src)
        packets.extend((spec.k + i, bytes(parity[i])) for i in range(spec.n - spec.k))
    return EncodedBlock(spec=spec, packets=packets)


def decode(received, spec: FecBlockSpec) -> list[bytes]:
    """Recover all ``k`` source payloads, or raise :class:`DecodeFailure`."""
    got = {}
    for idx, payload in received:
        if not 0 <= idx < spec.n:
            raise CorruptIndex(f"packet index {idx} outside 0..{spec.n - 1}")
        if idx in got:
            raise CorruptIndex(f"duplicate packet index {idx}")
        got[idx] = payload
    k = spec.k
    sources = {i: bytes(p) for i, p in got.items() if i < k}
    if len(got) < k:
        raise DecodeFailure(spec, sources)
    missing = [j for j in range(k) if j not in sources]
    if not missing:
        return [sources[j] for j in range(k)]

    parity_idx = sorted(i for i in got if i >= k)[: len(missing)]
    coeff = parity_matrix(k, spec.n)[[i - k for i in parity_idx]]
    rhs = _as_array([got[i] for i in parity_idx], spec.packet_bytes)
    known = sorted(sources)
    if known:
        rhs ^= gf256.matmul(coeff[:, known], _as_array([sources[j] for j in known],
                                                       spec.packet_bytes))
    solved = gf256.matmul(gf256.mat_inv(coeff[:, missing]), rhs)
    for row, j in enumerate(missing):
        sources[j] = bytes(solved[row])
    return [sources[j] for j in range(k)]
