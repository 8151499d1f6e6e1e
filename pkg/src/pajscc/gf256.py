"""GF(2^8) arithmetic with the 0x11d field polynomial and generator 2.

Scalars are Python ints; vectors are ``uint8`` numpy arrays, multiplied via a
full 256x256 product table so a whole payload column is one fancy-index.
"""
import numpy as np

POLY = 0x11D

EXP = np.zeros(512, dtype=np.int32)
LOG = np.zeros(256, dtype=np.int32)

_x = 1
for _i in range(255):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= POLY
EXP[255:510] = EXP[0:255]
del _x, _i


def _build_mul_table():
    a = np.arange(256)
    la = LOG[a]
    table = EXP[(la[:, None] + la[None, :]) % 255].astype(np.uint8)
    table[0, :] = 0
    table[:, 0] = 0
    return table


MUL = _build_mul_table()


def mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(EXP[LOG[a] + LOG[b]])


def inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return int(EXP[255 - LOG[a]])


def div(a: int, b: int) -> int:
    return mul(a, inv(b))


def scale(c: int, v: np.ndarray) -> np.ndarray:
    return MUL[c][v]


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of ``a`` (r x m) and ``b`` (m x c) over GF(256)."""
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for j in range(a.shape[1]):
        # row-scale b[j] by every coefficient in column j of a at once
        out ^= MUL[a[:, j][:, None], b[j][None, :]]
    return out


def mat_inv(m: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse of a square GF(256) matrix."""
    n = m.shape[0]
    aug = np.concatenate([np.asarray(m, dtype=np.uint8), np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        nz = np.flatnonzero(aug[col:, col])
        if nz.size == 0:
            raise np.linalg.LinAlgError("matrix is singular over GF(256)")
        piv = col + int(nz[0])
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = MUL[inv(int(aug[col, col]))][aug[col]]
        factors = aug[:, col].copy()
        factors[col] = 0
        aug ^= MUL[factors[:, None], aug[col][None, :]]
    return aug[:, n:]
