"""GF(2^8) arithmetic with the 0x11D reduction polynomial.

Scalar helpers (`add`, `mul`, `inv`) for clarity, plus table-driven numpy
kernels used by the RLNC codec on whole symbols.
"""
import numpy as np

POLY = 0x11D  # x^8 + x^4 + x^3 + x^2 + 1
GENERATOR = 2


def _build_tables():
    exp = np.zeros(512, dtype=np.uint8)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= POLY
    exp[255:510] = exp[0:255]
    a = np.arange(256)
    mul = exp[(log[a][:, None] + log[a][None, :])].astype(np.uint8)
    mul[0, :] = 0
    mul[:, 0] = 0
    inv = np.zeros(256, dtype=np.uint8)
    inv[1:] = exp[255 - log[1:]]
    return exp, log, mul, inv


EXP, LOG, MUL, INV = _build_tables()


def add(a, b):
    return a ^ b


def mul(a, b):
    return int(MUL[a, b])


def inv(a):
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return int(INV[a])


def div(a, b):
    return mul(a, inv(b))


def mul_slow(a, b):
    """Carry-less shift-and-add product reduced by POLY; independent of the tables."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= POLY
    return r


def scale(c, vec):
    """Multiply a uint8 vector by the scalar c."""
    return MUL[c][vec]


def combine(coefs, rows):
    """XOR-sum of coefs[i] * rows[i]; coefs shape (m,), rows shape (m, L)."""
    if len(coefs) == 0:
        return np.zeros(rows.shape[1], dtype=np.uint8)
    return np.bitwise_xor.reduce(MUL[coefs[:, None], rows], axis=0)


def matmul(a, b):
    """GF(256) matrix product of uint8 arrays a (m, k) and b (k, L)."""
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for j in range(a.shape[1]):
        out ^= MUL[a[:, j][:, None], b[j][None, :]]
    return out


def rank(matrix):
    """Rank of a uint8 matrix over GF(256) by plain Gaussian elimination."""
    m = np.array(matrix, dtype=np.uint8, copy=True)
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i, c]), None)
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        m[r] = MUL[INV[m[r, c]]][m[r]]
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] ^= MUL[m[i, c]][m[r]]
        r += 1
        if r == rows:
            break
    return r
