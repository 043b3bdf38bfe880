"""Polar code construction, CRC handling, and polar-transform encoding.

A code instance bundles the block length, the frozen set, and the CRC
generator. Information bits (payload followed by CRC bits) occupy the
most reliable positions; everything else is frozen to zero. All bit
indices are 0-based internally; reliability files on disk are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

# Generator polynomials by CRC width, leading x^C term included.
# The 11/16/24-bit entries are the 3GPP gCRC11, gCRC16 and gCRC24C
# generators; the 8-bit entry is the CCITT ATM-HEC polynomial.
CRC_POLYNOMIALS = {
    8: (1 << 8) | 0x07,
    11: (1 << 11) | 0x621,
    16: (1 << 16) | 0x1021,
    24: (1 << 24) | 0xB2B117,
}

_NR_SEQUENCE_FILE = "nr_sequence_1024.txt"
_nr_cache: np.ndarray | None = None


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def polar_transform(bits: np.ndarray) -> np.ndarray:
    """Multiply bit rows by the n-fold Kronecker power of [[1,0],[1,1]].

    Operates on the last axis, which must have power-of-two length. The
    transform is its own inverse over GF(2).
    """
    x = np.array(bits, dtype=np.int8, copy=True)
    n = x.shape[-1]
    if not _is_pow2(n):
        raise ValueError(f"length must be a power of two, got {n}")
    lead = x.shape[:-1]
    h = n // 2
    while h >= 1:
        x = x.reshape(lead + (-1, 2, h))
        x[..., 0, :] ^= x[..., 1, :]
        x = x.reshape(lead + (n,))
        h //= 2
    return x


def _crc_remainders(poly: int, width: int, count: int) -> np.ndarray:
    """Remainders of x^t mod the generator for t = 0..count-1.

    Row t holds the coefficients of x^(width-1) .. x^0.
    """
    low = poly & ((1 << width) - 1)
    low_bits = np.array([(low >> (width - 1 - i)) & 1 for i in range(width)],
                        dtype=np.int8)
    rem = np.zeros((count, width), dtype=np.int8)
    cur = np.zeros(width, dtype=np.int8)
    cur[-1] = 1
    for t in range(count):
        rem[t] = cur
        carry = cur[0]
        cur = np.roll(cur, -1)
        cur[-1] = 0
        if carry:
            cur ^= low_bits
    return rem


class PolarCode:
    """Immutable description of a CRC-aided polar code.

    Attributes:
        N, K, C: block length, payload bits, CRC bits.
        frozen_mask: length-N bool array, True where the bit is frozen.
        info_positions: sorted indices of the K + C information bits.
        crc_poly: full generator polynomial as an int (0 disables the CRC).
    """

    def __init__(self, N: int, K: int, C: int, frozen_mask: np.ndarray,
                 crc_poly: int):
        if not _is_pow2(N):
            raise ValueError(f"N must be a power of two, got {N}")
        if K < 1 or C < 0 or K + C > N:
            raise ValueError(f"invalid sizes N={N} K={K} C={C}")
        frozen_mask = np.asarray(frozen_mask, dtype=bool)
        if frozen_mask.shape != (N,):
            raise ValueError("frozen_mask must have shape (N,)")
        if int((~frozen_mask).sum()) != K + C:
            raise ValueError("frozen_mask must leave exactly K+C open positions")
        if C > 0 and crc_poly.bit_length() != C + 1:
            raise ValueError(f"CRC polynomial degree must equal C={C}")
        self.N = N
        self.K = K
        self.C = C
        self.frozen_mask = frozen_mask
        self.frozen_mask.setflags(write=False)
        self.info_positions = np.flatnonzero(~frozen_mask)
        self.info_positions.setflags(write=False)
        self.crc_poly = crc_poly if C > 0 else 0
        if C > 0:
            rem = _crc_remainders(self.crc_poly, C, K + C)
            # Row i of the attach matrix is the remainder of x^(C+K-1-i);
            # row j of the check matrix the remainder of x^(K+C-1-j).
            self._attach_matrix = rem[C + K - 1 - np.arange(K)]
            self._check_matrix = rem[K + C - 1 - np.arange(K + C)]
        else:
            self._attach_matrix = np.zeros((K, 0), dtype=np.int8)
            self._check_matrix = np.zeros((K, K), dtype=np.int8)

    @property
    def rate(self) -> float:
        """Payload rate K/N; CRC bits count as overhead."""
        return self.K / self.N

    def __repr__(self) -> str:
        return f"PolarCode(N={self.N}, K={self.K}, C={self.C})"


def nr_reliability(N: int) -> np.ndarray:
    """Reliability order for N <= 1024 from the bundled universal sequence.

    Returns 0-based indices in increasing reliability order. Larger block
    lengths need an explicit sequence file or a Gaussian-approximation
    construction.
    """
    global _nr_cache
    if _nr_cache is None:
        text = resources.files("polarflip.data").joinpath(
            _NR_SEQUENCE_FILE).read_text()
        _nr_cache = np.array([int(s) - 1 for s in text.split()], dtype=np.int64)
    if not _is_pow2(N) or N > _nr_cache.size:
        raise ValueError(f"no bundled sequence for N={N}")
    seq = _nr_cache[_nr_cache < N]
    return seq.copy()


def load_reliability(path) -> np.ndarray:
    """Read a reliability file: one 1-based index per line, least reliable
    first. Returns the 0-based order after validating it is a permutation."""
    with open(path) as f:
        vals = [int(s) for s in f.read().split()]
    n = len(vals)
    if not _is_pow2(n):
        raise ValueError(f"sequence length {n} is not a power of two")
    order = np.array(vals, dtype=np.int64) - 1
    if sorted(order.tolist()) != list(range(n)):
        raise ValueError("sequence is not a permutation of 1..N")
    return order


def _phi(x: float) -> float:
    # Mean-LLR proxy used by the Gaussian approximation.
    if x < 1e-12:
        return 1.0
    if x < 10.0:
        return math.exp(0.0218 - 0.4527 * x ** 0.86)
    return math.sqrt(math.pi / x) * math.exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * x))

def _phi_inv(y: float) -> float:
    lo, hi = 1e-12, 1.0
    while _phi(hi) > y:
        lo, hi = hi, hi * 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _phi(mid) > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ga_reliability(N: int, sigma: float) -> np.ndarray:
    """Gaussian-approximation construction at noise level sigma.

    Returns 0-based indices in increasing reliability order (reliability
    measured by the mean of the synthesized-channel LLR). Ties resolve
    toward the lower index.
    """
    if not _is_pow2(N):
        raise ValueError(f"N must be a power of two, got {N}")
    means = np.array([2.0 / (sigma * sigma)], dtype=np.float64)
    while means.size < N:
        upper = np.array([_phi_inv(1.0 - (1.0 - _phi(m)) ** 2) for m in means])
        lower = 2.0 * means
        # Child 2i tracks the degraded (f-type) channel, child 2i+1 the
        # upgraded one, matching the decode order of the transform.
        out = np.empty(means.size * 2, dtype=np.float64)
        out[0::2] = upper
        out[1::2] = lower
        means = out
    return np.argsort(means, kind="stable")


def build_code(N: int, K: int, C: int, reliability=None,
               crc_poly: int | None = None) -> PolarCode:
    """Construct a code from a reliability order.

    The K + C most reliable positions carry information bits. `reliability`
    is a 0-based order (least reliable first); None selects the bundled
    universal sequence. `crc_poly` defaults to the registry entry for C.
    """
    if reliability is None:
        order = nr_reliability(N)
    else:
        order = np.asarray(reliability, dtype=np.int64)
        if order.shape != (N,) or sorted(order.tolist()) != list(range(N)):
            raise ValueError("reliability must be a permutation of 0..N-1")
    if C > 0 and crc_poly is None:
        if C not in CRC_POLYNOMIALS:
            raise ValueError(f"no registered CRC polynomial of width {C}")
        crc_poly = CRC_POLYNOMIALS[C]
    frozen = np.ones(N, dtype=bool)
    frozen[order[N - (K + C):]] = False
    return PolarCode(N, K, C, frozen, crc_poly or 0)


def code_from_frozen(N: int, K: int, C: int, frozen_positions,
                     crc_poly: int | None = None) -> PolarCode:
    """Construct a code from an explicit frozen set (0-based indices)."""
    frozen = np.zeros(N, dtype=bool)
    frozen[np.asarray(frozen_positions, dtype=np.int64)] = True
    if C > 0 and crc_poly is None:
        crc_poly = CRC_POLYNOMIALS[C]
    return PolarCode(N, K, C, frozen, crc_poly or 0)


def crc_attach(code: PolarCode, message: np.ndarray) -> np.ndarray:
    """Append the CRC remainder to message rows of length K."""
    message = np.asarray(message, dtype=np.int8)
    if message.shape[-1] != code.K:
        raise ValueError(f"message length must be K={code.K}")
    if code.C == 0:
        return message.copy()
    crc = (message @ code._attach_matrix) % 2
    return np.concatenate([message, crc.astype(np.int8)], axis=-1)


def crc_check(code: PolarCode, bits: np.ndarray) -> np.ndarray:
    """True where rows of K+C bits have zero CRC syndrome."""
    bits = np.asarray(bits, dtype=np.int8)
    if bits.shape[-1] != code.K + code.C:
        raise ValueError(f"input length must be K+C={code.K + code.C}")
    if code.C == 0:
        return np.ones(bits.shape[:-1], dtype=bool)
    syndrome = (bits @ code._check_matrix) % 2
    return ~syndrome.any(axis=-1)


def assemble_u(code: PolarCode, message: np.ndarray) -> np.ndarray:
    """Place CRC-extended message rows into the information positions."""
    message = np.asarray(message, dtype=np.int8)
    info = crc_attach(code, message)
    u = np.zeros(message.shape[:-1] + (code.N,), dtype=np.int8)
    u[..., code.info_positions] = info
    return u


def encode(code: PolarCode, u: np.ndarray) -> np.ndarray:
    """Polar-transform full input rows u (frozen positions must be 0)."""
    u = np.asarray(u, dtype=np.int8)
    if u.shape[-1] != code.N:
        raise ValueError(f"u length must be N={code.N}")
    if u[..., code.frozen_mask].any():
        raise ValueError("frozen positions of u must be zero")
    return polar_transform(u)


def encode_message(code: PolarCode, message: np.ndarray) -> np.ndarray:
    """Attach the CRC, embed, and transform in one step."""
    return polar_transform(assemble_u(code, message))
