"""Independent reference implementations used as test oracles.

Everything here is deliberately written straight off the textbook
definitions (scalar recursion, explicit path copies, long division)
so it shares no code with the package under test.
"""

import math

import numpy as np


# -- reference polar list decoder -------------------------------------------


def _ref_transform(bits):
    """u -> u G over GF(2), recursive definition."""
    bits = list(bits)
    n = len(bits)
    if n == 1:
        return bits
    h = n // 2
    left = _ref_transform([bits[i] ^ bits[i + h] for i in range(h)])
    right = _ref_transform(bits[h:])
    return left + right


def _ref_f(a, b):
    s = (-1.0 if a < 0 else 1.0) * (-1.0 if b < 0 else 1.0)
    return s * min(abs(a), abs(b))


def _ref_g(a, b, c):
    return b + (1 - 2 * c) * a


def _ref_bit_llr(alpha, udec):
    """Decision LLR of bit len(udec) of the span covered by alpha."""
    n = len(alpha)
    if n == 1:
        return alpha[0]
    h = n // 2
    i = len(udec)
    if i < h:
        al = [_ref_f(alpha[j], alpha[j + h]) for j in range(h)]
        return _ref_bit_llr(al, udec)
    beta_l = _ref_transform(udec[:h])
    ar = [_ref_g(alpha[j], alpha[j + h], beta_l[j]) for j in range(h)]
    return _ref_bit_llr(ar, udec[h:])


def _ref_penalty(lam, bit):
    opposes = (bit == 1 and lam >= 0) or (bit == 0 and lam < 0)
    return abs(lam) if opposes else 0.0


def ref_list_decode(frozen_mask, llr, L):
    """Bit-by-bit list decoding of one frame with explicit path copies.

    Returns the surviving paths as a list of (metric, u bits) sorted by
    metric (stable).
    """
    llr = [float(v) for v in llr]
    paths = [(0.0, [])]
    for i, frozen in enumerate(frozen_mask):
        ext = []
        for pm, bits in paths:
            lam = _ref_bit_llr(llr, bits)
            if frozen:
                ext.append((pm + _ref_penalty(lam, 0), bits + [0]))
            else:
                for b in (0, 1):
                    ext.append((pm + _ref_penalty(lam, b), bits + [b]))
        if not frozen:
            ext.sort(key=lambda t: t[0])
            ext = ext[:L]
        paths = ext
    return paths


# -- reference CRC -----------------------------------------------------------


def slow_crc_remainder(poly, width, message):
    """Long-division remainder of message * x^width mod poly."""
    poly_bits = [(poly >> (width - j)) & 1 for j in range(width + 1)]
    reg = [int(b) for b in message] + [0] * width
    for i in range(len(message)):
        if reg[i]:
            for j, pb in enumerate(poly_bits):
                reg[i + j] ^= pb
    return reg[len(message):]


# -- batch recomputation of flip scores --------------------------------------


def recompute_scores(hist, theta, bmax):
    """Recompute per-slot candidate scores from decision-LLR histories.

    hist is the engine's history dump: per recorded slot, the tuple
    (k, gammas, forks) where gammas[b, c, j] is candidate c's decision
    LLR at slot j <= k and forks marks the slots where its lineage took
    the non-favoured branch. Returns {k: (Q_k, dQ_k)} computed by the
    closed-form sums instead of the incremental recursion.
    """
    out = {}
    for k, g_blk, f_blk in hist:
        B = g_blk.shape[0]
        ag = np.abs(g_blk)
        relu = np.maximum(theta - ag, 0.0)
        q = relu.sum(axis=2) + ((ag - theta) * f_blk).sum(axis=2)
        am = q.argmin(axis=1)
        rows = np.arange(B)
        Qk = q[rows, am]
        step = (ag[rows, am] < theta).astype(np.int64)
        fork = f_blk[rows, am]
        s = np.zeros(B, dtype=np.int64)
        for j in range(k + 1):
            s += step[:, j]
            if bmax is not None:
                np.minimum(s, bmax, out=s)
            s -= fork[:, j]
            if bmax is not None:
                np.maximum(s, -bmax, out=s)
        out[k] = (Qk, s)
    return out


# -- frame generation ---------------------------------------------------------


def q_func(x):
    """Gaussian tail probability."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def noisy_frames(code, ebno_db, B, seed, start=0):
    """Generate B transmitted frames the same way the simulator does.

    Returns (payload, u, x, llr) with payload (B, K) and the rest (B, N).
    """
    from polarflip.channel import (add_noise, ebno_to_sigma, frame_rng,
                                   llr_from_channel, modulate)
    from polarflip.codes import assemble_u, polar_transform

    sigma = ebno_to_sigma(ebno_db, code.rate)
    payload = np.empty((B, code.K), dtype=np.int8)
    u = np.empty((B, code.N), dtype=np.int8)
    llr = np.empty((B, code.N))
    for i in range(B):
        rng = frame_rng(seed, start + i)
        payload[i] = rng.integers(0, 2, size=code.K, dtype=np.int8)
        u[i] = assemble_u(code, payload[i])
        y = add_noise(modulate(polar_transform(u[i])), sigma, rng)
        llr[i] = llr_from_channel(y, sigma)
    return payload, u, polar_transform(u), llr
