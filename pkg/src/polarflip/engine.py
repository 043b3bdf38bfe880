"""Batched path-list decoding engine shared by every decoder variant.

A batch of frames decodes in lockstep over a fixed node schedule. All
per-path state is held in arrays of shape (B, L, ...); the list is kept
physically at width L from the start by seeding path 0 with metric 0 and
the remaining lanes with +inf, so the usual fork-and-prune step is the
only list operation ever needed.

Pruning never copies bulk path state. Arrays that are read-only once
created (LLR blocks on the recursion stack, sorted node views, decided
bit columns) register as lazy entries holding a per-frame lane map;
each prune composes the survivor permutation into those maps, and the
data moves once, when the array is consumed. Only small mutable arrays
(metrics, counters, histories) are permuted eagerly.

Optional features, all off by default:
  record     accumulate per-path perturbation metrics q and their
             theta-derivatives, and per-decision-slot candidate scores
             Q / dQ used to rank bit-flip retries,
  history    additionally dump, per recorded slot, the decision-LLR
             ancestry of each scored candidate (test oracle input),
  flip_slot  per-frame decision slot whose outcome is reversed: on a
             splitting slot the pruner keeps the highest-metric half,
             on a sign-only slot the hard decision is inverted,
  true_u     genie mode: track which paths follow the transmitted bits
             and record the slot at which the last one is eliminated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import PolarCode, polar_transform, crc_check
from .kernel import f_minsum, g_fun
from .nodes import (BRANCH, RATE0, RATE1, REP, SPC, Node, classify_tree,
                    split_budget, stable_abs_order, total_slots)


@dataclass
class EngineResult:
    u: np.ndarray                 # (B, L, N) decoded input bits per path
    x: np.ndarray                 # (B, L, N) re-encoded codeword per path
    pm: np.ndarray                # (B, L) path metrics
    Q: np.ndarray | None = None   # (B, n_slots) flip-candidate scores
    dQ: np.ndarray | None = None  # (B, n_slots) their theta-derivatives
    first_kill: np.ndarray | None = None  # (B,) slot of correct-path loss, -1 if none
    ops: dict | None = None       # dynamic op counts, name -> (B,) int64
    hist: list | None = None      # per-slot candidate ancestry dumps


@dataclass
class Selection:
    payload: np.ndarray           # (B, K) message estimate
    info: np.ndarray              # (B, K+C) information bits of chosen path
    path: np.ndarray              # (B,) chosen path lane
    pm: np.ndarray                # (B,) its metric
    crc_ok: np.ndarray            # (B,) True if any path passed the CRC


class _Lazy:
    """A path-indexed array frozen at push time plus a lane map."""

    __slots__ = ("arr", "idx")

    def __init__(self, arr: np.ndarray):
        self.arr = arr
        self.idx = None


class _State:
    """Mutable per-run decode state."""

    def __init__(self, engine: "ListEngine", B: int, theta: float,
                 record: bool, history: bool, flip_slot, true_u):
        L = engine.L
        n_slots = engine.n_slots
        self.B = B
        self.L = L
        self.k = 0
        self.theta = float(theta)
        self.record = record
        self.bmax = engine.bmax
        self.kmask = engine.kmask
        self.pm = np.full((B, L), np.inf)
        self.pm[:, 0] = 0.0
        self.lazy: list[_Lazy] = []
        self.eager: list[np.ndarray] = []
        self.ops = {"add": np.zeros(B, dtype=np.int64)}
        self.q = self.dq = self.Q = self.dQ = None
        if record:
            self.q = np.zeros((B, L))
            self.dq = np.zeros((B, L), dtype=np.int64)
            self.Q = np.full((B, n_slots), np.inf)
            self.dQ = np.zeros((B, n_slots), dtype=np.int64)
        self.hist_gamma = self.hist_fork = None
        self.hist_dump: list | None = None
        if history:
            self.hist_gamma = np.zeros((B, L, n_slots))
            self.hist_fork = np.zeros((B, L, n_slots), dtype=bool)
            self.eager += [self.hist_gamma, self.hist_fork]
            self.hist_dump = []
        self.flip = None
        if flip_slot is not None:
            self.flip = np.asarray(flip_slot, dtype=np.int64)
        self.true_u = None
        self.correct = None
        self.first_kill = None
        if true_u is not None:
            self.true_u = np.asarray(true_u, dtype=np.int8)
            self.correct = np.zeros((B, L), dtype=bool)
            self.correct[:, 0] = True
            self.first_kill = np.full(B, -1, dtype=np.int64)

    # -- lazy path bookkeeping ----------------------------------------------

    def push(self, arr: np.ndarray) -> _Lazy:
        h = _Lazy(arr)
        self.lazy.append(h)
        return h

    def pop(self, h: _Lazy) -> None:
        top = self.lazy.pop()
        assert top is h

    @staticmethod
    def _apply(arr: np.ndarray, idx: np.ndarray) -> np.ndarray:
        full = idx.reshape(idx.shape + (1,) * (arr.ndim - 2))
        return np.take_along_axis(arr, full, axis=1)

    def resolve(self, h: _Lazy) -> np.ndarray:
        if h.idx is None:
            return h.arr
        return self._apply(h.arr, h.idx)

    def resolve_col(self, h: _Lazy, j: int) -> np.ndarray:
        col = h.arr[:, :, j]
        if h.idx is None:
            return col
        return np.take_along_axis(col, h.idx, axis=1)

    def resolve_tail(self, h: _Lazy, j0: int) -> np.ndarray:
        tail = h.arr[:, :, j0:]
        if h.idx is None:
            return tail
        return self._apply(tail, h.idx)

    def gather(self, parent: np.ndarray) -> None:
        for h in self.lazy:
            if h.idx is None:
                h.idx = parent.copy()
            else:
                h.idx = np.take_along_axis(h.idx, parent, axis=1)
        for arr in self.eager:
            idx = parent.reshape(parent.shape + (1,) * (arr.ndim - 2))
            arr[...] = np.take_along_axis(arr, idx, axis=1)


class ListEngine:
    """Decoder engine for one code at a fixed list size.

    full_tree=True decodes bit by bit (the conventional list decoder);
    otherwise constituent nodes are decoded with their fast kernels.
    b_i is the derivative-counter width in bits (None disables clamping).
    """

    def __init__(self, code: PolarCode, L: int, full_tree: bool = False,
                 b_i: int | None = 2):
        if L < 1:
            raise ValueError("list size must be >= 1")
        self.code = code
        self.L = L
        self.full_tree = full_tree
        self.root = classify_tree(code.frozen_mask, full_tree=full_tree)
        self.n_slots = total_slots(self.root)
        self.kmask = (L - 1).bit_length()
        self.bmax = None if b_i is None else (1 << (b_i - 1)) - 1
        if self.n_slots != code.K + code.C:
            raise AssertionError("decision slots must cover the information set")

    def run(self, llr: np.ndarray, theta: float = 0.0, record: bool = False,
            history: bool = False, flip_slot=None, true_u=None) -> EngineResult:
        llr = np.atleast_2d(np.asarray(llr, dtype=np.float64))
        if llr.shape[-1] != self.code.N:
            raise ValueError(f"LLR length must be N={self.code.N}")
        B = llr.shape[0]
        st = _State(self, B, theta, record, history, flip_slot, true_u)
        alpha0 = np.ascontiguousarray(
            np.broadcast_to(llr[:, None, :], (B, self.L, self.code.N)))
        x, u = self._decode(self.root, st, alpha0)
        if st.k != self.n_slots:
            raise AssertionError("schedule did not consume all decision slots")
        return EngineResult(u=u, x=x, pm=st.pm, Q=st.Q, dQ=st.dQ,
                            first_kill=st.first_kill, ops=st.ops,
                            hist=st.hist_dump)

    # -- tree walk ---------------------------------------------------------

    def _decode(self, node: Node, st: _State, alpha: np.ndarray):
        """Returns (beta, u) blocks for the node span, both (B, L, size)."""
        if node.kind == BRANCH:
            half = node.size // 2
            al = f_minsum(alpha[..., :half], alpha[..., half:])
            ha = st.push(alpha)
            bl, ul = self._decode(node.left, st, al)
            alpha = st.resolve(ha)
            st.pop(ha)
            ar = g_fun(alpha[..., :half], alpha[..., half:], bl)
            hb = st.push(bl)
            hu = st.push(ul)
            br, ur = self._decode(node.right, st, ar)
            ul = st.resolve(hu)
            st.pop(hu)
            bl = st.resolve(hb)
            st.pop(hb)
            return (np.concatenate([bl ^ br, br], axis=2),
                    np.concatenate([ul, ur], axis=2))
        beta = self._KERNELS[node.kind](self, node, st, alpha)
        if node.kind == RATE0:
            return beta, beta
        return beta, polar_transform(beta)

    # -- splitting and sign-only decisions ---------------------------------

    def _split(self, st: _State, pm_f: np.ndarray, pm_t: np.ndarray,
               gamma: np.ndarray, corr_f=None, corr_t=None):
        """Fork every path, keep the best L of 2L candidates.

        Candidate lanes 0..L-1 follow the favoured decision of path lane l,
        lanes L..2L-1 take the opposite; ties keep the lower lane. Returns
        (parent, toggled) describing the survivors. All tracked arrays, the
        metrics, and the recording state are updated in place.
        """
        L, B = st.L, st.B
        k = st.k
        st.k += 1
        if st.hist_gamma is not None:
            st.hist_gamma[:, :, k] = gamma
        q_cand = dq_cand = None
        if st.record:
            ag = np.abs(gamma)
            relu = np.maximum(st.theta - ag, 0.0)
            q_f = st.q + relu
            q_t = q_f + ag - st.theta
            step = (ag < st.theta).astype(np.int64)
            if st.bmax is None:
                dq_f = st.dq + step
                dq_t = dq_f - 1
            else:
                dq_f = np.minimum(st.dq + step, st.bmax)
                dq_t = np.maximum(dq_f - 1, -st.bmax)
            st.ops["add"] += (relu > 0).sum(axis=1)
            q_cand = np.concatenate([q_f, q_t], axis=1)
            dq_cand = np.concatenate([dq_f, dq_t], axis=1)
        pm_cand = np.concatenate([pm_f, pm_t], axis=1)
        if st.flip is not None:
            rev = st.flip == k
            key = np.where(rev[:, None], -pm_cand, pm_cand)
        else:
            key = pm_cand
        order = np.argsort(key, axis=1, kind="stable")
        surv = order[:, :L]
        if st.record and k >= st.kmask:
            disc = np.sort(order[:, L:], axis=1)
            if st.hist_dump is not None:
                rows = np.arange(B)[:, None]
                g_blk = st.hist_gamma[rows, disc % L, :k + 1].copy()
                f_blk = st.hist_fork[rows, disc % L, :k + 1].copy()
                f_blk[:, :, k] = disc >= L
                st.hist_dump.append((k, g_blk, f_blk))
            qd = np.take_along_axis(q_cand, disc, axis=1)
            am = qd.argmin(axis=1)
            rows = np.arange(B)
            st.Q[:, k] = qd[rows, am]
            st.dQ[:, k] = np.take_along_axis(dq_cand, disc, axis=1)[rows, am]
        st.pm = np.take_along_axis(pm_cand, surv, axis=1)
        if st.record:
            st.q = np.take_along_axis(q_cand, surv, axis=1)
            st.dq = np.take_along_axis(dq_cand, surv, axis=1)
        parent = surv % L
        toggled = surv >= L
        if st.correct is not None:
            corr_cand = np.concatenate([corr_f, corr_t], axis=1)
            new_corr = np.take_along_axis(corr_cand, surv, axis=1)
            died = st.correct.any(axis=1) & ~new_corr.any(axis=1)
            died &= st.first_kill < 0
            st.first_kill[died] = k
            st.correct = new_corr
        st.gather(parent)
        if st.hist_fork is not None:
            st.hist_fork[:, :, k] = toggled
        return parent, toggled

    def _signs(self, st: _State, gammas: np.ndarray, true_bits=None):
        """Sign-only decisions for a run of slots, vectorized over the run.

        gammas has shape (B, L, R) and covers slots st.k .. st.k+R-1 in
        order. Applies any requested hard flip, updates the recording
        state, and returns (bits, rows, jj) where rows/jj locate flipped
        frames and their in-run position (the caller settles metric and
        parity effects, which are node-specific).
        """
        B, L, R = gammas.shape
        k0 = st.k
        st.k += R
        bits = (gammas < 0).astype(np.int8)
        rows = np.empty(0, dtype=np.int64)
        jj = None
        if st.flip is not None:
            jj = st.flip - k0
            rows = np.flatnonzero((jj >= 0) & (jj < R))
            if rows.size:
                bits[rows, :, jj[rows]] ^= 1
        if st.record:
            ag = np.abs(gammas)
            relu = np.maximum(st.theta - ag, 0.0)
            q_cum = st.q[:, :, None] + np.cumsum(relu, axis=2)
            q_alt = q_cum + ag - st.theta
            st.Q[:, k0:k0 + R] = q_alt.min(axis=1)
            am = q_alt.argmin(axis=1)
            step = (ag < st.theta).astype(np.int64)
            if st.bmax is None:
                dq_cum = st.dq[:, :, None] + np.cumsum(step, axis=2)
                dq_alt = dq_cum - 1
            else:
                dq_cum = np.minimum(st.dq[:, :, None] + np.cumsum(step, axis=2),
                                    st.bmax)
                dq_alt = np.maximum(dq_cum - 1, -st.bmax)
            st.dQ[:, k0:k0 + R] = np.take_along_axis(
                dq_alt, am[:, None, :], axis=1)[:, 0, :]
            st.q = q_cum[:, :, -1]
            st.dq = dq_cum[:, :, -1]
            st.ops["add"] += (relu > 0).sum(axis=(1, 2))
        if st.hist_gamma is not None:
            st.hist_gamma[:, :, k0:k0 + R] = gammas
            if st.record and st.hist_dump is not None:
                for j in range(R):
                    g_blk = st.hist_gamma[:, :, :k0 + j + 1].copy()
                    f_blk = st.hist_fork[:, :, :k0 + j + 1].copy()
                    f_blk[:, :, k0 + j] = True
                    st.hist_dump.append((k0 + j, g_blk, f_blk))
        if st.correct is not None:
            wrong = bits != true_bits
            alive_path = st.correct[:, :, None] & ~(np.cumsum(wrong, axis=2) > 0)
            alive = alive_path.any(axis=1)
            dead = ~alive
            need = st.correct.any(axis=1) & dead[:, -1] & (st.first_kill < 0)
            st.first_kill[need] = k0 + dead.argmax(axis=1)[need]
            st.correct = alive_path[:, :, -1]
        return bits, rows, jj

    # -- node kernels -------------------------------------------------------

    def _true_beta(self, st: _State, node: Node) -> np.ndarray:
        return polar_transform(st.true_u[:, node.lo:node.hi])

    def _rate0(self, node: Node, st: _State, alpha: np.ndarray) -> np.ndarray:
        alpha = np.asarray(alpha)
        st.pm = st.pm + 0.5 * (np.abs(alpha) - alpha).sum(axis=2)
        return np.zeros(alpha.shape, dtype=np.int8)

    def _rep(self, node: Node, st: _State, alpha: np.ndarray) -> np.ndarray:
        ssum = alpha.sum(axis=2)
        sabs = np.abs(alpha).sum(axis=2)
        pm0 = 0.5 * (sabs - ssum)
        pm1 = 0.5 * (sabs + ssum)
        tb = None
        if st.correct is not None:
            tb = st.true_u[:, node.hi - 1]
        if split_budget(node, st.L) == 1:
            follow = (ssum < 0).astype(np.int8)
            pm_fol = np.where(follow == 1, pm1, pm0)
            pm_tog = np.where(follow == 1, pm0, pm1)
            corr_f = corr_t = None
            if tb is not None:
                hit = follow == tb[:, None]
                corr_f = st.correct & hit
                corr_t = st.correct & ~hit
            parent, toggled = self._split(st, st.pm + pm_fol, st.pm + pm_tog,
                                          ssum, corr_f, corr_t)
            bit = np.take_along_axis(follow, parent, axis=1) ^ toggled
        else:
            true_bits = None
            if tb is not None:
                true_bits = np.broadcast_to(tb[:, None, None],
                                            ssum.shape + (1,))
            bits, _, _ = self._signs(st, ssum[:, :, None], true_bits)
            bit = bits[:, :, 0]
            st.pm = st.pm + np.where(bit == 1, pm1, pm0)
        beta = np.repeat(bit.astype(np.int8)[:, :, None], node.size, axis=2)
        return beta

    def _rate1(self, node: Node, st: _State, alpha: np.ndarray) -> np.ndarray:
        B, L = st.B, st.L
        M = node.size
        tau = split_budget(node, st.L)
        if M > 1:
            order = stable_abs_order(alpha)
            asrt = np.take_along_axis(alpha, order, axis=2)
        else:
            order = None
            asrt = alpha
        ha = st.push(asrt)
        ho = st.push(order) if order is not None else None
        htb = None
        if st.correct is not None:
            tb = np.broadcast_to(self._true_beta(st, node)[:, None, :],
                                 (B, L, M))
            tb_rows = (np.take_along_axis(tb, order, axis=2)
                       if order is not None else tb)
            htb = st.push(tb_rows)
        cols = []
        for j in range(tau):
            aj = st.resolve_col(ha, j)
            follow = (aj < 0).astype(np.int8)
            corr_f = corr_t = None
            if htb is not None:
                hit = follow == st.resolve_col(htb, j)
                corr_f = st.correct & hit
                corr_t = st.correct & ~hit
            parent, toggled = self._split(st, st.pm, st.pm + np.abs(aj),
                                          aj, corr_f, corr_t)
            bit = np.take_along_axis(follow, parent, axis=1) ^ toggled
            cols.append(st.push(bit.astype(np.int8)))
        beta = np.zeros((B, L, M), dtype=np.int8)
        if tau < M:
            rest = st.resolve_tail(ha, tau)
            true_rest = st.resolve_tail(htb, tau) if htb is not None else None
            bits, rows, jj = self._signs(st, rest, true_rest)
            beta[:, :, tau:] = bits
            if rows.size:
                st.pm[rows] += np.abs(rest[rows, :, jj[rows]])
                st.ops["add"][rows] += L
        for j in range(tau - 1, -1, -1):
            beta[:, :, j] = st.resolve(cols[j])
            st.pop(cols[j])
        if htb is not None:
            st.pop(htb)
        if ho is not None:
            order = st.resolve(ho)
            st.pop(ho)
        st.pop(ha)
        if order is None:
            return beta
        nat = np.zeros_like(beta)
        np.put_along_axis(nat, order, beta, axis=2)
        return nat

    def _spc(self, node: Node, st: _State, alpha: np.ndarray) -> np.ndarray:
        B, L = st.B, st.L
        M = node.size
        tau = split_budget(node, st.L)
        order = stable_abs_order(alpha)
        asrt = np.take_along_axis(alpha, order, axis=2)
        parity = np.bitwise_xor.reduce((asrt < 0).astype(np.int8), axis=2)
        st.pm = st.pm + parity * np.abs(asrt[:, :, 0])
        st.ops["add"] += parity.sum(axis=1, dtype=np.int64)
        ha = st.push(asrt)
        ho = st.push(order)
        st.eager.append(parity)
        htb = None
        if st.correct is not None:
            tb = np.broadcast_to(self._true_beta(st, node)[:, None, :],
                                 (B, L, M))
            htb = st.push(np.take_along_axis(tb, order, axis=2))
        cols = []
        for j in range(1, tau + 1):
            aj = st.resolve_col(ha, j)
            follow = (aj < 0).astype(np.int8)
            amin = np.abs(st.resolve_col(ha, 0))
            pen = np.abs(aj) + (1 - 2 * parity) * amin
            corr_f = corr_t = None
            if htb is not None:
                hit = follow == st.resolve_col(htb, j)
                corr_f = st.correct & hit
                corr_t = st.correct & ~hit
            parent, toggled = self._split(st, st.pm, st.pm + pen,
                                          aj, corr_f, corr_t)
            bit = np.take_along_axis(follow, parent, axis=1) ^ toggled
            cols.append(st.push(bit.astype(np.int8)))
            parity ^= toggled
        beta = np.zeros((B, L, M), dtype=np.int8)
        if tau + 1 < M:
            rest = st.resolve_tail(ha, tau + 1)
            true_rest = (st.resolve_tail(htb, tau + 1)
                         if htb is not None else None)
            bits, rows, jj = self._signs(st, rest, true_rest)
            beta[:, :, tau + 1:] = bits
            if rows.size:
                aflip = np.abs(rest[rows, :, jj[rows]])
                amin = np.abs(st.resolve_col(ha, 0))[rows]
                st.pm[rows] += aflip + (1 - 2 * parity[rows]) * amin
                parity[rows] ^= 1
                st.ops["add"][rows] += 2 * L
        for j in range(tau - 1, -1, -1):
            beta[:, :, j + 1] = st.resolve(cols[j])
            st.pop(cols[j])
        if htb is not None:
            st.pop(htb)
        top = st.eager.pop()
        assert top is parity
        order = st.resolve(ho)
        st.pop(ho)
        st.pop(ha)
        beta[:, :, 0] = np.bitwise_xor.reduce(beta[:, :, 1:], axis=2)
        nat = np.zeros_like(beta)
        np.put_along_axis(nat, order, beta, axis=2)
        return nat

    _KERNELS = {
        RATE0: _rate0,
        RATE1: _rate1,
        REP: _rep,
        SPC: _spc,
    }


def select_output(code: PolarCode, result: EngineResult) -> Selection:
    """Pick the answer path: lowest metric among CRC survivors, falling
    back to the lowest metric overall; ties keep the lower lane."""
    info = result.u[:, :, code.info_positions]
    ok = crc_check(code, info)
    pm_eff = np.where(ok, result.pm, np.inf)
    any_ok = ok.any(axis=1)
    idx = np.where(any_ok, pm_eff.argmin(axis=1), result.pm.argmin(axis=1))
    rows = np.arange(info.shape[0])
    chosen = info[rows, idx]
    return Selection(payload=chosen[:, :code.K], info=chosen, path=idx,
                     pm=result.pm[rows, idx], crc_ok=any_ok)
