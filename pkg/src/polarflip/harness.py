"""Monte-Carlo frame-error-rate harness with cost accounting.

Frames are processed in chunks. Every frame owns a counter-keyed rng
stream, so frame i of a run is identical for every decoder under the
same seed, chunks can be resized freely, and points can be replayed.
When training is enabled, harvested samples are committed to the
trainer in frame order and the updated theta takes effect at the next
chunk boundary.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import (ebno_to_sigma, frame_rng, hard_error_count,
                      llr_from_channel, modulate)
from .codes import (PolarCode, assemble_u, build_code, load_reliability,
                    polar_transform)
from .decoders import flip_decode_batch, ideal_flip_decode_batch
from .engine import ListEngine, select_output
from .instrument import (attempt_profile, rank_cost, trainer_sample_cost,
                         trainer_update_cost)
from .trainer import TrainerState, init_theta

DECODERS = ("sc", "scl", "fscl", "sclf", "fast-sclf",
            "ideal-sclf", "ideal-fast-sclf")
FLIP_DECODERS = ("sclf", "fast-sclf")
IDEAL_DECODERS = ("ideal-sclf", "ideal-fast-sclf")
_FULL_TREE = ("sc", "scl", "sclf", "ideal-sclf")

RESULT_FIELDS = ("decoder", "L", "m", "ebno_db", "frames", "errors", "fer",
                 "avg_complexity", "avg_timesteps", "avg_attempts",
                 "train_acc", "theta", "sec_per_frame")


@dataclass
class SimConfig:
    N: int
    K: int
    C: int
    decoder: str
    L: int = 1
    m: int = 0
    ebno_db: tuple = (2.0,)
    max_frames: int = 100_000
    max_errors: int = 400
    seed: int = 0
    reliability: str | None = None
    train: bool = False
    train_cap: int = 50
    batch: int = 32
    lr_shift: int = 9
    taylor: int = 3
    theta0: float | None = None
    out: str | None = None
    fmt: str = "csv"
    chunk: int = 512
    sigma_override: float | None = None

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.decoder == "sc" and self.L != 1:
            raise ValueError("sc decodes a single path; use scl for L > 1")
        if self.decoder in FLIP_DECODERS:
            if self.m < 1:
                raise ValueError("flip decoders need m >= 1")
        elif self.m:
            raise ValueError("m applies only to flip decoders")
        if self.train and self.decoder not in FLIP_DECODERS:
            raise ValueError("training applies only to flip decoders")
        if self.fmt not in ("csv", "jsonl"):
            raise ValueError("format must be csv or jsonl")
        if self.max_frames < 1 or self.max_errors < 1 or self.chunk < 1:
            raise ValueError("frame budgets must be positive")
        if not self.ebno_db:
            raise ValueError("need at least one Eb/N0 point")

    def build_code(self) -> PolarCode:
        rel = (load_reliability(self.reliability)
               if self.reliability else None)
        return build_code(self.N, self.K, self.C, reliability=rel)


@dataclass
class SimResult:
    decoder: str
    L: int
    m: int
    ebno_db: float
    frames: int
    errors: int
    fer: float
    avg_complexity: float
    avg_timesteps: float
    avg_attempts: float
    train_acc: float
    theta: float
    sec_per_frame: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in RESULT_FIELDS}


@dataclass
class ThetaTrajectory:
    rows: list = field(default_factory=list)  # (update_index, theta, acc)

    def push(self, update_index: int, theta: float, acc: float) -> None:
        self.rows.append((update_index, theta, acc))


class _Accuracy:
    """Running top-1 hit rate over harvested flip samples."""

    def __init__(self):
        self.hits = 0
        self.total = 0

    def push(self, first_hit: bool) -> None:
        self.hits += bool(first_hit)
        self.total += 1

    @property
    def value(self) -> float:
        return self.hits / self.total if self.total else math.nan


def _generate(code: PolarCode, seed: int, start: int, count: int,
              sigma: float):
    """Per-frame streams: payload bits first, then the noise draw."""
    K, N = code.K, code.N
    payload = np.empty((count, K), dtype=np.uint8)
    y = np.empty((count, N), dtype=np.float64)
    for j in range(count):
        rng = frame_rng(seed, start + j)
        payload[j] = rng.integers(0, 2, size=K, dtype=np.uint8)
        y[j] = rng.standard_normal(N)
    u = assemble_u(code, payload)
    x = polar_transform(u)
    y *= sigma
    y += modulate(x)
    llr = llr_from_channel(y, sigma)
    return payload, u, x, y, llr


class _Runner:
    """Shared state for one simulation sweep."""

    def __init__(self, cfg: SimConfig, trajectory: ThetaTrajectory | None,
                 genie_selection: bool = False):
        self.cfg = cfg
        self.genie_selection = genie_selection
        self.code = cfg.build_code()
        full = cfg.decoder in _FULL_TREE
        self.engine = ListEngine(self.code, cfg.L, full_tree=full)
        record = cfg.decoder in FLIP_DECODERS
        self.base_ops, self.base_ticks = attempt_profile(
            self.engine.root, cfg.L, record=record)
        self.retry_ops, self.retry_ticks = attempt_profile(
            self.engine.root, cfg.L, record=False)
        width = self.code.K + self.code.C
        self.rank_ops, self.rank_ticks = rank_cost(width)
        self.sample_cost = trainer_sample_cost(width, cfg.taylor).weighted
        self.update_cost = trainer_update_cost().weighted
        theta0 = cfg.theta0 if cfg.theta0 is not None else init_theta(cfg.seed)
        self.trainer = TrainerState(theta=theta0, lr_shift=cfg.lr_shift,
                                    batch=cfg.batch, terms=cfg.taylor,
                                    update_cap=cfg.train_cap)
        self.accuracy = _Accuracy()
        self.trajectory = trajectory
        self.frame_index = 0

    def decode_chunk(self, llr, payload, u):
        """Returns (err, attempts, dyn_add, retried, train_ops)."""
        cfg = self.cfg
        B = llr.shape[0]
        train_ops = 0
        if cfg.decoder in ("sc", "scl", "fscl"):
            res = self.engine.run(llr)
            sel = select_output(self.code, res)
            err = (sel.payload != payload).any(axis=1)
            return (err, np.ones(B, dtype=np.int64), res.ops["add"],
                    np.zeros(B, dtype=bool), train_ops)
        if cfg.decoder in IDEAL_DECODERS:
            out = ideal_flip_decode_batch(self.engine, llr, u)
            if self.genie_selection:
                err = ~out.listed
            else:
                err = (out.payload != payload).any(axis=1)
            return (err, out.attempts, out.dyn_add,
                    out.retried.astype(bool), train_ops)
        out = flip_decode_batch(self.engine, llr, cfg.m,
                                theta=self.trainer.theta,
                                collect_samples=cfg.train)
        err = (out.payload != payload).any(axis=1)
        if cfg.train and out.samples.frame.size:
            train_ops = self._commit(out.samples)
        return (err, out.attempts, out.dyn_add,
                out.retried.astype(bool), train_ops)

    def _commit(self, samples) -> int:
        ops = 0
        for i in np.argsort(samples.frame, kind="stable"):
            self.accuracy.push(bool(samples.first_hit[i]))
            before = self.trainer.updates
            if self.trainer.submit(samples.Q[i], samples.dQ[i],
                                   int(samples.label[i])):
                ops += self.sample_cost
            if self.trainer.updates != before:
                ops += self.update_cost
                if self.trajectory is not None:
                    self.trajectory.push(self.trainer.updates,
                                         self.trainer.theta,
                                         self.accuracy.value)
        return ops

    def run_point(self, ebno: float,
                  keep_errors: int | None = None) -> SimResult:
        cfg = self.cfg
        sigma = (cfg.sigma_override if cfg.sigma_override is not None
                 else ebno_to_sigma(ebno, self.code.rate))
        frames = errors = 0
        comp_sum = tick_sum = att_sum = 0
        generated_cap = None
        if keep_errors is not None:
            if not 1 <= keep_errors <= self.code.N:
                raise ValueError("conditioned error count out of range")
            generated_cap = 20_000 * cfg.max_frames
        generated = 0
        t0 = time.perf_counter()
        while frames < cfg.max_frames and errors < cfg.max_errors:
            B = min(cfg.chunk, cfg.max_frames - frames)
            payload, u, x, y, llr = _generate(
                self.code, cfg.seed, self.frame_index, B, sigma)
            self.frame_index += B
            generated += B
            if keep_errors is not None:
                keep = hard_error_count(y, x) == keep_errors
                if generated_cap and generated > generated_cap:
                    raise RuntimeError(
                        "conditioning filter accepted too few frames")
                if not keep.any():
                    continue
                payload, u, llr = payload[keep], u[keep], llr[keep]
                B = int(keep.sum())
            err, attempts, dyn, retried, train_ops = self.decode_chunk(
                llr, payload, u)
            frames += B
            errors += int(err.sum())
            att_sum += int(attempts.sum())
            comp_sum += (self.base_ops.weighted * B
                         + self.retry_ops.weighted
                         * int((attempts - 1).sum())
                         + int(dyn.sum()) + train_ops)
            tick_sum += (self.base_ticks * B
                         + self.retry_ticks * int((attempts - 1).sum()))
            if cfg.decoder in FLIP_DECODERS:
                nr = int(retried.sum())
                comp_sum += self.rank_ops.weighted * nr
                tick_sum += self.rank_ticks * nr
        dt = time.perf_counter() - t0
        flip = cfg.decoder in FLIP_DECODERS or cfg.decoder in IDEAL_DECODERS
        return SimResult(
            decoder=cfg.decoder, L=cfg.L, m=cfg.m, ebno_db=ebno,
            frames=frames, errors=errors,
            fer=errors / frames if frames else math.nan,
            avg_complexity=comp_sum / frames if frames else math.nan,
            avg_timesteps=tick_sum / frames if frames else math.nan,
            avg_attempts=att_sum / frames if frames else math.nan,
            train_acc=self.accuracy.value if cfg.train else math.nan,
            theta=self.trainer.theta if flip else math.nan,
            sec_per_frame=dt / frames if frames else math.nan,
        )


def run_fer(cfg: SimConfig,
            trajectory: ThetaTrajectory | None = None) -> list[SimResult]:
    """Sweep the configured Eb/N0 points; rows in sweep order."""
    runner = _Runner(cfg, trajectory)
    rows = [runner.run_point(float(e)) for e in cfg.ebno_db]
    if cfg.out:
        write_results(cfg.out, rows, cfg.fmt)
    return rows


def run_ideal(cfg: SimConfig,
              trajectory: ThetaTrajectory | None = None) -> list[SimResult]:
    if cfg.decoder not in IDEAL_DECODERS:
        raise ValueError("run_ideal needs an ideal-* decoder")
    return run_fer(cfg, trajectory)


def run_conditioned(cfg: SimConfig, error_count: int,
                    genie_selection: bool = False) -> list[SimResult]:
    """FER over frames whose hard-decision error count equals error_count.

    max_frames counts kept frames. With genie_selection (ideal decoders
    only) a frame succeeds when the transmitted payload is anywhere in
    the final list.
    """
    if error_count < 1:
        raise ValueError("error_count must be >= 1")
    if genie_selection and cfg.decoder not in IDEAL_DECODERS:
        raise ValueError("genie selection needs an ideal-* decoder")
    runner = _Runner(cfg, None, genie_selection=genie_selection)
    rows = [runner.run_point(float(e), keep_errors=error_count)
            for e in cfg.ebno_db]
    if cfg.out:
        write_results(cfg.out, rows, cfg.fmt)
    return rows


def training_accuracy(runner_or_rows) -> float:
    """Running top-1 estimate from a runner or the last result rows."""
    if isinstance(runner_or_rows, _Runner):
        return runner_or_rows.accuracy.value
    return runner_or_rows[-1].train_acc


def write_results(path, rows, fmt: str = "csv") -> None:
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(RESULT_FIELDS)
            for r in rows:
                w.writerow([getattr(r, k) for k in RESULT_FIELDS])
    elif fmt == "jsonl":
        with open(path, "w") as fh:
            for r in rows:
                fh.write(json.dumps(r.as_dict()) + "\n")
    else:
        raise ValueError("format must be csv or jsonl")


def write_theta_trajectory(path, trajectory: ThetaTrajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("update_index", "theta", "train_accuracy"))
        for row in trajectory.rows:
            w.writerow(row)
