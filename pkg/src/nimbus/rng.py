"""Deterministic randomness.

Every stochastic choice in a run is drawn from a stream derived from
(rng_seed, stage kind, task_id, attempt), so a task's draws are stable no
matter which worker executes it, in which order, or in which execution
mode (realtime vs. simulated).  Streams are derived with BLAKE2b rather
than Python's salted hash() so they are stable across processes.

Draw order within a stage stream is fixed and always fully consumed:
failure draw, hang draw, then latency draw(s).
"""

from __future__ import annotations

import math
import random
import struct
from hashlib import blake2b
from typing import Optional

from .model import PER_FRAME_STAGES, FramesSpec, LatencySpec, StageKind, WorkloadProfile, ms_to_us

_MASK64 = (1 << 64) - 1


def derive_stream(seed: int, *parts) -> random.Random:
    h = blake2b(digest_size=16)
    h.update(struct.pack("<Q", seed & _MASK64))
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return random.Random(int.from_bytes(h.digest(), "big"))


def draw_latency_us(spec: LatencySpec, rng: random.Random) -> int:
    if spec.dist == "constant":
        return ms_to_us(spec.ms)
    if spec.dist == "uniform":
        return ms_to_us(rng.uniform(spec.lo_ms, spec.hi_ms))
    return ms_to_us(rng.lognormvariate(spec.mu, spec.sigma))


class StageDraw:
    """Outcome of one stage attempt: total cost, optional per-frame split,
    and whether a failure or hang was drawn."""

    __slots__ = ("total_us", "per_frame_us", "failed", "hang")

    def __init__(self, total_us: int, per_frame_us: Optional[tuple], failed: bool, hang: bool):
        self.total_us = total_us
        self.per_frame_us = per_frame_us
        self.failed = failed
        self.hang = hang


def draw_stage(
    profile: WorkloadProfile,
    rng_seed: int,
    stage: StageKind,
    task_id: int,
    frames: int = 1,
    attempt: int = 0,
) -> StageDraw:
    """Draw one stage attempt.  Render and Store cost is drawn per frame;
    the other stages draw a single per-task latency."""
    rng = derive_stream(rng_seed, stage.value, task_id, attempt)
    failed = rng.random() < profile.failure_prob
    hang = rng.random() < profile.hang_prob
    if stage in PER_FRAME_STAGES:
        per_frame = tuple(draw_latency_us(profile.latency, rng) for _ in range(frames))
        return StageDraw(sum(per_frame), per_frame, failed, hang)
    return StageDraw(draw_latency_us(profile.latency, rng), None, failed, hang)


def draw_frames(spec: FramesSpec, rng_seed: int, task_id: int) -> int:
    if spec.dist == "constant":
        return spec.value
    rng = derive_stream(rng_seed, "frames", task_id)
    return rng.randint(spec.lo, spec.hi)


def lognormal_params_for_mean(mean_ms: float, sigma: float) -> tuple[float, float]:
    """mu such that a lognormal(mu, sigma) has the requested mean."""
    return math.log(mean_ms) - sigma**2 / 2.0, sigma
