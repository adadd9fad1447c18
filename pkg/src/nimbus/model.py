"""Core data model: stage identities, workload profiles, and the objects
that flow through the Load-Plan-Render-Store lifecycle.

Everything here is immutable after construction and safe to hand between
threads and processes.  Durations are carried as integer microseconds so
that simulated and real executions share exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import InvalidConfigValue, ProbabilityOutOfRange

US_PER_MS = 1000


def ms_to_us(ms: float) -> int:
    """Quantize a millisecond duration to integer microseconds."""
    if ms < 0:
        raise InvalidConfigValue(f"negative duration: {ms} ms", field="latency")
    return round(ms * US_PER_MS)


def us_to_ms(us: int) -> float:
    return us / US_PER_MS


class StageKind(Enum):
    """The five lifecycle stages, in pipeline order."""

    LOAD = "load"
    RANDOMIZE = "randomize"
    PLAN = "plan"
    RENDER = "render"
    STORE = "store"

    @property
    def order(self) -> int:
        return _STAGE_ORDER[self]


_STAGE_ORDER = {
    StageKind.LOAD: 0,
    StageKind.RANDOMIZE: 1,
    StageKind.PLAN: 2,
    StageKind.RENDER: 3,
    StageKind.STORE: 4,
}

# Stages whose cost is drawn once per frame rather than once per task.
PER_FRAME_STAGES = (StageKind.RENDER, StageKind.STORE)


@dataclass(frozen=True)
class LatencySpec:
    """A latency distribution: constant, uniform(lo, hi) or lognormal(mu, sigma).

    Parameters are in milliseconds (for lognormal, mu/sigma describe the
    underlying normal of a millisecond-valued variable).
    """

    dist: str = "constant"
    ms: float = 0.0
    lo_ms: float = 0.0
    hi_ms: float = 0.0
    mu: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.dist not in ("constant", "uniform", "lognormal"):
            raise InvalidConfigValue(f"unknown latency dist {self.dist!r}", field="latency.dist")
        if self.dist == "uniform" and self.hi_ms < self.lo_ms:
            raise InvalidConfigValue("uniform latency needs lo_ms <= hi_ms", field="latency")
        if self.dist == "lognormal" and self.sigma < 0:
            raise InvalidConfigValue("lognormal sigma must be >= 0", field="latency.sigma")

    @classmethod
    def constant(cls, ms: float) -> "LatencySpec":
        return cls(dist="constant", ms=ms)

    @classmethod
    def uniform(cls, lo_ms: float, hi_ms: float) -> "LatencySpec":
        return cls(dist="uniform", lo_ms=lo_ms, hi_ms=hi_ms)

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> "LatencySpec":
        return cls(dist="lognormal", mu=mu, sigma=sigma)

    def mean_ms(self) -> float:
        """Analytic mean of the distribution, used for planning and reports."""
        if self.dist == "constant":
            return self.ms
        if self.dist == "uniform":
            return (self.lo_ms + self.hi_ms) / 2.0
        import math

        return math.exp(self.mu + self.sigma**2 / 2.0)

    def scaled(self, factor: float) -> "LatencySpec":
        if self.dist == "constant":
            return LatencySpec.constant(self.ms * factor)
        if self.dist == "uniform":
            return LatencySpec.uniform(self.lo_ms * factor, self.hi_ms * factor)
        import math

        return LatencySpec.lognormal(self.mu + math.log(factor), self.sigma)


@dataclass(frozen=True)
class FramesSpec:
    """Distribution of per-task frame counts.  Draws are integers >= 1."""

    dist: str = "constant"
    value: int = 32
    lo: int = 1
    hi: int = 1

    def __post_init__(self):
        if self.dist not in ("constant", "uniform"):
            raise InvalidConfigValue(f"unknown frames dist {self.dist!r}", field="frames_per_task")
        if self.dist == "constant" and self.value < 1:
            raise InvalidConfigValue("frames_per_task must be >= 1", field="frames_per_task")
        if self.dist == "uniform" and not (1 <= self.lo <= self.hi):
            raise InvalidConfigValue("frames_per_task uniform needs 1 <= lo <= hi", field="frames_per_task")

    def mean(self) -> float:
        return float(self.value) if self.dist == "constant" else (self.lo + self.hi) / 2.0


@dataclass(frozen=True)
class WorkloadProfile:
    """Synthetic behavior of one stage.

    failure_prob is meaningful on Load (task abort) and Plan (invalid
    sequence, pruned) and Store (write failure); hang_prob means the stage
    stalls forever until an external kill.  cpu_spin burns CPU instead of
    sleeping in realtime mode.
    """

    latency: LatencySpec = field(default_factory=LatencySpec)
    failure_prob: float = 0.0
    hang_prob: float = 0.0
    cpu_spin: bool = False

    def __post_init__(self):
        for name in ("failure_prob", "hang_prob"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ProbabilityOutOfRange(f"{name}={p} outside [0, 1]", field=name)

    def scaled(self, factor: float) -> "WorkloadProfile":
        return WorkloadProfile(
            latency=self.latency.scaled(factor),
            failure_prob=self.failure_prob,
            hang_prob=self.hang_prob,
            cpu_spin=self.cpu_spin,
        )


@dataclass(frozen=True)
class TaskSpec:
    """Lightweight unit of work: metadata only, payload loaded lazily."""

    task_id: int
    scene_ref: str
    pipeline_id: str
    rng_seed: int
    workload_overrides: Optional[dict] = None

    def __post_init__(self):
        if self.task_id < 0:
            raise InvalidConfigValue("task_id must be >= 0", field="task_id")
        if not (0 <= self.rng_seed < 2**64):
            raise InvalidConfigValue("rng_seed must fit in 64 bits", field="rng_seed")


@dataclass(frozen=True)
class SceneHandle:
    """Result of the Load stage; unloaded handles carry only the scene_ref."""

    scene_ref: str
    payload_bytes: int = 0
    loaded: bool = False
    randomized_tag: str = ""

    def __post_init__(self):
        if self.loaded and self.payload_bytes <= 0:
            raise InvalidConfigValue("loaded scene must have payload_bytes > 0", field="payload_bytes")


@dataclass(frozen=True)
class TrajectorySequence:
    """Plan-stage output.  `valid` is the per-attempt success indicator;
    invalid sequences are pruned before any rendering work is spent."""

    task_id: int
    frame_count: int
    plan_latency_ms: float
    valid: bool

    def __post_init__(self):
        if self.frame_count < 1:
            raise InvalidConfigValue("frame_count must be >= 1", field="frame_count")


@dataclass(frozen=True)
class ObservationBatch:
    """Render-stage output: one latency sample per frame plus a synthetic
    payload sized frame_count * frame_bytes."""

    task_id: int
    frame_count: int
    per_frame_render_latency_ms: tuple
    synthetic_payload: bytes

    def __post_init__(self):
        if len(self.per_frame_render_latency_ms) != self.frame_count:
            raise InvalidConfigValue(
                "per_frame_render_latency_ms length must equal frame_count",
                field="per_frame_render_latency_ms",
            )


@dataclass(frozen=True)
class StoredRecord:
    """One durable output-log record.  Field values are the drawn (not
    measured) latencies so logs are reproducible across execution modes."""

    task_id: int
    pipeline_id: str
    scene_ref: str
    frames: int
    attempt: int
    load_ms: float
    plan_ms: float
    render_ms: float
    store_ms: float
    payload_bytes: int

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "attempt": self.attempt,
                "frames": self.frames,
                "load_ms": self.load_ms,
                "payload_bytes": self.payload_bytes,
                "pipeline_id": self.pipeline_id,
                "plan_ms": self.plan_ms,
                "render_ms": self.render_ms,
                "scene_ref": self.scene_ref,
                "store_ms": self.store_ms,
                "task_id": self.task_id,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "StoredRecord":
        import json

        d = json.loads(line)
        return cls(
            task_id=d["task_id"],
            pipeline_id=d["pipeline_id"],
            scene_ref=d["scene_ref"],
            frames=d["frames"],
            attempt=d["attempt"],
            load_ms=d["load_ms"],
            plan_ms=d["plan_ms"],
            render_ms=d["render_ms"],
            store_ms=d["store_ms"],
            payload_bytes=d["payload_bytes"],
        )


def synthetic_payload(task_id: int, frame_count: int, frame_bytes: int) -> bytes:
    """Cheap deterministic filler for queue/memory pressure tests."""
    if frame_bytes <= 0 or frame_count <= 0:
        return b""
    pattern = bytes([(task_id * 131 + i * 17) % 251 for i in range(32)])
    n = frame_count * frame_bytes
    return (pattern * (n // len(pattern) + 1))[:n]
