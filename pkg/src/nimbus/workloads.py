"""Named synthetic workload presets and fault-injection schedules.

Presets mirror the four evaluation pipelines this runtime was sized for.
Latencies marked "anchored" (nav_mesh render 446.29/159.46 ms per frame,
store 56 ms/frame) are the published reference points; everything else is
chosen for desk-scale runs and flagged as such in docs/config.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InvalidConfigValue, TargetNotFound, UnknownPreset
from .model import FramesSpec, LatencySpec, StageKind, WorkloadProfile
from .rng import derive_stream, lognormal_params_for_mean

NAV_MESH_RENDER_BASELINE_MS = 446.29
NAV_MESH_RENDER_OPTIMIZED_MS = 159.46
STORE_MS_PER_FRAME = 56.0


@dataclass(frozen=True)
class WorkloadPreset:
    name: str
    stages: Dict[StageKind, WorkloadProfile]
    fusion: bool
    frames_per_task: FramesSpec
    default_task_count: int

    def to_config_mapping(self) -> dict:
        """Nested mapping in pipeline-config schema form."""
        out = {
            "fusion": self.fusion,
            "task_count": self.default_task_count,
            "frames_per_task": _frames_mapping(self.frames_per_task),
            "stages": {k.value: _profile_mapping(v) for k, v in self.stages.items()},
        }
        return out


def _profile_mapping(p: WorkloadProfile) -> dict:
    lat = {"dist": p.latency.dist}
    if p.latency.dist == "constant":
        lat["ms"] = p.latency.ms
    elif p.latency.dist == "uniform":
        lat["lo_ms"] = p.latency.lo_ms
        lat["hi_ms"] = p.latency.hi_ms
    else:
        lat["mu"] = p.latency.mu
        lat["sigma"] = p.latency.sigma
    return {
        "latency": lat,
        "failure_prob": p.failure_prob,
        "hang_prob": p.hang_prob,
        "cpu_spin": p.cpu_spin,
    }


def _frames_mapping(f: FramesSpec) -> dict:
    if f.dist == "constant":
        return {"dist": "constant", "value": f.value}
    return {"dist": "uniform", "lo": f.lo, "hi": f.hi}


def _stage_map(load_ms, plan_ms, render_ms, store_ms, plan_failure=0.0) -> Dict[StageKind, WorkloadProfile]:
    return {
        StageKind.LOAD: WorkloadProfile(latency=LatencySpec.constant(load_ms)),
        StageKind.RANDOMIZE: WorkloadProfile(latency=LatencySpec.constant(0.0)),
        StageKind.PLAN: WorkloadProfile(latency=LatencySpec.constant(plan_ms), failure_prob=plan_failure),
        StageKind.RENDER: WorkloadProfile(latency=LatencySpec.constant(render_ms)),
        StageKind.STORE: WorkloadProfile(latency=LatencySpec.constant(store_ms)),
    }


def preset(name: str, optimized_render: bool = True) -> WorkloadPreset:
    """Fully parameterized preset by name.

    The navigation presets fuse Plan and Render into one synchronous stage;
    the manipulation presets are split and pipeline-friendly.  For nav_mesh
    the render profile is selectable between the unoptimized and optimized
    per-frame latencies.
    """
    if name == "nav_gs":
        return WorkloadPreset(
            name=name,
            stages=_stage_map(load_ms=60.0, plan_ms=15.0, render_ms=45.0, store_ms=STORE_MS_PER_FRAME),
            fusion=True,
            frames_per_task=FramesSpec(dist="constant", value=8),
            default_task_count=150,
        )
    if name == "nav_mesh":
        render_ms = NAV_MESH_RENDER_OPTIMIZED_MS if optimized_render else NAV_MESH_RENDER_BASELINE_MS
        return WorkloadPreset(
            name=name,
            stages=_stage_map(load_ms=40.0, plan_ms=15.0, render_ms=render_ms, store_ms=STORE_MS_PER_FRAME),
            fusion=True,
            frames_per_task=FramesSpec(dist="constant", value=8),
            default_task_count=450,
        )
    if name == "genmanip":
        # plan roughly one third of per-task render cost (4 frames x 80 ms)
        return WorkloadPreset(
            name=name,
            stages=_stage_map(load_ms=20.0, plan_ms=110.0, render_ms=80.0, store_ms=STORE_MS_PER_FRAME, plan_failure=0.2),
            fusion=False,
            frames_per_task=FramesSpec(dist="constant", value=4),
            default_task_count=200,
        )
    if name == "simbox":
        return WorkloadPreset(
            name=name,
            stages=_stage_map(load_ms=10.0, plan_ms=120.0, render_ms=150.0, store_ms=STORE_MS_PER_FRAME, plan_failure=0.1),
            fusion=False,
            frames_per_task=FramesSpec(dist="constant", value=2),
            default_task_count=200,
        )
    if name == "custom":
        return WorkloadPreset(
            name=name,
            stages=_stage_map(load_ms=0.0, plan_ms=100.0, render_ms=300.0, store_ms=STORE_MS_PER_FRAME),
            fusion=False,
            frames_per_task=FramesSpec(dist="constant", value=1),
            default_task_count=100,
        )
    raise UnknownPreset(f"unknown workload preset {name!r}", field="workload")


PRESET_NAMES = ("nav_gs", "nav_mesh", "genmanip", "simbox", "custom")


# ---------------------------------------------------------------------------
# Fault schedules


@dataclass(frozen=True)
class FaultSpec:
    """One injected fault.

    kind: hang (stage stalls until killed), crash (worker dies now),
    slow (drawn latencies multiplied by `factor` from the trigger on).
    target: "role:index" or "role:*" where role is planner|renderer|fused|any.
    Triggered either at a wall/virtual time (at_ms) or when the target
    starts executing a given task (at_task).
    """

    kind: str
    target: str
    at_ms: Optional[float] = None
    at_task: Optional[int] = None
    factor: float = 1.0

    def __post_init__(self):
        if self.kind not in ("hang", "crash", "slow"):
            raise InvalidConfigValue(f"unknown fault kind {self.kind!r}", field="faults.kind")
        if (self.at_ms is None) == (self.at_task is None):
            raise InvalidConfigValue("fault needs exactly one of at_ms / at_task", field="faults")
        if self.kind == "slow" and self.factor <= 0:
            raise InvalidConfigValue("slow fault needs factor > 0", field="faults.factor")
        role, _, idx = self.target.partition(":")
        if role not in ("planner", "renderer", "fused", "any") or not idx:
            raise InvalidConfigValue(f"bad fault target {self.target!r}", field="faults.target")
        if idx != "*" and not idx.isdigit():
            raise InvalidConfigValue(f"bad fault target index {idx!r}", field="faults.target")

    @property
    def role(self) -> str:
        return self.target.partition(":")[0]

    @property
    def index(self) -> Optional[int]:
        idx = self.target.partition(":")[2]
        return None if idx == "*" else int(idx)

    def matches(self, role: str, index: int) -> bool:
        if self.role != "any" and self.role != role:
            return False
        return self.index is None or self.index == index


def validate_schedule(schedule: Sequence[FaultSpec], planners: int, renderers: int, fused: bool):
    """Reject targets that cannot exist in the run topology."""
    for spec in schedule:
        role, idx = spec.role, spec.index
        if role == "any" or idx is None:
            continue
        limit = {"planner": planners, "renderer": renderers, "fused": renderers if fused else 0}.get(role, 0)
        if fused and role in ("planner", "renderer"):
            limit = renderers
        if idx >= limit:
            raise TargetNotFound(f"fault target {spec.target!r} not in run topology")


class FaultInjector:
    """Deterministic runtime view of a fault schedule.

    Hang and crash faults fire exactly once; slow faults persist from their
    trigger point.  Every fired fault is appended to `fired` with its
    trigger context so runs can assert on the injection log.
    """

    def __init__(self, schedule: Sequence[FaultSpec] = ()):
        self._hangs: List[FaultSpec] = [s for s in schedule if s.kind == "hang"]
        self._slows: List[FaultSpec] = [s for s in schedule if s.kind == "slow"]
        self._crashes: List[FaultSpec] = [s for s in schedule if s.kind == "crash" and s.at_ms is not None]
        self._task_crashes: List[FaultSpec] = [s for s in schedule if s.kind == "crash" and s.at_task is not None]
        self._consumed: set = set()
        self.fired: List[dict] = []

    def _fire(self, spec: FaultSpec, **ctx):
        self.fired.append({"kind": spec.kind, "target": spec.target, "factor": spec.factor, **ctx})

    def stage_effect(self, role: str, index: int, task_id: int, now_ms: float):
        """Consulted at each stage start.  Returns ("hang", 1.0),
        ("crash", 1.0), ("slow", factor) or None."""
        for spec in self._task_crashes:
            if id(spec) not in self._consumed and spec.matches(role, index) and task_id == spec.at_task:
                self._consumed.add(id(spec))
                self._fire(spec, task_id=task_id, time_ms=now_ms, role=role, index=index)
                return ("crash", 1.0)
        for spec in self._hangs:
            if id(spec) in self._consumed or not spec.matches(role, index):
                continue
            due = (spec.at_task is not None and task_id == spec.at_task) or (
                spec.at_ms is not None and now_ms >= spec.at_ms
            )
            if due:
                self._consumed.add(id(spec))
                self._fire(spec, task_id=task_id, time_ms=now_ms, role=role, index=index)
                return ("hang", 1.0)
        factor = 1.0
        for spec in self._slows:
            due = (spec.at_task is not None and task_id >= spec.at_task) or (
                spec.at_ms is not None and now_ms >= spec.at_ms
            )
            if due and spec.matches(role, index):
                if id(spec) not in self._consumed:
                    self._consumed.add(id(spec))
                    self._fire(spec, task_id=task_id, time_ms=now_ms, role=role, index=index)
                factor *= spec.factor
        if factor != 1.0:
            return ("slow", factor)
        return None

    def crashes_due(self, now_ms: float) -> List[FaultSpec]:
        """Time-triggered crash faults that should fire at or before now."""
        due = []
        for spec in self._crashes:
            if id(spec) not in self._consumed and now_ms >= spec.at_ms:
                self._consumed.add(id(spec))
                self._fire(spec, time_ms=now_ms)
                due.append(spec)
        return due

    def next_crash_ms(self) -> Optional[float]:
        pending = [s.at_ms for s in self._crashes if id(s) not in self._consumed]
        return min(pending) if pending else None


# ---------------------------------------------------------------------------
# Heterogeneous task pools for scaling sweeps


def sweep_task_pool(seed: int, count: int = 2560, mean_ms: float = 1000.0, sigma: float = 0.8) -> Tuple[int, ...]:
    """Per-task fused durations (microseconds) for cluster scaling sweeps.

    Lognormal with the given spread; sigma=0.8 gives a tail heavy enough
    that static partitioning visibly suffers from stragglers while pull
    scheduling keeps the tail loss moderate.
    """
    mu, sg = lognormal_params_for_mean(mean_ms, sigma)
    rng = derive_stream(seed, "sweep-pool", count)
    return tuple(max(1, round(rng.lognormvariate(mu, sg) * 1000.0)) for _ in range(count))
