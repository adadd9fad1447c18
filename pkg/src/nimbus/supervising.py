"""Out-of-band liveness supervision.

Workers publish monotone progress into a status board; an independent
supervisor polls the board, converts silent stalls into fail-stop kills,
and respawns fresh incarnations within a per-slot budget.  The supervisor
never shares mutable state with worker main loops: in thread mode the
worker's heartbeat pump ships record copies, in process mode records
arrive over an OS pipe while kills are real SIGKILLs.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional

from .errors import InvalidConfigValue
from .model import StageKind


@dataclass(frozen=True)
class SupervisorPolicy:
    """Timeout policy.  liveness_timeout must exceed the heartbeat interval
    (and should exceed the longest gap between progress updates, i.e. the
    longest single frame, or healthy workers get killed)."""

    heartbeat_interval_ms: float = 500.0
    liveness_timeout_ms: float = 5000.0
    poll_period_ms: float = 500.0
    max_respawns: int = 3
    kill_grace_ms: float = 0.0

    def __post_init__(self):
        if self.liveness_timeout_ms <= self.heartbeat_interval_ms:
            raise InvalidConfigValue(
                "liveness_timeout_ms must exceed heartbeat_interval_ms",
                field="supervisor.liveness_timeout_ms",
            )
        if self.max_respawns < 0:
            raise InvalidConfigValue("max_respawns must be >= 0", field="supervisor.max_respawns")


@dataclass
class StatusRecord:
    """Latest known execution state of one worker incarnation."""

    worker_id: str
    phase: str = "idle"  # StageKind value or "idle"
    progress_counter: int = 0
    updated_at_ms: float = 0.0
    incarnation: int = 0


class RespawnOutcome(Enum):
    RESPAWNED = "respawned"
    BUDGET_EXHAUSTED = "budget_exhausted"


class StatusBoard:
    """Thread-safe map of worker_id -> StatusRecord copies.

    Rejects regressions: a record is accepted only if its incarnation is
    current and its (progress_counter, updated_at) do not move backward.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._records: Dict[str, StatusRecord] = {}
        self._incarnations: Dict[str, int] = {}

    def current_incarnation(self, worker_id: str) -> int:
        with self._lock:
            return self._incarnations.get(worker_id, 0)

    def bump_incarnation(self, worker_id: str) -> int:
        with self._lock:
            nxt = self._incarnations.get(worker_id, 0) + 1
            self._incarnations[worker_id] = nxt
            self._records.pop(worker_id, None)
            return nxt

    def publish(self, record: StatusRecord) -> bool:
        """Accept a heartbeat copy; returns False if it was rejected as
        stale (old incarnation, counter regression, or time regression)."""
        with self._lock:
            if record.incarnation < self._incarnations.get(record.worker_id, 0):
                return False
            prev = self._records.get(record.worker_id)
            if prev is not None and prev.incarnation == record.incarnation:
                if record.progress_counter < prev.progress_counter:
                    return False
                if record.updated_at_ms < prev.updated_at_ms:
                    return False
            self._incarnations.setdefault(record.worker_id, record.incarnation)
            if record.incarnation > self._incarnations[record.worker_id]:
                self._incarnations[record.worker_id] = record.incarnation
            self._records[record.worker_id] = StatusRecord(**record.__dict__)
            return True

    def snapshot(self) -> Dict[str, StatusRecord]:
        with self._lock:
            return {k: StatusRecord(**v.__dict__) for k, v in self._records.items()}

    def forget(self, worker_id: str):
        with self._lock:
            self._records.pop(worker_id, None)


class LocalStatus:
    """Worker-side status holder.  The worker main loop calls record_progress;
    a separate pump thread copies it out, so a blocked main loop freezes
    updated_at and becomes detectable."""

    def __init__(self, worker_id: str, incarnation: int, clock: Callable[[], float]):
        self._lock = threading.Lock()
        self._clock = clock
        self._record = StatusRecord(worker_id=worker_id, incarnation=incarnation, updated_at_ms=clock())

    def record_progress(self, phase, counter: Optional[int] = None) -> bool:
        """Update phase/progress.  Counter regressions are rejected."""
        phase_str = phase.value if isinstance(phase, StageKind) else str(phase)
        with self._lock:
            if counter is None:
                counter = self._record.progress_counter + 1
            if counter < self._record.progress_counter:
                return False
            self._record.phase = phase_str
            self._record.progress_counter = counter
            self._record.updated_at_ms = self._clock()
            return True

    def copy(self) -> StatusRecord:
        with self._lock:
            return StatusRecord(**self._record.__dict__)


def poll_liveness(board: StatusBoard, policy: SupervisorPolicy, now_ms: float) -> List[str]:
    """Worker ids whose last progress is older than the liveness timeout."""
    stale = []
    for worker_id, record in sorted(board.snapshot().items()):
        if now_ms - record.updated_at_ms > policy.liveness_timeout_ms:
            stale.append(worker_id)
    return stale


class Supervisor:
    """Per-node supervisor: polls the status board, kills stalled workers,
    and asks the runtime to respawn them.

    The runtime supplies three callbacks:
      kill(worker_id, incarnation)      -- non-cooperative termination
      respawn(worker_id, incarnation)   -- start a fresh incarnation
      on_event(kind, payload)           -- metrics sink
    Kills and respawns for one worker are serialized; the poll loop runs
    several times per poll_period so detection latency stays comfortably
    under liveness_timeout + poll_period.
    """

    def __init__(
        self,
        policy: SupervisorPolicy,
        board: StatusBoard,
        kill: Callable[[str, int], None],
        respawn: Callable[[str, int], None],
        on_event: Callable[[str, dict], None],
        clock: Callable[[], float] = None,
    ):
        self.policy = policy
        self.board = board
        self._kill = kill
        self._respawn = respawn
        self._on_event = on_event
        self._clock = clock if clock is not None else (lambda: time.monotonic() * 1000.0)
        self._respawns: Dict[str, int] = {}
        self._dead: set = set()
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def respawn_count(self, worker_id: str) -> int:
        with self._lock:
            return self._respawns.get(worker_id, 0)

    def is_permanently_dead(self, worker_id: str) -> bool:
        with self._lock:
            return worker_id in self._dead

    def kill_and_respawn(self, worker_id: str, cause: str = "hang") -> RespawnOutcome:
        """Force-terminate a worker and start a fresh incarnation, or mark
        the slot permanently dead once the budget is spent."""
        with self._lock:
            if worker_id in self._dead:
                return RespawnOutcome.BUDGET_EXHAUSTED
            incarnation = self.board.current_incarnation(worker_id)
            now = self._clock()
            self._on_event("killed", {"worker_id": worker_id, "cause": cause, "time_ms": now})
            if self.policy.kill_grace_ms > 0:
                time.sleep(self.policy.kill_grace_ms / 1000.0)
            self._kill(worker_id, incarnation)
            used = self._respawns.get(worker_id, 0)
            if used >= self.policy.max_respawns:
                self._dead.add(worker_id)
                self.board.forget(worker_id)
                self._on_event("budget_exhausted", {"worker_id": worker_id, "time_ms": now})
                return RespawnOutcome.BUDGET_EXHAUSTED
            self._respawns[worker_id] = used + 1
            new_incarnation = self.board.bump_incarnation(worker_id)
            self._respawn(worker_id, new_incarnation)
            self._on_event(
                "respawned",
                {"worker_id": worker_id, "incarnation": new_incarnation, "time_ms": self._clock()},
            )
            return RespawnOutcome.RESPAWNED

    def check_once(self) -> List[str]:
        """One poll: detect stalls, kill and respawn each, return the ids."""
        now = self._clock()
        flagged = poll_liveness(self.board, self.policy, now)
        handled = []
        for worker_id in flagged:
            record = self.board.snapshot().get(worker_id)
            if record is None or worker_id in self._dead:
                continue
            detection_latency = now - record.updated_at_ms
            self._on_event(
                "hang_detected",
                {
                    "worker_id": worker_id,
                    "time_ms": now,
                    "detection_latency_ms": detection_latency,
                    "phase": record.phase,
                },
            )
            self.kill_and_respawn(worker_id, cause="hang")
            handled.append(worker_id)
        return handled

    def start(self):
        # Poll at a fraction of the advertised period: the contract is
        # detection within liveness_timeout + poll_period, and the margin
        # absorbs OS scheduling jitter.
        step_s = max(self.policy.poll_period_ms / 4.0, 1.0) / 1000.0

        def loop():
            while not self._stop.wait(step_s):
                self.check_once()

        self._thread = threading.Thread(target=loop, name="supervisor", daemon=True)
        self._thread.start()

    def stop(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
