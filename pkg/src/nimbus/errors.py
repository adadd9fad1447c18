"""Exception hierarchy shared across the runtime."""


class NimbusError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(NimbusError):
    """Invalid pipeline configuration.  `field` names the offending entry."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field


class ZeroWorkers(ConfigError):
    pass


class EmptyStageMap(ConfigError):
    pass


class ProbabilityOutOfRange(ConfigError):
    pass


class UnknownConfigKey(ConfigError):
    pass


class InvalidConfigValue(ConfigError):
    pass


class UnknownPreset(ConfigError):
    pass


class StageError(NimbusError):
    """Failure raised while executing a pipeline stage for one task."""

    def __init__(self, message: str, task_id: int = -1):
        super().__init__(message)
        self.task_id = task_id


class SimulatedLoadFailure(StageError):
    """Load stage drew a failure; the task is aborted and counted as lost."""


class RenderOnInvalidSequence(StageError):
    """Render was invoked on a pruned sequence; this is a caller bug."""


class StorageWriteFailure(StageError):
    """Persisting a record failed; the task is reported as lost."""


class MissingWorkflowMethod(NimbusError):
    """A workflow object does not implement the full five-method contract."""


class NonpositiveLatency(NimbusError):
    """Throughput formulas require strictly positive latencies and windows."""


class UnknownWorker(NimbusError):
    """An event referenced a worker id the scheduler is not tracking."""


class QueueClosedEarly(NimbusError):
    """Internal bug: a queue was torn down while messages were outstanding."""


class NonterminatingConfig(NimbusError):
    """Simulation of a config that can hang forever (hangs, no supervisor)."""


class WorkerNotAlive(NimbusError):
    """A cluster request arrived from a worker not in the Alive state."""


class DuplicateWorkerId(NimbusError):
    """A registration tried to reuse an id with a different descriptor."""


class ContextNotFound(NimbusError):
    """The shared store holds no blob for the granted task's scene_ref."""


class TargetNotFound(NimbusError):
    """A fault schedule entry targets a worker absent from the topology."""
