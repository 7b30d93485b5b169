"""Training orchestration with fault-tolerant checkpoints."""

from .brain import SGD, Brain, NonFiniteLossError, PlannedBatches, Stage, StaticBatches
from .checkpoint import (
    Checkpoint,
    Checkpointer,
    NoCheckpointError,
    find_best,
    latest_checkpoint,
    list_checkpoints,
    recover_latest,
    save_checkpoint,
)
from .reference import LinearL1
from .state import CorruptCheckpointError, TrainState

__all__ = [
    "Brain",
    "Checkpoint",
    "Checkpointer",
    "CorruptCheckpointError",
    "LinearL1",
    "NoCheckpointError",
    "NonFiniteLossError",
    "PlannedBatches",
    "SGD",
    "Stage",
    "StaticBatches",
    "TrainState",
    "find_best",
    "latest_checkpoint",
    "list_checkpoints",
    "recover_latest",
    "save_checkpoint",
]
