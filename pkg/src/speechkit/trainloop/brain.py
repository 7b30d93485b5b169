"""Staged epoch loop with SGD and resumable checkpoints."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..batching import iterate_batches, plan_batches
from .checkpoint import Checkpointer, find_best
from .state import TrainState

log = logging.getLogger(__name__)


class Stage(enum.Enum):
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"


class NonFiniteLossError(FloatingPointError):
    def __init__(self, epoch: int, step: int, ids):
        self.epoch, self.step, self.ids = epoch, step, list(ids)
        super().__init__(f"non-finite loss at epoch {epoch}, step {step}, batch {self.ids}")


@dataclass(frozen=True)
class SGD:
    learning_rate: float

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        params -= self.learning_rate * grad

    def state_dict(self) -> dict:
        return {"kind": "SGD", "learning_rate": self.learning_rate}


class StaticBatches:
    """The same batch list every epoch."""

    def __init__(self, batches: Sequence):
        self.batches = list(batches)

    def epoch_batches(self, seed: int) -> Sequence:
        return self.batches


class PlannedBatches:
    """Batches planned afresh each epoch from a pipeline, seeded by the loop's RNG."""

    def __init__(self, pipeline, lengths: dict, strategy: str = "random", numeric_keys=None, **plan_kwargs):
        self.pipeline, self.lengths = pipeline, lengths
        self.strategy, self.numeric_keys, self.plan_kwargs = strategy, numeric_keys, plan_kwargs

    def epoch_batches(self, seed: int) -> Sequence:
        plan = plan_batches(self.lengths, self.strategy, seed=seed, **self.plan_kwargs)
        return _LazyBatches(self.pipeline, plan, self.numeric_keys)


class _LazyBatches:
    def __init__(self, pipeline, plan, numeric_keys):
        self.pipeline, self.plan, self.numeric_keys = pipeline, plan, numeric_keys

    def __len__(self) -> int:
        return len(self.plan)

    def __getitem__(self, i):
        return next(iterate_batches(self.pipeline, self.plan, self.numeric_keys, start=i))[1]


def _as_source(data):
    if data is None or hasattr(data, "epoch_batches"):
        return data
    return StaticBatches(data)


def _batch_ids(batch) -> list:
    try:
        return list(batch["id"])
    except (KeyError, TypeError, IndexError):
        return []


class Brain:
    """Subclass and override :meth:`compute_forward` and :meth:`compute_objectives`.

    ``compute_objectives`` returns ``(loss, gradient)`` where the gradient
    has one entry per parameter. Parameters live in ``self.params`` as a
    flat float vector; ``self.rng`` is the loop's generator and is saved
    with every checkpoint.
    """

    def __init__(self, params, optimizer: SGD, checkpointer: Checkpointer | None = None, seed: int = 0):
        self.params = np.array(params, dtype=np.float64)
        self.optimizer = optimizer
        self.checkpointer = checkpointer
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self.state = TrainState(parameters=self.params)

    # -- overridable --

    def compute_forward(self, batch, stage: Stage):
        raise NotImplementedError

    def compute_objectives(self, predictions, batch, stage: Stage):
        raise NotImplementedError

    def on_stage_start(self, stage: Stage, epoch: int) -> None:
        pass

    def on_stage_end(self, stage: Stage, epoch: int, stats: dict) -> None:
        pass

    # -- loop --

    def _snapshot(self) -> TrainState:
        s = self.state
        return TrainState(s.epoch, s.global_step, s.batch_index, s.epoch_seed,
                          self.rng.bit_generator.state, self.params.copy(), self.optimizer.state_dict())

    def _restore(self, state: TrainState) -> None:
        if state.parameters.shape != self.params.shape:
            raise ValueError(f"checkpoint has {state.parameters.shape} parameters, model has {self.params.shape}")
        self.params[...] = state.parameters
        self.rng.bit_generator.state = state.rng_state
        self.state = TrainState(state.epoch, state.global_step, state.batch_index, state.epoch_seed,
                                parameters=self.params)

    def fit_batch(self, batch) -> float:
        predictions = self.compute_forward(batch, Stage.TRAIN)
        loss, grad = self.compute_objectives(predictions, batch, Stage.TRAIN)
        loss = float(loss)
        if not math.isfinite(loss):
            raise NonFiniteLossError(self.state.epoch, self.state.global_step, _batch_ids(batch))
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != self.params.shape:
            raise ValueError(f"gradient shape {grad.shape} does not match parameters {self.params.shape}")
        self.optimizer.step(self.params, grad)
        self.state.global_step += 1
        return loss

    def evaluate_batch(self, batch, stage: Stage) -> float:
        predictions = self.compute_forward(batch, stage)
        loss, _ = self.compute_objectives(predictions, batch, stage)
        return float(loss)

    def _run_eval(self, source, stage: Stage, epoch: int) -> float:
        self.on_stage_start(stage, epoch)
        self.params.flags.writeable = False
        try:
            losses = [self.evaluate_batch(b, stage) for b in source.epoch_batches(0)]
        finally:
            self.params.flags.writeable = True
        avg = float(np.mean(losses)) if losses else float("nan")
        self.on_stage_end(stage, epoch, {"loss": avg})
        return avg

    def fit(self, epochs, train_set, valid_set=None) -> TrainState:
        """Train over ``epochs`` (an iterable of epoch numbers), resuming from the latest checkpoint."""
        train, valid = _as_source(train_set), _as_source(valid_set)
        if self.checkpointer is not None:
            recovered = self.checkpointer.recover()
            if recovered is not None:
                self._restore(recovered)
                log.info("resumed at epoch %d, step %d, batch %d", recovered.epoch,
                         recovered.global_step, recovered.batch_index)
        for epoch in epochs:
            if epoch < self.state.epoch:
                continue
            if epoch > self.state.epoch or self.state.epoch_seed is None:
                self.state.epoch, self.state.batch_index = epoch, 0
                self.state.epoch_seed = int(self.rng.integers(2**31))
            batches = train.epoch_batches(self.state.epoch_seed)
            if not len(batches):
                raise ValueError("training set yields no batches")
            self.on_stage_start(Stage.TRAIN, epoch)
            total, count = 0.0, 0
            for i in range(self.state.batch_index, len(batches)):
                total += self.fit_batch(batches[i])
                count += 1
                self.state.batch_index = i + 1
                if self.checkpointer is not None and i + 1 < len(batches) and self.checkpointer.due(self.state):
                    self.checkpointer.save(self._snapshot(), {})
            stats = {"train_loss": total / count if count else float("nan")}
            self.on_stage_end(Stage.TRAIN, epoch, {"loss": stats["train_loss"]})
            if valid is not None:
                stats["valid_loss"] = self._run_eval(valid, Stage.VALID, epoch)
            self.state.epoch, self.state.batch_index, self.state.epoch_seed = epoch + 1, 0, None
            if self.checkpointer is not None:
                self.checkpointer.save(self._snapshot(), stats, end_of_epoch=True)
        return self._snapshot()

    def evaluate(self, test_set, best: tuple[str, str] | None = None) -> float:
        """Average TEST loss; ``best=(metric, "min"|"max")`` first loads that checkpoint."""
        if best is not None:
            if self.checkpointer is None:
                raise ValueError("loading the best checkpoint needs a checkpointer")
            self._restore(find_best(self.checkpointer.directory, *best).load())
        return self._run_eval(_as_source(test_set), Stage.TEST, self.state.epoch)
