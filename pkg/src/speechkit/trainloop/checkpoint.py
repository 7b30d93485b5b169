"""Checkpoint directories ``CKPT+<timestamp>/{state.bin, meta.yaml}``.

A checkpoint is written under a temporary name and renamed into place, so
a crash leaves either a complete directory or a temp directory that
readers ignore.
"""

from __future__ import annotations

import os
import shutil
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import yaml

from .state import CorruptCheckpointError, TrainState

PREFIX = "CKPT+"
TMP_PREFIX = ".tmp-"
STATE_FILE = "state.bin"
META_FILE = "meta.yaml"


class NoCheckpointError(FileNotFoundError):
    pass


@dataclass(frozen=True)
class Checkpoint:
    path: Path
    meta: dict = field(compare=False)

    @property
    def metrics(self) -> dict:
        return self.meta.get("metrics", {})

    @property
    def order_key(self) -> tuple:
        return (self.meta["epoch"], self.meta["global_step"], self.meta["unix_time"])

    def load(self) -> TrainState:
        return TrainState.from_bytes((self.path / STATE_FILE).read_bytes())


def _write(path: Path, data: bytes) -> None:
    with open(path, "wb") as f:
        f.write(data)
        f.flush()
        os.fsync(f.fileno())


def save_checkpoint(state: TrainState, directory, metrics: dict | None = None, end_of_epoch: bool = False,
                    now: float | None = None) -> Checkpoint:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    now = time.time() if now is None else now
    stamp = datetime.fromtimestamp(now, timezone.utc).strftime("%Y%m%dT%H%M%S.%fZ")
    name = PREFIX + stamp
    n = 1
    while (directory / name).exists():
        n += 1
        name = f"{PREFIX}{stamp}-{n}"
    meta = {
        "wall_clock": datetime.fromtimestamp(now, timezone.utc).isoformat(),
        "unix_time": now,
        "epoch": state.epoch,
        "global_step": state.global_step,
        "batch_index": state.batch_index,
        "end_of_epoch": end_of_epoch,
        "metrics": {k: float(v) for k, v in (metrics or {}).items()},
    }
    tmp = directory / (TMP_PREFIX + name)
    tmp.mkdir()
    _write(tmp / STATE_FILE, state.to_bytes())
    _write(tmp / META_FILE, yaml.safe_dump(meta, sort_keys=True).encode())
    final = directory / name
    os.replace(tmp, final)
    dir_fd = os.open(directory, os.O_RDONLY)
    try:
        os.fsync(dir_fd)
    finally:
        os.close(dir_fd)
    return Checkpoint(final, meta)


def list_checkpoints(directory) -> list[Checkpoint]:
    """Complete checkpoints, oldest first. Temp and foreign directories are skipped."""
    directory = Path(directory)
    if not directory.is_dir():
        return []
    out = []
    for p in directory.iterdir():
        if not (p.is_dir() and p.name.startswith(PREFIX)):
            continue
        try:
            meta = yaml.safe_load((p / META_FILE).read_text())
        except (OSError, yaml.YAMLError):
            continue
        if not isinstance(meta, dict) or not (p / STATE_FILE).is_file():
            continue
        out.append(Checkpoint(p, meta))
    return sorted(out, key=lambda c: c.order_key)


def latest_checkpoint(directory) -> Checkpoint:
    ckpts = list_checkpoints(directory)
    if not ckpts:
        raise NoCheckpointError(f"no checkpoint in {directory}")
    return ckpts[-1]


def recover_latest(directory) -> TrainState:
    return latest_checkpoint(directory).load()


def find_best(directory, metric: str, direction: str = "min") -> Checkpoint:
    """Extremal recorded ``metric``; among equal values the most recent wins."""
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    sign = 1 if direction == "min" else -1
    best = None
    for c in list_checkpoints(directory):
        if metric not in c.metrics:
            continue
        if best is None or sign * c.metrics[metric] <= sign * best.metrics[metric]:
            best = c
    if best is None:
        raise NoCheckpointError(f"no checkpoint in {directory} records {metric!r}")
    return best


class Checkpointer:
    """Save policy plus retention for one run directory.

    Intra-epoch saves happen every ``interval_minutes`` of wall clock, or
    every ``interval_steps`` steps when that is set. Retention keeps the
    ``keep_recent`` newest checkpoints and the best one for each entry of
    ``best_metrics`` (``{name: "min" | "max"}``).
    """

    def __init__(self, directory, interval_minutes: float = 15.0, interval_steps: int | None = None,
                 keep_recent: int = 2, best_metrics: dict | None = None, clock=time.time):
        self.directory = Path(directory)
        self.interval_minutes = interval_minutes
        self.interval_steps = interval_steps
        self.keep_recent = keep_recent
        self.best_metrics = dict(best_metrics or {})
        self.clock = clock
        self._last_save = clock()

    def due(self, state: TrainState) -> bool:
        if self.interval_steps is not None:
            return state.global_step > 0 and state.global_step % self.interval_steps == 0
        return self.clock() - self._last_save >= self.interval_minutes * 60

    def save(self, state: TrainState, metrics: dict | None = None, end_of_epoch: bool = False) -> Checkpoint:
        ckpt = save_checkpoint(state, self.directory, metrics, end_of_epoch, now=self.clock())
        self._last_save = self.clock()
        self.prune()
        return ckpt

    def prune(self) -> None:
        ckpts = list_checkpoints(self.directory)
        keep = {c.path for c in ckpts[-self.keep_recent:]} if self.keep_recent > 0 else set()
        for metric, direction in self.best_metrics.items():
            try:
                keep.add(find_best(self.directory, metric, direction).path)
            except NoCheckpointError:
                pass
        for c in ckpts:
            if c.path not in keep:
                shutil.rmtree(c.path)
        for p in self.directory.iterdir():
            if p.name.startswith(TMP_PREFIX) and p.is_dir():
                shutil.rmtree(p)

    def recover(self) -> TrainState | None:
        try:
            return recover_latest(self.directory)
        except NoCheckpointError:
            return None


__all__ = [
    "Checkpoint",
    "Checkpointer",
    "CorruptCheckpointError",
    "NoCheckpointError",
    "find_best",
    "latest_checkpoint",
    "list_checkpoints",
    "recover_latest",
    "save_checkpoint",
]
