"""Training position and its binary encoding.

Blob layout, all integers little-endian::

    b"SKCK" | u16 version | u32 n_sections
    per section: u16 name_len | name | u64 payload_len | u32 crc32(payload) | payload
"""

from __future__ import annotations

import io
import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"SKCK"
VERSION = 1


class CorruptCheckpointError(ValueError):
    pass


@dataclass
class TrainState:
    epoch: int = 0
    global_step: int = 0
    batch_index: int = 0  # next batch of ``epoch`` to train on
    epoch_seed: int | None = None  # batch-plan seed drawn when ``epoch`` started
    rng_state: dict = field(default_factory=dict)
    parameters: np.ndarray = field(default_factory=lambda: np.zeros(0))
    optimizer_state: dict = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrainState):
            return NotImplemented
        return (self.epoch, self.global_step, self.batch_index, self.epoch_seed, self.rng_state,
                self.optimizer_state) == (other.epoch, other.global_step, other.batch_index, other.epoch_seed,
                                          other.rng_state, other.optimizer_state) \
            and self.parameters.dtype == other.parameters.dtype \
            and np.array_equal(self.parameters, other.parameters)

    def to_bytes(self) -> bytes:
        meta = {"epoch": self.epoch, "global_step": self.global_step, "batch_index": self.batch_index,
                "epoch_seed": self.epoch_seed}
        buf = io.BytesIO()
        np.save(buf, np.ascontiguousarray(self.parameters), allow_pickle=False)
        sections = [
            ("meta", json.dumps(meta, sort_keys=True).encode()),
            ("rng", json.dumps(self.rng_state, sort_keys=True).encode()),
            ("optimizer", json.dumps(self.optimizer_state, sort_keys=True).encode()),
            ("parameters", buf.getvalue()),
        ]
        out = [MAGIC, struct.pack("<HI", VERSION, len(sections))]
        for name, payload in sections:
            raw = name.encode()
            out.append(struct.pack("<H", len(raw)) + raw)
            out.append(struct.pack("<QI", len(payload), zlib.crc32(payload)))
            out.append(payload)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "TrainState":
        sections = _read_sections(blob)
        missing = {"meta", "rng", "optimizer", "parameters"} - set(sections)
        if missing:
            raise CorruptCheckpointError(f"missing sections {sorted(missing)}")
        meta = json.loads(sections["meta"])
        params = np.load(io.BytesIO(sections["parameters"]), allow_pickle=False)
        return cls(meta["epoch"], meta["global_step"], meta["batch_index"], meta["epoch_seed"],
                   json.loads(sections["rng"]), params, json.loads(sections["optimizer"]))


def _read_sections(blob: bytes) -> dict:
    if blob[:4] != MAGIC:
        raise CorruptCheckpointError("not a checkpoint blob")
    try:
        version, n = struct.unpack_from("<HI", blob, 4)
        if version != VERSION:
            raise CorruptCheckpointError(f"unsupported blob version {version}")
        pos, out = 10, {}
        for _ in range(n):
            (name_len,) = struct.unpack_from("<H", blob, pos)
            name = blob[pos + 2: pos + 2 + name_len].decode()
            pos += 2 + name_len
            length, crc = struct.unpack_from("<QI", blob, pos)
            pos += 12
            payload = blob[pos: pos + length]
            if len(payload) != length:
                raise CorruptCheckpointError(f"section {name!r} truncated")
            if zlib.crc32(payload) != crc:
                raise CorruptCheckpointError(f"checksum mismatch in section {name!r}")
            out[name] = payload
            pos += length
    except (struct.error, UnicodeDecodeError) as e:
        raise CorruptCheckpointError(f"malformed blob: {e}") from None
    if pos != len(blob):
        raise CorruptCheckpointError("trailing bytes after last section")
    return out
