import hashlib
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechkit.trainloop import (
    SGD,
    Brain,
    Checkpointer,
    CorruptCheckpointError,
    LinearL1,
    NoCheckpointError,
    NonFiniteLossError,
    Stage,
    StaticBatches,
    TrainState,
    find_best,
    latest_checkpoint,
    list_checkpoints,
    recover_latest,
    save_checkpoint,
)
from speechkit.trainloop import checkpoint as ckmod
from speechkit.trainloop.checkpoint import STATE_FILE, TMP_PREFIX
from toyrun import Interrupt, crash_after, make, planned_batches, static_batches


def sample_state(seed=0, n=5):
    rng = np.random.default_rng(seed)
    gen = np.random.Generator(np.random.PCG64(seed))
    gen.normal(size=3)
    return TrainState(epoch=2, global_step=17, batch_index=3, epoch_seed=12345,
                      rng_state=gen.bit_generator.state, parameters=rng.normal(size=n),
                      optimizer_state={"kind": "SGD", "learning_rate": 0.1})


class Scalar(Brain):
    """One parameter p with loss (p - 1)^2."""

    def compute_forward(self, batch, stage):
        return self.params[0]

    def compute_objectives(self, p, batch, stage):
        return (p - 1.0) ** 2, np.array([2.0 * (p - 1.0)])


class TestState:
    def test_round_trip(self):
        s = sample_state()
        assert TrainState.from_bytes(s.to_bytes()) == s

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31), st.integers(0, 64))
    def test_round_trip_property(self, seed, n):
        s = sample_state(seed, n)
        assert TrainState.from_bytes(s.to_bytes()) == s

    def test_bit_flip_detected(self):
        blob = bytearray(sample_state().to_bytes())
        blob[-3] ^= 0x10
        with pytest.raises(CorruptCheckpointError, match="checksum"):
            TrainState.from_bytes(bytes(blob))

    @pytest.mark.parametrize("cut", [0, 3, 11, 40, -1])
    def test_truncation_detected(self, cut):
        blob = sample_state().to_bytes()
        with pytest.raises(CorruptCheckpointError):
            TrainState.from_bytes(blob[:cut])

    def test_trailing_bytes(self):
        with pytest.raises(CorruptCheckpointError, match="trailing"):
            TrainState.from_bytes(sample_state().to_bytes() + b"\0")


class TestCheckpoints:
    def test_save_recover(self, tmp_path):
        s = sample_state()
        c = save_checkpoint(s, tmp_path, {"valid_loss": 1.5})
        assert c.path.name.startswith("CKPT+") and c.metrics == {"valid_loss": 1.5}
        assert sorted(os.listdir(c.path)) == ["meta.yaml", "state.bin"]
        assert recover_latest(tmp_path) == s

    def test_empty_dir(self, tmp_path):
        with pytest.raises(NoCheckpointError):
            recover_latest(tmp_path)
        with pytest.raises(NoCheckpointError):
            find_best(tmp_path, "valid_loss")

    def test_corrupt_blob_on_recover(self, tmp_path):
        c = save_checkpoint(sample_state(), tmp_path)
        blob = bytearray((c.path / STATE_FILE).read_bytes())
        blob[20] ^= 1
        (c.path / STATE_FILE).write_bytes(bytes(blob))
        with pytest.raises(CorruptCheckpointError):
            recover_latest(tmp_path)

    def test_latest_by_epoch_step_time(self, tmp_path):
        s = sample_state()
        for epoch, step, now in [(1, 10, 300.0), (2, 5, 100.0), (2, 5, 200.0), (1, 99, 400.0)]:
            s.epoch, s.global_step = epoch, step
            save_checkpoint(s, tmp_path, now=now)
        c = latest_checkpoint(tmp_path)
        assert (c.meta["epoch"], c.meta["global_step"], c.meta["unix_time"]) == (2, 5, 200.0)

    def test_same_stamp_gets_suffix(self, tmp_path):
        a = save_checkpoint(sample_state(), tmp_path, now=1000.0)
        b = save_checkpoint(sample_state(), tmp_path, now=1000.0)
        assert a.path != b.path and len(list_checkpoints(tmp_path)) == 2

    def test_find_best(self, tmp_path):
        s = sample_state()
        for i, loss in enumerate([3.0, 2.5, 2.7]):
            s.global_step = i
            save_checkpoint(s, tmp_path, {"valid_loss": loss}, now=100.0 + i)
        assert find_best(tmp_path, "valid_loss", "min").metrics["valid_loss"] == 2.5
        assert find_best(tmp_path, "valid_loss", "max").metrics["valid_loss"] == 3.0
        with pytest.raises(ValueError):
            find_best(tmp_path, "valid_loss", "lowest")

    def test_find_best_tie_latest_wins(self, tmp_path):
        s = sample_state()
        for i in range(3):
            s.global_step = i
            save_checkpoint(s, tmp_path, {"acc": 0.9}, now=100.0 + i)
        assert find_best(tmp_path, "acc", "max").meta["global_step"] == 2

    def test_crash_before_rename_ignored(self, tmp_path, monkeypatch):
        good = sample_state(1)
        save_checkpoint(good, tmp_path, now=100.0)

        def boom(src, dst):
            raise OSError("power cut")

        monkeypatch.setattr(ckmod.os, "replace", boom)
        newer = sample_state(2)
        newer.epoch = 9
        with pytest.raises(OSError, match="power cut"):
            save_checkpoint(newer, tmp_path, now=200.0)
        monkeypatch.undo()
        assert any(p.name.startswith(TMP_PREFIX) for p in tmp_path.iterdir())
        assert len(list_checkpoints(tmp_path)) == 1
        assert recover_latest(tmp_path) == good

    def test_half_written_tmp_and_foreign_dirs(self, tmp_path):
        save_checkpoint(sample_state(), tmp_path, now=50.0)
        (tmp_path / (TMP_PREFIX + "CKPT+x")).mkdir()
        (tmp_path / "CKPT+nometa").mkdir()
        (tmp_path / "notes").mkdir()
        assert len(list_checkpoints(tmp_path)) == 1

    def test_retention(self, tmp_path):
        t = [0.0]
        ck = Checkpointer(tmp_path, keep_recent=2, best_metrics={"valid_loss": "min"}, clock=lambda: t[0])
        s = sample_state()
        for i, loss in enumerate([3.0, 1.0, 2.0, 2.5, 2.7]):
            t[0] = 100.0 + i
            s.global_step = i
            ck.save(s, {"valid_loss": loss})
        kept = [c.metrics["valid_loss"] for c in list_checkpoints(tmp_path)]
        assert kept == [1.0, 2.5, 2.7]

    def test_prune_clears_tmp(self, tmp_path):
        ck = Checkpointer(tmp_path)
        (tmp_path / (TMP_PREFIX + "junk")).mkdir()
        ck.save(sample_state())
        assert not any(p.name.startswith(TMP_PREFIX) for p in tmp_path.iterdir())

    def test_due(self):
        t = [0.0]
        ck = Checkpointer("unused", clock=lambda: t[0])
        assert ck.interval_minutes == 15.0
        t[0] = 899.0
        assert not ck.due(TrainState())
        t[0] = 900.0
        assert ck.due(TrainState())
        steps = Checkpointer("unused", interval_steps=3)
        assert [steps.due(TrainState(global_step=k)) for k in range(7)] == [False, False, False, True,
                                                                             False, False, True]


class TestFitBatch:
    def test_scalar_hand_arithmetic(self):
        b = Scalar([0.0], SGD(0.5))
        assert b.fit_batch(None) == 1.0
        assert b.params[0] == 1.0 and b.state.global_step == 1

    def test_lr_zero(self):
        b = Scalar([0.0], SGD(0.0))
        b.fit_batch(None)
        assert b.params[0] == 0.0 and b.state.global_step == 1

    def test_zero_gradient(self):
        b = Scalar([1.0], SGD(0.5))
        assert b.fit_batch(None) == 0.0
        assert b.params[0] == 1.0

    def test_gradient_length_mismatch(self):
        class Bad(Scalar):
            def compute_objectives(self, p, batch, stage):
                return 0.0, np.zeros(2)

        with pytest.raises(ValueError, match="gradient shape"):
            Bad([0.0], SGD(0.1)).fit_batch(None)

    def test_non_finite_loss(self):
        class Nan(Scalar):
            def compute_objectives(self, p, batch, stage):
                return float("nan"), np.zeros(1)

        b = Nan([0.0], SGD(0.1))
        with pytest.raises(NonFiniteLossError) as e:
            b.fit(range(2), [{"id": ["a", "b"]}])
        assert (e.value.epoch, e.value.step, e.value.ids) == (0, 0, ["a", "b"])
        assert "epoch 0" in str(e.value)


def oracle_epoch_losses(W, b, batches, lr, epochs):
    """Plain numpy SGD on mean absolute error, one pre-update loss per batch."""
    W, b, out = W.copy(), b.copy(), []
    for _ in range(epochs):
        losses = []
        for x, t in batches:
            r = np.einsum("oi,bi->bo", W, x) + b - t
            losses.append(np.abs(r).mean())
            s = np.sign(r) / r.size
            W -= lr * np.einsum("bo,bi->oi", s, x)
            b -= lr * s.sum(axis=0)
        out.append(sum(losses) / len(losses))
    return out, W, b


class Recorder(LinearL1):
    def __init__(self, *a, **k):
        super().__init__(*a, **k)
        self.events = []

    def on_stage_start(self, stage, epoch):
        self.events.append(("start", stage, epoch))

    def on_stage_end(self, stage, epoch, stats):
        self.events.append(("end", stage, epoch, stats["loss"]))


class TestFit:
    def test_losses_match_oracle_and_decrease(self):
        data = static_batches()
        brain = make(Recorder)
        W0, b0 = (a.copy() for a in brain.unpack())
        brain.fit(range(15), data)
        losses = [e[3] for e in brain.events if e[0] == "end" and e[1] is Stage.TRAIN]
        expected, W, b = oracle_epoch_losses(W0, b0, [(d["input"], d["target"]) for d in data.batches], 0.1, 15)
        np.testing.assert_allclose(losses, expected, rtol=1e-12)
        np.testing.assert_allclose(brain.unpack()[0], W, rtol=1e-12)
        assert all(a > c for a, c in zip(expected[:5], expected[1:6]))

    def test_stage_order(self):
        brain = make(Recorder)
        brain.fit(range(2), static_batches(), static_batches(seed=1))
        kinds = [(e[0], e[1], e[2]) for e in brain.events]
        assert kinds == [("start", Stage.TRAIN, 0), ("end", Stage.TRAIN, 0), ("start", Stage.VALID, 0),
                         ("end", Stage.VALID, 0), ("start", Stage.TRAIN, 1), ("end", Stage.TRAIN, 1),
                         ("start", Stage.VALID, 1), ("end", Stage.VALID, 1)]

    def test_zero_epochs(self):
        brain = make(LinearL1)
        before = brain.params.copy()
        s = brain.fit(range(0), static_batches())
        assert s.global_step == 0 and s.epoch == 0
        np.testing.assert_array_equal(s.parameters, before)

    def test_empty_train_set(self):
        with pytest.raises(ValueError, match="no batches"):
            make(LinearL1).fit(range(1), [])

    def test_stage_purity(self):
        brain = make(LinearL1)
        brain.fit(range(2), static_batches())
        digest = hashlib.sha256(brain.params.tobytes()).hexdigest()
        brain.evaluate(static_batches(seed=3))
        brain._run_eval(StaticBatches(static_batches(seed=4).batches), Stage.VALID, 0)
        assert hashlib.sha256(brain.params.tobytes()).hexdigest() == digest

    def test_eval_cannot_write(self):
        class Sneaky(LinearL1):
            def compute_forward(self, batch, stage):
                if stage is not Stage.TRAIN:
                    self.params[0] = 99.0
                return super().compute_forward(batch, stage)

        with pytest.raises(ValueError, match="read-only"):
            make(Sneaky).evaluate(static_batches())

    def test_end_of_epoch_metrics_and_best(self, tmp_path):
        brain = make(LinearL1, tmp_path)
        brain.fit(range(4), static_batches(), static_batches(seed=1))
        ckpts = list_checkpoints(tmp_path)
        assert all(c.meta["end_of_epoch"] for c in ckpts)
        assert {"train_loss", "valid_loss"} <= set(ckpts[-1].metrics)
        best = find_best(tmp_path, "valid_loss")
        fresh = make(LinearL1, tmp_path)
        loss = fresh.evaluate(static_batches(seed=1), best=("valid_loss", "min"))
        assert loss == pytest.approx(best.metrics["valid_loss"])


class TestGradient:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        brain = LinearL1(3, 2, SGD(0.1), seed=seed)
        batch = {"input": rng.normal(size=(5, 3)), "target": rng.normal(size=(5, 2))}
        _, grad = brain.compute_objectives(brain.compute_forward(batch, Stage.TRAIN), batch, Stage.TRAIN)
        h = 1e-7
        base = brain.params.copy()
        fd = np.empty_like(base)
        for i in range(base.size):
            vals = []
            for d in (h, -h):
                brain.params[...] = base
                brain.params[i] += d
                vals.append(brain.compute_objectives(brain.compute_forward(batch, Stage.TRAIN), batch,
                                                     Stage.TRAIN)[0])
            fd[i] = (vals[0] - vals[1]) / (2 * h)
        brain.params[...] = base
        # L1 is smooth away from zero residuals, which random data avoids
        np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-9)


def run_with_crash(cls, data, tmp_path, epochs, crash_at, every):
    with pytest.raises(Interrupt):
        make(crash_after(cls, crash_at), tmp_path, every=every).fit(range(epochs), data)
    return make(cls, tmp_path, every=every).fit(range(epochs), data)


class TestResume:
    @pytest.mark.parametrize("crash_at", [3, 4, 9, 14, 17])
    def test_static_bit_identical(self, tmp_path, crash_at):
        data = static_batches()
        oracle = make(LinearL1).fit(range(5), data)
        resumed = run_with_crash(LinearL1, data, tmp_path, 5, crash_at, every=3)
        assert resumed.parameters.tobytes() == oracle.parameters.tobytes()
        assert resumed == oracle

    @pytest.mark.parametrize("crash_at", [6, 9, 11, 22])
    def test_random_batching_bit_identical(self, tmp_path, crash_at):
        data = planned_batches()
        oracle = make(LinearL1).fit(range(4), data)
        resumed = run_with_crash(LinearL1, data, tmp_path, 4, crash_at, every=5)
        assert resumed.parameters.tobytes() == oracle.parameters.tobytes()
        assert resumed.rng_state == oracle.rng_state

    def test_resume_uses_intra_epoch_checkpoint(self, tmp_path):
        data = planned_batches()
        with pytest.raises(Interrupt):
            make(crash_after(LinearL1, 12), tmp_path, every=5).fit(range(4), data)
        state = recover_latest(tmp_path)
        assert state.batch_index not in (0, len(data.epoch_batches(0)))
        assert state.epoch_seed is not None

    def test_k_then_m_epochs(self, tmp_path):
        data = static_batches()
        oracle = make(LinearL1).fit(range(6), data)
        make(LinearL1, tmp_path).fit(range(2), data)
        resumed = make(LinearL1, tmp_path).fit(range(6), data)
        assert resumed == oracle

    def test_finished_run_is_noop(self, tmp_path):
        data = static_batches()
        done = make(LinearL1, tmp_path).fit(range(3), data)
        again = make(LinearL1, tmp_path).fit(range(3), data)
        assert again == done

    def test_shape_mismatch(self, tmp_path):
        make(LinearL1, tmp_path).fit(range(1), static_batches())
        with pytest.raises(ValueError, match="parameters"):
            LinearL1(4, 2, SGD(0.1), Checkpointer(tmp_path)).fit(range(2), static_batches())

