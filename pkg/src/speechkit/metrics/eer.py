"""Equal error rate of speaker-verification scores."""

from __future__ import annotations

import numpy as np


def _rates(targets: np.ndarray, nontargets: np.ndarray, thresholds: np.ndarray):
    # FAR: nontarget >= t ; FRR: target < t
    far = 1.0 - np.searchsorted(nontargets, thresholds, side="left") / nontargets.size
    frr = np.searchsorted(targets, thresholds, side="left") / targets.size
    return far, frr


def eer(targets, nontargets) -> tuple[float, float]:
    """Return ``(eer_percent, threshold)``.

    Thresholds are swept over the midpoints of the pooled sorted scores plus
    one point below and one above the score range. The EER is read off where
    FAR - FRR changes sign, interpolating linearly between the two sweep
    points that bracket the crossing.
    """
    t = np.sort(np.asarray(targets, dtype=np.float64).ravel())
    n = np.sort(np.asarray(nontargets, dtype=np.float64).ravel())
    if t.size == 0 or n.size == 0:
        raise ValueError("EER needs at least one target and one nontarget score")
    pooled = np.unique(np.concatenate([t, n]))
    thr = np.concatenate([[pooled[0] - 1.0], 0.5 * (pooled[:-1] + pooled[1:]), [pooled[-1] + 1.0]])
    far, frr = _rates(t, n, thr)
    diff = far - frr
    i = int(np.argmax(diff <= 0))  # diff[0] = 1 > 0 and diff[-1] = -1
    if diff[i] == 0:
        return 100.0 * float(far[i]), float(thr[i])
    d0, d1 = diff[i - 1], diff[i]
    alpha = d0 / (d0 - d1)
    rate = far[i - 1] + alpha * (far[i] - far[i - 1])
    return 100.0 * float(rate), float(thr[i - 1] + alpha * (thr[i] - thr[i - 1]))


def read_scores(path) -> np.ndarray:
    """One score per line (extra whitespace-separated columns: last one is used)."""
    vals = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            fields = line.split()
            if fields:
                vals.append(float(fields[-1]))
    return np.asarray(vals)
