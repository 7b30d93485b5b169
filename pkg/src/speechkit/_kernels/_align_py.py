"""Pure-Python Levenshtein kernels; same contract as the compiled extension."""

import numpy as np

EQ, SUB, DEL, INS = 0, 1, 2, 3


def _fill(ref, hyp):
    n, m = len(ref), len(hyp)
    d = [list(range(m + 1))]
    for i in range(1, n + 1):
        prev = d[-1]
        row = [i] + [0] * m
        r = ref[i - 1]
        for j in range(1, m + 1):
            cost = 0 if r == hyp[j - 1] else 1
            row[j] = min(prev[j - 1] + cost, prev[j] + 1, row[j - 1] + 1)
        d.append(row)
    return d


def _backtrace(ref, hyp, d):
    i, j = len(ref), len(hyp)
    ops, ri, hj = [], [], []
    while i > 0 or j > 0:
        here = d[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and d[i - 1][j - 1] == here:
            op = EQ
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and d[i - 1][j - 1] + 1 == here:
            op = SUB
            i, j = i - 1, j - 1
        elif i > 0 and d[i - 1][j] + 1 == here:
            op = DEL
            i -= 1
        else:
            op = INS
            j -= 1
        ops.append(op)
        ri.append(i if op != INS else -1)
        hj.append(j if op != DEL else -1)
    return ops[::-1], ri[::-1], hj[::-1]


def align_codes(ref, hyp):
    ref = [int(x) for x in ref]
    hyp = [int(x) for x in hyp]
    ops, ri, hj = _backtrace(ref, hyp, _fill(ref, hyp))
    return (np.asarray(ops, dtype=np.int32), np.asarray(ri, dtype=np.int32),
            np.asarray(hj, dtype=np.int32))


def align_error_counts(refs, ref_lens, hyp):
    hyp = [int(x) for x in hyp]
    out = np.empty(len(refs), dtype=np.int32)
    for r, (row, n) in enumerate(zip(np.asarray(refs).tolist(), ref_lens)):
        ref = row[:n]
        ops, _, _ = _backtrace(ref, hyp, _fill(ref, hyp))
        out[r] = sum(1 for op in ops if op != EQ)
    return out
