"""Random dynamic-item graphs with instrumented producers."""

import random

from speechkit.datapipe import DynamicItemSpec, Pipeline
from speechkit.manifest import Manifest


def random_dag(seed):
    """Return ``(pipeline, log, deps)``.

    ``log`` collects every item key a producer computes. ``deps`` maps each
    dynamic key to the keys that must exist before it can be computed; a
    later yield of a chain depends on the earlier yield.
    """
    rng = random.Random(seed)
    static = [f"s{i}" for i in range(rng.randint(1, 3))]
    known = list(static)
    specs, deps = [], {}
    log = []
    for i in range(rng.randint(3, 12)):
        inputs = rng.sample(known, rng.randint(0, min(3, len(known))))
        n_out = rng.choice([1, 1, 2, 3])
        outs = [f"d{i}_{j}" for j in range(n_out)]
        for j, key in enumerate(outs):
            deps[key] = set(inputs) | ({outs[j - 1]} if j else set())
        specs.append(_make_spec(inputs, outs, n_out > 1, log))
        known.extend(outs)
    rng.shuffle(specs)  # registration order need not follow dependencies
    manifest = Manifest({f"ex{j}": {k: j for k in static} for j in range(3)})
    pipe = Pipeline(manifest, specs)
    return pipe, log, deps, static, known


def _make_spec(inputs, outs, chain, log):
    if chain:
        def body(*args):
            acc = sum(args)
            for key in outs:
                log.append(key)
                acc += 1
                yield acc
    else:
        def body(*args):
            log.append(outs[0])
            return sum(args) + 1
    return DynamicItemSpec.from_func(body, inputs, outs)


def closure(keys, deps):
    out, todo = set(), list(keys)
    while todo:
        k = todo.pop()
        if k in deps and k not in out:
            out.add(k)
            todo.extend(deps[k])
    return out
