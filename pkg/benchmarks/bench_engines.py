"""Compare the compiled and pure-Python kernels, plus the monolithic engine.

    python3 benchmarks/bench_engines.py --repeat 3
"""

from __future__ import annotations

import argparse
import random
import statistics
import time
from contextlib import contextmanager

from fractran import catalog
from fractran.testing import random_program, random_start
from fractran.vm import engine, run


@contextmanager
def kernel(name: str):
    saved = engine._ckernel
    if name == "python":
        engine._ckernel = None
    elif saved is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")
    try:
        yield
    finally:
        engine._ckernel = saved


def _fuzz_corpus(cases: int, seed: int = 0):
    rng = random.Random(seed)
    return [(random_program(rng), random_start(rng)) for _ in range(cases)]


def workloads(args):
    pigame = catalog.get("PIGAME").program
    corpus = _fuzz_corpus(args.cases)
    return {
        "pigame n=0 (accelerated)": lambda eng: run(pigame, catalog.start_state("PIGAME", 0), 10**7, engine=eng),
        # stops on the budget; a steady stream of single steps
        "pigame n=1, 2e5 steps": lambda eng: run(pigame, catalog.start_state("PIGAME", 1), 2 * 10**5, engine=eng),
        f"fuzz x{args.cases} (1000 steps)": lambda eng: [run(p, s, 1000, engine=eng) for p, s in corpus],
    }


def _time(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--cases", type=int, default=2000, help="fuzz programs per timing")
    args = parser.parse_args(argv)

    print(f"{'workload':34} {'engine':12} {'cython':>10} {'python':>10} {'speedup':>8}")
    for label, job in workloads(args).items():
        engines = ["accelerated"] if "accelerated" in label else ["factored", "monolithic"]
        for eng in engines:
            if eng == "monolithic":
                # no kernel involved; one timing is enough
                t = _time(lambda: job(eng), args.repeat)
                print(f"{label:34} {eng:12} {'-':>10} {t:10.3f} {'-':>8}")
                continue
            with kernel("cython"):
                tc = _time(lambda: job(eng), args.repeat)
            with kernel("python"):
                tp = _time(lambda: job(eng), args.repeat)
            print(f"{label:34} {eng:12} {tc:10.3f} {tp:10.3f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
