#!/usr/bin/env python3
"""Compare the numba kernels with the pure-numpy fallback.

FLEXDIAG_JIT is read at import time, so each mode runs in its own child
process. Task generation is the first use of the kernels, so its time
includes loading the numba cache; it and one warm-up diagnosis are
reported apart from the timed runs.

    python3 benchmarks/bench_kernels.py --features 50 100 --repeats 5
"""
import argparse
import json
import os
import subprocess
import sys
import time


def _tasks(sizes, seed):
    from flexdiag.featuremodel import (GenerationParams, NoAlternativeSolution, generate_random_fm,
                                       generate_reconfig_requirements, reconfiguration_task,
                                       sample_configuration)

    out = []
    for n in sizes:
        for k in range(3):
            fm = generate_random_fm(GenerationParams(num_features=n, ctc_fraction=0.1, seed=seed + 31 * n + k))
            S = sample_configuration(fm, seed + k)
            try:
                reqs = generate_reconfig_requirements(fm, S, 0.3, seed + k + 1)
            except NoAlternativeSolution:
                continue
            out.append((n, reconfiguration_task(fm, S, reqs)))
    return out


def worker(sizes, repeats, seed):
    t0 = time.perf_counter()
    from flexdiag._accel import JIT_ENABLED
    from flexdiag.engine import CheckSession
    from flexdiag.reconfig import diagnose
    import_s = time.perf_counter() - t0

    t0 = time.perf_counter()
    tasks = _tasks(sizes, seed)  # first use of the kernels, so this includes loading them
    setup_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    diagnose(tasks[0][1], 1, CheckSession())
    warm_s = time.perf_counter() - t0

    rows = []
    for n, task in tasks:
        for m in (1, 4):
            best, checks = float("inf"), 0
            for _ in range(repeats):
                s = CheckSession()
                t0 = time.perf_counter()
                d = diagnose(task, m, s)
                best = min(best, time.perf_counter() - t0)
                checks = d.checks
            rows.append({"features": n, "m": m, "checks": checks, "best_ms": best * 1000})
    print(json.dumps({"jit": JIT_ENABLED, "import_s": import_s, "setup_s": setup_s, "warmup_s": warm_s, "rows": rows}))


def run_mode(jit, args):
    env = dict(os.environ, FLEXDIAG_JIT="1" if jit else "0")
    cmd = [sys.executable, __file__, "--worker", "--repeats", str(args.repeats), "--seed", str(args.seed),
           "--features", *map(str, args.features)]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--features", type=int, nargs="+", default=[50, 100])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.features, args.repeats, args.seed)
        return

    jit, pure = run_mode(True, args), run_mode(False, args)
    print(f"import      jit {jit['import_s']:.2f}s   pure {pure['import_s']:.2f}s")
    print(f"task setup  jit {jit['setup_s']:.2f}s   pure {pure['setup_s']:.2f}s")
    print(f"warm-up     jit {jit['warmup_s']:.2f}s   pure {pure['warmup_s']:.2f}s")
    print(f"{'features':>8} {'m':>2} {'checks':>6} {'jit ms':>9} {'pure ms':>9} {'speedup':>8}")
    total_j = total_p = 0.0
    for a, b in zip(jit["rows"], pure["rows"]):
        # both modes run the same search, so the check counts must agree
        assert a["checks"] == b["checks"], (a, b)
        total_j += a["best_ms"]
        total_p += b["best_ms"]
        print(f"{a['features']:>8} {a['m']:>2} {a['checks']:>6} {a['best_ms']:>9.2f} {b['best_ms']:>9.2f} "
              f"{b['best_ms'] / max(a['best_ms'], 1e-9):>7.1f}x")
    print(f"total       jit {total_j:.1f} ms   pure {total_p:.1f} ms   speedup {total_p / max(total_j, 1e-9):.1f}x")


if __name__ == "__main__":
    main()
