"""Compiled vs numpy jet kernels.

Times the two kernel entry points on random coefficient blocks, then an
end-to-end workload (second derivatives through the Schouten residual and one
identity suite) under each backend.  Run with ``python3 benchmarks/bench_kernel.py``.
"""

from __future__ import annotations

import argparse
import timeit
from pathlib import Path

import numpy as np

from liftcalc import _jetcore, jet
from liftcalc.dsl import load_model
from liftcalc.suites import run_suite

try:
    from liftcalc import _jetkernel
except ImportError:
    _jetkernel = None

GALLERY = Path(jet.__file__).parent / "gallery"


def best_of(fn, repeat: int) -> float:
    number, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def kernel_rows(batch: int, repeat: int):
    gen = np.random.default_rng(0)
    rows = []
    for order in (1, 2, 3, 4):
        size = 1 << order
        a, b = gen.standard_normal((size, batch)), gen.standard_normal((size, batch))
        coeffs = gen.standard_normal((6, batch))
        nil = a.copy()
        nil[0] = 0.0
        for name, args in (("mul", (a, b)), ("horner", (coeffs, nil))):
            ref = getattr(_jetcore, name)(*args)
            t_np = best_of(lambda: getattr(_jetcore, name)(*args), repeat)
            if _jetkernel is None:
                rows.append((name, order, t_np, None, None))
                continue
            out = getattr(_jetkernel, name)(*args)
            t_c = best_of(lambda: getattr(_jetkernel, name)(*args), repeat)
            rows.append((name, order, t_np, t_c, float(np.max(np.abs(np.asarray(out) - ref)))))
    return rows


def workload_rows(repeat: int):
    pi = load_model(GALLERY / "lie_poisson_so3.model").bivectors["pi"]
    pts = [np.linspace(-1, 1, 200) + 0.1 * i for i in range(3)]
    tasks = {
        "schouten residual (so3 dual, 200 pts)": lambda: pi.schouten_residual(pts),
        "lifts suite (so3, 30 pts)": lambda: run_suite("lifts", GALLERY / "so3.model", points=30, seed=0),
    }
    rows = []
    for label, task in tasks.items():
        times = {}
        for backend in jet.available_backends():
            jet.set_backend(backend)
            times[backend] = min(timeit.repeat(task, number=1, repeat=repeat))
        rows.append((label, times))
    jet.set_backend("compiled" if "compiled" in jet.available_backends() else "numpy")
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=256, help="sample points per coefficient")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"backends: {', '.join(jet.available_backends())}")
    print(f"\nkernels, batch {args.batch} (time per call)")
    print(f"  {'kernel':<8}{'order':>6}{'numpy':>12}{'compiled':>12}{'speedup':>9}{'max diff':>11}")
    for name, order, t_np, t_c, diff in kernel_rows(args.batch, args.repeat):
        if t_c is None:
            print(f"  {name:<8}{order:>6}{t_np * 1e6:>10.1f}us{'-':>12}")
        else:
            print(f"  {name:<8}{order:>6}{t_np * 1e6:>10.1f}us{t_c * 1e6:>10.1f}us{t_np / t_c:>8.2f}x{diff:>11.1e}")

    print("\nend to end (best wall time)")
    for label, times in workload_rows(max(1, args.repeat // 2)):
        cells = "  ".join(f"{b} {t * 1e3:8.1f} ms" for b, t in sorted(times.items()))
        print(f"  {label:<40}{cells}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
