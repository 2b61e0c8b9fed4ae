"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from qutrit_mcmd import _kernels_py
from qutrit_mcmd.clifford import clifford_sequence
from qutrit_mcmd.experiments.lrb import clifford_superops, device_leaky_gate
from qutrit_mcmd.iq import default_blob_model, synthesize_labeled, train_qda

try:
    from qutrit_mcmd import _kernels as compiled
except ImportError:
    compiled = None


def cases():
    rng = np.random.default_rng(0)
    cdf = np.cumsum([0.1, 0.2, 0.3, 0.4])
    uniforms = rng.random(10**6)
    batch = rng.random((1000, 1000))
    ops = clifford_superops(device_leaky_gate())
    seq = np.asarray(clifford_sequence(3000, 1), dtype=np.int64)
    rho = np.zeros(9, dtype=complex)
    rho[0] = 1
    pts, labels = synthesize_labeled(default_blob_model(), 3000, 2)
    qda = train_qda(pts, labels)
    probe = synthesize_labeled(default_blob_model(), 100000, 3)[0]
    return {
        "inverse_cdf_counts (1e6 shots)": ("inverse_cdf_counts", (cdf, uniforms)),
        "inverse_cdf_counts_batch (1000x1000)": ("inverse_cdf_counts_batch", (cdf, batch)),
        "evolve_sequence (m=3000)": ("evolve_sequence", (ops, seq, rho)),
        "qda_classify (3e5 points)": ("qda_classify", (probe, qda.means, qda._inv_covs, qda._offsets)),
    }


def best_time(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    print(f"{'kernel':40s} {'numpy [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, (name, fargs) in cases().items():
        t_py = best_time(getattr(_kernels_py, name), fargs, args.repeat)
        if compiled is None:
            print(f"{label:40s} {t_py * 1e3:12.2f} {'n/a':>12s} {'':>8s}")
            continue
        t_c = best_time(getattr(compiled, name), fargs, args.repeat)
        print(f"{label:40s} {t_py * 1e3:12.2f} {t_c * 1e3:12.2f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
