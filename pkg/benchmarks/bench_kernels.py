"""Time the numba and numpy CRF kernels side by side.

    python3 benchmarks/bench_kernels.py [--lengths 5,20,80] [--repeats 200]

Both backends are imported directly, so the FUZZYRANK_NO_NUMBA flag does not
matter here. Results are checked for agreement before timing.
"""

import argparse
import timeit

import numpy as np

from fuzzyrank._accel import HAVE_NUMBA
from fuzzyrank.tagger import kernels as K
from fuzzyrank.tagger.crf import START_PENALTY, TRANSITION_PENALTY


def make_inputs(T, rng):
    E = rng.uniform(-1, 1, (T, 3))
    trans = rng.uniform(-1, 1, (3, 3))
    return E, trans


def run_forward_backward(fwd, bwd, marg, E, trans):
    alpha, log_z = fwd(E, trans)
    beta = bwd(E, trans)
    return marg(E, trans, alpha, beta, log_z)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--lengths", default="5,20,80")
    p.add_argument("--repeats", type=int, default=200)
    args = p.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)

    print(f"{'kernel':<16}{'T':>5}{'numba us':>12}{'numpy us':>12}{'speedup':>10}")
    for T in (int(s) for s in args.lengths.split(",")):
        E, trans = make_inputs(T, rng)
        # warm-up compiles and doubles as an agreement check
        u_nb, p_nb = run_forward_backward(K.forward_nb, K.backward_nb, K.marginals_nb, E, trans)
        u_np, p_np = run_forward_backward(K.forward_np, K.backward_np, K.marginals_np, E, trans)
        assert np.allclose(u_nb, u_np, atol=1e-12) and np.allclose(p_nb, p_np, atol=1e-12)
        v_nb = K.viterbi_nb(E, trans, START_PENALTY, TRANSITION_PENALTY)
        v_np = K.viterbi_np(E, trans, START_PENALTY, TRANSITION_PENALTY)
        assert (v_nb[0] == v_np[0]).all()

        cases = {
            "fwd-bwd": (
                lambda: run_forward_backward(K.forward_nb, K.backward_nb, K.marginals_nb, E, trans),
                lambda: run_forward_backward(K.forward_np, K.backward_np, K.marginals_np, E, trans),
            ),
            "viterbi": (
                lambda: K.viterbi_nb(E, trans, START_PENALTY, TRANSITION_PENALTY),
                lambda: K.viterbi_np(E, trans, START_PENALTY, TRANSITION_PENALTY),
            ),
        }
        for name, (f_nb, f_np) in cases.items():
            t_nb = min(timeit.repeat(f_nb, number=args.repeats, repeat=3)) / args.repeats * 1e6
            t_np = min(timeit.repeat(f_np, number=args.repeats, repeat=3)) / args.repeats * 1e6
            print(f"{name:<16}{T:>5}{t_nb:>12.2f}{t_np:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
