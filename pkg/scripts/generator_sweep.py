"""Closed-form generator against its Monte Carlo estimate over a grid of cases."""
import argparse
import itertools

from loewner_ito.generator import PolynomialTestFunction, estimate_generator_mc
from loewner_ito.herglotz import Constant, single_atom


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--h", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cases = itertools.product((1, 2, 3), (0.0, 0.3, 0.2 + 0.4j), ((0.0,), (2.0,), (1.0, 1.0)),
                              (("p=1", Constant()), ("atom", single_atom(0.0))))
    print(f"{'f':>4} {'z':>10} {'kappa':>12} {'p':>5} {'closed form':>22} {'estimate':>22} {'stderr':>8} {'err/tol':>7}")
    for i, (deg, z, kappa, (pname, p)) in enumerate(cases):
        rep = estimate_generator_mc(PolynomialTestFunction.monomial(deg), z, kappa, p, args.h,
                                    args.samples, args.seed + i)
        ratio = rep.error / (3 * rep.stderr + 0.05)
        print(f"z^{deg:<2} {z!s:>10} {kappa!s:>12} {pname:>5} {rep.closed_form:>22.4f} "
              f"{rep.mc_estimate:>22.4f} {rep.stderr:8.4f} {ratio:7.2f}")


if __name__ == "__main__":
    main()
