"""Admissibility verdicts and fiber variation for the built-in drivers."""
from loewner_ito.admissibility import classify, fiber_variation, unit_grid
from loewner_ito.herglotz import Constant, single_atom
from loewner_ito.tau import Exponential, ProductExponent, Sampled, SquareExponent
import numpy as np

DRIVERS = {
    "exp(i(2y1 - y2))": Exponential((2.0, -1.0)),
    "exp(0.7 i y)": Exponential((0.7,)),
    "exp(i y^2)": SquareExponent(),
    "exp(i y1 y2)": ProductExponent(),
    "exp(i sin y)": Sampled(lambda y: np.exp(1j * np.sin(y[0])), 1),
}

if __name__ == "__main__":
    for name, d in DRIVERS.items():
        rep = classify(d)
        fib = {pn: fiber_variation(d, p, 0.5, unit_grid(d.n_dims), method=rep.method).max_variation
               for pn, p in (("p=1", Constant()), ("atom", single_atom(0.0)))}
        print(f"{name:>18}: admissible={rep.admissible!s:5} kappa={rep.kappa} "
              f"diag={rep.max_diagonal_residual:.2e} mixed={rep.max_mixed_residual:.2e} fiber={fib}")
