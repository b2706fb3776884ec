"""Error of the randomized flow with tau = 1, p = 1 against the closed form,
for Euler and Heun at a range of step sizes."""
import numpy as np

from loewner_ito.flow import integrate_randomized_batch
from loewner_ito.herglotz import Constant
from loewner_ito.paths import TimeGrid
from loewner_ito.tau import Exponential

ZS = np.array([0.0, 0.5, -0.5, 0.3 + 0.4j])

if __name__ == "__main__":
    for n in (10**3, 10**4, 10**5):
        grid = TimeGrid(1.0, n)
        values = np.zeros((ZS.size, 1, n + 1))
        exact = 1 - (1 - ZS) / (1 + (1 - ZS))
        row = []
        for scheme in ("euler", "heun"):
            trs = integrate_randomized_batch(ZS, Constant(), Exponential((0.0,)), values, grid, scheme)
            row.append(max(abs(tr.final - e) for tr, e in zip(trs, exact)))
        print(f"h={grid.h:.0e}  euler {row[0]:.2e}  heun {row[1]:.2e}")
