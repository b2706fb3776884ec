import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loewner_ito import flow
from loewner_ito.herglotz import AtomicMeasure, Constant, RationalCayleyPlus, single_atom
from loewner_ito.paths import TimeGrid, generate_ensemble, refine
from loewner_ito.tau import Exponential, SquareExponent


def riccati(z, t):
    """Exact solution of dphi/dt = (1 - phi)^2, phi_0 = z."""
    return 1 - (1 - z) / (1 + (1 - z) * t)


def test_classical_exact_decay():
    tr = flow.integrate_classical(0.5, Constant(), TimeGrid(math.log(2), 1000), "rk4")
    assert tr.completed
    assert abs(tr.final - 0.25) <= 1e-8
    assert tr.states[0] == 0.5


def test_classical_modulus_decay():
    tr = flow.integrate_classical(0.3 + 0.4j, Constant(), TimeGrid(1.0, 1000))
    assert abs(abs(tr.final) - 0.5 * math.exp(-1)) <= 1e-8


@pytest.mark.parametrize("p", [Constant(), single_atom(0.4), RationalCayleyPlus(1.0)])
def test_origin_is_fixed(p):
    tr = flow.integrate_classical(0.0, p, TimeGrid(2.0, 50))
    assert np.all(tr.states == 0)


@pytest.mark.parametrize("scheme, order", [("euler", 1), ("heun", 2), ("rk4", 4)])
def test_classical_convergence_order(scheme, order):
    z = 0.6 + 0.2j
    errs = [abs(flow.integrate_classical(z, Constant(), TimeGrid(1.0, n), scheme).final - z * math.exp(-1))
            for n in (20, 40, 80)]
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(slopes - order) < 0.2)


def test_classical_nonlinear_convergence_rk4():
    # no closed form: compare against a much finer RK4 run
    p = AtomicMeasure(((0.0, 0.7), (2.5, 0.3)))
    ref = flow.integrate_classical(0.5 + 0.3j, p, TimeGrid(1.0, 4096)).final
    errs = [abs(flow.integrate_classical(0.5 + 0.3j, p, TimeGrid(1.0, n)).final - ref) for n in (16, 32)]
    assert np.log2(errs[0] / errs[1]) > 3.5


def one_path(t_end, n_steps, n_dims=1, seed=0):
    return generate_ensemble(n_dims, TimeGrid(t_end, n_steps), 1, seed).path(0)


def test_randomized_riccati_heun():
    path = one_path(1.0, 10_000)
    d = Exponential((0.0,))
    for z in (0.0, 0.5):
        tr = flow.integrate_randomized(z, Constant(), d, path, "heun")
        assert abs(tr.final - riccati(z, 1.0)) <= 1e-6


def test_randomized_riccati_euler_first_order():
    d = Exponential((0.0,))
    errs = []
    for n in (1000, 2000, 4000):
        tr = flow.integrate_randomized(0.5, Constant(), d, one_path(1.0, n), "euler")
        errs.append(abs(tr.final - 2 / 3))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(1, abs=0.05)
    assert np.log2(errs[1] / errs[2]) == pytest.approx(1, abs=0.05)


def test_zero_kappa_is_path_independent():
    e = generate_ensemble(1, TimeGrid(1.0, 200), 6, seed=4)
    trs = flow.integrate_randomized_ensemble(0.2 + 0.1j, single_atom(1.0), Exponential((0.0,)), e)
    for tr in trs[1:]:
        assert np.array_equal(tr.states, trs[0].states)


def test_randomized_deterministic():
    path = one_path(1.0, 300, n_dims=2, seed=8)
    args = (0.1 - 0.3j, single_atom(0.0), Exponential((1.0, -2.0)), path, "heun")
    assert flow.integrate_randomized(*args).states.tobytes() == flow.integrate_randomized(*args).states.tobytes()


def test_batch_matches_single():
    e = generate_ensemble(2, TimeGrid(1.0, 100), 5, seed=2)
    d, p = Exponential((1.0, 0.5)), single_atom(0.0)
    batch = flow.integrate_randomized_ensemble(0.3, p, d, e)
    for i in range(5):
        assert np.array_equal(batch[i].states, flow.integrate_randomized(0.3, p, d, e.path(i)).states)


def test_rk4_not_offered_for_randomized():
    with pytest.raises(ValueError):
        flow.integrate_randomized(0.0, Constant(), Exponential((1.0,)), one_path(1.0, 4), "rk4")


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        flow.integrate_randomized(0.0, Constant(), Exponential((1.0, 1.0)), one_path(1.0, 4), "euler")


def test_boundary_exit_recorded():
    # huge steps throw the state out of the disk on the first step
    tr = flow.integrate_randomized(0.9, single_atom(0.0), Exponential((0.0,)), one_path(20.0, 4), "euler")
    assert tr.exit is not None
    assert len(tr.states) == tr.exit.step
    assert np.all(np.abs(tr.states) < 1)


def test_initial_point_outside_disk():
    with pytest.raises(ValueError):
        flow.integrate_classical(1.0, Constant(), TimeGrid(1.0, 4))


disk = st.builds(lambda r, a: r * cmath.exp(1j * a), st.floats(0, 0.95), st.floats(0, 2 * math.pi))
herglotz_specs = st.sampled_from([Constant(), single_atom(0.0), single_atom(2.0),
                                  AtomicMeasure(((0.0, 0.5), (math.pi, 0.5))), RationalCayleyPlus(0.5)])


@given(z=disk, p=herglotz_specs, scheme=st.sampled_from(["euler", "heun", "rk4"]))
@settings(max_examples=60, deadline=None)
def test_classical_modulus_monotone(z, p, scheme):
    g = TimeGrid(1.0, 200)
    tr = flow.integrate_classical(z, p, g, scheme)
    mod = np.abs(tr.states)
    assert np.all(mod[1:] <= mod[:-1] + 10 * g.h ** 2)


@given(z=disk, p=herglotz_specs, seed=st.integers(0, 1000), k=st.floats(-3, 3))
@settings(max_examples=40, deadline=None)
def test_randomized_psi_stays_in_disk(z, p, seed, k):
    path = one_path(1.0, 200, seed=seed)
    d = Exponential((k,))
    tr = flow.integrate_randomized(z, p, d, path, "euler")
    tau = flow.tau_along(d, path.values[None])[0, : len(tr.states)]
    assert np.all(np.abs(tr.states / tau) < 1)


def test_randomized_square_driver_runs():
    tr = flow.integrate_randomized(0.2, Constant(), SquareExponent(), one_path(1.0, 100), "heun")
    assert len(tr.states) >= 1


def test_randomized_grid_refinement_holder_half():
    """Halving h moves the endpoint by O(h^{1/2}) for a random driver."""
    e = generate_ensemble(1, TimeGrid(0.5, 64), 40, seed=6)
    d, p = Exponential((1.5,)), single_atom(0.0)
    finals = []
    for _ in range(4):
        finals.append(np.array([tr.final for tr in flow.integrate_randomized_ensemble(0.1, p, d, e)]))
        e = refine(e)
    diffs = [np.sqrt(np.mean(np.abs(a - b) ** 2)) for a, b in zip(finals, finals[1:])]
    hs = 0.5 / 64 / 2 ** np.arange(3)
    assert np.all(np.array(diffs) <= 2.0 * np.sqrt(hs))
