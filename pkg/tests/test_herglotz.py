import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loewner_ito import herglotz as H
from loewner_ito.errors import DomainError, InvariantError

FD_STEP = 1e-6

BUILTINS = [
    H.Constant(),
    H.single_atom(0.0),
    H.AtomicMeasure(((0.0, 0.5), (math.pi, 0.5))),
    H.AtomicMeasure(((0.3, 0.2), (2.0, 0.3), (-1.1, 0.5))),
    H.RationalCayleyPlus(1.0),
    H.RationalCayleyPlus(0.25),
]


def test_single_atom_values():
    a = H.single_atom(0.0)
    assert H.evaluate(a, 0.0) == 1
    assert H.evaluate(a, 0.5) == pytest.approx(3.0, abs=1e-15)


def test_two_atoms_at_half_i():
    w = 0.5j
    oracle = (1 + w * w) / (1 - w * w)  # e=1 and e=-1 kernels averaged
    assert oracle == pytest.approx(0.6)
    got = H.evaluate(H.AtomicMeasure(((0.0, 0.5), (math.pi, 0.5))), w)
    assert got == pytest.approx(oracle, abs=1e-14)


def test_cayley_plus_at_origin():
    assert H.evaluate(H.RationalCayleyPlus(1.0), 0.0) == 2


def test_kernel_matches_direct_formula():
    rng = np.random.default_rng(0)
    thetas = rng.uniform(-np.pi, np.pi, 4)
    weights = rng.dirichlet(np.ones(4))
    spec = H.AtomicMeasure(tuple(zip(thetas, weights)))
    w = 0.4 * np.exp(1j * rng.uniform(0, 2 * np.pi, 20))
    direct = sum(lam * (cmath.exp(1j * t) + w) / (cmath.exp(1j * t) - w) for t, lam in zip(thetas, weights))
    np.testing.assert_allclose(H.evaluate(spec, w), direct, rtol=1e-13)


@pytest.mark.parametrize("w", [1.0, 1j, 0.8 + 0.8j, np.array([0.1, 1.2])])
def test_outside_disk_is_a_domain_error(w):
    with pytest.raises(DomainError):
        H.evaluate(H.Constant(), w)


@pytest.mark.parametrize("atoms", [((0, 0.5), (1, 0.6)), ((0, 1.5), (1, -0.5)), ()])
def test_bad_weights_are_rejected(atoms):
    with pytest.raises(InvariantError, match="weight|atom"):
        H.AtomicMeasure(atoms)


def test_bad_presets():
    with pytest.raises(InvariantError):
        H.RationalCayleyPlus(0.0)
    with pytest.raises(InvariantError):
        H.Constant(-1.0)


def test_validate_constant():
    rep = H.validate(H.Constant())
    assert rep.min_real_part == 1.0
    assert rep.value_at_0 == 1.0
    assert rep.passed


def test_validate_single_atom_poisson_kernel():
    rep = H.validate(H.single_atom(0.0), radii=[0.9], n_angles=64)
    # Re of the kernel is the Poisson kernel (1 - r^2) / |e - w|^2 > 0
    r = 0.9
    assert rep.min_real_part == pytest.approx((1 - r * r) / (1 + r) ** 2, rel=1e-12)
    assert rep.min_real_part >= 0


def test_validate_rejects_empty_grid():
    with pytest.raises(InvariantError):
        H.validate(H.Constant(), radii=[])
    with pytest.raises(InvariantError):
        H.validate(H.Constant(), n_angles=0)


@pytest.mark.parametrize("spec", BUILTINS)
def test_builtins_pass_default_validation(spec):
    assert H.validate(spec).passed


@pytest.mark.parametrize("spec", [s for s in BUILTINS if isinstance(s, H.AtomicMeasure)])
def test_atomic_value_at_origin(spec):
    assert abs(H.evaluate(spec, 0.0) - 1) <= 1e-12


disk_points = st.builds(lambda r, a: r * cmath.exp(1j * a),
                        st.floats(0, 0.9), st.floats(0, 2 * math.pi))


@pytest.mark.parametrize("spec", BUILTINS)
@given(w=disk_points)
@settings(max_examples=60, deadline=None)
def test_derivatives_match_central_differences(spec, w):
    for order in (1, 2):
        fd = (H.evaluate(spec, w + FD_STEP, order - 1) - H.evaluate(spec, w - FD_STEP, order - 1)) / (2 * FD_STEP)
        exact = H.evaluate(spec, w, order)
        assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1.0)


@given(thetas=st.lists(st.floats(-math.pi, math.pi), min_size=1, max_size=5),
       r=st.floats(0, 0.999), a=st.floats(0, 2 * math.pi))
@settings(max_examples=200, deadline=None)
def test_atomic_real_part_nonnegative(thetas, r, a):
    spec = H.AtomicMeasure(tuple((t, 1 / len(thetas)) for t in thetas))
    assert H.evaluate(spec, r * cmath.exp(1j * a)).real >= -1e-12


@pytest.mark.parametrize("spec", BUILTINS)
def test_json_roundtrip(spec):
    assert H.from_json(H.to_json(spec)) == spec


def test_from_json_errors():
    with pytest.raises(InvariantError):
        H.from_json({"variant": "mystery"})
    with pytest.raises(InvariantError):
        H.from_json({"atoms": []})
    with pytest.raises(InvariantError, match="sum to 1"):
        H.from_json({"variant": "atomic", "atoms": [[0, 0.5], [1, 0.6]]})
