"""End-to-end checks of the python module against the reference integrator."""

import math

import numpy as np
import pytest

import liexp


def test_builtin_system_metadata():
    sys = liexp.builtin_system("bloch-siegert")
    assert sys.dim == 2
    assert sys.skew_hermitian
    assert sys.period == pytest.approx(2.0 * math.pi)
    assert sys.frequencies == [1.0]
    a = sys.generator(0.5, 0.3)
    assert a.shape == (2, 2)
    assert np.linalg.norm(a + a.conj().T) < 1e-14


def test_expand_propagate_matches_reference():
    sys = liexp.builtin_system("three-lambda-periodic")
    series = liexp.expand(sys, "magnus", 3)
    assert series.method == "magnus"
    grid = [0.25 * q for q in range(21)]
    result = liexp.propagate(series, grid, 0.2, 1, 2)
    ref = liexp.reference_propagate(sys, 0.2, grid)
    err = max(
        abs(p - liexp.transition_probability(u, 1, 2))
        for p, u in zip(result.p, ref)
    )
    assert err < 1e-4
    assert max(result.defect) < 1e-11
    assert np.allclose(result.u[0], np.eye(3))


def test_effective_generator_is_skew():
    sys = liexp.builtin_system("bloch-siegert")
    series = liexp.expand(sys, "fm", 3)
    f = series.effective_generator(0.4)
    assert np.linalg.norm(f + f.conj().T) < 1e-12
    h = 1j * f
    assert np.linalg.norm(h - h.conj().T) < 1e-12


def test_horizons():
    sys = liexp.builtin_system("bloch-siegert")
    magnus, fm = liexp.horizons(sys, 0.2)
    assert magnus == pytest.approx(6.0561, abs=1e-3)
    assert 0.0 < fm < magnus
    capped, _ = liexp.horizons(sys, 0.2, t_cap=3.0)
    assert math.isinf(capped)


def test_magnus_direct_term_crosschecks_the_recursion():
    sys = liexp.builtin_system("three-lambda-periodic")
    series = liexp.expand(sys, "magnus", 2)
    t = 0.8
    direct = liexp.magnus_direct_term(sys, 1.0, 2, t, quad_tol=1e-9)
    assert np.linalg.norm(direct - series.omega_at(2, t)) < 1e-8


def test_exceptions_map_to_python_types():
    sys = liexp.builtin_system("three-lambda-qp", omega=1e-9)
    with pytest.raises(liexp.ResonanceError):
        liexp.expand(sys, "fm", 1)
    with pytest.raises(liexp.ConfigError):
        liexp.expand(liexp.builtin_system("bloch-siegert"), "magnus", 0)
    with pytest.raises(liexp.ConfigError):
        liexp.builtin_system("rabi")
    assert issubclass(liexp.ResonanceError, liexp.LiexpError)


def test_json_round_trip():
    sys = liexp.builtin_system("three-lambda-qp", beta=0.7)
    back = liexp.system_from_json(sys.to_json())
    assert back.dim == sys.dim
    for t in (0.0, 1.3, 4.1):
        assert np.allclose(back.generator(0.9, t), sys.generator(0.9, t))
