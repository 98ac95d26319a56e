import math

import numpy as np
import pytest

from esdrevival.channels import bell_phi_plus, state_maximal, state_partial
from esdrevival.entanglement import (
    DEATH,
    REVIVAL,
    chi_spectrum,
    concurrence,
    concurrence_partial_closed,
    degree_of_polarization,
    esd_threshold,
    find_crossings,
    gamma,
    stokes_vector,
)
from esdrevival.exceptions import ConfigError, DegenerateConditioningError
from esdrevival.qcore import random_density_matrix
from esdrevival.spectrum import kernel, three_line_spectrum

from oracles import random_complex_kappa

KAPPA_A = 0.607


def test_gamma_examples():
    assert gamma(bell_phi_plus()) == pytest.approx(1, abs=1e-12)
    assert gamma(np.eye(4) / 4) == pytest.approx(-0.5, abs=1e-12)
    closed = 0.5 * (0.607 + 0.607 * 0.15 + 0.15 - 1)
    assert closed == pytest.approx(-0.076, abs=1e-3)
    assert gamma(state_partial(0.607, 0.15)) == pytest.approx(closed, abs=1e-10)


def test_chi_spectrum_descending(rng):
    for _ in range(50):
        chi = chi_spectrum(random_density_matrix(rng))
        assert np.all(np.diff(chi) <= 0) and chi.min() >= 0


def test_concurrence_examples():
    assert concurrence(np.eye(4) / 4) == 0
    hh = np.zeros((4, 4))
    hh[0, 0] = 1
    assert concurrence(hh) == pytest.approx(0, abs=1e-12)


def test_concurrence_maximal_is_abs_kappa(rng):
    for _ in range(100):
        k = random_complex_kappa(rng)
        assert abs(concurrence(state_maximal(k)) - abs(k)) <= 1e-10


def test_closed_form_examples():
    assert concurrence_partial_closed(1, 1) == 1
    assert concurrence_partial_closed(0.607, 0.2446) == pytest.approx(0, abs=1e-4)
    assert concurrence_partial_closed(0.607, 0.385) == pytest.approx(0.113, abs=1e-3)
    with pytest.raises(ConfigError):
        concurrence_partial_closed(1.2, 0.5)


def test_closed_form_equals_numeric_on_grid():
    grid = np.linspace(0, 1, 50)
    worst = max(
        abs(concurrence(state_partial(a, b)) - concurrence_partial_closed(a, b)) for a in grid for b in grid
    )
    assert worst <= 1e-10


def test_concurrence_depends_only_on_moduli(rng):
    for _ in range(200):
        a, b = rng.uniform(0, 1, 2)
        p1, p2 = rng.uniform(0, 2 * math.pi, 2)
        lhs = concurrence(state_partial(a * np.exp(1j * p1), b * np.exp(1j * p2)))
        assert lhs == pytest.approx(concurrence(state_partial(a, b)), abs=1e-10)


def test_concurrence_bounds_and_gamma_relation(rng):
    for _ in range(300):
        rho = random_density_matrix(rng, rank=int(rng.integers(1, 5)))
        g, c = gamma(rho), concurrence(rho)
        assert 0 <= c <= 1 + 1e-12
        assert g <= c + 1e-15
        if g >= 0:
            assert c == g


def test_esd_threshold():
    assert esd_threshold(KAPPA_A) == pytest.approx(0.2446, abs=1e-4)


def test_degree_of_polarization_examples(rng):
    assert degree_of_polarization(bell_phi_plus()) == pytest.approx(1, abs=1e-12)
    assert degree_of_polarization(np.eye(4) / 4) == pytest.approx(0, abs=1e-12)
    for _ in range(200):
        ka, kb = random_complex_kappa(rng), random_complex_kappa(rng)
        assert degree_of_polarization(state_partial(ka, kb)) == pytest.approx(abs(kb), abs=1e-10)
        assert degree_of_polarization(state_partial(random_complex_kappa(rng), kb)) == pytest.approx(
            abs(kb), abs=1e-10
        )


def test_stokes_components():
    kb = 0.3 - 0.2j
    s = stokes_vector(state_partial(0.5, kb))
    assert s.s1 == pytest.approx(0, abs=1e-15)
    assert s.s2 == pytest.approx(kb.real, abs=1e-15)
    assert s.s3 == pytest.approx(kb.imag, abs=1e-15)


def test_stokes_degenerate():
    vv = np.zeros((4, 4))
    vv[3, 3] = 1
    with pytest.raises(DegenerateConditioningError):
        degree_of_polarization(vv)


def test_find_crossings_simple_sine():
    rep = find_crossings(lambda x: math.sin(x), 0.5, 10, 0.25)
    np.testing.assert_allclose([c.x for c in rep], [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-4)
    assert [c.direction for c in rep] == [DEATH, REVIVAL, DEATH]


def test_find_crossings_constant_positive():
    assert len(find_crossings(lambda x: 0.5, 0, 800, 1)) == 0


def test_find_crossings_errors():
    with pytest.raises(ConfigError):
        find_crossings(lambda x: 1.0, 0, 1, 0)


def test_find_crossings_fig2b():
    s = three_line_spectrum(0.85)
    rep = find_crossings(lambda x: gamma(state_partial(KAPPA_A, kernel(s, x))), 0, 800, 1)
    assert [c.direction for c in rep] == [DEATH, REVIVAL, DEATH]
    for got, want, tol in zip([c.x for c in rep], (189, 440, 663), (15, 20, 20)):
        assert abs(got - want) <= tol
    # frozen from the bisection of the closed-form Gamma
    np.testing.assert_allclose([c.x for c in rep], [188.4687, 440.4706, 662.3964], atol=2e-3)


def test_find_crossings_fig2a_empty():
    s = three_line_spectrum(0.9)
    xs = np.arange(0, 801)
    assert np.abs(kernel(s, xs)).min() > 0
    assert len(find_crossings(lambda x: gamma(state_maximal(kernel(s, x))), 0, 800, 1)) == 0
