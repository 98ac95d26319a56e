"""CHSH tests with linear polarization analyzers.

A linear analyzer at angle ``theta`` measures
``A(theta) = cos(2 theta) Z + sin(2 theta) X``, so every correlation
``E(theta1, theta2)`` is a bilinear form in the 3x3 Pauli correlation matrix.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigError
from .qcore import SIGMA_X, SIGMA_Y, SIGMA_Z, as_matrix, check_density_matrix

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
GRID_PITCH_DEG = 3.75


@dataclass(frozen=True)
class AngleSet:
    """Analyzer angles in degrees: ``theta1``/``theta1p`` on photon a, ``theta2``/``theta2p`` on b."""

    theta1: float
    theta1p: float
    theta2: float
    theta2p: float

    def __post_init__(self):
        if not all(math.isfinite(t) for t in self.as_tuple()):
            raise ConfigError("analyzer angles must be finite")

    def as_tuple(self):
        return (self.theta1, self.theta1p, self.theta2, self.theta2p)

    def wrapped(self):
        """Same settings with each angle mapped into (-90, 90]."""
        return AngleSet(*(_wrap(t) for t in self.as_tuple()))


PRESET_ANGLES = AngleSet(-86.25, 60.75, -85.5, 76.5)


def _wrap(theta):
    t = math.fmod(theta, 180.0)
    if t <= -90.0:
        t += 180.0
    elif t > 90.0:
        t -= 180.0
    return 0.0 if abs(t) < 1e-12 else t


def analyzer(theta_deg):
    """``|theta><theta| - |theta_perp><theta_perp|`` for a linear polarizer."""
    t = math.radians(2.0 * theta_deg)
    return math.cos(t) * SIGMA_Z + math.sin(t) * SIGMA_X


def correlation(rho, theta1, theta2):
    rho = as_matrix(rho, 4)
    op = np.kron(analyzer(theta1), analyzer(theta2))
    return float(np.trace(rho @ op).real)


def correlation_matrix(rho):
    """``T[i, j] = Tr(rho s_i x s_j)`` for ``i, j`` over ``X, Y, Z``."""
    rho = as_matrix(rho, 4)
    paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)
    return np.array([[np.trace(rho @ np.kron(p, q)).real for q in paulis] for p in paulis])


def chsh_s(rho, angles):
    a1, a1p, b2, b2p = angles.as_tuple()
    return (
        correlation(rho, a1, b2)
        + correlation(rho, a1, b2p)
        + correlation(rho, a1p, b2)
        - correlation(rho, a1p, b2p)
    )


def _directions(theta_deg):
    t = np.radians(2.0 * np.asarray(theta_deg, dtype=float))
    return np.stack([np.sin(t), np.zeros_like(t), np.cos(t)], axis=-1)


def _s_from_t(t, a1, a1p, b2, b2p):
    u, up, v, vp = (_directions(x) for x in (a1, a1p, b2, b2p))
    return u @ t @ (v + vp) + up @ t @ (v - vp)


def optimize_chsh_linear(rho, pitch_deg=GRID_PITCH_DEG, tol=1e-10, max_sweeps=100_000):
    """Largest CHSH value reachable with linear analyzers.

    A grid search at ``pitch_deg`` over one period per angle picks the start
    (ties go to the lexicographically smallest angle tuple); coordinate
    ascent then maximizes one angle at a time in closed form, since ``S`` is a
    sinusoid of twice each angle, until a sweep gains less than ``tol``.

    Returns
    -------
    (AngleSet, float)
        Angles wrapped into (-90, 90] and the attained ``S``.
    """
    t = correlation_matrix(check_density_matrix(rho))
    grid = np.arange(0.0, 180.0, pitch_deg)
    d = _directions(grid)
    e = d @ t @ d.T  # e[i, j] = E(grid[i], grid[j])

    best = -np.inf
    best_idx = None
    for i in range(len(grid)):
        # s[k, j, l] = E(i, j) + E(i, l) + E(k, j) - E(k, l)
        s = e[i][None, :, None] + e[i][None, None, :] + e[:, :, None] - e[:, None, :]
        k = int(np.argmax(s))
        if s.flat[k] > best:
            best = s.flat[k]
            best_idx = (i, *np.unravel_index(k, s.shape))
    a1, a1p, b2, b2p = (float(grid[j]) for j in best_idx)

    s_val = _s_from_t(t, a1, a1p, b2, b2p)
    for _ in range(max_sweeps):
        # each update is the argmax of A cos(2 theta) + B sin(2 theta)
        a1 = _argmax_direction(t @ (_directions(b2) + _directions(b2p)))
        a1p = _argmax_direction(t @ (_directions(b2) - _directions(b2p)))
        b2 = _argmax_direction(t.T @ (_directions(a1) + _directions(a1p)))
        b2p = _argmax_direction(t.T @ (_directions(a1) - _directions(a1p)))
        new = _s_from_t(t, a1, a1p, b2, b2p)
        if new - s_val < tol:
            s_val = max(s_val, new)
            break
        s_val = new
    angles = AngleSet(a1, a1p, b2, b2p).wrapped()
    return angles, float(chsh_s(rho, angles))


def _argmax_direction(w):
    # maximize w_x sin(2 theta) + w_z cos(2 theta)
    if abs(w[0]) < 1e-300 and abs(w[2]) < 1e-300:
        return 0.0
    return math.degrees(0.5 * math.atan2(w[0], w[2]))


def horodecki_smax(rho):
    """Maximal CHSH value over all projective qubit settings, ``2 sqrt(t1 + t2)``."""
    t = correlation_matrix(check_density_matrix(rho))
    ev = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return float(2.0 * math.sqrt(max(0.0, ev[0] + ev[1])))


class LinearChshOptimizer(BaseEstimator):
    """Fit analyzer angles that maximize ``S`` for a given two-photon state."""

    def __init__(self, pitch_deg=GRID_PITCH_DEG, tol=1e-10):
        self.pitch_deg = pitch_deg
        self.tol = tol

    def fit(self, X, y=None):
        self.angles_, self.s_ = optimize_chsh_linear(X, self.pitch_deg, self.tol)
        self.smax_ = horodecki_smax(X)
        return self

    def score(self, X, y=None):
        """CHSH value of state ``X`` under the fitted angles."""
        check_is_fitted(self, "angles_")
        return chsh_s(X, self.angles_)
