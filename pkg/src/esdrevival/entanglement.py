"""Concurrence, the signed Wootters quantity, polarization degree and ESD crossings."""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .qcore import as_matrix, condition_on_a_horizontal, eig_magnitudes, wootters_product

DEATH = "death"
REVIVAL = "revival"


@dataclass(frozen=True)
class StokesVector:
    s1: float
    s2: float
    s3: float

    @property
    def degree(self):
        return math.sqrt(self.s1**2 + self.s2**2 + self.s3**2)


@dataclass(frozen=True)
class Crossing:
    x: float
    direction: str


@dataclass
class CrossingReport:
    crossings: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.crossings)

    def __len__(self):
        return len(self.crossings)

    @property
    def deaths(self):
        return [c.x for c in self.crossings if c.direction == DEATH]

    @property
    def revivals(self):
        return [c.x for c in self.crossings if c.direction == REVIVAL]

    def as_dicts(self):
        return [{"x": c.x, "direction": c.direction} for c in self.crossings]


def chi_spectrum(rho):
    """Descending eigenvalue magnitudes of ``rho (sy x sy) rho* (sy x sy)``."""
    return eig_magnitudes(wootters_product(rho))


def gamma(rho):
    """Signed Wootters quantity ``sqrt(chi1) - sqrt(chi2) - sqrt(chi3) - sqrt(chi4)``."""
    r = np.sqrt(chi_spectrum(rho))
    return float(r[0] - r[1] - r[2] - r[3])


def concurrence(rho):
    return max(0.0, gamma(rho))


def concurrence_partial_closed(kappa_a, kappa_b):
    """Concurrence of the partial family for real coherence factors in [0, 1]."""
    for name, k in (("kappa_a", kappa_a), ("kappa_b", kappa_b)):
        if not 0.0 <= k <= 1.0:
            raise ConfigError(f"{name} must lie in [0, 1], got {k}")
    return max(0.0, 0.5 * (kappa_a + kappa_a * kappa_b + kappa_b - 1.0))


def esd_threshold(kappa_a):
    """Value of ``|kappa_b|`` at which the partial family loses its entanglement."""
    k = abs(kappa_a)
    return (1.0 - k) / (1.0 + k)


def stokes_vector(rho):
    """Stokes vector of photon ``b`` heralded by an ``H`` detection on photon ``a``."""
    rb = condition_on_a_horizontal(as_matrix(rho, 4))
    s1 = 2.0 * rb[0, 0].real - 1.0
    s2 = (rb[0, 1] + rb[1, 0]).real
    s3 = (1j * (rb[0, 1] - rb[1, 0])).real
    return StokesVector(float(s1), float(s2), float(s3))


def degree_of_polarization(rho):
    return stokes_vector(rho).degree


def find_crossings(curve, x_min, x_max, step=1.0, tol=1e-4):
    """Locate sign changes of ``curve`` on ``[x_min, x_max]``.

    The curve is sampled on a uniform grid of pitch ``step``; each bracketed
    sign change is bisected until the bracket is narrower than ``tol``.
    Positive-to-nonpositive transitions are deaths, the reverse revivals.
    A dip that starts and ends within one grid step is not seen.
    """
    if not step > 0:
        raise ConfigError("step must be > 0")
    if x_max < x_min:
        raise ConfigError("x_max must be >= x_min")
    n = int(math.floor((x_max - x_min) / step + 1e-9)) + 1
    xs = x_min + step * np.arange(n)
    alive = np.array([curve(float(x)) > 0 for x in xs])

    report = CrossingReport()
    for i in np.flatnonzero(alive[1:] != alive[:-1]):
        lo, hi = float(xs[i]), float(xs[i + 1])
        lo_alive = bool(alive[i])
        while hi - lo >= tol:
            mid = 0.5 * (lo + hi)
            if (curve(mid) > 0) == lo_alive:
                lo = mid
            else:
                hi = mid
        report.crossings.append(Crossing(0.5 * (lo + hi), DEATH if lo_alive else REVIVAL))
    return report
