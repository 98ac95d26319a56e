"""Input states and the single-photon dephasing channel.

Dephasing of photon ``m`` with coherence factor ``kappa`` multiplies every
matrix element whose row has ``V`` and column has ``H`` on that photon by
``kappa``, and the mirrored elements by ``conj(kappa)``.  With this
orientation the ``|VV><HH|`` coefficient of the dephased Bell state is
``kappa_b / 2``.
"""

import numpy as np

from .exceptions import ConfigError, NonPhysicalChannelError
from .qcore import I2, SIGMA_X, as_matrix, ket_to_dm, tensor

MODES = ("a", "b")
KAPPA_TOL = 1e-12

# polarization index (0 = H, 1 = V) of each photon for basis states HH, HV, VH, VV
_POL = {"a": np.array([0, 0, 1, 1]), "b": np.array([0, 1, 0, 1])}


def check_kappa(kappa):
    kappa = complex(kappa)
    if not np.isfinite(kappa):
        raise NonPhysicalChannelError(f"kappa must be finite, got {kappa}")
    if abs(kappa) > 1 + KAPPA_TOL:
        raise NonPhysicalChannelError(f"|kappa| = {abs(kappa):.6g} exceeds 1")
    return kappa


def _check_mode(mode):
    if mode not in MODES:
        raise ConfigError(f"mode must be 'a' or 'b', got {mode!r}")
    return mode


def bell_phi_plus():
    """``(|HH> + |VV>) / sqrt(2)`` as a density matrix."""
    return ket_to_dm([1, 0, 0, 1])


def pauli_x_on_a(rho):
    """Flip the polarization of photon ``a``: ``(X x I) rho (X x I)``."""
    u = tensor(SIGMA_X, I2)
    return u @ as_matrix(rho, 4) @ u


def half_wave_plate(angle_deg):
    """Jones matrix of a half-wave plate with its optic axis at ``angle_deg`` from H."""
    t = np.radians(2.0 * angle_deg)
    return np.array([[np.cos(t), np.sin(t)], [np.sin(t), -np.cos(t)]], dtype=complex)


def hwp_on_a(rho, angle_deg=22.5):
    """Send photon ``a`` through a half-wave plate. At 22.5 degrees this is a Hadamard."""
    u = tensor(half_wave_plate(angle_deg), I2)
    return u @ as_matrix(rho, 4) @ u.conj().T


def dephase(rho, kappa, mode):
    """Apply the one-photon phase-damping channel with coherence factor ``kappa``."""
    kappa = check_kappa(kappa)
    pol = _POL[_check_mode(mode)]
    rho = as_matrix(rho, 4)
    diff = pol[:, None] - pol[None, :]
    factor = np.where(diff == 1, kappa, np.where(diff == -1, np.conj(kappa), 1.0))
    return rho * factor


def state_maximal(kappa_b):
    """Bell state after photon ``b`` crosses the dephasing environment."""
    kappa_b = check_kappa(kappa_b)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[3, 3] = 0.5
    rho[0, 3] = 0.5 * np.conj(kappa_b)
    rho[3, 0] = 0.5 * kappa_b
    return rho


def state_partial(kappa_a, kappa_b):
    """Partially entangled family: Hadamard-rotated Bell state dephased on both photons.

    Closed form, element by element, of
    ``dephase(dephase(hwp_on_a(bell_phi_plus()), kappa_a, "a"), kappa_b, "b")``.
    """
    ka = check_kappa(kappa_a)
    kb = check_kappa(kappa_b)
    cka, ckb = np.conj(ka), np.conj(kb)
    rho = np.array(
        [
            [1, ckb, cka, -cka * ckb],
            [kb, 1, cka * kb, -cka],
            [ka, ka * ckb, 1, -ckb],
            [-ka * kb, -ka, -kb, 1],
        ],
        dtype=complex,
    )
    return rho / 4.0


def prepare_partial_input():
    """Input of the partial-entanglement runs before any dephasing."""
    return hwp_on_a(bell_phi_plus(), 22.5)
