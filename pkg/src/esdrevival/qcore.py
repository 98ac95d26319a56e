"""Small dense linear algebra for one- and two-qubit polarization states.

All two-qubit matrices use the basis order ``HH, HV, VH, VV``; the first
factor is photon ``a``, the second photon ``b``.  States are plain complex
numpy arrays; :func:`check_density_matrix` is the validation entry point used
throughout the package.
"""

import numpy as np

from .exceptions import ConfigError, DegenerateConditioningError, EigenSolverError

BASIS_LABELS = ("HH", "HV", "VH", "VV")
HH, HV, VH, VV = range(4)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
EIG_CLAMP = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)

KET_H = np.array([1, 0], dtype=complex)
KET_V = np.array([0, 1], dtype=complex)


def as_matrix(m, dim=None):
    """Return ``m`` as a square complex array, optionally of fixed dimension."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ConfigError(f"expected a {dim}x{dim} matrix, got {arr.shape[0]}x{arr.shape[1]}")
    return arr


def check_density_matrix(rho, dim=4):
    """Validate a density matrix and return it as a complex array.

    Raises :class:`ConfigError` unless ``rho`` is Hermitian (1e-10), has unit
    trace (1e-10) and no eigenvalue below -1e-9.
    """
    rho = as_matrix(rho, dim)
    if not np.all(np.isfinite(rho)):
        raise ConfigError("density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise ConfigError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > TRACE_TOL:
        raise ConfigError(f"density matrix trace {np.trace(rho).real:.3g} != 1")
    lowest = np.linalg.eigvalsh(rho).min()
    if lowest < -PSD_TOL:
        raise ConfigError(f"density matrix has negative eigenvalue {lowest:.3g}")
    return rho


def is_density_matrix(rho, dim=4):
    try:
        check_density_matrix(rho, dim)
    except ConfigError:
        return False
    return True


def tensor(a, b):
    """Kronecker product of two 2x2 operators in the fixed basis order."""
    return np.kron(as_matrix(a, 2), as_matrix(b, 2))


def ket_to_dm(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def spin_flip(rho):
    """``(sy x sy) rho* (sy x sy)``."""
    yy = tensor(SIGMA_Y, SIGMA_Y)
    return yy @ as_matrix(rho, 4).conj() @ yy


def wootters_product(rho):
    """The non-Hermitian product ``rho (sy x sy) rho* (sy x sy)``."""
    rho = as_matrix(rho, 4)
    return rho @ spin_flip(rho)


def eig_magnitudes(m):
    """Eigenvalue magnitudes of a 4x4 matrix, sorted descending.

    Meant for ``rho (sy x sy) rho* (sy x sy)``, whose spectrum is real and
    nonnegative up to rounding. Magnitudes below 1e-12 are returned as 0.
    """
    m = as_matrix(m, 4)
    try:
        vals = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvalue routine did not converge: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise EigenSolverError("eigenvalue routine returned non-finite values")
    mags = np.sort(np.abs(vals))[::-1]
    mags[mags < EIG_CLAMP] = 0.0
    return mags


def psd_sqrt(rho):
    """Hermitian square root, clamping tiny negative eigenvalues to zero."""
    w, v = np.linalg.eigh(as_matrix(rho))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def condition_on_a_horizontal(rho):
    """State of photon ``b`` given that photon ``a`` was found horizontal.

    Parameters
    ----------
    rho : array_like, shape (4, 4)

    Returns
    -------
    ndarray, shape (2, 2)
        Normalized conditional state in the ``H, V`` basis.
    """
    rho = as_matrix(rho, 4)
    block = rho[:2, :2]
    prob = np.trace(block).real
    if prob <= 1e-12:
        raise DegenerateConditioningError(
            f"probability of H on photon a is {prob:.3g}; cannot condition"
        )
    return block / prob


def fidelity(rho, sigma, squared=True):
    """Uhlmann fidelity ``F = (Tr|sqrt(rho) sqrt(sigma)|)^2``.

    For a pure ``rho = |psi><psi|`` this reduces to ``<psi|sigma|psi>``.
    ``squared=False`` returns the root fidelity ``Tr|sqrt(rho) sqrt(sigma)|``.
    """
    rho = as_matrix(rho)
    sigma = as_matrix(sigma, rho.shape[0])
    root = np.linalg.svd(psd_sqrt(rho) @ psd_sqrt(sigma), compute_uv=False).sum()
    value = root**2 if squared else root
    return float(min(1.0, max(0.0, value)))


def partial_trace_a(rho):
    """Reduced state of photon ``b``."""
    r = as_matrix(rho, 4).reshape(2, 2, 2, 2)
    return np.einsum("ijik->jk", r)


def partial_trace_b(rho):
    """Reduced state of photon ``a``."""
    r = as_matrix(rho, 4).reshape(2, 2, 2, 2)
    return np.einsum("ijkj->ik", r)


def random_density_matrix(rng, dim=4, rank=None):
    """Random state from the induced (Ginibre) measure with the given rank."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
