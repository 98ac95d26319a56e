"""Simulated 16-setting polarization tomography and its reconstruction.

The protocol projects each photon on one of ``H, V, D, R`` (D = (H+V)/sqrt2,
R = (H+iV)/sqrt2), giving 16 product settings numbered ``4 * i_a + i_b``.
Counts carry a common unknown scale (pair rate times integration time), so
both estimators work with the unnormalized operator ``T`` whose expected
counts are ``Tr(T P_s)`` and only normalize at the end.

Noisy counts come from ``numpy.random.default_rng(seed).poisson`` (PCG64 bit
generator, numpy's Poisson sampler), drawn once over the 16 settings in id
order, so a given seed reproduces the same counts bit for bit.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConvergenceError, NumericError, ProtocolError
from .qcore import PAULIS, check_density_matrix

ANALYZER_LABELS = ("H", "V", "D", "R")
ANALYZER_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "R": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}
N_SETTINGS = 16


@dataclass(frozen=True)
class MeasurementSetting:
    id: int
    analyzer_a: str
    analyzer_b: str

    @property
    def ket(self):
        return np.kron(ANALYZER_KETS[self.analyzer_a], ANALYZER_KETS[self.analyzer_b])

    @property
    def projector(self):
        k = self.ket
        return np.outer(k, k.conj())


@dataclass(frozen=True)
class CountRecord:
    setting_id: int
    count: int

    def __post_init__(self):
        if not 0 <= self.setting_id < N_SETTINGS:
            raise ProtocolError(f"setting id {self.setting_id} outside 0..15")
        if self.count < 0:
            raise ProtocolError(f"negative count {self.count} for setting {self.setting_id}")


def settings_16():
    return [
        MeasurementSetting(4 * i + j, a, b)
        for i, a in enumerate(ANALYZER_LABELS)
        for j, b in enumerate(ANALYZER_LABELS)
    ]


SETTINGS = settings_16()
_KETS = np.array([s.ket for s in SETTINGS])  # (16, 4)
_PROJECTORS = np.einsum("si,sj->sij", _KETS, _KETS.conj())
# _DESIGN[s, k] = Tr(B_k P_s) for the Hermitian Pauli basis B_k = s_i x s_j
_PAULI_BASIS = np.array([np.kron(p, q) for p in PAULIS for q in PAULIS])
_DESIGN = np.einsum("kij,sji->sk", _PAULI_BASIS, _PROJECTORS).real


def probabilities(rho):
    """``Tr(rho P_s)`` for the 16 settings."""
    return np.einsum("si,ij,sj->s", _KETS.conj(), rho, _KETS).real


def simulate_counts(rho, n_per_setting, seed=0, noiseless=False):
    """Coincidence counts for every setting with exposure ``n_per_setting``.

    The expected count is ``n_per_setting * Tr(rho P_s)``; ``noiseless`` returns
    it rounded to the nearest integer, otherwise one Poisson draw per setting.
    """
    rho = check_density_matrix(rho)
    if int(n_per_setting) < 1:
        raise ProtocolError("n_per_setting must be >= 1")
    mu = int(n_per_setting) * np.clip(probabilities(rho), 0.0, None)
    if noiseless:
        counts = np.rint(mu).astype(np.int64)
    else:
        counts = np.random.default_rng(seed).poisson(mu)
    return [CountRecord(s, int(c)) for s, c in enumerate(counts)]


def check_counts(counts):
    """Validate tomography input and return a length-16 integer array ordered by setting id.

    Accepts a sequence of :class:`CountRecord`, a mapping ``{setting_id: count}``
    or a plain length-16 array.
    """
    if isinstance(counts, (list, tuple)) and not counts:
        raise ProtocolError("no count records")
    if isinstance(counts, dict):
        records = [CountRecord(int(k), int(v)) for k, v in counts.items()]
    elif len(counts) and isinstance(counts[0], CountRecord):
        records = list(counts)
    else:
        arr = np.asarray(counts)
        if arr.shape != (N_SETTINGS,):
            raise ProtocolError(f"expected 16 counts, got shape {arr.shape}")
        records = [CountRecord(i, int(c)) for i, c in enumerate(arr)]

    out = np.full(N_SETTINGS, -1, dtype=np.int64)
    for r in records:
        if out[r.setting_id] >= 0:
            raise ProtocolError(f"duplicate record for setting {r.setting_id}")
        out[r.setting_id] = r.count
    missing = [i for i in range(N_SETTINGS) if out[i] < 0]
    if missing:
        raise ProtocolError(f"missing settings {missing}")
    if out.sum() <= 0:
        raise ProtocolError("all counts are zero")
    return out


def _linear_unnormalized(c):
    t = np.linalg.solve(_DESIGN, c.astype(float))
    return np.einsum("k,kij->ij", t, _PAULI_BASIS)


def linear_reconstruct(counts):
    """Linear inversion: the Hermitian matrix reproducing the count ratios exactly.

    The result has unit trace but need not be positive semidefinite.
    """
    c = check_counts(counts)
    t = _linear_unnormalized(c)
    tr = np.trace(t).real
    if tr <= 0:
        raise NumericError("linear inversion produced a non-positive trace")
    t = t / tr
    return 0.5 * (t + t.conj().T)


def project_psd(m):
    """Nearest unit-trace PSD matrix obtained by clipping negative eigenvalues."""
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise NumericError("matrix has no positive spectrum to project onto")
    w = w / w.sum()
    return (v * w) @ v.conj().T


def negative_log_likelihood(rho, counts):
    """Poisson NLL ``sum(mu - c ln mu)`` with the count scale profiled out.

    For a given state the best scale is ``sum(c) / sum(Tr(rho P_s))``.
    """
    c = check_counts(counts).astype(float)
    p = np.clip(probabilities(rho), 0.0, None)
    return _nll(p * c.sum() / p.sum(), c)


def _nll(mu, c):
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(c > 0, c * np.log(mu), 0.0)
    return float(np.sum(mu) - np.sum(logs))


# lower-triangular parameterization of G with T = G^dag G
_TRIL = np.tril_indices(4)
_OFFDIAG = _TRIL[0] != _TRIL[1]
N_PARAMS = 16


def _unpack(theta):
    g = np.zeros((4, 4), dtype=complex)
    re = theta[:10]
    im = np.zeros(10)
    im[_OFFDIAG] = theta[10:]
    g[_TRIL] = re + 1j * im
    return g


def _pack(g):
    vals = g[_TRIL]
    return np.concatenate([vals.real, vals.imag[_OFFDIAG]])


def _factor(t):
    """Lower-triangular ``G`` with ``t = G^dag G`` (t positive definite)."""
    rev = t[::-1, ::-1]
    low = np.linalg.cholesky(rev)
    upper = low[::-1, ::-1]  # t = upper @ upper^dag
    return upper.conj().T


def _objective(theta, c):
    g = _unpack(theta)
    v = _KETS @ g.T  # v[s] = G psi_s
    mu = np.einsum("si,si->s", v.conj(), v).real
    floor = 1e-300
    mu_safe = np.maximum(mu, floor)
    f = _nll(mu_safe, c)
    w = 1.0 - c / mu_safe
    m = np.einsum("s,si,sj->ij", w, v, _KETS.conj())
    grad = np.concatenate([2 * m.real[_TRIL], 2 * m.imag[_TRIL][_OFFDIAG]])
    return f, grad


def mle_reconstruct(counts, max_evals=100_000, gtol=1e-10, return_info=False):
    """Maximum-likelihood density matrix from 16 coincidence counts.

    Minimizes the Poisson negative log-likelihood over ``T = G^dag G`` with
    ``G`` lower triangular (16 real parameters), so the estimate is positive
    semidefinite by construction. L-BFGS-B with the analytic gradient starts
    from the PSD-projected linear-inversion estimate, lightly mixed with the
    identity so the Cholesky factor exists.

    Parameters
    ----------
    counts : sequence of CountRecord, mapping or array of 16 ints
    max_evals : int
        Budget of likelihood evaluations.
    gtol : float
        Projected-gradient tolerance passed to the optimizer.
    return_info : bool
        Also return a dict with ``nll``, ``nll_initial`` and ``n_evals``.

    Raises
    ------
    ConvergenceError
        When the budget runs out first; ``exc.best`` holds the best estimate.
    """
    c = check_counts(counts).astype(float)
    rho0 = project_psd(linear_reconstruct(c))
    nll_initial = negative_log_likelihood(rho0, c)

    start = 0.999 * rho0 + 0.001 * np.eye(4) / 4
    scale = c.sum() / probabilities(start).sum()
    theta0 = _pack(_factor(scale * start))

    res = minimize(
        _objective,
        theta0,
        args=(c,),
        jac=True,
        method="L-BFGS-B",
        options={"maxfun": max_evals, "maxiter": max_evals, "gtol": gtol, "ftol": 1e-15},
    )
    g = _unpack(res.x)
    t = g.conj().T @ g
    rho = t / np.trace(t).real
    rho = 0.5 * (rho + rho.conj().T)
    nll = negative_log_likelihood(rho, c)
    if nll > nll_initial:
        rho, nll = rho0, nll_initial
    if res.nfev >= max_evals and not res.success:
        raise ConvergenceError(
            f"likelihood maximization did not converge in {max_evals} evaluations", best=rho
        )
    if return_info:
        return rho, {"nll": nll, "nll_initial": nll_initial, "n_evals": int(res.nfev)}
    return rho


class LinearInversionTomography(BaseEstimator):
    """Estimator wrapper around :func:`linear_reconstruct`.

    ``fit`` takes the 16 counts in any form accepted by :func:`check_counts`
    and stores ``density_matrix_`` (unit trace, possibly not PSD).
    """

    def __init__(self, project=False):
        self.project = project

    def fit(self, X, y=None):
        rho = linear_reconstruct(X)
        self.density_matrix_ = project_psd(rho) if self.project else rho
        return self

    def predict(self, X=None):
        """Expected count fractions of each setting under the fitted state."""
        check_is_fitted(self, "density_matrix_")
        return probabilities(self.density_matrix_)


class MaximumLikelihoodTomography(BaseEstimator):
    """Physical (PSD, unit-trace) state estimate from 16 coincidence counts.

    Examples
    --------
    >>> from esdrevival.channels import bell_phi_plus
    >>> counts = simulate_counts(bell_phi_plus(), 10_000, noiseless=True)
    >>> est = MaximumLikelihoodTomography().fit(counts)
    >>> round(float(est.density_matrix_[0, 3].real), 3)
    0.5
    """

    def __init__(self, max_evals=100_000, gtol=1e-10):
        self.max_evals = max_evals
        self.gtol = gtol

    def fit(self, X, y=None):
        rho, info = mle_reconstruct(X, self.max_evals, self.gtol, return_info=True)
        self.density_matrix_ = rho
        self.nll_ = info["nll"]
        self.n_evals_ = info["n_evals"]
        return self

    def predict(self, X=None):
        check_is_fitted(self, "density_matrix_")
        return probabilities(self.density_matrix_)

    def score(self, X, y=None):
        """Log-likelihood (up to a constant) of new counts under the fitted state."""
        check_is_fitted(self, "density_matrix_")
        return -negative_log_likelihood(self.density_matrix_, X)


COUNTS_HEADER = ("setting_id", "analyzer_a", "analyzer_b", "count")


def counts_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COUNTS_HEADER)
    for r in sorted(records, key=lambda r: r.setting_id):
        s = SETTINGS[r.setting_id]
        writer.writerow([r.setting_id, s.analyzer_a, s.analyzer_b, r.count])
    return buf.getvalue()


def counts_from_csv(text):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ProtocolError("counts file is empty") from None
    if tuple(h.strip() for h in header) != COUNTS_HEADER:
        raise ProtocolError(f"counts header must be {','.join(COUNTS_HEADER)}", line=1)
    records = []
    for lineno, row in enumerate(reader, 2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 4:
            raise ProtocolError(f"expected 4 columns, got {len(row)}", line=lineno)
        try:
            sid, count = int(row[0]), int(row[3])
        except ValueError:
            raise ProtocolError("setting_id and count must be integers", line=lineno) from None
        if not 0 <= sid < N_SETTINGS:
            raise ProtocolError(f"setting id {sid} outside 0..15", line=lineno)
        s = SETTINGS[sid]
        if (row[1].strip(), row[2].strip()) != (s.analyzer_a, s.analyzer_b):
            raise ProtocolError(
                f"analyzers {row[1].strip()},{row[2].strip()} do not match setting {sid} "
                f"({s.analyzer_a},{s.analyzer_b})",
                line=lineno,
            )
        records.append(CountRecord(sid, count))
    return records
