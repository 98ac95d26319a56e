"""Scenario runners: sweeps, state dumps, simulated tomography and CHSH reports.

Every runner is a pure function of a :class:`ScenarioConfig` (and ``x``);
serialization helpers turn the results into CSV / JSON text with floats
written to 9 significant digits so identical inputs give identical bytes.
"""

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array

from .bell import chsh_s, horodecki_smax, optimize_chsh_linear
from .channels import check_kappa, state_maximal, state_partial
from .entanglement import degree_of_polarization, find_crossings, gamma
from .exceptions import ConfigError
from .qcore import BASIS_LABELS, fidelity
from .spectrum import BirefringenceRecord, Spectrum, kernel
from .tomography import SETTINGS, mle_reconstruct, simulate_counts

SWEEP_COLUMNS = (
    "x",
    "re_kappa_b",
    "im_kappa_b",
    "abs_kappa_b",
    "gamma",
    "concurrence",
    "polarization",
    "chsh_s",
)


def fmt(v):
    """Float formatting shared by every emitted file."""
    return f"{float(v):.9g}"


def _round(v):
    return float(fmt(v))


def model_state(scenario, kappa_b, kappa_a=None):
    if scenario == "maximal":
        return state_maximal(kappa_b)
    if scenario == "partial":
        if kappa_a is None:
            raise ConfigError("partial scenario needs kappa_a")
        return state_partial(kappa_a, kappa_b)
    raise ConfigError(f"unknown scenario {scenario!r}")


class EntanglementSweep(TransformerMixin, BaseEstimator):
    """Map evolution parameters ``x`` to kernel and entanglement figures.

    ``transform`` takes a column of ``x`` values and returns an array with
    columns ``re kappa_b, im kappa_b, |kappa_b|, gamma, C, P``; ``P`` is NaN
    for the maximal scenario, where the heralded photon is always pure.

    Parameters
    ----------
    spectrum : Spectrum
        Spectral lines of photon b.
    scenario : {"maximal", "partial"}
    kappa_a : complex, optional
        Coherence factor of photon a (partial scenario only).
    phase_model : {"delay", "literal"}
    delta_n : float
        Birefringence used by the literal phase model.
    """

    def __init__(self, spectrum=None, scenario="maximal", kappa_a=None, phase_model="delay", delta_n=0.01):
        self.spectrum = spectrum
        self.scenario = scenario
        self.kappa_a = kappa_a
        self.phase_model = phase_model
        self.delta_n = delta_n

    def fit(self, X=None, y=None):
        if not isinstance(self.spectrum, Spectrum):
            raise ConfigError("EntanglementSweep needs a Spectrum")
        if self.scenario not in ("maximal", "partial"):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.scenario == "partial":
            if self.kappa_a is None:
                raise ConfigError("partial scenario needs kappa_a")
            check_kappa(self.kappa_a)
        if X is not None:
            check_array(X, ensure_2d=False)
        self.n_features_in_ = 1
        return self

    def kappa_b(self, x):
        return kernel(self.spectrum, x, self.phase_model, BirefringenceRecord(self.delta_n))

    def gamma_at(self, x):
        return gamma(model_state(self.scenario, self.kappa_b(float(x)), self.kappa_a))

    def transform(self, X):
        xs = check_array(X, ensure_2d=False, ensure_min_samples=1).reshape(-1)
        kb = np.atleast_1d(self.kappa_b(xs))
        out = np.empty((xs.size, 6))
        out[:, 0] = kb.real
        out[:, 1] = kb.imag
        out[:, 2] = np.abs(kb)
        for i, k in enumerate(kb):
            rho = model_state(self.scenario, k, self.kappa_a)
            g = gamma(rho)
            out[i, 3] = g
            out[i, 4] = max(0.0, g)
            out[i, 5] = degree_of_polarization(rho) if self.scenario == "partial" else np.nan
        return out


@dataclass(frozen=True)
class SweepRow:
    x: float
    re_kappa_b: float
    im_kappa_b: float
    abs_kappa_b: float
    gamma: float
    concurrence: float
    polarization: float = None
    chsh_s: float = None

    def cells(self):
        return [("" if v is None else fmt(v)) for v in (
            self.x, self.re_kappa_b, self.im_kappa_b, self.abs_kappa_b,
            self.gamma, self.concurrence, self.polarization, self.chsh_s,
        )]


def sweep_estimator(cfg):
    return EntanglementSweep(
        cfg.spectrum, cfg.scenario, cfg.kappa_a, cfg.phase_model, cfg.birefringence.delta_n
    ).fit()


def sweep_grid(cfg):
    sw = cfg.sweep
    n = int(np.floor((sw.x_max - sw.x_min) / sw.step + 1e-9)) + 1
    return sw.x_min + sw.step * np.arange(n)


def run_sweep(cfg):
    """Evaluate the scenario over its sweep grid.

    Returns
    -------
    rows : list of SweepRow
    report : CrossingReport
        Zero crossings of the signed concurrence over the same range.
    """
    est = sweep_estimator(cfg)
    xs = sweep_grid(cfg)
    table = est.transform(xs)
    rows = []
    for x, (re, im, ab, g, c, p) in zip(xs, table):
        s = None
        if cfg.include_s:
            s = chsh_s(model_state(cfg.scenario, complex(re, im), cfg.kappa_a), cfg.chsh.angles)
        rows.append(SweepRow(float(x), re, im, ab, g, c, None if np.isnan(p) else p, s))
    report = find_crossings(est.gamma_at, cfg.sweep.x_min, cfg.sweep.x_max, cfg.sweep.step)
    return rows, report


def sweep_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def sweep_summary(cfg, rows, report):
    """Crossings and concurrence maxima, as a JSON-ready dict."""
    c = np.array([r.concurrence for r in rows])
    xs = np.array([r.x for r in rows])
    summary = {
        "scenario": cfg.name,
        "crossings": [{"x": _round(d["x"]), "direction": d["direction"]} for d in report.as_dicts()],
    }
    if len(rows):
        i = int(np.argmax(c))
        summary["max_concurrence"] = {"x": _round(xs[i]), "value": _round(c[i])}
        k = first_local_minimum(c)
        if k is not None and k + 1 < len(c):
            j = k + 1 + int(np.argmax(c[k + 1:]))
            summary["revival_peak"] = {"x": _round(xs[j]), "value": _round(c[j])}
    return summary


def first_local_minimum(values):
    """Index of the first interior point not above either neighbour and below the start."""
    v = np.asarray(values)
    for i in range(1, len(v) - 1):
        if v[i] <= v[i - 1] and v[i] <= v[i + 1] and v[i] < v[0]:
            return i
    return None


def state_at(cfg, x):
    kb = sweep_estimator(cfg).kappa_b(float(x))
    return model_state(cfg.scenario, kb, cfg.kappa_a), kb


def _matrix_json(rho):
    return {
        "real": [[_round(v) for v in row] for row in rho.real],
        "imag": [[_round(v) for v in row] for row in rho.imag],
    }


def dump_state(cfg, x):
    """The model density matrix at ``x`` as a JSON-ready dict."""
    rho, kb = state_at(cfg, x)
    out = {
        "scenario": cfg.name,
        "x": _round(x),
        "kappa_b": {"re": _round(kb.real), "im": _round(kb.imag), "abs": _round(abs(kb))},
        "basis": list(BASIS_LABELS),
    }
    out.update(_matrix_json(rho))
    return out


def run_tomography(cfg, x, counts=None):
    """Simulate (or take) 16 counts for the model state at ``x`` and reconstruct it.

    ``counts`` overrides the simulation with measured records.
    """
    rho, kb = state_at(cfg, x)
    opts = cfg.tomography
    if counts is None:
        counts = simulate_counts(rho, opts.n_per_setting, opts.seed, opts.noiseless)
    est, info = mle_reconstruct(counts, return_info=True)
    g_hat = gamma(est)
    report = {
        "scenario": cfg.name,
        "x": _round(x),
        "n_per_setting": opts.n_per_setting,
        "seed": opts.seed,
        "noiseless": opts.noiseless,
        "counts": [
            {"setting_id": r.setting_id, "analyzer_a": SETTINGS[r.setting_id].analyzer_a,
             "analyzer_b": SETTINGS[r.setting_id].analyzer_b, "count": r.count}
            for r in counts
        ],
        "fidelity": _round(fidelity(est, rho)),
        "model_concurrence": _round(max(0.0, gamma(rho))),
        "reconstructed_gamma": _round(g_hat),
        "reconstructed_concurrence": _round(max(0.0, g_hat)),
        "model_abs_kappa_b": _round(abs(kb)),
        "nll": _round(info["nll"]),
        "nll_initial": _round(info["nll_initial"]),
        "n_evals": info["n_evals"],
        "basis": list(BASIS_LABELS),
    }
    report.update({"reconstructed_" + k: v for k, v in _matrix_json(est).items()})
    return report


def run_chsh(cfg, x):
    """CHSH value at the configured angles, the linear optimum and the all-settings bound."""
    rho, kb = state_at(cfg, x)
    angles = cfg.chsh.angles
    s_fixed = chsh_s(rho, angles)
    report = {
        "scenario": cfg.name,
        "x": _round(x),
        "abs_kappa_b": _round(abs(kb)),
        "angles": dict(zip(("theta1", "theta1p", "theta2", "theta2p"), map(_round, angles.as_tuple()))),
        "s_at_angles": _round(s_fixed),
        "violates_at_angles": bool(s_fixed > 2.0),
        "horodecki_smax": _round(horodecki_smax(rho)),
    }
    if cfg.chsh.optimize:
        best, s_best = optimize_chsh_linear(rho)
        report["optimized"] = {
            "angles": dict(zip(("theta1", "theta1p", "theta2", "theta2p"), map(_round, best.as_tuple()))),
            "s": _round(s_best),
            "violates": bool(s_best > 2.0),
        }
    return report


def to_json(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
