"""Spectral models and the complex decoherence kernel.

A photon whose spectrum is a sum of Gaussian lines picks up, after a
birefringent delay, the coherence factor

    kappa(x) = sum_j A_j exp(-(beta_j x)^2 / 16) exp(2 pi i x lambda0 / lambda_j)

where ``x`` is the delay in units of the reference wavelength ``lambda0`` and
``beta_j = 2 pi lambda0 sigma_j / lambda_j^2`` converts a wavelength width to
the angular-frequency width seen by the phase. Widths follow the
``exp(-4 (w - w0)^2 / sigma^2)`` convention, not FWHM.

With ``phase_model="literal"`` the delay is instead ``x * delta_n`` (plate
thickness ``x`` lambda0 times the birefringence), which shrinks every feature
by ``1 / delta_n`` along ``x``.
"""

import io
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError

PHASE_MODELS = ("delay", "literal")


@dataclass(frozen=True)
class SpectralLine:
    amplitude: float
    center_nm: float
    sigma_nm: float

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ConfigError(f"line amplitude must be > 0, got {self.amplitude}")
        if not self.center_nm > 0:
            raise ConfigError(f"line center must be > 0 nm, got {self.center_nm}")
        if not self.sigma_nm >= 0:
            raise ConfigError(f"line width must be >= 0 nm, got {self.sigma_nm}")


@dataclass(frozen=True)
class Spectrum:
    lines: tuple
    lambda0_nm: float = 780.0

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        if not self.lines:
            raise ConfigError("spectrum has no lines")
        if not self.lambda0_nm > 0:
            raise ConfigError(f"reference wavelength must be > 0, got {self.lambda0_nm}")
        total = sum(line.amplitude for line in self.lines)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"line amplitudes sum to {total!r}, expected 1")

    @classmethod
    def from_arrays(cls, amplitudes, centers_nm, sigmas_nm, lambda0_nm=780.0, normalize=False):
        amplitudes = np.asarray(amplitudes, dtype=float)
        if normalize:
            amplitudes = amplitudes / amplitudes.sum()
        sigmas = np.broadcast_to(np.asarray(sigmas_nm, dtype=float), amplitudes.shape)
        lines = [
            SpectralLine(float(a), float(c), float(s))
            for a, c, s in zip(amplitudes, centers_nm, sigmas)
        ]
        return cls(tuple(lines), float(lambda0_nm))

    @property
    def amplitudes(self):
        return np.array([line.amplitude for line in self.lines])

    @property
    def centers_nm(self):
        return np.array([line.center_nm for line in self.lines])

    @property
    def sigmas_nm(self):
        return np.array([line.sigma_nm for line in self.lines])

    def with_sigma(self, sigma_nm):
        """Copy with every line width replaced by ``sigma_nm``."""
        return Spectrum.from_arrays(self.amplitudes, self.centers_nm, sigma_nm, self.lambda0_nm)


@dataclass(frozen=True)
class GaussianEnvelope:
    center_nm: float
    sigma_nm: float

    def __post_init__(self):
        if not self.sigma_nm > 0:
            raise ConfigError(f"envelope width must be > 0, got {self.sigma_nm}")
        if not self.center_nm > 0:
            raise ConfigError(f"envelope center must be > 0, got {self.center_nm}")

    def __call__(self, wavelength_nm):
        d = np.asarray(wavelength_nm, dtype=float) - self.center_nm
        return np.exp(-4.0 * d**2 / self.sigma_nm**2)


@dataclass(frozen=True)
class FPCavity:
    """Fabry-Perot etalon: optical thickness (n times L, in nm) and mirror reflectivity."""

    optical_thickness_nm: float
    reflectivity: float

    def __post_init__(self):
        if not self.optical_thickness_nm > 0:
            raise ConfigError("cavity optical thickness must be > 0")
        if not 0 <= self.reflectivity < 1:
            raise ConfigError(f"reflectivity must lie in [0, 1), got {self.reflectivity}")

    def resonance(self, order):
        """Wavelength (nm) transmitted at interference order ``order``."""
        return 2.0 * self.optical_thickness_nm / order

    def free_spectral_range(self, wavelength_nm):
        return wavelength_nm**2 / (2.0 * self.optical_thickness_nm)


@dataclass(frozen=True)
class BirefringenceRecord:
    delta_n: float = 0.01
    n_o: float = None
    n_e: float = None

    def __post_init__(self):
        if self.n_o is not None and self.n_e is not None:
            if abs(self.n_o - self.n_e - self.delta_n) > 1e-12:
                raise ConfigError("delta_n must equal n_o - n_e")


QUARTZ = BirefringenceRecord(delta_n=0.01)


def _delay(x, phase_model, birefringence):
    x = np.asarray(x, dtype=float)
    if phase_model == "delay":
        return x
    if phase_model == "literal":
        return x * birefringence.delta_n
    raise ConfigError(f"unknown phase model {phase_model!r}; expected one of {PHASE_MODELS}")


def kernel(spectrum, x, phase_model="delay", birefringence=QUARTZ):
    """Decoherence kernel of a multi-line spectrum at evolution parameter ``x``.

    ``x`` may be a scalar or an array; the result has the same shape.
    """
    if not isinstance(spectrum, Spectrum):
        raise ConfigError("kernel() needs a Spectrum")
    d = _delay(x, phase_model, birefringence)
    lam0 = spectrum.lambda0_nm
    amps = spectrum.amplitudes
    lam = spectrum.centers_nm
    beta = 2.0 * np.pi * lam0 * spectrum.sigmas_nm / lam**2
    dd = d[..., None]
    terms = amps * np.exp(-((beta * dd) ** 2) / 16.0 + 2j * np.pi * dd * lam0 / lam)
    out = terms.sum(axis=-1)
    return complex(out) if out.ndim == 0 else out


def kernel_gaussian(envelope, x, lambda0_nm=780.0, phase_model="delay", birefringence=QUARTZ):
    """Kernel of a single Gaussian line (e.g. an interference-filter passband)."""
    single = Spectrum((SpectralLine(1.0, envelope.center_nm, envelope.sigma_nm),), lambda0_nm)
    return kernel(single, x, phase_model, birefringence)


def airy_transmission(cavity, wavelength_nm):
    """Lossless etalon transmission ``(1-R)^2 / ((1-R)^2 + 4 R sin^2(2 pi nL / lambda))``."""
    lam = np.asarray(wavelength_nm, dtype=float)
    if np.any(lam <= 0):
        raise ConfigError("wavelength must be > 0")
    r = cavity.reflectivity
    s = np.sin(2.0 * np.pi * cavity.optical_thickness_nm / lam)
    t = (1 - r) ** 2 / ((1 - r) ** 2 + 4 * r * s**2)
    return float(t) if t.ndim == 0 else t


GRID_STEP_NM = 1e-3
PEAK_FLOOR = 0.01


def compose_filtered_spectrum(envelope, cavity, max_lines, lambda0_nm=None):
    """Discretize a Gaussian passband through an etalon into spectral lines.

    The product ``T(lambda) * envelope(lambda)`` is sampled every 0.001 nm
    over +-4 sigma of the envelope center. Every local maximum above 1% of the
    global maximum whose segment holds a cavity resonance is a candidate
    line (for ``R = 0`` the bare envelope is the line); its amplitude is the integral of the
    profile between the neighbouring minima and its width is
    ``2 sqrt(2)`` times the standard deviation of that profile segment. The
    ``max_lines`` strongest candidates are kept and renormalized.

    Parameters
    ----------
    envelope : GaussianEnvelope
    cavity : FPCavity
    max_lines : int
    lambda0_nm : float, optional
        Reference wavelength of the result; defaults to the envelope center.

    Returns
    -------
    Spectrum
        Lines ordered by wavelength.
    """
    if int(max_lines) < 1:
        raise ConfigError("max_lines must be >= 1")
    half = 4.0 * envelope.sigma_nm
    n = int(round(2 * half / GRID_STEP_NM)) + 1
    lam = np.linspace(envelope.center_nm - half, envelope.center_nm + half, n)
    y = airy_transmission(cavity, lam) * envelope(lam)

    interior = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])) + 1
    peaks = interior[y[interior] >= PEAK_FLOOR * y.max()] if interior.size else interior
    if peaks.size == 0:
        raise ConfigError(
            "no transmission peak within +-4 sigma of the envelope center; "
            "check cavity thickness against the passband"
        )

    bounds = [0]
    for left, right in zip(peaks[:-1], peaks[1:]):
        bounds.append(left + int(np.argmin(y[left:right + 1])))
    bounds.append(n - 1)

    candidates = []
    for k, p in enumerate(peaks):
        lo, hi = bounds[k], bounds[k + 1]
        if cavity.reflectivity > 0 and not _has_resonance(cavity, lam[lo], lam[hi]):
            continue  # envelope-shaped bump on a transmission tail, not a comb line
        seg_l = lam[lo:hi + 1]
        seg_y = y[lo:hi + 1]
        area = np.trapezoid(seg_y, seg_l)
        mean = np.trapezoid(seg_y * seg_l, seg_l) / area
        var = np.trapezoid(seg_y * (seg_l - mean) ** 2, seg_l) / area
        candidates.append((area, _refine_peak(lam, y, p), 2.0 * math.sqrt(2.0 * var)))

    if not candidates:
        raise ConfigError(
            "no transmission peak within +-4 sigma of the envelope center; "
            "check cavity thickness against the passband"
        )
    candidates.sort(key=lambda c: -c[0])
    kept = sorted(candidates[: int(max_lines)], key=lambda c: c[1])
    amps = np.array([c[0] for c in kept])
    return Spectrum.from_arrays(
        amps / amps.sum(),
        [c[1] for c in kept],
        [c[2] for c in kept],
        envelope.center_nm if lambda0_nm is None else lambda0_nm,
    )


def _has_resonance(cavity, lam_lo, lam_hi):
    two_nl = 2.0 * cavity.optical_thickness_nm
    return math.ceil(two_nl / lam_hi) <= math.floor(two_nl / lam_lo)


def _refine_peak(lam, y, i):
    if i == 0 or i == len(y) - 1:
        return float(lam[i])
    a, b, c = y[i - 1], y[i], y[i + 1]
    denom = a - 2 * b + c
    shift = 0.0 if denom == 0 else 0.5 * (a - c) / denom
    return float(lam[i] + shift * (lam[1] - lam[0]))


def spectrum_to_table(spectrum):
    """Serialize to the plain-text line table (``lambda0_nm`` row, then a CSV block)."""
    buf = io.StringIO()
    buf.write(f"lambda0_nm = {spectrum.lambda0_nm:.9g}\n")
    buf.write("A_j, lambda_nm, sigma_nm\n")
    for line in spectrum.lines:
        buf.write(f"{line.amplitude:.9g}, {line.center_nm:.9g}, {line.sigma_nm:.9g}\n")
    return buf.getvalue()


def spectrum_from_table(text):
    lambda0 = None
    rows = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("lambda0_nm"):
            _, _, value = line.partition("=")
            try:
                lambda0 = float(value)
            except ValueError:
                raise ConfigError(f"bad lambda0_nm value {value.strip()!r}", line=lineno) from None
            continue
        cells = [c.strip() for c in line.split(",")]
        if cells == ["A_j", "lambda_nm", "sigma_nm"]:
            header_seen = True
            continue
        if not header_seen:
            raise ConfigError("missing 'A_j, lambda_nm, sigma_nm' header", line=lineno)
        if len(cells) != 3:
            raise ConfigError(f"expected 3 columns, got {len(cells)}", line=lineno)
        try:
            rows.append(tuple(float(c) for c in cells))
        except ValueError:
            raise ConfigError(f"non-numeric cell in {line!r}", line=lineno) from None
    if lambda0 is None:
        raise ConfigError("spectrum table lacks lambda0_nm")
    if not rows:
        raise ConfigError("spectrum table has no lines")
    a, c, s = zip(*rows)
    return Spectrum.from_arrays(a, c, s, lambda0)


# Fitted three-line etalon comb used by both presets.
COMB_CENTERS_NM = (778.853, 780.160, 781.459)
COMB_AMPLITUDES = (0.37, 0.44, 0.19)
REFERENCE_LAMBDA0_NM = 780.0


def three_line_spectrum(sigma_nm):
    return Spectrum.from_arrays(COMB_AMPLITUDES, COMB_CENTERS_NM, sigma_nm, REFERENCE_LAMBDA0_NM)


FILTER_ENVELOPE = GaussianEnvelope(center_nm=780.0, sigma_nm=3.0)
