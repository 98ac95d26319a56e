"""Scenario configuration: flat ``key = value`` text with dotted section keys.

Example (the ``fig2b`` preset)::

    name = fig2b
    scenario = partial
    spectrum.lambda0_nm = 780
    spectrum.lines = 0.37 778.853 0.85; 0.44 780.160 0.85; 0.19 781.459 0.85
    kappa_a.value = 0.607
    sweep.x_min = 0
    sweep.x_max = 800
    sweep.step = 1

Blank lines and ``#`` comments are ignored. See ``docs/config.md`` for every
key. Errors name the offending line and key.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path

from .bell import PRESET_ANGLES, AngleSet
from .exceptions import ConfigError, OutputError
from .spectrum import (
    PHASE_MODELS,
    BirefringenceRecord,
    FPCavity,
    GaussianEnvelope,
    Spectrum,
    compose_filtered_spectrum,
    kernel_gaussian,
    spectrum_from_table,
)

SCENARIOS = ("maximal", "partial")

KNOWN_KEYS = {
    "name",
    "scenario",
    "spectrum.lambda0_nm",
    "spectrum.lines",
    "spectrum.table",
    "spectrum.envelope.center_nm",
    "spectrum.envelope.sigma_nm",
    "spectrum.cavity.optical_thickness_nm",
    "spectrum.cavity.reflectivity",
    "spectrum.max_lines",
    "spectrum.phase_model",
    "birefringence.delta_n",
    "birefringence.n_o",
    "birefringence.n_e",
    "kappa_a.value",
    "kappa_a.envelope.center_nm",
    "kappa_a.envelope.sigma_nm",
    "kappa_a.x",
    "sweep.x_min",
    "sweep.x_max",
    "sweep.step",
    "sweep.include_s",
    "tomography.n_per_setting",
    "tomography.seed",
    "tomography.noiseless",
    "chsh.angles",
    "chsh.optimize",
    "output.path",
}


@dataclass(frozen=True)
class SweepRange:
    x_min: float = 0.0
    x_max: float = 800.0
    step: float = 1.0


@dataclass(frozen=True)
class TomographyOptions:
    n_per_setting: int = 100_000
    seed: int = 0
    noiseless: bool = False


@dataclass(frozen=True)
class ChshOptions:
    angles: AngleSet = PRESET_ANGLES
    optimize: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    scenario: str
    spectrum: Spectrum
    kappa_a: complex = None
    phase_model: str = "delay"
    birefringence: BirefringenceRecord = BirefringenceRecord()
    sweep: SweepRange = SweepRange()
    include_s: bool = False
    tomography: TomographyOptions = TomographyOptions()
    chsh: ChshOptions = ChshOptions()
    output_path: str = None
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def with_seed(self, seed):
        return replace(self, tomography=replace(self.tomography, seed=int(seed)))


def parse_pairs(text):
    """Split config text into ``{key: (value, line_number)}``."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", line=lineno, field=key)
        if key in pairs:
            raise ConfigError(f"duplicate key (first set on line {pairs[key][1]})", line=lineno, field=key)
        pairs[key] = (value.strip(), lineno)
    return pairs


class _Reader:
    def __init__(self, pairs, base_dir):
        self.pairs = pairs
        self.base_dir = base_dir

    def has(self, key):
        return key in self.pairs

    def raw(self, key, default=None):
        if key not in self.pairs:
            return default
        return self.pairs[key][0]

    def fail(self, key, message):
        line = self.pairs[key][1] if key in self.pairs else None
        raise ConfigError(message, line=line, field=key)

    def number(self, key, default=None, kind=float):
        if key not in self.pairs:
            if default is None:
                self.fail(key, "required key is missing")
            return default
        value = self.raw(key)
        try:
            return kind(value)
        except ValueError:
            self.fail(key, f"cannot parse {value!r} as {kind.__name__}")

    def flag(self, key, default):
        if key not in self.pairs:
            return default
        value = self.raw(key).lower()
        if value in ("true", "yes", "1", "on"):
            return True
        if value in ("false", "no", "0", "off"):
            return False
        self.fail(key, f"expected true/false, got {value!r}")

    def wrap(self, key, fn):
        """Run ``fn`` and attach the key's line to any ConfigError it raises."""
        try:
            return fn()
        except ConfigError as exc:
            if exc.line is not None:
                raise
            self.fail(key, str(exc))


def _parse_lines(reader, lambda0):
    key = "spectrum.lines"
    rows = []
    for chunk in reader.raw(key).split(";"):
        cells = chunk.replace(",", " ").split()
        if not cells:
            continue
        if len(cells) != 3:
            reader.fail(key, f"each line needs 'amplitude center_nm sigma_nm', got {chunk.strip()!r}")
        try:
            rows.append(tuple(float(c) for c in cells))
        except ValueError:
            reader.fail(key, f"non-numeric entry in {chunk.strip()!r}")
    if not rows:
        reader.fail(key, "no spectral lines given")
    a, c, s = zip(*rows)
    return reader.wrap(key, lambda: Spectrum.from_arrays(a, c, s, lambda0))


def _build_spectrum(reader):
    sources = [
        k for k in ("spectrum.lines", "spectrum.table", "spectrum.cavity.optical_thickness_nm")
        if reader.has(k)
    ]
    if len(sources) != 1:
        raise ConfigError(
            "give exactly one of spectrum.lines, spectrum.table or an envelope+cavity composition",
            line=reader.pairs[sources[1]][1] if len(sources) > 1 else None,
            field="spectrum",
        )
    lambda0 = reader.number("spectrum.lambda0_nm", 780.0)
    src = sources[0]
    if src == "spectrum.lines":
        return _parse_lines(reader, lambda0)
    if src == "spectrum.table":
        path = Path(reader.raw(src))
        if not path.is_absolute():
            path = reader.base_dir / path
        try:
            text = path.read_text()
        except OSError as exc:
            raise OutputError(f"cannot read spectrum table {path}: {exc}") from exc
        return reader.wrap(src, lambda: spectrum_from_table(text))
    envelope = reader.wrap(
        "spectrum.envelope.sigma_nm",
        lambda: GaussianEnvelope(
            reader.number("spectrum.envelope.center_nm", lambda0),
            reader.number("spectrum.envelope.sigma_nm"),
        ),
    )
    cavity = reader.wrap(
        src,
        lambda: FPCavity(reader.number(src), reader.number("spectrum.cavity.reflectivity")),
    )
    max_lines = reader.number("spectrum.max_lines", 3, int)
    return reader.wrap(src, lambda: compose_filtered_spectrum(envelope, cavity, max_lines, lambda0))


def _build_kappa_a(reader, scenario, lambda0, phase_model, birefringence):
    direct = reader.has("kappa_a.value")
    derived = reader.has("kappa_a.envelope.sigma_nm") or reader.has("kappa_a.x")
    if scenario != "partial":
        if direct or derived:
            key = "kappa_a.value" if direct else "kappa_a.x"
            reader.fail(key, "kappa_a is only used by the partial scenario")
        return None
    if direct == derived:
        raise ConfigError(
            "partial scenario needs exactly one kappa_a source: kappa_a.value, "
            "or kappa_a.envelope.sigma_nm with kappa_a.x",
            field="kappa_a",
        )
    if direct:
        value = reader.raw("kappa_a.value")
        try:
            kappa = complex(value.replace(" ", ""))
        except ValueError:
            reader.fail("kappa_a.value", f"cannot parse {value!r} as a number")
        if abs(kappa) > 1:
            reader.fail("kappa_a.value", f"|kappa_a| = {abs(kappa):.6g} exceeds 1")
        return kappa.real if kappa.imag == 0 else kappa
    envelope = reader.wrap(
        "kappa_a.envelope.sigma_nm",
        lambda: GaussianEnvelope(
            reader.number("kappa_a.envelope.center_nm", lambda0),
            reader.number("kappa_a.envelope.sigma_nm"),
        ),
    )
    x_a = reader.number("kappa_a.x")
    return kernel_gaussian(envelope, x_a, lambda0, phase_model, birefringence)


def build_config(pairs, base_dir=Path(".")):
    reader = _Reader(pairs, Path(base_dir))
    name = reader.raw("name", "custom")
    scenario = reader.raw("scenario", "maximal")
    if scenario not in SCENARIOS:
        reader.fail("scenario", f"expected one of {SCENARIOS}, got {scenario!r}")

    phase_model = reader.raw("spectrum.phase_model", "delay")
    if phase_model not in PHASE_MODELS:
        reader.fail("spectrum.phase_model", f"expected one of {PHASE_MODELS}")
    n_o = reader.number("birefringence.n_o", 0.0) if reader.has("birefringence.n_o") else None
    n_e = reader.number("birefringence.n_e", 0.0) if reader.has("birefringence.n_e") else None
    default_dn = n_o - n_e if n_o is not None and n_e is not None else 0.01
    birefringence = reader.wrap(
        "birefringence.delta_n",
        lambda: BirefringenceRecord(reader.number("birefringence.delta_n", default_dn), n_o, n_e),
    )

    spectrum = _build_spectrum(reader)
    kappa_a = _build_kappa_a(reader, scenario, spectrum.lambda0_nm, phase_model, birefringence)

    sweep = SweepRange(
        reader.number("sweep.x_min", 0.0),
        reader.number("sweep.x_max", 800.0),
        reader.number("sweep.step", 1.0),
    )
    if not sweep.step > 0:
        reader.fail("sweep.step", "step must be > 0")
    if sweep.x_max < sweep.x_min:
        reader.fail("sweep.x_max", "x_max must not be below x_min")

    tomo = TomographyOptions(
        reader.number("tomography.n_per_setting", 100_000, int),
        reader.number("tomography.seed", 0, int),
        reader.flag("tomography.noiseless", False),
    )
    if tomo.n_per_setting < 1:
        reader.fail("tomography.n_per_setting", "must be >= 1")

    angles = PRESET_ANGLES
    if reader.has("chsh.angles"):
        value = reader.raw("chsh.angles")
        try:
            vals = [float(v) for v in value.replace(",", " ").split()]
        except ValueError:
            reader.fail("chsh.angles", f"non-numeric angle in {value!r}")
        if len(vals) != 4:
            reader.fail("chsh.angles", "expected four angles: theta1 theta1' theta2 theta2'")
        angles = reader.wrap("chsh.angles", lambda: AngleSet(*vals))
    chsh = ChshOptions(angles, reader.flag("chsh.optimize", True))

    return ScenarioConfig(
        name=name,
        scenario=scenario,
        spectrum=spectrum,
        kappa_a=kappa_a,
        phase_model=phase_model,
        birefringence=birefringence,
        sweep=sweep,
        include_s=reader.flag("sweep.include_s", False),
        tomography=tomo,
        chsh=chsh,
        output_path=reader.raw("output.path"),
        source={k: v for k, (v, _) in pairs.items()},
    )


def parse_config(text, base_dir=Path(".")):
    return build_config(parse_pairs(text), base_dir)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, path.parent)
