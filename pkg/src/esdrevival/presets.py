"""Frozen scenario presets: the maximal and partial three-line sweeps."""

from .config import parse_config
from .exceptions import ConfigError

FIG2A = """\
# Bell state, photon b through the etalon-filtered birefringent delay
name = fig2a
scenario = maximal
spectrum.lambda0_nm = 780
spectrum.lines = 0.37 778.853 0.9; 0.44 780.160 0.9; 0.19 781.459 0.9
spectrum.phase_model = delay
birefringence.delta_n = 0.01
sweep.x_min = 0
sweep.x_max = 800
sweep.step = 1
tomography.n_per_setting = 100000
tomography.seed = 0
tomography.noiseless = false
chsh.angles = -86.25 60.75 -85.5 76.5
chsh.optimize = true
"""

FIG2B = """\
# Partially entangled input; photon a dephased by a 117 lambda0 plate behind the
# 3 nm filter (kappa_a = 0.607), photon b as in fig2a with 0.85 nm line widths
name = fig2b
scenario = partial
spectrum.lambda0_nm = 780
spectrum.lines = 0.37 778.853 0.85; 0.44 780.160 0.85; 0.19 781.459 0.85
spectrum.phase_model = delay
birefringence.delta_n = 0.01
kappa_a.value = 0.607
sweep.x_min = 0
sweep.x_max = 800
sweep.step = 1
tomography.n_per_setting = 100000
tomography.seed = 0
tomography.noiseless = false
chsh.angles = -86.25 60.75 -85.5 76.5
chsh.optimize = true
"""

PRESETS = {"fig2a": FIG2A, "fig2b": FIG2B}


def preset_text(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def load_preset(name):
    return parse_config(preset_text(name))
