"""Bundled experiment presets (the three standard test cases).

All three share the domain (-8, 8), the Gaussian spinor initial data
phi_1 = exp(-x^2)/sqrt(2), phi_2 = exp(-sqrt(2) x^2), and the electric
potential (1 - x) / (2 + 2 x^2):

* I   - nonlinear, no magnetic potential (lam = 0.5, V_m = 0)
* II  - linear with magnetic potential (lam = 0, V_m = (x+1)^2/(1+x^2))
* III - nonlinear with magnetic potential (lam = 0.5, same V_m)
"""

import numpy as np

from .errors import ConfigError
from .model import DiracModel
from .spectral import SpaceGrid

__all__ = ["EXAMPLES", "gaussian_pair", "example_model", "DOMAIN", "T_FINAL"]

DOMAIN = (-8.0, 8.0)
T_FINAL = 0.5

EXAMPLES = {
    "I": {"ve": "tilted-well", "vm": "zero", "lam": 0.5},
    "II": {"ve": "tilted-well", "vm": "shifted-bump", "lam": 0.0},
    "III": {"ve": "tilted-well", "vm": "shifted-bump", "lam": 0.5},
}


def gaussian_pair(x):
    """The standard initial spinor on the grid points x."""
    return np.stack(
        [
            np.exp(-(x**2)) / np.sqrt(2.0),
            np.exp(-np.sqrt(2.0) * x**2),
        ]
    ).astype(complex)


def example_model(name, eps, n, a=None, b=None, lam=None):
    """Build (model, phi0) for one of the presets ``I``, ``II``, ``III``."""
    if name not in EXAMPLES:
        raise ConfigError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
    setup = EXAMPLES[name]
    a = DOMAIN[0] if a is None else a
    b = DOMAIN[1] if b is None else b
    grid = SpaceGrid(a, b, n)
    model = DiracModel(
        grid,
        eps=eps,
        lam=setup["lam"] if lam is None else lam,
        ve=setup["ve"],
        vm=setup["vm"],
    )
    return model, gaussian_pair(grid.x)
