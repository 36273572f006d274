"""Periodic grids and Fourier machinery in x and tau.

Conventions used throughout the package:

* Fourier coefficients carry the 1/N factor on the forward transform, so the
  synthesis ``u(x_j) = sum_l uhat_l exp(i mu_l (x_j - a))`` holds exactly.
  This forces the analysis kernel ``exp(-i mu_l (x_j - a))``, i.e. the plain
  DFT scaled by 1/N.
* Mode sets are asymmetric: l runs over ``0..N/2-1, -N/2..-1`` (numpy FFT
  order), so exactly one Nyquist mode ``l = -N/2`` is present and ``+N/2`` is
  absent.  All smooth data used here are band-limited far below Nyquist.
"""

import numpy as np

from .errors import ConfigError

__all__ = [
    "SpaceGrid",
    "TauGrid",
    "make_space_grid",
    "make_tau_grid",
    "fourier_coeffs",
    "fourier_synthesis",
    "spectral_dx",
    "dtau_matrix",
    "trig_interp_tau",
]


def _check_even_size(n, name):
    if not isinstance(n, (int, np.integer)):
        raise ConfigError(f"{name} must be an integer, got {n!r}")
    if n < 4 or n % 2 != 0:
        raise ConfigError(f"{name} must be even and >= 4, got {n}")


class SpaceGrid:
    """Uniform periodic grid on [a, b) with modes mu_l = 2*pi*l/(b-a).

    Points are x_j = a + j*dx, j = 0..n-1 (right endpoint excluded).
    """

    def __init__(self, a, b, n):
        if not b > a:
            raise ConfigError(f"domain requires b > a, got ({a}, {b})")
        _check_even_size(n, "n")
        self.a = float(a)
        self.b = float(b)
        self.n = int(n)
        self.length = self.b - self.a
        self.dx = self.length / self.n
        self.x = self.a + self.dx * np.arange(self.n)
        self.modes = np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)
        self.mu = 2.0 * np.pi * self.modes / self.length

    def __repr__(self):
        return f"SpaceGrid(a={self.a}, b={self.b}, n={self.n})"


class TauGrid:
    """Uniform grid on the 2*pi-periodic fast variable, tau_j = j*dtau."""

    def __init__(self, n):
        _check_even_size(n, "n_tau")
        self.n = int(n)
        self.dtau = 2.0 * np.pi / self.n
        self.tau = self.dtau * np.arange(self.n)
        self.modes = np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)

    def __repr__(self):
        return f"TauGrid(n={self.n})"


def make_space_grid(a, b, n):
    """Validated constructor for :class:`SpaceGrid`."""
    return SpaceGrid(a, b, n)


def make_tau_grid(n):
    """Validated constructor for :class:`TauGrid`."""
    return TauGrid(n)


def fourier_coeffs(f, axis=-1):
    """Forward transform with the 1/N normalization (see module docstring)."""
    n = f.shape[axis]
    return np.fft.fft(f, axis=axis) / n


def fourier_synthesis(c, axis=-1):
    """Inverse of :func:`fourier_coeffs`."""
    n = c.shape[axis]
    return np.fft.ifft(c * n, axis=axis)


def spectral_dx(f, grid, order=1, axis=-1):
    """Derivative of the trigonometric interpolant along the x axis.

    Exact for band-limited input.  ``f`` may be any array whose ``axis``
    dimension matches ``grid.n`` (spinor fields, two-scale fields, ...).
    """
    f = np.asarray(f)
    if f.shape[axis] != grid.n:
        raise ConfigError(
            f"axis {axis} has size {f.shape[axis]}, expected grid.n={grid.n}"
        )
    shape = [1] * f.ndim
    shape[axis] = grid.n
    sym = (1j * grid.mu.reshape(shape)) ** order
    return np.fft.ifft(sym * np.fft.fft(f, axis=axis), axis=axis)


def dtau_matrix(tgrid):
    """Dense pseudo-differential matrix realizing d/dtau on the tau grid.

    Entries are d_{n,m} = (i/N) * sum_{l=-N/2}^{N/2-1} l exp(i l (tau_n - tau_m)),
    the collocation form of multiplying mode l by i*l (asymmetric Nyquist sum).
    """
    n = tgrid.n
    diff = tgrid.tau[:, None] - tgrid.tau[None, :]
    ls = tgrid.modes.astype(float)
    phases = np.exp(1j * ls[:, None, None] * diff[None, :, :])
    return (1j / n) * np.tensordot(ls, phases, axes=(0, 0))


def spectral_dtau(f, tgrid, order=1, axis=-2):
    """FFT-based tau derivative (mode k -> (i k)^order), exact for band-limited f."""
    f = np.asarray(f)
    if f.shape[axis] != tgrid.n:
        raise ConfigError(
            f"axis {axis} has size {f.shape[axis]}, expected tau grid size {tgrid.n}"
        )
    shape = [1] * f.ndim
    shape[axis] = tgrid.n
    sym = (1j * tgrid.modes.reshape(shape).astype(float)) ** order
    return np.fft.ifft(sym * np.fft.fft(f, axis=axis), axis=axis)


def trig_interp_tau(u, tgrid, tau_star, axis=-2):
    """Evaluate the tau-trigonometric interpolant of ``u`` at ``tau_star``.

    ``tau_star`` is reduced mod 2*pi.  Exact when ``u`` only carries tau modes
    |k| < N/2.  The interpolated axis is removed from the result.
    """
    u = np.asarray(u)
    coeffs = np.moveaxis(fourier_coeffs(u, axis=axis), axis, -1)
    theta = float(tau_star) % (2.0 * np.pi)
    phases = np.exp(1j * tgrid.modes * theta)
    return coeffs @ phases
