"""Problem definition: Pauli matrices, potentials, nonlinearity, functionals.

Spinor-valued data are numpy arrays with a leading component axis: a field on
the x grid has shape (2, n_x), a two-scale field has shape (2, n_tau, n_x).
The inner product conjugates the second argument, (a, b) = sum_c a_c conj(b_c),
which makes (beta u, u) = |u_1|^2 - |u_2|^2 real pointwise.
"""

import numpy as np

from .errors import ConfigError, ConsistencyError
from .spectral import spectral_dx
from .tau_ops import apply_A

__all__ = [
    "ALPHA",
    "BETA",
    "Potential",
    "register_potential",
    "get_potential",
    "DiracModel",
    "beta_apply",
    "beta_density",
    "nonlinearity_F",
    "F_e",
    "dF_du",
    "dF_dt",
    "d2F_du2",
    "dFe_du",
    "dFe_dt",
    "mass",
    "energy",
    "filter_phase",
]

ALPHA = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
BETA = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_ZERO = lambda t, x: np.zeros_like(x)


class Potential:
    """Scalar potential with its analytic time derivative.

    ``fn`` and ``dt_fn`` take (t, x) with x an array; ``static`` marks
    potentials independent of t, enabling cached evaluation.
    """

    def __init__(self, name, fn, dt_fn=_ZERO, static=True):
        self.name = name
        self.fn = fn
        self.dt_fn = dt_fn
        self.static = static

    def __repr__(self):
        return f"Potential({self.name!r}, static={self.static})"


_POTENTIALS = {}


def register_potential(pot):
    _POTENTIALS[pot.name] = pot
    return pot


def get_potential(name):
    try:
        return _POTENTIALS[name]
    except KeyError:
        raise ConfigError(
            f"unknown potential {name!r}; registered: {sorted(_POTENTIALS)}"
        ) from None


register_potential(Potential("zero", _ZERO))
# Electric/magnetic wells used by the bundled experiment presets.
register_potential(
    Potential("tilted-well", lambda t, x: (1.0 - x) / (2.0 + 2.0 * x**2))
)
register_potential(
    Potential("shifted-bump", lambda t, x: (x + 1.0) ** 2 / (1.0 + x**2))
)


class DiracModel:
    """Immutable problem definition: eps, coupling, potentials, domain."""

    def __init__(self, grid, eps, lam=0.0, ve="zero", vm="zero"):
        if not 0.0 < eps <= 1.0:
            raise ConfigError(f"eps must lie in (0, 1], got {eps}")
        self.grid = grid
        self.eps = float(eps)
        self.lam = float(lam)
        self.ve_pot = ve if isinstance(ve, Potential) else get_potential(ve)
        self.vm_pot = vm if isinstance(vm, Potential) else get_potential(vm)
        self._ve0 = np.asarray(self.ve_pot.fn(0.0, grid.x), dtype=float)
        self._vm0 = np.asarray(self.vm_pot.fn(0.0, grid.x), dtype=float)

    @property
    def static(self):
        return self.ve_pot.static and self.vm_pot.static

    def ve(self, t):
        if self.ve_pot.static:
            return self._ve0
        return np.asarray(self.ve_pot.fn(t, self.grid.x), dtype=float)

    def vm(self, t):
        if self.vm_pot.static:
            return self._vm0
        return np.asarray(self.vm_pot.fn(t, self.grid.x), dtype=float)

    def dt_ve(self, t):
        return np.asarray(self.ve_pot.dt_fn(t, self.grid.x), dtype=float)

    def dt_vm(self, t):
        return np.asarray(self.vm_pot.dt_fn(t, self.grid.x), dtype=float)

    def __repr__(self):
        return (
            f"DiracModel(eps={self.eps}, lam={self.lam}, "
            f"ve={self.ve_pot.name!r}, vm={self.vm_pot.name!r}, grid={self.grid})"
        )


def beta_apply(u):
    return np.stack([u[0], -u[1]])


def beta_density(u):
    """(beta u, u) = |u_1|^2 - |u_2|^2, real pointwise."""
    return (u[0].real**2 + u[0].imag**2) - (u[1].real**2 + u[1].imag**2)


def nonlinearity_F(t, tau, u, model):
    """F(t, tau, u) = -i[V_e + V_m A(tau)]u - i lam (beta u, u) beta u.

    ``tau`` broadcasts against ``u[0]`` so the same code serves spinor fields
    (scalar tau) and two-scale fields (tau column of shape (n_tau, 1)).
    """
    ve = model.ve(t)
    vm = model.vm(t)
    out = -1j * (ve * u + vm * apply_A(tau, u))
    if model.lam != 0.0:
        out = out - 1j * model.lam * beta_density(u) * beta_apply(u)
    return out


def F_e(t, u, model):
    """Tau-average of the nonlinearity: -i[V_e u + lam (beta u, u) beta u]."""
    out = -1j * model.ve(t) * u
    if model.lam != 0.0:
        out = out - 1j * model.lam * beta_density(u) * beta_apply(u)
    return out


def _pair_density(w, u):
    """(beta w, u) + (beta u, w) = 2 Re[w_1 conj(u_1) - w_2 conj(u_2)]."""
    return 2.0 * (
        (w[0] * np.conj(u[0])).real - (w[1] * np.conj(u[1])).real
    )


def dF_du(t, tau, u, w, model):
    """Real-linear Gateaux derivative of F at u in direction w.

    The cubic term is not holomorphic in u, so differentiation is along real
    parameter lines: F(u + s w) for real s.
    """
    ve = model.ve(t)
    vm = model.vm(t)
    out = -1j * (ve * w + vm * apply_A(tau, w))
    if model.lam != 0.0:
        out = out - 1j * model.lam * (
            _pair_density(w, u) * beta_apply(u) + beta_density(u) * beta_apply(w)
        )
    return out


def dF_dt(t, tau, u, model):
    """Partial time derivative of F at frozen u: -i[dtV_e + dtV_m A(tau)]u."""
    return -1j * (model.dt_ve(t) * u + model.dt_vm(t) * apply_A(tau, u))


def d2F_du2(t, tau, u, w1, w2, model):
    """Second real-linear derivative of F at u in directions (w1, w2).

    Only the cubic term contributes; the potential part of F is linear in u.
    """
    if model.lam == 0.0:
        return np.zeros_like(u)
    return -1j * model.lam * (
        _pair_density(w1, w2) * beta_apply(u)
        + _pair_density(w1, u) * beta_apply(w2)
        + _pair_density(w2, u) * beta_apply(w1)
    )


def dFe_du(t, u, w, model):
    """Real-linear derivative of F_e at u in direction w."""
    out = -1j * model.ve(t) * w
    if model.lam != 0.0:
        out = out - 1j * model.lam * (
            _pair_density(w, u) * beta_apply(u) + beta_density(u) * beta_apply(w)
        )
    return out


def dFe_dt(t, u, model):
    return -1j * model.dt_ve(t) * u


def mass(phi, grid):
    """Quadrature of |phi|^2 over the periodic grid (spectrally accurate)."""
    return grid.dx * float(np.sum(np.abs(phi[0]) ** 2 + np.abs(phi[1]) ** 2))


def energy(phi, model, imag_tol=1e-10):
    """Conserved energy functional for time-independent potentials.

    Raises :class:`ConsistencyError` if the quadrature picks up an imaginary
    part above ``imag_tol`` (relative to the magnitude of the result).
    """
    grid = model.grid
    eps = model.eps
    dphi = spectral_dx(phi, grid)
    rho = beta_density(phi)
    dens = np.abs(phi[0]) ** 2 + np.abs(phi[1]) ** 2
    alpha_dx = phi[0] * np.conj(dphi[1]) + phi[1] * np.conj(dphi[0])
    alpha_dens = 2.0 * (phi[0] * np.conj(phi[1])).real
    integrand = (
        rho / eps**2
        - 1j / eps * alpha_dx
        + model.ve(0.0) * dens
        + model.vm(0.0) * alpha_dens
        + model.lam * rho * dens
    )
    total = grid.dx * np.sum(integrand)
    scale = max(1.0, abs(total))
    if abs(total.imag) > imag_tol * scale:
        raise ConsistencyError(
            f"energy quadrature has imaginary residue {total.imag:.3e}"
        )
    return float(total.real)


def filter_phase(phi, t, eps, inverse=False):
    """Multiply by diag(e^{it/eps^2}, e^{-it/eps^2}) (or its conjugate).

    The forward map sends the Dirac solution to the filtered unknown; the
    inverse map undoes it.  forward o inverse = identity.
    """
    theta = t / eps**2
    sign = -1.0 if inverse else 1.0
    return np.stack(
        [np.exp(sign * 1j * theta) * phi[0], np.exp(-sign * 1j * theta) * phi[1]]
    )
