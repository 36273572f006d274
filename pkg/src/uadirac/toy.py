"""Scalar toy transport model with the two-scale (eps, eps^2) structure.

The model is  dt u + eps^{-2} dtau u + i eps^{-1} a(tau) u = 0  on the tau
circle, with a real, smooth, zero-mean.  Its closed-form solution

    u(t, tau) = exp(-i eps b(tau)) exp(i eps b(s)) u_in(s),   s = tau - t/eps^2,

with b the antiderivative of a, makes it the ideal laboratory for the
initial-data question: truncating the series of u0 * exp(-i eps b(tau)) at
power eps^{2p-1} keeps the first p time derivatives bounded uniformly in eps.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["ToyProblem", "toy_exact", "toy_prepared_initial", "toy_derivative_bound"]

# zero-mean profiles with exact antiderivatives
_A_REGISTRY = {
    "cos": (np.cos, np.sin),
    "sin": (np.sin, lambda tau: 1.0 - np.cos(tau)),
    "cos2": (lambda tau: np.cos(2.0 * tau), lambda tau: 0.5 * np.sin(2.0 * tau)),
}


@dataclass(frozen=True)
class ToyProblem:
    eps: float
    u0: complex = 1.0
    a_name: str = "cos"
    p: int = 1

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ConfigError(f"eps must lie in (0, 1], got {self.eps}")
        if self.a_name not in _A_REGISTRY:
            raise ConfigError(
                f"unknown profile {self.a_name!r}; choose from {sorted(_A_REGISTRY)}"
            )
        if self.p < 1:
            raise ConfigError(f"derivative order target must be >= 1, got {self.p}")

    @property
    def a(self):
        return _A_REGISTRY[self.a_name][0]

    @property
    def b(self):
        return _A_REGISTRY[self.a_name][1]


def toy_exact(prob, u_in, t, tau):
    """Closed-form solution value; ``u_in`` is any callable of tau."""
    eps = prob.eps
    s = tau - t / eps**2
    return np.exp(-1j * eps * prob.b(tau)) * np.exp(1j * eps * prob.b(s)) * u_in(s)


def toy_prepared_initial(prob):
    """Truncated-exponential initial profile bounding p time derivatives.

    u_in(tau) = u0 * sum_{k=0}^{2p-1} (-i b(tau))^k eps^k / k!, so
    u_in(0) = u0 exactly (b(0) = 0).
    """

    def u_in(tau):
        z = -1j * prob.eps * prob.b(np.asarray(tau, dtype=float))
        acc = np.ones_like(z, dtype=complex)
        for k in range(2 * prob.p - 1, 0, -1):  # Horner form of sum_k z^k/k!
            acc = 1.0 + acc * z / k
        return prob.u0 * acc

    return u_in


_STENCILS = {
    1: ([-1, 1], [-0.5, 0.5], 1),
    2: ([-1, 0, 1], [1.0, -2.0, 1.0], 2),
    3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5], 3),
}


def toy_derivative_bound(prob, prepared=True, eps_list=None, n_tau_samples=64):
    """Estimate max_tau |d^p u / dt^p| at t = 0 over a sweep of eps.

    Central finite differences with step h = eps^2/100 probe the exact
    solution; the step is tied to the fast scale so the estimate resolves
    the eps^-2 oscillation.  Returns a list of (eps, estimate) pairs.
    """
    if prob.p not in _STENCILS:
        raise ConfigError(f"finite-difference stencils cover p <= 3, got {prob.p}")
    if eps_list is None:
        eps_list = [2.0**-j for j in range(1, 7)]
    offsets, weights, power = _STENCILS[prob.p]
    taus = np.linspace(0.0, 2.0 * np.pi, n_tau_samples, endpoint=False)
    rows = []
    for eps in eps_list:
        p_eps = ToyProblem(eps=eps, u0=prob.u0, a_name=prob.a_name, p=prob.p)
        u_in = toy_prepared_initial(p_eps) if prepared else (lambda s: p_eps.u0 * np.ones_like(np.asarray(s, dtype=complex)))
        h = eps**2 / 100.0
        acc = np.zeros_like(taus, dtype=complex)
        for off, wgt in zip(offsets, weights):
            acc += wgt * toy_exact(p_eps, u_in, off * h, taus)
        est = float(np.max(np.abs(acc))) / h**power
        rows.append((eps, est))
    return rows
