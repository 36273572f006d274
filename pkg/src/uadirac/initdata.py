"""Prepared initial data for the augmented two-scale problem.

The augmented unknown U(t, tau, x) only has its initial value prescribed at
tau = 0, so there is freedom in extending it over the tau circle.  The
functions here build the order-k extensions U_k (k = 0..5) whose time
derivatives up to order ceil((k+1)/2) stay bounded uniformly in eps, by
assembling the printed expansion term by term on the (tau, x) tensor grid.

Every correction term carries a factor of the form (e^{+-2i tau} - 1) or is a
difference aux(tau) - aux(0), so U_k(tau=0, x) = phi0(x) holds exactly on the
grid (tau_0 = 0 is a grid point).

Orders 4 and 5 involve an auxiliary g_1 whose printed definition lacks the
x derivative that the analogous g_2 carries; both variants are implemented
and selected by ``g1_variant`` ("printed" or "dx").
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import F_e, dF_du, dF_dt, d2F_du2, dFe_du, dFe_dt, nonlinearity_F
from .spectral import spectral_dx, spectral_dtau
from .tau_ops import apply_A, apply_B, apply_C, linv, linv2, pi_avg

__all__ = ["PreparedData", "aux_functions", "prepare_initial_data", "time_derivative_norms"]


@dataclass
class PreparedData:
    """Order-k extension of the initial spinor over the tau circle."""

    order: int
    field: np.ndarray  # shape (2, n_tau, n_x)
    aux: dict = field(default_factory=dict)


def _offdiag(c_up, c_lo, w):
    """[[0, c_up], [c_lo, 0]] applied to a spinor-valued array."""
    return np.stack([c_up * w[1], c_lo * w[0]])


def _diag(c1, c2, w):
    return np.stack([c1 * w[0], c2 * w[1]])


def aux_functions(phi0, model, level, tgrid, g1_variant="printed"):
    """Build the auxiliary tau functions entering the order-``level`` data.

    Returns a dict; keys appear progressively with ``level`` (an order-2
    build needs only f0, an order-5 build needs the full set).  All
    L^{-1}/L^{-2} outputs have zero tau mean by construction.
    """
    if g1_variant not in ("printed", "dx"):
        raise ConfigError(f"g1_variant must be 'printed' or 'dx', got {g1_variant!r}")
    grid = model.grid
    eps = model.eps
    tau = tgrid.tau[:, None]
    z = np.exp(2j * tau)
    zc = np.conj(z)

    dx = lambda w, k=1: spectral_dx(w, grid, order=k)
    phi = phi0[:, None, :]  # broadcastable against (2, n_tau, n_x)

    out = {}
    if level < 2:
        return out

    # f0 = L^{-1}(I - Pi) F(0, ., phi0); closed form -i V_m(0) B(tau) phi0
    F0 = nonlinearity_F(0.0, tau, phi, model)
    out["f0"] = linv(np.broadcast_to(F0, (2, tgrid.n, grid.n)))
    out["f0_closed"] = -1j * model.vm(0.0) * apply_B(tau, phi)
    if level < 3:
        return out

    # U1 = phi0 + (i eps / 2) [[0, z-1], [1-zc, 0]] dx phi0
    dx1 = dx(phi0)
    u1 = phi + 0.5j * eps * _offdiag(z - 1.0, 1.0 - zc, dx1[:, None, :])
    out["u1"] = u1
    out["f1"] = linv(nonlinearity_F(0.0, tau, u1, model))
    out["fe0"] = F_e(0.0, phi0, model)
    if level < 4:
        return out

    # U2^eps = U2 + eps^2 (f0 - f0(0)); U2 is the shared base built below
    u2base = _u2_base(phi0, model, tgrid)
    u2eps = u2base + eps**2 * _delta(out["f0"])
    out["u2eps"] = u2eps
    out["f2"] = linv(nonlinearity_F(0.0, tau, u2eps, model))
    f1_for_g1 = out["f1"] if g1_variant == "printed" else dx(out["f1"])
    out["g1"] = linv(apply_A(tau, f1_for_g1))
    # f_t = L^{-2}(I - Pi)[dF_dt(0,.,phi0) + dF_du(0,.,phi0)(C dxx phi0 + F_e(0,phi0))]
    w_dir = apply_C(dx(phi0, 2)) + out["fe0"]
    ft_arg = dF_dt(0.0, tau, phi, model) + dF_du(0.0, tau, phi, w_dir[:, None, :], model)
    out["f_t"] = linv2(np.broadcast_to(ft_arg, (2, tgrid.n, grid.n)))
    out["pi_dxF_u1"] = pi_avg(dx(nonlinearity_F(0.0, tau, u1, model)))
    out["piA_dxxf1"] = pi_avg(apply_A(tau, dx(out["f1"], 2)))
    if level < 5:
        return out

    u3eps = _assemble_u3(phi0, model, tgrid, out)
    out["u3eps"] = u3eps
    out["f3"] = linv(nonlinearity_F(0.0, tau, u3eps, model))
    out["g2"] = linv(apply_A(tau, dx(out["f2"])))
    out["v"] = linv(apply_A(tau, linv(apply_A(tau, dx(out["f1"])))))

    vm0 = model.vm(0.0)
    zm = model.dt_vm(0.0) * phi0 + vm0 * (apply_C(dx(phi0, 2)) + out["fe0"])
    out["z_m"] = zm
    # H0 = L^{-1}(I - Pi)[dF_dt + dF_du (C dxx phi0 + F_e)] ; closed form -i B(tau) Z_m
    h0_arg = dF_dt(0.0, tau, phi, model) + dF_du(0.0, tau, phi, w_dir[:, None, :], model)
    out["h0"] = linv(np.broadcast_to(h0_arg, (2, tgrid.n, grid.n)))
    out["h0_closed"] = -1j * apply_B(tau, zm[:, None, :])
    pi_f_u1 = pi_avg(nonlinearity_F(0.0, tau, u1, model))
    piA_dxf1 = pi_avg(apply_A(tau, dx(out["f1"])))
    h1_dir = (
        apply_C(dx(phi0, 2)[:, None, :] + eps * apply_B(0.0, dx(phi0, 3))[:, None, :])
        + pi_f_u1
        - eps * piA_dxf1
        - eps * apply_B(tau, (apply_C(dx(phi0, 3)) + dx(out["fe0"]))[:, None, :])
    )
    out["h1"] = dF_dt(0.0, tau, u1, model) + dF_du(0.0, tau, u1, h1_dir, model)
    out["w0"] = linv2(apply_A(tau, dx(out["h0"])))
    out["w1"] = linv2(out["h1"])
    out["z_e"] = dFe_du(0.0, phi0, w_dir, model) + dFe_dt(0.0, phi0, model)
    out["pi_dxF_u2"] = pi_avg(dx(nonlinearity_F(0.0, tau, u2eps, model)))
    out["pi_dxxF_u1"] = pi_avg(dx(nonlinearity_F(0.0, tau, u1, model), 2))
    return out


def _delta(aux):
    """aux(tau) - aux(0); tau_0 = 0 is the first grid row, so this is exact."""
    return aux - aux[:, :1, :]


def _u2_base(phi0, model, tgrid):
    """U2 = phi0 + (i eps/2) M1 dx phi0 + (eps^2/4) M2 dxx phi0 (no f0 term)."""
    grid = model.grid
    eps = model.eps
    tau = tgrid.tau[:, None]
    z = np.exp(2j * tau)
    zc = np.conj(z)
    dx1 = spectral_dx(phi0, grid)[:, None, :]
    dx2 = spectral_dx(phi0, grid, order=2)[:, None, :]
    return (
        phi0[:, None, :]
        + 0.5j * eps * _offdiag(z - 1.0, 1.0 - zc, dx1)
        + 0.25 * eps**2 * _diag(1.0 - z, 1.0 - zc, dx2)
    )


def _assemble_u3(phi0, model, tgrid, aux):
    grid = model.grid
    eps = model.eps
    tau = tgrid.tau[:, None]
    z = np.exp(2j * tau)
    zc = np.conj(z)
    dx = lambda w, k=1: spectral_dx(w, grid, order=k)
    dx3 = dx(phi0, 3)[:, None, :]
    vm_phi = (model.vm(0.0) * phi0)[:, None, :]
    fe0 = aux["fe0"][:, None, :]
    return (
        _u2_base(phi0, model, tgrid)
        + eps**2 * _delta(aux["f1"])
        + 0.25j * eps**3 * _offdiag(z - 1.0, 1.0 - zc, dx3)
        + 0.25j * eps**3 * _diag(1.0 - z, 1.0 - zc, dx(vm_phi))
        + 0.25 * eps**3 * _offdiag(1.0 - z, 1.0 - zc, dx(fe0))
    )


def _assemble_u4(phi0, model, tgrid, aux):
    grid = model.grid
    eps = model.eps
    tau = tgrid.tau[:, None]
    z = np.exp(2j * tau)
    zc = np.conj(z)
    dx = lambda w, k=1: spectral_dx(w, grid, order=k)
    dx3 = dx(phi0, 3)[:, None, :]
    dx4 = dx(phi0, 4)[:, None, :]
    vm_phi = (model.vm(0.0) * phi0)[:, None, :]
    fe0 = aux["fe0"][:, None, :]
    dxf1_0 = dx(aux["f1"])[:, :1, :]
    return (
        _u2_base(phi0, model, tgrid)
        + eps**2 * _delta(aux["f2"])
        + 0.25j * eps**3 * _offdiag(z - 1.0, 1.0 - zc, dx3)
        + 0.25 * eps**3 * _offdiag(1.0 - z, 1.0 - zc, aux["pi_dxF_u1"])
        - eps**3 * _delta(aux["g1"])
        - 0.5j * eps**3 * _offdiag(z - 1.0, 1.0 - zc, dxf1_0)
        - 3.0 / 16.0 * eps**4 * _diag(z - 1.0, zc - 1.0, dx4)
        - 0.125 * eps**4 * _offdiag(z - 1.0, 1.0 - zc, dx(vm_phi, 2))
        + 0.25 * eps**4 * _offdiag(z - 1.0, zc - 1.0, aux["piA_dxxf1"])
        - 0.125j * eps**4 * _diag(1.0 - z, zc - 1.0, dx(fe0, 2))
        - eps**4 * _delta(aux["f_t"])
    )


def _assemble_u5(phi0, model, tgrid, aux):
    grid = model.grid
    eps = model.eps
    tau = tgrid.tau[:, None]
    z = np.exp(2j * tau)
    zc = np.conj(z)
    dx = lambda w, k=1: spectral_dx(w, grid, order=k)
    dx3 = dx(phi0, 3)[:, None, :]
    dx4 = dx(phi0, 4)[:, None, :]
    dx5 = dx(phi0, 5)[:, None, :]
    vm_phi = (model.vm(0.0) * phi0)[:, None, :]
    fe0 = aux["fe0"][:, None, :]
    dxf2_0 = dx(aux["f2"])[:, :1, :]
    dxxf1_0 = dx(aux["f1"], 2)[:, :1, :]
    dxg1_0 = dx(aux["g1"])[:, :1, :]
    zm = aux["z_m"][:, None, :]
    ze = aux["z_e"][:, None, :]
    return (
        _u2_base(phi0, model, tgrid)
        + eps**2 * _delta(aux["f3"])
        + 0.25j * eps**3 * _offdiag(z - 1.0, 1.0 - zc, dx3)
        + 0.25 * eps**3 * _offdiag(1.0 - z, 1.0 - zc, aux["pi_dxF_u2"])
        - eps**3 * _delta(aux["g2"])
        - 0.5j * eps**3 * _offdiag(z - 1.0, 1.0 - zc, dxf2_0)
        + 0.25 * eps**4 * _diag(z - 1.0, zc - 1.0, dxxf1_0)
        - 0.125j * eps**4 * _diag(1.0 - z, zc - 1.0, aux["pi_dxxF_u1"])
        - 3.0 / 16.0 * eps**4 * _diag(z - 1.0, zc - 1.0, dx4)
        + 0.5j * eps**4 * _offdiag(z - 1.0, 1.0 - zc, dxg1_0)
        + eps**4 * _delta(aux["v"])
        - eps**4 * _delta(aux["w1"])
        + 0.25 * eps**4 * _offdiag(z - 1.0, zc - 1.0, aux["piA_dxxf1"])
        + 3.0j / 16.0 * eps**5 * _offdiag(z - 1.0, 1.0 - zc, dx5)
        + eps**5 * _delta(aux["w0"])
        - 3.0 / 16.0 * eps**5 * _offdiag(z - 1.0, zc - 1.0, dx(fe0, 3))
        + 0.125j * eps**5 * _diag(1.0 - z, zc - 1.0, pi_avg(apply_A(tau, dx(aux["f1"], 3))))
        - 0.125 * eps**5 * _diag(z - 1.0, 1.0 - zc, dx(zm))
        - 0.125j * eps**5 * _diag(z - 1.0, zc - 1.0, dx(vm_phi, 3))
        - 0.125j * eps**5 * _offdiag(z - 1.0, 1.0 - zc, dx(ze))
    )


def prepare_initial_data(phi0, model, order, tgrid, g1_variant="printed"):
    """Assemble the order-k prepared two-scale initial field U_k(tau, x).

    order 0 is the flat extension U_0 = phi0; orders 1, 3, 5 bound the time
    derivatives of the augmented solution up to order 1, 2, 3 respectively.
    """
    if order not in range(6):
        raise ConfigError(f"preparation order must be 0..5, got {order}")
    phi0 = np.asarray(phi0, dtype=complex)
    aux = aux_functions(phi0, model, level=order, tgrid=tgrid, g1_variant=g1_variant)
    eps = model.eps
    tau = tgrid.tau[:, None]
    z = np.exp(2j * tau)
    zc = np.conj(z)

    if order == 0:
        field = np.broadcast_to(phi0[:, None, :], (2, tgrid.n, model.grid.n)).copy()
    elif order == 1:
        dx1 = spectral_dx(phi0, model.grid)[:, None, :]
        field = phi0[:, None, :] + 0.5j * eps * _offdiag(z - 1.0, 1.0 - zc, dx1)
    elif order == 2:
        field = _u2_base(phi0, model, tgrid) + eps**2 * _delta(aux["f0"])
    elif order == 3:
        field = _assemble_u3(phi0, model, tgrid, aux)
    elif order == 4:
        field = _assemble_u4(phi0, model, tgrid, aux)
    else:
        field = _assemble_u5(phi0, model, tgrid, aux)
    return PreparedData(order=order, field=np.ascontiguousarray(field), aux=aux)


def time_derivative_norms(u0, model, tgrid, pmax=1):
    """Exact sup-norms of d^p/dt^p U at t=0, p = 1..pmax, via the generator.

    The time derivatives of the augmented solution at t = 0 are obtained by
    repeatedly differentiating the evolution equation; tau and x derivatives
    are evaluated spectrally, so no time stepping (and no finite-difference
    cancellation at small eps) is involved.  Requires static potentials, for
    which the partial time derivatives of the nonlinearity vanish.
    """
    if pmax not in (1, 2, 3):
        raise ConfigError(f"pmax must be 1, 2 or 3, got {pmax}")
    if not model.static:
        raise ConfigError("time_derivative_norms requires static potentials")
    grid = model.grid
    eps = model.eps
    tau = tgrid.tau[:, None]

    def generator(w):
        return (
            -spectral_dtau(w, tgrid) / eps**2
            - apply_A(tau, spectral_dx(w, grid)) / eps
        )

    d1 = generator(u0) + nonlinearity_F(0.0, tau, u0, model)
    norms = [_sup_norm(d1)]
    if pmax >= 2:
        d2 = generator(d1) + dF_du(0.0, tau, u0, d1, model)
        norms.append(_sup_norm(d2))
    if pmax >= 3:
        d3 = generator(d2) + d2F_du2(0.0, tau, u0, d1, d1, model) + dF_du(
            0.0, tau, u0, d2, model
        )
        norms.append(_sup_norm(d3))
    return norms


def _sup_norm(u):
    return float(np.max(np.sqrt(np.abs(u[0]) ** 2 + np.abs(u[1]) ** 2)))
