"""Independent oracles used by the test suite.

Everything here is deliberately written from the defining equations, without
reusing the package's elimination/solver code paths: monolithic dense
assemblies of the semi-implicit systems, and a splitting integrator for the
original (non-augmented) Dirac equation.
"""

import numpy as np

from uadirac.model import nonlinearity_F
from uadirac.spectral import dtau_matrix


def _hat(u):
    return np.fft.fft(u, axis=-1) / u.shape[-1]


def _unhat(uh):
    return np.fft.ifft(uh * uh.shape[-1], axis=-1)


def _coupled_block(a_block, nu, e2, ntau):
    """[[A, i nu diag(e2)], [i nu diag(conj(e2)), A]] as a 2*ntau dense block."""
    top = np.hstack([a_block, 1j * nu * np.diag(e2)])
    bot = np.hstack([1j * nu * np.diag(np.conj(e2)), a_block])
    return np.vstack([top, bot])


def _monolithic_solve(a_block, coupling, model, sgrid, tgrid, rhs1, rhs2):
    """Assemble the full (2 N N_tau)-unknown system and solve it densely.

    Unknown ordering: for each x mode l, the 2*ntau vector
    (uhat_1(tau_0..), uhat_2(tau_0..)).  The system is block-diagonal over l
    but is assembled and solved as one matrix on purpose.
    """
    n, ntau = sgrid.n, tgrid.n
    e2 = np.exp(2j * tgrid.tau)
    big = np.zeros((2 * n * ntau, 2 * n * ntau), dtype=complex)
    rhs = np.zeros(2 * n * ntau, dtype=complex)
    for j in range(n):
        nu = coupling * sgrid.mu[j] / model.eps
        block = _coupled_block(a_block, nu, e2, ntau)
        sl = slice(2 * ntau * j, 2 * ntau * (j + 1))
        big[sl, sl] = block
        rhs[2 * ntau * j : 2 * ntau * j + ntau] = rhs1[:, j]
        rhs[2 * ntau * j + ntau : 2 * ntau * (j + 1)] = rhs2[:, j]
    sol = np.linalg.solve(big, rhs)
    out1 = np.empty((ntau, n), dtype=complex)
    out2 = np.empty((ntau, n), dtype=complex)
    for j in range(n):
        out1[:, j] = sol[2 * ntau * j : 2 * ntau * j + ntau]
        out2[:, j] = sol[2 * ntau * j + ntau : 2 * ntau * (j + 1)]
    return out1, out2


def ua1_dense_step(u, t, dt, model, sgrid, tgrid):
    """One first-order step via the monolithic dense system."""
    ntau = tgrid.n
    eps = model.eps
    dtau = dtau_matrix(tgrid)
    a_block = np.eye(ntau) / dt + dtau / eps**2
    f = nonlinearity_F(t, tgrid.tau[:, None], u, model)
    uh, fh = _hat(u), _hat(f)
    o1, o2 = _monolithic_solve(
        a_block, 1.0, model, sgrid, tgrid, uh[0] / dt + fh[0], uh[1] / dt + fh[1]
    )
    return _unhat(np.stack([o1, o2]))


def ua2_dense_step(u, t, dt, model, sgrid, tgrid, prediction="halfstep"):
    """One prediction/correction step via monolithic dense systems."""
    ntau = tgrid.n
    eps = model.eps
    dtau = dtau_matrix(tgrid)
    eye = np.eye(ntau)
    tau_col = tgrid.tau[:, None]

    f_n = nonlinearity_F(t, tau_col, u, model)
    uh, fh_n = _hat(u), _hat(f_n)
    if prediction == "halfstep":
        c_pred = 2.0 / dt
    else:
        c_pred = 1.0 / (2.0 * dt)
    a_half = c_pred * eye + dtau / eps**2
    h1, h2 = _monolithic_solve(
        a_half,
        1.0,
        model,
        sgrid,
        tgrid,
        c_pred * uh[0] + fh_n[0],
        c_pred * uh[1] + fh_n[1],
    )
    u_half = _unhat(np.stack([h1, h2]))

    f_half = nonlinearity_F(t + 0.5 * dt, tau_col, u_half, model)
    fh = _hat(f_half)
    a_plus = eye / dt + dtau / (2.0 * eps**2)
    a_minus = eye / dt - dtau / (2.0 * eps**2)
    # Crank-Nicolson form: A+ u^{n+1} + (i mu/(2 eps)) E+- (u^{n+1} + u^n) terms
    # moved to the right-hand side for the coupled dense assembly.
    e2 = np.exp(2j * tgrid.tau)
    n = sgrid.n
    rhs1 = np.empty((ntau, n), dtype=complex)
    rhs2 = np.empty((ntau, n), dtype=complex)
    for j in range(n):
        nu = 0.5 * sgrid.mu[j] / eps
        rhs1[:, j] = a_minus @ uh[0][:, j] + fh[0][:, j] - 1j * nu * e2 * uh[1][:, j]
        rhs2[:, j] = (
            a_minus @ uh[1][:, j] + fh[1][:, j] - 1j * nu * np.conj(e2) * uh[0][:, j]
        )
    o1, o2 = _monolithic_solve(a_plus, 0.5, model, sgrid, tgrid, rhs1, rhs2)
    return _unhat(np.stack([o1, o2]))


def dirac_splitting(model, phi0, dt, t_final):
    """Strang splitting for the original Dirac equation (V_m must be zero).

    Kinetic part: exact exponential of (mu/eps) alpha + beta/eps^2 per mode.
    Potential/nonlinear part: exact pointwise phase rotation, valid because
    (beta Phi, Phi) is invariant under that subflow when V_m = 0.
    """
    grid = model.grid
    eps = model.eps
    if np.any(model.vm(0.0) != 0.0):
        raise ValueError("splitting oracle requires V_m = 0")
    nsteps = int(round(t_final / dt))
    mu = grid.mu
    omega = np.sqrt(mu**2 / eps**2 + 1.0 / eps**4)
    cos_w = np.cos(omega * dt)
    sinc_w = np.sin(omega * dt) / omega
    # exp(-i H dt) with H = (mu/eps) alpha + beta/eps^2:
    m11 = cos_w - 1j * sinc_w / eps**2
    m22 = cos_w + 1j * sinc_w / eps**2
    m12 = -1j * sinc_w * mu / eps

    phi = phi0.astype(complex).copy()
    ve = model.ve(0.0)
    t = 0.0
    for _ in range(nsteps):
        phi = _nonlinear_half(phi, ve, model.lam, 0.5 * dt)
        ph = np.fft.fft(phi, axis=-1)
        ph = np.stack([m11 * ph[0] + m12 * ph[1], m12 * ph[0] + m22 * ph[1]])
        phi = np.fft.ifft(ph, axis=-1)
        phi = _nonlinear_half(phi, ve, model.lam, 0.5 * dt)
        t += dt
    return phi


def _nonlinear_half(phi, ve, lam, dt):
    rho = np.abs(phi[0]) ** 2 - np.abs(phi[1]) ** 2
    return np.stack(
        [
            np.exp(-1j * (ve + lam * rho) * dt) * phi[0],
            np.exp(-1j * (ve - lam * rho) * dt) * phi[1],
        ]
    )
