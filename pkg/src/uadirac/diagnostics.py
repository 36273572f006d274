"""Error norms, observed orders, reference solutions and conservation drift."""

import hashlib
import json
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import energy, mass
from .spectral import TauGrid
from .steppers import propagate, reconstruct_phi

__all__ = [
    "linf_error",
    "l2_error",
    "observed_order",
    "reference_solution",
    "conservation_drift",
    "ReportRow",
    "ErrorReport",
]


def linf_error(phi_ref, phi_num):
    """Sum over components of the grid max-norm difference."""
    a = np.asarray(phi_ref)
    b = np.asarray(phi_num)
    if a.shape != b.shape:
        raise ConfigError(f"field shapes differ: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a[0] - b[0])) + np.max(np.abs(a[1] - b[1])))


def l2_error(phi_ref, phi_num, grid):
    a = np.asarray(phi_ref)
    b = np.asarray(phi_num)
    if a.shape != b.shape:
        raise ConfigError(f"field shapes differ: {a.shape} vs {b.shape}")
    return float(np.sqrt(grid.dx * np.sum(np.abs(a - b) ** 2)))


def observed_order(errs, steps):
    """Least-squares slope of log(err) against log(step).

    ``steps`` may be time steps or any strictly decreasing positive sequence
    (eps values for limit-model rates).  Nonpositive or non-finite error
    entries are excluded with a warning.
    """
    errs = np.asarray(errs, dtype=float)
    steps = np.asarray(steps, dtype=float)
    if errs.shape != steps.shape or errs.size < 2:
        raise ConfigError("need at least two (err, step) pairs")
    if np.any(steps <= 0.0) or np.any(np.diff(steps) >= 0.0):
        raise ConfigError("steps must be positive and strictly decreasing")
    keep = np.isfinite(errs) & (errs > 0.0)
    if not np.all(keep):
        warnings.warn(
            f"excluding {np.count_nonzero(~keep)} nonpositive/non-finite error "
            "entries from the order fit",
            stacklevel=2,
        )
    if np.count_nonzero(keep) < 2:
        return float("nan")
    return float(np.polyfit(np.log(steps[keep]), np.log(errs[keep]), 1)[0])


_MEMORY_CACHE = {}


def _reference_key(model, phi0, t_final, dt_ref, ntau_ref, order, scheme):
    payload = {
        "a": model.grid.a,
        "b": model.grid.b,
        "n": model.grid.n,
        "eps": model.eps,
        "lam": model.lam,
        "ve": model.ve_pot.name,
        "vm": model.vm_pot.name,
        "phi0_sha": hashlib.sha256(np.ascontiguousarray(phi0).tobytes()).hexdigest(),
        "t_final": t_final,
        "dt_ref": dt_ref,
        "ntau_ref": ntau_ref,
        "order": order,
        "scheme": scheme,
    }
    blob = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:24], payload


def reference_solution(
    model,
    phi0,
    t_final,
    dt_ref=1e-5,
    ntau_ref=None,
    order=5,
    scheme="ua2",
    cache_dir=None,
    tgrid=None,
):
    """Fine-step UA2 reference spinor at t_final, cached on disk.

    The cache is content-addressed by (model parameters, a hash of phi0,
    t_final, resolution); entries are .npz field dumps next to a .json
    sidecar with the key payload.  Corrupt entries trigger recomputation
    with a warning.
    """
    if tgrid is None:
        tgrid = TauGrid(ntau_ref if ntau_ref is not None else 32)
    ntau_ref = tgrid.n
    if t_final == 0.0:
        return np.asarray(phi0, dtype=complex).copy()
    key, payload = _reference_key(model, phi0, t_final, dt_ref, ntau_ref, order, scheme)
    if key in _MEMORY_CACHE:
        return _MEMORY_CACHE[key].copy()
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"ref-{key}.npz"
        if path.exists():
            try:
                with np.load(path) as data:
                    phi = np.stack([data["phi1"], data["phi2"]])
                _MEMORY_CACHE[key] = phi
                return phi.copy()
            except Exception:
                warnings.warn(f"corrupt reference cache entry {path}; recomputing")
    state = propagate(
        model, phi0, order=order, scheme=scheme, dt=dt_ref, t_final=t_final, tgrid=tgrid
    )
    phi = reconstruct_phi(state, tgrid)
    _MEMORY_CACHE[key] = phi
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path, phi1=phi[0], phi2=phi[1])
        path.with_suffix(".json").write_text(json.dumps(payload, sort_keys=True, indent=1))
    return phi.copy()


def conservation_drift(
    model, phi0, order, scheme, dt, t_final, tgrid, nprobes=10, **kwargs
):
    """Max relative deviation of mass and energy of the reconstructed spinor.

    Probes ``nprobes`` times along the trajectory and compares against t = 0.
    Static potentials are assumed for the energy functional.
    """
    grid = model.grid
    m0 = mass(phi0, grid)
    e0 = energy(phi0, model)
    drifts = {"mass": 0.0, "energy": 0.0}

    def probe(state):
        if state.n == 0:
            return
        phi = reconstruct_phi(state, tgrid)
        drifts["mass"] = max(drifts["mass"], abs(mass(phi, grid) - m0) / abs(m0))
        drifts["energy"] = max(drifts["energy"], abs(energy(phi, model) - e0) / abs(e0))

    nsteps = int(round(t_final / dt))
    every = max(1, nsteps // nprobes)
    propagate(
        model,
        phi0,
        order=order,
        scheme=scheme,
        dt=dt,
        t_final=t_final,
        tgrid=tgrid,
        probe=probe,
        probe_every=every,
        **kwargs,
    )
    return drifts["mass"], drifts["energy"]


@dataclass
class ReportRow:
    scheme: str
    init_order: int
    epsilon: float
    dt: float
    n: int
    ntau: int
    err_linf: float
    err_l2: float
    mass_drift: float
    energy_drift: float
    runtime_s: float
    failed: bool = False

    def key(self):
        return (self.scheme, self.init_order, self.epsilon, self.dt, self.n, self.ntau)


CSV_HEADER = "scheme,init_order,epsilon,dt,N,Ntau,err_linf,err_l2,mass_drift,energy_drift,runtime_s"


@dataclass
class ErrorReport:
    """Collected sweep results with per-eps fitted orders and uniform errors."""

    rows: list = field(default_factory=list)

    def add(self, row):
        if any(r.key() == row.key() for r in self.rows):
            raise ConfigError(f"duplicate report row for key {row.key()}")
        self.rows.append(row)

    def sorted_rows(self):
        return sorted(self.rows, key=lambda r: r.key())

    def eps_values(self):
        return sorted({r.epsilon for r in self.rows}, reverse=True)

    def dt_values(self):
        return sorted({r.dt for r in self.rows}, reverse=True)

    def errors_for_eps(self, eps):
        rows = sorted(
            (r for r in self.rows if r.epsilon == eps), key=lambda r: -r.dt
        )
        return [r.dt for r in rows], [r.err_linf for r in rows]

    def order_for_eps(self, eps):
        dts, errs = self.errors_for_eps(eps)
        return observed_order(errs, dts)

    def uniform_errors(self):
        """Max error over eps for each dt (the uniform-accuracy curve)."""
        dts = self.dt_values()
        uniform = []
        for dt in dts:
            errs = [r.err_linf for r in self.rows if r.dt == dt]
            uniform.append(max(errs))
        return dts, uniform

    def uniform_order(self):
        dts, errs = self.uniform_errors()
        return observed_order(errs, dts)

    def to_csv(self, path):
        lines = [CSV_HEADER]
        for r in self.sorted_rows():
            lines.append(
                f"{r.scheme},{r.init_order},{r.epsilon!r},{r.dt!r},{r.n},{r.ntau},"
                f"{r.err_linf!r},{r.err_l2!r},{r.mass_drift!r},{r.energy_drift!r},"
                f"{r.runtime_s:.3f}"
            )
        Path(path).write_text("\n".join(lines) + "\n")


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0
