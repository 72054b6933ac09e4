"""Explicit finite-volume step for the coupled (u, v) system.

Fluxes are oriented ``K -> L`` along each interior edge (``K < L``).  A
positive diffusive flux ``D`` moves u-mass into ``K``; a positive chemotactic
flux ``C`` moves u-mass from ``K`` to ``L``, i.e. up the chemoattractant
gradient.  Boundary edges carry no flux for either unknown.

Two upwind drift discretizations are available:

``"volume_filling"`` (default)
    ``C = chi tau [(dv)+ u_K f(u_L) - (dv)- u_L f(u_K)]``.  The mobility ``u`` is
    taken from the upwind cell and the crowding factor ``f`` from the receiving
    cell, so a full cell (``f = 0``) accepts no inflow.  Monotone under the step
    restriction of :func:`stable_dt`, hence ``0 <= u <= 1``.
``"full_upwind"``
    ``C = chi tau [(dv)+ u_K f(u_K) - (dv)- u_L f(u_L)]``: the full mobility
    ``u f(u)`` of the upwind cell.  Conservative but not range preserving: a
    full cell still receives inflow from a partially filled neighbour.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .coefficients import A_of, CoefficientSet, f_of, g_of
from .errors import ConfigurationError, StabilityError
from .mesh import Mesh

__all__ = [
    "DRIFT_MODES",
    "EdgeFluxes",
    "State",
    "chemotactic_edge_flux",
    "diffusive_edge_flux",
    "edge_fluxes",
    "p_flux",
    "stable_dt",
    "step",
    "step_linear_grid",
]

DRIFT_MODES = {"volume_filling": 0, "full_upwind": 1}
# Lipschitz constant of the drift flux in the upwind density
_DRIFT_LIPSCHITZ = {"volume_filling": 2.0, "full_upwind": 1.0}


def _drift_mode(drift):
    try:
        return DRIFT_MODES[drift]
    except KeyError:
        raise ConfigurationError(
            f"drift: expected one of {sorted(DRIFT_MODES)}, got {drift!r}"
        ) from None


@dataclass(frozen=True, eq=False)
class State:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.float64)
        v = np.ascontiguousarray(self.v, dtype=np.float64)
        if u.ndim != 1 or u.shape != v.shape:
            raise ValueError(f"u and v must be matching 1-D cell fields, got {u.shape}, {v.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(self.t))

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy(), self.t)


@dataclass(frozen=True, eq=False)
class EdgeFluxes:
    """Per interior edge: diffusive ``D``, chemotactic ``C`` and v-diffusive ``G``."""

    diffusive: np.ndarray
    chemotactic: np.ndarray
    v_diffusive: np.ndarray


def p_flux(g, p):
    """``|g|^(p-2) g``; odd, nondecreasing, and zero at zero for every ``p >= 2``."""
    if p < 2:
        raise ConfigurationError(f"p: requires p >= 2, got {p}")
    out = _backend._pykernels.pflux(g, float(p))
    return float(out) if out.ndim == 0 else out


def diffusive_edge_flux(edge, A_values, p):
    k, l, tau = edge
    return tau * p_flux(A_values[l] - A_values[k], p)


def chemotactic_edge_flux(edge, u_values, v_values, cs: CoefficientSet, drift="volume_filling"):
    """Upwind drift flux leaving ``K`` towards ``L`` for a single edge."""
    mode = _drift_mode(drift)
    k, l, tau = edge
    uk = min(max(float(u_values[k]), 0.0), 1.0)
    ul = min(max(float(u_values[l]), 0.0), 1.0)
    dv = float(v_values[l]) - float(v_values[k])
    pos, neg = max(dv, 0.0), max(-dv, 0.0)
    if mode == DRIFT_MODES["volume_filling"]:
        fk, fl = f_of(ul, cs), f_of(uk, cs)
    else:
        fk, fl = f_of(uk, cs), f_of(ul, cs)
    return (cs.chi * tau) * (pos * uk * fk - neg * ul * fl)


def _cell_inputs(state, cs):
    u = np.clip(state.u, 0.0, 1.0)
    return A_of(u, cs), u, f_of(u, cs)


def edge_fluxes(state: State, mesh: Mesh, cs: CoefficientSet, drift="volume_filling",
                backend=None) -> EdgeFluxes:
    kern = _backend.get_kernels(backend) if backend else _backend.kernels
    Avals, u, fu = _cell_inputs(state, cs)
    D, C, G = kern.edge_fluxes(
        Avals, u, fu, state.v, mesh.edge_k, mesh.edge_l, mesh.edge_tau,
        cs.p, cs.chi, _drift_mode(drift),
    )
    return EdgeFluxes(np.asarray(D), np.asarray(C), np.asarray(G))


def _check_range(u_new, v_new, dt, tol):
    lo = int(np.argmin(u_new))
    if not u_new[lo] >= -tol:
        raise StabilityError("u", float(u_new[lo]), lo, dt)
    hi = int(np.argmax(u_new))
    if not u_new[hi] <= 1.0 + tol:
        raise StabilityError("u", float(u_new[hi]), hi, dt)
    vlo = int(np.argmin(v_new))
    if not v_new[vlo] >= -tol:
        raise StabilityError("v", float(v_new[vlo]), vlo, dt)


def step(state: State, mesh: Mesh, cs: CoefficientSet, dt: float, drift="volume_filling",
         tol=1e-10, check=True, backend=None) -> State:
    """Advance one explicit Euler step of size ``dt``.

    Raises :class:`StabilityError` when ``check`` is set and the new state
    leaves ``[-tol, 1 + tol]`` for u or drops below ``-tol`` for v.
    """
    if not dt >= 0:
        raise ConfigurationError(f"dt: must be >= 0, got {dt}")
    if state.u.size != mesh.n_cells:
        raise ValueError(f"state has {state.u.size} cells, mesh has {mesh.n_cells}")
    kern = _backend.get_kernels(backend) if backend else _backend.kernels
    Avals, u, fu = _cell_inputs(state, cs)
    Su, Sv = kern.assemble(
        Avals, u, fu, state.v, mesh.edge_k, mesh.edge_l, mesh.edge_tau,
        cs.p, cs.chi, _drift_mode(drift),
    )
    scale = dt / mesh.cell_measure
    u_new = state.u + scale * Su
    v_new = state.v + scale * (cs.d * Sv) + dt * g_of(state.u, state.v, cs)
    if check:
        _check_range(u_new, v_new, dt, tol)
    return State(u_new, v_new, state.t + dt)


def stable_dt(state: State, mesh: Mesh, cs: CoefficientSet, theta=0.9,
              drift="volume_filling", backend=None) -> float:
    """Heuristic explicit step restriction, scaled by the safety factor ``theta``.

    The u-equation combines the diffusion and drift limits harmonically.  The
    v-equation likewise combines its diffusion and decay rates so that the
    update stays a convex combination and keeps ``v >= 0``.  May return
    ``inf`` when nothing restricts the step (single cell, ``beta = 0``).
    """
    if not (0.0 < theta <= 1.0):
        raise ConfigurationError(f"cfl_safety: must lie in (0, 1], got {theta}")
    kern = _backend.get_kernels(backend) if backend else _backend.kernels
    Avals, _, _ = _cell_inputs(state, cs)
    la = cs.a_max
    c_lin = la ** (cs.p - 1.0)
    c_deriv = (cs.p - 1.0) * la
    s_diff, s_dv, s_tau = kern.cfl_sums(
        Avals, state.v, mesh.edge_k, mesh.edge_l, mesh.edge_tau, cs.p, c_lin, c_deriv
    )
    measure = mesh.cell_measure
    max_diff = float(np.max(s_diff)) if s_diff.size else 0.0
    max_drift = cs.chi * _DRIFT_LIPSCHITZ[drift] * (float(np.max(s_dv)) if s_dv.size else 0.0)
    max_tau = float(np.max(s_tau)) if s_tau.size else 0.0

    u_rate = (max_diff + max_drift) / measure
    v_rate = cs.d * max_tau / measure + cs.beta
    rate = max(u_rate, v_rate)
    if rate == 0.0:
        return math.inf
    return theta / rate


def step_linear_grid(state: State, mesh: Mesh, cs: CoefficientSet, dt: float,
                     drift="volume_filling") -> State:
    """Dedicated p = 2 step written directly on the ``(ny, nx)`` grid.

    Independent of the edge kernels; used to cross-check :func:`step`.
    """
    if cs.p != 2.0:
        raise ConfigurationError("step_linear_grid only handles p = 2")
    mode = _drift_mode(drift)
    ny, nx = mesh.ny, mesh.nx
    tx = mesh.hy / mesh.hx
    ty = mesh.hx / mesh.hy
    u = np.clip(state.u, 0.0, 1.0).reshape(ny, nx)
    v = state.v.reshape(ny, nx)
    Ag = A_of(u, cs)
    fg = f_of(u, cs)

    def net_flux(axis, tau):
        sl0 = (slice(None), slice(0, -1)) if axis == 1 else (slice(0, -1), slice(None))
        sl1 = (slice(None), slice(1, None)) if axis == 1 else (slice(1, None), slice(None))
        dA = Ag[sl1] - Ag[sl0]
        dv = v[sl1] - v[sl0]
        pos, neg = np.maximum(dv, 0.0), np.maximum(-dv, 0.0)
        if mode == DRIFT_MODES["volume_filling"]:
            mob = pos * u[sl0] * fg[sl1] - neg * u[sl1] * fg[sl0]
        else:
            mob = pos * u[sl0] * fg[sl0] - neg * u[sl1] * fg[sl1]
        out_u = np.zeros_like(u)
        out_v = np.zeros_like(u)
        Nu = tau * dA - (cs.chi * tau) * mob
        Nv = tau * dv
        out_u[sl0] += Nu
        out_u[sl1] -= Nu
        out_v[sl0] += Nv
        out_v[sl1] -= Nv
        return out_u, out_v

    ux, vx = net_flux(1, tx)
    uy, vy = net_flux(0, ty)
    scale = dt / mesh.cell_measure
    u_new = state.u + scale * (ux + uy).ravel()
    v_new = state.v + scale * (cs.d * (vx + vy)).ravel() + dt * g_of(state.u, state.v, cs)
    return State(u_new, v_new, state.t + dt)
