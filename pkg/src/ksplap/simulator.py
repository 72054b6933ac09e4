"""Run orchestration: initial data, adaptive explicit stepping, presets."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .coefficients import CoefficientKind, CoefficientSet
from .errors import ConfigurationError, SolverAbort, StabilityError
from .mesh import Mesh, build_regular_mesh
from .scheme import DRIFT_MODES, State, stable_dt, step

log = logging.getLogger(__name__)

__all__ = [
    "InitialSpec",
    "RunResult",
    "RunSummary",
    "SimConfig",
    "Snapshot",
    "PRESETS",
    "discretize_initial",
    "initial_state",
    "preset",
    "run",
]

INITIAL_KINDS = ("constant", "disks", "cosine")


@dataclass(frozen=True)
class InitialSpec:
    """Initial field description.

    ``constant``: ``value`` everywhere.
    ``disks``: ``inside_value`` on the union of closed disks, ``outside_value``
    elsewhere.
    ``cosine``: ``base + amplitude * cos(pi X) cos(pi Y)`` with ``X, Y`` the
    coordinates rescaled to ``[0, 1]``; satisfies the zero-flux condition.
    """

    kind: str = "constant"
    value: float = 0.0
    centers: tuple = ()
    radii: tuple = ()
    inside_value: float = 1.0
    outside_value: float = 0.0
    base: float = 0.5
    amplitude: float = 0.25

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigurationError(
                f"kind: initial data kind must be one of {INITIAL_KINDS}, got {self.kind!r}"
            )
        try:
            centers = tuple((float(c[0]), float(c[1])) for c in self.centers)
            if any(len(c) != 2 for c in self.centers):
                raise ValueError("centers need two coordinates")
            radii = tuple(float(r) for r in self.radii)
            for name in ("value", "inside_value", "outside_value", "base", "amplitude"):
                object.__setattr__(self, name, float(getattr(self, name)))
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigurationError(f"malformed initial data: {exc}") from None
        if self.kind == "disks":
            if not centers or len(centers) != len(radii):
                raise ConfigurationError(
                    "centers/radii: disk initial data needs one radius per center"
                )
            if any(r <= 0 for r in radii):
                raise ConfigurationError("radii: disk radii must be positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @classmethod
    def constant(cls, value):
        return cls(kind="constant", value=value)

    @classmethod
    def disk(cls, center, radius, inside_value=1.0, outside_value=0.0):
        return cls(kind="disks", centers=(center,), radii=(radius,),
                   inside_value=inside_value, outside_value=outside_value)

    @classmethod
    def disks(cls, centers, radii, inside_value=1.0, outside_value=0.0):
        return cls(kind="disks", centers=tuple(centers), radii=tuple(radii),
                   inside_value=inside_value, outside_value=outside_value)

    @property
    def value_range(self):
        if self.kind == "constant":
            return self.value, self.value
        if self.kind == "disks":
            return (min(self.inside_value, self.outside_value),
                    max(self.inside_value, self.outside_value))
        a = abs(self.amplitude)
        return self.base - a, self.base + a

    def evaluate(self, x, y, bounds):
        """Pointwise value at coordinates ``x``, ``y`` (arrays)."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if self.kind == "constant":
            return np.full(x.shape, self.value)
        if self.kind == "disks":
            inside = np.zeros(x.shape, dtype=bool)
            for (cx, cy), r in zip(self.centers, self.radii):
                inside |= (x - cx) ** 2 + (y - cy) ** 2 <= r * r
            return np.where(inside, self.inside_value, self.outside_value)
        x_min, x_max, y_min, y_max = bounds
        X = (x - x_min) / (x_max - x_min)
        Y = (y - y_min) / (y_max - y_min)
        return self.base + self.amplitude * np.cos(np.pi * X) * np.cos(np.pi * Y)

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "constant":
            out["value"] = self.value
        elif self.kind == "disks":
            out.update(centers=[list(c) for c in self.centers], radii=list(self.radii),
                       inside_value=self.inside_value, outside_value=self.outside_value)
        else:
            out.update(base=self.base, amplitude=self.amplitude)
        return out


@dataclass(frozen=True)
class SimConfig:
    x_min: float = -1.0
    x_max: float = 1.0
    y_min: float = -1.0
    y_max: float = 1.0
    nx: int = 256
    ny: int = 256
    coefficients: CoefficientSet = field(default_factory=CoefficientSet)
    t_end: float = 1.0
    snapshot_times: tuple = (1.0,)
    cfl_safety: float = 0.9
    quadrature_subsamples: int = 8
    initial_u: InitialSpec = field(default_factory=InitialSpec)
    initial_v: InitialSpec = field(default_factory=InitialSpec)
    output_dir: Optional[str] = None
    preset: str = "none"
    drift: str = "volume_filling"
    max_dt: Optional[float] = None
    step_tol: float = 1e-10
    max_rejections: int = 20

    def __post_init__(self):
        if not (isinstance(self.t_end, (int, float)) and math.isfinite(self.t_end)):
            raise ConfigurationError(f"t_end: must be a finite real, got {self.t_end!r}")
        if self.t_end < 0:
            raise ConfigurationError(f"t_end: must be >= 0, got {self.t_end}")
        times = tuple(sorted(float(t) for t in self.snapshot_times))
        if any(t < 0 or t > self.t_end for t in times):
            raise ConfigurationError(
                f"snapshot_times: must lie in [0, t_end={self.t_end}], got {times}"
            )
        object.__setattr__(self, "snapshot_times", tuple(dict.fromkeys(times)))
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ConfigurationError(f"cfl_safety: must lie in (0, 1], got {self.cfl_safety}")
        if int(self.quadrature_subsamples) != self.quadrature_subsamples or self.quadrature_subsamples < 1:
            raise ConfigurationError(
                f"quadrature_subsamples: must be a positive integer, got {self.quadrature_subsamples}"
            )
        if self.drift not in DRIFT_MODES:
            raise ConfigurationError(f"drift: expected one of {sorted(DRIFT_MODES)}, got {self.drift!r}")
        if self.max_dt is not None and not self.max_dt > 0:
            raise ConfigurationError(f"max_dt: must be > 0, got {self.max_dt}")
        if self.preset not in ("none",) + tuple(PRESETS):
            raise ConfigurationError(f"preset: unknown preset {self.preset!r}")
        if not isinstance(self.coefficients, CoefficientSet):
            raise ConfigurationError("coefficients: expected a CoefficientSet")
        for key in ("nx", "ny"):
            n = getattr(self, key)
            if isinstance(n, bool) or int(n) != n or n < 1:
                raise ConfigurationError(f"{key}: must be a positive integer, got {n!r}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigurationError("domain: requires x_min < x_max and y_min < y_max")

    def build_mesh(self) -> Mesh:
        return build_regular_mesh(self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny)

    def replace(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass
class RunSummary:
    t: list = field(default_factory=list)
    dt: list = field(default_factory=list)
    mass_u: list = field(default_factory=list)
    min_u: list = field(default_factory=list)
    max_u: list = field(default_factory=list)
    min_v: list = field(default_factory=list)
    max_v: list = field(default_factory=list)
    rejected_steps: int = 0

    ARRAYS = ("t", "dt", "mass_u", "min_u", "max_u", "min_v", "max_v")

    def record(self, state: State, dt: float, mesh: Mesh):
        self.t.append(state.t)
        self.dt.append(float(dt))
        self.mass_u.append(float(np.sum(mesh.cell_measure * state.u)))
        self.min_u.append(float(state.u.min()))
        self.max_u.append(float(state.u.max()))
        self.min_v.append(float(state.v.min()))
        self.max_v.append(float(state.v.max()))

    @property
    def accepted_steps(self) -> int:
        return max(len(self.t) - 1, 0)

    def validate(self):
        n = {len(getattr(self, k)) for k in self.ARRAYS}
        if len(n) != 1:
            raise ValueError(f"summary arrays have unequal lengths: {n}")
        t = np.asarray(self.t)
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("summary times are not strictly increasing")

    def as_arrays(self) -> dict:
        return {k: np.asarray(getattr(self, k)) for k in self.ARRAYS}


@dataclass(frozen=True)
class Snapshot:
    time: float
    state: State


@dataclass
class RunResult:
    config: SimConfig
    mesh: Mesh
    snapshots: list
    summary: RunSummary
    final: State

    def snapshot_at(self, t) -> State:
        for snap in self.snapshots:
            if snap.time == t:
                return snap.state
        raise KeyError(f"no snapshot at t={t}")


def discretize_initial(mesh: Mesh, spec: InitialSpec, q: int = 8) -> np.ndarray:
    """Cell averages of ``spec`` by ``q x q`` midpoint subsampling of every cell."""
    if int(q) != q or q < 1:
        raise ConfigurationError(f"quadrature_subsamples: must be >= 1, got {q}")
    if not isinstance(spec, InitialSpec):
        raise ConfigurationError(f"initial data must be an InitialSpec, got {type(spec).__name__}")
    q = int(q)
    bounds = (mesh.x_min, mesh.x_max, mesh.y_min, mesh.y_max)
    if spec.kind == "constant":
        return np.full(mesh.n_cells, spec.value)
    offs = (np.arange(q) + 0.5) / q - 0.5
    ox = offs * mesh.hx
    oy = offs * mesh.hy
    lo, hi = spec.value_range
    out = np.empty(mesh.n_cells)
    # row blocks bound the temporary (cells x q x q) arrays
    block = max(1, 2_000_000 // (mesh.nx * q * q))
    for j0 in range(0, mesh.ny, block):
        sl = slice(j0 * mesh.nx, min(mesh.ny, j0 + block) * mesh.nx)
        cx = mesh.centers[sl, 0][:, None, None]
        cy = mesh.centers[sl, 1][:, None, None]
        vals = spec.evaluate(cx + ox[None, None, :], cy + oy[None, :, None], bounds)
        out[sl] = vals.reshape(vals.shape[0], -1).mean(axis=1)
    return np.clip(out, lo, hi)


def initial_state(config: SimConfig, mesh: Optional[Mesh] = None) -> State:
    mesh = mesh or config.build_mesh()
    q = config.quadrature_subsamples
    return State(
        discretize_initial(mesh, config.initial_u, q),
        discretize_initial(mesh, config.initial_v, q),
        0.0,
    )


def _example1(n, p):
    return SimConfig(
        nx=n, ny=n,
        coefficients=CoefficientSet(p=p, eps=0.01, alpha=40.0, beta=160.0, chi=0.2, d=0.05),
        t_end=1.0,
        snapshot_times=(1.0,),
        initial_u=InitialSpec.disk((0.0, 0.0), 0.2),
        initial_v=InitialSpec.constant(4.5),
        preset="example1",
    )


def _example2(n, p):
    return SimConfig(
        nx=n, ny=n,
        coefficients=CoefficientSet(p=p, eps=0.5, alpha=5.0, beta=0.5, chi=1.0, d=0.25),
        t_end=2.5,
        snapshot_times=(0.1, 0.5, 2.5),
        initial_u=InitialSpec.disks([(-0.25, 0.25), (0.25, -0.25)], [0.2, 0.2]),
        initial_v=InitialSpec.disks([(0.25, 0.25), (-0.25, -0.25)], [0.2, 0.2],
                                    inside_value=4.5),
        preset="example2",
    )


def _heat_verify(n, p):
    if p != 2:
        raise ConfigurationError("p: heat_verify is defined for p = 2 only")
    return SimConfig(
        nx=n, ny=n,
        coefficients=CoefficientSet(
            p=2.0, eps=1.0, chi=0.0, d=1.0, alpha=0.0, beta=0.0,
            kind=CoefficientKind.LINEAR_VERIFICATION,
        ),
        t_end=0.1,
        snapshot_times=(0.1,),
        initial_u=InitialSpec(kind="cosine", base=0.5, amplitude=0.25),
        initial_v=InitialSpec.constant(0.0),
        preset="heat_verify",
    )


PRESETS = {"example1": _example1, "example2": _example2, "heat_verify": _heat_verify}


def preset(name: str, n: int = 256, p: float = 2.0) -> SimConfig:
    """Configuration of a named experiment on an ``n x n`` mesh of ``[-1, 1]^2``."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            f"preset: unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None
    return factory(int(n), float(p))


def _time_close(a, b):
    return abs(a - b) <= 1e-12 * max(1.0, abs(b))


def run(config: SimConfig, on_snapshot: Optional[Callable[[Snapshot, Mesh], None]] = None,
        backend=None) -> RunResult:
    """Integrate from ``t = 0`` to ``config.t_end``.

    Each step uses :func:`~ksplap.scheme.stable_dt`, capped by ``max_dt`` and
    clipped so that every snapshot time and ``t_end`` is hit exactly.  A step
    that leaves the admissible range is retried with half the step size; after
    ``max_rejections`` consecutive rejections :class:`SolverAbort` is raised.
    """
    mesh = config.build_mesh()
    cs = config.coefficients
    state = initial_state(config, mesh)
    summary = RunSummary()
    summary.record(state, 0.0, mesh)
    snapshots = []

    def emit(s):
        snap = Snapshot(s.t, s.copy())
        snapshots.append(snap)
        if on_snapshot is not None:
            on_snapshot(snap, mesh)

    targets = [t for t in config.snapshot_times if t > 0.0]
    if config.t_end > 0.0 and config.t_end not in targets:
        targets.append(config.t_end)
    if 0.0 in config.snapshot_times:
        emit(state)

    for target in targets:
        while state.t < target and not _time_close(state.t, target):
            dt = stable_dt(state, mesh, cs, config.cfl_safety, config.drift, backend)
            if config.max_dt is not None:
                dt = min(dt, config.max_dt)
            hits = state.t + dt >= target or _time_close(state.t + dt, target)
            if hits:
                dt = target - state.t
            rejections = 0
            while True:
                try:
                    new = step(state, mesh, cs, dt, config.drift, tol=config.step_tol,
                               backend=backend)
                    break
                except StabilityError as err:
                    rejections += 1
                    summary.rejected_steps += 1
                    if rejections >= config.max_rejections:
                        raise SolverAbort(
                            f"{rejections} consecutive step rejections at t={state.t!r}: {err}",
                            state=state, last_error=err,
                        ) from err
                    log.debug("rejected step at t=%g: %s", state.t, err)
                    dt *= 0.5
                    hits = False
            if hits:
                new = State(new.u, new.v, target)
            state = new
            summary.record(state, dt, mesh)
        if target in config.snapshot_times:
            emit(state)
        log.info("reached t=%g after %d steps", state.t, summary.accepted_steps)

    summary.validate()
    return RunResult(config, mesh, snapshots, summary, state)
