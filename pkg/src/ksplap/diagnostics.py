"""Invariant checks, verification oracles and the intrinsic-scaling probe."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .coefficients import CoefficientKind, CoefficientSet
from .errors import GeometryError, ParameterError, UsageError
from .mesh import Mesh
from .scheme import State

__all__ = [
    "Check",
    "IntrinsicGeometry",
    "InvariantReport",
    "check_bounds",
    "check_run",
    "heat_exact",
    "heat_reference_error",
    "holder_fit",
    "intrinsic_cylinder_params",
    "observed_order",
    "oscillation",
    "oscillation_probe",
    "model_envelope_exponents",
    "plateau_fraction",
    "total_mass",
]


@dataclass
class Check:
    name: str
    passed: bool
    worst: float
    location: Optional[tuple] = None
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        where = f" at {self.location}" if self.location is not None else ""
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status} {self.name}: worst={self.worst!r}{where}{extra}"


@dataclass
class InvariantReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, other: "InvariantReport") -> "InvariantReport":
        self.checks.extend(other.checks)
        return self

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_text(self) -> str:
        return "\n".join(c.line() for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "worst": c.worst,
                 "location": list(c.location) if c.location is not None else None,
                 "detail": c.detail}
                for c in self.checks
            ],
        }


def _range_check(name, values, lo, hi, tol, loc_label):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return Check(name, True, float("nan"), None, "empty")
    below = (lo - tol) - values if np.isfinite(lo) else np.full(values.shape, -np.inf)
    above = values - (hi + tol) if np.isfinite(hi) else np.full(values.shape, -np.inf)
    excess = np.maximum(below, above)
    # NaN is always a violation
    excess = np.where(np.isnan(values), np.inf, excess)
    idx = int(np.argmax(excess))
    passed = bool(excess[idx] <= 0)
    detail = f"range [{lo}, {hi}], tol={tol}"
    return Check(name, passed, float(values[idx]), None if passed else (loc_label, idx), detail)


def check_bounds(data, lo=0.0, hi=1.0, tol=0.0, name="u") -> InvariantReport:
    """Range check on a cell field, a :class:`State` or a run summary.

    For a state, ``u`` is checked against ``[lo, hi]`` and ``v`` against
    ``[0, inf)``.  For a summary the per-step extrema are checked and the
    witness location is the step index.
    """
    report = InvariantReport()
    if isinstance(data, State):
        report.checks.append(_range_check("u bounds", data.u, lo, hi, tol, "cell"))
        report.checks.append(_range_check("v >= 0", data.v, 0.0, math.inf, tol, "cell"))
    elif hasattr(data, "min_u") and hasattr(data, "max_v"):
        report.checks.append(_range_check("u lower bound", data.min_u, lo, math.inf, tol, "step"))
        report.checks.append(_range_check("u upper bound", data.max_u, -math.inf, hi, tol, "step"))
        report.checks.append(_range_check("v >= 0", data.min_v, 0.0, math.inf, tol, "step"))
    else:
        report.checks.append(_range_check(f"{name} bounds", data, lo, hi, tol, "cell"))
    return report


def total_mass(values, mesh: Mesh) -> float:
    """``sum_K |K| u_K`` (pairwise summation, deterministic)."""
    values = np.asarray(values, dtype=float)
    return float(np.sum(mesh.volumes * values))


def check_run(summary, tol=1e-12, mass_rtol=1e-10) -> InvariantReport:
    """Bounds on every accepted step plus mass drift of the summary series."""
    report = check_bounds(summary, 0.0, 1.0, tol)
    mass = np.asarray(summary.mass_u)
    m0 = mass[0]
    drift = np.abs(mass - m0) / (abs(m0) if m0 != 0 else 1.0)
    idx = int(np.argmax(drift))
    report.checks.append(
        Check("mass conservation", bool(drift[idx] <= mass_rtol), float(drift[idx]),
              None if drift[idx] <= mass_rtol else ("step", idx), f"rtol={mass_rtol}")
    )
    return report


def plateau_fraction(values, mesh: Mesh, level=0.99) -> float:
    """Area fraction of the domain where ``u >= level``."""
    values = np.asarray(values)
    return float(np.sum(mesh.volumes * (values >= level)) / mesh.area)


def heat_exact(x, y, t, base=0.5, amplitude=0.25):
    """Neumann cosine mode of ``u_t = Laplace u`` on ``[-1, 1]^2``."""
    return base + amplitude * np.cos(np.pi * (x + 1) / 2) * np.cos(np.pi * (y + 1) / 2) * np.exp(
        -(np.pi ** 2 / 2) * t
    )


def heat_reference_error(state: State, mesh: Mesh, coefficients: Optional[CoefficientSet] = None) -> float:
    """Discrete L2 error against :func:`heat_exact` at ``state.t``."""
    if coefficients is not None:
        cs = coefficients
        if cs.kind is not CoefficientKind.LINEAR_VERIFICATION or cs.chi != 0 or cs.p != 2:
            raise UsageError(
                "heat_reference_error needs the linear_verification kind with chi = 0, p = 2"
            )
    if (mesh.x_min, mesh.x_max, mesh.y_min, mesh.y_max) != (-1.0, 1.0, -1.0, 1.0):
        raise UsageError("heat_reference_error is defined on [-1, 1]^2 only")
    exact = heat_exact(mesh.centers[:, 0], mesh.centers[:, 1], state.t)
    err = state.u - exact
    return float(math.sqrt(np.sum(mesh.volumes * err * err)))


def observed_order(err_coarse, err_fine, ratio=2.0) -> float:
    return math.log(err_coarse / err_fine) / math.log(ratio)


# ---------------------------------------------------------------------------
# intrinsic scaling


@dataclass(frozen=True)
class IntrinsicGeometry:
    """Rescaled cylinder factors for oscillation ``omega``.

    ``a0`` scales the outer cylinder ``Q(a0 R^p, R)`` and ``d_cyl`` the
    sub-cylinders ``(0, t*) + Q(d_cyl R^p, R)``.
    """

    p: float
    m: int
    beta1: float
    beta2: float
    omega: float
    a0: float
    d_cyl: float
    trivial_envelope: bool = False

    def phi(self, s):
        return 1.0 if self.trivial_envelope else s ** (self.beta1 / (self.p - 1))

    def psi(self, s):
        return 1.0 if self.trivial_envelope else s ** (self.beta2 / (self.p - 1))

    @property
    def subcylinders_fit(self) -> bool:
        """Sub-cylinders fit inside the outer one when ``phi(omega/2^m) <= psi(omega/4)``."""
        return self.phi(self.omega / 2 ** self.m) <= self.psi(self.omega / 4)

    def fits_in_outer(self, R, eps) -> bool:
        """``Q(a0 R^p, R)`` lies inside ``Q(R^(p - eps), 2R)`` iff ``1/a0 > R^eps``."""
        return 1.0 / self.a0 > R ** eps

    def t_star_interval(self, R) -> tuple:
        """Admissible start times ``t*`` for sub-cylinders of radius ``R``."""
        return (self.d_cyl * R ** self.p - self.a0 * R ** self.p, 0.0)

    def outer_height(self, R) -> float:
        return self.a0 * R ** self.p

    def sub_height(self, R) -> float:
        return self.d_cyl * R ** self.p


def model_envelope_exponents(p, delta=1e-6):
    """Envelope exponents for ``a(u) = eps u (1 - u)``.

    ``a`` vanishes linearly at both ends, giving ``beta1 = beta2 = p - 1``.  The
    strict inequality ``beta2 > beta1`` is restored by adding ``delta``; the
    third return value flags that the equality case was perturbed.
    """
    beta1 = p - 1.0
    return beta1, beta1 + delta, delta > 0


def intrinsic_cylinder_params(omega, p, m=2, beta1=1.0, beta2=1.0 + 1e-6,
                              trivial_envelope=False) -> IntrinsicGeometry:
    """Compute ``a0`` and the sub-cylinder factor ``d_cyl`` for oscillation ``omega``.

    ``trivial_envelope`` replaces the power envelopes by the constant 1, which
    for ``p = 2`` gives standard parabolic cylinders.
    """
    if not (0.0 < omega <= 1.0):
        raise ParameterError(f"omega must lie in (0, 1], got {omega}")
    if p < 2:
        raise ParameterError(f"p must be >= 2, got {p}")
    if int(m) != m or m < 1:
        raise ParameterError(f"m must be a positive integer, got {m}")
    if not trivial_envelope and not (beta2 > beta1 > 0):
        raise ParameterError(f"need beta2 > beta1 > 0, got beta1={beta1}, beta2={beta2}")
    m = int(m)
    scale = (omega / 2.0) ** (2.0 - p)
    if trivial_envelope:
        phi_m = psi_4 = 1.0
    else:
        phi_m = (omega / 2.0 ** m) ** (beta1 / (p - 1.0))
        psi_4 = (omega / 4.0) ** (beta2 / (p - 1.0))
    a0 = scale / phi_m ** (p - 1.0)
    d_cyl = scale / psi_4 ** (p - 1.0)
    return IntrinsicGeometry(float(p), m, float(beta1), float(beta2), float(omega),
                             float(a0), float(d_cyl), bool(trivial_envelope))


def oscillation(snapshots: Sequence, centers, center, radius, height) -> float:
    """``max - min`` of the data inside ``B_radius(x0) x (t0 - height, t0]``.

    ``snapshots`` is a sequence of ``(time, values)`` pairs; ``center`` is
    ``(x0, y0, t0)``.  Membership uses cell centers and snapshot times.
    """
    centers = np.asarray(centers, dtype=float)
    x0, y0, t0 = center
    in_ball = (centers[:, 0] - x0) ** 2 + (centers[:, 1] - y0) ** 2 <= radius * radius
    if not in_ball.any():
        raise GeometryError(f"no cell center within radius {radius} of ({x0}, {y0})")
    hi, lo = -math.inf, math.inf
    found = False
    for t, values in snapshots:
        if t0 - height < t <= t0:
            sel = np.asarray(values)[in_ball]
            hi = max(hi, float(sel.max()))
            lo = min(lo, float(sel.min()))
            found = True
    if not found:
        raise GeometryError(f"no snapshot time in ({t0 - height}, {t0}]")
    return hi - lo


def holder_fit(pairs) -> tuple:
    """Least-squares slope of ``log osc`` against ``log r`` and the RMS log residual."""
    pairs = [(float(r), float(w)) for r, w in pairs]
    if len(pairs) < 3:
        raise ParameterError(f"holder_fit needs at least 3 pairs, got {len(pairs)}")
    r = np.array([p[0] for p in pairs])
    w = np.array([p[1] for p in pairs])
    if np.any(~(r > 0)) or np.any(~(w > 0)):
        raise ParameterError("holder_fit needs positive radii and oscillations")
    X = np.column_stack([np.log(r), np.ones_like(r)])
    y = np.log(w)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


@dataclass
class ProbeRow:
    radius: float
    omega_outer: float
    a0: Optional[float]
    height: float
    clipped: bool
    omega: float


def oscillation_probe(snapshots, centers, center, radii, p=2.0, m=2, beta1=None, beta2=None,
                      outer_eps=0.5, trivial_envelope=False):
    """Oscillation in intrinsically scaled cylinders around ``center``.

    For each radius ``R`` the oscillation ``omega`` over the outer cylinder
    ``Q(R^(p - outer_eps), 2R)`` fixes ``a0``; the reported value is the
    oscillation over ``Q(a0 R^p, R)``.  Heights reaching past the first
    snapshot are clipped and flagged.  Returns ``(rows, alpha, residual)``;
    the fit uses rows with positive oscillation and is ``None`` when fewer
    than three remain.
    """
    if beta1 is None or beta2 is None:
        b1, b2, _ = model_envelope_exponents(p)
        beta1 = b1 if beta1 is None else beta1
        beta2 = b2 if beta2 is None else beta2
    times = [t for t, _ in snapshots]
    t0 = center[2]
    available = t0 - min(times)
    rows = []
    for R in sorted(radii, reverse=True):
        outer_h = R ** (p - outer_eps)
        w_outer = oscillation(snapshots, centers, center, 2 * R, outer_h)
        if w_outer > 0:
            geo = intrinsic_cylinder_params(min(w_outer, 1.0), p, m, beta1, beta2, trivial_envelope)
            a0 = geo.a0
            height = geo.outer_height(R)
        else:
            a0 = None
            height = outer_h
        clipped = height > available
        w = oscillation(snapshots, centers, center, R, math.inf if clipped else height)
        rows.append(ProbeRow(R, w_outer, a0, height, clipped, w))
    usable = [(row.radius, row.omega) for row in rows if row.omega > 0]
    if len(usable) >= 3:
        alpha, resid = holder_fit(usable)
    else:
        alpha, resid = None, None
    return rows, alpha, resid
