"""Constitutive functions of the chemotaxis model.

Two coefficient families are supported:

``paper``
    ``a(u) = eps u (1 - u) + eps_reg``, ``f(u) = (1 - u)**2``
``linear_verification``
    ``a = 1``, ``f = 0`` (plain heat equation for ``u``)

``g(u, v) = alpha u - beta v`` in both cases.  Density arguments of ``a``,
``A`` and ``f`` are clamped to ``[0, 1]`` first.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "CoefficientKind",
    "CoefficientSet",
    "a_of",
    "A_of",
    "f_of",
    "g_of",
    "uf_of",
]


class CoefficientKind(str, enum.Enum):
    PAPER = "paper"
    LINEAR_VERIFICATION = "linear_verification"


@dataclass(frozen=True)
class CoefficientSet:
    p: float = 2.0
    eps: float = 0.01
    eps_reg: float = 0.0
    chi: float = 0.2
    d: float = 0.05
    alpha: float = 40.0
    beta: float = 160.0
    kind: CoefficientKind = CoefficientKind.PAPER

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", CoefficientKind(self.kind))
        except ValueError:
            raise ConfigurationError(
                f"kind: unknown coefficient kind {self.kind!r}"
            ) from None
        for name in ("p", "eps", "eps_reg", "chi", "d", "alpha", "beta"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigurationError(f"{name}: expected a real number, got {val!r}")
            if not math.isfinite(val):
                raise ConfigurationError(f"{name}: must be finite, got {val!r}")
            object.__setattr__(self, name, float(val))
        if self.p < 2:
            raise ConfigurationError(f"p: degenerate case requires p >= 2, got {self.p}")
        if self.eps <= 0:
            raise ConfigurationError(f"eps: must be > 0, got {self.eps}")
        if self.d <= 0:
            raise ConfigurationError(f"d: must be > 0, got {self.d}")
        for name in ("eps_reg", "chi", "alpha", "beta"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name}: must be >= 0, got {getattr(self, name)}")

    @property
    def a_max(self) -> float:
        """Upper bound of ``a`` on ``[0, 1]``."""
        if self.kind is CoefficientKind.LINEAR_VERIFICATION:
            return 1.0
        return self.eps / 4.0 + self.eps_reg

    def replace(self, **changes) -> "CoefficientSet":
        values = asdict(self)
        values.update(changes)
        return CoefficientSet(**values)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind.value
        return out


def _clamp(u):
    return np.clip(np.asarray(u, dtype=float), 0.0, 1.0)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def a_of(u, cs: CoefficientSet):
    u = _clamp(u)
    if cs.kind is CoefficientKind.LINEAR_VERIFICATION:
        return _out(np.ones_like(u))
    return _out(cs.eps * u * (1.0 - u) + cs.eps_reg)


def A_of(u, cs: CoefficientSet):
    """Integrated diffusion ``A(u) = int_0^u a(s) ds`` in closed form."""
    u = _clamp(u)
    if cs.kind is CoefficientKind.LINEAR_VERIFICATION:
        return _out(u.copy())
    u2 = u * u
    return _out(cs.eps * (u2 / 2.0 - u2 * u / 3.0) + cs.eps_reg * u)


def f_of(u, cs: CoefficientSet):
    u = _clamp(u)
    if cs.kind is CoefficientKind.LINEAR_VERIFICATION:
        return _out(np.zeros_like(u))
    w = 1.0 - u
    return _out(w * w)


def uf_of(u, cs: CoefficientSet):
    """Chemotactic mobility ``u f(u)``."""
    u = _clamp(u)
    return _out(u * f_of(u, cs))


def g_of(u, v, cs: CoefficientSet):
    return _out(cs.alpha * np.asarray(u, dtype=float) - cs.beta * np.asarray(v, dtype=float))
