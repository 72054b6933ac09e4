"""Configuration documents and snapshot / summary serialization.

Config files are TOML with sections ``[domain]``, ``[coefficients]``,
``[time]``, ``[initial_u]``, ``[initial_v]`` and ``[output]``.  A top-level
``preset`` key starts from a named experiment; every other key overrides it.
Scalar keys of the non-initial sections may also be given at top level
(``preset = "example1"`` followed by ``p = 6``).
"""
from __future__ import annotations

import io
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from .coefficients import CoefficientSet
from .errors import ConfigurationError
from .mesh import Mesh
from .scheme import State
from .simulator import PRESETS, InitialSpec, RunSummary, SimConfig, preset

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "SECTIONS",
    "parse_config",
    "read_snapshot_csv",
    "read_summary",
    "write_config",
    "write_snapshot_csv",
    "write_summary",
    "write_vtk",
]

SECTIONS = {
    "domain": ("x_min", "x_max", "y_min", "y_max", "nx", "ny", "quadrature_subsamples"),
    "coefficients": ("p", "eps", "eps_reg", "chi", "d", "alpha", "beta", "kind"),
    "time": ("t_end", "snapshot_times", "cfl_safety", "max_dt", "drift", "step_tol",
             "max_rejections"),
    "initial_u": ("kind", "value", "centers", "radii", "inside_value", "outside_value",
                  "base", "amplitude"),
    "initial_v": ("kind", "value", "centers", "radii", "inside_value", "outside_value",
                  "base", "amplitude"),
    "output": ("output_dir",),
}
_FLAT = {key: sec for sec in ("domain", "coefficients", "time", "output") for key in SECTIONS[sec]}
_FLAT.pop("kind")  # ambiguous with the initial-data kind
_INLINE_SEP = re.compile(r",\s*(?=[A-Za-z_]\w*\s*=)")


def _normalize(text: str) -> str:
    # "preset = example1, p = 6": split inline pairs and quote bare preset names
    lines = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith(("#", "[")) and "=" in stripped:
            parts = _INLINE_SEP.split(stripped)
        else:
            parts = [line]
        for part in parts:
            m = re.fullmatch(r"\s*(preset|drift|kind|output_dir)\s*=\s*([A-Za-z_][\w./-]*)\s*", part)
            if m and m.group(2) not in ("true", "false", "inf", "nan"):
                part = f'{m.group(1)} = "{m.group(2)}"'
            lines.append(part)
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> SimConfig:
    """Parse and validate a config document into a :class:`SimConfig`."""
    try:
        doc = tomllib.loads(_normalize(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config is not valid TOML: {exc}") from None

    sections = {name: {} for name in SECTIONS}
    preset_name = doc.pop("preset", "none")
    if not isinstance(preset_name, str):
        raise ConfigurationError(f"preset: expected a name, got {preset_name!r}")
    for key, value in doc.items():
        if key in SECTIONS:
            if not isinstance(value, dict):
                raise ConfigurationError(f"[{key}] must be a section")
            allowed = SECTIONS[key]
            for sub in value:
                if sub not in allowed:
                    raise ConfigurationError(
                        f"{key}.{sub}: unknown key; allowed keys are {', '.join(allowed)}"
                    )
            sections[key].update(value)
        elif key in _FLAT:
            sections[_FLAT[key]][key] = value
        else:
            raise ConfigurationError(f"{key}: unknown key")

    if preset_name != "none":
        if preset_name not in PRESETS:
            raise ConfigurationError(
                f"preset: unknown preset {preset_name!r}; choose from {sorted(PRESETS)}"
            )
        dom = sections["domain"]
        n = dom.get("nx", dom.get("ny", 256))
        p = sections["coefficients"].get("p", 2.0)
        _check_p(p)
        base = preset(preset_name, n=n, p=p)
    else:
        base = SimConfig()

    try:
        coeffs = base.coefficients.to_dict()
        coeffs.update(sections["coefficients"])
        if "p" in coeffs:
            _check_p(coeffs["p"])
        cs = CoefficientSet(**coeffs)

        fields = {}
        for sec in ("domain", "time", "output"):
            fields.update(sections[sec])
        if "snapshot_times" in fields:
            fields["snapshot_times"] = tuple(fields["snapshot_times"])
        if "t_end" in fields:
            t_end = fields["t_end"]
            if isinstance(t_end, bool) or not isinstance(t_end, (int, float)) or not t_end > 0:
                raise ConfigurationError(f"t_end: must be a positive real, got {t_end!r}")
            if "snapshot_times" not in fields:
                fields["snapshot_times"] = tuple(
                    t for t in base.snapshot_times if t <= t_end
                ) or (float(t_end),)
        for name in ("initial_u", "initial_v"):
            if sections[name]:
                spec = sections[name]
                if "kind" not in spec:
                    raise ConfigurationError(f"{name}.kind: required when [{name}] is given")
                fields[name] = InitialSpec(
                    **{k: (tuple(tuple(c) for c in v) if k == "centers" else
                           tuple(v) if k == "radii" else v)
                       for k, v in spec.items()}
                )
        return base.replace(coefficients=cs, preset=preset_name, **fields)
    except TypeError as exc:
        raise ConfigurationError(f"malformed config value: {exc}") from None


def _check_p(p):
    if isinstance(p, bool) or not isinstance(p, (int, float)):
        raise ConfigurationError(f"p: expected a real number, got {p!r}")
    if p < 2:
        raise ConfigurationError(f"p: must satisfy p >= 2, got {p}")


def _toml_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def write_config(config: SimConfig) -> str:
    """TOML document that parses back to an equal :class:`SimConfig`."""
    out = [f"preset = {_toml_value(config.preset)}", ""]
    values = {
        "domain": {k: getattr(config, k) for k in SECTIONS["domain"]},
        "coefficients": config.coefficients.to_dict(),
        "time": {k: getattr(config, k) for k in SECTIONS["time"]},
        "initial_u": config.initial_u.to_dict(),
        "initial_v": config.initial_v.to_dict(),
        "output": {"output_dir": config.output_dir},
    }
    for sec, entries in values.items():
        out.append(f"[{sec}]")
        for key, val in entries.items():
            if val is None:
                continue
            out.append(f"{key} = {_toml_value(val)}")
        out.append("")
    return "\n".join(out)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_snapshot_csv(state: State, mesh: Mesh) -> str:
    """``x,y,u,v`` rows in canonical cell order, 17 significant digits."""
    buf = io.StringIO()
    data = np.column_stack([mesh.centers, state.u, state.v])
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header="x,y,u,v", comments="",
               newline="\n")
    return buf.getvalue()


def read_snapshot_csv(text: str):
    """Inverse of :func:`write_snapshot_csv`: ``(centers, u, v)``."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "x,y,u,v":
        raise ValueError("snapshot CSV must start with the header 'x,y,u,v'")
    data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
    return data[:, :2].copy(), data[:, 2].copy(), data[:, 3].copy()


def write_vtk(state: State, mesh: Mesh, title=None) -> str:
    """Legacy ASCII ``STRUCTURED_POINTS`` file with point scalars ``u`` and ``v``."""
    if not mesh.is_square:
        raise ValueError("write_vtk requires square cells")
    title = title or f"ksplap snapshot t={_fmt(state.t)}"
    x0, y0 = mesh.centers[0]
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {mesh.nx} {mesh.ny} 1",
        f"ORIGIN {_fmt(x0)} {_fmt(y0)} 0",
        f"SPACING {_fmt(mesh.hx)} {_fmt(mesh.hy)} 1",
        f"POINT_DATA {mesh.n_cells}",
    ]
    for name, values in (("u", state.u), ("v", state.v)):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_fmt(x) for x in values)
    return "\n".join(lines) + "\n"


def write_summary(summary: RunSummary) -> str:
    summary.validate()
    doc = {k: [float(x) for x in getattr(summary, k)] for k in RunSummary.ARRAYS}
    doc["rejected_steps"] = int(summary.rejected_steps)
    doc["accepted_steps"] = summary.accepted_steps
    return json.dumps(doc, indent=1) + "\n"


def read_summary(text: str) -> RunSummary:
    doc = json.loads(text)
    summary = RunSummary(**{k: list(doc[k]) for k in RunSummary.ARRAYS},
                         rejected_steps=int(doc["rejected_steps"]))
    summary.validate()
    return summary


# ---------------------------------------------------------------------------
# run directories

SNAPSHOT_INDEX = "snapshots.json"


def snapshot_name(t: float) -> str:
    return f"snap_t{float(t)!r}"


def save_snapshot(directory, state: State, mesh: Mesh, vtk=True):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = snapshot_name(state.t)
    (directory / f"{stem}.csv").write_text(write_snapshot_csv(state, mesh))
    entry = {"time": state.t, "csv": f"{stem}.csv"}
    if vtk and mesh.is_square:
        (directory / f"{stem}.vtk").write_text(write_vtk(state, mesh))
        entry["vtk"] = f"{stem}.vtk"
    index_path = directory / SNAPSHOT_INDEX
    index = json.loads(index_path.read_text()) if index_path.exists() else []
    index = [e for e in index if e["time"] != state.t] + [entry]
    index.sort(key=lambda e: e["time"])
    index_path.write_text(json.dumps(index, indent=1) + "\n")
    return entry


def load_snapshots(directory):
    """Read every snapshot of a run directory: ``(centers, [(t, u, v), ...])``."""
    directory = Path(directory)
    index_path = directory / SNAPSHOT_INDEX
    if index_path.exists():
        entries = [(e["time"], directory / e["csv"]) for e in json.loads(index_path.read_text())]
    else:
        entries = []
        for path in sorted(directory.glob("snap_t*.csv")):
            entries.append((float(path.stem[len("snap_t"):]), path))
    if not entries:
        raise FileNotFoundError(f"no snapshots found in {directory}")
    centers = None
    out = []
    for t, path in sorted(entries, key=lambda e: e[0]):
        c, u, v = read_snapshot_csv(Path(path).read_text())
        if centers is None:
            centers = c
        elif c.shape != centers.shape or not np.array_equal(c, centers):
            raise ValueError(f"snapshot {path} uses a different mesh")
        out.append((t, u, v))
    return centers, out
