import json
import warnings

import meshio
import numpy as np
import pytest

from ksplap.errors import ConfigurationError
from ksplap.io import (
    load_snapshots,
    parse_config,
    read_snapshot_csv,
    read_summary,
    save_snapshot,
    write_config,
    write_snapshot_csv,
    write_summary,
    write_vtk,
)
from ksplap.mesh import build_regular_mesh
from ksplap.scheme import State
from ksplap.simulator import RunSummary, initial_state, preset, run


@pytest.fixture
def snap(rng):
    mesh = build_regular_mesh(-1, 1, -1, 1 / 3, 6, 4)
    state = State(rng.random(24), 5 * rng.random(24), t=0.1)
    return mesh, state


# --- CSV ---------------------------------------------------------------------

def test_csv_layout(snap):
    mesh, state = snap
    text = write_snapshot_csv(state, mesh)
    lines = text.split("\n")
    assert lines[0] == "x,y,u,v"
    assert text.endswith("\n") and "\r" not in text
    assert len(text.splitlines()) == 1 + mesh.n_cells
    rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:-1]])
    # x fastest, then y
    assert np.array_equal(rows[:, :2], mesh.centers)
    assert rows[1, 0] > rows[0, 0] and rows[1, 1] == rows[0, 1]


def test_csv_round_trip_is_bitwise(snap):
    mesh, state = snap
    centers, u, v = read_snapshot_csv(write_snapshot_csv(state, mesh))
    assert centers.tobytes() == mesh.centers.tobytes()
    assert u.tobytes() == state.u.tobytes()
    assert v.tobytes() == state.v.tobytes()


def test_csv_bad_header():
    with pytest.raises(ValueError):
        read_snapshot_csv("a,b,c,d\n0,0,0,0\n")


# --- VTK ---------------------------------------------------------------------

def test_vtk_header(snap):
    mesh, state = snap
    lines = write_vtk(state, mesh).splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert "DATASET STRUCTURED_POINTS" in lines
    assert "DIMENSIONS 6 4 1" in lines
    assert f"POINT_DATA {mesh.n_cells}" in lines
    assert "SCALARS u double 1" in lines and "SCALARS v double 1" in lines


def test_vtk_requires_square_cells():
    mesh = build_regular_mesh(-1, 1, -1, 1, 6, 4)
    with pytest.raises(ValueError):
        write_vtk(State(np.zeros(24), np.zeros(24)), mesh)


def test_vtk_readable_by_external_reader(snap, tmp_path):
    mesh, state = snap
    path = tmp_path / "s.vtk"
    path.write_text(write_vtk(state, mesh))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        data = meshio.read(path)
    assert data.points.shape[0] == mesh.n_cells
    assert np.allclose(data.points[:, :2], mesh.centers, rtol=0, atol=1e-15)
    assert np.array_equal(np.asarray(data.point_data["u"]).ravel(), state.u)
    assert np.array_equal(np.asarray(data.point_data["v"]).ravel(), state.v)


# --- summary -------------------------------------------------------------------

def test_summary_of_empty_run():
    c = preset("example1", n=8).replace(t_end=0.0, snapshot_times=(0.0,))
    doc = json.loads(write_summary(run(c).summary))
    for key in RunSummary.ARRAYS:
        assert len(doc[key]) == 1
    assert doc["rejected_steps"] == 0


def test_summary_initial_mass():
    c = preset("example1")
    mesh = c.build_mesh()
    s = RunSummary()
    s.record(initial_state(c, mesh), 0.0, mesh)
    doc = json.loads(write_summary(s))
    assert doc["mass_u"][0] == pytest.approx(0.1257, abs=0.005)


def test_summary_round_trip():
    result = run(preset("example2", n=8).replace(t_end=0.05, snapshot_times=(0.05,)))
    back = read_summary(write_summary(result.summary))
    for key in RunSummary.ARRAYS:
        assert getattr(back, key) == getattr(result.summary, key)


def test_summary_rejects_ragged():
    s = RunSummary(t=[0.0, 1.0], dt=[0.0], mass_u=[1.0, 1.0], min_u=[0, 0], max_u=[1, 1],
                   min_v=[0, 0], max_v=[1, 1])
    with pytest.raises(ValueError):
        write_summary(s)


# --- run directory ------------------------------------------------------------

def test_snapshot_directory_round_trip(snap, tmp_path):
    mesh, state = snap
    later = State(state.u[::-1].copy(), state.v, t=0.3)
    save_snapshot(tmp_path, later, mesh, vtk=False)
    save_snapshot(tmp_path, state, mesh)
    centers, snaps = load_snapshots(tmp_path)
    assert [t for t, _, _ in snaps] == [0.1, 0.3]
    assert np.array_equal(centers, mesh.centers)
    assert np.array_equal(snaps[1][1], later.u)
    assert len(list(tmp_path.glob("*.vtk"))) == 1


# --- config --------------------------------------------------------------------

def test_preset_only_config():
    c = parse_config("preset = example1\n")
    assert c == preset("example1")


def test_inline_overrides():
    c = parse_config("preset = example1, p = 6\n")
    assert c.coefficients.p == 6.0
    assert c.coefficients.chi == 0.2 and c.nx == 256


def test_sectioned_overrides():
    c = parse_config(
        'preset = "example2"\n[domain]\nnx = 32\nny = 32\n'
        '[time]\nt_end = 0.5\ndrift = "full_upwind"\n[coefficients]\nchi = 0.5\n'
    )
    assert (c.nx, c.ny, c.t_end, c.drift) == (32, 32, 0.5, "full_upwind")
    assert c.snapshot_times == (0.1, 0.5)
    assert c.coefficients.chi == 0.5 and c.coefficients.beta == 0.5


def test_initial_data_section():
    c = parse_config(
        "preset = example1\n[initial_u]\nkind = \"disks\"\n"
        "centers = [[0.1, 0.0]]\nradii = [0.3]\n"
    )
    assert c.initial_u.centers == ((0.1, 0.0),) and c.initial_u.radii == (0.3,)


@pytest.mark.parametrize(
    "text, key",
    [
        ("preset = example1\np = 1.5\n", "p"),
        ("preset = example1\nfoo = 1\n", "foo"),
        ("preset = example1\n[time]\ncfl = 0.5\n", "cfl"),
        ("preset = example1\nt_end = 0\n", "t_end"),
        ("preset = example1\nt_end = -1\n", "t_end"),
        ("preset = example9\n", "preset"),
        ("preset = example1\n[coefficients]\nchi = -1\n", "chi"),
        ("preset = example1\nnx = 0\n", "nx"),
    ],
)
def test_config_errors_name_the_key(text, key):
    with pytest.raises(ConfigurationError, match=key):
        parse_config(text)


@pytest.mark.parametrize("name", ["example1", "example2", "heat_verify"])
def test_config_round_trip(name):
    c = preset(name, n=64).replace(drift="full_upwind", max_dt=1e-3)
    assert parse_config(write_config(c)) == c
