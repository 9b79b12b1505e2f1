import io
import math

import numpy as np
import pytest

from nrblockade.errors import ConfigurationError, SolverError
from nrblockade.model import preset
from nrblockade.observables import PortPair, solve_observables
from nrblockade.sweep import (
    SweepSpec,
    csv_header,
    default_sweep,
    run_grid,
    run_sweep,
    to_csv_text,
    write_csv,
)

AB, BA = PortPair("a", "b"), PortPair("b", "a")
SMALL = SweepSpec("detuning", -1.0, 1.0, 5, ("a", "b"))


def test_rows_follow_grid_and_match_direct_solves():
    model = preset("fig2_asym_molecule")
    result = run_sweep(model, SMALL)
    assert result.grid == tuple(np.linspace(-1, 1, 5))
    assert result.pairs == (AB, BA)
    direct = solve_observables(model.with_detuning(0.5).with_drive_target("b"))
    assert result.rows[3][BA].T == direct.transmission[BA]
    assert all(r[AB].residual < 1e-8 for r in result.rows)


def test_csv_is_byte_identical_across_runs_and_workers():
    model = preset("fig4_cyclic3")
    serial = to_csv_text(run_sweep(model, SMALL))
    assert serial == to_csv_text(run_sweep(model, SMALL))
    assert serial == to_csv_text(run_sweep(model, SMALL, workers=2))


def test_csv_format():
    text = to_csv_text(run_sweep(preset("fig2_asym_molecule"), SMALL))
    lines = text.split("\n")
    assert "\r" not in text and lines[-1] == ""
    assert lines[0] == (
        "detuning,T_a_to_b,g2_a_to_b,n_out_a_to_b,residual_a_to_b,"
        "T_b_to_a,g2_b_to_a,n_out_b_to_a,residual_b_to_a,status"
    )
    values = [float(v) for v in lines[1].split(",")[:-1]]
    assert values[0] == -1.0
    cells = lines[3].split(",")
    assert float(cells[1]) == run_sweep(preset("fig2_asym_molecule"), SMALL).rows[2][AB].T
    scan = [float(line.split(",")[0]) for line in lines[1:-1]]
    assert scan == sorted(scan)


def test_single_point_sweep():
    spec = SweepSpec("detuning", 0.0, 0.0, 1, ("a", "b"))
    result = run_sweep(preset("fig2_asym_molecule"), spec)
    assert len(result.rows) == 1 and result.grid == (0.0,)


def test_single_drive_port_reports_every_other_mode():
    spec = SweepSpec("detuning", 0.0, 0.0, 1, ("a",))
    result = run_sweep(preset("fig4_cyclic3"), spec)
    assert result.pairs == (AB, PortPair("a", "c"))


def test_phase_sweep_sets_loop_flux():
    spec = SweepSpec("phase", 0.0, 2 * math.pi, 5, ("a", "b"))
    result = run_sweep(preset("fig4_cyclic3"), spec)
    t_ab, t_ba = result.series("T", AB), result.series("T", BA)
    assert t_ba[1] > 0.9 and t_ab[1] < 0.1
    assert t_ab[3] > 0.9 and t_ba[3] < 0.1
    assert t_ab[0] == pytest.approx(t_ab[4], abs=1e-10)


def test_phase_sweep_needs_one_loop():
    with pytest.raises(ConfigurationError):
        run_sweep(preset("fig2_asym_molecule"), SweepSpec("phase", 0, 1, 3, ("a", "b")))


def _flaky(network, outputs):
    if network.drive.detuning == 0.0:
        raise SolverError("synthetic failure")
    return solve_observables(network, outputs)


def test_failures_are_marked_and_sweep_continues():
    result = run_grid(preset("fig2_asym_molecule"), "detuning", [-1.0, 0.0, 1.0],
                      ("a", "b"), solver=_flaky)
    assert set(result.failures) == {1}
    assert math.isnan(result.rows[1][AB].T)
    assert result.rows[2][AB].T > 0
    lines = to_csv_text(result).splitlines()
    assert lines[2].endswith(",failed") and lines[1].endswith(",ok")
    assert ",nan," in lines[2]


def test_write_csv_to_path(tmp_path):
    result = run_sweep(preset("fig2_asym_molecule"), SMALL)
    out = tmp_path / "sweep.csv"
    write_csv(result, out)
    assert out.read_bytes() == to_csv_text(result).encode()


def test_default_sweeps():
    assert default_sweep("fig2_asym_molecule") == SweepSpec("detuning", -10, 10, 401, ("a", "b"))
    fig7 = default_sweep("fig7_circulator")
    assert fig7.variable == "phase" and fig7.drive_ports == ("a", "b", "c")
    with pytest.raises(ConfigurationError):
        default_sweep("nope")
