import json
from pathlib import Path

import numpy as np
import pytest

from fluxq.cli import main

NETLISTS = Path(__file__).resolve().parent.parent / "netlists"
PASSIVE = str(NETLISTS / "passive_lc.cir")
REDUCED = str(NETLISTS / "reduced_lc.cir")
WHEEL = str(NETLISTS / "wheel.cir")


def run(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_passive(capsys):
    code, out, _ = run(capsys, "analyze", PASSIVE)
    assert code == 0
    payload = json.loads(out)
    assert payload["n"] == 3
    assert payload["c"] == 4
    assert payload["l"] == 2
    assert payload["passive_nodes"] == ["3"]
    assert payload["loop_deficiency"] == 1
    assert payload["reducible"] is True
    assert payload["quantizable"] == {"node": False, "loop": False}
    assert "C1||C2" in payload["reduction"]


def test_analyze_reduced(capsys):
    code, out, _ = run(capsys, "analyze", REDUCED)
    payload = json.loads(out)
    assert code == 0
    assert payload["quantizable"] == {"node": True, "loop": True}
    assert payload["reduction"] is None


def test_analyze_wheel(capsys):
    code, out, _ = run(capsys, "analyze", WHEEL)
    payload = json.loads(out)
    assert payload["passive_nodes"] == ["4"]
    assert payload["loop_deficiency"] == 1
    assert payload["reducible"] is False


def test_modes_reduced_table(capsys):
    code, out, _ = run(capsys, "modes", REDUCED)
    assert code == 0
    assert "1.03" in out
    assert "phi_2" in out


def test_modes_augmented_json(capsys):
    code, out, _ = run(capsys, "modes", PASSIVE, "--format", "json")
    assert code == 0
    payload = json.loads(out)
    freqs = payload["frequencies_ghz"]
    assert freqs[0] == pytest.approx(1.0273, rel=1e-3)
    assert freqs[1] == pytest.approx(1.948e4, rel=1e-3)
    assert payload["zero_modes"] == 0
    products = payload["ground_state"]["products_over_hbar2"]
    assert all(p >= 1.0 - 1e-12 for p in products)


def test_modes_unquantizable_exit_code(capsys):
    code, _, err = run(capsys, "modes", PASSIVE, "--geometric", "off")
    assert code == 3
    assert "node 3" in err


def test_modes_loop_rep(capsys):
    code, out, _ = run(
        capsys, "modes", PASSIVE, "--rep", "loop", "--lg", "1e-14", "--format", "json"
    )
    payload = json.loads(out)
    assert code == 0
    assert payload["frequencies_ghz"][1] == pytest.approx(1378.3, rel=1e-3)


def test_simulate_csv_columns(capsys):
    code, out, _ = run(capsys, "simulate", PASSIVE, "--samples", "8")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header[0] == "t_s"
    for name in ("L3_V", "L4_V", "L3L4_sum_V", "C1C2_sum_A"):
        assert name in header
    assert len(out.splitlines()) == 9


def test_simulate_single_sample_matches_ics(capsys):
    code, out, _ = run(capsys, "simulate", REDUCED, "--samples", "1")
    assert code == 0
    lines = out.splitlines()
    header = lines[0].split(",")
    row = [float(x) for x in lines[1].split(",")]
    data = dict(zip(header, row))
    assert data["t_s"] == 0.0
    assert data["C_V"] == pytest.approx(2e-3, rel=1e-9)
    assert data["L_A"] == pytest.approx(0.0, abs=1e-15)


def test_simulate_respects_netlist_ics(tmp_path, capsys):
    netlist = tmp_path / "tank.cir"
    netlist.write_text("C 2 0 6pF\nL 2 0 4nH\n.ic C 5mV\n.ic L 0A\n")
    code, out, _ = run(capsys, "simulate", str(netlist), "--samples", "1")
    assert code == 0
    lines = out.splitlines()
    data = dict(zip(lines[0].split(","), [float(x) for x in lines[1].split(",")]))
    assert data["C_V"] == pytest.approx(5e-3, rel=1e-9)


def test_simulate_deterministic_output(capsys):
    _, first, _ = run(capsys, "simulate", PASSIVE, "--samples", "64")
    _, second, _ = run(capsys, "simulate", PASSIVE, "--samples", "64")
    assert first == second


def test_simulate_17_significant_digits(capsys):
    _, out, _ = run(capsys, "simulate", REDUCED, "--samples", "2")
    cell = out.splitlines()[2].split(",")[1]
    mantissa = cell.split("e")[0]
    digits = mantissa.replace("-", "").replace(".", "")
    assert len(digits) == 17


def test_parse_failure_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cir"
    bad.write_text("C1 2 0 -2pF\n")
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 1
    assert "line 1" in err


def test_validation_failure_exit_code(tmp_path, capsys):
    disconnected = tmp_path / "disc.cir"
    disconnected.write_text("C1 1 0 1pF\nL1 1 0 1nH\nC2 5 6 1pF\nL2 5 6 1nH\n")
    code, _, err = run(capsys, "analyze", str(disconnected))
    assert code == 2
    assert "not connected" in err


def test_reduce_outputs_netlist(capsys):
    code, out, _ = run(capsys, "reduce", PASSIVE)
    assert code == 0
    assert "C1||C2 2 0 6e-12F" in out
    assert "L3+L4 2 0 4e-09H" in out


def test_reduce_json(capsys):
    code, out, _ = run(capsys, "reduce", PASSIVE, "--format", "json")
    payload = json.loads(out)
    assert code == 0
    ids = [c["id"] for c in payload["components"]]
    assert ids == ["C1||C2", "L3+L4"]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code = main(["analyze", PASSIVE, "--out", str(target)])
    capsys.readouterr()
    assert code == 0
    payload = json.loads(target.read_text())
    assert payload["n"] == 3


def test_modes_agree_with_reduction(capsys):
    """Shared low modes of a circuit and its reduction agree within 1%."""
    _, out_full, _ = run(capsys, "modes", PASSIVE, "--format", "json")
    _, out_red, _ = run(capsys, "modes", REDUCED, "--format", "json")
    full = json.loads(out_full)["frequencies_ghz"]
    red = json.loads(out_red)["frequencies_ghz"]
    for f in red:
        assert min(abs(g - f) / f for g in full) < 0.01


def test_extended_rep_simulation(capsys):
    code, out, _ = run(
        capsys,
        "simulate",
        PASSIVE,
        "--rep",
        "extended",
        "--geometric",
        "allpairs",
        "--samples",
        "4",
    )
    assert code == 0
    assert len(out.splitlines()) == 5


def test_parser_defaults():
    from fluxq.cli import build_parser

    args = build_parser().parse_args(["simulate", "x.cir"])
    assert args.rep == "node"
    assert args.geometric == "minimal"
    assert args.cg == pytest.approx(8.9e-20)
    assert args.lg == pytest.approx(1e-15)
    assert args.tmax == pytest.approx(4e-9)
    assert args.samples == 2000
