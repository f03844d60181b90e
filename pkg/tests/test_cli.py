import json
from pathlib import Path

import numpy as np
import pytest

from specsci import GridSpec, RegionEstimate
from specsci.cli import compare_regions, main

OPS = Path(__file__).resolve().parents[1] / "operators"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_pseudospec_writes_region_and_meta(tmp_path, capsys):
    prefix = tmp_path / "lap"
    code, out, _ = run(capsys, "pseudospec", "--op", OPS / "laplacian.json", "--n", 0, "--eps", 0.1,
                       "--outer", 16, "--output", prefix, "--format", "both")
    assert code == 0
    region = RegionEstimate.from_csv((tmp_path / "lap.csv").read_text())
    assert region.z.size == 33**2 and region.member.any()
    meta = json.loads((tmp_path / "lap.meta.json").read_text())
    assert meta["config"]["eps"] == 0.1 and meta["region_meta"]["k"] == 17
    assert (tmp_path / "lap.json").exists()


def test_pseudospec_full_size_example(tmp_path, capsys):
    code, _, _ = run(capsys, "pseudospec", "--op", OPS / "laplacian.json", "--n", 0, "--eps", 0.1,
                     "--outer", 64, "--output", tmp_path / "big")
    assert code == 0 and (tmp_path / "big.csv").exists()


def test_output_independent_of_threads(tmp_path, capsys):
    args = ["pseudospec", "--op", OPS / "toeplitz_asym.json", "--n", 1, "--eps", 0.3, "--outer", 12]
    run(capsys, *args, "--threads", 1, "--output", tmp_path / "a")
    run(capsys, *args, "--threads", 3, "--output", tmp_path / "b")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_metrics_prints_seventeen_digits(tmp_path, capsys):
    g = GridSpec.rectangle(0, 1, 0, 1, 0.5)
    z = g.points()
    RegionEstimate(z, np.zeros(z.size), z == 0, g).to_csv()
    (tmp_path / "a.csv").write_text(RegionEstimate(z, np.zeros(z.size), z == 0, g).to_csv())
    (tmp_path / "b.csv").write_text(RegionEstimate(z, np.zeros(z.size), z == 1, g).to_csv())
    code, out, _ = run(capsys, "metrics", "--hausdorff", tmp_path / "a.csv", tmp_path / "b.csv")
    assert code == 0 and out.strip() == f"{1.0:.17g}"
    assert compare_regions(str(tmp_path / "a.csv"), str(tmp_path / "a.csv")) == {"hausdorff": 0, "attouch_wets": 0}


def test_metrics_one_step_dilation(tmp_path):
    g = GridSpec.rectangle(-1, 1, -1, 1, 0.25)
    z = g.points()
    base = np.abs(z) < 1e-12
    dilated = base | (np.abs(np.abs(z) - 0.25) < 1e-12) & ((z.real == 0) | (z.imag == 0))
    (tmp_path / "a.csv").write_text(RegionEstimate(z, np.zeros(z.size), base, g).to_csv())
    (tmp_path / "b.csv").write_text(RegionEstimate(z, np.zeros(z.size), dilated, g).to_csv())
    assert compare_regions(str(tmp_path / "a.csv"), str(tmp_path / "b.csv"))["hausdorff"] == pytest.approx(g.pitch)


def test_metrics_empty_member_set(tmp_path, capsys):
    g = GridSpec.rectangle(0, 1, 0, 1, 0.5)
    z = g.points()
    (tmp_path / "e.csv").write_text(RegionEstimate(z, np.zeros(z.size), np.zeros(z.size, bool), g).to_csv())
    code, _, err = run(capsys, "metrics", tmp_path / "e.csv", tmp_path / "e.csv")
    assert code == 2 and "empty" in err


def test_metrics_accepts_point_csv(tmp_path, capsys):
    (tmp_path / "p.csv").write_text("re,im\n0,0\n")
    (tmp_path / "q.csv").write_text("re,im\n1,0\n")
    code, out, _ = run(capsys, "metrics", "--hausdorff", tmp_path / "p.csv", tmp_path / "q.csv")
    assert code == 0 and float(out) == 1


def test_log_of_singular_matrix_is_inconclusive(tmp_path, capsys):
    code, _, err = run(capsys, "log", "--op", OPS / "diag01.json", "--budget", 500, "--output", tmp_path / "log")
    assert code == 4 and "inconclusive" in err
    assert json.loads((tmp_path / "log.meta.json").read_text())["outcome"] == "inconclusive"


def test_log_of_positive_diagonal(tmp_path, capsys):
    code, _, _ = run(capsys, "log", "--op", OPS / "diag14.json", "--output", tmp_path / "log")
    assert code == 0
    doc = json.loads((tmp_path / "log.json").read_text())
    assert doc["result"][1][1][0] == pytest.approx(np.log(4))


def test_resolvent_outside_domain_is_numerical_error(tmp_path, capsys):
    code, _, err = run(capsys, "resolvent", "--op", OPS / "diag14.json", "--roots", "0,0", "--z", "1",
                       "--output", tmp_path / "r")
    assert code == 3 and err


def test_funcalc_log(tmp_path, capsys):
    code, _, _ = run(capsys, "funcalc", "--op", OPS / "diag_log_example.json", "--roots", "1,4",
                     "--function", "log", "--output", tmp_path / "f")
    assert code == 0
    doc = json.loads((tmp_path / "f.json").read_text())
    diag = [doc["result"][i][i][0] for i in range(4)]
    assert np.allclose(diag, np.log([1, 1.2, 3.8, 4.1]), atol=1e-6)


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum-compact", "--op", OPS / "harmonic_diagonal.json", "--n", 9],
        ["spectrum-bounded", "--op", OPS / "shift.json", "--n1", 4, "--n2", 20, "--eps", 0.2],
        ["spectrum-bounded", "--op", OPS / "laplacian.json", "--n1", 9, "--eps", 0.2],
        ["spectrum-banded", "--op", OPS / "laplacian.json", "--k", 9, "--eps", 0.2],
        ["residual", "--op", OPS / "shift.json", "--eps", 0.3, "--m", 8],
        ["numrange", "--op", OPS / "jordan2.json", "--rect", -1, 1, -1, 1, 0.1],
        ["hull", "--op", OPS / "diag14.json", "--steps", 2, "--budget", 2000],
        ["hull", "--op", OPS / "laplacian.json", "--degree", 2, "--search-budget", 200],
        ["counterexample", "--m", 3],
    ],
)
def test_commands_succeed(tmp_path, capsys, argv):
    code, _, err = run(capsys, *argv, "--output", tmp_path / "out")
    assert code == 0, err
    assert json.loads((tmp_path / "out.meta.json").read_text())["command"] == argv[0]


def test_hull_resume(tmp_path, capsys):
    run(capsys, "hull", "--op", OPS / "diag14.json", "--steps", 1, "--budget", 2000, "--output", tmp_path / "h")
    code, _, _ = run(capsys, "hull", "--op", OPS / "diag14.json", "--steps", 1, "--budget", 2000,
                     "--resume", tmp_path / "h.json", "--output", tmp_path / "h2")
    assert code == 0
    assert json.loads((tmp_path / "h2.json").read_text())["cursor"] >= json.loads((tmp_path / "h.json").read_text())["cursor"]


@pytest.mark.parametrize(
    "argv",
    [
        ["pseudospec", "--op", OPS / "laplacian.json", "--n", 0, "--eps", -1, "--outer", 4],
        ["pseudospec", "--op", "/nonexistent.json", "--n", 0, "--eps", 0.1, "--outer", 4],
        ["spectrum-compact", "--op", OPS / "laplacian.json", "--n", 0],
        ["spectrum-bounded", "--op", OPS / "counterexample.json", "--n1", 4, "--eps", 0.1],
        ["nonsense"],
        ["pseudospec", "--op", OPS / "laplacian.json", "--threads", "zero"],
        ["counterexample", "--m", 3, "--schedule", "1,0"],
    ],
)
def test_parameter_errors_exit_2(tmp_path, capsys, argv):
    code, _, err = run(capsys, *argv, "--output", tmp_path / "x")
    assert code == 2 and err
