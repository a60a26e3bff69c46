import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from darboux_integrals import __version__
from darboux_integrals.__main__ import cli

TRIPLE = "3,-1,1; -1,5,-1; 1,-1,3"


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def test_cli_version():
    cmd = [sys.executable, "-m", "darboux_integrals", "--version"]
    assert __version__ in subprocess.check_output(cmd).decode().strip()


def test_help_without_command(runner):
    result = runner.invoke(cli, [])
    assert result.exit_code == 0
    assert "verify" in result.output and "corpus" in result.output


def test_verify(runner):
    result = runner.invoke(
        cli, ["verify", "--system", "linear_focus.sys", "--candidate", "poly: x^2 + y^2"]
    )
    assert result.exit_code == 0
    assert result.output.strip() == "poly: x^2 + y^2: cofactor 2"


def test_verify_in_three_dimensions(runner):
    result = runner.invoke(
        cli, ["verify", "--system", "three_dim.sys", "--candidate", "poly: z"]
    )
    assert result.exit_code == 0
    assert "cofactor -2*x" in result.output


def test_verify_json_reports_failures(runner):
    result = runner.invoke(
        cli,
        [
            "verify",
            "--system",
            "linear_focus.sys",
            "--candidate",
            "arctan: y / x",
            "--candidate",
            "poly: x",
            "--json",
        ],
    )
    assert result.exit_code == 1
    report = json.loads(result.output)
    assert report["command"] == "verify"
    assert report["status"] == "fail"
    first, second = report["results"]
    assert (first["cofactor"], first["secondary"]) == ("1", "1")
    assert not second["verified"]


@pytest.mark.parametrize(
    "args",
    [
        ["verify", "--system", "linear_focus.sys", "--candidate", "rational: x"],
        ["verify", "--system", "missing.sys", "--candidate", "poly: x"],
        ["search", "--system", "linear_focus.sys", "--degree", "0"],
        ["jacobi", "--matrix", "1,2; 3"],
        ["inverse", "--vars", "x y"],
        ["capacity", "--n", "0", "--d", "2"],
        ["corpus", "missing.sys"],
    ],
)
def test_usage_errors(runner, args):
    assert runner.invoke(cli, args).exit_code == 2


def test_search(runner):
    result = runner.invoke(
        cli, ["search", "--system", "multiple_line.sys", "--degree", "1"]
    )
    assert result.exit_code == 0
    assert result.output.strip() == "2 + 2*x + y  [cofactor x + y]"


def test_search_with_fixed_cofactor(runner):
    result = runner.invoke(
        cli,
        ["search", "--system", "three_dim.sys", "--degree", "1", "--cofactor", "-2*x"],
    )
    assert result.exit_code == 0
    assert result.output.strip() == "z  [cofactor -2*x]"


def test_search_needs_a_planar_system(runner):
    result = runner.invoke(cli, ["search", "--system", "three_dim.sys", "--degree", "1"])
    assert result.exit_code == 1


def test_candidate_cap_from_environment(runner):
    result = runner.invoke(
        cli,
        ["search", "--system", "multiple_line.sys", "--degree", "1"],
        env={"DARBOUX_CANDIDATE_CAP": "1"},
    )
    assert result.exit_code == 1
    assert "exceed the cap of 1" in result.output


def test_combine(runner):
    result = runner.invoke(
        cli, ["combine", "--system", "linear_focus.sys", "--candidate", "complex: x + i*y"]
    )
    assert result.exit_code == 0
    assert result.output.strip() == "exp(2*arctan((y)/(x))) * (x^2 + y^2)^-1"


def test_combine_with_time(runner):
    args = ["combine", "--system", "linear_focus.sys", "--candidate", "poly: x^2 + y^2"]
    assert runner.invoke(cli, args).exit_code == 1
    result = runner.invoke(cli, args + ["--time", "--json"])
    assert result.exit_code == 0
    (entry,) = json.loads(result.output)["results"]
    assert entry["rendered"] == "(x^2 + y^2) * exp(-2*t)"
    assert entry["time_factor"] == "2*t"
    assert entry["kind"] == "first-integral"


def test_jacobi(runner):
    result = runner.invoke(cli, ["jacobi", "--matrix", TRIPLE])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[:4] == [
        "x' = 1 - y - x^2 + x*y",
        "y' = -1 - x + 2*y - x*y + y^2",
        "case: three-simple-real",
        "integral: (1 + x + y)^4 * (-1 + x)^-3 * (1 + x - 2*y)^-1",
    ]


def test_jacobi_of_a_scalar_matrix(runner):
    result = runner.invoke(cli, ["jacobi", "--matrix", "1,0,0; 0,1,0; 0,0,1", "--json"])
    assert result.exit_code == 1
    assert json.loads(result.output)["status"] == "fail"


def test_inverse_complex(runner):
    result = runner.invoke(
        cli, ["inverse", "--vars", "x y", "--complex", "x, y, 1 - x^2, x^2 + y^2"]
    )
    assert result.exit_code == 0
    assert result.output.splitlines() == [
        "x' = x - x^3 - x^2*y - y^3",
        "y' = y + x^3 - x^2*y + x*y^2",
    ]


def test_inverse_with_remainder(runner):
    result = runner.invoke(
        cli,
        [
            "inverse",
            "--vars",
            "x y",
            "--pi",
            "poly: x, cofactor: 1",
            "--pi",
            "exp: y^2, cofactor: 1",
            "--json",
        ],
    )
    assert result.exit_code == 1
    assert json.loads(result.output)["results"] == [{"column": 1, "remainder": "1"}]


def test_check_first_integral(runner):
    result = runner.invoke(
        cli,
        [
            "check",
            "--system",
            "linear_focus.sys",
            "--integral",
            "poly: x^2 + y^2 @ 1",
            "--time-factor",
            "2*t",
            "--x0",
            "1,0",
        ],
    )
    assert result.exit_code == 0
    assert "exact: yes" in result.output


def test_check_rejects_a_drifting_function(runner):
    result = runner.invoke(
        cli,
        [
            "check",
            "--system",
            "linear_focus.sys",
            "--integral",
            "poly: x^2 + y^2 @ 1",
            "--x0",
            "1,0",
        ],
    )
    assert result.exit_code == 1
    assert "exact: no" in result.output


def test_check_last_multiplier(runner):
    result = runner.invoke(
        cli,
        [
            "check",
            "--system",
            "two_multipliers.sys",
            "--integral",
            "poly: x^2 - y^2 + a @ -1",
            "--target",
            "multiplier",
            "--x0",
            "0.1,0.2",
            "--t1",
            "0.1",
            "--tol",
            "1e-4",
            "--param",
            "a=1",
        ],
    )
    assert result.exit_code == 0


def test_check_bad_parameter(runner):
    args = ["check", "--system", "two_multipliers.sys", "--integral", "poly: x"]
    result = runner.invoke(cli, args + ["--x0", "0,0", "--param", "a"])
    assert result.exit_code == 2


def test_capacity(runner):
    assert runner.invoke(cli, ["capacity", "--n", "2", "--d", "3"]).output.strip() == "6"
    result = runner.invoke(cli, ["capacity", "--n", "3", "--d", "2", "--json"])
    assert json.loads(result.output)["results"] == [{"n": 3, "d": 2, "capacity": 4}]


def test_corpus(runner):
    result = runner.invoke(cli, ["corpus", "linear_focus.sys", "jacobi.sys", "--jobs", "2"])
    assert result.exit_code == 0
    assert "0 failed" in result.output
    assert result.output.startswith("PASS linear_focus.sys:")


def test_corpus_failure(runner, tmp_path):
    path = tmp_path / "broken.sys"
    path.write_text("vars x y\nsystem\nx' = y\ny' = x\n#> verify poly: x\n")
    result = runner.invoke(cli, ["corpus", str(path), "--json"])
    assert result.exit_code == 1
    (entry,) = json.loads(result.output)["results"]
    assert entry["source"] == "broken.sys" and not entry["passed"]


@pytest.mark.parametrize(
    "target, kind, gamma",
    [
        ("pseudo:1", "pseudo", ["1"]),
        ("pseudo:-1", "last-multiplier", ["-1"]),
        ("last-multiplier", "last-multiplier", ["-1"]),
        ('custom:"6"', "custom", ["3"]),
    ],
)
def test_combine_json_reports_exponents(runner, target, kind, gamma):
    result = runner.invoke(
        cli,
        [
            "combine",
            "--system",
            "linear_focus.sys",
            "--pi",
            "poly: x^2 + y^2",
            "--target",
            target,
            "--json",
        ],
    )
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["status"] == "ok"
    (entry,) = report["results"]
    assert set(entry) == {
        "rendered",
        "kind",
        "gamma",
        "factors",
        "time_factor",
        "verified",
    }
    assert entry["kind"] == kind
    assert entry["gamma"] == gamma
    assert entry["verified"] is True


def test_combine_first_integral_json(runner):
    result = runner.invoke(
        cli,
        [
            "combine",
            "--system",
            "linear_focus.sys",
            "--pi",
            "poly: x^2 + y^2",
            "--pi",
            "arctan: y / x",
            "--target",
            "first-integral",
            "--json",
        ],
    )
    assert result.exit_code == 0
    (entry,) = json.loads(result.output)["results"]
    assert entry["kind"] == "first-integral"
    assert entry["gamma"] == [f["exponent"] for f in entry["factors"]]
    assert len(entry["gamma"]) == 2 and entry["verified"] is True


def test_combine_unknown_target(runner):
    args = ["combine", "--system", "linear_focus.sys", "--pi", "poly: x^2 + y^2"]
    assert runner.invoke(cli, args + ["--target", "second"]).exit_code == 2


def test_jacobi_json_shape(runner):
    result = runner.invoke(cli, ["jacobi", "--matrix", TRIPLE, "--system", "--json"])
    assert result.exit_code == 0
    (entry,) = json.loads(result.output)["results"]
    assert entry["case"] == "three-simple-real"
    assert len(entry["eigenvalues"]) == 3
    assert all(isinstance(value, str) for value in entry["eigenvalues"])
    general, *nonautonomous = entry["integrals"]
    assert general["rendered"] == entry["integral"]
    assert general["autonomous"] is True
    assert sorted(f["exponent"] for f in general["factors"]) == ["-1", "-3", "4"]
    assert len(nonautonomous) == 3
    assert not any(item["autonomous"] for item in nonautonomous)
    assert entry["nonautonomous"] == [item["rendered"] for item in nonautonomous]
    assert entry["system_text"].startswith("vars x y\nsystem\nx' = ")


def test_jacobi_complex_eigenvalues(runner):
    result = runner.invoke(cli, ["jacobi", "--matrix", "4,6,-2; -3,-2,1; -1,1,0", "--json"])
    (entry,) = json.loads(result.output)["results"]
    assert entry["case"] == "complex"
    assert len(entry["eigenvalues"]) == 3
    assert sum("sqrt" in value for value in entry["eigenvalues"]) == 2
    assert "system_text" not in entry


def test_jacobi_prints_the_system(runner):
    result = runner.invoke(cli, ["jacobi", "--matrix", TRIPLE, "--system"])
    assert result.exit_code == 0
    assert "vars x y" in result.output.splitlines()
