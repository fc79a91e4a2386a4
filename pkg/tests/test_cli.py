import csv
import io
import json
import math
import subprocess
import sys

import pytest

from imexstab.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_INSTABILITY,
    EXIT_OK,
    RUN_SCHEMAS,
    load_pair,
    main,
    parse_k_ladder,
)
from imexstab.coeffs import generate_scheme
from imexstab.errors import ConfigError


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def meta_lines(text):
    return {ln[2:].split(":", 1)[0]: json.loads(ln.split(":", 1)[1]) for ln in text.splitlines() if ln.startswith("# ")}


@pytest.fixture
def pair_file(tmp_path):
    def write(A, B, **extra):
        p = tmp_path / "pair.json"
        p.write_text(json.dumps({"A": A, "B": B, **extra}))
        return str(p)

    return write


# --- k ladders -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "spec, expected",
    [
        ("2^-3..2^-5", [2**-3, 2**-4, 2**-5]),
        ("2^0..2^0", [1.0]),
        ("2^-6..2^-4", [2**-6, 2**-5, 2**-4]),
        ("2^-7", [2**-7]),
        (0.25, [0.25]),
        ("0.5", [0.5]),
        (["2^-1", 0.1, "2^-3..2^-4"], [0.5, 0.1, 0.125, 0.0625]),
    ],
)
def test_parse_k_ladder(spec, expected):
    assert parse_k_ladder(spec) == expected


@pytest.mark.parametrize("spec", ["2^x", "-1", 0, "3^-2..3^-4", None, True, math.inf])
def test_parse_k_ladder_rejects(spec):
    with pytest.raises(ConfigError):
        parse_k_ladder(spec)


# --- coeffs and diagram -------------------------------------------------------------------


def test_coeffs_csv_matches_library(capsys):
    code, out, _ = run(["coeffs", "--order", "3", "--delta", "0.5"], capsys)
    assert code == EXIT_OK
    rows = read_csv(out)
    s = generate_scheme(3, 0.5)
    assert [float(r["a"]) for r in rows] == list(s.a)
    assert [float(r["c"]) for r in rows] == list(s.c)
    assert meta_lines(out)["order"] == 3


def test_coeffs_json(capsys):
    code, out, _ = run(["coeffs", "--order", "2", "--delta", "1", "--format", "json"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["a"] == [0.5, -2.0, 1.5]


@pytest.mark.parametrize("argv", [["coeffs", "--order", "6", "--delta", "0.5"],
                                  ["coeffs", "--order", "3", "--delta", "0"],
                                  ["coeffs", "--order", "3"],
                                  ["nonsense"]])
def test_bad_arguments_exit_with_config_code(argv, capsys):
    assert run(argv, capsys)[0] == EXIT_CONFIG


def test_diagram_contains_negative_point(capsys):
    code, out, _ = run(["diagram", "--order", "3", "--delta", "1", "--contains", "-9,0"], capsys)
    assert code == EXIT_OK and json.loads(out)["inside"] is False
    code, out, _ = run(["diagram", "--order", "3", "--delta", "0.0656", "--contains", "-9,0"], capsys)
    assert json.loads(out)["inside"] is True
    assert run(["diagram", "--order", "3", "--delta", "1", "--contains", "a,b"], capsys)[0] == EXIT_CONFIG


def test_diagram_locus_file(tmp_path, capsys):
    out = tmp_path / "locus.csv"
    code, _, _ = run(["diagram", "--order", "3", "--delta", "1", "--samples", "64", "--out", str(out)], capsys)
    text = out.read_text()
    rows = read_csv(text)
    # closed curve: the first point is repeated at the end
    assert code == EXIT_OK and len(rows) == 65 and rows[0]["re"] == rows[-1]["re"]
    assert meta_lines(text)["m_right"] == pytest.approx(0.5)


# --- spectra and recipes ---------------------------------------------------------------------


def test_wp_output(pair_file, capsys):
    path = pair_file([[-1, 0], [0, -1]], [[-2, 1], [1, -2]])
    code, out, _ = run(["wp", "--pair", path, "--p", "1"], capsys)
    rows = read_csv(out)
    eig = sorted(float(r["re"]) for r in rows if r["set"] == "eigenvalue")
    assert code == EXIT_OK and eig == pytest.approx([-3.0, -1.0])


def test_complex_pair_entries(pair_file):
    path = pair_file([[-1]], [[[0.5, 2.0]]])
    pair = load_pair(path)
    assert pair.B[0, 0] == 0.5 + 2.0j


def test_recipe_delta_example(pair_file, capsys):
    path = pair_file([[-1]], [[-9]])
    code, out, _ = run(["recipe", "delta", "--order", "3", "--pair", path], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["delta_star"] == pytest.approx(2 - 7.2 ** (1 / 3), abs=1e-6)


def test_recipe_infeasible_exit_code(pair_file, capsys):
    path = pair_file([[-1, 0, 0], [0, -1, 0], [0, 0, -1]], [[-0.2, 0, 0], [0, -2, 2], [0, -2, -2]])
    code, out, _ = run(["recipe", "sigma", "--order", "2", "--delta", "1", "--pair", path], capsys)
    assert code == EXIT_INFEASIBLE and json.loads(out)["feasible"] is False


def test_recipe_interval(capsys):
    code, out, _ = run(["recipe", "interval", "--order", "5", "--dmin", "1", "--dmax", "7"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and abs(doc["delta"] - 0.1732) <= 1e-4 and abs(doc["sigma"] - 2.69) <= 1e-2
    # eta = 0 lands on the closed-form vertex, which is on the boundary
    code, out, _ = run(["recipe", "interval", "--order", "3", "--dmin", "1", "--dmax", "4", "--eta", "0"], capsys)
    assert code == EXIT_INFEASIBLE
    assert run(["recipe", "interval", "--order", "3", "--dmin", "1"], capsys)[0] == EXIT_CONFIG


@pytest.mark.parametrize("doc", [{"A": [[-1]]}, {"A": [[-1]], "B": [[0]], "extra": 1}, {"A": [[1]], "B": [[0]]}])
def test_bad_pair_files(tmp_path, doc, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    assert run(["recipe", "joint", "--order", "3", "--pair", str(p)], capsys)[0] == EXIT_CONFIG


def test_unreadable_pair_file(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert run(["wp", "--pair", str(p)], capsys)[0] == EXIT_CONFIG
    assert run(["wp", "--pair", str(tmp_path / "missing.json")], capsys)[0] == EXIT_CONFIG


# --- run configs ---------------------------------------------------------------------------------


def write_config(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_diffusion1d_is_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path, {"order": [1, 2], "k_list": "2^-3..2^-4", "N": 16, "t_final": 0.5, "seed": 7})
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert run(["diffusion1d", "--config", cfg, "--out", str(path)], capsys)[0] == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rows = read_csv(outs[0].decode())
    assert len(rows) == 4
    assert "wall" not in outs[0].decode()


@pytest.mark.parametrize("doc", [
    {"order": 3, "k_list": "2^-3", "unknown": 1},
    {"order": 7, "k_list": "2^-3"},
    {"k_list": "2^-3"},
    {"order": 2, "k_list": "2^x"},
    {"order": 2, "k_list": "2^-3", "delta": 1.5},
])
def test_diffusion1d_rejects_bad_config(tmp_path, doc, capsys):
    assert run(["diffusion1d", "--config", write_config(tmp_path, doc)], capsys)[0] == EXIT_CONFIG


def test_schemas_forbid_unknown_keys():
    for schema in RUN_SCHEMAS.values():
        assert schema["additionalProperties"] is False


def test_porous3d_small_run(tmp_path, capsys):
    cfg = write_config(tmp_path, {"order": 1, "k_list": [0.25], "N": 8, "t_final": 0.5})
    code, out, _ = run(["porous3d", "--config", cfg], capsys)
    assert code == EXIT_OK and len(read_csv(out)) == 1


# --- channel ----------------------------------------------------------------------------------------


def test_channel_sweep(capsys):
    code, out, _ = run(["channel", "sweep", "--Ny", "32", "--xi", "1,5,25"], capsys)
    assert code == EXIT_OK and meta_lines(out)["decreasing"] is True


def test_channel_certify(capsys):
    code, out, _ = run(["channel", "certify", "--Ny", "64", "--order", "3"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["certified"] is True


def test_channel_run_instability_exit_code(capsys):
    argv = ["channel", "run", "--Ny", "32", "--order", "3", "--delta", "1", "--sigma", "1", "--k", "10",
            "--steps", "300"]
    code, _, err = run(argv, capsys)
    assert code == EXIT_INSTABILITY and "error" in err


def test_channel_run_certified_is_bounded(capsys):
    code, out, _ = run(["channel", "run", "--Ny", "32", "--order", "3", "--k", "1000", "--steps", "50"], capsys)
    norms = [float(r["norm"]) for r in read_csv(out)]
    assert code == EXIT_OK and len(norms) == 51 and max(norms) < 1e3 * norms[0]


# --- entry point ---------------------------------------------------------------------------------------


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "imexstab.cli", "coeffs", "--order", "1", "--delta", "1"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "j,a,b,c" in out.stdout


def test_version(capsys):
    assert run(["--version"], capsys)[0] == EXIT_OK
