"""End-to-end tests for the command line harness.

Every invocation goes through kummerlab.cli.main with --out so the tests
read result files rather than captured stdout.  Determinism tests compare
raw bytes across worker counts and repeat runs.
"""

import json
import math
import re

import numpy as np
import pytest

from kummerlab import cli
from kummerlab import blanc_cremona as bc
from kummerlab import wehler_dynamics as wd


def run_cli(tmp_path, name, *argv):
    out = tmp_path / name
    rc = cli.main([*argv, "--out", str(out)])
    assert rc == 0
    return out


def run_json(tmp_path, name, *argv):
    out = run_cli(tmp_path, name, *argv)
    return json.loads(out.read_text())


def test_lattice_degree_fibonacci_square(tmp_path):
    payload = run_json(tmp_path, "deg.json",
                       "lattice", "degree", "--matrix", "[[2,1],[1,1]]")
    assert payload["char_poly"] == [1, -3, 1]
    assert payload["classification"] == "RECIPROCAL_QUADRATIC"
    assert abs(float(payload["lambda_f"]) - (3 + math.sqrt(5)) / 2) < 1e-12
    assert payload["kummer_possible"] is True
    assert payload["verdict"] == "undetermined by degree"


def test_lattice_degree_accepts_dim_entries_object(tmp_path):
    payload = run_json(tmp_path, "deg2.json", "lattice", "degree",
                       "--matrix", '{"dim": 2, "entries": [[2,1],[1,1]]}')
    assert payload["char_poly"] == [1, -3, 1]


def test_lattice_salem_lehmer_alias(tmp_path):
    payload = run_json(tmp_path, "salem.json",
                       "lattice", "salem", "--poly", "lehmer")
    assert payload["classification"] == "SALEM"
    assert payload["min_poly_degree"] == 10
    assert payload["kummer_possible"] is False
    assert payload["verdict"] == "mu_f singular"
    assert abs(float(payload["lambda_f"]) - 1.17628081825992) < 1e-12


def test_lattice_salem_plastic_dominant_root(tmp_path):
    payload = run_json(tmp_path, "plastic.json",
                       "lattice", "salem", "--poly", "[-1,-1,0,1]")
    assert abs(float(payload["lambda_f"]) - 1.3247179572447460) < 1e-9


def test_lattice_wehler_action(tmp_path):
    payload = run_json(tmp_path, "wa.json", "lattice", "wehler-action")
    assert payload["char_poly"] == [1, -17, -17, 1]
    assert payload["involution_check"] is True
    assert payload["isometry_check"] is True
    assert abs(float(payload["lambda_f"]) - (9 + 4 * math.sqrt(5))) < 1e-10


def test_lattice_rank2_hyperbolic_plane(tmp_path):
    payload = run_json(tmp_path, "r2.json",
                       "lattice", "rank2", "--gram", "[[0,1],[1,0]]")
    assert payload["represents_zero"] is True
    assert payload["aut_infinite"] is False


def test_lattice_enriques_summary(tmp_path):
    payload = run_json(tmp_path, "enr.json", "lattice", "enriques")
    assert payload["rank"] == 10
    assert payload["signature"] == [1, 9, 0]
    assert payload["det"] == -1
    assert payload["even"] is True


def test_torus_lyapunov_exact_and_qr(tmp_path):
    expected = math.log((3 + math.sqrt(5)) / 2)
    exact = run_json(tmp_path, "lex.json", "torus", "lyapunov",
                     "--matrix", "[[2,1],[1,1]]")
    assert abs(exact["lambda_u"] - expected) < 1e-14
    assert exact["method"] == "EXACT_EIGEN"
    qr = run_json(tmp_path, "lqr.json", "torus", "lyapunov",
                  "--matrix", "[[2,1],[1,1]]", "--method", "qr",
                  "--steps", "2000")
    assert abs(qr["lambda_u"] - expected) < 1e-10
    assert qr["method"] == "QR_ORBIT"


def test_torus_fix_count(tmp_path):
    payload = run_json(tmp_path, "fc.json", "torus", "fix-count", "--n", "3")
    assert payload["count"] == 256


def test_torus_fix_enum_rational_csv(tmp_path):
    out = run_cli(tmp_path, "fe.csv", "torus", "fix-enum", "--n", "2")
    lines = out.read_text().splitlines()
    assert lines[0] == "a1,b1,a2,b2"
    assert len(lines) == 1 + 25
    cell = re.compile(r"^-?\d+/\d+$")
    for line in lines[1:]:
        assert all(cell.match(c) for c in line.split(","))


def test_torus_equidist_report(tmp_path):
    payload = run_json(tmp_path, "eq.json", "torus", "equidist",
                       "--n", "3", "--kmax", "2")
    assert payload["count"] == 256
    assert payload["max_nontrivial_abs"] < 1e-10


def test_torus_dimension_estimate(tmp_path):
    payload = run_json(tmp_path, "dim.json", "torus", "dimension",
                       "--samples", "20000", "--probes", "32", "--seed", "3")
    assert abs(payload["dimension"] - 4.0) < 0.3
    assert payload["stderr"] > 0


def test_torus_rigidity_consistent(tmp_path):
    payload = run_json(tmp_path, "trig.json", "torus", "rigidity",
                       "--matrix", "[[2,1],[1,1]]")
    assert payload["verdict"] == "KUMMER_CONSISTENT"
    assert payload["gap_u"] == 0.0
    assert payload["gap_s"] == 0.0
    assert abs(payload["lambda_u_est"] - payload["half_log_lambda_f"]) == 0.0


def test_torus_automorphism_file(tmp_path):
    data = {"matrix": [[2, 1], [1, 1]],
            "tau": {"re": 0.0, "im": 1.0},
            "quotient": "none"}
    path = tmp_path / "auto.json"
    path.write_text(json.dumps(data))
    payload = run_json(tmp_path, "fcf.json", "torus", "fix-count",
                       "--file", str(path), "--n", "3")
    assert payload["count"] == 256
    manifest = json.loads((tmp_path / "fcf.json.manifest.json").read_text())
    assert "auto.json" in manifest["input_digests"]


def test_wehler_orbit_csv_stays_on_surface(tmp_path):
    out = run_cli(tmp_path, "orb.csv", "wehler", "orbit",
                  "--random", "--seed", "4", "--n", "20")
    lines = out.read_text().splitlines()
    assert lines[0].startswith("step,x_u_re")
    assert len(lines) == 1 + 21
    residuals = [float(line.split(",")[-1]) for line in lines[1:]]
    assert max(residuals) < 1e-8


def test_wehler_surface_file_matches_random(tmp_path):
    surface = wd.random_surface(4)
    arr = np.array(surface.coeffs, dtype=complex)
    data = {"coeffs": [[[[arr[i, j, k].real, arr[i, j, k].imag]
                         for k in range(3)] for j in range(3)]
                       for i in range(3)]}
    path = tmp_path / "surface.json"
    path.write_text(json.dumps(data))
    from_file = run_cli(tmp_path, "of.csv", "wehler", "orbit",
                        "--surface", str(path), "--n", "5", "--seed", "4")
    from_seed = run_cli(tmp_path, "os.csv", "wehler", "orbit",
                        "--random", "--seed", "4", "--n", "5")
    assert from_file.read_bytes() == from_seed.read_bytes()


def test_wehler_saddles_worker_invariance(tmp_path, monkeypatch):
    base = ("wehler", "saddles", "--random", "--seed", "4",
            "--nmax", "2", "--seeds", "256")
    one = run_cli(tmp_path, "w1.csv", *base, "--workers", "1")
    three = run_cli(tmp_path, "w3.csv", *base, "--workers", "3")
    assert one.read_bytes() == three.read_bytes()
    monkeypatch.setenv("KUMMERLAB_WORKERS", "2")
    env = run_cli(tmp_path, "we.csv", *base)
    assert one.read_bytes() == env.read_bytes()
    repeat = run_cli(tmp_path, "wr.csv", *base, "--workers", "1")
    assert one.read_bytes() == repeat.read_bytes()


def test_wehler_saddles_csv_layout(tmp_path):
    out = run_cli(tmp_path, "sad.csv", "wehler", "saddles",
                  "--random", "--seed", "4", "--nmax", "2", "--seeds", "256")
    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "period"
    assert header[-1] == "type"
    assert "m1_re" in header and "m2_im" in header
    assert len(lines) > 1
    for line in lines[1:]:
        cells = line.split(",")
        assert cells[-1] in {"SADDLE", "NONSADDLE"}
        assert int(cells[0]) in {1, 2}


def test_wehler_lyapunov_pooled(tmp_path):
    payload = run_json(tmp_path, "wl.json", "wehler", "lyapunov",
                       "--random", "--seed", "4", "--nmax", "2",
                       "--seeds", "256")
    assert payload["lambda_u"] > 0
    assert payload["stderr"] > 0
    assert payload["per_period"]
    assert all(len(row) == 3 for row in payload["per_period"])


def test_wehler_density_pgm(tmp_path):
    out = run_cli(tmp_path, "den.pgm", "wehler", "density",
                  "--random", "--seed", "4", "--iters", "2000")
    data = out.read_bytes()
    assert data.startswith(b"P5 512 512 255\n")
    assert len(data) == 15 + 512 * 512


def test_wehler_probe_clean_surface(tmp_path):
    payload = run_json(tmp_path, "probe.json", "wehler", "probe",
                       "--random", "--seed", "11", "--trials", "800")
    assert payload["n_suspects"] == 0
    assert payload["suspects"] == []


def test_blanc_check_involution(tmp_path):
    out = run_cli(tmp_path, "binv.csv", "blanc", "check-involution",
                  "--points", "50", "--seed", "2")
    lines = out.read_text().splitlines()
    assert lines[0] == "index,defect"
    assert len(lines) == 51
    assert max(float(line.split(",")[1]) for line in lines[1:]) < 1e-10


def test_blanc_check_fixed_cubic(tmp_path):
    out = run_cli(tmp_path, "bfix.csv", "blanc", "check-fixed-cubic",
                  "--points", "30", "--seed", "2")
    lines = out.read_text().splitlines()
    assert len(lines) > 10
    assert max(float(line.split(",")[1]) for line in lines[1:]) < 1e-9


def test_blanc_check_two_form(tmp_path):
    out = run_cli(tmp_path, "btwo.csv", "blanc", "check-two-form",
                  "--points", "20", "--l", "1", "--seed", "2")
    lines = out.read_text().splitlines()
    assert len(lines) == 21
    assert max(float(line.split(",")[-1]) for line in lines[1:]) < 1e-6


def test_blanc_orbit_rows(tmp_path):
    out = run_cli(tmp_path, "borb.csv", "blanc", "orbit",
                  "--l", "3", "--n", "8", "--seed", "2")
    lines = out.read_text().splitlines()
    assert lines[0] == "step,x0_re,x0_im,x1_re,x1_im,x2_re,x2_im"
    assert len(lines) == 9


def test_blanc_cubic_and_base_point_files(tmp_path):
    cubic = bc.fermat_cubic()
    cpath = tmp_path / "cubic.json"
    cpath.write_text(json.dumps([[c.real, c.imag] for c in cubic.coeffs]))
    qs = bc.distinct_cubic_points(cubic, 2, 5)
    bpath = tmp_path / "bases.json"
    bpath.write_text(json.dumps(
        [[[z.real, z.imag] for z in q.array()] for q in qs]))
    out = run_cli(tmp_path, "bf.csv", "blanc", "check-involution",
                  "--cubic", str(cpath), "--base-points", str(bpath),
                  "--points", "10", "--seed", "2")
    manifest = json.loads((tmp_path / "bf.csv.manifest.json").read_text())
    assert set(manifest["input_digests"]) == {"cubic.json", "bases.json"}
    lines = out.read_text().splitlines()
    assert max(float(line.split(",")[1]) for line in lines[1:]) < 1e-10


def test_repeat_json_runs_byte_identical(tmp_path):
    first = run_cli(tmp_path, "a.json", "torus", "rigidity",
                    "--matrix", "[[2,1],[1,1]]")
    second = run_cli(tmp_path, "b.json", "torus", "rigidity",
                     "--matrix", "[[2,1],[1,1]]")
    assert first.read_bytes() == second.read_bytes()


def test_manifest_contents(tmp_path):
    out = run_cli(tmp_path, "m.json", "lattice", "degree",
                  "--matrix", "[[2,1],[1,1]]", "--seed", "9")
    manifest = json.loads((tmp_path / "m.json.manifest.json").read_text())
    assert manifest["artifact_version"]
    assert manifest["command"] == "lattice degree"
    assert manifest["config"]["seed"] == 9
    assert manifest["result_file"] == "m.json"
    assert manifest["result_digest"] == str(cli.fnv1a64(out.read_bytes()))
    assert manifest["wall_time_s"] >= 0
    assert set(manifest["stages"]) == {"compute_s", "emit_s"}


def test_fnv1a64_reference_vectors():
    assert cli.fnv1a64(b"") == 0xCBF29CE484222325
    assert cli.fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert cli.fnv1a64(b"foobar") == 0x85944171F73967E8


def test_big_ints_become_decimal_strings(tmp_path):
    payload = run_json(tmp_path, "big.json", "torus", "fix-count",
                       "--matrix", "[[2,1],[1,1]]", "--n", "30")
    assert isinstance(payload["count"], str)
    assert int(payload["count"]) > 2**53


def test_malformed_matrix_exits_2(tmp_path, capsys):
    rc = cli.main(["lattice", "degree", "--matrix", "not json"])
    assert rc == 2
    err = capsys.readouterr().err
    assert err.count("\n") == 1
    assert err.startswith("error:")


def test_precondition_failure_exits_2(capsys):
    rc = cli.main(["torus", "fix-count", "--n", "0"])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_unknown_tolerance_exits_2(capsys):
    rc = cli.main(["wehler", "orbit", "--random", "--tol.bogus", "1e-8"])
    assert rc == 2
    assert "bogus" in capsys.readouterr().err


def test_tolerance_out_of_range_exits_2(capsys):
    rc = cli.main(["wehler", "orbit", "--random", "--tol.membership", "1e-3"])
    assert rc == 2
    assert "membership" in capsys.readouterr().err


def test_tolerance_equals_form_accepted(tmp_path):
    run_cli(tmp_path, "tol.csv", "wehler", "orbit", "--random",
            "--seed", "4", "--n", "3", "--tol.membership=1e-9")


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["lattice"])
    assert exc.value.code == 2


def test_bad_seed_exits_2(capsys):
    rc = cli.main(["torus", "fix-count", "--n", "2", "--seed", "-1"])
    assert rc == 2
    assert "seed" in capsys.readouterr().err


def test_bad_workers_exits_2(capsys):
    rc = cli.main(["torus", "fix-count", "--n", "2", "--workers", "0"])
    assert rc == 2
    assert "worker" in capsys.readouterr().err
