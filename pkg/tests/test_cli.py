"""End runs of the command-line front end against temporary directories."""

import hashlib
import json
import math

import numpy as np
import pytest

from circle3bp.cli import RunConfig, UsageError, main, parse_config
from circle3bp.coords import TRAJECTORY_COLUMNS
from circle3bp.model import build_context
from circle3bp.wazewski import r_cap

from _oracles import M13_LAMBDA1, M13_LAMBDA2, M13_LAMBDA3, M13_ZVC_AXIS_X1

M13 = "0.3333333333"


def _read_csv(path):
    """Header comment (parsed), column names, float matrix (text cols kept)."""
    with open(path, encoding="ascii") as f:
        head = f.readline()
        cols = f.readline().strip().split(",")
        body = [line.strip().split(",") for line in f]
    assert head.startswith("# ")
    return json.loads(head[2:]), cols, body


class TestParseConfig:
    def test_defaults(self):
        cfg = parse_config(["claims"])
        assert cfg.m == pytest.approx(1.0 / 3.0)
        assert cfg.h == -1.0
        assert cfg.command == "claims"

    def test_flags_override_defaults(self):
        cfg = parse_config(["claims", "--m", "0.5", "--grid", "21"])
        assert cfg.m == 0.5
        assert cfg.grid == 21

    def test_config_file_supplies_values(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"m": 0.25, "h": -2.0}))
        cfg = parse_config(["shoot", "--config", str(p)])
        assert cfg.m == 0.25
        assert cfg.h == -2.0

    def test_flags_beat_config_file(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"m": 0.25}))
        cfg = parse_config(["claims", "--config", str(p), "--m", "0.5"])
        assert cfg.m == 0.5

    def test_unknown_config_key_rejected(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"mass": 0.25}))
        with pytest.raises(UsageError):
            parse_config(["claims", "--config", str(p)])

    def test_command_conflict_rejected(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"command": "zvc"}))
        with pytest.raises(UsageError):
            parse_config(["claims", "--config", str(p)])

    def test_matching_command_in_file_ok(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"command": "claims", "grid": 31}))
        assert parse_config(["claims", "--config", str(p)]).grid == 31

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(UsageError):
            parse_config(["claims", "--config", str(tmp_path / "nope.json")])


class TestValidation:
    @pytest.mark.parametrize("argv", [
        ["shoot", "--m", "1.5"],
        ["shoot", "--m", "0"],
        ["shoot", "--h", "-0.5"],
        ["simulate", "--h", "-0.25"],
        ["wazewski", "--h", "0.0"],
        ["simulate", "--r0", "-0.1"],
        ["shoot", "--tol", "0"],
        ["claims", "--grid", "1"],
        ["wazewski", "--scan", "2"],
        ["zvc", "--region", "Q"],
    ])
    def test_usage_errors_exit_2(self, argv):
        assert main(argv) == 2

    def test_unparseable_flag_exits_2(self):
        with pytest.raises(SystemExit) as ex:
            main(["shoot", "--m", "abc"])
        assert ex.value.code == 2

    def test_plotting_command_accepts_shallow_energy(self, tmp_path):
        out = tmp_path / "z.csv"
        assert main(["zvc", "--m", M13, "--h", "-0.2",
                     "--out", str(out)]) == 0

    def test_runconfig_validate_direct(self):
        with pytest.raises(UsageError):
            RunConfig(command="orbit").validate()


@pytest.fixture(scope="module")
def shoot_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("shoot")
    orbit, report = d / "orbit.csv", d / "report.json"
    status = main(["shoot", "--m", M13, "--h", "-1",
                   "--out", str(orbit), "--report", str(report)])
    assert status == 0
    return orbit, report


class TestShoot:
    def test_report_contents(self, shoot_files):
        doc = json.loads(shoot_files[1].read_text())
        assert doc["r0"] == pytest.approx(0.172809287638819, rel=1e-6)
        assert doc["residual"] <= 1e-8
        assert doc["closure_error"] <= 1e-5
        assert doc["sigma_period"] > 0.0
        assert doc["t_period"] > 0.0
        assert doc["body1_speed_at_collision"] <= 1e-6

    def test_report_echoes_config(self, shoot_files):
        doc = json.loads(shoot_files[1].read_text())
        assert doc["config"]["command"] == "shoot"
        assert doc["config"]["m"] == float(M13)

    def test_trace_records_bisection(self, shoot_files):
        trace = json.loads(shoot_files[1].read_text())["trace"]
        assert len(trace) >= 10
        for r0, face, res in trace:
            assert face in ("B1", "B2")
            assert (res < 0) == (face == "B1")

    def test_orbit_csv_schema(self, shoot_files):
        head, cols, body = _read_csv(shoot_files[0])
        assert cols == list(TRAJECTORY_COLUMNS)
        assert head["command"] == "shoot"
        assert len(body) > 1000

    def test_orbit_csv_energy_column(self, shoot_files):
        _, cols, body = _read_csv(shoot_files[0])
        res = [abs(float(row[cols.index("energy_residual")])) for row in body]
        assert max(res) <= 1e-8

    def test_orbit_csv_closes_in_u(self, shoot_files):
        _, cols, body = _read_csv(shoot_files[0])
        u = [float(row[cols.index("u")]) for row in body]
        assert u[0] == 0.0
        assert u[-1] == pytest.approx(2.0 * math.pi, abs=1e-6)

    def test_byte_reproducible(self, shoot_files):
        orbit, report = shoot_files
        before = [hashlib.sha256(p.read_bytes()).hexdigest()
                  for p in (orbit, report)]
        assert main(["shoot", "--m", M13, "--h", "-1",
                     "--out", str(orbit), "--report", str(report)]) == 0
        after = [hashlib.sha256(p.read_bytes()).hexdigest()
                 for p in (orbit, report)]
        assert before == after


class TestSimulate:
    def test_default_r0_is_half_cap(self, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        assert main(["simulate", "--m", M13, "--out", str(out)]) == 0
        printed = capsys.readouterr().out
        ctx = build_context(float(M13))
        assert f"r0={0.5 * r_cap(ctx, -1.0)!r}" in printed
        head, cols, body = _read_csv(out)
        assert cols == list(TRAJECTORY_COLUMNS)
        sig = [float(r[0]) for r in body]
        assert all(b > a for a, b in zip(sig, sig[1:]))

    def test_explicit_r0_outside_segment_fails_1(self, capsys):
        assert main(["simulate", "--m", M13, "--r0", "0.3"]) == 1
        assert "ValueError" in capsys.readouterr().err


class TestWazewski:
    def test_scan_produces_one_face_flip(self, tmp_path):
        out = tmp_path / "exits.csv"
        assert main(["wazewski", "--m", M13, "--scan", "14",
                     "--out", str(out)]) == 0
        _, cols, body = _read_csv(out)
        assert cols == ["r0", "face", "exit_r", "exit_nu", "exit_u",
                        "exit_gamma", "sigma"]
        faces = [row[1] for row in body]
        assert set(faces) == {"B1", "B2"}
        assert faces[0] == "B2" and faces[-1] == "B1"
        assert sum(a != b for a, b in zip(faces, faces[1:])) == 1

    def test_single_point_mode(self, tmp_path):
        out = tmp_path / "one.csv"
        assert main(["wazewski", "--m", M13, "--r0", "0.2",
                     "--out", str(out)]) == 0
        _, _, body = _read_csv(out)
        assert len(body) == 1
        assert body[0][1] == "B1"


class TestReports:
    def test_homothetic_report(self, tmp_path):
        rep = tmp_path / "tri.json"
        assert main(["homothetic", "--m", "0.5", "--report", str(rep)]) == 0
        doc = json.loads(rep.read_text())
        assert doc["regime"] == "m>1/9"
        assert doc["h0"] > 0.0

    def test_homothetic_light_regime(self, capsys):
        assert main(["homothetic", "--m", "0.05"]) == 0
        assert "m<1/9" in capsys.readouterr().out

    def test_claims_report(self, tmp_path):
        rep = tmp_path / "claims.json"
        assert main(["claims", "--m", "0.5", "--report", str(rep)]) == 0
        doc = json.loads(rep.read_text())
        assert doc["all_pass"] is True
        assert [c["name"] for c in doc["claims"]] == [
            f"claim{k}" for k in range(1, 7)]
        assert set(doc["constants"]) >= {"rU_thetatheta_00",
                                         "c2_sq_measured", "A", "B"}

    def test_linearize_report(self, tmp_path):
        rep = tmp_path / "lin.json"
        assert main(["linearize", "--m", M13, "--report", str(rep)]) == 0
        doc = json.loads(rep.read_text())
        lams = doc["eigenvalues"]
        assert lams[0] == pytest.approx(M13_LAMBDA1, rel=1e-9)
        assert lams[1] == pytest.approx(M13_LAMBDA2, rel=1e-9)
        assert lams[2] == pytest.approx(M13_LAMBDA3, rel=1e-9)
        assert doc["fd_agreement"] <= 1e-6
        assert np.shape(doc["jacobian"]) == (3, 3)


class TestZvc:
    def test_contour_crosses_axis_at_landmark(self, tmp_path):
        out = tmp_path / "zvc.csv"
        assert main(["zvc", "--m", M13, "--h", "-1", "--region", "I",
                     "--out", str(out)]) == 0
        _, cols, body = _read_csv(out)
        assert cols == ["polyline", "x1", "x2"]
        pts = np.array([[float(v) for v in row[1:]] for row in body])
        crossings = [pts[k, 0] for k in range(len(pts) - 1)
                     if pts[k, 1] * pts[k + 1, 1] < 0]
        assert crossings
        assert min(abs(x - M13_ZVC_AXIS_X1) for x in crossings) < 5e-3
