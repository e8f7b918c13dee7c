import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cluster_ent import serialize
from cluster_ent.cli import run
from cluster_ent.state_model import validate
from helpers import PURE, UNIFORM, fvectors


def _write(tmp_path, name, F):
    path = tmp_path / name
    path.write_text(serialize.dumps({"F": list(F)}))
    return str(path)


def _run(capsys, argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestSerialize:
    @given(fvectors())
    def test_roundtrip_bit_exact(self, F):
        back = serialize.parse_fvector(json.loads(serialize.dumps({"F": list(F)})))
        assert np.array_equal(validate(back), F)

    def test_seventeen_digits(self):
        assert serialize.dumps(0.1) == "0.10000000000000001"
        assert serialize.dumps(1.0) == "1.0"
        assert serialize.dumps({"a": [True, None, 2]}) == '{"a": [true, null, 2]}'

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_roundtrip(self, x):
        assert json.loads(serialize.dumps(x)) == x

    def test_bad_shapes(self):
        with pytest.raises(ValueError):
            serialize.parse_fvector({"G": []})
        with pytest.raises(ValueError):
            serialize.parse_density({"re": [[1.0]]})


class TestVerbs:
    def test_ree_pure(self, tmp_path, capsys):
        code, out, _ = _run(capsys, ["ree", "--input", _write(tmp_path, "pure.json", PURE)])
        d = json.loads(out)
        assert code == 0 and d["E"] == 1.0 and d["region"] == "A'" and d["class"] == "I"
        assert set(d) >= {"E", "region", "formula", "closest", "class"}

    def test_ree_nats(self, tmp_path, capsys):
        _, out, _ = _run(capsys, ["ree", "--nats", "--input", _write(tmp_path, "pure.json", PURE)])
        assert json.loads(out)["E"] == pytest.approx(np.log(2))

    def test_classify_uniform(self, tmp_path, capsys):
        code, out, _ = _run(capsys, ["classify", "--input", _write(tmp_path, "u.json", UNIFORM)])
        d = json.loads(out)
        assert code == 0 and d["biseparable"] is True and d["region"] == "D2" and d["violated"] == []

    def test_gen_pipe_ree(self, capsys, monkeypatch):
        code, out, _ = _run(capsys, ["gen", "dephase", "--q", "0.1,0.1,0.1,0.1"])
        assert code == 0
        code, out2, _ = _run(capsys, ["ree", "--input", "-"], stdin=out, monkeypatch=monkeypatch)
        assert json.loads(out2)["E"] == pytest.approx(0.0793, abs=5e-5)

    def test_gen_roundtrip(self, capsys):
        for argv in (["gen", "dephase", "--q", "0.13,0.2,0.07,0.31"], ["gen", "uniform"], ["gen", "basis", "--index", "9"]):
            _, out, _ = _run(capsys, argv)
            F = np.array(json.loads(out)["F"])
            assert np.array_equal(validate(F), F)

    def test_twirl(self, tmp_path, capsys):
        path = tmp_path / "rho.json"
        path.write_text(json.dumps({"re": (np.eye(16) / 16).tolist(), "im": np.zeros((16, 16)).tolist()}))
        code, out, _ = _run(capsys, ["twirl", "--input", str(path)])
        assert code == 0 and np.allclose(json.loads(out)["F"], 1 / 16)

    def test_sample(self, capsys, monkeypatch):
        _, a, _ = _run(capsys, ["sample", "--seed", "7", "--region", "B"])
        _, b, _ = _run(capsys, ["sample", "--seed", "7", "--region", "B"])
        assert a == b
        code, out, _ = _run(capsys, ["classify", "--input", "-"], stdin=a, monkeypatch=monkeypatch)
        assert json.loads(out)["region"] == "B"

    def test_verify_single_and_batch(self, tmp_path, capsys):
        code, out, _ = _run(capsys, ["verify", "--input", _write(tmp_path, "p.json", PURE), "--tol", "1e-6"])
        row = json.loads(out)
        assert code == 0 and row["discrepancy"] <= 1e-4
        corpus = tmp_path / "c.jsonl"
        corpus.write_text(serialize.dumps({"F": list(PURE)}) + "\n" + serialize.dumps(list(UNIFORM)) + "\n\n")
        _, out, _ = _run(capsys, ["verify", "--batch", str(corpus)])
        rows = [json.loads(line) for line in out.splitlines()]
        assert [r["region"] for r in rows] == ["A'", "D2"]
        _, out, _ = _run(capsys, ["verify", "--batch", str(corpus), "--n", "1", "--seed", "3"])
        assert len(out.splitlines()) == 1

    def test_verify_generated(self, capsys):
        _, out, _ = _run(capsys, ["verify", "--seed", "42", "--n", "8"])
        rows = [json.loads(line) for line in out.splitlines()]
        assert len(rows) == 8 and max(r["discrepancy"] for r in rows) <= 1e-4
        assert {r["half"] for r in rows} == {"first", "second"}

    def test_regions(self, tmp_path, capsys):
        grid, bounds = tmp_path / "g.csv", tmp_path / "b.json"
        code, _, _ = _run(capsys, ["regions", "--p0", "0.3", "--res", "40", "--out", f"{grid},{bounds}"])
        assert code == 0
        assert grid.read_text().splitlines()[0] == "x,y,label"
        inter = json.loads(bounds.read_text())["intersections"]["p7=p_AB & p7=p3"]
        assert inter == pytest.approx([0.2, 0.2], abs=1e-12)

    def test_regions_defaults(self, capsys):
        _, out, _ = _run(capsys, ["regions", "--res", "5"])
        lines = out.splitlines()
        assert lines[0] == "p0,x,y,label" and len(lines) == 1 + 2 * 25
        assert {line.split(",")[0] for line in lines[1:]} == {"0.29999999999999999", "0.59999999999999998"}

    def test_regions_slice(self, capsys):
        _, out, _ = _run(capsys, ["regions", "--p0", "0.3", "--res", "30", "--p4-slice", "0.1"])
        assert "D1'" in out

    def test_bisep_surface(self, tmp_path, capsys):
        path = tmp_path / "s.csv"
        code, _, _ = _run(capsys, ["bisep-surface", "--l0", "0.2", "--res", "6", "--out", str(path)])
        lines = path.read_text().splitlines()
        assert code == 0 and lines[0] == "l3,l7,l4,label" and len(lines) == 1 + 216

    def test_deterministic_bytes(self, capsys):
        outs = [_run(capsys, ["regions", "--p0", "0.3", "--res", "20"])[1] for _ in range(2)]
        assert outs[0] == outs[1]


class TestErrors:
    def test_domain_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"F": [0.5, 0.6]}')
        code, out, err = _run(capsys, ["ree", "--input", str(path)])
        assert code == 1 and out == ""
        assert set(json.loads(err)) == {"error", "message"}

    def test_not_normalised(self, tmp_path, capsys):
        code, _, err = _run(capsys, ["classify", "--input", _write(tmp_path, "x.json", UNIFORM * 2)])
        assert code == 1 and json.loads(err)["error"] == "NotNormalized"

    def test_missing_file(self, capsys):
        code, _, err = _run(capsys, ["ree", "--input", "/nonexistent/x.json"])
        assert code == 1 and json.loads(err)["error"] == "FileNotFoundError"

    def test_usage_errors(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["ree", "--input", "x", "--bogus"])
        assert exc.value.code == 2
        assert "--bogus" in capsys.readouterr().err
        with pytest.raises(SystemExit) as exc:
            run(["frobnicate"])
        assert exc.value.code == 2

    def test_unknown_region(self, capsys):
        code, _, err = _run(capsys, ["sample", "--seed", "1", "--region", "Q"])
        assert code == 1


def test_module_entry_point(tmp_path):
    gen = subprocess.run([sys.executable, "-m", "cluster_ent", "gen", "basis", "--index", "0"], capture_output=True, text=True, check=True)
    res = subprocess.run([sys.executable, "-m", "cluster_ent", "ree", "--input", "-"], input=gen.stdout, capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["E"] == 1.0
