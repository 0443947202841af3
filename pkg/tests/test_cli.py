import contextlib
import io
import json

import numpy as np
import pytest

from projpair.cli import (
    dispatch,
    finite_spectrum_from_json,
    finite_spectrum_to_json,
    load_operator,
    operator_from_json,
    operator_to_json,
    projection_from_json,
)
from projpair.errors import SchemaError
from projpair.finite_spectrum import bj_analyze
from projpair.gen import random_finite_spectrum, random_tailed_pair
from projpair.operators import TailPattern, TailedOperator, TailedProjection
from projpair.rng import SplitMix64


def run(argv):
    out = io.StringIO()
    err = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = dispatch(argv)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


class TestOperatorSchema:
    def test_dense_round_trip(self):
        m = np.diag([1.0, 0.0]).astype(complex)
        doc = operator_to_json(m)
        back = operator_from_json(json.loads(json.dumps(doc)))
        assert isinstance(back, np.ndarray)
        assert np.array_equal(back, m)

    def test_shift_preserved_bit_exact(self):
        op = TailedOperator(np.zeros((1, 1)), -1, TailPattern.constant(1, 1))
        first = json.dumps(operator_to_json(op), sort_keys=True)
        back = operator_from_json(json.loads(first))
        second = json.dumps(operator_to_json(back), sort_keys=True)
        assert first == second
        assert back.shift == -1
        assert back == op

    def test_complex_blocks_bit_exact(self):
        rng = SplitMix64(100)
        for _ in range(10):
            p, _, _ = random_tailed_pair(rng, max_window=10)
            first = json.dumps(operator_to_json(p), sort_keys=True)
            back = projection_from_json(json.loads(first))
            assert json.dumps(operator_to_json(back), sort_keys=True) == first

    def test_bad_tail_constant(self):
        doc = {"schema": "projpair/1", "kind": "tailed",
               "block": [[[1.0, 0.0]]], "tail": {"constant": 2}, "shift": 0}
        with pytest.raises(SchemaError) as info:
            operator_from_json(doc)
        assert "tail.constant" in str(info.value)

    def test_bad_schema_version(self):
        with pytest.raises(SchemaError) as info:
            operator_from_json({"schema": "projpair/2", "kind": "dense", "block": []})
        assert "schema" in str(info.value)

    def test_finite_spectrum_round_trip(self):
        rng = SplitMix64(8)
        for _ in range(8):
            z = random_finite_spectrum(rng)
            doc = json.dumps(finite_spectrum_to_json(z), sort_keys=True)
            z2 = finite_spectrum_from_json(json.loads(doc))
            assert json.dumps(finite_spectrum_to_json(z2), sort_keys=True) == doc
            assert bj_analyze(z).to_json() == bj_analyze(z2).to_json()


class TestExitCodes:
    def test_esscodim_equal_pair(self, tmp_path):
        q = TailedProjection.diagonal(TailPattern.periodic([1, 0], 0))
        path = write(tmp_path, "q.json", operator_to_json(q))
        code, out, _ = run(["esscodim", path, path])
        assert code == 0
        assert "= 0" in out

    def test_esscodim_not_fredholm(self, tmp_path):
        p = write(tmp_path, "p.json",
                  operator_to_json(TailedProjection.diagonal(TailPattern.constant(1, 0))))
        q = write(tmp_path, "q.json",
                  operator_to_json(TailedProjection.diagonal(TailPattern.constant(0, 0))))
        code, _, _ = run(["esscodim", p, q])
        assert code == 2

    def test_kadison_check_rejected(self, tmp_path):
        path = write(tmp_path, "seq.json",
                     {"schema": "projpair/1", "prefix": [0.75], "tail": "zeros"})
        code, out, _ = run(["kadison-check", path, "--json"])
        assert code == 2
        doc = json.loads(out)
        assert doc["verdict"] == "rejected"
        assert doc["defect"] == 0.25

    def test_kadison_build_and_reload(self, tmp_path):
        path = write(tmp_path, "seq.json",
                     {"schema": "projpair/1", "prefix": [0.6, 0.4], "tail": "zeros"})
        out_path = tmp_path / "built.json"
        code, _, _ = run(["kadison-build", path, "--json", "-o", str(out_path)])
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["verdict"] == "built"
        assert doc["index"] == 0
        proj = projection_from_json(doc["operator"])
        assert np.allclose(proj.block_diagonal(), [0.6, 0.4], atol=1e-9)

    def test_bj_consistent(self, tmp_path):
        z = random_finite_spectrum(SplitMix64(4))
        path = write(tmp_path, "z.json", finite_spectrum_to_json(z))
        code, out, _ = run(["bj", path, "--json"])
        assert code == 0
        assert json.loads(out)["consistent"] is True

    def test_missing_file_is_usage_error(self, tmp_path):
        code, _, err = run(["esscodim", str(tmp_path / "nope.json"),
                            str(tmp_path / "nope.json")])
        assert code == 1
        assert "not found" in err

    def test_unknown_subcommand(self):
        code, _, _ = run(["frobnicate"])
        assert code == 1

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        code, _, err = run(["kadison-check", str(path)])
        assert code == 1

    def test_schema_error_names_field(self, tmp_path):
        path = write(tmp_path, "bad.json",
                     {"schema": "projpair/1", "kind": "tailed", "block": [[[1.0, 0.0]]],
                      "tail": {"constant": 2}, "shift": 0})
        code, _, err = run(["esscodim", path, path])
        assert code == 1
        assert "tail.constant" in err


class TestDeterminism:
    def test_selftest_reports_byte_identical(self):
        c1, out1, _ = run(["selftest", "--trials", "8", "--seed", "5", "--json"])
        c2, out2, _ = run(["selftest", "--trials", "8", "--seed", "5", "--json"])
        assert c1 == c2 == 0
        assert out1 == out2

    def test_esscodim_report_byte_identical(self, tmp_path):
        rng = SplitMix64(21)
        p, q, _ = random_tailed_pair(rng, max_window=12)
        pp = write(tmp_path, "p.json", operator_to_json(p))
        qq = write(tmp_path, "q.json", operator_to_json(q))
        _, out1, _ = run(["esscodim", pp, qq, "--json"])
        _, out2, _ = run(["esscodim", pp, qq, "--json"])
        assert out1 == out2

    def test_load_operator(self, tmp_path):
        q = TailedProjection.diagonal(TailPattern.periodic([1, 0], 0, {2: 0}))
        path = write(tmp_path, "q.json", operator_to_json(q))
        op = load_operator(path)
        assert isinstance(op, TailedOperator)
        assert op.tail.eventually_equal(q.tail)
