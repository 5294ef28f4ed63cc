import json

import pytest

from qukit.cli import run


def call(capsys, *argv):
    rc = run(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


class TestEval:
    def test_add(self, capsys):
        assert call(capsys, "eval", "--op", "add", "10:23+", "10:19+") == (0, "10:42+\n", "")

    def test_div(self, capsys):
        rc, out, _ = call(capsys, "eval", "--op", "div", "--accuracy", "3", "10:1+", "10:3+")
        assert (rc, out) == (0, "10:0+333\n")

    def test_div_without_accuracy(self, capsys):
        rc, _, err = call(capsys, "eval", "--op", "div", "10:1+", "10:3+")
        assert rc == 2 and "E_USAGE" in err

    def test_div_by_zero(self, capsys):
        rc, _, err = call(capsys, "eval", "--op", "div", "--accuracy", "1", "10:1+", "10:0+")
        assert rc == 1 and "E_DIV_ZERO" in err

    def test_relation(self, capsys):
        assert call(capsys, "eval", "--op", "lt", "10:12-", "10:3-")[1] == "true\n"
        assert call(capsys, "eval", "--op", "rel", "10:5+", "10:05+0")[1] == "EQ_A\n"

    def test_succ(self, capsys):
        assert call(capsys, "eval", "--op", "succ", "--site", "-1", "10:1+5")[1] == "10:1+6\n"

    def test_bad_numeral(self, capsys):
        rc, out, err = call(capsys, "eval", "--op", "add", "10:2x", "10:1+")
        assert rc == 2 and out == "" and "E_PARSE" in err

    def test_unknown_subcommand(self, capsys):
        assert call(capsys, "frobnicate")[0] == 2

    def test_state_operand(self, capsys, tmp_path):
        f = tmp_path / "psi.json"
        f.write_text(json.dumps({"terms": [{"tuple": ["10:0+"], "re": 1}, {"tuple": ["10:1+"], "re": 1}]}))
        rc, out, _ = call(capsys, "eval", "--op", "add", f"@{f}", "10:1+")
        data = json.loads(out)
        assert rc == 0 and [o["numeral"] for o in data["outcomes"]] == ["10:1+", "10:2+"]
        assert [o["p"] for o in data["outcomes"]] == [0.5, 0.5]


class TestConvert:
    def test_exact(self, capsys):
        assert call(capsys, "convert", "--from", "10", "--to", "2", "--exact", "10:0+5")[:2] == (0, "2:0+1\n")

    def test_out_of_domain(self, capsys):
        rc, out, err = call(capsys, "convert", "--to", "10", "--exact", "3:0+1")
        assert rc == 1 and out == "" and "E_OUT_OF_DOMAIN" in err

    def test_approx(self, capsys):
        assert call(capsys, "convert", "--to", "10", "--approx", "3", "3:0+1")[1] == "10:0+333\n"

    def test_wrong_from(self, capsys):
        assert call(capsys, "convert", "--from", "10", "--to", "2", "3:0+1")[0] == 2

    def test_classify(self, capsys):
        data = json.loads(call(capsys, "convert", "--classify", "--to", "10", "6")[1])
        assert data["class"] == "OVERLAP"


class TestGauge:
    def test_signature(self, capsys):
        data = json.loads(call(capsys, "gauge", "--signature", "30")[1])
        assert data["group"] == "U(1)×SU(2)×SU(3)×SU(5)"

    def test_field_file(self, capsys, tmp_path):
        r = 2**-0.5
        (tmp_path / "psi.json").write_text(json.dumps({"terms": [{"tuple": ["2:0+"], "re": 1}]}))
        (tmp_path / "u.json").write_text(json.dumps({
            "base": 2, "name": "H",
            "sites": [{"j": 0, "h": None, "matrix": [[{"re": r}, {"re": r}], [{"re": r}, {"re": -r}]]}],
        }))
        rc, out, _ = call(capsys, "gauge", "--state", str(tmp_path / "psi.json"), "--field", str(tmp_path / "u.json"))
        terms = json.loads(out)["state"]["terms"]
        assert rc == 0 and [t["tuple"] for t in terms] == [["2:0+"], ["2:1+"]]

    def test_seeded_random(self, capsys, tmp_path):
        (tmp_path / "psi.json").write_text(json.dumps({"terms": [{"tuple": ["3:12+"], "re": 1}]}))
        args = ("gauge", "--state", str(tmp_path / "psi.json"), "--random-sites", "0,1", "--seed", "4")
        assert call(capsys, *args)[1] == call(capsys, *args)[1]

    def test_missing_file(self, capsys):
        assert call(capsys, "gauge", "--state", "/nonexistent.json", "--random-sites", "0")[0] == 2


class TestReports:
    def test_cauchy_psiex1(self, capsys):
        rc, out, _ = call(capsys, "cauchy", "--spec", "psiex1:s=3,k=10", "-N", "16", "-L", "8")
        data = json.loads(out)
        assert rc == 0 and data["classification"] == "CAUCHY_AT_HORIZON"
        assert data["witness_p"] == list(range(9))

    def test_cauchy_csv(self, capsys):
        out = call(capsys, "cauchy", "--spec", "alt:10:0+|10:1+", "-N", "3", "-L", "1", "--format", "csv")[1]
        assert out.splitlines()[0] == "n,m,l,P" and len(out.splitlines()) == 1 + 9 * 2

    def test_cauchy_config(self, capsys, tmp_path):
        f = tmp_path / "seq.json"
        f.write_text(json.dumps({"kind": "trunc", "value": "1/3", "k": 10}))
        data = json.loads(call(capsys, "cauchy", "--config", str(f), "-N", "8", "-L", "4")[1])
        assert data["classification"] == "CAUCHY_AT_HORIZON"

    def test_bad_spec(self, capsys):
        rc, _, err = call(capsys, "cauchy", "--spec", "nope:1")
        assert rc == 2 and "E_SEQ_SPEC" in err

    def test_compare(self, capsys):
        out = call(capsys, "compare", "--spec", "trunc:value=1/3,k=10", "--spec2", "const:10:0+4", "-N", "10", "-L", "4")[1]
        data = json.loads(out)
        assert data["verdict"] == "LT" and data["LT"] == 1.0


class TestComplexAndFrames:
    def test_complex_mul(self, capsys):
        assert call(capsys, "complex", "--op", "mul", "10:0+;10:1+i", "10:0+;10:1+i")[1] == "10:1-;10:0+i\n"

    def test_complex_report(self, capsys):
        out = call(capsys, "complex", "--re-spec", "psiex1:s=3,k=10", "--im-spec", "alt:10:0+|10:1+", "-N", "8", "-L", "3")[1]
        assert json.loads(out)["classification"] == "REFUTED_AT_HORIZON"

    def test_winding(self, capsys, tmp_path):
        f = tmp_path / "field.json"
        f.write_text(json.dumps({"scheme": "cyclic", "n": 8, "bases": [2, 10], "gauges": ["g0", "g1"]}))
        out = call(capsys, "frames", "--config", str(f), "--winding", "0/2/g0", "--steps", "16")[1]
        assert json.loads(out)["winding_number"] == 2

    def test_see(self, capsys):
        out = call(capsys, "frames", "--scheme", "finite", "--n", "2", "--bases", "2,3", "--see", "1/2/g", "0/R/C")[1]
        assert json.loads(out)["visible"] is False

    def test_frame_outside(self, capsys):
        rc, _, err = call(capsys, "frames", "--scheme", "finite", "--n", "2", "--parents", "5/2/g")
        assert rc == 1 and "E_FRAME" in err


class TestSelftest:
    def test_passes_and_is_deterministic(self, capsys):
        rc, first, _ = call(capsys, "selftest", "--seed", "0")
        _, second, _ = call(capsys, "selftest", "--seed", "0")
        assert rc == 0 and first == second
        assert first.splitlines()[-1] == "selftest seed=0: PASS"

    def test_other_seed(self, capsys):
        rc, out, _ = call(capsys, "selftest", "--seed", "7")
        assert rc == 0 and len(out.splitlines()) == 10
