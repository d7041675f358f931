import csv
import io
import json
from fractions import Fraction

import pytest

from sunflower_lab.cli import derived_seed, dumps, main
from sunflower_lab.core import SetSystem

TRIANGLE = '{"universe": 3, "sets": [[0, 1], [1, 2], [0, 2]]}'
GF5 = '{"p": 5, "n": 4, "generator": [[1, 0, 1, 1], [0, 1, 1, 2]]}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def sweep_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestGenerate:
    def test_block(self, capsys):
        code, fam = run_json(capsys, "generate", '{"kind": "block", "w": 3, "kappa": 2}')
        assert code == 0 and len(fam["sets"]) == 8

    def test_round_trip(self, capsys, tmp_path):
        path = tmp_path / "fam.json"
        assert main(["--out", str(path), "generate", '{"kind": "complete_uniform", "w": 2, "n": 4}']) == 0
        text = path.read_text()
        assert dumps(SetSystem.from_json(text).to_dict()) == text

    def test_invalid(self, capsys):
        code, out, err = run(capsys, "generate", '{"kind": "block", "w": 0, "kappa": 2}')
        assert code == 2 and out == "" and err.startswith("error:")

    def test_missing_seed(self, capsys):
        code, _, _ = run(capsys, "generate", '{"kind": "random", "n": 5, "w": 2, "m": 3}')
        assert code == 2

    def test_bad_json(self, capsys):
        assert run(capsys, "generate", "{not json")[0] == 2


class TestCertify:
    def test_triangle_max(self, capsys):
        code, rep = run_json(capsys, "certify", TRIANGLE, "--max")
        lo, hi = Fraction(rep["interval"]["lo"]), Fraction(rep["interval"]["hi"])
        assert code == 0 and lo <= Fraction(3, 2) <= hi and hi - lo <= Fraction(1, 1000)

    def test_block_regular(self, capsys, tmp_path):
        path = tmp_path / "block.json"
        main(["--out", str(path), "generate", '{"kind": "block", "w": 3, "kappa": 2}'])
        code, rep = run_json(capsys, "certify", str(path), "--kappa", "2")
        assert code == 0 and rep["verdict"] == "regular"

    def test_infeasible_is_a_report(self, capsys):
        code, rep = run_json(capsys, "certify", TRIANGLE, "--kappa", "8/5")
        assert code == 0 and rep["verdict"] == "infeasible"

    def test_trivial(self, capsys):
        assert run(capsys, "certify", '{"universe": 2, "sets": [[]]}', "--kappa", "2")[0] == 2
        assert run(capsys, "certify", '{"universe": 2, "sets": []}', "--max")[0] == 2

    def test_malformed_kappa(self, capsys):
        assert run(capsys, "certify", TRIANGLE, "--kappa", "three")[0] == 2
        assert run(capsys, "certify", TRIANGLE, "--kappa", "3/0")[0] == 2

    def test_budget(self, capsys):
        code, _, err = run(capsys, "--budget-pivots", "2", "certify", TRIANGLE, "--kappa", "3/2")
        assert code == 3 and "budget" in err


class TestSearchCommands:
    def test_satprob(self, capsys):
        code, rep = run_json(capsys, "satprob", TRIANGLE, "--p", "1/2")
        assert code == 0 and rep["probability"] == "1/2"

    def test_satprob_mc(self, capsys):
        code, rep = run_json(capsys, "--seed", "3", "satprob", TRIANGLE, "--p", "1/2", "--mc", "5000")
        mc = rep["monte_carlo"]
        assert code == 0 and abs(mc["estimate"] - 0.5) <= 4 * mc["stderr"]

    def test_sunflower_negative(self, capsys):
        code, rep = run_json(capsys, "sunflower", TRIANGLE, "--r", "3")
        assert code == 1 and rep["outcome"] == "none"

    @pytest.mark.parametrize("method", ["exact", "er"])
    def test_sunflower_found(self, capsys, method):
        fam = '{"universe": 6, "sets": [[0, 1], [2, 3], [4, 5]]}'
        code, rep = run_json(capsys, "sunflower", fam, "--r", "3", "--method", method)
        assert code == 0 and rep["certificate"]["core"] == []

    def test_reg_needs_kappa(self, capsys):
        assert run(capsys, "sunflower", TRIANGLE, "--r", "2", "--method", "reg")[0] == 2

    def test_disjoint(self, capsys):
        assert run(capsys, "disjoint", TRIANGLE, "--r", "2")[0] == 1
        code, rep = run_json(capsys, "disjoint", '{"universe": 4, "sets": [[0, 1], [2, 3]]}', "--r", "2")
        assert code == 0 and rep["indices"] == [0, 1]

    def test_process(self, capsys, tmp_path):
        csv_path = tmp_path / "trace.csv"
        fam = '{"universe": 3, "sets": [[0], [1], [2]]}'
        code, rep = run_json(capsys, "process", fam, "--r", "2", "--beta", "4", "--csv", str(csv_path))
        assert code == 0 and rep["star"] is not None and "analysis" in rep
        assert csv_path.read_text().startswith("iteration,")

    def test_process_empty_trace(self, capsys):
        fam = '{"universe": 2, "sets": [[0], [1]]}'
        dist = '{"universe": 2, "sets": [[0], [1]], "weights": ["1/1", "0/1"]}'
        code, rep = run_json(capsys, "process", fam, dist, "--r", "2")
        assert code == 0 and rep["star"] is None

    def test_subspace(self, capsys):
        code, rep = run_json(capsys, "subspace", GF5, "--alpha", "1/2")
        assert code == 0 and rep["alpha_large"] and rep["regular"]
        assert rep["zero_free_vector"] == [1, 1, 2, 3]
        code, rep = run_json(capsys, "subspace", GF5, "--alpha", "3/4")
        assert not rep["alpha_large"] and not rep["regular"]


class TestSweep:
    def test_beta_bounds(self, capsys):
        code, out, _ = run(capsys, "sweep", "--what", "beta", "--w-range", "2..4", "--seeds", "0..2")
        assert code == 0
        for row in sweep_rows(out):
            w = int(row["w"])
            lo = Fraction(row["best_lower_kappa"])
            assert Fraction(2 * w - 1, w) <= lo <= w == Fraction(row["upper_cap"])
            assert row["seconds"] == ""

    def test_gamma_block_point(self, capsys, tmp_path):
        rec = tmp_path / "rec.json"
        code, out, _ = run(capsys, "sweep", "--what", "gamma", "--w-range", "4..4", "--seeds", "0..1", "--json", str(rec))
        assert code == 0
        (record,) = json.loads(rec.read_text())
        block = [m for m in record["members"] if m["name"] == "block(w=4,kappa=2)"]
        assert block and block[0]["satisfaction_half"] == "81/256"
        assert Fraction(sweep_rows(out)[0]["best_lower_kappa"]) >= 2

    def test_alpha_cap(self, capsys):
        code, out, _ = run(capsys, "sweep", "--what", "alpha", "--w-range", "2..3", "--r", "3", "--seeds", "0..1")
        for row in sweep_rows(out):
            assert Fraction(row["best_lower_kappa"]) <= Fraction(row["upper_cap"]) == 2 * int(row["w"])

    def test_timing_fills_seconds(self, capsys):
        _, out, _ = run(capsys, "sweep", "--what", "beta", "--w-range", "2..2", "--seeds", "0..0", "--timing")
        assert sweep_rows(out)[0]["seconds"] != ""

    def test_bad_range(self, capsys):
        assert run(capsys, "sweep", "--what", "beta", "--w-range", "4..2")[0] == 2


class TestDeterminism:
    def test_repeated_sweeps(self, capsys):
        argv = ["--seed", "5", "sweep", "--what", "beta", "--w-range", "2..3", "--seeds", "0..3"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]

    def test_threads_do_not_change_output(self, capsys):
        argv = ["sweep", "--what", "alpha", "--w-range", "2..3", "--seeds", "0..2"]
        assert run(capsys, *argv)[1] == run(capsys, "--threads", "2", *argv)[1]

    def test_repeated_random_generate(self, capsys):
        spec = '{"kind": "random", "n": 8, "w": 3, "m": 6, "seed": 4}'
        assert run(capsys, "generate", spec)[1] == run(capsys, "generate", spec)[1]

    def test_derived_seed(self):
        assert derived_seed(1, 2) == derived_seed(1, 2) != derived_seed(2, 1)
