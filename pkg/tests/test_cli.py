import json
import os

import numpy as np
import pytest

from cfreach.christoffel import fit
from cfreach.cli import grid_records, main
from cfreach.errors import DimensionMismatch
from cfreach.persist import load_estimator

SMALL = """
[problem]
system = "duffing"
t1 = {t1}
x0_lower = [0.95, -0.05]
x0_upper = [1.05, 0.05]

[fit]
k = {k}
epsilon = 0.1
delta = 1e-6
n_samples = {n}

[seeds]
train = 5
validate = 6

[validate]
margin = 0.05
confidence = 0.99

[output]
estimator = "est.json"
report = "report"
{extra}
"""

TRAFFIC = """
[problem]
system = "traffic"
t0 = {t0}
t1 = {t1}
x0_lower = [100.0, 100.0, 100.0, 100.0, 100.0, 100.0]
x0_upper = [200.0, 200.0, 200.0, 200.0, 200.0, 200.0]
d_lower = [1.3333333333333333]
d_upper = [2.0]
projection = [5, 6]

[fit]
k = 4
epsilon = 0.05
delta = 1e-9
"""

BLOW_UP = """
[problem]
system = "custom-test"
t1 = 300.0
step = 1.0
x0_lower = [1.0]
x0_upper = [2.0]

[problem.params]
rate = 1e4

[fit]
k = 2
epsilon = 0.1
delta = 0.1
n_samples = 50

[output]
estimator = "est.json"
"""


def write_config(tmp_path, text=None, name="run.toml", **kw):
    fields = {"t1": 5.0, "k": 3, "n": 3000, "extra": ""}
    fields.update(kw)
    path = tmp_path / name
    path.write_text((text or SMALL).format(**fields))
    return str(path)


class TestSampleSize:
    def test_pac(self, capsys):
        assert main(["sample-size", "--epsilon", "0.05", "--delta", "1e-9", "--n", "2", "--k", "10"]) == 0
        assert capsys.readouterr().out.strip() == "156626"

    def test_chernoff(self, capsys):
        assert main(["sample-size", "--chernoff", "0.01", "0.9999"]) == 0
        assert capsys.readouterr().out.strip() == "46052"

    @pytest.mark.parametrize(
        "argv",
        [
            ["sample-size", "--epsilon", "0", "--delta", "0.1", "--n", "2", "--k", "1"],
            ["sample-size", "--epsilon", "0.1"],
            ["sample-size", "--chernoff", "0.1", "1.0"],
            ["no-such-command"],
        ],
    )
    def test_bad_arguments(self, argv):
        assert main(argv) == 1


class TestEstimateValidate:
    def test_pipeline(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["estimate", "--config", cfg]) == 0
        est = load_estimator(tmp_path / "est.json")
        assert est.k == 3 and est.meta["n_points"] == 3000 and est.meta["seed"] == 5
        capsys.readouterr()
        assert main(["validate", "--config", cfg, "--estimator", str(tmp_path / "est.json")]) == 0
        out = capsys.readouterr().out
        assert "n_ap = 922" in out
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["witnessed"] is True and doc["n_ap"] == 922

    def test_not_witnessed(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["estimate", "--config", cfg]) == 0
        # margin alone pushes the certified bound below 1 - epsilon
        rc = main(["validate", "--config", cfg, "--estimator", str(tmp_path / "est.json"),
                   "--margin", "0.2", "--confidence", "0.9"])
        assert rc == 2

    def test_too_few_samples(self, tmp_path):
        cfg = write_config(tmp_path, k=3, n=3000)
        assert main(["estimate", "--config", cfg, "--n-samples", "5"]) == 4
        assert not (tmp_path / "est.json").exists()

    def test_missing_config_writes_nothing(self, tmp_path):
        out = tmp_path / "never.json"
        assert main(["estimate", "--config", str(tmp_path / "absent.toml"), "--out", str(out)]) == 1
        assert os.listdir(tmp_path) == []

    def test_unknown_key_rejected(self, tmp_path):
        cfg = write_config(tmp_path, extra="colour = 'red'")
        assert main(["estimate", "--config", cfg]) == 1
        assert not (tmp_path / "est.json").exists()

    def test_dimension_mismatch(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["estimate", "--config", cfg]) == 0
        full_state = TRAFFIC.replace("projection = [5, 6]\n", "")
        other = write_config(tmp_path, text=full_state, name="traffic.toml", t0=0.0, t1=1.0)
        rc = main(["validate", "--config", other, "--estimator", str(tmp_path / "est.json"),
                   "--margin", "0.05", "--confidence", "0.99"])
        assert rc == 1

    def test_validate_on_cloud_file(self, tmp_path, capsys):
        cfg = write_config(tmp_path, extra='cloud = "cloud.csv"')
        assert main(["estimate", "--config", cfg]) == 0
        capsys.readouterr()
        rc = main(["validate", "--config", cfg, "--estimator", str(tmp_path / "est.json"),
                   "--cloud", str(tmp_path / "cloud.csv")])
        assert rc == 0
        assert "n_out = 0" in capsys.readouterr().out

    def test_blow_up_exits_numerical(self, tmp_path):
        cfg = write_config(tmp_path, text=BLOW_UP)
        assert main(["estimate", "--config", cfg]) == 3
        assert not (tmp_path / "est.json").exists()

    def test_bitwise_identical_documents(self, tmp_path):
        cfg = write_config(tmp_path, n=9000)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["estimate", "--config", cfg, "--threads", "1", "--out", str(a)]) == 0
        assert main(["estimate", "--config", cfg, "--threads", "4", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestRoundTrip:
    def test_probe_decisions_survive_reload(self, tmp_path, rng):
        cfg = write_config(tmp_path, k=6)
        assert main(["estimate", "--config", cfg]) == 0
        est = load_estimator(tmp_path / "est.json")
        doc = (tmp_path / "est.json").read_text()
        again = tmp_path / "again.json"
        from cfreach.persist import save_estimator

        save_estimator(again, est)
        assert again.read_text() == doc
        probes = rng.uniform(-3, 3, (1000, 2))
        fresh = load_estimator(again)
        np.testing.assert_array_equal(est.contains(probes), fresh.contains(probes))
        np.testing.assert_array_equal(est.evaluate(probes), fresh.evaluate(probes))


class TestGrid:
    def test_export(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["estimate", "--config", cfg]) == 0
        out = tmp_path / "grid.csv"
        rc = main(["grid", "--estimator", str(tmp_path / "est.json"),
                   "--bounds", "-3", "3", "-2", "2", "--resolution", "4", "5", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x1,x2,C,inside" and len(lines) == 21
        first = lines[1].split(",")
        assert float(first[0]) == -3.0 and float(first[1]) == -2.0
        est = load_estimator(tmp_path / "est.json")
        rec = grid_records(est, (-3, 3, -2, 2), 4, 5)
        np.testing.assert_array_equal(rec[:, 3], est.contains(rec[:, :2]))

    def test_constant_estimator_is_all_inside(self, tmp_path, rng):
        est = fit(rng.normal(size=(20, 2)), 0)
        rec = grid_records(est, (-50, 50, -50, 50), 7, 9)
        assert rec.shape == (63, 4) and np.all(rec[:, 3] == 1)

    def test_rejects_one_dimensional(self):
        with pytest.raises(DimensionMismatch):
            grid_records(fit(np.array([[-1.0], [1.0]]), 1), (0, 1, 0, 1), 3, 3)

    def test_needs_out(self, tmp_path):
        assert main(["grid", "--estimator", "x.json", "--bounds", "0", "1", "0", "1"]) == 1


class TestInterval:
    def test_traffic(self, tmp_path, capsys):
        cfg = write_config(tmp_path, text=TRAFFIC, t0=0.0, t1=120.0)
        assert main(["interval", "--config", cfg]) == 0
        rows = [line.split() for line in capsys.readouterr().out.splitlines()]
        assert [r[0] for r in rows] == ["x5", "x6"]
        for _, lo, hi in rows:
            assert float(lo) <= float(hi)

    def test_zero_horizon(self, tmp_path, capsys):
        cfg = write_config(tmp_path, text=TRAFFIC, t0=7.0, t1=7.0)
        assert main(["interval", "--config", cfg]) == 0
        assert capsys.readouterr().out == "x5 100.0 200.0\nx6 100.0 200.0\n"

    def test_refuses_duffing(self, tmp_path):
        assert main(["interval", "--config", write_config(tmp_path)]) == 1
