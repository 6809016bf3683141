import json
import math
import pathlib

import pytest

import plugrisk

ROOT = pathlib.Path(__file__).resolve().parents[2]


def two(a, b):
    return plugrisk.Distribution(["x0", "x1"], [a, b])


def test_distances():
    assert plugrisk.l1_distance(two(0.6, 0.4), two(0.49, 0.51)) == pytest.approx(0.22, abs=1e-12)
    kl = 0.6 * math.log2(0.6 / 0.49) + 0.4 * math.log2(0.4 / 0.51)
    assert plugrisk.kl_divergence(two(0.6, 0.4), two(0.49, 0.51)) == pytest.approx(kl, abs=1e-12)
    assert math.isinf(plugrisk.kl_divergence(two(1, 0), two(0, 1)))
    mixed = plugrisk.mixture([(0.25, two(1, 0)), (0.75, two(0, 1))])
    assert mixed.mass == [0.25, 0.75]


def test_errors_map_to_value_error():
    with pytest.raises(ValueError, match="degenerate"):
        plugrisk.Distribution(["x0"], [0.0])
    with pytest.raises(ValueError, match="invalid mass"):
        two(-1, 2)


def test_example_one():
    inst = plugrisk.example1_construction(0.1, 0.01)
    report = plugrisk.check_theorem1(inst.source, inst.estimates, inst.cost)
    assert report.risk_opt == pytest.approx(0.4, abs=1e-12)
    assert report.risk_plugin == pytest.approx(0.6, abs=1e-12)
    assert report.bound == pytest.approx(0.22, abs=1e-12)
    assert report.satisfied
    assert plugrisk.bayes_classifier(inst.source, inst.cost) == [0, 1]


def test_example_two_identity():
    inst = plugrisk.example2_construction(0.1, 0.01)
    report = plugrisk.check_theorem2(inst.source, inst.estimates)
    lhs, rhs = plugrisk.excess_logloss_identity(inst.source, inst.estimates)
    assert report.excess == pytest.approx(0.035109552062332905, abs=1e-9)
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_user_built_source():
    source = plugrisk.LabeledSource([0.5, 0.5], [two(0.6, 0.4), two(0.4, 0.6)])
    cost = plugrisk.CostMatrix([[0, 1], [1, 0]])
    labels = plugrisk.bayes_classifier(source, cost)
    assert plugrisk.risk(labels, source, cost) == pytest.approx(0.4)
    assert plugrisk.posterior(source, 0) == pytest.approx([0.6, 0.4])
    rule = plugrisk.posterior_rule(source)
    assert plugrisk.logloss_risk(rule, source) == pytest.approx(0.9709505944546686, abs=1e-12)


def test_tightness_and_smoothing():
    result = plugrisk.tightness_search(2, 2, plugrisk.CostMatrix.zero_one(2), "l1", 0.1, 4)
    assert 0.9 <= result["ratio"] <= 1 + 1e-9
    assert plugrisk.smoothing_xi(0.5, 8) == pytest.approx(0.5**2 / 96)
    truth = plugrisk.Distribution([f"x{i}" for i in range(4)], [0.25] * 4)
    report = plugrisk.verify_smoothing(truth, truth, 0.5, 8)
    assert report["within"]
    assert report["kl_actual"] <= report["certificate"]


def test_pdfa():
    machine = plugrisk.Pdfa.from_json((ROOT / "configs" / "machines" / "geometric.json").read_text())
    assert plugrisk.string_probability(machine, "aa") == 0.125
    assert plugrisk.truncate(machine, 2).mass == [0.5, 0.25, 0.125, 0.125]
    bits = plugrisk.encode(machine)
    assert len(bits) == plugrisk.encoding_length(machine) == 36
    assert plugrisk.decode(bits) == machine


def test_pipeline_and_cli(tmp_path):
    config = json.loads((ROOT / "configs" / "consistency_m16_k3.json").read_text())
    config["trials"] = 20
    config["sample_grid"] = [100, 10000]
    grid = plugrisk.run_pipeline(config)
    assert len(grid) == 2
    assert grid[1]["excess"]["median"] < grid[0]["excess"]["median"]
    assert all(g["conditional_validity_failures"] == 0 for g in grid)

    code, out, _ = plugrisk.run_cli(["verify-theorem1", "--trials", "50", "--out-dir", str(tmp_path)])
    assert code == 0
    assert "0 violations" in out
    assert len((tmp_path / "report.csv").read_text().splitlines()) == 51
    assert plugrisk.run_cli(["verify-theorem1", "--trials", "0"])[0] == 2
