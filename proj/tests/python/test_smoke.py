import math

import pytest

flexopt = pytest.importorskip("flexopt")


def test_names():
    assert flexopt.scenario_names()[0] == "REF"
    assert len(flexopt.scenario_names()) == 7
    assert flexopt.context_names() == ["c_base", "c_strict", "c_scaled"]


def test_annuity():
    assert abs(flexopt.annuity_factor(0.10, 25) - 0.110168) <= 1e-6


def test_flat_purchase_metrics():
    prices = [20.0 + (t % 5) for t in range(24)]
    cefs = [0.3 + 0.01 * (t % 3) for t in range(24)]
    m = flexopt.metrics(prices, cefs, [10.0] * 24)
    assert abs(m["pi_rate"] - 1.0) <= 1e-12
    assert abs(m["omega"] * m["tcer"] - m["ecer"]) <= 1e-9 * m["ecer"]


def test_small_study():
    s = flexopt.run_study(synth_seed=3, horizon=24, contexts=["c_base"], scenarios=["REF", "noFlex", "someFlex"])
    tac = {c["scenario"]: c["annual"]["tac"] for c in s["cells"]}
    assert all(c["ok"] for c in s["cells"])
    assert tac["REF"] >= tac["noFlex"] * (1 - 1e-6)
    assert tac["noFlex"] >= tac["someFlex"] * (1 - 1e-6)
    assert all(math.isfinite(v) for v in tac.values())


def test_export_mps(tmp_path):
    info = flexopt.export_mps(synth_seed=1, horizon=24, scenario="fullFlex", out=str(tmp_path / "m.mps"))
    assert info["num_variables"] == info["reference_num_variables"]
    assert info["num_nonzeros"] == info["reference_num_nonzeros"]
    assert info["num_binaries"] > 0


def test_errors_carry_kind(tmp_path):
    with pytest.raises(flexopt.FlexoptError, match="invalid-parameter"):
        flexopt.run_study(synth_seed=1, horizon=24, scenarios=["nope"])
    with pytest.raises(flexopt.FlexoptError, match="io"):
        flexopt.run_study(dataset=tmp_path / "missing")
    flexopt.synth(2, 24, str(tmp_path / "b"))
    assert (tmp_path / "b" / "dataset.json").exists()
