import math

import numpy as np
import pytest

import slh


def test_structure_function_examples():
    assert slh.structure_function(np.array([2.0, -2.0, 2.0, -2.0]), 2.0) == 4.0
    assert slh.structure_function([1.0, -3.0], 1.0) == 2.0
    assert slh.returns([1.0, 3.0, 6.0, 10.0], 2).tolist() == [5.0, 7.0]


def test_theory():
    assert slh.theoretical_rho(0.5, 2.0, 3.0, 1.0) == pytest.approx(-2.0)
    assert slh.theoretical_xi(0.6, 1.0, 0.0, 2.0) == pytest.approx(0.64)
    assert slh.gamma(0.5, 2.0, 1.0) == pytest.approx(1.5)


def test_errors_carry_codes():
    with pytest.raises(slh.SlhError) as info:
        slh.structure_function([], 1.0)
    assert info.value.code == "EmptySeries"
    assert info.value.category == 2
    with pytest.raises(slh.SlhError):
        slh.generate_cascade(beta=1.5, C=1.0, levels=8, seed=1)


def test_build_table_brownian():
    walk = slh.generate_fbm(0.5, 1 << 14, 3)
    table = slh.build_table(walk, p=[2.0], tau=[1, 2, 4, 8, 16, 32], workers=2)
    m = table["moments"][0]
    slope = np.polyfit(np.log(table["tau_grid"]), np.log(m), 1)[0]
    assert abs(slope - 1.0) < 0.1


def test_analyze_cascade():
    s = slh.generate_cascade(beta=0.6, C=1.0, levels=16, seed=42)
    assert len(s) == 1 << 16
    report = slh.analyze(s, workers=2)
    assert 0.5 < report["beta"]["beta"] < 0.7
    again = slh.analyze(s, workers=1)
    assert again == report


def test_analyze_config_and_monofractal():
    walk = slh.generate_fbm(0.5, 1 << 16, 5)
    with pytest.raises(slh.SlhError) as info:
        slh.analyze(walk)
    assert info.value.code == "MonofractalDegenerate"
    with pytest.raises(slh.SlhError) as info:
        slh.analyze(walk, {"tau0": 3})
    assert info.value.code == "ConfigInvalid"


def test_cli_entry(tmp_path):
    out = tmp_path / "c.csv"
    rc = slh.run_cli(["synth", "cascade", "--beta", "0.6", "--C", "1", "--levels", "10", "--seed", "1", "--out", str(out)])
    assert rc == 0
    assert len(out.read_text().splitlines()) == 1025
    assert math.isfinite(float(out.read_text().splitlines()[1]))
