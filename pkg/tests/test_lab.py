import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lempert_lab import lab
from lempert_lab.errors import ArgumentError


class TestFit:
    def test_exact_power(self):
        eps = lab.eps_grid()
        f = lab.fit_exponent([(e, 3 * e**0.5) for e in eps])
        assert f.slope == pytest.approx(0.5, abs=1e-12)
        assert f.r2 == pytest.approx(1.0, abs=1e-12)
        assert sum(f.contributions) == pytest.approx(0.5, abs=1e-12)

    def test_constant(self):
        f = lab.fit_exponent([(e, 2.0) for e in lab.eps_grid()])
        assert f.slope == 0 and f.r2 == 1.0

    def test_too_few(self):
        with pytest.raises(ArgumentError):
            lab.fit_exponent([(1e-2, 1.0), (1e-3, 2.0)])

    def test_nonpositive(self):
        with pytest.raises(ArgumentError):
            lab.fit_exponent([(1e-2, 1.0), (1e-3, 0.0), (1e-4, 1.0)])

    @settings(max_examples=50)
    @given(st.floats(-2, 2), st.floats(0.01, 100))
    def test_recovers_slope(self, s, c):
        eps = lab.eps_grid(1e-6, 1e-2, 9)
        assert lab.fit_exponent([(e, c * e**s) for e in eps]).slope == pytest.approx(s, abs=1e-9)

    def test_expected_slopes(self):
        assert lab.expected_ell_slope(2) == pytest.approx(0.25)
        assert lab.expected_ell_slope(0.4) == 1.0
        assert lab.expected_chain_slope(2) == pytest.approx(0.5)
        assert lab.expected_chain_slope(0.75) == 1.0


class TestConfig:
    def test_grid(self):
        g = lab.eps_grid(1e-6, 1e-2, 9)
        assert g[0] == pytest.approx(1e-2) and g[-1] == pytest.approx(1e-6)
        assert np.all(np.diff(g) < 0)

    @pytest.mark.parametrize("rule, frac", [("eps/2", 0.5), ("0.25*eps", 0.25), ("0.1", 0.1),
                                            (" eps / 4 ", 0.25)])
    def test_delta_rules(self, rule, frac):
        assert lab.delta_for(1e-3, rule) == pytest.approx(frac * 1e-3)

    @pytest.mark.parametrize("rule", ["eps", "2*eps", "eps/0", "half", "1.5", "eps/1"])
    def test_bad_rules(self, rule):
        with pytest.raises(ArgumentError):
            lab.delta_for(1e-3, rule)

    def test_bad_config(self):
        with pytest.raises(ArgumentError):
            lab.ExperimentConfig("exponents", eps_min=1e-2, eps_max=1e-3)
        with pytest.raises(ArgumentError):
            lab.ExperimentConfig("nope")
        with pytest.raises(ArgumentError):
            lab.ExperimentConfig("qti", eps_count=1)

    def test_default_mus(self):
        assert lab.ExperimentConfig("qti").mus == (2.0,)


class TestExperiments:
    def test_qti_report(self, tmp_path):
        cfg = lab.ExperimentConfig("qti", out=str(tmp_path / "q"), fmt="both")
        summ = lab.run_experiment(cfg)
        assert summ["pass"]
        data = json.loads((tmp_path / "q.json").read_text())
        jsonschema.validate(data, lab.report_schema())
        header = (tmp_path / "q.csv").read_text().splitlines()[0]
        assert header.split(",") == list(lab.CSV_COLUMNS)

    def test_deterministic(self, tmp_path):
        texts = []
        for k in range(2):
            cfg = lab.ExperimentConfig("kr-gap", out=str(tmp_path / f"r{k}"), seed=3)
            lab.run_experiment(cfg)
            texts.append((tmp_path / f"r{k}.csv").read_bytes())
        assert texts[0] == texts[1]

    def test_certified_only(self):
        res = lab.compute(lab.ExperimentConfig("exponents", mus=(2.0,), certified_only=True))
        assert res.rows and all(r.grade == "certified" for r in res.rows)

    def test_qti_ratio_growth(self):
        scan = lab.qti_ratio_scan(2.0)
        assert scan[-1]["ratio"] / scan[0]["ratio"] >= 3

    def test_exponents_fits(self):
        res = lab.compute(lab.ExperimentConfig("exponents", mus=(1.5, 2.0)))
        summ = lab.summary(res)
        assert summ["pass"], [f for f in summ["fits"] if f["pass"] is False]
        # slope contributions are filled for fitted series
        assert any(r.slope_contrib is not None for r in res.rows)

    def test_csv_blank_for_none(self):
        row = lab.Row("x", None, 0.1, None, "ell", "upper", "certified", 0.5, "F1")
        assert row.csv_fields()[1] == "" and row.csv_fields()[3] == ""
