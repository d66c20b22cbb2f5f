"""Monte Carlo study drivers: determinism, slopes, audits, probes."""

import numpy as np
import pytest

from monotone_wfi.experiments import (
    AuditConfig,
    StudyConfig,
    expected_rate_slope,
    fit_loglog_slope,
    run_consistency_study,
    run_l1_rate_study,
    run_limit_comparison,
    run_lower_bound_audit,
    run_pointwise_rate_study,
    run_rate_study,
    run_tail_bound_probe,
)
from monotone_wfi.model import FeatureLaw, LinkSpec, Scenario

LOGISTIC = LinkSpec("logistic")
UNIFORM = FeatureLaw("uniform", 1.0)


def _scn(gamma):
    return Scenario(LOGISTIC, UNIFORM, 1.0, gamma)


class TestLoglogSlope:
    def test_exact_power_law(self):
        ns = np.array([100, 200, 400, 800])
        slope, se = fit_loglog_slope(ns, 3.0 * ns ** (-1 / 3))
        assert slope == pytest.approx(-1 / 3, abs=1e-12)
        assert se == pytest.approx(0.0, abs=1e-12)

    def test_constant_errors(self):
        slope, _ = fit_loglog_slope([10, 100, 1000], [0.2, 0.2, 0.2])
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_noisy_half_rate(self):
        rng = np.random.default_rng(7)
        ns = np.logspace(2, 5, 30)
        errs = ns ** (-0.5) * (1.0 + 0.01 * rng.standard_normal(30))
        slope, se = fit_loglog_slope(ns, errs)
        assert slope == pytest.approx(-0.5, abs=0.02)
        assert se < 0.01

    def test_validation(self):
        with pytest.raises(ValueError):
            fit_loglog_slope([1, 2], [0.1, 0.2])
        with pytest.raises(ValueError):
            fit_loglog_slope([1, 2, 3], [0.1, 0.0, 0.2])

    def test_expected_slopes(self):
        assert expected_rate_slope(0.0) == pytest.approx(-1 / 3)
        assert expected_rate_slope(0.25) == pytest.approx(-0.41666666666)
        assert expected_rate_slope(0.8) == -0.5
        assert expected_rate_slope(0.5, beta=2) == pytest.approx(-0.5)


class TestStudyConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            StudyConfig(_scn(0.25), (100, 50), 60)
        with pytest.raises(ValueError):
            StudyConfig(_scn(0.25), (50, 100), 10)
        with pytest.raises(ValueError):
            StudyConfig(_scn(0.25), (50, 100), 60, regime="weird")


class TestRateStudy:
    def test_serial_equals_parallel_bitwise(self):
        kw = dict(x0=0.1, seed_base=17, centering_draws=0)
        serial = run_rate_study(StudyConfig(_scn(0.25), (64, 128, 256), 50, threads=1, **kw))
        parallel = run_rate_study(StudyConfig(_scn(0.25), (64, 128, 256), 50, threads=4, **kw))
        assert serial.to_csv_text() == parallel.to_csv_text()
        assert serial.summary["slope_l1"] == parallel.summary["slope_l1"]

    def test_records_shape_and_columns(self):
        res = run_rate_study(
            StudyConfig(_scn(0.25), (64, 128, 256), 50, seed_base=3, centering_draws=0)
        )
        assert len(res.records) == 3 * 50
        assert res.columns == ("gamma", "n", "replicate", "err_pointwise", "err_l1")
        assert all(r[0] == 0.25 for r in res.records)

    def test_split_half_slopes_agree(self):
        cfg = StudyConfig(
            _scn(0.25), (256, 512, 1024, 2048), 120, seed_base=5, threads=2,
            centering_draws=0,
        )
        res = run_rate_study(cfg)
        ns = np.array(cfg.n_list, dtype=float)
        halves = []
        for parity in (0, 1):
            meds = [
                np.median([r[4] for r in res.records if r[1] == n and r[2] % 2 == parity])
                for n in cfg.n_list
            ]
            halves.append(fit_loglog_slope(ns, meds))
        gap = abs(halves[0][0] - halves[1][0])
        assert gap <= 2 * np.hypot(halves[0][1], halves[1][1]) + 0.05

    def test_wrapper_flag_selection(self):
        cfg = StudyConfig(_scn(0.8), (64, 128, 256), 50, seed_base=9, centering_draws=0)
        pw = run_pointwise_rate_study(cfg)
        assert all("pointwise" in k for k in pw.manifest["flags"])
        l1 = run_l1_rate_study(cfg)
        assert all("pointwise" not in k for k in l1.manifest["flags"])


class TestLimitComparison:
    def test_regime_consistency_enforced(self):
        with pytest.raises(ValueError, match="regime"):
            run_limit_comparison(
                StudyConfig(_scn(0.8), (500,), 50, regime="slow_pointwise")
            )
        with pytest.raises(ValueError, match="regime"):
            run_limit_comparison(
                StudyConfig(_scn(0.25), (500,), 50, regime="fast_l1")
            )
        with pytest.raises(ValueError, match="regime"):
            run_limit_comparison(StudyConfig(_scn(0.25), (500,), 50))

    def test_smoke_run_records(self):
        cfg = StudyConfig(
            _scn(0.25), (2000,), 50, seed_base=13, threads=2,
            regime="slow_pointwise", limit_draws=2000,
        )
        res = run_limit_comparison(cfg)
        assert res.columns == ("kind", "n", "gamma", "ks", "draws_finite", "draws_limit")
        (rec,) = res.records
        assert rec[0] == "slow_pointwise" and rec[1] == 2000
        assert rec[4] == 50 and rec[5] == 2000
        assert 0.0 <= rec[3] <= 1.0
        assert res.extras["finite"][2000].size == 50

    def test_boundary_regime_records_standardization(self):
        scn = Scenario(LOGISTIC, UNIFORM, 1.0, 0.5)
        cfg = StudyConfig(
            scn, (500,), 50, seed_base=19, regime="boundary_pointwise", limit_draws=500
        )
        res = run_limit_comparison(cfg)
        c = res.manifest["standardization_c"]["500"]
        assert c == pytest.approx(500 * scn.delta(500) ** 2)


class TestLowerBoundAudit:
    def test_default_audit_passes(self):
        res = run_lower_bound_audit(AuditConfig(UNIFORM))
        assert res.passed
        alpha = res.manifest["alpha"]
        assert alpha["fast"] == pytest.approx(0.64)
        assert alpha["slow"] == pytest.approx(64 * (0.1984251315 / 2) ** 3 * 0.5, rel=1e-6)
        assert alpha["cube"] == pytest.approx(0.25, rel=1e-9)
        assert all(v < 2 for v in alpha.values())
        assert any("n_d2" in line for line in res.manifest["inequalities"])

    def test_audit_on_tilted_law(self):
        res = run_lower_bound_audit(AuditConfig(FeatureLaw("polynomial", 1.0, (0.4,))))
        assert res.passed

    def test_custom_constant_violation_detected(self):
        with pytest.raises(ValueError, match="constant"):
            run_lower_bound_audit(AuditConfig(UNIFORM, c_fast=0.9))


class TestTailProbe:
    def test_requires_slow_regime(self):
        with pytest.raises(ValueError, match="slow-regime"):
            run_tail_bound_probe(StudyConfig(_scn(0.8), (256, 512, 1024), 50))

    def test_smoke_run(self):
        cfg = StudyConfig(
            _scn(0.25), (256, 1024, 4096), 80, seed_base=23, threads=2,
            probe_xs=(0.02, 0.1, 0.5),
        )
        res = run_tail_bound_probe(cfg)
        assert len(res.records) == 3 * 80
        assert res.manifest["target_slope"] == pytest.approx(-1 / 6)
        freqs = res.manifest["exceedance_frequencies"]["1024"]
        vals = [freqs[k] for k in freqs]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert vals == sorted(vals, reverse=True)  # monotone in the threshold
        # larger thresholds below the resolution scale are flagged vacuous
        assert "0.02" in res.manifest["vacuous_thresholds"]["256"]

    def test_frequency_drops_with_sample_size(self):
        cfg = StudyConfig(
            _scn(0.25), (256, 4096), 150, seed_base=29, threads=2, probe_xs=(0.15,)
        )
        res = run_tail_bound_probe(cfg)
        f = res.manifest["exceedance_frequencies"]
        assert f["4096"]["0.15"] <= f["256"]["0.15"]


class TestConsistencyStudy:
    def test_flags_and_medians(self):
        cfg = StudyConfig(_scn(0.25), (512, 2048, 8192), 60, seed_base=31, threads=2)
        res = run_consistency_study(cfg, hellinger_ns=(400, 6400), sup_gammas=(0.25,))
        assert res.summary["hellinger_ratio"] <= 0.55
        meds = res.summary["sup_medians"]["0.25"]
        assert len(meds) == 3
        assert res.manifest["flags"]["supnorm_decreasing_gamma0.25"] == (
            meds[2] < meds[1] < meds[0]
        )
