import math

import numpy as np
import pytest
from scipy import stats as sp_stats

from dlamf import detectors, estimators, optimizer, rmt
from dlamf.detectors import DetectorSpec
from dlamf.errors import ConfigError, NumericalError
from dlamf.scenario import (HermitianSpectrum, Swerling0, sample_dataset,
                            scm, trial_rng)


def _draw(scen, seed, hypothesis="h0"):
    rng = trial_rng(seed, 0, 0)
    ds = sample_dataset(scen, Swerling0(), hypothesis, rng)
    return ds.y0, scm(ds)


class TestSpec:
    def test_fixed_lambda_required(self):
        for kind in detectors.FIXED_LAMBDA_TAGS:
            with pytest.raises(ConfigError):
                DetectorSpec(kind)
            DetectorSpec(kind, lam=1.5)

    def test_lambda_rejected_elsewhere(self):
        for kind in ("np", "scm-amf", "el-amf", "cfar-el-amf", "persym-amf",
                     "opt-cfar-dl-scmf", "opt-cfar-dl-amf"):
            DetectorSpec(kind)
            with pytest.raises(ConfigError):
                DetectorSpec(kind, lam=1.0)

    def test_negative_lambda(self):
        with pytest.raises(ConfigError):
            DetectorSpec("dl-amf", lam=-0.5)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            DetectorSpec("mystery")

    def test_label(self):
        assert DetectorSpec("np").label == "np"
        assert DetectorSpec("dl-amf", lam=1.5).label == "dl-amf(lam=1.5)"

    def test_flags(self):
        assert not DetectorSpec("np").is_adaptive
        assert DetectorSpec("scm-amf").is_adaptive
        assert DetectorSpec("np").is_cfar
        assert DetectorSpec("cfar-dl-amf", lam=2.0).is_cfar
        assert not DetectorSpec("dl-amf", lam=2.0).is_cfar

    def test_make_opt_detector(self):
        assert detectors.make_opt_detector("oracle").kind == "opt-cfar-dl-scmf"
        assert detectors.make_opt_detector("adaptive").kind == "opt-cfar-dl-amf"
        with pytest.raises(ConfigError):
            detectors.make_opt_detector("both")


class TestLoadedForms:
    def test_against_dense_solve(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=5)
        s = scen_n24_k48.steering.entries
        lam = 2.5
        A = S.matrix + lam * np.eye(scen_n24_k48.N)
        alpha_ref = s.conj() @ np.linalg.solve(A, y0)
        beta_ref = (s.conj() @ np.linalg.solve(A, s)).real
        alpha, beta = detectors.loaded_forms(S, s, y0, lam)
        assert alpha == pytest.approx(alpha_ref, rel=1e-10)
        assert beta == pytest.approx(beta_ref, rel=1e-10)

    def test_zero_loading_singular_guard(self, scen_n24_k48):
        # K < N secondaries make the SCM rank-deficient; unloaded forms
        # must refuse rather than divide by a zero eigenvalue
        rng = trial_rng(9, 0, 0)
        ds = sample_dataset(scen_n24_k48, Swerling0(), "h0", rng)
        with pytest.warns(RuntimeWarning):
            S = scm(ds.Y[:, :10])
        with pytest.raises(NumericalError):
            detectors.loaded_forms(S, scen_n24_k48.steering.entries,
                                   ds.y0, 0.0)
        # loading rescues the same data
        detectors.loaded_forms(S, scen_n24_k48.steering.entries, ds.y0, 1.0)

    def test_negative_lambda(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=5)
        with pytest.raises(ConfigError):
            detectors.loaded_forms(S, scen_n24_k48.steering.entries, y0, -1.0)


class TestStatistics:
    def test_np_unit_exponential(self, scen_n24_k48):
        R = scen_n24_k48.covariance()
        s = scen_n24_k48.steering.entries
        vals = []
        for t in range(4000):
            rng = trial_rng(17, 0, t)
            ds = sample_dataset(scen_n24_k48, Swerling0(), "h0", rng)
            vals.append(detectors.stat_np(R, s, ds.y0))
        d, _ = sp_stats.kstest(vals, "expon")
        assert d < 0.03

    def test_np_h1_mean_shift(self, scen_n24_k48):
        R = scen_n24_k48.covariance()
        s = scen_n24_k48.steering.entries
        q = R.inv_quad(s)
        target = Swerling0(amplitude=2.0)
        vals = []
        for t in range(2000):
            rng = trial_rng(21, 0, t)
            ds = sample_dataset(scen_n24_k48, target, "h1", rng)
            vals.append(detectors.stat_np(R, s, ds.y0))
        # mean of |CN(b sqrt(q), 1)|^2-style stat is 1 + |b|^2 q
        assert np.mean(vals) == pytest.approx(1.0 + 4.0 * q, rel=0.1)

    def test_amf_is_zero_loaded(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=31)
        s = scen_n24_k48.steering.entries
        assert detectors.stat_amf(S, s, y0) == pytest.approx(
            detectors.stat_dl_family(S, s, y0, 0.0, "dl-amf"), rel=1e-12)

    def test_dl_variants(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=37)
        s = scen_n24_k48.steering.entries
        lam = 1.5
        alpha, beta_l = detectors.loaded_forms(S, s, y0, lam)
        _, beta_0 = detectors.loaded_forms(S, s, y0, 0.0)
        a2 = abs(alpha) ** 2
        assert detectors.stat_dl_family(S, s, y0, lam, "dl-amf") == \
            pytest.approx(a2 / beta_l, rel=1e-12)
        assert detectors.stat_dl_family(S, s, y0, lam, "dl-scm-beta") == \
            pytest.approx(a2 / beta_0, rel=1e-12)
        assert detectors.stat_dl_family(S, s, y0, lam, "dl-raw") == \
            pytest.approx(a2, rel=1e-12)
        with pytest.raises(ConfigError):
            detectors.stat_dl_family(S, s, y0, lam, "dl-other")

    def test_cfar_normalizers(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=41)
        s = scen_n24_k48.steering.entries
        R = scen_n24_k48.covariance()
        K = scen_n24_k48.K
        lam = 1.5
        alpha, _ = detectors.loaded_forms(S, s, y0, lam)
        a2 = abs(alpha) ** 2
        mu0 = rmt.deterministic_equivalents(R, s, lam, K).mu0
        assert detectors.stat_cfar_dl_scmf(S, R, s, y0, lam, K) == \
            pytest.approx(a2 / mu0, rel=1e-12)
        assert detectors.stat_cfar_dl_amf(S, s, y0, lam, K) == \
            pytest.approx(a2 / estimators.mu0_hat(S, s, lam, K), rel=1e-12)

    def test_el_uses_el_lambda(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=43)
        s = scen_n24_k48.steering.entries
        K = scen_n24_k48.K
        lam = estimators.el_lambda(S, K)
        assert detectors.stat_el(S, s, y0, K, cfar=True) == pytest.approx(
            detectors.stat_cfar_dl_amf(S, s, y0, lam, K), rel=1e-10)
        assert detectors.stat_el(S, s, y0, K, cfar=False) == pytest.approx(
            detectors.stat_dl_family(S, s, y0, lam, "dl-amf"), rel=1e-10)

    def test_opt_modes(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=47)
        s = scen_n24_k48.steering
        R = scen_n24_k48.covariance()
        K = scen_n24_k48.K
        lam_or = optimizer.lambda_opt(R, s, K).lambda_star
        assert detectors.stat_opt_cfar_dl(S, s, y0, K, R=R) == pytest.approx(
            detectors.stat_cfar_dl_scmf(S, R, s, y0, lam_or, K), rel=1e-10)
        lam_ad = optimizer.lambda_opt_hat(S, s, K).lambda_star
        assert detectors.stat_opt_cfar_dl(S, s, y0, K) == pytest.approx(
            detectors.stat_cfar_dl_amf(S, s, y0, lam_ad, K), rel=1e-10)

    def test_all_kinds_finite_positive(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=53)
        s = scen_n24_k48.steering
        R = scen_n24_k48.covariance()
        K = scen_n24_k48.K
        for kind in detectors.ALL_TAGS:
            lam = 1.5 if kind in detectors.FIXED_LAMBDA_TAGS else None
            spec = DetectorSpec(kind, lam=lam)
            R_arg = R if kind in detectors.ORACLE_TAGS or kind == "np" \
                else None
            v = detectors.evaluate_statistic(
                spec, y0, s, K, scm=None if kind == "np" else S, R=R_arg)
            assert np.isfinite(v) and v > 0.0, kind


class TestPersymmetry:
    def test_projection_properties(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        A = A + A.conj().T
        P = detectors.persymmetrize(A)
        J = np.eye(8)[::-1]
        assert np.allclose(P, P.conj().T)
        assert np.allclose(J @ P.conj() @ J, P)
        assert np.allclose(detectors.persymmetrize(P), P)

    def test_true_covariance_is_fixed_point(self, scen_n24_k48):
        R = scen_n24_k48.covariance().matrix
        assert np.allclose(detectors.persymmetrize(R), R, atol=1e-12)

    def test_stat_matches_manual(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=59)
        s = scen_n24_k48.steering.entries
        P = HermitianSpectrum.from_matrix(detectors.persymmetrize(S.matrix))
        assert detectors.stat_persymmetric_amf(S, s, y0) == pytest.approx(
            detectors.stat_amf(P, s, y0), rel=1e-12)


class TestAccessControl:
    def test_oracle_kinds_need_truth(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=61)
        s = scen_n24_k48.steering
        with pytest.raises(ConfigError):
            detectors.evaluate_statistic(DetectorSpec("cfar-dl-scmf", lam=1.5),
                                         y0, s, 48, scm=S)
        with pytest.raises(ConfigError):
            detectors.evaluate_statistic(DetectorSpec("opt-cfar-dl-scmf"),
                                         y0, s, 48, scm=S)

    def test_adaptive_kinds_reject_truth(self, scen_n24_k48):
        y0, S = _draw(scen_n24_k48, seed=61)
        s = scen_n24_k48.steering
        R = scen_n24_k48.covariance()
        for kind, lam in (("scm-amf", None), ("dl-amf", 1.5),
                          ("cfar-dl-amf", 1.5), ("cfar-el-amf", None),
                          ("opt-cfar-dl-amf", None)):
            with pytest.raises(ConfigError):
                detectors.evaluate_statistic(DetectorSpec(kind, lam=lam),
                                             y0, s, 48, scm=S, R=R)

    def test_scm_required(self, scen_n24_k48):
        y0, _ = _draw(scen_n24_k48, seed=61)
        s = scen_n24_k48.steering
        with pytest.raises(ConfigError):
            detectors.evaluate_statistic(DetectorSpec("scm-amf"), y0, s, 48)
