"""Diagonally loaded adaptive matched filters.

Asymptotic design curves for the loading factor, CFAR normalizations that
hold at finite sample support, consistent data-driven calibration, and a
Monte Carlo harness that checks all of it end to end.
"""

from .errors import ConfigError, NumericalError
from .results import Curve, Histogram
from .scenario import (HermitianSpectrum, LowRankClutter, SampleSet, Scenario,
                       SteeringVector, Swerling0, Swerling1, ToeplitzClutter,
                       build_covariance, make_steering, sample_dataset,
                       scenario_from_json, scenario_to_json, scm, trial_rng)
from .rmt import (AsymptoticParams, deterministic_equivalents, kappa,
                  kappa_derivative_at_zero, kappa_limit_inf, kappa_lower,
                  mu1, solve_delta)
from .theory import (asymptotic_pfa, bessel_i0, bessel_i0e, cfar_dl_pd,
                     cfar_threshold, detection_loss_db, marcum_q, ncx2_cdf,
                     ncx2_pdf, roc_swerling0, roc_swerling1)
from .estimators import (EstimatedEquivalents, el_lambda, el_log_g,
                         estimated_equivalents, gamma_hat, kappa_lower_hat,
                         log_el_statistic, log_zeta_median, mu0_hat, psi_hat,
                         solve_theta, xi_psi_hat)
from .detectors import (ALL_TAGS, DetectorSpec, evaluate_statistic,
                        make_opt_detector)
from .optimizer import (OptConfig, OptResult, kappa_crossing,
                        kappa_lambda_curve, lambda_opt, lambda_opt_hat)
from .harness import (PdEvaluator, ThresholdResult, TrialConfig,
                      calibrate_threshold, detection_loss_table, empirical_pdf,
                      estimate_pd, h0_statistics, ks_distance, pd_evaluator,
                      pd_vs_scnr_sweep, scnr_at_pd, threshold_from_stats,
                      wilson_ci)

__version__ = "0.1.0"
