import math

import numpy as np
import pytest

from spdcsim.elements import BeamSplitterParams, GainParams, beam_split, parametric_amplify
from spdcsim.estimators import (DegenerateStatisticError, chsh_coefficient,
                                correlation_coefficient, covariance_intensity,
                                field_pair_moment, fourfold_covariance,
                                gaussian_moment_check, intensity_snr,
                                jackknife_se, mean_intensity,
                                moment_theorem_residual, variance_intensity)
from spdcsim.experiments import polarized_arms
from spdcsim.sampling import derive_stream, sample_vacuum

from wick import centered_intensity_product, twin_beam_moment_table

GL_UNIT = math.asinh(1.0)


def _twin(reps=1_000_000, seed=42, gl=GL_UNIT):
    ens = sample_vacuum(derive_stream(seed, 0), reps, 2)
    return parametric_amplify(ens.column(0), ens.column(1), GainParams(gl))


def _vacuum(reps=1_000_000, seed=11, modes=2):
    return sample_vacuum(derive_stream(seed, 0), reps, modes)


def test_mean_intensity_oracles(twin_cache):
    vac = _vacuum()
    assert mean_intensity(vac.column(0)).deviation(0.0) < 5
    es, _ = twin_cache(1.0)
    assert mean_intensity(es).deviation(1.0) < 5
    d1, _ = twin_cache(1.0, 0.5)
    assert mean_intensity(d1).deviation(0.5) < 5


def test_variance_intensity_oracles(twin_cache):
    vac = _vacuum()
    assert variance_intensity(vac.column(0)).deviation(0.0) < 5
    es, _ = twin_cache(1.0)
    assert variance_intensity(es).deviation(2.0) < 5
    d1, _ = twin_cache(1.0, 0.5)
    assert variance_intensity(d1).deviation(0.75) < 5


def test_covariance_intensity_oracles(twin_cache):
    vac = _vacuum()
    assert covariance_intensity(vac.column(0), vac.column(1)).deviation(0.0) < 5
    es, ei = twin_cache(1.0)
    assert covariance_intensity(es, ei).deviation(2.0) < 5
    e1, e2 = beam_split(es, ei, BeamSplitterParams.balanced())
    assert covariance_intensity(e1, e2).deviation(0.0) < 5


def test_correlation_coefficient_oracles(twin_cache, bell_cache):
    es, ei = twin_cache(1.0)
    rho = correlation_coefficient(es, ei)
    assert rho.deviation(1.0) < 5

    arms = bell_cache(1.0)
    theta = math.pi / 8
    e1p, _, e2p, _ = polarized_arms(arms, theta, theta)
    assert correlation_coefficient(e1p, e2p).deviation(0.5) < 5

    e1p, _, e2p, _ = polarized_arms(arms, theta, -theta)
    assert correlation_coefficient(e1p, e2p).deviation(0.0) < 5


def test_correlation_degenerate_on_vacuum():
    vac = _vacuum(reps=10_000)
    with pytest.raises(DegenerateStatisticError):
        correlation_coefficient(vac.column(0), vac.column(1))


def test_field_pair_moment_oracles(twin_cache):
    es, ei = twin_cache(1.0)
    pair = field_pair_moment(es, ei)
    assert abs(abs(pair.value) - math.sqrt(2.0)) < 5 * pair.std_error
    cross = field_pair_moment(es, ei, conjugate_second=True)
    assert cross.deviation(0.0) < 5
    vac = _vacuum()
    self_moment = field_pair_moment(vac.column(0), vac.column(0),
                                    conjugate_second=True)
    assert self_moment.deviation(0.5) < 5


def test_moment_theorem_residuals(twin_cache):
    es, ei = twin_cache(1.0)
    assert gaussian_moment_check(es, ei) < 5
    vac = _vacuum()
    assert gaussian_moment_check(vac.column(0), vac.column(1)) < 5
    e1, e2 = beam_split(es, ei, BeamSplitterParams.balanced())
    assert gaussian_moment_check(e1, e2) < 5


def test_input_validation():
    vac = _vacuum(reps=100)
    with pytest.raises(ValueError):
        mean_intensity(vac.column(0)[:1])
    with pytest.raises(ValueError):
        covariance_intensity(vac.column(0), vac.column(1)[: 50])
    with pytest.raises(ValueError):
        moment_theorem_residual(vac.data, vac.data)


def test_chsh_coefficient_oracles(bell_cache):
    arms = bell_cache(1.0)
    # theta1 + theta2 = pi/2: E -> (1+G)/(1+3G) = 0.5
    cols = polarized_arms(arms, math.pi / 4, math.pi / 4)
    est = chsh_coefficient(*cols)
    assert est.deviation(0.5) < 5

    # near the zero-gain limit the equal-angles setting gives E -> 0
    arms_low = bell_cache(0.01)
    cols = polarized_arms(arms_low, math.pi / 8, math.pi / 8)
    est = chsh_coefficient(*cols)
    assert est.deviation(0.0) < 5


def test_chsh_degenerate_denominator():
    vac = _vacuum(reps=50_000, modes=4)
    with pytest.raises(DegenerateStatisticError):
        chsh_coefficient(*(vac.column(k) for k in range(4)))

    # at gL = 0.01 the intensity-product denominator is itself consistent
    # with zero at this sample size, which the contract rejects
    ens = sample_vacuum(derive_stream(5, 0), 200_000, 4)
    es1, ei1 = parametric_amplify(ens.column(0), ens.column(1), GainParams(0.01))
    es2, ei2 = parametric_amplify(ens.column(2), ens.column(3), GainParams(0.01))
    arms = (es1, es2, ei1, ei2)
    with pytest.raises(DegenerateStatisticError):
        chsh_coefficient(*polarized_arms(arms, math.pi / 8, math.pi / 8))


def test_fourfold_against_independent_enumeration(twin_cache):
    es, ei = twin_cache(1.0)
    res = fourfold_covariance(es, es, ei, ei)
    oracle = centered_intensity_product(
        ["s", "s", "i", "i"], twin_beam_moment_table(GL_UNIT)).real
    assert oracle == pytest.approx(39.0625)
    assert res.direct.deviation(oracle) < 5
    assert res.terms_total.deviation(oracle) < 5
    assert sorted(len(v) for v in res.term_classes.values()) == [1, 4, 4]


def test_fourfold_independent_vacua():
    vac = _vacuum(reps=1_000_000, modes=4)
    res = fourfold_covariance(*(vac.column(k) for k in range(4)))
    assert res.direct.deviation(0.0) < 5


def test_fourfold_bunching_scaling(twin_cache):
    # ratio of bunching terms from symmetric pair moments across two gains
    vals = {}
    for s2 in (5.0, 10.0):
        es, ei = twin_cache(s2)
        res = fourfold_covariance(es, es, ei, ei)
        vals[s2] = res.class_estimates["bunching"].value
    expect = (10.5 / 5.5) ** 4
    assert vals[10.0] / vals[5.0] == pytest.approx(expect, rel=0.10)


def test_standard_error_scales_with_reps():
    big = _vacuum(reps=400_000, seed=21, modes=1).column(0)
    small = big[:100_000]
    se_small = mean_intensity(small).std_error
    se_big = mean_intensity(big).std_error
    assert se_small / se_big == pytest.approx(2.0, rel=0.2)


def test_jackknife_matches_classic_se_for_mean():
    rng = np.random.default_rng(0)
    x = rng.normal(size=4000)
    se = jackknife_se(lambda m: m, x)
    assert se == pytest.approx(x.std(ddof=1) / math.sqrt(x.size), rel=1e-6)


def test_intensity_snr_values(twin_cache):
    es, _ = twin_cache(10.0)
    snr = intensity_snr(es)
    # thermal statistics: mean/std of sampled intensity = S^2/(S^2 + 1/2)
    assert snr == pytest.approx(10.0 / 10.5, rel=0.02)
