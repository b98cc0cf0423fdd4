import math

import pytest

from gammalab.distributions import Gamma, GammaMixture, MomentHypothesisError, Pareto
from gammalab.gamma_channel import ChannelParams
from gammalab.identity_lab import (
    IdentityCheckRow,
    Job,
    alpha_half_asymptotics,
    bounds_report,
    db_mmse_check,
    debruijn_gamma_check,
    input_relative_entropy,
    mean_correction_term,
    mi_decomposition_check,
    relative_entropy_flow,
    run_jobs,
    stein_rows,
)


def test_row_verdicts():
    eq = IdentityCheckRow("X", "in", 1.0, 1.00, 1.02, tolerance=0.01, lhs_se=0.004)
    assert eq.passed  # 0.02 <= 0.01 + 3*0.004
    assert not IdentityCheckRow("X", "in", 1.0, 1.0, 1.1, tolerance=0.01).passed
    assert IdentityCheckRow("B", "in", 1.0, 2.0, 1.0, kind="bound").passed is False
    assert IdentityCheckRow("B", "in", 1.0, 0.9, 1.0, kind="bound").passed
    sep = IdentityCheckRow("S", "in", math.nan, 1.0, 0.0, lhs_se=0.1, kind="separation")
    assert sep.passed and sep.margin == pytest.approx(0.5)
    assert IdentityCheckRow("E", "in", 1.0, 5.0, 1.0, kind="explore").passed is None
    assert math.isnan(eq.alpha)


def _rows(name, r):
    return [IdentityCheckRow(name, "in", r, r, r)]


def test_run_jobs_sorted_and_parallel_identical():
    jobs = [Job(f"j{r}", _rows, ("B" if r % 2 else "A", float(r))) for r in range(6)]
    serial, timings = run_jobs(jobs, 1)
    parallel, _ = run_jobs(jobs, 2)
    assert [row.key for row in serial] == [row.key for row in parallel]
    assert [row.identity_id for row in serial] == ["A"] * 3 + ["B"] * 3
    assert set(timings) == {f"j{r}" for r in range(6)}


def test_input_relative_entropy_closed_form():
    assert input_relative_entropy(Gamma(1.0, 1.0), 1.0, 1.0) == 0.0
    assert input_relative_entropy(Gamma(1.0, 2.0), 1.0, 1.0) == pytest.approx(math.log(2.0) - 0.5)


def test_relative_entropy_flow_decreases():
    rows = relative_entropy_flow(Gamma(2.0, 0.7), [ChannelParams(2.0, 1.0, r) for r in (0.0, 0.5, 1.0, 2.0)])
    values = [row.lhs for row in rows]
    assert values[0] == 0.0
    assert all(row.passed for row in rows)


def test_debruijn_on_mean_matched_mixture(mean_matched_mixture):
    row = debruijn_gamma_check(mean_matched_mixture, ChannelParams(1.0, 1.0, 1.0))
    assert row.passed
    assert row.notes["mean_correction"] == pytest.approx(0.0, abs=1e-12)


def test_debruijn_mean_correction_for_unmatched_mean():
    dist, params = Gamma(1.0, 2.0), ChannelParams(1.0, 1.0, 1.0)
    plain = debruijn_gamma_check(dist, params)
    fixed = debruijn_gamma_check(dist, params, mean_correction=True)
    assert not plain.passed
    assert fixed.passed
    assert mean_correction_term(dist, params) == pytest.approx(1.0 * 3.0 * (1.0 - 0.5) / 4.0)


def test_moment_hypothesis_enforced():
    with pytest.raises(MomentHypothesisError):
        debruijn_gamma_check(Pareto(1.0, 3.0), ChannelParams(1.0, 1.0, 1.0))


def test_bounds_hold_for_gamma_inputs():
    rows = bounds_report(Gamma(1.0, 1.0), [ChannelParams(1.0, 1.0, r) for r in (0.0, 1.0)], 100_000, seed=1)
    ids = {row.identity_id for row in rows}
    assert {"BOUND_FISHER", "BOUND_FISHER_MC", "BOUND1", "BOUND2"} <= ids
    assert all(row.passed for row in rows)
    rows = bounds_report(Gamma(1.0, 2.0), [ChannelParams(1.0, 1.0, 1.0)], 100_000, seed=1)
    assert any(row.identity_id == "BOUND_ALPHA_NU" and row.passed for row in rows)


def test_decomposition_and_db_mmse(mean_matched_mixture):
    params = ChannelParams(1.0, 1.0, 1.0)
    assert mi_decomposition_check(mean_matched_mixture, params).passed
    assert db_mmse_check(mean_matched_mixture, params, n_nodes=24).passed


def test_asymptotic_rows():
    rows = alpha_half_asymptotics(1.0, [1.0, 100.0], 50_000, seed=3)
    assert len(rows) == 6
    assert all(row.passed for row in rows)
    with pytest.raises(ValueError):
        alpha_half_asymptotics(1.0, [1.0], 1000, seed=3, alpha=1.0)


def test_stein_rows_verdicts():
    rows = stein_rows(50_000, seed=4)
    assert len(rows) == 16
    assert all(row.passed for row in rows)


def test_mixture_fixture_mean(mean_matched_mixture):
    assert isinstance(mean_matched_mixture, GammaMixture)
    assert mean_matched_mixture.mean == pytest.approx(1.0)
