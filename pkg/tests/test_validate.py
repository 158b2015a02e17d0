import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import history, portfolio
from lrod.errors import DomainError
from lrod.forecast_markov import TransitionMatrix
from lrod.forecast_random import RandomDefaultsParams
from lrod.synthetic import GeneratorConfig, generate_synthetic_portfolio
from lrod.validate import (
    ValidationReport, assign_folds, compare_techniques, cross_validate, format_reports,
    par_metric, parameter_stability, reports_json, window_forecast,
)


def test_par_examples():
    assert par_metric([[100, 100]], [[100, 100]], 0.07, 1000) == 0
    assert par_metric([[100, 100]], [[0, 200]], 0.0, 1000) == 0
    assert par_metric([[100, 100]], [[0, 0]], 0.0, 1000) == pytest.approx(0.2)
    # overpayment pushes the rate negative
    assert par_metric([[100]], [[300]], 0.07, 1000) == pytest.approx(-0.2)


def test_par_discounting():
    v = 1.07 ** (-1 / 12)
    assert par_metric([[0, 100]], [[0, 0]], 0.07, 100) == pytest.approx(v)


def test_par_errors():
    with pytest.raises(DomainError):
        par_metric([[1]], [[1]], 0.07, 0)
    with pytest.raises(DomainError):
        par_metric([[1, 2]], [[1]], 0.07, 10)


@given(st.lists(st.lists(st.tuples(st.floats(0, 1e4), st.floats(0, 1e4)), min_size=1, max_size=12),
                min_size=1, max_size=5), st.floats(0.1, 100), st.floats(1, 1e6))
def test_par_scale_invariance(accounts, c, adv):
    inst = [[a for a, _ in acc] for acc in accounts]
    rec = [[b for _, b in acc] for acc in accounts]
    base = par_metric(inst, rec, 0.07, adv)
    scaled = par_metric([[c * a for a in x] for x in inst], [[c * b for b in x] for x in rec], 0.07, c * adv)
    assert scaled == pytest.approx(base, rel=1e-9, abs=1e-12)


@given(st.integers(1, 200), st.integers(2, 12), st.integers(0, 10**6))
def test_folds_cover_once_and_balance(n, k, seed):
    if k > n:
        with pytest.raises(DomainError):
            assign_folds(n, k, seed)
        return
    folds = assign_folds(n, k, seed)
    flat = sorted(i for f in folds for i in f)
    assert flat == list(range(n))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1


def test_leave_one_out():
    accs = [history([10] * 3, [10, 0, 20], account_id=f"a{i}") for i in range(5)]
    report = cross_validate(portfolio(*accs), "markov", k=5, seed=1)
    assert report.fold_sizes == (1, 1, 1, 1, 1)


def test_too_many_folds():
    with pytest.raises(DomainError):
        cross_validate(portfolio(history([1], [1])), "random", k=2)


def test_parameter_stability_examples():
    assert parameter_stability([0.8], [[0.8], [0.84]]) == pytest.approx(0.025)
    assert parameter_stability([0.3, 2.0], [[0.3, 2.0]]) == 0.0
    assert parameter_stability([0.0, 2.0], [[5.0, 2.2]]) == pytest.approx(0.1)
    with pytest.raises(DomainError):
        parameter_stability([0.0, 0.0], [[1.0, 1.0]])
    with pytest.raises(DomainError):
        parameter_stability([1.0], [[1.0, 2.0]])


@given(st.lists(st.floats(-1e3, 1e3).filter(lambda v: v != 0), min_size=1, max_size=10))
def test_parameter_stability_identity(vec):
    assert parameter_stability(vec, [vec]) == 0.0


def test_parameter_stability_on_params_objects():
    full = RandomDefaultsParams(0.8, "Exponential", (0.2,))
    fold = RandomDefaultsParams(0.84, "Exponential", (0.2,))
    assert parameter_stability(full, [full, fold]) == pytest.approx(0.025 / 2)
    m = TransitionMatrix(np.eye(8))
    assert parameter_stability(m, [m]) == 0.0


def test_window_forecast_deterministic_technique():
    acc = history([100] * 6, [100, 0, 0, 200, 100, 100])
    rec = window_forecast(acc, RandomDefaultsParams(1.0), np.random.default_rng(0))
    assert rec.tolist() == [100] * 6
    rec = window_forecast(acc, TransitionMatrix(np.eye(8)), np.random.default_rng(0))
    assert rec.tolist() == [100] * 6


def test_deterministic_technique_same_folds_same_par(monkeypatch):
    import lrod.validate as v

    book = generate_synthetic_portfolio(GeneratorConfig(n_accounts=40, term=36), 2)
    monkeypatch.setattr(v, "train", lambda *a, **k: RandomDefaultsParams(1.0))
    fixed_folds = assign_folds(40, 4, 0)
    monkeypatch.setattr(v, "assign_folds", lambda n, k, seed: fixed_folds)
    a = cross_validate(book, "random", 4, seed=1)
    b = cross_validate(book, "random", 4, seed=99)
    assert a.par_forecast == b.par_forecast and a.par_actual == b.par_actual
    assert a.mean_param_pct_diff == 0.0


def test_report_outputs():
    book = generate_synthetic_portfolio(GeneratorConfig(n_accounts=30, term=36), 4)
    reports = compare_techniques(book, k=3, seed=0)
    assert set(reports) == {"random", "markov"}
    assert reports["random"].par_actual == reports["markov"].par_actual
    text = format_reports(reports)
    assert "Portfolio Arrears Rate (PAR)" in text and "Mean parameter %-difference" in text
    assert '"par_forecast"' in reports_json(reports)
    with pytest.raises(DomainError):
        ValidationReport("random", 0, 0, 0, 1)
