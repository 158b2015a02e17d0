import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import history, oracle_portfolio_loss, portfolio
from lrod.amort import discount_factor
from lrod.completion import CompletedAccount, CompletedPortfolio, complete_portfolio, observed_portfolio
from lrod.errors import ConfigError, DomainError, PreconditionError
from lrod.forecast_markov import TransitionMatrix
from lrod.forecast_random import RandomDefaultsParams
from lrod.loss import (
    LossConfig, McSummary, account_loss, curve_values, monte_carlo_optimise, optimise_thresholds,
    parse_cells, parse_grid, portfolio_loss, run_scenario_matrix, segment_sizes,
    static_rate_loss_curve, summarise_trials,
)
from lrod.portfolio import Closure, SETTLED, WRITTEN_OFF, partition_samples
from lrod.synthetic import GeneratorConfig, generate_synthetic_portfolio

CFG = LossConfig()


def completed(eb, inst, rec, levels, account_id="c", principal=1000.0):
    return CompletedAccount(account_id, principal, np.asarray(inst, float), np.asarray(rec, float),
                            np.asarray(eb, float), np.asarray(levels))


def test_account_loss_hand_value():
    acc = completed([1000.0], [200.0], [0.0], [1])
    assert account_loss(acc, 1, CFG) == pytest.approx(540.0)
    assert account_loss(acc, 1, LossConfig(r_E=0, r_A=0)) == 0


def test_account_loss_discounting():
    acc = completed([1000.0] * 5, [100.0] * 5, [0.0] * 5, [1, 2, 3, 4, 5])
    undiscounted = LossConfig(risk_free_rate=0.0)
    for t in range(2, 6):
        assert account_loss(acc, t, CFG) < account_loss(acc, t, undiscounted)
    with pytest.raises(DomainError):
        account_loss(acc, 6, CFG)


def test_loss_config_validation():
    with pytest.raises(DomainError):
        LossConfig(r_E=1.5)
    with pytest.raises(DomainError):
        LossConfig(grid=(0, 1))
    with pytest.raises(DomainError):
        LossConfig(grid=(3, 2))
    with pytest.raises(DomainError):
        LossConfig(measure="g2")


def test_loss_config_from_mapping():
    cfg = LossConfig.from_mapping({"r_E": "0.5", "grid": "2..5"})
    assert cfg.r_E == 0.5 and cfg.grid == (2, 3, 4, 5)
    with pytest.raises(ConfigError) as err:
        LossConfig.from_mapping({"r_A": "abc"})
    assert err.value.key == "r_A"
    with pytest.raises(ConfigError) as err:
        LossConfig.from_mapping({"nope": "1"})
    assert err.value.key == "nope"


def test_parse_grid_and_cells():
    assert parse_grid("1..4") == (1, 2, 3, 4)
    assert parse_grid("1,2.5,7") == (1, 2.5, 7)
    assert len(parse_cells("all")) == 9
    assert parse_cells("3,1") == [("S3", "S1")]
    with pytest.raises(DomainError):
        parse_cells("4,1")


def test_empty_portfolio_loss():
    assert portfolio_loss(CompletedPortfolio(()), 3, CFG) == 0


def test_all_performing_above_max_level():
    a = completed([900, 800, 700], [100] * 3, [0, 100, 100], [1, 1, 1], "a")
    b = completed([500, 400, 300], [100] * 3, [100] * 3, [0, 0, 0], "b")
    cp = CompletedPortfolio((a, b))
    expected = account_loss(a, 3, CFG) + account_loss(b, 3, CFG)
    assert portfolio_loss(cp, 2, CFG) == pytest.approx(expected)


def test_two_loan_segmentation_oracle():
    bad = history([100] * 5, [100, 0, 0, 0, 0], rate=0.1, principal=480.0, account_id="bad")
    good = history([100] * 5, [100] * 5, rate=0.1, principal=480.0, account_id="good")
    p = portfolio(bad, good)
    cp = observed_portfolio(p)
    for d in (1, 2, 3, 5, 9):
        assert portfolio_loss(cp, d, CFG) == pytest.approx(oracle_portfolio_loss(p.accounts, d), abs=0.01)
    # bad defaults at d=2 in month 3
    bad_c = cp.accounts[0]
    assert portfolio_loss(cp, 2, CFG) == pytest.approx(account_loss(bad_c, 3, CFG) + account_loss(cp.accounts[1], 5, CFG))


def crafted_three():
    curer = history([100] * 6, [0, 200, 100, 100, 100, 100], principal=600.0, account_id="curer")
    stopper = history([100] * 6, [0] * 6, principal=600.0, account_id="stopper")
    clean = history([100] * 6, [100] * 6, principal=600.0, account_id="clean")
    return portfolio(curer, stopper, clean)


def test_crafted_interior_minimum():
    p = crafted_three()
    cfg = LossConfig(grid=tuple(range(1, 8)))
    curve = optimise_thresholds(observed_portfolio(p), cfg)
    exhaustive = [oracle_portfolio_loss(p.accounts, d) for d in cfg.grid]
    assert np.allclose(curve.losses, exhaustive, atol=0.01)
    assert curve.optimal_threshold == 2
    assert curve.minimum_loss == pytest.approx(min(exhaustive), abs=0.01)
    assert np.allclose(curve.loss_rates, curve.losses / 1800.0)


def test_constant_curve_ties_to_first():
    p = portfolio(history([10] * 3, [10] * 3))
    curve = optimise_thresholds(observed_portfolio(p), LossConfig(grid=(2, 4, 6)))
    assert curve.optimal_threshold == 2


@st.composite
def small_portfolios(draw):
    n = draw(st.integers(1, 5))
    accounts = []
    for k in range(n):
        t0 = draw(st.integers(1, 12))
        inst = [draw(st.sampled_from([0.0, 50.0, 100.0, 137.5])) for _ in range(t0)]
        rec = [draw(st.sampled_from([0.0, 0.5, 0.9, 1.0, 2.0, 3.0, 4.2])) * (i or 100.0) for i in inst]
        kind = draw(st.sampled_from(["open", "open", WRITTEN_OFF, SETTLED]))
        closure = Closure() if kind == "open" else Closure(kind, t0, draw(st.floats(0, 500)) if kind == WRITTEN_OFF else 0.0)
        accounts.append(history(inst, rec, [10.0] * t0, account_id=f"a{k}",
                                rate=draw(st.one_of(st.just(0.0), st.floats(0.001, 0.2))), principal=draw(st.floats(100, 5e4)),
                                term=t0, closure=closure))
    return portfolio(*accounts)


@given(small_portfolios())
def test_portfolio_loss_matches_brute_force(p):
    cp = observed_portfolio(p)
    cfg = LossConfig(grid=tuple(range(1, 11)))
    curve = curve_values(cp, cfg)
    for d, value in zip(cfg.grid, curve):
        expected = oracle_portfolio_loss(p.accounts, d)
        assert portfolio_loss(cp, d, cfg) == pytest.approx(expected, abs=0.01)
        assert value == pytest.approx(expected, abs=0.01)


@given(small_portfolios())
def test_segments_shrink_with_threshold(p):
    cfg = LossConfig(grid=tuple(range(1, 15)))
    sizes = segment_sizes(observed_portfolio(p), cfg)
    assert np.all(np.diff(sizes) <= 0)
    assert np.all((sizes >= 0) & (sizes <= len(p)))


def test_censored_accounts_need_completion():
    p = portfolio(history([1, 1], [1, 1], term=5))
    with pytest.raises(PreconditionError):
        portfolio_loss(p, 1, CFG)


@pytest.fixture(scope="module")
def small_book():
    return generate_synthetic_portfolio(GeneratorConfig(n_accounts=60, term=36), 17)


def test_scenario_matrix_all_cells(small_book):
    grid = run_scenario_matrix(partition_samples(small_book), "markov", LossConfig(grid=tuple(range(1, 21))), 3)
    assert grid.complete and not grid.errors
    assert sorted(c.label for c in grid.cells.values()) == [f"s{i}{j}" for i in "123" for j in "123"]
    rows = list(grid.optima())
    assert len(rows) == 9


def test_scenario_matrix_degenerate_partition():
    accs = [history([10] * 4, [10, 0, 0, 0], [30] * 4, account_id=f"w{i}", term=12,
                    closure=Closure(WRITTEN_OFF, 4, 5.0 * i)) for i in range(4)]
    part = partition_samples(portfolio(*accs))
    for technique in ("random", "markov"):
        grid = run_scenario_matrix(part, technique, LossConfig(grid=(1, 2, 3)), 0)
        curves = [c.losses for c in grid.cells.values()]
        assert len(curves) == 9
        assert all(np.array_equal(curves[0], c) for c in curves)


def test_scenario_matrix_records_cell_errors():
    clean = portfolio(*[history([10] * 3, [10] * 3, [20] * 3, account_id=f"c{i}", term=9) for i in range(3)])
    grid = run_scenario_matrix(partition_samples(clean), "random", LossConfig(grid=(1, 2)), 0)
    assert set(grid.cells) == {("S1", "S1")}
    assert len(grid.errors) == 8


def test_scenario_reproducible(small_book):
    part = partition_samples(small_book)
    cfg = LossConfig(grid=tuple(range(1, 11)))
    a = run_scenario_matrix(part, "random", cfg, 5, cells=[("S2", "S1")])
    b = run_scenario_matrix(part, "random", cfg, 5, cells=[("S2", "S1")])
    assert np.array_equal(a.cells[("S2", "S1")].losses, b.cells[("S2", "S1")].losses)


def test_completion_order_invariant(small_book):
    params = RandomDefaultsParams(0.7, "Exponential", (0.2,))
    shuffled = portfolio(*reversed(small_book.accounts))
    a = complete_portfolio(small_book, params, 9)
    b = complete_portfolio(shuffled, params, 9)
    for x, y in zip(a, b):
        assert x.account_id == y.account_id and np.array_equal(x.receipts, y.receipts)


def test_summary_statistics_by_construction():
    samples = np.array([[0.1, 0.2, 0.3], [0.3, 0.2, 0.5], [0.2, 0.2, 0.1]])
    s = summarise_trials(samples, (1, 2, 3), 100.0)
    assert np.allclose(s.mean, samples.mean(axis=0))
    assert np.allclose(s.var, samples.var(axis=0, ddof=1))
    half = 2.58 * np.sqrt(s.var) / math.sqrt(3)
    assert np.array_equal(s.ci_low, s.mean - half) and np.array_equal(s.ci_high, s.mean + half)
    assert s.var[1] == 0 and s.ci_width[1] == 0
    assert s.optimal_threshold == 1
    with pytest.raises(DomainError):
        summarise_trials(samples[:1], (1, 2, 3), 1.0)


def test_monte_carlo_deterministic_forecasts_have_zero_width(small_book):
    s = monte_carlo_optimise(small_book, RandomDefaultsParams(1.0), LossConfig(grid=tuple(range(1, 11))), 4, 0)
    assert np.all(s.var == 0) and np.all(s.ci_width == 0)


def test_monte_carlo_thread_identity(small_book):
    params = RandomDefaultsParams(0.8, "Exponential", (0.3,))
    cfg = LossConfig(grid=tuple(range(1, 16)))
    one = monte_carlo_optimise(small_book, params, cfg, 6, 21, threads=1)
    many = monte_carlo_optimise(small_book, params, cfg, 6, 21, threads=3)
    assert np.array_equal(one.samples, many.samples)
    assert np.array_equal(one.ci_low, many.ci_low)
    assert np.all((one.ci_low <= one.mean) & (one.mean <= one.ci_high))


def test_monte_carlo_needs_two_trials(small_book):
    with pytest.raises(DomainError):
        monte_carlo_optimise(small_book, RandomDefaultsParams(1.0), CFG, 1, 0)


def test_markov_monte_carlo_runs(small_book):
    m = TransitionMatrix(np.eye(8))
    s = monte_carlo_optimise(small_book, m, LossConfig(grid=(1, 2, 3)), 2, 0)
    assert isinstance(s, McSummary) and s.n_trials == 2


def test_static_curve_examples():
    acc = history([100, 100], [100, 0], [950.0, 900.0], account_id="one", term=10)
    curves = static_rate_loss_curve(portfolio(acc), [0.0, 1.0], LossConfig(grid=(1, 2)))
    assert np.all(curves[0.0].losses == 0)
    assert curves[1.0].losses[0] == pytest.approx(900 * discount_factor(2, 0.07))
    assert curves[1.0].losses[1] == pytest.approx(900 * discount_factor(2, 0.07))
    with pytest.raises(DomainError):
        static_rate_loss_curve(portfolio(acc), [1.2], CFG)


def test_static_curve_scales_with_rate(small_book):
    curves = static_rate_loss_curve(small_book, [0.5, 1.0], CFG)
    assert np.allclose(curves[0.5].losses * 2, curves[1.0].losses)
