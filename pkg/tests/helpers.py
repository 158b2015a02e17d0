"""Builders and independent reference implementations used across the tests.

The oracles here are written from the loss definitions directly, with plain
loops and no imports from the package's numerical modules, so agreement with
the package is a genuine cross-check.
"""
from __future__ import annotations

import math

from lrod.portfolio import Closure, LoanHistory, MonthlyRecord, Portfolio


def history(instalments, receipts, balances=None, *, account_id="A", rate=0.0, term=None,
            principal=None, closure=None) -> LoanHistory:
    n = len(instalments)
    balances = balances if balances is not None else [0.0] * n
    records = tuple(MonthlyRecord(t, float(i), float(r), float(b))
                    for t, (i, r, b) in enumerate(zip(instalments, receipts, balances), start=1))
    return LoanHistory(account_id, term if term is not None else n,
                       principal if principal is not None else max(1.0, sum(instalments)),
                       rate, records, closure or Closure())


def portfolio(*accounts, label="test") -> Portfolio:
    return Portfolio(tuple(accounts), label)


def oracle_levels(inst, rec, p=0.9):
    out, g = [], 0
    for i, r in zip(inst, rec):
        h = r / i if i > 0 else 1.0
        if h < p:
            g = g + 1
        else:
            # A partial payment at or above the threshold holds the level.
            g = max(0, g - max(0, int(math.floor(h + 1e-9)) - 1))
        out.append(g)
    return out


def oracle_schedule(principal, annual_rate, term, n):
    """Origination schedule balances for t = 1..n by plain recursion."""
    r = annual_rate / 12
    inst = principal / term if r == 0 else principal * r / (1 - (1 + r) ** -term)
    b, out = principal, []
    for _ in range(n):
        b = b * (1 + r) - inst
        out.append(max(b, 0.0))
    return out


def oracle_account_terms(acc: LoanHistory, r_E=0.4, r_A=0.7, rf=0.07, p=0.9):
    """Per-period loss terms and g1 levels of a fully observed account."""
    inst = [rec.instalment for rec in acc.records]
    rec = [r.receipt for r in acc.records]
    if acc.written_off:
        rec[acc.closure.period - 1] += acc.closure.recovery_amount
    eb = oracle_schedule(acc.principal, acc.annual_interest_rate, acc.contractual_term, len(inst))
    if acc.settled:
        for t in range(acc.closure.period - 1, len(eb)):
            eb[t] = 0.0
    terms, a = [], 0.0
    for t in range(len(inst)):
        a = max(0.0, a + inst[t] - rec[t])
        terms.append((1 + rf) ** (-t / 12) * (r_E * eb[t] + r_A * a))
    return terms, oracle_levels(inst, rec, p)


def oracle_portfolio_loss(accounts, d, **kw) -> float:
    """Brute force: try both segment assignments per account and keep the valid one."""
    total = 0.0
    for acc in accounts:
        terms, levels = oracle_account_terms(acc, **kw)
        options = {}
        breach = [t for t, g in enumerate(levels) if g >= d]
        if breach:
            options["defaulting"] = terms[breach[0]]
        else:
            options["performing"] = terms[-1]
        assert len(options) == 1
        total += next(iter(options.values()))
    return total
