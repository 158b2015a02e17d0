"""Loan performance histories, CSV ingestion and the S1/S2/S3 sample partition."""
from __future__ import annotations

import csv
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .delinquency import DEFAULT_PAYMENT_THRESHOLD, g1_levels
from .errors import DataError, SchemaError

OPEN = "open"
WRITTEN_OFF = "written_off"
SETTLED = "settled"

CORE_COLUMNS = (
    "account_id", "period", "instalment", "receipt", "balance", "annual_rate",
    "writeoff_flag", "writeoff_recovery", "settle_flag",
)
# Not part of the fixed schema; written by the generator so that histories
# round-trip with their origination metadata.
EXTENDED_COLUMNS = ("principal", "contractual_term")
REQUIRED_COLUMNS = ("account_id", "period", "instalment", "receipt", "balance", "annual_rate")

DEFAULT_TERM = 240


@dataclass(frozen=True)
class MonthlyRecord:
    period: int
    instalment: float
    receipt: float
    balance: float


@dataclass(frozen=True)
class Closure:
    kind: str = OPEN
    period: Optional[int] = None
    recovery_amount: float = 0.0

    def __post_init__(self):
        if self.kind not in (OPEN, WRITTEN_OFF, SETTLED):
            raise DataError(f"unknown closure kind {self.kind!r}")
        if self.kind != OPEN and self.period is None:
            raise DataError(f"{self.kind} closure needs a period")
        if self.recovery_amount < 0:
            raise DataError("recovery amount must be non-negative")


@dataclass(frozen=True)
class LoanHistory:
    """One account's observed monthly records, t = 1..t0."""

    account_id: str
    contractual_term: int
    principal: float
    annual_interest_rate: float
    records: tuple
    closure: Closure = field(default_factory=Closure)
    origination_period: int = 1

    def __post_init__(self):
        if self.principal <= 0:
            raise DataError(f"account {self.account_id}: principal must be positive")
        if self.contractual_term <= 0:
            raise DataError(f"account {self.account_id}: contractual term must be positive")
        for expected, rec in enumerate(self.records, start=1):
            if rec.period != expected:
                raise DataError(f"account {self.account_id}: periods are not contiguous from 1")
        if len(self.records) > self.contractual_term:
            raise DataError(f"account {self.account_id}: more records than contractual term")
        if self.closure.kind != OPEN and not 1 <= self.closure.period <= len(self.records):
            raise DataError(f"account {self.account_id}: closure period outside observed history")

    @property
    def t0(self) -> int:
        return len(self.records)

    @property
    def is_open(self) -> bool:
        return self.closure.kind == OPEN

    @property
    def written_off(self) -> bool:
        return self.closure.kind == WRITTEN_OFF

    @property
    def settled(self) -> bool:
        return self.closure.kind == SETTLED

    @property
    def needs_forecast(self) -> bool:
        return self.is_open and self.t0 < self.contractual_term

    @cached_property
    def instalments(self) -> np.ndarray:
        return np.array([r.instalment for r in self.records], dtype=float)

    @cached_property
    def receipts(self) -> np.ndarray:
        """Observed receipts, with any write-off recovery added at the write-off period."""
        out = np.array([r.receipt for r in self.records], dtype=float)
        if self.written_off and self.closure.recovery_amount:
            out[self.closure.period - 1] += self.closure.recovery_amount
        return out

    @cached_property
    def balances(self) -> np.ndarray:
        return np.array([r.balance for r in self.records], dtype=float)

    @cached_property
    def observed_levels(self) -> tuple:
        return tuple(g1_levels(self.instalments.tolist(), self.receipts.tolist(),
                               DEFAULT_PAYMENT_THRESHOLD))

    def levels(self, p: float = DEFAULT_PAYMENT_THRESHOLD) -> list:
        if p == DEFAULT_PAYMENT_THRESHOLD:
            return list(self.observed_levels)
        return g1_levels(self.instalments.tolist(), self.receipts.tolist(), p)

    def max_observed_level(self, p: float = DEFAULT_PAYMENT_THRESHOLD) -> int:
        levels = self.levels(p)
        return max(levels) if levels else 0


@dataclass(frozen=True)
class Portfolio:
    accounts: tuple
    label: str = ""

    def __post_init__(self):
        ids = [a.account_id for a in self.accounts]
        if len(set(ids)) != len(ids):
            raise DataError("account ids are not unique")

    def __len__(self):
        return len(self.accounts)

    def __iter__(self):
        return iter(self.accounts)

    @property
    def ids(self) -> list:
        return [a.account_id for a in self.accounts]

    @property
    def total_principal(self) -> float:
        return float(sum(a.principal for a in self.accounts))

    def subset(self, accounts: Iterable[LoanHistory], label: str) -> "Portfolio":
        return Portfolio(tuple(accounts), label)


@dataclass(frozen=True)
class SamplePartition:
    s1: Portfolio
    s2: Portfolio
    s3: Portfolio

    def __getitem__(self, name: str) -> Portfolio:
        try:
            return {"S1": self.s1, "S2": self.s2, "S3": self.s3}[name.upper()]
        except KeyError:
            raise KeyError(f"unknown sample {name!r}; expected S1, S2 or S3") from None


def partition_samples(p: Portfolio, threshold: float = DEFAULT_PAYMENT_THRESHOLD) -> SamplePartition:
    """Full sample, delinquents (ever >= 1 in arrears, or written off), and write-offs."""
    delinquents = [a for a in p if a.written_off or a.max_observed_level(threshold) >= 1]
    writeoffs = [a for a in delinquents if a.written_off]
    return SamplePartition(
        s1=p.subset(p.accounts, "S1"),
        s2=p.subset(delinquents, "S2"),
        s3=p.subset(writeoffs, "S3"),
    )


# -- CSV ------------------------------------------------------------------

def _number(raw: str, column: str, account: str) -> float:
    try:
        return float(raw) if raw.strip() != "" else 0.0
    except ValueError:
        raise DataError(f"account {account}: column {column!r} is not numeric: {raw!r}") from None


def _flag(raw: str, column: str, account: str) -> bool:
    value = raw.strip()
    if value in ("", "0"):
        return False
    if value == "1":
        return True
    raise DataError(f"account {account}: flag column {column!r} must be 0 or 1, got {raw!r}")


def _back_solve_principal(first: MonthlyRecord, annual_rate: float) -> float:
    # Ledger convention B_1 = P (1 + r) - R_1
    value = (first.balance + first.receipt) / (1.0 + annual_rate / 12.0)
    return value if value > 0 else max(first.instalment, 1.0)


def load_portfolio(path, schema: Optional[Mapping[str, str]] = None,
                   default_term: int = DEFAULT_TERM, label: Optional[str] = None) -> Portfolio:
    """Read one-row-per-account-month CSV into a :class:`Portfolio`.

    ``schema`` maps canonical column names to the names used in the file.
    Principal and contractual term come from the optional ``principal`` and
    ``contractual_term`` columns; absent those, principal is back-solved from
    the first record and the term defaults to ``default_term``.
    """
    path = Path(path)
    colmap = {c: c for c in CORE_COLUMNS + EXTENDED_COLUMNS}
    if schema:
        colmap.update(schema)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if colmap[c] not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(colmap[c] for c in missing)}")
        has = {c: colmap[c] in header for c in colmap}
        rows_by_account: "OrderedDict[str, list]" = OrderedDict()
        for row in reader:
            rows_by_account.setdefault(row[colmap["account_id"]], []).append(row)

    accounts = []
    for account_id, rows in rows_by_account.items():
        accounts.append(_build_history(account_id, rows, colmap, has, default_term))
    return Portfolio(tuple(accounts), label if label is not None else path.stem)


def _build_history(account_id, rows, colmap, has, default_term) -> LoanHistory:
    def get(row, name):
        return row[colmap[name]] if has[name] else ""

    parsed = []
    for row in rows:
        try:
            period = int(get(row, "period"))
        except ValueError:
            raise DataError(f"account {account_id}: bad period {get(row, 'period')!r}") from None
        parsed.append((period, row))
    parsed.sort(key=lambda item: item[0])
    periods = [p for p, _ in parsed]
    if periods != list(range(1, len(periods) + 1)):
        raise DataError(f"account {account_id}: periods {periods} are not contiguous from 1")

    records = []
    closure = Closure()
    rate = 0.0
    principal = None
    term = None
    for period, row in parsed:
        inst = _number(get(row, "instalment"), "instalment", account_id)
        rec = _number(get(row, "receipt"), "receipt", account_id)
        bal = _number(get(row, "balance"), "balance", account_id)
        if inst < 0 or rec < 0:
            raise DataError(f"account {account_id}: negative instalment or receipt at period {period}")
        if bal < 0:
            raise DataError(f"account {account_id}: negative balance at period {period}")
        rate = _number(get(row, "annual_rate"), "annual_rate", account_id)
        records.append(MonthlyRecord(period, inst, rec, bal))
        if closure.kind == OPEN:
            if _flag(get(row, "writeoff_flag"), "writeoff_flag", account_id):
                recovery = _number(get(row, "writeoff_recovery"), "writeoff_recovery", account_id)
                if recovery < 0:
                    raise DataError(f"account {account_id}: negative write-off recovery")
                closure = Closure(WRITTEN_OFF, period, recovery)
            elif _flag(get(row, "settle_flag"), "settle_flag", account_id):
                closure = Closure(SETTLED, period)
        if has["principal"] and get(row, "principal").strip():
            principal = _number(get(row, "principal"), "principal", account_id)
        if has["contractual_term"] and get(row, "contractual_term").strip():
            term = int(_number(get(row, "contractual_term"), "contractual_term", account_id))

    if principal is None:
        principal = _back_solve_principal(records[0], rate)
    return LoanHistory(
        account_id=account_id,
        contractual_term=term if term is not None else max(default_term, len(records)),
        principal=principal,
        annual_interest_rate=rate,
        records=tuple(records),
        closure=closure,
    )


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def portfolio_rows(p: Portfolio, extended: bool = True):
    """Canonical CSV rows (dicts) for a portfolio, in account then period order."""
    for acc in p:
        for rec in acc.records:
            wo = acc.written_off and acc.closure.period == rec.period
            st = acc.settled and acc.closure.period == rec.period
            row = {
                "account_id": acc.account_id,
                "period": str(rec.period),
                "instalment": _fmt(rec.instalment),
                "receipt": _fmt(rec.receipt),
                "balance": _fmt(rec.balance),
                "annual_rate": f"{acc.annual_interest_rate:.6g}",
                "writeoff_flag": "1" if wo else "0",
                "writeoff_recovery": _fmt(acc.closure.recovery_amount) if wo else "0.00",
                "settle_flag": "1" if st else "0",
            }
            if extended:
                row["principal"] = _fmt(acc.principal)
                row["contractual_term"] = str(acc.contractual_term)
            yield row


def write_portfolio(p: Portfolio, path, extended: bool = True) -> Path:
    path = Path(path)
    columns = CORE_COLUMNS + (EXTENDED_COLUMNS if extended else ())
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(portfolio_rows(p, extended))
    return path
