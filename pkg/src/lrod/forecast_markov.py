"""Eight-state Markovian defaults.

States x0..x5 are g1 levels 0..5, x6 collects g1 >= 6 (semi-absorbing) and x7
is write-off (absorbing). Transition probabilities are pooled repeated-chain
MLEs. Simulated paths are mapped back to receipts through the one-period
level change:

    delta < 0  ->  R = I_c * (1 - delta)     (cure |delta| levels)
    delta = 0  ->  R = I_c
    delta > 0  ->  R = 0

with receipts zeroed while in x6 and from the first entry to x7 onwards.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .amort import AmortContext
from .delinquency import DEFAULT_PAYMENT_THRESHOLD
from .errors import DomainError, NothingToForecastError, PreconditionError
from .portfolio import LoanHistory, Portfolio

N_STATES = 8
SEMI_ABSORBING = 6
WRITE_OFF = 7
STATE_LABELS = tuple(f"x{i}" for i in range(N_STATES))
ROW_TOL = 1e-9


def state_of(g1_level: int, written_off: bool = False) -> int:
    if g1_level < 0:
        raise DomainError(f"g1 level must be non-negative, got {g1_level}")
    if written_off:
        return WRITE_OFF
    return min(int(g1_level), SEMI_ABSORBING)


def effective_level(state: int) -> int:
    return min(state, SEMI_ABSORBING)


def structural_zeros() -> np.ndarray:
    """Mask of transitions that cannot occur: more than one level up from x0..x5."""
    mask = np.zeros((N_STATES, N_STATES), dtype=bool)
    for i in range(SEMI_ABSORBING):
        for j in range(i + 2, WRITE_OFF):
            mask[i, j] = True
    mask[WRITE_OFF, :WRITE_OFF] = True
    return mask


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    p: np.ndarray
    counts: np.ndarray = field(default=None)

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (N_STATES, N_STATES):
            raise DomainError(f"transition matrix must be {N_STATES}x{N_STATES}, got {p.shape}")
        if np.any(p < 0) or np.any(~np.isfinite(p)):
            raise DomainError("transition probabilities must be finite and non-negative")
        sums = p.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > ROW_TOL):
            raise DomainError(f"rows must sum to 1, got {sums}")
        if np.any(p[structural_zeros()] != 0.0):
            raise DomainError("matrix violates the single-step-increase structural zeros")
        if p[WRITE_OFF, WRITE_OFF] != 1.0:
            raise DomainError("write-off state must be absorbing")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        counts = np.zeros((N_STATES, N_STATES), dtype=np.int64) if self.counts is None \
            else np.array(self.counts, dtype=np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        cum = np.cumsum(p, axis=1)
        for i in range(N_STATES):
            # Close each row at its last reachable state so rounding in the
            # cumulative sum can never select a zero-probability tail state.
            last = int(np.flatnonzero(p[i])[-1])
            cum[i, last:] = 1.0
        object.__setattr__(self, "_cum_rows", [row.tolist() for row in cum])
        object.__setattr__(self, "_rows", [row.tolist() for row in p])

    def next_state(self, state: int, u: float) -> int:
        """Inverse-CDF step: first state whose cumulative probability reaches ``u``.

        A ``u`` exactly on a boundary goes to the lower index; zero-probability
        states are stepped over, which only matters at ``u = 0``.
        """
        j = bisect.bisect_left(self._cum_rows[state], u)
        row = self._rows[state]
        while row[j] == 0.0:
            j += 1
        return j

    def vector(self) -> list:
        """Entries outside the structural zeros, row-major."""
        return self.p[~structural_zeros()].tolist()


def account_states(account: LoanHistory, p: float = DEFAULT_PAYMENT_THRESHOLD) -> list:
    """Observed state sequence X_1..X_t0, entering x7 at the write-off period."""
    wo = account.closure.period if account.written_off else None
    return [state_of(level, wo is not None and t >= wo)
            for t, level in enumerate(account.levels(p), start=1)]


def count_transitions(sequences: Sequence[Sequence[int]]) -> np.ndarray:
    counts = np.zeros((N_STATES, N_STATES), dtype=np.int64)
    for seq in sequences:
        for a, b in zip(seq[:-1], seq[1:]):
            counts[a, b] += 1
    return counts


def matrix_from_counts(counts) -> TransitionMatrix:
    """``p_ij = n_ij / n_i``; rows never left are self-loops."""
    counts = np.asarray(counts, dtype=np.int64)
    totals = counts.sum(axis=1)
    p = np.zeros((N_STATES, N_STATES))
    for i in range(N_STATES):
        if totals[i] == 0:
            p[i, i] = 1.0
        else:
            p[i] = counts[i] / totals[i]
    return TransitionMatrix(p, counts)


def estimate_transition_matrix(sample: Portfolio, p: float = DEFAULT_PAYMENT_THRESHOLD) -> TransitionMatrix:
    if len(sample) == 0:
        raise DomainError("cannot estimate a transition matrix from an empty sample")
    return matrix_from_counts(count_transitions(account_states(acc, p) for acc in sample))


def simulate_state_path(start: int, m: TransitionMatrix, n: int, rng) -> list:
    if n < 0:
        raise DomainError("path length must be non-negative")
    path = []
    state = start
    for u in rng.random(n).tolist() if n else ():
        state = m.next_state(state, u)
        path.append(state)
    return path


def markov_receipts(start_state: int, path: Sequence[int], instalments) -> np.ndarray:
    inst = np.asarray(instalments, dtype=float)
    out = np.zeros(len(path))
    prev = effective_level(start_state) if start_state != WRITE_OFF else None
    for t, state in enumerate(path):
        if state == WRITE_OFF or prev is None:
            break
        if state == SEMI_ABSORBING:
            # Prudence: treat residence in x6 as still worsening.
            out[t] = 0.0
        else:
            delta = state - prev
            if delta < 0:
                out[t] = inst[t] * (1 - delta)
            elif delta == 0:
                out[t] = inst[t]
        prev = effective_level(state)
    return out


def complete_markov(account: LoanHistory, m: TransitionMatrix, rng,
                    p: float = DEFAULT_PAYMENT_THRESHOLD):
    """Return ``(instalments, receipts, path)`` over the full contractual term."""
    if not account.is_open:
        raise PreconditionError(f"account {account.account_id} is closed; closed accounts are not forecast")
    t0, tc = account.t0, account.contractual_term
    if t0 >= tc:
        raise NothingToForecastError(f"account {account.account_id} is observed to term")
    n = tc - t0
    ctx = AmortContext.from_balance(float(account.balances[-1]), account.annual_interest_rate, n)
    levels = account.levels(p)
    start = state_of(levels[-1] if levels else 0)
    path = simulate_state_path(start, m, n, rng)
    future_inst = np.full(n, ctx.level_instalment)
    forecast = markov_receipts(start, path, future_inst)
    inst = np.concatenate([account.instalments, future_inst])
    rec = np.concatenate([account.receipts, forecast])
    return inst, rec, path


def forecast_markov(account: LoanHistory, m: TransitionMatrix, rng,
                    p: float = DEFAULT_PAYMENT_THRESHOLD) -> np.ndarray:
    """Receipts for t = 1..t_c: observed history followed by a chain-driven forecast."""
    return complete_markov(account, m, rng, p)[1]


def display_rows(m: TransitionMatrix, decimals: int = 4) -> np.ndarray:
    """Rows rounded so that each displayed row still sums to exactly one.

    Largest-remainder rounding on integer units of ``10**-decimals``.
    """
    unit = 10 ** decimals
    out = np.zeros_like(m.p)
    for i, row in enumerate(m.p):
        scaled = row * unit
        base = np.floor(scaled + 1e-9)
        short = int(round(unit - base.sum()))
        if short > 0:
            order = np.argsort(-(scaled - base), kind="stable")
            base[order[:short]] += 1
        out[i] = base / unit
    return out


def format_matrix(m: TransitionMatrix, decimals: int = 4) -> str:
    rows = display_rows(m, decimals)
    width = decimals + 3
    header = " " * 4 + "".join(f"{lab:>{width}}" for lab in STATE_LABELS)
    lines = [header]
    for label, row in zip(STATE_LABELS, rows):
        lines.append(f"{label:<4}" + "".join(f"{v:>{width}.{decimals}f}" for v in row))
    return "\n".join(lines)
