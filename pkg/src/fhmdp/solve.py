"""Backward-induction solver and fixed-policy evaluation.

Values are indexed ``values[n][i]`` for epochs ``n = 0..N`` (row ``N`` is the
terminal vector); decisions are indexed ``decisions[n][i]`` for ``n = 0..N-1``
with 0-based action indices. The recursion fills the table from the terminal
row toward epoch 0, choosing at each epoch and state the action maximizing
the immediate reward plus the probability-weighted next-epoch values.

All arithmetic is double precision with a fixed summation order (ascending
state index), so identical inputs always produce bitwise-identical outputs,
and the solver, :func:`one_step_lookahead`, and :func:`evaluate_policy`
agree exactly on the same model.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Sequence

from .model import Action, FiniteHorizonMdp, validate_terminal_values

#: values[epoch][state], epochs 0..N; row N holds the terminal values.
ValueTable = tuple[tuple[float, ...], ...]

#: decisions[epoch][state], epochs 0..N-1; entries are 0-based action indices.
DecisionTable = tuple[tuple[int, ...], ...]

#: A decision rule per epoch and state; same layout as DecisionTable.
Policy = DecisionTable


@dataclass(frozen=True)
class SolveResult:
    """Optimal value table and the decisions achieving it."""

    values: ValueTable
    decisions: DecisionTable

    @property
    def horizon(self) -> int:
        return len(self.decisions)

    @property
    def state_count(self) -> int:
        return len(self.values[0])


def _lookahead(action: Action, next_values: Sequence[float]) -> float:
    # Fixed ascending-index accumulation; zero-probability terms are skipped
    # (adding 0.0 * v would not change the rounded result for finite v).
    total = action.reward
    for j, p in action.support:
        total += p * next_values[j]
    return total


def one_step_lookahead(
    mdp: FiniteHorizonMdp,
    state: int,
    action: int,
    next_values: Sequence[float],
) -> float:
    """Immediate reward of ``action`` in ``state`` plus expected next value.

    ``next_values`` must hold one value per state. Raises ``ValueError`` for
    an out-of-range state or action or a next-value length mismatch.
    """
    if not 0 <= state < mdp.state_count:
        raise ValueError(f"state index {state} out of range 0..{mdp.state_count - 1}")
    if not 0 <= action < mdp.action_count(state):
        raise ValueError(
            f"action index {action} out of range 0..{mdp.action_count(state) - 1} "
            f"for state {state}"
        )
    if len(next_values) != mdp.state_count:
        raise ValueError(
            f"next_values has {len(next_values)} entries for {mdp.state_count} states"
        )
    return _lookahead(mdp.actions[state][action], next_values)


def _check_horizon(horizon: int) -> int:
    horizon = operator.index(horizon)
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    return horizon


def solve_backward_induction(
    mdp: FiniteHorizonMdp,
    horizon: int,
    terminal_values: Sequence[float] | None = None,
) -> SolveResult:
    """Solve an ``horizon``-stage model exactly.

    Returns the full value table (epochs ``0..horizon``) and the maximizing
    decision per epoch and state. Ties between actions go to the lowest
    action index. ``terminal_values`` defaults to all zeros.
    """
    horizon = _check_horizon(horizon)
    terminal = validate_terminal_values(terminal_values, mdp.state_count)

    value_rows: list[tuple[float, ...]] = [terminal]
    decision_rows: list[tuple[int, ...]] = []
    current = terminal
    for _ in range(horizon):
        row: list[float] = []
        chosen: list[int] = []
        for acts in mdp.actions:
            best_value = _lookahead(acts[0], current)
            best_action = 0
            for k in range(1, len(acts)):
                value = _lookahead(acts[k], current)
                if value > best_value:
                    best_value = value
                    best_action = k
            row.append(best_value)
            chosen.append(best_action)
        current = tuple(row)
        value_rows.append(current)
        decision_rows.append(tuple(chosen))

    value_rows.reverse()
    decision_rows.reverse()
    return SolveResult(values=tuple(value_rows), decisions=tuple(decision_rows))


def _check_policy(
    mdp: FiniteHorizonMdp, policy: Sequence[Sequence[int]], horizon: int
) -> DecisionTable:
    if len(policy) != horizon:
        raise ValueError(f"policy has {len(policy)} epochs, expected {horizon}")
    checked: list[tuple[int, ...]] = []
    for n, row in enumerate(policy):
        if len(row) != mdp.state_count:
            raise ValueError(
                f"policy row {n} has {len(row)} entries for {mdp.state_count} states"
            )
        for i, k in enumerate(row):
            if not 0 <= k < mdp.action_count(i):
                raise ValueError(
                    f"policy row {n}, state {i}: action index {k} out of range "
                    f"0..{mdp.action_count(i) - 1}"
                )
        checked.append(tuple(operator.index(k) for k in row))
    return tuple(checked)


def _evaluate(
    mdp: FiniteHorizonMdp,
    policy: Sequence[Sequence[int]],
    terminal: tuple[float, ...],
) -> ValueTable:
    # Same recursion as the solver with the max replaced by the policy's choice.
    value_rows: list[tuple[float, ...]] = [terminal]
    current = terminal
    for n in range(len(policy) - 1, -1, -1):
        row = tuple(
            _lookahead(mdp.actions[i][policy[n][i]], current)
            for i in range(mdp.state_count)
        )
        value_rows.append(row)
        current = row
    value_rows.reverse()
    return tuple(value_rows)


def evaluate_policy(
    mdp: FiniteHorizonMdp,
    policy: Sequence[Sequence[int]],
    horizon: int,
    terminal_values: Sequence[float] | None = None,
) -> ValueTable:
    """Value table of a fixed policy (0-based action index per epoch/state).

    For the policy extracted by :func:`solve_backward_induction` this
    reproduces the solver's value table exactly. Raises ``ValueError`` on
    any dimension mismatch or out-of-range action index.
    """
    horizon = _check_horizon(horizon)
    checked = _check_policy(mdp, policy, horizon)
    terminal = validate_terminal_values(terminal_values, mdp.state_count)
    return _evaluate(mdp, checked, terminal)
