"""Finite-horizon Markov decision process model.

A model is a set of states, a nonempty set of actions per state, and for each
action an immediate reward plus a probability distribution over successor
states. Instances are immutable and validated on construction, so any model
you can hold is safe to solve, evaluate, or share across threads.

Indices are 0-based throughout the in-memory API. Serialized files and
printed reports use 1-based state/action numbering (see ``fhmdp.formats``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import ModelValidationError

#: Allowed deviation of a transition row's probability sum from 1.
PROBABILITY_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Action:
    """One admissible decision in a state.

    ``reward`` is the expected immediate payoff for taking the action;
    ``probabilities`` is the dense distribution over successor states and
    must have one entry per model state. ``label`` and ``metadata`` carry
    descriptive information only (e.g. a feed rate in mm/rev); nothing in
    the solver reads them.
    """

    reward: float
    probabilities: tuple[float, ...]
    label: str = ""
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "reward", float(self.reward))
        object.__setattr__(
            self, "probabilities", tuple(float(p) for p in self.probabilities)
        )

    @cached_property
    def support(self) -> tuple[tuple[int, float], ...]:
        """Nonzero ``(state, probability)`` pairs in ascending state order."""
        return tuple((j, p) for j, p in enumerate(self.probabilities) if p != 0.0)


@dataclass(frozen=True)
class FiniteHorizonMdp:
    """Validated decision model: per-state actions with rewards and transitions.

    ``actions[i]`` lists the actions available in state ``i``. Construction
    checks every invariant and raises :class:`ModelValidationError` with a
    1-based state/action reference on the first violation:

    * at least one state, and at least one action per state,
    * every transition row has exactly ``state_count`` entries,
    * probabilities are finite, nonnegative, and sum to 1 within
      ``PROBABILITY_TOLERANCE`` (exactly rounded sum via ``math.fsum``),
    * rewards are finite.

    ``reward_unit`` is a free-text tag carried through to reports; the solver
    never converts units.
    """

    actions: tuple[tuple[Action, ...], ...]
    state_labels: tuple[str, ...] | None = None
    state_metadata: tuple[Mapping[str, object], ...] | None = None
    reward_unit: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "actions", tuple(tuple(row) for row in self.actions)
        )
        if self.state_labels is not None:
            object.__setattr__(self, "state_labels", tuple(self.state_labels))
        if self.state_metadata is not None:
            object.__setattr__(self, "state_metadata", tuple(self.state_metadata))
        self._validate()

    def _validate(self) -> None:
        n = len(self.actions)
        if n == 0:
            raise ModelValidationError("model must have at least one state")
        for i, acts in enumerate(self.actions):
            if len(acts) == 0:
                raise ModelValidationError(f"state {i + 1} has no actions")
            for k, act in enumerate(acts):
                if not isinstance(act, Action):
                    raise ModelValidationError(
                        f"state {i + 1}, action {k + 1}: expected an Action"
                    )
                self._validate_action(i, k, act, n)
        for name, extra in (
            ("state_labels", self.state_labels),
            ("state_metadata", self.state_metadata),
        ):
            if extra is not None and len(extra) != n:
                raise ModelValidationError(
                    f"{name} has {len(extra)} entries for {n} states"
                )

    @staticmethod
    def _validate_action(i: int, k: int, act: Action, state_count: int) -> None:
        where = f"state {i + 1}, action {k + 1}"
        if not math.isfinite(act.reward):
            raise ModelValidationError(f"{where}: reward {act.reward!r} is not finite")
        row = act.probabilities
        if len(row) != state_count:
            raise ModelValidationError(
                f"{where}: transition row has {len(row)} entries, expected {state_count}"
            )
        for j, p in enumerate(row):
            if not math.isfinite(p):
                raise ModelValidationError(
                    f"{where}: probability to state {j + 1} is not finite"
                )
            if p < 0.0:
                raise ModelValidationError(
                    f"{where}: negative probability {p!r} to state {j + 1}"
                )
        total = math.fsum(row)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ModelValidationError(
                f"{where}: transition probabilities sum to {total!r}, "
                f"expected 1 within {PROBABILITY_TOLERANCE}"
            )

    @property
    def state_count(self) -> int:
        return len(self.actions)

    def action_count(self, state: int) -> int:
        return len(self.actions[state])

    def state_label(self, state: int) -> str:
        if self.state_labels is None:
            return str(state + 1)
        return self.state_labels[state]


def uniform_actions(
    rewards: Sequence[Sequence[float]],
    rows: Sequence[Sequence[Sequence[float]]],
) -> tuple[tuple[Action, ...], ...]:
    """Build the ``actions`` table from parallel reward/transition nestings.

    Convenience for tests and programmatic model construction:
    ``rewards[i][k]`` and ``rows[i][k]`` describe action ``k`` of state ``i``.
    """
    out: list[tuple[Action, ...]] = []
    for state_rewards, state_rows in zip(rewards, rows, strict=True):
        out.append(
            tuple(
                Action(reward=q, probabilities=tuple(row))
                for q, row in zip(state_rewards, state_rows, strict=True)
            )
        )
    return tuple(out)


def validate_terminal_values(
    terminal_values: Iterable[float] | None, state_count: int
) -> tuple[float, ...]:
    """Return the terminal value vector, defaulting to all zeros.

    Raises ``ValueError`` on a length mismatch.
    """
    if terminal_values is None:
        return (0.0,) * state_count
    values = tuple(float(v) for v in terminal_values)
    if len(values) != state_count:
        raise ValueError(
            f"terminal_values has {len(values)} entries for {state_count} states"
        )
    return values
