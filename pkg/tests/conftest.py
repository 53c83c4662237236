import numpy as np
import pytest

from fhmdp import Action, FiniteHorizonMdp, load_drilling_model, uniform_actions


@pytest.fixture(scope="session")
def drilling() -> FiniteHorizonMdp:
    return load_drilling_model()


def make_random_model(
    rng: np.random.Generator,
    max_states: int = 3,
    max_actions: int = 3,
    min_states: int = 1,
    min_actions: int = 1,
    nonnegative_rewards: bool = True,
) -> FiniteHorizonMdp:
    """Random valid model with rng-driven sizes and normalized sparse rows."""
    state_count = int(rng.integers(min_states, max_states + 1))
    actions = []
    for _ in range(state_count):
        acts = []
        for _ in range(int(rng.integers(min_actions, max_actions + 1))):
            weights = rng.random(state_count) + 1e-3
            if state_count > 1 and rng.random() < 0.5:
                # Knock out some targets to exercise sparse rows.
                drop = rng.random(state_count) < 0.5
                if drop.all():
                    drop[int(rng.integers(0, state_count))] = False
                weights[drop] = 0.0
            row = weights / weights.sum()
            low = 0.0 if nonnegative_rewards else -100.0
            acts.append(
                Action(
                    reward=float(rng.uniform(low, 100.0)),
                    probabilities=tuple(float(p) for p in row),
                )
            )
        actions.append(tuple(acts))
    return FiniteHorizonMdp(actions=tuple(actions))


@pytest.fixture
def random_model():
    return make_random_model


def make_toy_model() -> FiniteHorizonMdp:
    """Fixed 2-state, 2-action model used for hand-checked cases."""
    return FiniteHorizonMdp(
        actions=uniform_actions(
            rewards=[[1.0, 0.5], [2.0, 3.0]],
            rows=[
                [[0.5, 0.5], [1.0, 0.0]],
                [[0.0, 1.0], [0.25, 0.75]],
            ],
        )
    )


@pytest.fixture
def toy_model() -> FiniteHorizonMdp:
    return make_toy_model()
