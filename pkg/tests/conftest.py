import numpy as np
import pytest

from nulldist import (
    DiscretePreLengthSpace,
    FiniteLengthSpace,
    Interval,
    WarpingFunction,
)


def random_pre_length_space(n: int, seed: int) -> tuple[DiscretePreLengthSpace, np.ndarray]:
    """Random valid instance: a weighted random DAG induces the causal relation
    (reachability), rho (longest-path weights, so the reverse triangle
    inequality holds by construction) and chrono (positive rho). tau follows
    the topological order with jitter."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    weights = np.full((n, n), -np.inf)
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < 0.55:
                w = 0.0 if rng.random() < 0.3 else float(rng.uniform(0.1, 1.0))
                weights[order[a], order[b]] = w
    # max-plus closure over the DAG
    rho = weights.copy()
    for k in range(n):
        via = rho[:, k][:, None] + rho[k, :][None, :]
        rho = np.maximum(rho, via)
    reach = np.isfinite(rho)
    causal = reach | np.eye(n, dtype=bool)
    rho_mat = np.where(reach, np.maximum(rho, 0.0), 0.0)
    np.fill_diagonal(rho_mat, 0.0)
    chrono = rho_mat > 0

    pts = rng.uniform(0.0, 1.0, (n, 2))
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    np.fill_diagonal(dist, 0.0)
    base = FiniteLengthSpace(tuple(range(n)), dist)

    pos = np.empty(n)
    pos[order] = np.arange(n)
    tau = pos + rng.uniform(0.0, 0.45, n)
    return DiscretePreLengthSpace(base, causal, chrono, rho_mat), tau


@pytest.fixture
def unit_interval():
    return Interval(0.0, 1.0)


@pytest.fixture
def unit_warping(unit_interval):
    return WarpingFunction.constant(1.0, unit_interval)
