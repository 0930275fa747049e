"""
Capital-dependent Parrondo games.

Game A wins with probability p_A. Game B wins with p_B_zero when the
capital is a multiple of M and with p_B_other otherwise. Both lose on
their own, yet a random mixture (or some periodic alternations) wins.

The drift is exact: it is read off the stationary law of the capital
residue chain (mod M), extended by the phase of the schedule for periodic
alternations such as "AABB".

Example:
    spec = ParrondoSpec.canonical(epsilon=0.005)
    parrondo_drift(spec, 'A')        # -0.01
    parrondo_drift(spec, 'mixed')    # > 0
    parrondo_simulate(spec, 'B', steps=10**6, seed=1)

"""
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import SingularChain
from ..utils import make_rng

EPSILON = 0.005
BATCHES = 100


class ParrondoSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    p_A: float = Field(0.5 - EPSILON, ge=0, le=1)
    modulus: int = Field(3, ge=2)
    p_B_zero: float = Field(0.1 - EPSILON, ge=0, le=1)
    p_B_other: float = Field(0.75 - EPSILON, ge=0, le=1)
    mix_gamma: float = Field(0.5, ge=0, le=1)

    @classmethod
    def canonical(cls, epsilon=EPSILON, gamma=0.5):
        return cls(p_A=0.5 - epsilon, p_B_zero=0.1 - epsilon, p_B_other=0.75 - epsilon,
                   mix_gamma=gamma)


@dataclass(frozen=True)
class DriftEstimate:
    drift: float
    stderr: float
    steps: int


def _win_table(spec, game):
    """(L, M) win probabilities per schedule phase and capital residue."""
    M = spec.modulus
    p_B = np.full(M, spec.p_B_other)
    p_B[0] = spec.p_B_zero
    p_A = np.full(M, spec.p_A)
    if game == "mixed":
        return (spec.mix_gamma * p_A + (1 - spec.mix_gamma) * p_B)[None, :]
    if not game or set(game) - {"A", "B"}:
        raise ValueError("game must be 'A', 'B', 'mixed' or a schedule such as 'AABB'")

    return np.array([p_A if g == "A" else p_B for g in game])


def transition_matrix(spec, game):
    """Chain on (phase, residue), flattened phase-major."""
    table = _win_table(spec, game)
    L, M = table.shape
    P = np.zeros((L * M, L * M))
    for t in range(L):
        for r in range(M):
            i = t * M + r
            nxt = (t + 1) % L
            P[i, nxt * M + (r + 1) % M] += table[t, r]
            P[i, nxt * M + (r - 1) % M] += 1 - table[t, r]

    return P


def stationary_distribution(P):
    """Unique pi with pi P = pi, sum(pi) = 1; SingularChain if reducible."""
    n_comp, _ = connected_components(csr_matrix(P > 0), directed=True, connection="strong")
    if n_comp != 1:
        raise SingularChain("capital chain has %d communicating classes" % n_comp)

    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0

    return linalg.solve(A, b)


def parrondo_drift(spec, game):
    """Expected capital change per step at stationarity."""
    table = _win_table(spec, game)
    pi = stationary_distribution(transition_matrix(spec, game))

    return float(pi @ (2 * table.ravel() - 1))


def parrondo_simulate(spec, game, steps, seed):
    """Seeded Monte Carlo drift with a batch-means standard error.

    The run starts at capital 0 and phase 0.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    table = _win_table(spec, game)
    L, M = table.shape
    u = make_rng(seed).random(steps)

    wins = np.empty(steps, dtype=bool)
    r = 0
    for t in range(steps):
        w = u[t] < table[t % L, r]
        wins[t] = w
        r = (r + 1) % M if w else (r - 1) % M

    x = np.where(wins, 1.0, -1.0)
    nb = min(BATCHES, steps)
    if nb < 2:
        return DriftEstimate(float(x.mean()), float("nan"), steps)
    size = steps // nb
    means = x[:nb * size].reshape(nb, size).mean(axis=1)

    return DriftEstimate(float(x.mean()), float(means.std(ddof=1) / np.sqrt(nb)), steps)
