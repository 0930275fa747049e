"""
Operational echelon: finite-horizon two-player stochastic games.

Each funded operation is a stage-structured game over K stages. The stage
payoff decomposes into three terms: the tactical equilibrium value of the
action pair, a state term, and a context term set by the deception
mechanism and the technology level. Games are solved by backward induction
and can be replayed with seeded trajectories.

Example:
    spec = StochasticGameSpec(states=('quiet', 'alert'), actions_d=('watch', 'block'),
                              actions_a=('probe', 'wait'), horizon=3,
                              transition=T, stage_payoff_state=[0.0, -1.0])
    sol = solve_operational(spec)
    traj = simulate(spec, sol, seed=42)

Notes:
    Arrays use 0-based stage indices: value[k] is the value at stage k+1 and
    value[K] is the terminal row (all zeros).

"""
import logging
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .errors import IndexOutOfRange, NonFiniteEntry, NonStochasticRow, ShapeMismatch
from .kernel import (BimatrixGame, EquilibriumSelectionRule, MatrixGame,
                     MixedStrategy, solve_bimatrix, solve_zero_sum)
from .technical import TechLevel
from .utils import make_rng, run_jobs

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
MAX_HORIZON = 64


@dataclass(frozen=True)
class StochasticGameSpec:
    states: tuple
    actions_d: tuple
    actions_a: tuple
    horizon: int
    # (S, A_d, A_a, S) successor distributions
    transition: np.ndarray
    stage_payoff_state: np.ndarray
    stage_payoff_context: float = 0.0
    # (A_d, A_a, 2) tactical equilibrium values (U_dT, U_aT)
    tactical_term: np.ndarray = None
    deception_index: str = ""
    tech: TechLevel = field(default_factory=TechLevel)
    initial_state: int = 0
    general_sum: bool = False
    stage_labels: tuple = ()

    def __post_init__(self):
        S, Ad, Aa = len(self.states), len(self.actions_d), len(self.actions_a)
        if min(S, Ad, Aa) < 1:
            raise ShapeMismatch("states and action sets must be nonempty")
        if not 1 <= self.horizon <= MAX_HORIZON:
            raise ValueError("horizon must lie in [1, %d]" % MAX_HORIZON)

        T = np.asarray(self.transition, dtype=float)
        if T.shape != (S, Ad, Aa, S):
            raise ShapeMismatch("transition shape %s, expected %s" % (T.shape, (S, Ad, Aa, S)))
        bad = np.argwhere((np.abs(T.sum(axis=-1) - 1.0) > TOLERANCE)
                          | np.any(T < -TOLERANCE, axis=-1))
        if bad.size:
            s, i, j = bad[0]
            raise NonStochasticRow("row (%s, %s, %s) sums to %.12g"
                                   % (self.states[s], self.actions_d[i], self.actions_a[j],
                                      T[s, i, j].sum()))

        u = np.asarray(self.stage_payoff_state, dtype=float)
        if u.shape != (S,):
            raise ShapeMismatch("one state payoff per state required")
        term = (np.zeros((Ad, Aa, 2)) if self.tactical_term is None
                else np.asarray(self.tactical_term, dtype=float))
        if term.shape != (Ad, Aa, 2):
            raise ShapeMismatch("tactical term shape %s, expected %s" % (term.shape, (Ad, Aa, 2)))
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(term))
                and np.isfinite(self.stage_payoff_context)):
            raise NonFiniteEntry("operational payoffs must be finite")
        if not 0 <= self.initial_state < S:
            raise IndexOutOfRange("initial state %d" % self.initial_state)

        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "actions_d", tuple(self.actions_d))
        object.__setattr__(self, "actions_a", tuple(self.actions_a))
        object.__setattr__(self, "transition", np.clip(T, 0.0, None))
        object.__setattr__(self, "stage_payoff_state", u)
        object.__setattr__(self, "tactical_term", term)
        object.__setattr__(self, "stage_payoff_context", float(self.stage_payoff_context))

    @property
    def shape(self):
        return len(self.states), len(self.actions_d), len(self.actions_a)

    def with_tactical_term(self, term):
        return replace(self, tactical_term=term)


@dataclass(frozen=True)
class StagePolicy:
    """Mixed action of one player per (stage, state); probs is (K, S, A)."""

    probs: np.ndarray

    def at(self, k, s):
        """Mixed action at stage k (1-based) and state index s."""
        return MixedStrategy(self.probs[k - 1, s])


@dataclass(frozen=True)
class OperationalSolution:
    policy_d: StagePolicy
    policy_a: StagePolicy
    # (K+1, S), row K is terminal
    value: np.ndarray
    value_a: np.ndarray
    cumulative_value_d: float
    cumulative_value_a: float
    epsilon: float = 0.0

    def value_at(self, k, s):
        return float(self.value[k - 1, s])


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray
    actions_d: np.ndarray
    actions_a: np.ndarray
    payoffs: np.ndarray

    @property
    def cumulative(self):
        return float(self.payoffs.sum())


# --- Stage payoffs --- #


def _check_index(spec, s, a_d, a_a):
    S, Ad, Aa = spec.shape
    if not (0 <= s < S and 0 <= a_d < Ad and 0 <= a_a < Aa):
        raise IndexOutOfRange("(s=%s, a_d=%s, a_a=%s) outside %s" % (s, a_d, a_a, spec.shape))


def stage_payoff(spec, s, a_d, a_a):
    """Defender stage payoff: tactical + state + context."""
    _check_index(spec, s, a_d, a_a)

    return float(spec.tactical_term[a_d, a_a, 0] + spec.stage_payoff_state[s]
                 + spec.stage_payoff_context)


def stage_matrices(spec):
    """(S, A_d, A_a) stage payoffs of both players."""
    R_d = (spec.tactical_term[None, :, :, 0] + spec.stage_payoff_state[:, None, None]
           + spec.stage_payoff_context)
    if spec.general_sum:
        R_a = (spec.tactical_term[None, :, :, 1] - spec.stage_payoff_state[:, None, None]
               - spec.stage_payoff_context)
    else:
        R_a = -R_d

    return R_d, R_a


# --- Solvers --- #


def solve_operational(spec, selection=EquilibriumSelectionRule.DEFENDER_OPTIMAL):
    """Backward induction from stage K down to stage 1."""
    S, Ad, Aa = spec.shape
    K = spec.horizon
    V = np.zeros((K + 1, S))
    Va = np.zeros((K + 1, S))
    pol_d = np.zeros((K, S, Ad))
    pol_a = np.zeros((K, S, Aa))
    R_d, R_a = stage_matrices(spec)
    eps = 0.0

    for k in range(K - 1, -1, -1):
        cont_d = spec.transition @ V[k + 1]
        cont_a = spec.transition @ Va[k + 1]
        for s in range(S):
            M = R_d[s] + cont_d[s]
            if spec.general_sum:
                prof = solve_bimatrix(BimatrixGame(M, R_a[s] + cont_a[s]), selection)
            else:
                prof = solve_zero_sum(MatrixGame(M))
            V[k, s] = prof.value_d
            Va[k, s] = prof.value_a
            pol_d[k, s] = prof.strategy_d.weights
            pol_a[k, s] = prof.strategy_a.weights
            eps = max(eps, prof.epsilon)

    s0 = spec.initial_state
    logger.debug("backward induction over %d stages x %d states, value %.6f (eps %.1e)",
                 K, S, V[0, s0], eps)
    return OperationalSolution(
        policy_d=StagePolicy(pol_d),
        policy_a=StagePolicy(pol_a),
        value=V,
        value_a=Va,
        cumulative_value_d=float(V[0, s0]),
        cumulative_value_a=float(Va[0, s0]),
        epsilon=eps,
    )


def evaluate_policies(spec, probs_d, probs_a):
    """Values (K+1, S) of both players under fixed stage policies."""
    S, Ad, Aa = spec.shape
    K = spec.horizon
    probs_d = np.broadcast_to(np.asarray(probs_d, dtype=float), (K, S, Ad))
    probs_a = np.broadcast_to(np.asarray(probs_a, dtype=float), (K, S, Aa))
    R_d, R_a = stage_matrices(spec)
    V = np.zeros((K + 1, S))
    Va = np.zeros((K + 1, S))
    for k in range(K - 1, -1, -1):
        M_d = R_d + spec.transition @ V[k + 1]
        M_a = R_a + spec.transition @ Va[k + 1]
        V[k] = np.einsum("si,sij,sj->s", probs_d[k], M_d, probs_a[k])
        Va[k] = np.einsum("si,sij,sj->s", probs_d[k], M_a, probs_a[k])

    return V, Va


def verify_operational(spec, sol, selection=EquilibriumSelectionRule.DEFENDER_OPTIMAL):
    """Largest gap between recorded values and re-solved stage games."""
    R_d, R_a = stage_matrices(spec)
    gap = 0.0
    for k in range(spec.horizon):
        cont_d = spec.transition @ sol.value[k + 1]
        cont_a = spec.transition @ sol.value_a[k + 1]
        for s in range(len(spec.states)):
            M = R_d[s] + cont_d[s]
            if spec.general_sum:
                v = solve_bimatrix(BimatrixGame(M, R_a[s] + cont_a[s]), selection).value_d
            else:
                v = solve_zero_sum(MatrixGame(M)).value_d
            gap = max(gap, abs(v - sol.value[k, s]))

    return gap


# --- Simulation --- #


def _draw(rng, p):
    idx = int(np.searchsorted(np.cumsum(p), rng.random(), side="right"))
    return min(idx, len(p) - 1)


def simulate(spec, sol, seed):
    """Sample one trajectory; identical seeds give identical trajectories."""
    S, Ad, Aa = spec.shape
    K = spec.horizon
    if sol.policy_d.probs.shape != (K, S, Ad) or sol.policy_a.probs.shape != (K, S, Aa):
        raise ShapeMismatch("solution does not match the game dimensions")

    rng = make_rng(seed)
    states = np.zeros(K, dtype=int)
    acts_d = np.zeros(K, dtype=int)
    acts_a = np.zeros(K, dtype=int)
    payoffs = np.zeros(K)
    s = spec.initial_state
    for k in range(K):
        a_d = _draw(rng, sol.policy_d.probs[k, s])
        a_a = _draw(rng, sol.policy_a.probs[k, s])
        states[k], acts_d[k], acts_a[k] = s, a_d, a_a
        payoffs[k] = stage_payoff(spec, s, a_d, a_a)
        s = _draw(rng, spec.transition[s, a_d, a_a])

    return Trajectory(states, acts_d, acts_a, payoffs)


def simulate_batch(spec, sol, seeds, njobs=1):
    """Trajectories for many seeds, merged in seed order."""
    return run_jobs(partial(simulate, spec, sol), list(seeds), njobs)


def trajectories_to_arrays(trajectories):
    """Stack trajectories into arrays suitable for save_h5."""
    return {
        "state": np.stack([t.states for t in trajectories]),
        "action_d": np.stack([t.actions_d for t in trajectories]),
        "action_a": np.stack([t.actions_a for t in trajectories]),
        "payoff": np.stack([t.payoffs for t in trajectories]),
        "cumulative": np.array([t.cumulative for t in trajectories]),
    }
