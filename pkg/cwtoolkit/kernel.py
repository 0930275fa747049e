"""
Finite two-player games and their equilibrium solvers.

This is the substrate every echelon calls into: zero-sum matrix games are
solved by linear programming (a small tableau simplex with Bland's rule,
over exact rationals when all entries are integers or Fractions), general
bimatrix games by support enumeration, and large zero-sum games can be
approximated with fictitious play.

Example:
    from cwtoolkit.kernel import MatrixGame, solve_zero_sum
    prof = solve_zero_sum(MatrixGame([[1, -1], [-1, 1]]))
    prof.value_d, prof.strategy_d.weights   # 0.0, [0.5, 0.5]

Notes:
    The defender is always the row player and the maximizer. For matrix
    games the attacker receives the negated payoff.

"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import (DegenerateGame, EnumerationCapExceeded, NonFiniteEntry,
                     ShapeMismatch)

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
ENUMERATION_CAP = 64


class EquilibriumSelectionRule(Enum):
    DEFENDER_OPTIMAL = "defender_optimal"
    ATTACKER_OPTIMAL = "attacker_optimal"
    WELFARE = "welfare"
    FIRST = "first"


def _as_grid(payoff):
    """Return (grid, exact) for a 2-D payoff table."""
    arr = np.asarray(payoff)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatch("payoff must be a non-empty 2-D grid, got shape %s"
                            % (arr.shape,))

    if arr.dtype == object:
        exact = all(isinstance(v, (int, np.integer, Fraction)) and not isinstance(v, bool)
                    for v in arr.flat)
    else:
        exact = np.issubdtype(arr.dtype, np.integer)

    if exact:
        # python ints keep the rational pivots from overflowing int64
        grid = [[v if isinstance(v, Fraction) else Fraction(int(v)) for v in row] for row in arr]
        return np.array(grid, dtype=object), True

    arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry("payoff grid holds non-finite entries")

    return arr, False


def _to_float(grid):
    return np.asarray(grid, dtype=float)


@dataclass(frozen=True)
class MatrixGame:
    """Zero-sum game; `payoff` is the defender's gain."""

    payoff: np.ndarray
    exact: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid, exact = _as_grid(self.payoff)
        object.__setattr__(self, "payoff", grid)
        object.__setattr__(self, "exact", exact)

    @property
    def rows(self):
        return self.payoff.shape[0]

    @property
    def cols(self):
        return self.payoff.shape[1]

    def as_bimatrix(self):
        M = _to_float(self.payoff)
        return BimatrixGame(M, -M)


@dataclass(frozen=True)
class BimatrixGame:
    """General-sum game (payoff_d, payoff_a) with identical shapes."""

    payoff_d: np.ndarray
    payoff_a: np.ndarray

    def __post_init__(self):
        d, _ = _as_grid(self.payoff_d)
        a, _ = _as_grid(self.payoff_a)
        if d.shape != a.shape:
            raise ShapeMismatch("payoff shapes differ: %s vs %s" % (d.shape, a.shape))
        object.__setattr__(self, "payoff_d", _to_float(d))
        object.__setattr__(self, "payoff_a", _to_float(a))

    @property
    def shape(self):
        return self.payoff_d.shape


@dataclass(frozen=True)
class MixedStrategy:
    """Probability weights over an action set."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("mixed strategy needs a non-empty 1-D weight vector")
        if np.any(w < -TOLERANCE) or abs(w.sum() - 1.0) > TOLERANCE:
            raise ValueError("weights %s are not a distribution" % w)
        w = np.clip(w, 0.0, None)
        object.__setattr__(self, "weights", w / w.sum())

    @classmethod
    def pure(cls, size, index):
        w = np.zeros(size)
        w[index] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, size):
        return cls(np.full(size, 1.0 / size))

    @property
    def support(self):
        return tuple(int(i) for i in np.flatnonzero(self.weights > TOLERANCE))

    def __len__(self):
        return self.weights.size


@dataclass(frozen=True)
class EquilibriumProfile:
    strategy_d: MixedStrategy
    strategy_a: MixedStrategy
    value_d: float
    value_a: float
    epsilon: float
    degenerate: bool = False


# --- Certificates --- #


def _gains(A, B, x, y):
    """Best-response gains of both players at (x, y)."""
    Ay = A @ y
    xB = x @ B

    return Ay.max() - x @ Ay, xB.max() - xB @ y


def exploitability(game, profile):
    """Max unilateral improvement available to either player (>= 0)."""
    x = profile.strategy_d.weights
    y = profile.strategy_a.weights
    rows, cols = game.shape
    if x.size != rows or y.size != cols:
        raise ShapeMismatch("profile (%d, %d) does not fit game %s"
                            % (x.size, y.size, game.shape))
    gain_d, gain_a = _gains(game.payoff_d, game.payoff_a, x, y)

    return float(max(gain_d, gain_a, 0.0))


def _profile(A, B, x, y, degenerate=False):
    gain_d, gain_a = _gains(A, B, x, y)
    return EquilibriumProfile(
        strategy_d=MixedStrategy(x),
        strategy_a=MixedStrategy(y),
        value_d=float(x @ A @ y),
        value_a=float(x @ B @ y),
        epsilon=float(max(gain_d, gain_a, 0.0)),
        degenerate=degenerate,
    )


# --- Zero-sum games (simplex) --- #


def _pivot(T, row, col):
    T[row] = T[row] / T[row, col]
    factor = T[:, col].copy()
    factor[row] = 0
    T -= np.multiply.outer(factor, T[row])


def _simplex(M, exact):
    """Solve max 1'y s.t. M y <= 1, y >= 0 for a strictly positive M.

    Returns the primal y, the dual prices u (shadow prices of the rows)
    and the optimum. Entering and leaving variables follow Bland's rule.
    """
    m, n = M.shape
    if exact:
        T = np.full((m + 1, n + m + 1), Fraction(0), dtype=object)
        one, tol = Fraction(1), 0
    else:
        T = np.zeros((m + 1, n + m + 1))
        one, tol = 1.0, TOLERANCE

    T[:m, :n] = M
    for i in range(m):
        T[i, n + i] = one
        T[i, -1] = one
    T[m, :n] = -one
    basis = list(range(n, n + m))

    while True:
        entering = np.flatnonzero(np.asarray(T[m, :-1] < -tol, dtype=bool))
        if entering.size == 0:
            break
        col = int(entering[0])

        column = T[:m, col]
        rows = np.flatnonzero(np.asarray(column > tol, dtype=bool))
        ratios = T[rows, -1] / column[rows]
        best = min(ratios)
        ties = rows[np.asarray(ratios - best <= tol, dtype=bool)]
        row = int(min(ties, key=lambda i: basis[i]))

        _pivot(T, row, col)
        if not exact:
            T[:, col] = 0.0
            T[row, col] = 1.0
        basis[row] = col

    y = np.full(n, Fraction(0) if exact else 0.0, dtype=object if exact else float)
    for i, b in enumerate(basis):
        if b < n:
            y[b] = T[i, -1]
    u = T[m, n:n + m].copy()

    return y, u, T[m, -1]


def solve_zero_sum(game):
    """Value and minimax strategies of a zero-sum matrix game.

    The grid is shifted and scaled into [1, 2] so the LP
    max 1'y, M y <= 1 is bounded with the slack basis feasible; its dual
    prices give the defender's maximin strategy in the same pass.

    Args:
        game (MatrixGame or 2-D array): defender payoffs.

    Returns:
        EquilibriumProfile with value_a = -value_d.
    """
    if not isinstance(game, MatrixGame):
        game = MatrixGame(game)

    A = game.payoff
    lo, hi = A.min(), A.max()
    span = hi - lo if hi > lo else (Fraction(1) if game.exact else 1.0)
    M = (A - lo) / span + 1

    y, u, z = _simplex(M, game.exact)
    x = u / sum(u)
    y = y / sum(y)
    value = (1 / z - 1) * span + lo

    Af = _to_float(A)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gain_d, gain_a = _gains(Af, -Af, x, y)

    return EquilibriumProfile(
        strategy_d=MixedStrategy(x),
        strategy_a=MixedStrategy(y),
        value_d=float(value),
        value_a=-float(value),
        epsilon=float(max(gain_d, gain_a, 0.0)),
    )


def fictitious_play(game, iterations):
    """Simultaneous fictitious play with lowest-index tie breaking.

    Returns the empirical frequencies after `iterations` rounds. The
    reported value is the payoff of the empirical profile.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not isinstance(game, MatrixGame):
        game = MatrixGame(game)

    A = _to_float(game.payoff)
    rows, cols = A.shape
    counts_d = np.zeros(rows)
    counts_a = np.zeros(cols)
    cum_d = np.zeros(rows)
    cum_a = np.zeros(cols)
    i = j = 0

    for _ in range(iterations):
        counts_d[i] += 1
        counts_a[j] += 1
        cum_d += A[:, j]
        cum_a += A[i, :]
        i = int(np.argmax(cum_d))
        j = int(np.argmin(cum_a))

    x = counts_d / iterations
    y = counts_a / iterations
    prof = _profile(A, -A, x, y)

    return prof


# --- Bimatrix games (support enumeration) --- #


def _undominated(A, B):
    """Iteratively remove strictly dominated pure strategies."""
    rows = list(range(A.shape[0]))
    cols = list(range(A.shape[1]))
    changed = True
    while changed:
        changed = False
        sub = A[np.ix_(rows, cols)]
        for k in range(len(rows)):
            if any(np.all(sub[l] > sub[k] + TOLERANCE) for l in range(len(rows)) if l != k):
                rows.pop(k)
                changed = True
                break
        sub = B[np.ix_(rows, cols)]
        for k in range(len(cols)):
            if any(np.all(sub[:, l] > sub[:, k] + TOLERANCE) for l in range(len(cols)) if l != k):
                cols.pop(k)
                changed = True
                break

    return rows, cols


def _indifference(P, rows, cols, square):
    """Mix over `cols` making every row in `rows` earn the same payoff.

    Returns (weights, level) or None when the system has no solution.
    """
    k, l = len(rows), len(cols)
    lhs = np.zeros((k + 1, l + 1))
    lhs[:k, :l] = P[np.ix_(rows, cols)]
    lhs[:k, l] = -1.0
    lhs[k, :l] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0

    if square:
        try:
            sol = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            return None
    else:
        sol = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
        if np.max(np.abs(lhs @ sol - rhs)) > TOLERANCE:
            return None

    return sol[:l], sol[l]


def _check_support(A, B, I, J, square):
    """Equilibrium on supports (I, J) of the full game, else None."""
    m, n = A.shape
    sol_y = _indifference(A, I, J, square)
    sol_x = _indifference(B.T, J, I, square)
    if sol_y is None or sol_x is None:
        return None, True

    (yJ, v), (xI, u) = sol_y, sol_x
    if np.any(yJ < -TOLERANCE) or np.any(xI < -TOLERANCE):
        return None, False

    x = np.zeros(m)
    y = np.zeros(n)
    x[list(I)] = np.clip(xI, 0.0, None)
    y[list(J)] = np.clip(yJ, 0.0, None)
    x /= x.sum()
    y /= y.sum()

    scale = 1.0 + max(np.abs(A).max(), np.abs(B).max())
    if (A @ y).max() > x @ A @ y + TOLERANCE * scale:
        return None, False
    if (x @ B).max() > x @ B @ y + TOLERANCE * scale:
        return None, False

    return (x, y), False


def _same(p, q):
    return (np.allclose(p[0], q[0], atol=TOLERANCE)
            and np.allclose(p[1], q[1], atol=TOLERANCE))


def enumerate_equilibria(game):
    """All equilibria found by support enumeration.

    Equal-size supports are tried first; singular support systems are
    skipped and flag the result as degenerate. If nothing survives, the
    unequal-size supports are retried by least squares.

    Returns:
        list of EquilibriumProfile, ordered by (support_d, support_a).
    """
    A, B = game.payoff_d, game.payoff_a
    m, n = A.shape
    if max(m, n) > ENUMERATION_CAP:
        raise EnumerationCapExceeded(max(m, n), ENUMERATION_CAP)

    rows, cols = _undominated(A, B)
    found = []
    degenerate = False

    def collect(I, J, square):
        nonlocal degenerate
        pair, singular = _check_support(A, B, I, J, square)
        if singular:
            degenerate = True
            logger.debug("skipping singular support %s x %s", I, J)
        if pair is not None and not any(_same(pair, q) for q in found):
            found.append(pair)

    for k in range(1, min(len(rows), len(cols)) + 1):
        for I in combinations(rows, k):
            for J in combinations(cols, k):
                collect(I, J, square=True)

    if not found:
        degenerate = True
        for k1 in range(1, len(rows) + 1):
            for k2 in range(1, len(cols) + 1):
                if k1 == k2:
                    continue
                for I in combinations(rows, k1):
                    for J in combinations(cols, k2):
                        collect(I, J, square=False)

    profiles = []
    for x, y in found:
        prof = _profile(A, B, x, y)
        n_best = (np.sum((A @ y) >= prof.value_d - TOLERANCE)
                  + np.sum((x @ B) >= prof.value_a - TOLERANCE))
        extra = n_best > len(prof.strategy_d.support) + len(prof.strategy_a.support)
        profiles.append(EquilibriumProfile(
            prof.strategy_d, prof.strategy_a, prof.value_d, prof.value_a,
            prof.epsilon, degenerate=bool(degenerate or extra)))

    profiles.sort(key=lambda p: (p.strategy_d.support, p.strategy_a.support))

    return profiles


def select_equilibrium(profiles, selection=EquilibriumSelectionRule.DEFENDER_OPTIMAL):
    """Pick one profile from a lexicographically ordered list."""
    if selection is EquilibriumSelectionRule.FIRST:
        return profiles[0]

    criteria = {
        EquilibriumSelectionRule.DEFENDER_OPTIMAL: (lambda p: p.value_d, lambda p: p.value_a),
        EquilibriumSelectionRule.ATTACKER_OPTIMAL: (lambda p: p.value_a, lambda p: p.value_d),
        EquilibriumSelectionRule.WELFARE: (lambda p: p.value_d + p.value_a,
                                           lambda p: p.value_d),
    }[selection]

    candidates = list(profiles)
    for crit in criteria:
        best = max(crit(p) for p in candidates)
        candidates = [p for p in candidates if crit(p) >= best - TOLERANCE]

    return candidates[0]


def solve_bimatrix(game, selection=EquilibriumSelectionRule.DEFENDER_OPTIMAL):
    """Equilibrium of a bimatrix game chosen by `selection`."""
    if isinstance(selection, str):
        selection = EquilibriumSelectionRule(selection)

    profiles = enumerate_equilibria(game)
    if not profiles:
        raise DegenerateGame("no equilibrium found by support enumeration "
                             "for game of shape %s" % (game.shape,))

    return select_equilibrium(profiles, selection)
