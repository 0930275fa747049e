"""
Exceptions raised across the cwtoolkit package.

Every error derives from CwError so callers (and the cwgame CLI) can
separate model/solver failures from programming errors.

"""


class CwError(Exception):
    """Base class for all cwtoolkit errors."""


# --- Game kernel --- #


class NonFiniteEntry(CwError):
    """A payoff grid holds NaN or infinite values."""


class ShapeMismatch(CwError):
    """Payoff grids or strategies have incompatible dimensions."""


class EnumerationCapExceeded(CwError):
    """Support or sequence enumeration would exceed the action cap."""

    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__("enumeration size %d exceeds cap %d" % (count, cap))


class DegenerateGame(CwError):
    """No support system produced an equilibrium."""


# --- Policy echelon --- #


class TooManyPlayers(CwError):
    """Coalition games are limited to exact enumeration sizes."""


# --- Strategic echelon --- #


class InfeasibleAllocation(CwError):
    """Allocation overspends its budget or leaves the grid."""


class CombinatorialBlowup(CwError):
    """The discretized allocation space is too large to enumerate."""

    def __init__(self, count):
        self.count = count
        super().__init__("allocation count %d exceeds the enumeration limit" % count)


# --- Operational echelon --- #


class IndexOutOfRange(CwError):
    """State or action index outside the game's sets."""


class NonStochasticRow(CwError):
    """A transition row does not sum to one."""


# --- Tactical echelon --- #


class UnknownTactic(CwError):
    """Tactic identifier missing from the catalog."""


class MissingPair(CwError):
    """Tactical outcomes do not cover an operational action pair."""


# --- Meta game --- #


class NoFeasibleAction(CwError):
    """Budget filtering removed every defender action of an operation."""


class MissingOperation(CwError):
    """Operation identifier not declared by the scenario."""


class SweepError(CwError):
    """A solver failed inside a cross-echelon sweep."""

    def __init__(self, echelon, cause):
        self.echelon = echelon
        self.cause = cause
        super().__init__("%s echelon failed: %s" % (echelon, cause))


class NotConverged(CwError):
    """Assessment requested on a configuration that did not converge."""


# --- Paradox lab --- #


class SingularChain(CwError):
    """Capital-residue chain is reducible; stationary law not unique."""


class TooManyRoutes(CwError):
    """Routing network has more origin-destination paths than supported."""


class IllPosedNetwork(CwError):
    """Routing network fails validation (negative latency, no route, ...)."""


# --- Scenario I/O --- #


class ParseError(CwError):
    """Scenario or report document is not well-formed."""

    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__("%s (line %d, column %d)" % (message, line, column))


class ScenarioValidationError(CwError):
    """Scenario violates a schema rule at a given path."""

    def __init__(self, path, rule):
        self.path = path
        self.rule = rule
        super().__init__("%s: %s" % (path, rule))


class UnknownCategory(CwError):
    """Template category not in the registry."""
