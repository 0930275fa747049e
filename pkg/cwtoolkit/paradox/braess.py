"""
Selfish routing on small networks: Wardrop equilibria and Braess' paradox.

Links carry affine latencies a + b * flow; a single origin-destination
pair carries the whole demand. Routes are enumerated as simple paths and
the equilibrium is found by trying route supports in ascending size,
solving the equal-latency system on each and keeping the first split
that satisfies the Wardrop conditions.

Example:
    net = classic_braess_network(demand=4000)
    braess_delta(net)                # (65.0, 80.0, 15.0)

"""
from dataclasses import dataclass, field
from itertools import combinations

import networkx as nx
import numpy as np

from ..errors import IllPosedNetwork, TooManyRoutes

MAX_ROUTES = 5
TOLERANCE = 1e-9


@dataclass(frozen=True)
class RoutingNetwork:
    nodes: tuple
    # (u, v) -> (a, b)
    links: dict
    origin: str
    destination: str
    demand: float
    shortcut: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if self.demand <= 0:
            raise IllPosedNetwork("demand must be positive")
        for end in (self.origin, self.destination):
            if end not in self.nodes:
                raise IllPosedNetwork("unknown node %s" % end)
        for (u, v), (a, b) in self.links.items():
            if u not in self.nodes or v not in self.nodes:
                raise IllPosedNetwork("link (%s, %s) references an unknown node" % (u, v))
            if a < 0 or b < 0:
                raise IllPosedNetwork("link (%s, %s) has a negative latency term" % (u, v))
        if self.shortcut is not None and tuple(self.shortcut) not in self.links:
            raise IllPosedNetwork("shortcut %s is not a link" % (self.shortcut,))

    def graph(self, include_shortcut=True):
        G = nx.DiGraph()
        G.add_nodes_from(self.nodes)
        for (u, v), (a, b) in self.links.items():
            if not include_shortcut and self.shortcut is not None and (u, v) == tuple(self.shortcut):
                continue
            G.add_edge(u, v, a=float(a), b=float(b))
        return G


@dataclass(frozen=True)
class WardropSolution:
    routes: tuple
    flows: np.ndarray
    # latency of every route at the equilibrium flows
    times: np.ndarray
    time: float
    link_flows: dict = field(default_factory=dict)

    def certificate(self):
        """Largest Wardrop violation (0 at an exact equilibrium)."""
        used = self.flows > TOLERANCE
        return float(max(np.max(np.abs(self.times[used] - self.time)),
                         max(0.0, self.time - self.times.min())))


def _solve_support(Q, c, demand, S):
    k = len(S)
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = Q[np.ix_(S, S)]
    A[:k, k] = -1.0
    A[k, :k] = 1.0
    rhs = np.concatenate([-c[S], [demand]])
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
        if np.max(np.abs(A @ sol - rhs)) > TOLERANCE * max(1.0, demand):
            return None

    return sol[:k], sol[k]


def wardrop_equilibrium(net, include_shortcut=True):
    """Route flows on which every used route has the minimal latency."""
    G = net.graph(include_shortcut)
    routes = [tuple(p) for p in nx.all_simple_paths(G, net.origin, net.destination)]
    if not routes:
        raise IllPosedNetwork("no route from %s to %s" % (net.origin, net.destination))
    if len(routes) > MAX_ROUTES:
        raise TooManyRoutes("%d routes (max %d)" % (len(routes), MAX_ROUTES))
    routes.sort(key=lambda p: (len(p), p))

    edges = list(G.edges)
    delta = np.zeros((len(edges), len(routes)))
    for j, path in enumerate(routes):
        for e in zip(path[:-1], path[1:]):
            delta[edges.index(e), j] = 1.0
    a = np.array([G.edges[e]["a"] for e in edges])
    b = np.array([G.edges[e]["b"] for e in edges])
    c = delta.T @ a
    Q = delta.T @ (b[:, None] * delta)

    n = len(routes)
    for size in range(1, n + 1):
        for S in combinations(range(n), size):
            S = list(S)
            solved = _solve_support(Q, c, net.demand, S)
            if solved is None:
                continue
            h_S, tau = solved
            if np.any(h_S < -TOLERANCE * net.demand):
                continue
            h = np.zeros(n)
            h[S] = np.clip(h_S, 0.0, None)
            times = c + Q @ h
            if np.all(times >= tau - TOLERANCE * max(1.0, abs(tau))):
                flows_e = delta @ h
                return WardropSolution(tuple(routes), h, times, float(tau),
                                       {e: float(x) for e, x in zip(edges, flows_e)})

    raise IllPosedNetwork("no Wardrop split found")


def braess_delta(net):
    """(time without shortcut, time with shortcut, difference)."""
    if net.shortcut is None:
        raise IllPosedNetwork("network has no shortcut link")
    without = wardrop_equilibrium(net, include_shortcut=False).time
    with_ = wardrop_equilibrium(net, include_shortcut=True).time

    return without, with_, with_ - without


def classic_braess_network(demand=4000.0, shortcut_latency=0.0):
    """Four-node network: two routes of latency flow/100 + 45, plus A -> B."""
    return RoutingNetwork(
        nodes=("S", "A", "B", "E"),
        links={("S", "A"): (0.0, 0.01), ("A", "E"): (45.0, 0.0),
               ("S", "B"): (45.0, 0.0), ("B", "E"): (0.0, 0.01),
               ("A", "B"): (float(shortcut_latency), 0.0)},
        origin="S",
        destination="E",
        demand=float(demand),
        shortcut=("A", "B"),
    )
