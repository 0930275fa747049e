"""
Exact reproductions of the Parrondo and Braess paradoxes.

"""
from .braess import (RoutingNetwork, WardropSolution, braess_delta, classic_braess_network,
                     wardrop_equilibrium)
from .parrondo import (DriftEstimate, ParrondoSpec, parrondo_drift, parrondo_simulate,
                       stationary_distribution, transition_matrix)
