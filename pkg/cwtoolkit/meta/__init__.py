"""
Cross-echelon meta-game: mappings, warfare equilibrium, consistency
checks, perturbations and verdicts.

"""
from ..scenario.schema import PerturbationSpec, Thresholds
from .assess import AssessmentVerdicts, assess, dominance, stability, winning
from .equilibrium import (ConvergenceTrace, EchelonPayoffs, WarfareConfiguration, blend,
                          coords, find_warfare_equilibrium, initial_configuration, phi,
                          refresh)
from .hylo import PAIRS, HylomorphismReport, check_hylomorphism, hylomorphism_report
from .mappings import ana_P_to_S, ana_S_to_O, cata_O_to_S, cata_S_to_P
from .perturb import PerturbationReport, apply_perturbation, parse_site, perturb_and_propagate