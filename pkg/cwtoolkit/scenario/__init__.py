"""
Scenario documents, taxonomy templates, built-in scenarios and reports.

"""
from .fixtures import BUILTINS, builtin
from .redcyber import redcyber_scenario, redcyber_small_scenario
from .report import Report, build_report, emit_report, parse_report
from .schema import (SCHEMA_VERSION, Scenario, check_scenario, emit_scenario, load_scenario,
                     parse_scenario)
from .templates import TEMPLATES, TaxonomyTemplate, instantiate_template
