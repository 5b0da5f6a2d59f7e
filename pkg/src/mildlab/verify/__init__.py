"""Verification studies, invariant battery, and report machinery."""

from .invariants import InvariantCheck, run_invariant_battery
from .report import StudyReport, atomic_write_text, config_digest, map_ordered
from .studies import (apriori_constants_study, bernoulli_study,
                      cauchy_rate_study, chain_rule_study,
                      contraction_extension_study, eiconv_demo,
                      l1_convergence_study, moment_study, propagation_study)

__all__ = [
    "InvariantCheck",
    "run_invariant_battery",
    "StudyReport",
    "atomic_write_text",
    "config_digest",
    "map_ordered",
    "apriori_constants_study",
    "bernoulli_study",
    "cauchy_rate_study",
    "chain_rule_study",
    "contraction_extension_study",
    "eiconv_demo",
    "l1_convergence_study",
    "moment_study",
    "propagation_study",
]
