"""Axiom auditors, training-domain geometry and report bundles."""

from .checks import (
    AuditGrid,
    check_aim,
    check_cg,
    check_dim,
    check_fmd,
    check_generalized_dummy,
    check_marginal,
)
from .domain import TrainingDomain, fit_domain, generate_leverage_data, monotone_chain
from .report import Axiom, AxiomReport, Verdict, Witness, dumps_bundle, write_report

__all__ = [
    "AuditGrid", "Axiom", "AxiomReport", "TrainingDomain", "Verdict", "Witness",
    "check_aim", "check_cg", "check_dim", "check_fmd", "check_generalized_dummy", "check_marginal",
    "dumps_bundle", "fit_domain", "generate_leverage_data", "monotone_chain", "write_report",
]
