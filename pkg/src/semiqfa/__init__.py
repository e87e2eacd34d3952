"""Simulation, MO-1gQFA conversion and size bounds for semi-quantum finite automata."""

import logging

from semiqfa.bounds import (
    BoundReport,
    IsolationEstimate,
    SeparationAudit,
    dfa_upper_bound_from_qfa,
    estimate_isolation,
    minimal_dfa,
    mo_dim_lower_bound,
    qk_lower_bound,
    separation_audit,
)
from semiqfa.conversion import ConversionReport, cl_to_mo, dfa_to_mo, qcfa_to_mo, qfac_to_mo, to_mo
from semiqfa.fileformat import emit_automaton, parse_automaton
from semiqfa.models import (
    ClQfa,
    Dfa,
    MoGqfa,
    QcfaAut,
    QfacAut,
    accept_prob,
    cl_accept_prob_oracle,
    dfa_run,
    mo_accept_prob,
    qcfa_accept_prob_oracle,
    qfac_accept_prob,
    validate_model,
)

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"
