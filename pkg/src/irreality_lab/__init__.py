"""Irreality and joint irreality of quantum observables.

Dephasing channels, entropic measures, closed forms for qubit and Werner
configurations, and the Monte Carlo harness that cross-checks them.
"""

__version__ = "0.1.0"

from .channels import dephase, dephase_bilocal, dephase_seq, is_joint_reality_state, is_reality_state
from .measures import (
    information,
    irreality,
    ji_bounds,
    ji_decomposition,
    joint_irreality,
    measure_report,
    mutual_information,
    onesided_discord_min,
    script_d,
    symmetric_discord,
    von_neumann_entropy,
)
from .qstate import DensityMatrix, Observable, RngStream, bell_state, werner_observables, werner_state

__all__ = [
    "DensityMatrix",
    "Observable",
    "RngStream",
    "bell_state",
    "dephase",
    "dephase_bilocal",
    "dephase_seq",
    "information",
    "irreality",
    "is_joint_reality_state",
    "is_reality_state",
    "ji_bounds",
    "ji_decomposition",
    "joint_irreality",
    "measure_report",
    "mutual_information",
    "onesided_discord_min",
    "script_d",
    "symmetric_discord",
    "von_neumann_entropy",
    "werner_observables",
    "werner_state",
]
