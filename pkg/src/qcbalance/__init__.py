"""Closed-system information and entanglement accounting for two-party qubit protocols."""

from . import ledger, linalg, measures, protocols, qstate
from .ledger import BalanceLedger, check_balance
from .qstate import LabeledState, Party, PartyLayout, Role

__all__ = [
    "BalanceLedger",
    "LabeledState",
    "Party",
    "PartyLayout",
    "Role",
    "check_balance",
    "ledger",
    "linalg",
    "measures",
    "protocols",
    "qstate",
]
__version__ = "0.1.0"
