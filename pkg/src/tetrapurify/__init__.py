"""Multi-stage entanglement purification schedules under digitized Pauli noise."""
from .numerics import ExtReal
from .noise import Basis, PauliOdds, decays_to, from_depolarizing, infidelity, normalize
from .distill import oplus, shor4, star
from .pipeline import Boost, Distill, Mode, Schedule, eval_schedule, fig3_schedule

__version__ = "0.1.0"

__all__ = [
    "ExtReal",
    "Basis",
    "PauliOdds",
    "decays_to",
    "from_depolarizing",
    "infidelity",
    "normalize",
    "oplus",
    "star",
    "shor4",
    "Boost",
    "Distill",
    "Mode",
    "Schedule",
    "eval_schedule",
    "fig3_schedule",
]
