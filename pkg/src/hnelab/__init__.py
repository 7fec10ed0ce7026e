"""Handover necessity estimation between a cellular network and a circular WLAN cell."""

__version__ = "0.1.0"

from .decision import Decision, DecisionContext, Method, Verdict
from .errors import ConfigError, DomainError
from .geometry import CellGeometry, ChordTrajectory
from .radio import RadioModel, RssSample
from .simulator import SimConfig, SweepResult, TrialOutcome, run_sweep, verify_analytic
from .thresholds import HandoverLatencies, ThresholdResult, ToleranceTargets

__all__ = [
    "CellGeometry",
    "ChordTrajectory",
    "ConfigError",
    "Decision",
    "DecisionContext",
    "DomainError",
    "HandoverLatencies",
    "Method",
    "RadioModel",
    "RssSample",
    "SimConfig",
    "SweepResult",
    "ThresholdResult",
    "ToleranceTargets",
    "TrialOutcome",
    "Verdict",
    "run_sweep",
    "verify_analytic",
]
