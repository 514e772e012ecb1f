from .arith_overflow import detect_arith_overflow, has_bound_check
from .capability_leak import DEFAULT_SUFFIXES, detect_capability_leak
from .cross_module import detect_cross_module, has_access_control, modifies_global_state
from .diagnostics import function_diagnostics
from .findings import DETECTOR_CHECKS, Check, Confidence, Finding, Severity, fnv1a_64
from .resource_leak import detect_resource_leak
from .unchecked_return import detect_unchecked_return

__all__ = [
    "Check",
    "Confidence",
    "DEFAULT_SUFFIXES",
    "DETECTOR_CHECKS",
    "Finding",
    "Severity",
    "detect_arith_overflow",
    "detect_capability_leak",
    "detect_cross_module",
    "detect_resource_leak",
    "detect_unchecked_return",
    "fnv1a_64",
    "function_diagnostics",
    "has_access_control",
    "has_bound_check",
    "modifies_global_state",
]
