"""
Minimal reverse-mode differentiation: parameters, tape operations, Adam and
finite-difference gradient checking.
"""

from __future__ import annotations

from .gradcheck import GradCheckReport, grad_check, relative_error
from .params import AdamState, ParamStore, adam_step, decode_array, encode_array
from .tape import Node, Tape

__all__ = [
    "AdamState",
    "GradCheckReport",
    "Node",
    "ParamStore",
    "Tape",
    "adam_step",
    "decode_array",
    "encode_array",
    "grad_check",
    "relative_error",
]
