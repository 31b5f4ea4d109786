"""Toy And-Inverter-Graph synthesis environment: circuits, passes, QoR."""

from .aig import Aig, AigBuilder, CircuitStats, equivalence_check, stats
from .aiger import AigerError, parse_aiger_ascii, serialize_aiger_ascii
from .env import (
    NATIVE_TOKENS,
    QorSpec,
    SynthEnv,
    evaluate_qor,
    full_alphabet,
    native_alphabet,
    reference_sequence,
    reference_spec,
)
from .passes import NATIVE_PASSES, ORACLE_ONLY_PASSES, apply_pass
