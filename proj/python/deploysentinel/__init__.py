"""Deployment-time detection of adversarial smart contracts."""

import json

from . import _core
from ._core import (
    IncompatibleBundle,
    adasyn,
    assemble,
    bundle_hash,
    chrono_split,
    disassemble,
    evaluate,
    f1_score,
    keccak256,
    pscft,
    runtime_code,
    selector,
    tokenize,
    trace_fund_source,
)

__all__ = [
    "IncompatibleBundle",
    "adasyn",
    "analyze_bytecode",
    "assemble",
    "bundle_hash",
    "chrono_split",
    "disassemble",
    "evaluate",
    "f1_score",
    "implementation_features",
    "keccak256",
    "pscft",
    "runtime_code",
    "selector",
    "synthetic_dataset",
    "tokenize",
    "trace_fund_source",
]


def implementation_features(code: bytes) -> dict:
    return json.loads(_core.implementation_features(code))


def analyze_bytecode(code: bytes, model_dir: str = "", signature_db: str = "") -> dict:
    """Report dict for runtime or creation bytecode (no network access)."""
    return json.loads(_core.analyze_bytecode(code, model_dir, signature_db))


def synthetic_dataset(contracts: int, seed: int = 1, adversarial_fraction: float = 0.1) -> list:
    lines = _core.synthetic_dataset(contracts, seed, adversarial_fraction).splitlines()
    return [json.loads(line) for line in lines[1:]]
