"""Python front end for the chasm depth-reduction library.

Circuits, depth-four circuits, tensors and decompositions travel as their
text formats; reports come back as dicts.
"""

import json

from . import _chasm
from ._chasm import (
    CapExceeded,
    ChasmError,
    ParseError,
    PreconditionError,
    SHALLOW_CONSTANT,
    VSBR_DEPTH_CONSTANT,
    brute_force_rank,
    generate,
)

__all__ = [
    "CapExceeded",
    "ChasmError",
    "ParseError",
    "PreconditionError",
    "SHALLOW_CONSTANT",
    "VSBR_DEPTH_CONSTANT",
    "brute_force_rank",
    "circuit_info",
    "depth4",
    "generate",
    "rank_certificate",
    "verify",
    "vsbr",
]


def circuit_info(text):
    return json.loads(_chasm.circuit_info(text))


def depth4(text, t, pass_name="general", seed=0):
    """Returns (depth-four text, report dict)."""
    out, report = _chasm.depth4(text, t, pass_name, seed)
    return out, json.loads(report)


def verify(a, b, trials=32, seed=0):
    """Randomized identity test; either side may be a circuit or a depth-four file."""
    return json.loads(_chasm.verify(a, b, trials, seed))


def vsbr(text):
    out, stats = _chasm.vsbr(text)
    return out, json.loads(stats)


def rank_certificate(text, mode="sml", c=0.05, block=0, seed=0):
    dec, report = _chasm.rank_certificate(text, mode, c, block, seed)
    return dec, json.loads(report)
