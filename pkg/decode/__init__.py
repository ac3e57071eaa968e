"""Cheat-corrected decoding strategies."""

from decode.decoders import (
    Abstain,
    DecodePolicy,
    Exhausted,
    Response,
    TemperatureSampler,
    decision_record,
    decode,
    rejection_sample,
    selective_filter,
    top1_search,
)

__all__ = [
    "Abstain",
    "DecodePolicy",
    "Exhausted",
    "Response",
    "TemperatureSampler",
    "decision_record",
    "decode",
    "rejection_sample",
    "selective_filter",
    "top1_search",
]
