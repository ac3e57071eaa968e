"""Pipeline stages, one per command-line subcommand."""

from tools.bound import bound_model
from tools.decode import decode_queries
from tools.evaluate import evaluate_model
from tools.gen_data import generate_dataset
from tools.report import build_report
from tools.train import train_model

__all__ = [
    "bound_model",
    "build_report",
    "decode_queries",
    "evaluate_model",
    "generate_dataset",
    "train_model",
]
