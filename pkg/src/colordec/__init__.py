"""Triangular 6,6,6 color-code workbench with a recurrent neural decoder."""

__version__ = "0.1.0"

from .compensation import CompensationMatrices, build_compensation_matrices
from .config import TrainConfig
from .dataset_io import Dataset, DatasetHeader, read_dataset, stream_records, write_dataset
from .evaluate import evaluate
from .fits import (
    FidelitySeries,
    FitResult,
    decoder_efficiency,
    fit_fidelity,
    fit_powerlaw,
    pseudothreshold,
)
from .generate import generate
from .layout import (
    CodeLayout,
    PauliOperator,
    build_layout,
    code_distance_bruteforce,
    layout_to_json,
    pure_error_basis,
)
from .net import LstmDecoderParams, decoder_forward, init_params, load_checkpoint, save_checkpoint
from .optim import AdamState, adam_step, init_adam
from .records import BranchedSequence, Extractor, SyndromeSequence
from .reference import ReferenceDecoder, build_reference_decoder
from .schedule import (
    CircuitSchedule,
    build_cycle_schedule,
    build_final_readout,
    build_init_schedule,
    dump_schedule,
    validate_schedule,
)
from .sim import NoiseParams, RawRun, Runner, inject_errors, prepare_logical_zero, run_experiment
from .train import train

__all__ = [
    "AdamState",
    "BranchedSequence",
    "CircuitSchedule",
    "CodeLayout",
    "CompensationMatrices",
    "Dataset",
    "DatasetHeader",
    "Extractor",
    "FidelitySeries",
    "FitResult",
    "LstmDecoderParams",
    "NoiseParams",
    "PauliOperator",
    "RawRun",
    "ReferenceDecoder",
    "Runner",
    "SyndromeSequence",
    "TrainConfig",
    "adam_step",
    "build_compensation_matrices",
    "build_cycle_schedule",
    "build_final_readout",
    "build_init_schedule",
    "build_layout",
    "build_reference_decoder",
    "code_distance_bruteforce",
    "decoder_efficiency",
    "decoder_forward",
    "dump_schedule",
    "evaluate",
    "fit_fidelity",
    "fit_powerlaw",
    "generate",
    "init_adam",
    "init_params",
    "inject_errors",
    "layout_to_json",
    "load_checkpoint",
    "prepare_logical_zero",
    "pseudothreshold",
    "pure_error_basis",
    "read_dataset",
    "run_experiment",
    "save_checkpoint",
    "stream_records",
    "train",
    "validate_schedule",
    "write_dataset",
]
