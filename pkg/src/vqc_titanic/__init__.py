"""Variational quantum classifiers for Titanic survival, on an exact statevector simulator."""
from .circuits import (
    AnsatzSpec,
    Circuit,
    FeatureMapSpec,
    bind,
    build_feature_map,
    build_real_amplitudes,
    build_z_feature_map,
    build_zz_feature_map,
)
from .classifier import TrainReport, VQCClassifier, parse_model_name
from .data import Dataset, clean, load_raw, load_titanic3, split
from .metrics import ConfusionCounts, MetricReport, evaluate
from .optimizer import CobylaConfig, OptResult, minimize
from .statevector import Gate, StateVector, apply_gate, run_circuit, zero_state
from .svc import LinearSVC

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec", "Circuit", "FeatureMapSpec", "bind", "build_feature_map",
    "build_real_amplitudes", "build_z_feature_map", "build_zz_feature_map",
    "TrainReport", "VQCClassifier", "parse_model_name",
    "Dataset", "clean", "load_raw", "load_titanic3", "split",
    "ConfusionCounts", "MetricReport", "evaluate",
    "CobylaConfig", "OptResult", "minimize",
    "Gate", "StateVector", "apply_gate", "run_circuit", "zero_state",
    "LinearSVC",
]
