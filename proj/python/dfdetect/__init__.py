"""Real-vs-fake image classifier toolkit (C++ core)."""

from ._core import (
    Error,
    EvalReport,
    Manifest,
    Model,
    auc,
    build_model,
    class_weight,
    classify,
    eer,
    evaluate,
    f1_per_class,
    fuse,
    load_checkpoint,
    load_manifest,
    roc_curve,
    sigmoid,
    synth_dataset,
    weighted_bce,
)

__all__ = [
    "Error",
    "EvalReport",
    "Manifest",
    "Model",
    "auc",
    "build_model",
    "class_weight",
    "classify",
    "eer",
    "evaluate",
    "f1_per_class",
    "fuse",
    "load_checkpoint",
    "load_manifest",
    "roc_curve",
    "sigmoid",
    "synth_dataset",
    "weighted_bce",
]
