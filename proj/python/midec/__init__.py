"""Motor-imagery EEG classification pipeline.

Synthetic ERD/ERS data generation, Butterworth/notch filtering, band power,
a from-scratch CNN (BFR-CNN and ShallowConvNet) trained with Adam, and an
FBCSP + shrinkage-LDA baseline, with stratified cross-validation utilities.
"""

from ._core import (
    Dataset,
    Model,
    __version__,
    bandpass_filtfilt,
    bandpower,
    cross_validate,
    evaluate,
    generate_dataset,
    load_model,
    make_dataset,
    read_dataset,
    stratified_kfold,
    train,
    write_dataset,
)

__all__ = [
    "Dataset",
    "Model",
    "__version__",
    "bandpass_filtfilt",
    "bandpower",
    "cross_validate",
    "evaluate",
    "generate_dataset",
    "load_model",
    "make_dataset",
    "read_dataset",
    "stratified_kfold",
    "train",
    "write_dataset",
]
