from .model import (
    LevelParams,
    LevelSpec,
    ModelParams,
    NoiseSchedule,
    decode_model,
    encode_model,
    init_params,
    load_model,
    save_model,
)
from .refine import generate, patchify, depatchify, refine_backward, refine_forward, refine_step, upsample
from .train import TrainConfig, level_sequence, smoothed, train

__all__ = [
    "LevelParams",
    "LevelSpec",
    "ModelParams",
    "NoiseSchedule",
    "TrainConfig",
    "decode_model",
    "depatchify",
    "encode_model",
    "generate",
    "init_params",
    "level_sequence",
    "load_model",
    "patchify",
    "refine_backward",
    "refine_forward",
    "refine_step",
    "save_model",
    "smoothed",
    "train",
    "upsample",
]
