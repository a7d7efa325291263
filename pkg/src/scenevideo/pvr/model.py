"""Refiner parameters, level/noise configuration, and the binary model file.

Model file layout (little-endian)::

    b"MVAI"  u32 version  u32 levels  u32 frames  u32 patch
    per level:
        u32 height  u32 width  u32 d_model  u32 heads  u32 patch_dim
        float64 payload, arrays in PARAM_ORDER, each row-major
"""

from __future__ import annotations

import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import FormatError, ShapeMismatch
from ..rng import stream
from ..tsam import BRANCHES, AttentionParams, BranchParams, TsamWeights

MODEL_MAGIC = b"MVAI"
MODEL_VERSION = 1
PARAM_ORDER = (
    "encode",
    "decode",
    *(f"{b}.{k}" for b in BRANCHES for k in ("wq", "wk", "wv")),
    "logits",
    "gain",
)
INITIAL_GAIN = 1.0

_GLOBAL = struct.Struct("<4s4I")
_LEVEL = struct.Struct("<5I")


@dataclass(frozen=True)
class LevelSpec:
    resolutions: tuple[tuple[int, int], ...] = ((16, 16), (32, 32), (64, 64))
    frames: int = 8
    patch: int = 8

    def __post_init__(self):
        if self.frames < 1 or self.patch < 1 or not self.resolutions:
            raise ValueError("frames, patch and level count must be >= 1")
        for i, (h, w) in enumerate(self.resolutions):
            if h % self.patch or w % self.patch:
                raise ValueError(f"level {i} resolution {h}x{w} not divisible by patch {self.patch}")
            if i and (h, w) != (2 * self.resolutions[i - 1][0], 2 * self.resolutions[i - 1][1]):
                raise ValueError("resolutions must double from one level to the next")

    @property
    def levels(self) -> int:
        return len(self.resolutions)

    def shape(self, level: int) -> tuple[int, int, int, int]:
        h, w = self.resolutions[level]
        return (self.frames, h, w, 3)


@dataclass(frozen=True)
class NoiseSchedule:
    sigmas: tuple[float, ...] = (1.0, 0.5, 0.25)
    steps: int = 8

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps per level must be >= 1")
        if any(s <= 0 for s in self.sigmas):
            raise ValueError("noise levels must be > 0")
        if any(b >= a for a, b in zip(self.sigmas, self.sigmas[1:])):
            raise ValueError("noise levels must strictly decrease")


@dataclass
class LevelParams:
    attention: AttentionParams
    mixing: TsamWeights
    encode: np.ndarray  # patch_dim x d_model
    decode: np.ndarray  # d_model x patch_dim
    gain: np.ndarray = field(default_factory=lambda: np.array([INITIAL_GAIN]))

    def arrays(self) -> OrderedDict[str, np.ndarray]:
        out = OrderedDict(encode=self.encode, decode=self.decode)
        for b in BRANCHES:
            for k, w in self.attention.branch(b).arrays().items():
                out[f"{b}.{k}"] = w
        out["logits"] = self.mixing.logits
        out["gain"] = self.gain
        return out

    def set(self, name: str, value: np.ndarray) -> None:
        value = np.asarray(value, dtype=np.float64)
        if name in ("encode", "decode", "gain"):
            setattr(self, name, value)
        elif name == "logits":
            self.mixing.logits = value
        else:
            b, k = name.split(".")
            setattr(self.attention.branch(b), k, value)

    def copy(self) -> LevelParams:
        new = LevelParams.zeros(self.encode.shape[0], self.encode.shape[1], self.attention.heads)
        for name, arr in self.arrays().items():
            new.set(name, arr.copy())
        return new

    @classmethod
    def zeros(cls, patch_dim: int, d_model: int, heads: int) -> LevelParams:
        def z():
            return BranchParams(*(np.zeros((d_model, d_model)) for _ in range(3)))

        return cls(
            AttentionParams(z(), z(), z(), heads),
            TsamWeights(np.zeros(3)),
            np.zeros((patch_dim, d_model)),
            np.zeros((d_model, patch_dim)),
            np.zeros(1),
        )

    @property
    def d_model(self) -> int:
        return self.encode.shape[1]

    @property
    def patch_dim(self) -> int:
        return self.encode.shape[0]


@dataclass
class ModelParams:
    levels: list[LevelParams]
    spec: LevelSpec = field(default_factory=LevelSpec)

    def copy(self) -> ModelParams:
        return ModelParams([lv.copy() for lv in self.levels], self.spec)

    def set_gain(self, value: float) -> None:
        for lv in self.levels:
            lv.gain = np.array([float(value)])


def init_params(seed: int = 0, spec: LevelSpec = LevelSpec(), d_model: int = 32, heads: int = 4) -> ModelParams:
    """Deterministic untrained parameters (LeCun-normal matrices, zero mixing logits)."""
    rng = stream(seed, "init")
    patch_dim = spec.patch * spec.patch * 3
    levels = []
    for _ in range(spec.levels):
        encode = rng.standard_normal((patch_dim, d_model)) / np.sqrt(patch_dim)
        decode = rng.standard_normal((d_model, patch_dim)) / np.sqrt(d_model)
        attention = AttentionParams.init(rng, d_model, heads)
        levels.append(LevelParams(attention, TsamWeights(np.zeros(3)), encode, decode, np.array([INITIAL_GAIN])))
    return ModelParams(levels, spec)


def encode_model(params: ModelParams) -> bytes:
    spec = params.spec
    out = [_GLOBAL.pack(MODEL_MAGIC, MODEL_VERSION, spec.levels, spec.frames, spec.patch)]
    for (h, w), lv in zip(spec.resolutions, params.levels):
        out.append(_LEVEL.pack(h, w, lv.d_model, lv.attention.heads, lv.patch_dim))
        for arr in lv.arrays().values():
            out.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(out)


def _shapes(patch_dim: int, d_model: int) -> dict[str, tuple[int, ...]]:
    shapes = {"encode": (patch_dim, d_model), "decode": (d_model, patch_dim), "logits": (3,), "gain": (1,)}
    for name in PARAM_ORDER:
        shapes.setdefault(name, (d_model, d_model))
    return shapes


def decode_model(data: bytes) -> ModelParams:
    if len(data) < 4 or data[:4] != MODEL_MAGIC:
        raise FormatError("magic", offset=0)
    if len(data) < _GLOBAL.size:
        raise FormatError("truncated header", offset=len(data))
    _, version, n_levels, frames, patch = _GLOBAL.unpack_from(data)
    if version != MODEL_VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if n_levels < 1:
        raise FormatError("level count must be >= 1", offset=8)
    if frames < 1:
        raise FormatError("frames must be >= 1", offset=12)
    if patch < 1:
        raise FormatError("patch must be >= 1", offset=16)
    offset = _GLOBAL.size
    levels, resolutions = [], []
    for i in range(n_levels):
        if len(data) < offset + _LEVEL.size:
            raise FormatError(f"truncated level {i} header", offset=len(data))
        h, w, d_model, heads, patch_dim = _LEVEL.unpack_from(data, offset)
        if patch_dim != patch * patch * 3:
            raise FormatError(f"level {i} patch_dim {patch_dim} inconsistent with patch {patch}", offset=offset + 16)
        if heads < 1 or d_model < 1 or d_model % heads:
            raise FormatError(f"level {i} has invalid d_model/heads", offset=offset + 8)
        resolutions.append((h, w))
        offset += _LEVEL.size
        lv = LevelParams.zeros(patch_dim, d_model, heads)
        shapes = _shapes(patch_dim, d_model)
        for name in PARAM_ORDER:
            count = int(np.prod(shapes[name]))
            end = offset + 8 * count
            if len(data) < end:
                raise FormatError(f"truncated payload in level {i} ({name})", offset=len(data))
            arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(np.float64)
            if not np.all(np.isfinite(arr)):
                bad = int(np.flatnonzero(~np.isfinite(arr))[0])
                raise FormatError(f"non-finite value in level {i} ({name})", offset=offset + 8 * bad)
            lv.set(name, arr.reshape(shapes[name]))
            offset = end
        levels.append(lv)
    if offset != len(data):
        raise FormatError("trailing bytes", offset=offset)
    try:
        spec = LevelSpec(tuple(resolutions), frames, patch)
    except ValueError as exc:
        raise FormatError(str(exc), offset=_GLOBAL.size) from None
    return ModelParams(levels, spec)


def save_model(params: ModelParams, path) -> None:
    Path(path).write_bytes(encode_model(params))


def load_model(path) -> ModelParams:
    return decode_model(Path(path).read_bytes())


def check_level_input(v: np.ndarray, spec: LevelSpec, level: int) -> None:
    if not 0 <= level < spec.levels:
        raise ShapeMismatch(f"level {level} outside 0..{spec.levels - 1}")
    if v.shape != spec.shape(level):
        raise ShapeMismatch(f"video shape {v.shape} does not match level {level} shape {spec.shape(level)}")
