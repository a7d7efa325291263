"""Procedural ground-truth renderer and video file I/O.

``.mvt`` layout (little-endian)::

    offset 0   b"MVT1"
    offset 4   u32 frames
    offset 8   u32 height
    offset 12  u32 width
    offset 16  u32 channels (always 3)
    offset 20  frames*height*width*channels float32, row-major, frame by frame
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, MissingAnnotations, ShapeMismatch
from .scene.graph import SceneGraph

BACKGROUND = 0.15
RECT_ASPECT = 0.6
MVT_MAGIC = b"MVT1"
_HEADER = struct.Struct("<4s4I")


def _draw_order(graph: SceneGraph):
    return sorted(graph.objects, key=lambda e: (e.role != "ground", e.id))


def render_scene(graph: SceneGraph, height: int = 64, width: int = 64, n: int = 8) -> np.ndarray:
    """Rasterize an annotated scene to a ``(n, height, width, 3)`` float32 video.

    Shapes are hard-edged: a pixel is filled when its center lies inside the
    shape, so output is bit-reproducible.
    """
    if min(height, width, n) < 1:
        raise ShapeMismatch("video dimensions must be >= 1")
    for e in graph.objects:
        ann = graph.annotation(e.id)
        if ann is None:
            raise MissingAnnotations(f"entity {e.id} ({e.cls}) has no temporal annotation")
        if len(ann.positions) != n:
            raise MissingAnnotations(f"entity {e.id} annotated for {len(ann.positions)} frames, need {n}")
    ys = (np.arange(height, dtype=np.float64) + 0.5) / height
    xs = (np.arange(width, dtype=np.float64) + 0.5) / width
    py, px = np.meshgrid(ys, xs, indexing="ij")
    video = np.full((n, height, width, 3), BACKGROUND, dtype=np.float32)
    for e in _draw_order(graph):
        positions = graph.annotation(e.id).positions
        color = np.asarray(e.effective_color, dtype=np.float32)
        size = e.effective_size
        for t in range(n):
            cx, cy = positions[t]
            if e.shape == "circle":
                mask = (px - cx) ** 2 + (py - cy) ** 2 <= size * size
            else:
                mask = (np.abs(px - cx) <= size) & (np.abs(py - cy) <= RECT_ASPECT * size)
            video[t][mask] = color
    return np.clip(video, 0.0, 1.0)


def _as_video(v) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 4 or min(v.shape) < 1:
        raise ShapeMismatch(f"video must be (frames, H, W, C) with all dims >= 1, got {v.shape}")
    if v.shape[3] != 3:
        raise ShapeMismatch(f"video must have 3 channels, got {v.shape[3]}")
    return v


def quantize(v) -> np.ndarray:
    """Clamp to [0, 1] and store as float32, exactly as a file round-trip would."""
    return np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0).astype(np.float32)


def encode_video(v) -> bytes:
    v = quantize(_as_video(v))
    n, h, w, c = v.shape
    return _HEADER.pack(MVT_MAGIC, n, h, w, c) + v.astype("<f4").tobytes()


def decode_video(data: bytes) -> np.ndarray:
    if len(data) < 4 or data[:4] != MVT_MAGIC:
        raise FormatError("magic", offset=0)
    if len(data) < _HEADER.size:
        raise FormatError("truncated header", offset=len(data))
    _, n, h, w, c = _HEADER.unpack_from(data)
    for off, value, name in ((4, n, "frames"), (8, h, "height"), (12, w, "width")):
        if value < 1:
            raise FormatError(f"{name} must be >= 1", offset=off)
    if c != 3:
        raise FormatError("channels must be 3", offset=16)
    expected = n * h * w * c * 4
    payload = data[_HEADER.size :]
    if len(payload) < expected:
        raise FormatError("truncated payload", offset=len(data))
    if len(payload) > expected:
        raise FormatError("trailing bytes", offset=_HEADER.size + expected)
    v = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(n, h, w, c)
    bad = ~np.isfinite(v) | (v < 0) | (v > 1)
    if bad.any():
        flat = int(np.flatnonzero(bad.ravel())[0])
        raise FormatError("value outside [0, 1]", offset=_HEADER.size + 4 * flat)
    return v


def write_video(v, path) -> None:
    Path(path).write_bytes(encode_video(v))


def read_video(path) -> np.ndarray:
    return decode_video(Path(path).read_bytes())


def to_bytes(v) -> np.ndarray:
    """Scale [0, 1] to 8-bit with round-half-up."""
    return np.floor(np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def export_frames(v, directory) -> list[Path]:
    """Write one binary PPM (P6) per frame: ``frame_0000.ppm``, ..."""
    v = _as_video(v)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    pixels = to_bytes(v)
    n, h, w, _ = v.shape
    paths = []
    for t in range(n):
        path = directory / f"frame_{t:04d}.ppm"
        path.write_bytes(f"P6\n{w} {h}\n255\n".encode("ascii") + pixels[t].tobytes())
        paths.append(path)
    return paths
