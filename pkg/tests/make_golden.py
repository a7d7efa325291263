"""Regenerate the committed golden data under tests/golden/.

* ``NN.json``: parser output for each prompt of the packaged corpus;
* ``corrupt/``: damaged .mvt and model files plus ``offsets.json`` with the
  byte offset each must be rejected at;
* ``generate.sha256``: digest of a fixed generate run, which pins the output
  across platforms.

Run only after an intentional format or numerics change:

    python3 tests/make_golden.py
"""

import hashlib
import json
import struct
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from scenevideo.cli import main as cli_main
from scenevideo.pvr import LevelSpec, encode_model, init_params
from scenevideo.render import encode_video
from scenevideo.scene import build_scene, load_lexicon, serialize

GOLDEN = Path(__file__).parent / "golden"
GENERATE_ARGS = ["generate", "a cat walking across a garden", "--seed", "0"]


def corpus() -> list[str]:
    text = resources.files("scenevideo.data").joinpath("prompts.txt").read_text("utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def corrupt_files() -> dict[str, tuple[bytes, int]]:
    video = encode_video(np.linspace(0, 1, 2 * 2 * 2 * 3).reshape(2, 2, 2, 3))
    model = encode_model(init_params(0, LevelSpec(resolutions=((8, 8),), frames=2, patch=8)))
    bad_value = bytearray(video)
    bad_value[20 + 4 * 7 : 20 + 4 * 8] = struct.pack("<f", 1.5)
    return {
        "bad_magic.mvt": (b"MVT0" + video[4:], 0),
        "short_header.mvt": (video[:13], 13),
        "zero_frames.mvt": (video[:4] + struct.pack("<I", 0) + video[8:], 4),
        "zero_width.mvt": (video[:12] + struct.pack("<I", 0) + video[16:], 12),
        "four_channels.mvt": (video[:16] + struct.pack("<I", 4) + video[20:], 16),
        "truncated.mvt": (video[:-5], len(video) - 5),
        "trailing.mvt": (video + b"\0\0", len(video)),
        "out_of_range.mvt": (bytes(bad_value), 20 + 4 * 7),
        "bad_magic.mvai": (b"MVA1" + model[4:], 0),
        "bad_version.mvai": (model[:4] + struct.pack("<I", 9) + model[8:], 4),
        "zero_levels.mvai": (model[:8] + struct.pack("<I", 0) + model[12:], 8),
        "bad_patch_dim.mvai": (model[:36] + struct.pack("<I", 12) + model[40:], 36),
        "truncated.mvai": (model[:-8], len(model) - 8),
        "trailing.mvai": (model + b"\0", len(model)),
    }


def generate_digest() -> str:
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "v.mvt"
        if cli_main(GENERATE_ARGS + ["--out", str(out)]) != 0:
            raise RuntimeError("generate failed")
        return hashlib.sha256(out.read_bytes()).hexdigest()


def main() -> None:
    lexicon = load_lexicon()
    GOLDEN.mkdir(exist_ok=True)
    for i, prompt in enumerate(corpus()):
        (GOLDEN / f"{i:02d}.json").write_text(serialize(build_scene(prompt, lexicon)), encoding="utf-8")
    corrupt = GOLDEN / "corrupt"
    corrupt.mkdir(exist_ok=True)
    offsets = {}
    for name, (data, offset) in corrupt_files().items():
        (corrupt / name).write_bytes(data)
        offsets[name] = offset
    (corrupt / "offsets.json").write_text(json.dumps(offsets, indent=2) + "\n", encoding="utf-8")
    (GOLDEN / "generate.sha256").write_text(generate_digest() + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
