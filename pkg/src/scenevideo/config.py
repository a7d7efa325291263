"""Run configuration (UTF-8 JSON).

Example with every field at its default::

    {
      "lexicon": null,
      "prompts": null,
      "scenes": 20,
      "levels": {"resolutions": [[16, 16], [32, 32], [64, 64]], "frames": 8, "patch": 8},
      "noise": {"sigmas": [1.0, 0.5, 0.25], "steps_per_level": 8},
      "loss": {"temporal": 0.5, "semantic": 0.1, "adversarial": 0.0},
      "train": {"steps": 200, "learning_rate": 0.01, "seed": 42, "init_seed": 0,
                "smoothing_window": 30},
      "output_dir": "run"
    }

``lexicon`` and ``prompts`` default to the packaged files. Relative paths are
resolved against the config file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .objective import LossWeights
from .pvr.model import LevelSpec, NoiseSchedule
from .pvr.train import TrainConfig


@dataclass(frozen=True)
class RunConfig:
    lexicon: Path | None = None
    prompts: Path | None = None
    scenes: int = 20
    levels: LevelSpec = field(default_factory=LevelSpec)
    noise: NoiseSchedule = field(default_factory=NoiseSchedule)
    loss: LossWeights = field(default_factory=LossWeights)
    steps: int = 200
    learning_rate: float = 1e-2
    seed: int = 42
    init_seed: int = 0
    smoothing_window: int = 30
    output_dir: Path = Path("run")

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.steps, self.learning_rate, self.seed, self.loss, self.noise)

    def prompt_lines(self) -> list[str]:
        if self.prompts is None:
            text = resources.files("scenevideo.data").joinpath("prompts.txt").read_text("utf-8")
        else:
            text = self.prompts.read_text(encoding="utf-8")
        return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


_TOP = {"lexicon", "prompts", "scenes", "levels", "noise", "loss", "train", "output_dir"}


def _section(doc: dict, key: str, allowed: set[str]) -> dict:
    sec = doc.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"'{key}' must be an object")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{key}': {sorted(unknown)}")
    return sec


def _int(v, name: str, lo: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(f"'{name}' must be an integer >= {lo}")
    return v


def _float(v, name: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{name}' must be a number")
    return float(v)


def _path(v, base: Path, name: str) -> Path | None:
    if v is None:
        return None
    if not isinstance(v, str):
        raise ConfigError(f"'{name}' must be a path string")
    p = Path(v)
    if not p.is_absolute():
        p = base / p
    if not p.exists():
        raise ConfigError(f"'{name}' path does not exist: {p}")
    return p


def config_from_dict(doc: dict, base: Path = Path(".")) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    lv = _section(doc, "levels", {"resolutions", "frames", "patch"})
    nz = _section(doc, "noise", {"sigmas", "steps_per_level"})
    ls = _section(doc, "loss", {"temporal", "semantic", "adversarial"})
    tr = _section(doc, "train", {"steps", "learning_rate", "seed", "init_seed", "smoothing_window"})
    defaults = RunConfig()
    try:
        levels = LevelSpec(
            tuple(tuple(_int(x, "levels.resolutions", 1) for x in r) for r in lv.get("resolutions", defaults.levels.resolutions)),
            _int(lv.get("frames", defaults.levels.frames), "levels.frames", 1),
            _int(lv.get("patch", defaults.levels.patch), "levels.patch", 1),
        )
        noise = NoiseSchedule(
            tuple(_float(s, "noise.sigmas") for s in nz.get("sigmas", defaults.noise.sigmas)),
            _int(nz.get("steps_per_level", defaults.noise.steps), "noise.steps_per_level", 1),
        )
        loss = LossWeights(
            _float(ls.get("temporal", defaults.loss.temporal), "loss.temporal"),
            _float(ls.get("semantic", defaults.loss.semantic), "loss.semantic"),
            _float(ls.get("adversarial", defaults.loss.adversarial), "loss.adversarial"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if len(noise.sigmas) != levels.levels:
        raise ConfigError("noise.sigmas must have one entry per level")
    steps = _int(tr.get("steps", defaults.steps), "train.steps", 1)
    lr = _float(tr.get("learning_rate", defaults.learning_rate), "train.learning_rate")
    if not lr >= 0:
        raise ConfigError("'train.learning_rate' must be >= 0")
    out = doc.get("output_dir", str(defaults.output_dir))
    if not isinstance(out, str):
        raise ConfigError("'output_dir' must be a path string")
    out_path = Path(out) if Path(out).is_absolute() else base / out
    return RunConfig(
        lexicon=_path(doc.get("lexicon"), base, "lexicon"),
        prompts=_path(doc.get("prompts"), base, "prompts"),
        scenes=_int(doc.get("scenes", defaults.scenes), "scenes", 1),
        levels=levels,
        noise=noise,
        loss=loss,
        steps=steps,
        learning_rate=lr,
        seed=_int(tr.get("seed", defaults.seed), "train.seed"),
        init_seed=_int(tr.get("init_seed", defaults.init_seed), "train.init_seed"),
        smoothing_window=_int(tr.get("smoothing_window", defaults.smoothing_window), "train.smoothing_window", 1),
        output_dir=out_path,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return config_from_dict(doc, path.parent)
