"""Command-line entry point.

Exit codes: 0 success, 2 usage or input error, 3 I/O error, 4 file-format
error. Diagnostics go to stderr; machine-readable output to files or stdout.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import gradcheck, metrics
from .config import load_config
from .errors import (
    FormatError,
    GrammarError,
    InputError,
    MissingAnnotations,
    SceneVideoError,
    ShapeMismatch,
    UnknownWord,
)
from .pvr import NoiseSchedule, generate, init_params, load_model, save_model, smoothed, train
from .render import export_frames, read_video, render_scene, write_video
from .scene import annotate_temporal, deserialize, load_lexicon, parse, scan, serialize, solve_layout
from .scene.graph import SceneGraph

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_FORMAT = 0, 2, 3, 4

log = logging.getLogger("scenevideo")


class UsageError(InputError):
    pass


def _read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _prompt_from(args) -> str:
    if getattr(args, "file", None):
        return _read_text(args.file)
    if args.text is None:
        raise UsageError("give a prompt or --file")
    return args.text


def _parse_prompt(text: str, lexicon, frames: int, fps: float, annotate: bool = True) -> SceneGraph:
    """Parse with located diagnostics; annotate when every actor has a verb."""
    tokens = scan(text, lexicon)
    try:
        graph = parse([t.word for t in tokens], lexicon, prompt=text.strip())
    except GrammarError as exc:
        if exc.position < len(tokens):
            tok = tokens[exc.position]
            where = f"line {tok.line}, column {tok.column}"
        else:
            where = "end of input"
        raise GrammarError(exc.position, exc.expected, exc.found) from _Located(where)
    if not annotate:
        return graph
    if any(e.role == "actor" and e.action is None for e in graph.objects):
        log.warning("some actors have no verb; writing graph without temporal annotations")
        return graph
    return annotate_temporal(graph, solve_layout(graph), frames, fps)


class _Located(Exception):
    pass


def _ensure_annotated(graph: SceneGraph, frames: int) -> SceneGraph:
    complete = len(graph.annotations) == len(graph.objects) and all(
        a.duration == frames for a in graph.annotations
    )
    if complete:
        return graph
    log.info("graph lacks %d-frame annotations; running layout and temporal annotation", frames)
    fps = graph.annotations[0].fps if graph.annotations else 8.0
    return annotate_temporal(graph.with_annotations(()), solve_layout(graph), frames, fps)


# -- subcommands ---------------------------------------------------------------


def cmd_parse(args) -> int:
    lexicon = load_lexicon(args.lexicon)
    text = _prompt_from(args)
    graph = _parse_prompt(text, lexicon, args.frames, args.fps, annotate=not args.no_annotate)
    doc = serialize(graph)
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
    else:
        sys.stdout.write(doc)
    return EXIT_OK


def cmd_render(args) -> int:
    graph = _ensure_annotated(deserialize(_read_text(args.graph)), args.frames)
    video = render_scene(graph, args.size, args.size, args.frames)
    write_video(video, args.out)
    if args.ppm:
        export_frames(video, args.ppm)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.model:
        params = load_model(args.model)
    else:
        log.warning("no --model given; using untrained parameters (init seed %d)", args.init_seed)
        params = init_params(args.init_seed)
    frames = params.spec.frames
    if args.graph:
        graph = _ensure_annotated(deserialize(_read_text(args.graph)), frames)
    else:
        graph = _ensure_annotated(_parse_prompt(_prompt_from(args), load_lexicon(args.lexicon), frames, 8.0), frames)
    # default sigmas halve per level: (1, 0.5, 0.25) for the standard three levels
    sigmas = tuple(args.sigmas) if args.sigmas else tuple(0.5**i for i in range(params.spec.levels))
    schedule = NoiseSchedule(sigmas, args.steps_per_level)
    video = generate(graph, params, schedule, seed=args.seed)
    write_video(video, args.out)
    if args.ppm:
        export_frames(video, args.ppm)
    return EXIT_OK


def cmd_train(args) -> int:
    from .scene import build_scene

    cfg = load_config(args.config)
    lexicon = load_lexicon(cfg.lexicon)
    prompts = cfg.prompt_lines()[: cfg.scenes]
    if len(prompts) < cfg.scenes:
        log.warning("only %d prompts available for %d scenes", len(prompts), cfg.scenes)
    scenes = [build_scene(p, lexicon, cfg.levels.frames) for p in prompts]
    params = init_params(cfg.init_seed, cfg.levels)
    trained, history = train(scenes, params, cfg.train_config())
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    save_model(trained, out / "model.mvai")
    with open(out / "loss_history.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "recon", "temporal", "semantic", "composite"])
        for i, b in enumerate(history, start=1):
            writer.writerow([i, repr(b.recon), repr(b.temporal), repr(b.semantic), repr(b.composite)])
    comp = [b.composite for b in history]
    window = min(cfg.smoothing_window, len(comp))
    initial = float(np.mean(comp[:window]))
    final = float(smoothed(comp, window)[-1])
    print(f"trained {len(comp)} steps: smoothed composite {initial:.6f} -> {final:.6f} "
          f"(ratio {final / initial:.4f}); wrote {out}", file=sys.stderr)
    return EXIT_OK


def _load_dir(path) -> list[tuple[Path, np.ndarray]]:
    d = Path(path)
    if not d.is_dir():
        raise FileNotFoundError(f"not a directory: {d}")
    return [(p, read_video(p)) for p in sorted(d.glob("*.mvt"))]


def cmd_eval(args) -> int:
    gen = _load_dir(args.generated)
    ref = _load_dir(args.reference)
    for name, vids in (("generated", gen), ("reference", ref)):
        if len(vids) < 2:
            raise metrics.InsufficientSamples(len(vids))
    fvd = metrics.fvd_proxy([v for _, v in gen], [v for _, v in ref])
    scores = []
    for path, v in gen:
        graph_path = path.with_suffix(".json")
        if graph_path.exists():
            scores.append(metrics.alignment_score(deserialize(_read_text(graph_path)), v))
    alignment = float(np.mean(scores)) if scores else None
    consistency = float(np.mean([metrics.temporal_consistency(v) for _, v in gen]))
    print(metrics.format_report(fvd, alignment, consistency))
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    results = gradcheck.run_suite(args.seed, args.instances, perturb=args.perturb)
    print(gradcheck.format_table(results))
    ok = all(r.passed for r in results)
    print(f"{'all' if ok else 'NOT all'} relative errors < {gradcheck.TOLERANCE:g}", file=sys.stderr)
    return EXIT_OK if ok else 1


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scenevideo", description="Scene-graph conditioned video generation at desk scale.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="prompt text -> scene-graph JSON")
    p.add_argument("text", nargs="?")
    p.add_argument("--file", help="read the prompt from a UTF-8 file")
    p.add_argument("--lexicon", help="lexicon file (default: packaged)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--frames", type=int, default=8)
    p.add_argument("--fps", type=float, default=8.0)
    p.add_argument("--no-annotate", action="store_true", help="skip layout and temporal annotation")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("render", help="scene graph -> ground-truth .mvt video")
    p.add_argument("graph")
    p.add_argument("--frames", type=int, default=8)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--out", required=True)
    p.add_argument("--ppm", help="also export PPM frames into this directory")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("generate", help="prompt or scene graph -> generated .mvt video")
    p.add_argument("text", nargs="?")
    p.add_argument("--file", help="read the prompt from a UTF-8 file")
    p.add_argument("--graph", help="scene-graph JSON instead of a prompt")
    p.add_argument("--lexicon")
    p.add_argument("--model", help="model file from 'train' (default: untrained init)")
    p.add_argument("--init-seed", type=int, default=0, help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigmas", type=float, nargs="+")
    p.add_argument("--steps-per-level", type=int, default=8)
    p.add_argument("--out", required=True)
    p.add_argument("--ppm")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="joint toy training from a run config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="metrics JSON for a generated vs reference directory")
    p.add_argument("--generated", required=True)
    p.add_argument("--reference", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference check of all backward passes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gradcheck)
    return ap


def _describe(exc: BaseException) -> str:
    if isinstance(exc, UnknownWord) and exc.line is not None:
        return f"line {exc.line}, column {exc.column}: unknown word {exc.word!r}"
    if isinstance(exc, GrammarError) and isinstance(exc.__cause__, _Located):
        return f"{exc.__cause__}: {exc}"
    return str(exc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (InputError, ShapeMismatch, MissingAnnotations) as exc:
        print(f"error: {_describe(exc)}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return EXIT_IO
    except SceneVideoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
