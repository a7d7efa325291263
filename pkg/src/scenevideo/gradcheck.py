"""Finite-difference verification suite for every analytic backward pass.

Each case draws random instances from a named seeded stream, builds a scalar
function returning ``(value, analytic_gradient)``, and runs ``grad_check``.
Input magnitudes match what the pipeline feeds each operation (pixels in
[0, 1], unit-norm entity embeddings, LeCun-scaled weights).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import GradCheckReport, attention_backward, grad_check, scaled_dot_attention
from .objective import (
    LossWeights,
    composite_loss,
    recon_grad,
    recon_loss,
    semantic_grad,
    semantic_loss,
    temporal_grad,
    temporal_loss,
)
from .pvr.model import LevelSpec, init_params
from .pvr.refine import refine_backward, refine_forward
from .rng import stream

EPS = 1e-3
TOLERANCE = 1e-4


@dataclass(frozen=True)
class CaseResult:
    name: str
    instances: int
    worst: GradCheckReport

    @property
    def passed(self) -> bool:
        return self.worst.max_rel_error < TOLERANCE


def _wrap(f, perturb: float):
    if not perturb:
        return f

    def g(x):
        value, grad = f(x)
        return value, grad + perturb

    return g


def _attention_case(rng, which: int):
    Q, K, V = rng.standard_normal((3, 4)), rng.standard_normal((5, 4)), rng.standard_normal((5, 4))
    R = rng.standard_normal((3, 4))
    args = [Q, K, V]

    def f(x):
        a = list(args)
        a[which] = x
        out, _ = scaled_dot_attention(*a)
        return float(np.sum(out * R)), attention_backward(*a, R)[which]

    return f, args[which]


def _recon_case(rng):
    target = rng.random((3, 4, 4, 3))
    return (lambda x: (recon_loss(x, target), recon_grad(x, target))), rng.random(target.shape)


def _temporal_case(rng):
    return (lambda x: (temporal_loss(x), temporal_grad(x))), rng.random((5, 4, 4, 3))


def _semantic_case(rng):
    graph_emb = rng.standard_normal(32)
    return (lambda x: (semantic_loss(x, graph_emb), semantic_grad(x, graph_emb))), rng.standard_normal(32)


def _composite_case(rng):
    target = rng.random((4, 8, 8, 3))
    graph_emb = rng.standard_normal(32)
    weights = LossWeights(0.5, 0.1)

    def f(x):
        b, g = composite_loss(x, target, graph_emb, weights)
        return b.composite, g

    return f, rng.random(target.shape)


_REFINE_SPEC = LevelSpec(resolutions=((16, 16),), frames=3, patch=8)


def _refine_setup(rng):
    params = init_params(int(rng.integers(2**32)), _REFINE_SPEC)
    lv = params.levels[0]
    lv.mixing.logits = rng.standard_normal(3)
    v = rng.random(_REFINE_SPEC.shape(0))
    target = rng.random(v.shape)
    text = rng.standard_normal((3, 32))
    text /= np.linalg.norm(text, axis=1, keepdims=True)
    graph_emb = text.mean(axis=0)
    return lv, v, target, text, graph_emb


def _refine_loss(lv, v, target, text, graph_emb):
    out, cache = refine_forward(v, text, lv, _REFINE_SPEC, 0)
    b, dout = composite_loss(out, target, graph_emb)
    return b.composite, refine_backward(cache, dout)


def refine_param_check(rng, perturb: float = 0.0, per_array: int = 4) -> GradCheckReport:
    """End-to-end refine step + composite loss, sampled coordinates of every parameter array."""
    lv, v, target, text, graph_emb = _refine_setup(rng)
    worst = None
    for name, arr in list(lv.arrays().items()):
        base = arr.copy()

        def f(x, name=name):
            lv.set(name, x)
            value, (_, _, grads) = _refine_loss(lv, v, target, text, graph_emb)
            return value, grads[name]

        flat = rng.choice(base.size, size=min(per_array, base.size), replace=False)
        coords = [np.unravel_index(i, base.shape) for i in flat]
        rep = grad_check(_wrap(f, perturb), base, EPS, coords)
        lv.set(name, base)
        if worst is None or rep.max_rel_error > worst.max_rel_error:
            worst = rep
    return worst


def refine_input_check(rng, perturb: float = 0.0, coords: int = 24) -> GradCheckReport:
    lv, v, target, text, graph_emb = _refine_setup(rng)

    def f(x):
        value, (dv, _, _) = _refine_loss(lv, x, target, text, graph_emb)
        return value, dv

    flat = rng.choice(v.size, size=coords, replace=False)
    return grad_check(_wrap(f, perturb), v, EPS, [np.unravel_index(i, v.shape) for i in flat])


def _simple(builder: Callable) -> Callable:
    def run(rng, perturb=0.0):
        f, x = builder(rng)
        return grad_check(_wrap(f, perturb), x, EPS)

    return run


CASES: dict[str, Callable] = {
    "attention.dQ": _simple(lambda r: _attention_case(r, 0)),
    "attention.dK": _simple(lambda r: _attention_case(r, 1)),
    "attention.dV": _simple(lambda r: _attention_case(r, 2)),
    "loss.recon": _simple(_recon_case),
    "loss.temporal": _simple(_temporal_case),
    "loss.semantic": _simple(_semantic_case),
    "loss.composite": _simple(_composite_case),
    "refine_step.params": refine_param_check,
    "refine_step.input": refine_input_check,
}


def run_suite(seed: int = 0, instances: int = 50, perturb: float = 0.0, cases=None) -> list[CaseResult]:
    results = []
    for name in cases or CASES:
        rng = stream(seed, f"gradcheck/{name}")
        worst = None
        for _ in range(instances):
            rep = CASES[name](rng, perturb)
            if worst is None or rep.max_rel_error > worst.max_rel_error:
                worst = rep
        results.append(CaseResult(name, instances, worst))
    return results


def format_table(results: list[CaseResult]) -> str:
    lines = [f"{'operation':<20} {'inst':>5} {'max rel err':>12} {'analytic':>13} {'numeric':>13}  status"]
    for r in results:
        w = r.worst
        lines.append(
            f"{r.name:<20} {r.instances:>5} {w.max_rel_error:>12.3e} {w.analytic:>13.6e} {w.numeric:>13.6e}  "
            + ("ok" if r.passed else "FAIL")
        )
    return "\n".join(lines)
