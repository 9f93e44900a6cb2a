"""End-to-end toy audit: synthesize, train, estimate from shadows, attack, score."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .attack import btta_attack, cbtta_attack
from .estimation import compute_stats, estimate_from_shadows
from .evaluation import score
from .partition import as_scheme, format_category
from .stats import expected_metrics, global_from_categories
from .toy import make_synthetic_dataset, train_toy_model


@dataclass(frozen=True)
class DemoConfig:
    seed: int = 7
    shadows: int = 20
    records: int = 10_000
    m: int = 4
    d: int = 400
    spread: float = 1.5
    epochs: int = 100
    lr: float = 1.0
    train_fraction: float = 0.5
    scheme: str = "ppl"


def _train(config: DemoConfig, stream: int, model_id: str):
    data = make_synthetic_dataset(config.m, config.d, config.records // config.m, config.spread, [config.seed, stream])
    _, dump = train_toy_model(data, config.train_fraction, config.epochs, config.lr, [config.seed, stream, 1], model_id)
    return dump


def estimation_error(truth, estimate) -> dict:
    """Largest absolute differences between two stats maps, over shared categories."""
    worst = {"q": 0.0, "p_train": 0.0, "p_test": 0.0, "d": 0.0}
    for cid, t in truth.items():
        e = estimate.get(cid)
        if e is None or t.d <= 0 or e.d <= 0:
            continue
        worst["q"] = max(worst["q"], abs(t.q - e.q))
        worst["d"] = max(worst["d"], abs(t.d - e.d))
        for name in ("p_train", "p_test"):
            a, b = getattr(t, name), getattr(e, name)
            if a is not None and b is not None:
                worst[name] = max(worst[name], abs(a - b))
    return {
        "max_abs": max(worst.values()),
        "by_field": worst,
        "missing_categories": sorted(format_category(c) for c in truth if c not in estimate),
    }


def run_demo(config: DemoConfig = DemoConfig()) -> dict:
    scheme = as_scheme(config.scheme)
    target = _train(config, 0, "target")
    shadows = [_train(config, k + 1, f"shadow{k}") for k in range(config.shadows)]

    truth = compute_stats(target, scheme)
    truth_global = global_from_categories(truth.values())
    estimate = estimate_from_shadows(shadows, scheme)
    estimate_global = global_from_categories(estimate.values())

    decisions = cbtta_attack(scheme, estimate, estimate_global, target.records)
    categorical = score(decisions, target, truth)
    plain = score(btta_attack(estimate_global, target.records), target, truth_global)

    return {
        "config": asdict(config),
        "target": {"q": truth_global.q, "p0": truth_global.p0, "p1": truth_global.p1, "gap": truth_global.gap},
        "shadow_estimate": {
            "q": estimate_global.q, "p0": estimate_global.p0, "p1": estimate_global.p1,
            "error": estimation_error(truth, estimate),
        },
        "btta": {
            "expected": expected_metrics(truth_global).to_dict() if truth_global.gap_ok else None,
            "report": plain.to_dict(),
        },
        "cbtta": {
            "fallback_decisions": sum(d.fallback for d in decisions),
            "report": categorical.to_dict(),
        },
    }
