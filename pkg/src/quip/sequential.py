"""Sequential design loop: fit, optimize the acquisition, evaluate, append.

The loop follows the standard model-based pattern: at each iteration the
surrogate is refit by maximum likelihood on all data so far, the chosen
acquisition (ALM for active learning, UCB for optimization) is globally
optimized, and the simulator is evaluated at the selected point.

Everything here uses the maximization convention; simulators that expose
costs should be passed in negated (wrap as ``lambda x: -cost(x)``).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .acquisition import AcquisitionSpec, optimize_acquisition
from .encoding import Design, Point, design_from_dict, design_to_dict
from .gp import FitConfig, KernelParams, build_model, fit_mle

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Campaign:
    design: Design
    responses: np.ndarray
    spec: AcquisitionSpec
    n_seq: int  # remaining budget
    history: tuple[dict, ...] = field(default=())
    seed: int = 0

    def __post_init__(self):
        f = np.asarray(self.responses, dtype=float)
        object.__setattr__(self, "responses", f)
        if f.shape != (self.design.n,):
            raise ValueError("responses and design sizes differ")


class CampaignError(RuntimeError):
    """An iteration failed; the partial campaign is preserved on the error."""

    def __init__(self, message: str, partial: Campaign, cause: Exception):
        super().__init__(message)
        self.partial = partial
        self.cause = cause


def best_so_far(c: Campaign) -> tuple[Point, float]:
    """Best evaluated point (running max of responses, first-index ties)."""
    k = int(np.argmax(c.responses))
    return c.design.points[k], float(c.responses[k])


def rrmse(truth, predictions) -> float:
    """Relative root-mean-squared error:
    sqrt( sum (y - yhat)^2 / sum (y - mean(y))^2 )."""
    y = np.asarray(truth, dtype=float)
    yhat = np.asarray(predictions, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1 or y.size == 0:
        raise ValueError("truth and predictions must be equal-length vectors")
    denom = float(np.sum((y - y.mean()) ** 2))
    if denom <= 0:
        raise ValueError("truth is constant: RRMSE denominator is zero")
    return float(np.sqrt(np.sum((y - yhat) ** 2) / denom))


def run_campaign(
    initial: Design,
    f_init,
    simulator,
    spec: AcquisitionSpec,
    n_seq: int,
    seed: int = 0,
    fit_config: FitConfig | None = None,
    fixed_params: KernelParams | None = None,
) -> Campaign:
    """Run the sequential loop for n_seq iterations and return the Campaign.

    `simulator` maps a Point to a scalar response (maximization sign).
    `fixed_params` freezes the kernel parameters instead of refitting every
    iteration; this test mode isolates acquisition behavior from fit drift.

    If an iteration raises, a CampaignError carrying the completed partial
    campaign is raised instead of discarding progress.
    """
    if n_seq < 0:
        raise ValueError("n_seq must be non-negative")
    f = np.asarray(f_init, dtype=float)
    c = Campaign(initial, f, spec, n_seq, (), seed)
    points = list(initial.points)
    history: list[dict] = []
    fit_config = fit_config or FitConfig(seed=seed)

    for it in range(1, n_seq + 1):
        t0 = time.perf_counter()
        try:
            D = Design(tuple(points))
            if fixed_params is not None:
                model = build_model(D, f, fixed_params, fit_config.nugget)
            else:
                model = fit_mle(D, f, fit_config)
            rep = optimize_acquisition(model, spec)
            x = rep.best_point
            y = float(simulator(x))
        except Exception as exc:
            partial = Campaign(
                Design(tuple(points)), f, spec, n_seq - it + 1, tuple(history), seed
            )
            raise CampaignError(
                f"iteration {it} failed: {exc}", partial, exc
            ) from exc
        points.append(x)
        f = np.append(f, y)
        history.append(
            {
                "iteration": it,
                "point": list(x.levels),
                "acq_value": rep.best_value,
                "certified_bound": rep.certified_bound,
                "relative_gap": rep.relative_gap,
                "solver_status": rep.status,
                "theta": [float(v) for v in model.params.theta],
                "mu": float(model.params.mu),
                "tau2": float(model.params.tau2),
                "response": y,
                "wall_time": time.perf_counter() - t0,
            }
        )
    return Campaign(Design(tuple(points)), f, spec, 0, tuple(history), seed)


def campaign_to_dict(c: Campaign) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "design": design_to_dict(c.design),
        "responses": [float(v) for v in c.responses],
        "spec": {
            "kind": c.spec.kind,
            "lam": c.spec.lam,
            "gap_tolerance": c.spec.gap_tolerance,
            "time_limit": c.spec.time_limit,
        },
        "n_seq": c.n_seq,
        "history": list(c.history),
        "seed": c.seed,
    }


def campaign_from_dict(obj: dict) -> Campaign:
    s = obj["spec"]
    spec = AcquisitionSpec(
        s["kind"], float(s["lam"]), float(s["gap_tolerance"]), s.get("time_limit")
    )
    return Campaign(
        design_from_dict(obj["design"]),
        np.asarray(obj["responses"], dtype=float),
        spec,
        int(obj["n_seq"]),
        tuple(obj["history"]),
        int(obj["seed"]),
    )


def save_campaign(c: Campaign, path) -> None:
    with open(path, "w") as fh:
        json.dump(campaign_to_dict(c), fh, indent=2)
        fh.write("\n")


def load_campaign(path) -> Campaign:
    with open(path) as fh:
        return campaign_from_dict(json.load(fh))
