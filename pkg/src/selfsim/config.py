"""Centralized numerical tolerances.

All defaults live here; any field can be overridden with
:meth:`Tolerances.replace` or from a JSON document (see
:func:`load_tolerances`).
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

TOL_ENV_VAR = "SELFSIM_TOL_FILE"


@dataclass(frozen=True)
class Tolerances:
    # numerics
    gap: float = 1e-8
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    quad_tol: float = 1e-10
    quad_max_depth: int = 30
    fd_rel_step: float = 1e-5
    fd_hessian_rel_step: float = 1e-3
    # system construction
    ld_tol: float = 1e-8
    entropy_pair_tol: float = 1e-6
    degenerate_form_tol: float = 1e-10
    eps_halvings: int = 6
    n_random_samples: int = 64
    n_hat_triples: int = 64
    sample_seed: int = 20240917
    # waves
    rh_tol: float = 1e-9
    jump_rh_tol: float = 1e-6
    shock_step_fraction: float = 1.0 / 128.0
    fan_steps_per_eps: int = 64
    fan_min_nodes: int = 32
    fan_inverse_tol: float = 1e-11
    lax_halvings: int = 8
    # sectors / verification
    sector_safety: float = 1.1
    resonance_tol: float = 1e-8
    nbh_slack: float = 0.9
    n_pairs: int = 256
    weak_tol: float = 1e-7
    entropy_tol: float = 1e-12
    classify_rh_tol: float = 1e-8
    zero_strength: float = 1e-12

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Tolerances":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**data)


DEFAULT = Tolerances()


def load_tolerances(path: str | os.PathLike | None = None) -> Tolerances:
    """Load overrides from ``path`` or from ``$SELFSIM_TOL_FILE``.

    Missing file/variable gives the defaults.
    """
    if path is None:
        path = os.environ.get(TOL_ENV_VAR)
    if not path:
        return DEFAULT
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return Tolerances.from_dict({**DEFAULT.to_dict(), **data})
