"""JSON documents for systems and profiles (schema ``selfsim/1``), plus state input.

Keys are written in a fixed order and floats with ``repr`` (shortest
round-trip), so equal inputs give byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import Tolerances, load_tolerances
from .euler import euler_system
from .profile import SCHEMA, Profile, dumps, profile_from_dict, profile_to_dict
from .psystem import psystem
from .system import SystemDef

EULER_DEFAULTS = {"model": "euler", "mach": 2.0, "rho0": 1.0, "gamma": 1.4, "epsilon": 0.05}
PSYSTEM_DEFAULTS = {"model": "psystem", "gamma": 1.4, "tau0": 1.0, "u0": 0.0, "epsilon": 0.05}


def system_config(sys: SystemDef) -> dict:
    params = dict(sys.raw.params)
    model = params.get("model", sys.raw.name)
    keys = EULER_DEFAULTS if model == "euler" else PSYSTEM_DEFAULTS
    doc = {"schema": SCHEMA, "kind": "system", "model": model}
    for k in keys:
        if k != "model":
            doc[k] = float(params[k])
    return doc


def system_from_config(doc: dict, tol: Tolerances | None = None, calibrate: bool = True) -> SystemDef:
    """Build a validated system from a config document.

    Missing keys take the defaults (Euler at Mach 2, ``eps = 0.05``).
    """
    if doc.get("schema", SCHEMA) != SCHEMA or doc.get("kind", "system") != "system":
        raise ValueError("not a selfsim/1 system document")
    tol = load_tolerances() if tol is None else tol
    model = doc.get("model", "euler")
    if model == "euler":
        p = {**EULER_DEFAULTS, **doc}
        return euler_system(gamma=float(p["gamma"]), mach=float(p["mach"]), rho0=float(p["rho0"]),
                            epsilon=float(p["epsilon"]), tol=tol, calibrate=calibrate)
    if model == "psystem":
        p = {**PSYSTEM_DEFAULTS, **doc}
        return psystem(gamma=float(p["gamma"]), tau0=float(p["tau0"]), u0=float(p["u0"]),
                       epsilon=float(p["epsilon"]), tol=tol, calibrate=calibrate)
    raise ValueError(f"unknown model {model!r}")


def state_from_doc(sys: SystemDef, doc: dict) -> np.ndarray:
    """``V`` from ``{"V": [...]}``, ``{"U": [...]}`` or Euler ``{"primitive": {"rho", "u", "v"}}``."""
    if "V" in doc:
        return np.array(doc["V"], dtype=float)
    if "U" in doc:
        return sys.to_V(np.array(doc["U"], dtype=float))
    if "primitive" in doc:
        p = doc["primitive"]
        rho = float(p["rho"])
        return sys.to_V(np.array([rho, rho * float(p["u"]), rho * float(p["v"])]))
    raise ValueError("state document needs one of 'V', 'U' or 'primitive'")


def profile_document(profile: Profile, sys: SystemDef | None = None) -> dict:
    doc = profile_to_dict(profile)
    if sys is not None:
        doc["system"] = system_config(sys)
    return doc


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def write_json(path, doc: dict) -> None:
    write_text(path, dumps(doc))


def load_profile(path, sys: SystemDef | None = None) -> tuple[Profile, SystemDef]:
    """Profile and its system; the embedded system config is used when ``sys`` is None."""
    doc = read_json(path)
    if sys is None:
        if "system" not in doc:
            raise ValueError("profile has no embedded system; pass --system")
        sys = system_from_config(doc["system"])
    return profile_from_dict(doc, sys), sys
