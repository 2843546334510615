"""Scenario documents: JSON objects describing one verification run.

Complex matrices are nested arrays whose entries are ``[re, im]`` pairs (a
bare real number is accepted as shorthand). Validation collects every
field-level problem before raising, so a broken file reports all of them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .errors import ScenarioError

KINDS = ("algebra-check", "measure-demo", "darwinism-report", "game-value", "axiom-check")
MOTIONS = ("permutation", "measure", "coarse", "sequential")
STAGES = ("1", "2", "3", "4.1", "4.2", "4.3", "4.4", "auto")
PHASE_MODES = ("zero", "random")
CONTROL_BASES = ("fourier", "hadamard", "same", "random")
TOTAL_DIM_CAP = 64
WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    n: Optional[int] = None
    trials: Optional[int] = None
    motion: Optional[str] = None
    stage: Optional[str] = None
    spectrum: Optional[tuple] = None
    weights: Optional[tuple] = None
    multiplicities: Optional[tuple] = None
    total: Optional[int] = None
    permutation: Optional[tuple] = None
    phases: str = "zero"
    seed: int = 0
    control: Optional[str] = None
    payoff: Optional[tuple] = None
    state: Optional[tuple] = None
    observable: Optional[tuple] = None
    mixture_weights: Optional[tuple] = None
    mixture_vectors: Optional[tuple] = None
    games: Optional[int] = None
    tolerance: Optional[float] = None

    def matrix(self, field_name: str) -> Optional[np.ndarray]:
        value = getattr(self, field_name)
        return None if value is None else np.array(value, dtype=complex)

    @property
    def total_dim(self) -> int:
        """Largest Hilbert-space dimension the scenario will build."""
        n = self.n or 0
        if self.kind == "algebra-check":
            return n
        if self.kind == "measure-demo" and self.motion == "permutation":
            return n
        if self.kind == "measure-demo" and self.motion == "coarse":
            return len(self.multiplicities or ()) * sum(self.multiplicities or ())
        if self.kind in ("measure-demo", "darwinism-report"):
            return n * n
        if self.kind == "game-value":
            k = len(self.spectrum or ())
            if self.stage in ("2", "4.3") and self.multiplicities:
                return k * sum(self.multiplicities)
            if self.stage == "auto" and self.state is not None:
                return len(self.state)
            return k
        return 4 * 8


# ------------------------------------------------------------- field readers

def _number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _complex_entry(x):
    if _number(x):
        return complex(float(x), 0.0)
    if isinstance(x, list) and len(x) == 2 and all(_number(v) for v in x):
        return complex(float(x[0]), float(x[1]))
    raise ValueError


def _read_matrix(raw, key, errors):
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) for r in raw):
        errors.append(f"{key}: expected a square array of [re, im] pairs")
        return None
    try:
        rows = tuple(tuple(_complex_entry(x) for x in row) for row in raw)
    except ValueError:
        errors.append(f"{key}: entries must be numbers or [re, im] pairs")
        return None
    if any(len(r) != len(rows) for r in rows):
        errors.append(f"{key}: matrix is not square")
        return None
    if not all(np.isfinite(abs(x)) for r in rows for x in r):
        errors.append(f"{key}: entries must be finite")
        return None
    return rows


def _read_reals(raw, key, errors):
    if not isinstance(raw, list) or not raw or not all(_number(x) for x in raw):
        errors.append(f"{key}: expected a non-empty list of numbers")
        return None
    vals = tuple(float(x) for x in raw)
    if not all(np.isfinite(vals)):
        errors.append(f"{key}: values must be finite")
        return None
    return vals


def _read_ints(raw, key, errors, minimum=0):
    if not isinstance(raw, list) or not raw or not all(isinstance(x, int) and not isinstance(x, bool) for x in raw):
        errors.append(f"{key}: expected a non-empty list of integers")
        return None
    if any(x < minimum for x in raw):
        errors.append(f"{key}: entries must be >= {minimum}")
        return None
    return tuple(raw)


def _read_int(raw, key, errors, minimum=1):
    if not isinstance(raw, int) or isinstance(raw, bool) or raw < minimum:
        errors.append(f"{key}: expected an integer >= {minimum}")
        return None
    return raw


def _read_choice(raw, key, choices, errors):
    if raw not in choices:
        errors.append(f"{key}: {raw!r} is not one of {', '.join(choices)}")
        return None
    return raw


_KNOWN = {f.name for f in fields(Scenario)} | {"M"}


def _require(doc, keys, errors, context):
    for k in keys:
        if k not in doc:
            errors.append(f"missing field {k!r} (required for {context})")


def parse_scenario(text: str, default_name: str = "scenario") -> Scenario:
    """Validate a JSON scenario document; raises ``ScenarioError`` listing every problem."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"not valid JSON: {exc}"]) from None
    if not isinstance(doc, dict):
        raise ScenarioError(["scenario must be a JSON object"])
    errors: list = []
    unknown = sorted(set(doc) - _KNOWN)
    if unknown:
        errors.append(f"unknown fields: {', '.join(unknown)}")
    kind = doc.get("kind")
    if kind is None:
        raise ScenarioError(errors + ["missing field 'kind'"])
    if kind not in KINDS:
        raise ScenarioError(errors + [f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}"])

    out = {"kind": kind}
    name = doc.get("name", default_name)
    if not isinstance(name, str) or not name:
        errors.append("name: expected a non-empty string")
    out["name"] = name if isinstance(name, str) and name else default_name

    if "n" in doc:
        out["n"] = _read_int(doc["n"], "n", errors)
    if "trials" in doc:
        out["trials"] = _read_int(doc["trials"], "trials", errors)
    if "games" in doc:
        out["games"] = _read_int(doc["games"], "games", errors)
    if "seed" in doc:
        out["seed"] = _read_int(doc["seed"], "seed", errors, minimum=0)
    if "phases" in doc:
        out["phases"] = _read_choice(doc["phases"], "phases", PHASE_MODES, errors)
    if "motion" in doc:
        out["motion"] = _read_choice(doc["motion"], "motion", MOTIONS, errors)
    if "stage" in doc:
        out["stage"] = _read_choice(str(doc["stage"]), "stage", STAGES, errors)
    if "control" in doc:
        out["control"] = _read_choice(doc["control"], "control", CONTROL_BASES, errors)
    if "tolerance" in doc:
        tol = doc["tolerance"]
        if not _number(tol) or not tol > 0:
            errors.append("tolerance: expected a positive number")
        else:
            out["tolerance"] = float(tol)
    for key in ("spectrum", "weights", "payoff", "mixture_weights"):
        if key in doc:
            out[key] = _read_reals(doc[key], key, errors)
    if "multiplicities" in doc:
        out["multiplicities"] = _read_ints(doc["multiplicities"], "multiplicities", errors)
    if "permutation" in doc:
        out["permutation"] = _read_ints(doc["permutation"], "permutation", errors)
    for key in ("state", "observable", "mixture_vectors"):
        if key in doc:
            out[key] = _read_matrix(doc[key], key, errors)
    total_key = "total" if "total" in doc else "M" if "M" in doc else None
    if total_key:
        out["total"] = _read_int(doc[total_key], total_key, errors)

    _validate_kind(out, doc, errors)
    if errors:
        raise ScenarioError(errors)
    scenario = Scenario(**{k: v for k, v in out.items() if v is not None})
    if scenario.total_dim > TOTAL_DIM_CAP:
        raise ScenarioError([
            f"total dimension {scenario.total_dim} exceeds the cap of {TOTAL_DIM_CAP}"
        ])
    return scenario


def _validate_weights(out, errors, key="weights"):
    w = out.get(key)
    if w is None:
        return
    if any(x < 0 for x in w):
        errors.append(f"{key}: weights must be non-negative")
    if abs(sum(w) - 1.0) > WEIGHT_SUM_TOL:
        errors.append(f"{key}: weight sum {sum(w):.15g} differs from 1")


def _validate_kind(out, doc, errors):
    kind = out["kind"]
    m = out.get("multiplicities")
    if m is not None and out.get("total") is not None and sum(m) != out["total"]:
        errors.append(f"multiplicity sum mismatch: sum(m) = {sum(m)} but M = {out['total']}")
    _validate_weights(out, errors)
    _validate_weights(out, errors, "mixture_weights")

    if kind in ("algebra-check", "darwinism-report"):
        _require(doc, ["n"], errors, kind)
    elif kind == "measure-demo":
        _require(doc, ["motion"], errors, kind)
        motion = out.get("motion")
        if motion == "coarse":
            _require(doc, ["multiplicities"], errors, "a coarse measurement")
            if m is not None and min(m) < 1:
                errors.append("multiplicities: every block needs at least one register value")
        elif motion is not None:
            _require(doc, ["n"], errors, f"a {motion} motion")
        perm = out.get("permutation")
        if perm is not None:
            if sorted(perm) != list(range(len(perm))):
                errors.append("permutation: not a bijection on 0..N-1")
            elif out.get("n") is not None and len(perm) != out["n"]:
                errors.append(f"permutation: length {len(perm)} does not match n = {out['n']}")
    elif kind == "game-value":
        _require(doc, ["stage"], errors, kind)
        _validate_game(out, doc, errors)

    spectrum, n = out.get("spectrum"), out.get("n")
    if spectrum is not None and n is not None and kind != "game-value" and len(spectrum) != n:
        errors.append(f"spectrum: {len(spectrum)} values for n = {n}")


def _validate_game(out, doc, errors):
    stage = out.get("stage")
    if stage is None:
        return
    if stage == "auto":
        _require(doc, ["state", "observable"], errors, "stage auto")
        st, ob = out.get("state"), out.get("observable")
        if st is not None and ob is not None and len(st) != len(ob):
            errors.append(f"state is {len(st)}-dimensional but observable is {len(ob)}-dimensional")
        size = len(ob) if ob is not None else None
    else:
        _require(doc, ["spectrum"], errors, f"stage {stage}")
        size = len(out["spectrum"]) if out.get("spectrum") else None
        if stage in ("2", "4.3"):
            _require(doc, ["multiplicities"], errors, f"stage {stage}")
            m = out.get("multiplicities")
            if m is not None and size is not None and len(m) != size:
                errors.append(f"multiplicities: {len(m)} entries for {size} eigenvalues")
            if stage == "2" and m is not None and min(m) < 1:
                errors.append("multiplicities: zero multiplicity is not allowed at stage 2")
        if stage in ("3", "4.4"):
            _require(doc, ["weights"], errors, f"stage {stage}")
            w = out.get("weights")
            if w is not None and size is not None and len(w) != size:
                errors.append(f"weights: {len(w)} entries for {size} eigenvalues")
        if stage == "4.1":
            _require(doc, ["mixture_weights", "mixture_vectors"], errors, "stage 4.1")
            mw, mv = out.get("mixture_weights"), out.get("mixture_vectors")
            if mw is not None and mv is not None and len(mw) != len(mv):
                errors.append(f"mixture_weights: {len(mw)} weights for {len(mv)} basis vectors")
            if mv is not None and size is not None and len(mv) != size:
                errors.append(f"mixture_vectors: dimension {len(mv)} for {size} eigenvalues")
    payoff = out.get("payoff")
    if payoff is not None and size is not None and len(payoff) != size:
        errors.append(f"payoff: {len(payoff)} values for {size} outcomes")


def _encode(value):
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return [[[z.real, z.imag] for z in row] for row in value]
    if isinstance(value, tuple):
        return list(value)
    return value


def serialize(s: Scenario) -> str:
    """Canonical JSON form; ``parse_scenario(serialize(s)) == s``."""
    doc = {}
    for f in fields(Scenario):
        value = getattr(s, f.name)
        if value is None:
            continue
        doc[f.name] = _encode(value)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
