"""JSON run files describing batches of simulation scenarios.

A run file is either a JSON array of scenario objects or an object with a
``scenarios`` array. Each scenario mirrors :class:`TrialConfig` plus a
unique ``label`` and a replication count ``reps``; omitted fields take the
documented defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .core import (DEFAULT_SEED, ConfigError, Fallback, Rule, Targeting,
                   TestKind, TrialConfig, validate)

DEFAULT_REPS = 10_000

_ENUM_FIELDS = {"rule": Rule, "targeting": Targeting, "test": TestKind,
                "fallback": Fallback}
_INT_FIELDS = ("n", "burn_in_per_arm", "seed", "reps")
_FLOAT_FIELDS = ("p0", "p1", "alpha", "erade_alpha")
_KNOWN_FIELDS = {"label", "reps", "n", "p0", "p1", "burn_in_per_arm", "alpha",
                 "erade_alpha", "seed"} | set(_ENUM_FIELDS)


class RunFileError(ValueError):
    """The run file cannot be parsed or a scenario fails validation."""


@dataclass(frozen=True)
class Scenario:
    """One labeled simulation request."""

    label: str
    config: TrialConfig
    reps: int


def _scenario_from_dict(raw: dict, position: int) -> Scenario:
    label = raw.get("label")
    if not isinstance(label, str) or not label:
        raise RunFileError(f"scenario #{position}: missing or empty 'label'")
    where = f"scenario '{label}'"
    unknown = set(raw) - _KNOWN_FIELDS
    if unknown:
        raise RunFileError(f"{where}: unknown field '{sorted(unknown)[0]}'")
    for field in ("n", "p0", "p1"):
        if field not in raw:
            raise RunFileError(f"{where}: missing required field '{field}'")
    kwargs = {}
    for field in _INT_FIELDS:
        if field in raw:
            value = raw[field]
            if isinstance(value, bool) or not isinstance(value, int):
                raise RunFileError(f"{where}: field '{field}' must be an integer")
            kwargs[field] = value
    for field in _FLOAT_FIELDS:
        if field in raw:
            value = raw[field]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise RunFileError(f"{where}: field '{field}' must be a number")
            kwargs[field] = float(value)
    for field, enum_type in _ENUM_FIELDS.items():
        if field in raw:
            try:
                kwargs[field] = enum_type(raw[field])
            except ValueError:
                allowed = ", ".join(e.value for e in enum_type)
                raise RunFileError(
                    f"{where}: field '{field}' must be one of: {allowed}") from None
    reps = kwargs.pop("reps", DEFAULT_REPS)
    if reps < 1:
        raise RunFileError(f"{where}: reps must be at least 1")
    config = TrialConfig(**kwargs)
    try:
        validate(config)
    except ConfigError as exc:
        raise RunFileError(f"{where}: {exc}") from None
    return Scenario(label=label, config=config, reps=reps)


def parse_run_file(path: str | Path) -> list[Scenario]:
    """Parse and validate a run file; labels must be unique."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RunFileError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if isinstance(data, dict) and "scenarios" in data:
        data = data["scenarios"]
    if not isinstance(data, list):
        raise RunFileError(f"{path}: expected a JSON array of scenarios")
    scenarios = [
        _scenario_from_dict(raw, position) if isinstance(raw, dict)
        else _raise_not_object(position)
        for position, raw in enumerate(data)
    ]
    seen: set[str] = set()
    for scenario in scenarios:
        if scenario.label in seen:
            raise RunFileError(f"duplicate label '{scenario.label}'")
        seen.add(scenario.label)
    return scenarios


def _raise_not_object(position: int):
    raise RunFileError(f"scenario #{position}: expected a JSON object")


def write_run_file(path: str | Path, scenarios: list[Scenario]):
    """Serialize scenarios back to the run-file format."""
    rows = []
    for s in scenarios:
        c = s.config
        rows.append({
            "label": s.label, "n": c.n, "p0": c.p0, "p1": c.p1,
            "burn_in_per_arm": c.burn_in_per_arm, "alpha": c.alpha,
            "erade_alpha": c.erade_alpha, "rule": c.rule.value,
            "targeting": c.targeting.value, "test": c.test.value,
            "fallback": c.fallback.value, "seed": c.seed, "reps": s.reps,
        })
    Path(path).write_text(json.dumps({"scenarios": rows}, indent=2) + "\n",
                          encoding="utf-8")
