"""Flat ``key=value`` experiment configuration files.

One setting per line, dotted keys, ``#`` starts a comment::

    name = window-batch
    student.kind = chain
    student.forget_rate = 0.0001
    teacher.kind = window          # online | naive | window | sampling
                                   # uniform | manual | final_only
                                   # (teacher.algorithm is an alias)
    teacher.formulation = batch
    max_steps = 20000
    seeds = 0..19

A manual baseline adds ``teacher.schedule = 0:200, 1:200, 2:300`` (task:steps).
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

from .errors import ConfigError
from .harness import STUDENT_CONFIGS, Baseline, BaselineConfig, ExperimentConfig
from .teachers import Algorithm, TeacherConfig

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"3"``, ``"0,2,5"`` or an inclusive range ``"0..19"``."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigError(f"empty seed range {text!r}")
            return tuple(range(lo, hi + 1))
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"bad seed list {text!r}") from exc


def parse_schedule(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            task, steps = item.split(":")
            out.append((int(task), int(steps)))
        except ValueError as exc:
            raise ConfigError(f"bad schedule entry {item!r}; expected task:steps") from exc
    return tuple(out)


def _coerce(value: str, ftype, key: str):
    ftype = str(ftype)
    try:
        if "bool" in ftype:
            v = value.lower()
            if v in _TRUE:
                return True
            if v in _FALSE:
                return False
            raise ValueError(value)
        if "tuple" in ftype:
            return tuple(int(x) for x in value.split(",") if x.strip())
        if "int" in ftype and "None" in ftype:
            return None if value.lower() in ("none", "") else int(value)
        if "int" in ftype:
            return int(value)
        if "float" in ftype:
            return float(value)
        return value
    except ValueError as exc:
        raise ConfigError(f"bad value {value!r} for {key}") from exc


def _build(cls, values: dict[str, str], prefix: str, ignore=()):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for k, v in values.items():
        if k in ignore:
            continue
        if k not in fields:
            raise ConfigError(f"unknown key {prefix}.{k}")
        kwargs[k] = _coerce(v, fields[k].type, f"{prefix}.{k}")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {prefix} settings: {exc}") from exc


def parse_config(text: str) -> ExperimentConfig:
    sections: dict[str, dict[str, str]] = {"": {}, "student": {}, "teacher": {}}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        section, _, name = key.rpartition(".")
        if section not in sections or not name:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if name in sections[section]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        sections[section][name] = value

    top, st, te = sections[""], sections["student"], sections["teacher"]
    kind = st.get("kind", "chain")
    if kind not in STUDENT_CONFIGS:
        raise ConfigError(f"unknown student.kind {kind!r}; expected one of {sorted(STUDENT_CONFIGS)}")
    student = _build(STUDENT_CONFIGS[kind], st, "student", ignore=("kind",))

    if "kind" in te and "algorithm" in te:
        raise ConfigError("give teacher.kind or teacher.algorithm, not both")
    tkind = te.pop("kind", te.pop("algorithm", "window"))
    if tkind in {b.value for b in Baseline}:
        opts = {k: v for k, v in te.items() if k in ("formulation",)}
        extra = set(te) - {"formulation", "schedule"}
        if extra:
            raise ConfigError(f"baseline teacher does not take {sorted(extra)}")
        try:
            teacher = BaselineConfig(
                kind=tkind,
                schedule=parse_schedule(te.get("schedule", "")),
                **opts,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    elif tkind in {a.value for a in Algorithm}:
        teacher = _build(TeacherConfig, dict(te, algorithm=tkind), "teacher")
    else:
        raise ConfigError(f"unknown teacher.kind {tkind!r}")

    known = {"name", "max_steps", "mastery_threshold", "seeds"}
    extra = set(top) - known
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}")
    try:
        return ExperimentConfig(
            student_kind=kind,
            student=student,
            teacher=teacher,
            max_steps=int(top.get("max_steps", 20000)),
            mastery_threshold=float(top.get("mastery_threshold", 0.99)),
            seeds=parse_seeds(top.get("seeds", "0")),
            name=top.get("name"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialise ``cfg`` back to the key=value format."""
    lines = []
    if cfg.name:
        lines.append(f"name={cfg.name}")
    lines.append(f"student.kind={cfg.student_kind}")
    for f in dataclasses.fields(cfg.student):
        v = getattr(cfg.student, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"student.{f.name}={'none' if v is None else v}")
    t = cfg.teacher
    if isinstance(t, BaselineConfig):
        lines.append(f"teacher.kind={t.kind.value}")
        lines.append(f"teacher.formulation={t.formulation.value}")
        if t.schedule:
            lines.append("teacher.schedule=" + ",".join(f"{a}:{n}" for a, n in t.schedule))
    else:
        lines.append(f"teacher.kind={t.algorithm.value}")
        for f in dataclasses.fields(t):
            if f.name == "algorithm":
                continue
            v = getattr(t, f.name)
            lines.append(f"teacher.{f.name}={getattr(v, 'value', v)}")
    lines.append(f"max_steps={cfg.max_steps}")
    lines.append(f"mastery_threshold={cfg.mastery_threshold!r}")
    lines.append("seeds=" + ",".join(str(s) for s in cfg.seeds))
    return "\n".join(lines) + "\n"
