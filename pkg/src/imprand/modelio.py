"""File formats: JSON models, systems, gambles and batteries, trajectory CSV.

All rationals travel as decimal-free "p/q" or "n" strings and round-trip
bit-exactly.  Floats appear only in *_log2 / *_bits fields.  Unknown JSON
fields are rejected so that typos fail loudly instead of silently changing
meaning.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

from imprand.core import (
    Gamble,
    ImprandError,
    ModelInvariantError,
    ProbabilityMassFunction,
    SampleSpace,
    format_rational,
    log2_rational,
    parse_rational,
)
from imprand.lowerexp import (
    AnchorGammaModel,
    AnchorIntervalModel,
    EnvelopeModel,
    IntervalQ,
    LinearModel,
    LowerExpectation,
    VacuousModel,
)
from imprand.forecasting import (
    CyclicSystem,
    ForecastingSystem,
    StationarySystem,
    TableSystem,
)
from imprand.martingale import (
    LLNStrategyParams,
    MultiplierProcess,
    SelectionProcess,
)
from imprand.analysis import Trajectory


class ParseError(ImprandError):
    """Malformed file content: bad JSON, unknown fields, bad rationals."""


def _require_fields(obj: dict, required: set, optional: set, context: str) -> None:
    if not isinstance(obj, dict):
        raise ParseError(f"{context}: expected a JSON object, got {type(obj).__name__}")
    keys = set(obj)
    unknown = keys - required - optional
    if unknown:
        raise ParseError(f"{context}: unknown fields {sorted(unknown)}")
    missing = required - keys
    if missing:
        raise ParseError(f"{context}: missing fields {sorted(missing)}")


def _rational(text, context: str) -> Fraction:
    try:
        return parse_rational(text)
    except ModelInvariantError as exc:
        raise ParseError(f"{context}: {exc}") from None


def _rational_vector(values, context: str) -> Tuple[Fraction, ...]:
    if not isinstance(values, list):
        raise ParseError(f"{context}: expected a list of rational strings")
    return tuple(_rational(v, context) for v in values)


def _space_from(obj: dict, context: str) -> SampleSpace:
    alphabet = obj.get("alphabet")
    if not isinstance(alphabet, list) or not all(isinstance(t, str) for t in alphabet):
        raise ParseError(f"{context}: 'alphabet' must be a list of strings")
    return SampleSpace(tuple(alphabet))


_MODEL_FIELDS = {
    "linear": {"vertices"},
    "envelope": {"vertices"},
    "vacuous": set(),
    "gamma_f": {"gamma", "anchor"},
    "interval_f": {"interval", "anchor"},
}


def model_from_dict(obj: dict, context: str = "model") -> LowerExpectation:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError(f"{context}: missing 'kind'")
    kind = obj["kind"]
    if kind not in _MODEL_FIELDS:
        raise ParseError(f"{context}: unknown kind {kind!r}")
    _require_fields(obj, {"alphabet", "kind"} | _MODEL_FIELDS[kind], set(), context)
    space = _space_from(obj, context)
    if kind == "vacuous":
        return VacuousModel(space)
    if kind in ("linear", "envelope"):
        rows = obj["vertices"]
        if not isinstance(rows, list) or not rows:
            raise ParseError(f"{context}: 'vertices' must be a non-empty list")
        if kind == "linear" and len(rows) != 1:
            raise ParseError(f"{context}: linear model takes exactly one vertex")
        pmfs = tuple(
            ProbabilityMassFunction(space, _rational_vector(row, context))
            for row in rows
        )
        return LinearModel(pmfs[0]) if kind == "linear" else EnvelopeModel(pmfs)
    anchor = Gamble(space, _rational_vector(obj["anchor"], context))
    if kind == "gamma_f":
        return AnchorGammaModel(anchor=anchor, gamma=_rational(obj["gamma"], context))
    interval = obj["interval"]
    if not isinstance(interval, list) or len(interval) != 2:
        raise ParseError(f"{context}: 'interval' must be a two-element list")
    return AnchorIntervalModel(
        anchor=anchor,
        interval=IntervalQ(_rational(interval[0], context), _rational(interval[1], context)),
    )


def model_to_dict(model: LowerExpectation) -> dict:
    alphabet = list(model.space.symbols)
    if isinstance(model, VacuousModel):
        return {"alphabet": alphabet, "kind": "vacuous"}
    if isinstance(model, LinearModel):
        return {
            "alphabet": alphabet,
            "kind": "linear",
            "vertices": [[format_rational(w) for w in model.pmf.weights]],
        }
    if isinstance(model, EnvelopeModel):
        return {
            "alphabet": alphabet,
            "kind": "envelope",
            "vertices": [[format_rational(w) for w in v.weights] for v in model.vertices],
        }
    if isinstance(model, AnchorGammaModel):
        return {
            "alphabet": alphabet,
            "kind": "gamma_f",
            "gamma": format_rational(model.gamma),
            "anchor": [format_rational(v) for v in model.anchor.values],
        }
    if isinstance(model, AnchorIntervalModel):
        return {
            "alphabet": alphabet,
            "kind": "interval_f",
            "interval": [
                format_rational(model.interval.lo),
                format_rational(model.interval.hi),
            ],
            "anchor": [format_rational(v) for v in model.anchor.values],
        }
    raise ModelInvariantError(f"cannot serialize model type {type(model).__name__}")


def load_model(path) -> LowerExpectation:
    return model_from_dict(_load_json(path), context=str(path))


def save_model(model: LowerExpectation, path) -> None:
    _dump_json(model_to_dict(model), path)


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None


def _dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def system_from_dict(obj: dict, context: str = "system") -> ForecastingSystem:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError(f"{context}: missing 'kind'")
    kind = obj["kind"]
    if kind == "stationary":
        _require_fields(obj, {"kind", "models"}, set(), context)
        models = obj["models"]
        if not isinstance(models, list) or len(models) != 1:
            raise ParseError(f"{context}: stationary system takes exactly one model")
        return StationarySystem(model_from_dict(models[0], context))
    if kind == "cyclic":
        _require_fields(obj, {"kind", "models"}, set(), context)
        models = obj["models"]
        if not isinstance(models, list) or not models:
            raise ParseError(f"{context}: cyclic system needs a non-empty model list")
        return CyclicSystem(tuple(model_from_dict(m, context) for m in models))
    if kind == "table":
        _require_fields(obj, {"kind", "table", "default"}, set(), context)
        default = model_from_dict(obj["default"], context)
        table: Dict[Tuple[int, ...], LowerExpectation] = {}
        rows = obj["table"]
        if not isinstance(rows, list):
            raise ParseError(f"{context}: 'table' must be a list")
        for row in rows:
            _require_fields(row, {"situation", "model"}, set(), context)
            tokens = row["situation"]
            if not isinstance(tokens, list):
                raise ParseError(f"{context}: 'situation' must be a token list")
            key = tuple(default.space.index_of(t) for t in tokens)
            table[key] = model_from_dict(row["model"], context)
        return TableSystem(table=table, default=default)
    raise ParseError(f"{context}: unknown system kind {kind!r}")


def system_to_dict(sys: ForecastingSystem) -> dict:
    if isinstance(sys, StationarySystem):
        return {"kind": "stationary", "models": [model_to_dict(sys.model)]}
    if isinstance(sys, CyclicSystem):
        return {"kind": "cyclic", "models": [model_to_dict(m) for m in sys.models]}
    if isinstance(sys, TableSystem):
        return {
            "kind": "table",
            "default": model_to_dict(sys.default),
            "table": [
                {
                    "situation": [sys.space.symbols[i] for i in key],
                    "model": model_to_dict(m),
                }
                for key, m in sorted(sys.table.items())
            ],
        }
    raise ModelInvariantError(f"cannot serialize system type {type(sys).__name__}")


def load_system(path) -> ForecastingSystem:
    return system_from_dict(_load_json(path), context=str(path))


def save_system(sys: ForecastingSystem, path) -> None:
    _dump_json(system_to_dict(sys), path)


def gamble_from_dict(obj: dict, context: str = "gamble") -> Gamble:
    _require_fields(obj, {"alphabet", "values"}, set(), context)
    space = _space_from(obj, context)
    return Gamble(space, _rational_vector(obj["values"], context))


def gamble_to_dict(g: Gamble) -> dict:
    return {
        "alphabet": list(g.space.symbols),
        "values": [format_rational(v) for v in g.values],
    }


def load_gamble(path) -> Gamble:
    return gamble_from_dict(_load_json(path), context=str(path))


def _selection_from_dict(obj: dict, context: str) -> SelectionProcess:
    _require_fields(obj, {"kind"}, {"m", "i"}, context)
    kind = obj["kind"]
    if kind == "all":
        return SelectionProcess.all_ones()
    if kind == "residue":
        if "m" not in obj or "i" not in obj:
            raise ParseError(f"{context}: residue selection needs 'm' and 'i'")
        return SelectionProcess.residue_class(int(obj["m"]), int(obj["i"]))
    raise ParseError(f"{context}: unknown selection kind {kind!r}")


BatteryEntry = Union[LLNStrategyParams, MultiplierProcess]


def battery_from_list(
    entries: list, space: SampleSpace, context: str = "battery"
) -> Tuple[BatteryEntry, ...]:
    if not isinstance(entries, list) or not entries:
        raise ParseError(f"{context}: expected a non-empty list of strategies")
    out: List[BatteryEntry] = []
    for idx, entry in enumerate(entries):
        where = f"{context}[{idx}]"
        if not isinstance(entry, dict) or "type" not in entry:
            raise ParseError(f"{where}: missing 'type'")
        if entry["type"] == "lln":
            _require_fields(
                entry, {"type", "gamble", "direction", "epsilon", "selection"}, set(), where
            )
            out.append(
                LLNStrategyParams(
                    f=Gamble(space, _rational_vector(entry["gamble"], where)),
                    direction=entry["direction"],
                    epsilon=_rational(entry["epsilon"], where),
                    selection=_selection_from_dict(entry["selection"], where),
                )
            )
        elif entry["type"] == "multiplier":
            _require_fields(entry, {"type", "rows", "default"}, set(), where)
            default = Gamble(space, _rational_vector(entry["default"], where))
            rows: Dict[Tuple[int, ...], Gamble] = {}
            for row in entry["rows"]:
                _require_fields(row, {"situation", "factor"}, set(), where)
                key = tuple(space.index_of(t) for t in row["situation"])
                rows[key] = Gamble(space, _rational_vector(row["factor"], where))
            out.append(
                MultiplierProcess(space, lambda s, r=rows, d=default: r.get(s.symbols, d))
            )
        else:
            raise ParseError(f"{where}: unknown strategy type {entry['type']!r}")
    return tuple(out)


def load_battery(path, space: SampleSpace) -> Tuple[BatteryEntry, ...]:
    return battery_from_list(_load_json(path), space, context=str(path))


def write_trajectory_csv(trajectory: Trajectory, path) -> None:
    """One row per (step, strategy): exact capital plus the float mixture
    log2 at that step.  Step 0 has no symbol."""
    prefix = trajectory.prefix
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n", "symbol", "strategy_id", "capital_num", "capital_den", "mixture_log2"]
        )
        for n in range(len(prefix) + 1):
            symbol = prefix.space.symbols[prefix.symbols[n - 1]] if n > 0 else ""
            mix_log2 = repr(log2_rational(trajectory.mixture[n]))
            for i, path_i in enumerate(trajectory.strategy_capitals):
                c = path_i[n]
                writer.writerow([n, symbol, i, c.numerator, c.denominator, mix_log2])
