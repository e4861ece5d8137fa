"""Economy, profile and manifest files.

All files are UTF-8 JSON written with sorted keys and two-space indentation,
so saving a loaded file reproduces it byte for byte. Numbers are exact:
utilities are JSON integers or ``"p/q"`` strings, probabilities are always
``"p/q"`` strings. Matrices are firms x workers.

Economy file::

    {
      "format_version": 1,
      "firms": ["f1", "f2"],
      "workers": ["w1", "w2"],
      "states": [
        {"id": "1", "probability": "1/2", "firm_utilities": [[2, 1], [1, 2]]},
        ...
      ],
      "worker_utilities": [[2, 1], [1, 2]]
    }

Profile file::

    {"format_version": 1, "reports": {"w1": ["f2", "f1"], "w2": []}}
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from matchlab.economy import Economy, OutcomeMap
from matchlab.errors import MatchlabError, SchemaError
from matchlab.game import Profile

FORMAT_VERSION = 1


def encode_number(x: Fraction) -> int | str:
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def encode_probability(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def decode_number(value: Any, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise SchemaError(f"{where}: expected an integer or a \"p/q\" string, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"{where}: cannot parse {value!r} as an exact rational") from None


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _parse(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None


def _require(data: Any, key: str, kind: type, where: str):
    if not isinstance(data, dict) or key not in data:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = data[key]
    if not isinstance(value, kind):
        raise SchemaError(f"{where}.{key}: expected {kind.__name__}")
    return value


def _check_version(data: Any, where: str) -> None:
    version = _require(data, "format_version", int, where)
    if version != FORMAT_VERSION:
        raise SchemaError(f"{where}.format_version: unsupported version {version}")


def _matrix(rows: Any, m: int, n: int, where: str) -> list[list[Fraction]]:
    if not isinstance(rows, list) or len(rows) != m:
        raise SchemaError(f"{where}: expected {m} rows (one per firm)")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{where}[{i}]: expected {n} entries (one per worker)")
        out.append([decode_number(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    return out


def economy_to_dict(economy: Economy) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "firms": list(economy.firm_names),
        "workers": list(economy.worker_names),
        "states": [
            {
                "id": label,
                "probability": encode_probability(p),
                "firm_utilities": [[encode_number(v) for v in row] for row in fu],
            }
            for label, p, fu in zip(economy.states, economy.belief, economy.firm_utils)
        ],
        "worker_utilities": [[encode_number(v) for v in row] for row in economy.worker_utils],
    }


def economy_from_dict(data: Any, source: str = "economy") -> Economy:
    _check_version(data, source)
    firms = _require(data, "firms", list, source)
    workers = _require(data, "workers", list, source)
    if not firms or not workers or not all(isinstance(x, str) for x in firms + workers):
        raise SchemaError(f"{source}: firms and workers must be non-empty lists of names")
    m, n = len(firms), len(workers)
    states = _require(data, "states", list, source)
    if not states:
        raise SchemaError(f"{source}.states: need at least one state")
    labels, belief, firm_utils = [], [], []
    for s, st in enumerate(states):
        where = f"{source}.states[{s}]"
        labels.append(str(_require(st, "id", (str, int), where)))
        p = decode_number(_require(st, "probability", (str, int), where), f"{where}.probability")
        if p <= 0:
            raise SchemaError(f"{where}.probability: must be positive")
        belief.append(p)
        firm_utils.append(_matrix(_require(st, "firm_utilities", list, where), m, n, f"{where}.firm_utilities"))
    if sum(belief) != 1:
        raise SchemaError(f"{source}.states: probabilities sum to {sum(belief)}, not 1")
    worker_utils = _matrix(_require(data, "worker_utilities", list, source), m, n, f"{source}.worker_utilities")
    try:
        return Economy(firm_utils, worker_utils, tuple(belief), tuple(labels), tuple(firms), tuple(workers))
    except (MatchlabError, ValueError) as exc:
        raise SchemaError(f"{source}: {exc}") from None


def dumps_economy(economy: Economy) -> str:
    return dumps(economy_to_dict(economy))


def loads_economy(text: str, source: str = "economy") -> Economy:
    return economy_from_dict(_parse(text, source), source)


def save_economy(economy: Economy, path: str | Path) -> None:
    Path(path).write_text(dumps_economy(economy), encoding="utf-8")


def load_economy(path: str | Path) -> Economy:
    return loads_economy(_read(path), str(path))


def profile_to_dict(economy: Economy, profile: Profile) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "reports": {
            economy.worker_names[j]: [economy.firm_names[f] for f in report] for j, report in enumerate(profile)
        },
    }


def profile_from_dict(data: Any, economy: Economy, source: str = "profile") -> Profile:
    _check_version(data, source)
    reports = _require(data, "reports", dict, source)
    firm_pos = {name: i for i, name in enumerate(economy.firm_names)}
    unknown = sorted(set(reports) - set(economy.worker_names))
    if unknown:
        raise SchemaError(f"{source}.reports: unknown workers {unknown}")
    out = []
    for name in economy.worker_names:
        if name not in reports:
            raise SchemaError(f"{source}.reports: no report for worker {name!r}")
        lst = reports[name]
        where = f"{source}.reports.{name}"
        if not isinstance(lst, list) or not all(isinstance(x, str) for x in lst):
            raise SchemaError(f"{where}: expected a list of firm names")
        if len(set(lst)) != len(lst):
            raise SchemaError(f"{where}: lists a firm twice")
        bad = [x for x in lst if x not in firm_pos]
        if bad:
            raise SchemaError(f"{where}: unknown firms {bad}")
        out.append(tuple(firm_pos[x] for x in lst))
    return tuple(out)


def dumps_profile(economy: Economy, profile: Profile) -> str:
    return dumps(profile_to_dict(economy, profile))


def loads_profile(text: str, economy: Economy, source: str = "profile") -> Profile:
    return profile_from_dict(_parse(text, source), economy, source)


def save_profile(economy: Economy, profile: Profile, path: str | Path) -> None:
    Path(path).write_text(dumps_profile(economy, profile), encoding="utf-8")


def load_profile(path: str | Path, economy: Economy) -> Profile:
    return loads_profile(_read(path), economy, str(path))


def outcome_to_json(economy: Economy, outcome: OutcomeMap) -> dict:
    """State id -> list of [firm, worker] name pairs."""
    return {
        label: [[economy.firm_names[f], economy.worker_names[w]] for f, w in mt.pairs()]
        for label, mt in zip(economy.states, outcome)
    }
