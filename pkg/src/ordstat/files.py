"""Input file parsing: trial documents (JSON) and two-sample data files.

A trial document holds ``outcomes`` (label plus exact rational probability)
and ``statistic`` (label to value). Probabilities must be written as "p" or
"p/q" with decimal integers; anything else ("0.33", floats) is rejected so
no inexact number can slip in. Statistic values are rational strings,
integer ranks, or (nested) arrays of these; all must share one shape.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from .order import LexTuple, OrdValue, Rank, Rational
from .trial import FiniteTrial, InvalidStatisticError, InvalidTrialError, Statistic
from .ranktests import TwoSample

_PROB_RE = re.compile(r"^(\d+)(?:/([1-9]\d*))?$")
_RATIONAL_RE = re.compile(r"^-?(\d+)(?:/([1-9]\d*))?$")
_LABEL_FORBIDDEN = (":", "\n", "\r")


class TrialParseError(Exception):
    """Malformed trial or data file; carries the offending field or line."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


def parse_rational(text: str) -> Fraction:
    """Parse "p", "-p" or "p/q" (decimal integers, q > 0)."""
    if not isinstance(text, str) or not _RATIONAL_RE.match(text.strip()):
        raise ValueError(f"not a rational literal: {text!r}")
    return Fraction(text.strip())


def format_rational(value: Fraction) -> str:
    """Lowest-terms "p/q" (or plain "p"); round-trips through parse_rational."""
    return str(Fraction(value))


def _parse_prob(raw, field: str) -> Fraction:
    if not isinstance(raw, str) or not _PROB_RE.match(raw.strip()):
        raise TrialParseError(
            f"probability must be a nonnegative rational string like \"1/2\", got {raw!r}",
            field=field,
        )
    return Fraction(raw.strip())


def _parse_label(raw, field: str) -> str:
    if not isinstance(raw, str) or not raw:
        raise TrialParseError(f"label must be a non-empty string, got {raw!r}", field=field)
    if any(ch in raw for ch in _LABEL_FORBIDDEN) or raw != raw.strip():
        raise TrialParseError(
            f"label may not contain ':' or newlines or outer whitespace: {raw!r}", field=field
        )
    return raw


def _parse_value(raw, field: str) -> OrdValue:
    if isinstance(raw, bool):
        raise TrialParseError("statistic value must not be a boolean", field=field)
    if isinstance(raw, int):
        return Rank(raw)
    if isinstance(raw, str):
        try:
            return Rational(parse_rational(raw))
        except ValueError:
            raise TrialParseError(
                f"statistic value must be a rational string like \"1/3\", got {raw!r}", field=field
            ) from None
    if isinstance(raw, list):
        if not raw:
            raise TrialParseError("tuple statistic value may not be empty", field=field)
        return LexTuple(tuple(_parse_value(v, f"{field}[{i}]") for i, v in enumerate(raw)))
    raise TrialParseError(f"unsupported statistic value: {raw!r}", field=field)


def parse_trial_document(text: str):
    """Parse a trial document into (FiniteTrial, Statistic)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise TrialParseError(f"invalid JSON: {e.msg}", line=e.lineno) from None
    if not isinstance(doc, dict):
        raise TrialParseError("trial document must be a JSON object")
    unknown = sorted(set(doc) - {"outcomes", "statistic"})
    if unknown:
        raise TrialParseError(f"unknown top-level fields: {unknown}")
    outcomes = doc.get("outcomes")
    if not isinstance(outcomes, list) or not outcomes:
        raise TrialParseError("a non-empty list is required", field="outcomes")
    pairs = []
    for i, entry in enumerate(outcomes):
        field = f"outcomes[{i}]"
        if not isinstance(entry, dict) or set(entry) != {"label", "prob"}:
            raise TrialParseError("each outcome needs exactly the keys label and prob", field=field)
        label = _parse_label(entry["label"], f"{field}.label")
        prob = _parse_prob(entry["prob"], f"{field}.prob")
        pairs.append((label, prob))
    try:
        trial = FiniteTrial(tuple(pairs))
    except InvalidTrialError as e:
        raise TrialParseError(str(e), field="outcomes") from None
    statistic = doc.get("statistic")
    if not isinstance(statistic, dict) or not statistic:
        raise TrialParseError("a non-empty object is required", field="statistic")
    values = {}
    for label, raw in statistic.items():
        label = _parse_label(label, "statistic")
        if label not in trial:
            raise TrialParseError(f"statistic names an unknown outcome: {label!r}", field="statistic")
        values[label] = _parse_value(raw, f"statistic.{label}")
    missing = [label for label in trial.labels if label not in values]
    if missing:
        raise TrialParseError(f"statistic undefined on outcomes: {missing}", field="statistic")
    try:
        stat = Statistic(values)
    except InvalidStatisticError as e:
        raise TrialParseError(str(e), field="statistic") from None
    return trial, stat


def load_trial(path) -> tuple:
    return parse_trial_document(Path(path).read_text(encoding="utf-8"))


def parse_two_sample(text: str) -> TwoSample:
    """Parse a two-column (value, group) delimited file into a TwoSample.

    One observation per line, comma- or whitespace-delimited; '#' starts a
    comment. Exactly two group labels must occur; the first label seen is
    the x group. Values accept decimal or rational literals.
    """
    groups: dict = {}
    order = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")] if "," in line else line.split()
        if len(parts) != 2:
            raise TrialParseError("expected two columns: value and group label", line=lineno)
        value_text, group = parts
        try:
            value = Fraction(value_text)
        except (ValueError, ZeroDivisionError):
            raise TrialParseError(f"not an exact value: {value_text!r}", line=lineno) from None
        if group not in groups:
            groups[group] = []
            order.append(group)
        groups[group].append(value)
    if len(order) != 2:
        raise TrialParseError(f"expected exactly two group labels, found {len(order)}: {order}")
    return TwoSample(tuple(groups[order[0]]), tuple(groups[order[1]]))


def load_two_sample(path) -> TwoSample:
    return parse_two_sample(Path(path).read_text(encoding="utf-8"))
