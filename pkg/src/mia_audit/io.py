"""File formats: dumps (JSONL or CSV), stats JSON, decision lines, reports.

Dump line: ``{"id": ..., "true_label": ..., "probs": [...], "split": "train"|"test"|"unknown"}``
with an optional ``model_id``. The CSV form has the same columns with
``probs`` written as ``;``-separated decimals.
"""

from __future__ import annotations

import csv
import io as _io
import json
from collections.abc import Iterable, Iterator, Mapping
from pathlib import Path
from typing import IO, Any

from .attack import MembershipDecision, Verdict
from .errors import InputFormatError, MalformedRecord
from .partition import CategoryId, PartitionScheme, format_category, parse_category
from .records import Dump, PredictionRecord, make_record
from .stats import CaseKind, CategoryStats, GlobalStats, classify_case, global_from_categories

CSV_FIELDS = ("id", "true_label", "probs", "split", "model_id")


def _open_text(source: str | Path | IO[str]):
    if hasattr(source, "read"):
        return source, False
    return open(source, encoding="utf-8", newline=""), True


def _record_from_obj(obj: Any, line: int, name: str) -> PredictionRecord:
    if not isinstance(obj, dict):
        raise InputFormatError(f"expected an object, got {type(obj).__name__}", line=line, source=name)
    try:
        rid = obj["id"]
        label = obj["true_label"]
        probs = obj["probs"]
    except KeyError as exc:
        raise InputFormatError(f"missing field {exc.args[0]!r}", line=line, source=name) from None
    if isinstance(label, bool) or not isinstance(label, int):
        raise InputFormatError(f"true_label must be an integer, got {label!r}", line=line, source=name)
    if not isinstance(probs, list) or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in probs):
        raise InputFormatError("probs must be a list of numbers", line=line, source=name)
    try:
        return make_record(str(rid), label, probs, obj.get("split", "unknown"), obj.get("model_id"))
    except MalformedRecord as exc:
        raise MalformedRecord(str(exc), line=line, source=name) from None


def iter_jsonl_records(handle: IO[str], name: str = "<input>") -> Iterator[PredictionRecord]:
    for line_no, line in enumerate(handle, 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"malformed JSON ({exc.msg})", line=line_no, source=name) from None
        yield _record_from_obj(obj, line_no, name)


def iter_csv_records(handle: IO[str], name: str = "<input>") -> Iterator[PredictionRecord]:
    reader = csv.DictReader(handle)
    missing = {"id", "true_label", "probs"} - set(reader.fieldnames or ())
    if missing:
        raise InputFormatError(f"CSV header lacks {sorted(missing)}", line=1, source=name)
    for row in reader:
        line_no = reader.line_num
        try:
            label = int(row["true_label"])
            probs = [float(p) for p in row["probs"].split(";")]
        except (TypeError, ValueError):
            raise InputFormatError("unparseable true_label or probs", line=line_no, source=name) from None
        obj = {
            "id": row["id"],
            "true_label": label,
            "probs": probs,
            "split": row.get("split") or "unknown",
            "model_id": row.get("model_id") or None,
        }
        yield _record_from_obj(obj, line_no, name)


def read_dump(source: str | Path | IO[str], fmt: str | None = None) -> Dump:
    name = str(source) if not hasattr(source, "read") else getattr(source, "name", "<stdin>")
    if fmt is None:
        fmt = "csv" if name.lower().endswith(".csv") else "jsonl"
    handle, owned = _open_text(source)
    try:
        parse = iter_csv_records if fmt == "csv" else iter_jsonl_records
        records = []
        for record in parse(handle, name):
            records.append(record)
        try:
            return Dump(records)
        except MalformedRecord as exc:
            raise MalformedRecord(str(exc), source=name) from None
    finally:
        if owned:
            handle.close()


def record_to_obj(record: PredictionRecord) -> dict:
    obj = {"id": record.id, "true_label": record.true_label, "probs": list(record.probs), "split": record.split.value}
    if record.model_id is not None:
        obj["model_id"] = record.model_id
    return obj


def write_dump(dump: Dump | Iterable[PredictionRecord], dest: str | Path | IO[str], fmt: str | None = None) -> None:
    records = dump.records if isinstance(dump, Dump) else dump
    name = str(dest) if not hasattr(dest, "write") else ""
    if fmt is None:
        fmt = "csv" if name.lower().endswith(".csv") else "jsonl"
    handle = dest if hasattr(dest, "write") else open(dest, "w", encoding="utf-8", newline="")
    try:
        if fmt == "csv":
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            for r in records:
                writer.writerow([r.id, r.true_label, ";".join(repr(p) for p in r.probs), r.split.value, r.model_id or ""])
        else:
            for r in records:
                handle.write(json.dumps(record_to_obj(r), separators=(",", ":")) + "\n")
    finally:
        if handle is not dest:
            handle.close()


def _category_case(cs: CategoryStats) -> str | None:
    side = cs.empty_side
    if cs.d <= 0:
        return None
    if side == "test":
        return CaseKind.CASE1.value
    if side == "train":
        return CaseKind.CASE2.value
    return classify_case(cs.global_stats()).value


def stats_to_json(
    scheme: PartitionScheme,
    m: int | None,
    per_category: Mapping[CategoryId, CategoryStats],
    aggregate: GlobalStats | None = None,
) -> dict:
    if aggregate is None and per_category:
        aggregate = global_from_categories(per_category.values())
    return {
        "scheme": str(scheme),
        "m": m,
        "categories": {
            format_category(cid): {
                "d_train": cs.d_train,
                "d_test": cs.d_test,
                "p_train": cs.p_train,
                "p_test": cs.p_test,
                "case": _category_case(cs),
            }
            for cid, cs in per_category.items()
        },
        "aggregate": None if aggregate is None else {"q": aggregate.q, "p0": aggregate.p0, "p1": aggregate.p1},
    }


def stats_from_json(doc: Mapping[str, Any]) -> tuple[PartitionScheme, int | None, dict[CategoryId, CategoryStats], GlobalStats | None]:
    try:
        scheme = PartitionScheme.parse(doc["scheme"], force=True)
        cats = {
            parse_category(key): CategoryStats(v["d_train"], v["d_test"], v["p_train"], v["p_test"])
            for key, v in doc["categories"].items()
        }
        agg = doc.get("aggregate")
        aggregate = None if agg is None else GlobalStats(agg["q"], agg["p0"], agg["p1"])
    except (KeyError, TypeError, AttributeError) as exc:
        raise InputFormatError(f"stats document is missing or has a bad field: {exc}") from None
    return scheme, doc.get("m"), cats, aggregate


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"malformed JSON ({exc.msg})", line=exc.lineno, source=str(path)) from None


def decision_to_obj(d: MembershipDecision) -> dict:
    return {
        "id": d.record_id,
        "verdict": d.verdict.value,
        "category": list(d.category),
        "correct": d.correct_prediction,
        "case": d.case_used.value,
        "fallback": d.fallback,
        "inverted_gap": d.inverted_gap,
    }


def write_decisions(decisions: Iterable[MembershipDecision], handle: IO[str]) -> None:
    for d in decisions:
        handle.write(json.dumps(decision_to_obj(d), separators=(",", ":")) + "\n")


def read_decisions(source: str | Path | IO[str]) -> list[MembershipDecision]:
    name = str(source) if not hasattr(source, "read") else "<input>"
    handle, owned = _open_text(source)
    out = []
    try:
        for line_no, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                out.append(
                    MembershipDecision(
                        str(obj["id"]),
                        Verdict(obj["verdict"]),
                        tuple(obj.get("category", ())),
                        bool(obj.get("correct", False)),
                        CaseKind(obj.get("case", "Case3")),
                        bool(obj.get("fallback", False)),
                        bool(obj.get("inverted_gap", False)),
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise InputFormatError(f"bad decision line ({exc})", line=line_no, source=name) from None
    finally:
        if owned:
            handle.close()
    return out


def dumps_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def dump_to_string(dump: Dump) -> str:
    buf = _io.StringIO()
    write_dump(dump, buf, "jsonl")
    return buf.getvalue()
