"""Labeled test-corpus generation by parameter mutation, plus scoring.

Three mutation operators turn one signature and a set of example argument
values into every syntactically legal passing combination: choose how many
optional positionals to pass, convert positional passing to keyword passing
back to front, and add optional keyword parameters one at a time then
incrementally, shuffling named-argument order with a seeded generator.
Labels come from the same compatibility model the checker uses; the
independent ground truth lives in the test suite's binding oracle.
"""

from __future__ import annotations

import ast
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .callx import ArgUse, CallSite, InvocationForm, Passing, classify_passing
from .compat import CallStatus, assess_call
from .parammap import establish_mapping
from .sigmodel import ApiSignature


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class MutationCase:
    api: str
    call_text: str
    operator_trace: tuple[str, ...]
    label: Optional[str] = None  # "Compatible" | "Incompatible"


@dataclass
class MetricCounts:
    TP: int = 0
    FP: int = 0
    FN: int = 0
    SR: int = 0
    ICP: int = 0
    CP: int = 0

    def __post_init__(self):
        for name in ("TP", "FP", "FN", "SR", "ICP", "CP"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")


def count_combinations(N: int, n: int, m: int) -> int:
    """Closed-form size of the mutation set: sum of (i+1)*2m for i from n to N.

    N is the positional-parameter count, n how many of those lack defaults,
    m the count of optional keyword-only parameters.  The formula degenerates
    to 0 at m=0 even though generation still produces the positional-passing
    variants; callers comparing against generated corpora should stick to
    m >= 1.
    """
    if n > N:
        raise DomainError(f"n={n} exceeds N={N}")
    if n < 0 or m < 0:
        raise DomainError("counts must be non-negative")
    return sum((i + 1) * 2 * m for i in range(n, N + 1))


def _callee_name(sig: ApiSignature) -> str:
    if sig.qualified_name:
        return sig.qualified_name.rsplit(".", 1)[-1]
    return "f"


def _keyword_subsets(optional_kw: list[str]) -> list[tuple[str, ...]]:
    """The 2m keyword choices: none, each alone, then growing prefixes."""
    subsets: list[tuple[str, ...]] = [()]
    subsets.extend((name,) for name in optional_kw)
    for size in range(2, len(optional_kw) + 1):
        subsets.append(tuple(optional_kw[:size]))
    return subsets


def _generate(
    old_sig: ApiSignature,
    base_values: dict[str, str],
    rng_seed: int,
    callee: Optional[str],
) -> list[tuple[str, tuple[str, ...]]]:
    name = callee or _callee_name(old_sig)
    positional = list(old_sig.positional)
    required_kw = [p.name for p in old_sig.keyword_only if not p.has_default]
    optional_kw = [p.name for p in old_sig.keyword_only if p.has_default]
    n = sum(1 for p in positional if not p.has_default)
    N = len(positional)

    missing = [
        p.name
        for p in positional + list(old_sig.keyword_only)
        if p.name not in base_values
    ]
    if missing:
        raise DomainError(f"base values missing for parameters: {missing}")

    rng = random.Random(rng_seed)
    out: list[tuple[str, tuple[str, ...]]] = []
    seen: set[str] = set()

    for j in range(n, N + 1):  # operator 1: how many positionals to pass
        chosen = positional[:j]
        for k in range(0, j + 1):  # operator 2: name the last k of them
            by_position = [base_values[p.name] for p in chosen[: j - k]]
            named_tail = [(p.name, base_values[p.name]) for p in chosen[j - k :]]
            for subset in _keyword_subsets(optional_kw):  # operator 3
                named = (
                    named_tail
                    + [(kw, base_values[kw]) for kw in required_kw]
                    + [(kw, base_values[kw]) for kw in subset]
                )
                rng.shuffle(named)
                rendered = ", ".join(
                    by_position + [f"{key}={value}" for key, value in named]
                )
                text = f"{name}({rendered})"
                if text not in seen:
                    seen.add(text)
                    trace = (
                        f"op1:positionals={j}",
                        f"op2:named={k}",
                        f"op3:keywords={','.join(subset) or '-'}",
                    )
                    out.append((text, trace))
    return out


def mutate(
    old_sig: ApiSignature,
    base_values: dict[str, str],
    rng_seed: int = 0,
    callee: Optional[str] = None,
) -> list[str]:
    """Generate every legal passing variant of one call, deduplicated.

    ``base_values`` supplies verbatim argument text per parameter name; the
    harness never invents runtime values.  Named-argument order within each
    variant is shuffled by a generator seeded with ``rng_seed``, so corpora
    are reproducible.
    """
    return [text for text, _ in _generate(old_sig, base_values, rng_seed, callee)]


def mutate_cases(
    old_sig: ApiSignature,
    base_values: dict[str, str],
    rng_seed: int = 0,
) -> list[MutationCase]:
    """Like :func:`mutate` but with the operator trace recorded per variant."""
    api = old_sig.qualified_name or _callee_name(old_sig)
    return [
        MutationCase(api=api, call_text=text, operator_trace=trace)
        for text, trace in _generate(old_sig, base_values, rng_seed, None)
    ]


def site_from_call_text(call_text: str, file: str = "<bench>") -> CallSite:
    """Wrap a bare call expression in a call site for classification."""
    node = ast.parse(call_text.strip(), mode="eval").body
    if not isinstance(node, ast.Call):
        raise DomainError(f"not a call expression: {call_text!r}")
    args: list[ArgUse] = []
    for pos, a in enumerate(node.args):
        args.append(ArgUse(expr_text=ast.unparse(a), passing=Passing.POSITIONAL, position=pos))
    for kw in node.keywords:
        args.append(
            ArgUse(expr_text=ast.unparse(kw.value), passing=Passing.KEYWORD, keyword_name=kw.arg)
        )
    return CallSite(
        file=file,
        line=1,
        col=0,
        end_line=1,
        end_col=len(call_text),
        call_text=call_text,
        restored_path=ast.unparse(node.func),
        args=args,
        invocation_form=InvocationForm.DIRECT,
    )


def label(
    case: Union[MutationCase, str],
    old_sig: ApiSignature,
    new_sig: ApiSignature,
) -> str:
    """Compatibility label of one variant under (old, new).

    Definitionally the same model the checker applies, which makes corpus
    labels an internal consistency gate rather than independent ground truth.
    """
    text = case.call_text if isinstance(case, MutationCase) else case
    site = site_from_call_text(text)
    passing = classify_passing(site, old_sig)
    change_dict = establish_mapping(old_sig, new_sig)
    verdict = assess_call(site, change_dict, new_sig, passing)
    if verdict.overall is CallStatus.COMPATIBLE:
        return "Compatible"
    return "Incompatible"


def compute_metrics(counts: MetricCounts) -> dict[str, Optional[float]]:
    """Precision/recall/F1 over detections plus repair precision, as percentages.

    Metrics with a zero denominator come back as ``None``.
    """
    precision = recall = f1 = repair_precision = None
    if counts.TP + counts.FP > 0:
        precision = 100.0 * counts.TP / (counts.TP + counts.FP)
    if counts.TP + counts.FN > 0:
        recall = 100.0 * counts.TP / (counts.TP + counts.FN)
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    unsuccessful = counts.ICP + counts.CP
    if counts.SR + unsuccessful > 0:
        repair_precision = 100.0 * counts.SR / (counts.SR + unsuccessful)
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "repair_precision": repair_precision,
    }


def write_corpus(cases: list[MutationCase], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(
                json.dumps(
                    {
                        "api": case.api,
                        "call_text": case.call_text,
                        "operator_trace": list(case.operator_trace),
                        "label": case.label,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_corpus(path: Union[str, Path]) -> list[MutationCase]:
    cases = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            cases.append(
                MutationCase(
                    api=doc["api"],
                    call_text=doc["call_text"],
                    operator_trace=tuple(doc["operator_trace"]),
                    label=doc.get("label"),
                )
            )
    return cases
