"""Minimal-edit repair of incompatible call sites.

Plans are derived from the change dictionary and the call's actual passing
methods: one edit operation per incompatible parameter, nothing for
compatible ones, so the original invocation style survives wherever it can.
Application rebuilds the call's argument lists at the syntax-tree level,
inner calls before outer ones, and splices only the repaired spans back into
the file text so untouched formatting is preserved.
"""

from __future__ import annotations

import ast
import difflib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

from .callx import BindingError, CallSite, Passing, classify_passing
from .compat import CallStatus, Verdict, assess_call, parameter_verdicts
from .parammap import ChangeDict, ChangeKind, establish_mapping
from .sigmodel import ApiSignature, ParamKind, render_signature


class EditKind(str, Enum):
    DELETE = "delete"
    RENAME = "rename"
    POS2KEY = "pos2key"
    POS_CHANGE = "posChange"
    REPLACE = "replace"


@dataclass(frozen=True)
class EditOp:
    op: EditKind
    target: Union[int, str]  # old positional index, or keyword name
    patch: Optional[Union[int, str]] = None  # new index, new name, or new text


@dataclass
class RepairPlan:
    site: CallSite
    ops: list[EditOp] = field(default_factory=list)
    candidate_id: int = 0
    partial: bool = False
    suggestions: list[str] = field(default_factory=list)


class Unrepairable(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class TargetNotFound(Exception):
    pass


class ConflictingEdits(Exception):
    pass


def plan_repair(
    site: CallSite,
    change_dict: ChangeDict,
    passing: dict[str, Passing],
    value_rules: Optional[dict[str, str]] = None,
) -> RepairPlan:
    """Derive the minimal edit plan for an incompatible call.

    One edit per incompatible parameter: removals delete the argument,
    keyword renames update the name, reorders move positional arguments to
    their new index, keyword conversions turn them into keyword arguments.
    When the surviving positional arguments cannot form a contiguous prefix
    of the new signature (an unpassed parameter now sits between them),
    position changes degrade to keyword conversion, since no purely
    positional form can express the binding.

    ``value_rules`` maps parameter names to replacement expression text; it
    is the only way a ``replace`` op is ever produced.  Required additions
    cannot be repaired: they become report suggestions and mark the plan
    partial.  Raises :class:`Unrepairable` when nothing at all can be edited.
    """
    plan = RepairPlan(site=site)
    repairable = unrepairable = 0
    verdicts = parameter_verdicts(change_dict, passing)
    incompatible = {
        (pv.param, pv.e) for pv in verdicts if pv.verdict is Verdict.INCOMPATIBLE
    }

    # Keyword-passed arguments repair independently, one op each.
    for pv in verdicts:
        if pv.verdict is not Verdict.INCOMPATIBLE:
            continue
        if pv.e is ChangeKind.ADDED_REQUIRED:
            unrepairable += 1
            plan.suggestions.append(
                f"new required parameter {pv.param!r} must be supplied by hand"
            )
        elif pv.e is ChangeKind.TYPE_CHANGE:
            unrepairable += 1
            plan.suggestions.append(
                f"parameter {pv.param!r} changed type; value migration needed"
            )
        elif pv.m is Passing.KEYWORD:
            if pv.e is ChangeKind.REMOVAL:
                repairable += 1
                kind = change_dict.old_kind(pv.param)
                if kind is ParamKind.VAR_KEYWORD:
                    declared = set(change_dict.old_kinds)
                    for arg in site.args:
                        if (
                            arg.passing is Passing.KEYWORD
                            and arg.keyword_name
                            and arg.keyword_name not in declared
                        ):
                            plan.ops.append(
                                EditOp(op=EditKind.DELETE, target=arg.keyword_name)
                            )
                else:
                    plan.ops.append(EditOp(op=EditKind.DELETE, target=pv.param))
            elif pv.e is ChangeKind.RENAME:
                repairable += 1
                change = next(
                    c
                    for c in change_dict.changes_for_name(pv.param)
                    if c.kind is ChangeKind.RENAME
                )
                plan.ops.append(
                    EditOp(op=EditKind.RENAME, target=pv.param, patch=change.new_name)
                )

    # Positionally passed arguments need collective treatment: deletions and
    # conversions drop out, the rest must land at their new indexes.
    n_pos_params = sum(
        1 for k in change_dict.old_kinds.values() if k is ParamKind.POSITIONAL
    )
    n_pos_args = sum(1 for a in site.args if a.passing is Passing.POSITIONAL)
    # (old arg index, target index, new name, must stay positional)
    kept: list[tuple[int, int, str, bool]] = []
    absorbed = 0  # positional values the new *args will swallow
    for (name, old_index), changes in sorted(
        change_dict.entries.items(), key=lambda kv: kv[0][1]
    ):
        kind = change_dict.old_kind(name)
        if kind is ParamKind.VAR_POSITIONAL:
            if (name, ChangeKind.REMOVAL) in incompatible:
                repairable += 1
                for i in range(n_pos_params, n_pos_args):
                    plan.ops.append(EditOp(op=EditKind.DELETE, target=i))
            continue
        if kind is not ParamKind.POSITIONAL or passing.get(name) is not Passing.POSITIONAL:
            continue
        if (name, ChangeKind.REMOVAL) in incompatible:
            repairable += 1
            plan.ops.append(EditOp(op=EditKind.DELETE, target=old_index))
            continue
        if (name, ChangeKind.POS2KEY) in incompatible:
            repairable += 1
            change = next(c for c in changes if c.kind is ChangeKind.POS2KEY)
            plan.ops.append(
                EditOp(op=EditKind.POS2KEY, target=old_index, patch=change.new_name)
            )
            continue
        removed = any(c.kind is ChangeKind.REMOVAL for c in changes)
        if removed:
            # removal overridden by a new *args: the value has no named slot
            # and must stay positional, after every real positional parameter
            kept.append(
                (old_index, change_dict.new_positional_count + absorbed, name, True)
            )
            absorbed += 1
            continue
        target = old_index
        new_name = name
        for c in changes:
            if c.new_index is not None:
                target = c.new_index
            if c.new_name is not None:
                new_name = c.new_name
        kept.append((old_index, target, new_name, False))

    kept.sort(key=lambda item: item[1])
    prefix_ok = True
    for rank, (old_index, target, new_name, positional_only) in enumerate(kept):
        if prefix_ok and target == rank:
            if target != old_index:
                repairable += 1
                plan.ops.append(
                    EditOp(op=EditKind.POS_CHANGE, target=old_index, patch=target)
                )
        elif positional_only:
            # a variadic-absorbed value cannot convert to a keyword and the
            # positional prefix before it is broken; nothing stylistic fixes this
            prefix_ok = False
            unrepairable += 1
            plan.suggestions.append(
                f"argument for {new_name!r} is absorbed by *args but its "
                "positional prefix cannot be preserved"
            )
        else:
            prefix_ok = False
            repairable += 1
            plan.ops.append(
                EditOp(op=EditKind.POS2KEY, target=old_index, patch=new_name)
            )

    if value_rules:
        for name, replacement in value_rules.items():
            changes = change_dict.changes_for_name(name)
            if not changes or passing.get(name) is not Passing.POSITIONAL:
                continue
            old_index = changes[0].old_index
            if old_index is not None:
                plan.ops.append(
                    EditOp(op=EditKind.REPLACE, target=old_index, patch=replacement)
                )
                repairable += 1

    if repairable == 0 and unrepairable > 0:
        raise Unrepairable(
            "every incompatibility is a required addition or a type change"
        )
    plan.partial = unrepairable > 0
    return plan


def rewrite_call(node: ast.Call, plan: RepairPlan) -> None:
    """Rebuild the argument lists of one call node in place.

    Positional arguments are walked in source order: deletions are skipped,
    keyword conversions move the node into the keyword list, position changes
    assign the node its patched slot, and untouched arguments keep theirs.
    The slot assignment (rather than sequential inserts) keeps permutations
    exact even when slots are filled out of order.  Keyword arguments keep
    their nodes, with renames updating the name.
    """
    pos_ops: dict[int, list[EditOp]] = {}
    kw_ops: dict[str, list[EditOp]] = {}
    for op in plan.ops:
        if isinstance(op.target, int):
            pos_ops.setdefault(op.target, []).append(op)
        else:
            kw_ops.setdefault(op.target, []).append(op)

    slots: dict[int, ast.expr] = {}
    new_kw: list[ast.keyword] = []
    for index, arg_node in enumerate(node.args):
        ops = pos_ops.get(index, [])
        if not ops:
            slots[index] = arg_node
            continue
        for op in ops:
            if op.op is EditKind.DELETE:
                break
            if op.op is EditKind.RENAME:
                slots[index] = arg_node
            elif op.op is EditKind.POS2KEY:
                new_kw.append(ast.keyword(arg=str(op.patch), value=arg_node))
            elif op.op is EditKind.REPLACE:
                slots[index] = ast.parse(str(op.patch), mode="eval").body
            elif op.op is EditKind.POS_CHANGE:
                slots[int(op.patch)] = arg_node
    node.args = [slots[i] for i in sorted(slots)]

    for kw_node in node.keywords:
        ops = kw_ops.get(kw_node.arg, []) if kw_node.arg else []
        if not ops:
            new_kw.append(kw_node)
            continue
        for op in ops:
            if op.op is EditKind.DELETE:
                break
            if op.op is EditKind.RENAME:
                kw_node.arg = str(op.patch)
                new_kw.append(kw_node)
            else:
                new_kw.append(kw_node)
    node.keywords = new_kw


def apply_repair(call_expr: Union[str, ast.Call], plan: RepairPlan) -> str:
    """Apply a plan to one call expression and return the rewritten text.

    A plan with no ops returns the input text byte-identical.
    """
    if isinstance(call_expr, str):
        if not plan.ops:
            return call_expr
        body = ast.parse(call_expr.strip(), mode="eval").body
        if not isinstance(body, ast.Call):
            raise TargetNotFound(f"not a call expression: {call_expr!r}")
        node = body
    else:
        node = call_expr
        if not plan.ops:
            return ast.unparse(node)
    rewrite_call(node, plan)
    return ast.unparse(node)


def locate_call(tree: ast.AST, site: CallSite) -> Optional[ast.Call]:
    """Find the call node a site refers to, depth-first.

    A position match must still carry the site's call text (the file may
    have drifted); failing that, the canonical text alone disambiguates.
    """
    try:
        canonical = ast.unparse(ast.parse(site.call_text.strip(), mode="eval"))
    except SyntaxError:
        # joined multi-line text with interior comments cannot re-parse;
        # the position is then the only usable key
        canonical = None
    by_text: Optional[ast.Call] = None
    for node in ast.walk(tree):
        if not isinstance(node, ast.Call):
            continue
        matches_text = canonical is not None and ast.unparse(node) == canonical
        if node.lineno == site.line and node.col_offset == site.col:
            if matches_text or canonical is None:
                return node
        if by_text is None and matches_text:
            by_text = node
    return by_text


def prune_candidates(
    candidates: Sequence[tuple[ApiSignature, ApiSignature]],
    site: CallSite,
    type_incompatible_pairs: Optional[set[tuple[str, str]]] = None,
) -> list[tuple[ApiSignature, ApiSignature]]:
    """Drop signature-pair candidates that need no repair for this site.

    A pair is eliminated when old and new are identical, when the site's
    arguments cannot bind the old signature at all (wrong overload), or when
    the assessment says the pair is compatible as called.  Whatever survives
    is incompatible and worth a repair attempt.
    """
    surviving: list[tuple[ApiSignature, ApiSignature]] = []
    for old_sig, new_sig in candidates:
        if render_signature(old_sig) == render_signature(new_sig):
            continue
        try:
            passing = classify_passing(site, old_sig)
        except BindingError:
            continue
        required_missing = any(
            p.required and passing.get(p.name) is Passing.NOT_PASSED
            for p in old_sig.parameters
        )
        if required_missing:
            continue  # the call never bound this overload
        change_dict = establish_mapping(old_sig, new_sig, type_incompatible_pairs)
        verdict = assess_call(site, change_dict, new_sig, passing)
        if verdict.overall is CallStatus.COMPATIBLE:
            continue
        surviving.append((old_sig, new_sig))
    return surviving


@dataclass
class RewriteResult:
    content: str
    diff: str
    line_map: dict[int, int]  # original line -> line in the rewritten file


def _line_offsets(source: str) -> list[int]:
    offsets = [0]
    for line in source.splitlines(keepends=True):
        offsets.append(offsets[-1] + len(line))
    return offsets


def _span(source_offsets: list[int], node: ast.AST) -> tuple[int, int]:
    start = source_offsets[node.lineno - 1] + node.col_offset
    end = source_offsets[node.end_lineno - 1] + node.end_col_offset
    return start, end


def rewrite_file(
    file: Union[str, Path],
    plans: Sequence[RepairPlan],
    source: Optional[str] = None,
    label: Optional[str] = None,
) -> RewriteResult:
    """Apply validated plans to one file; only repaired call spans change.

    Inner calls are rewritten before outer ones on a shared tree, so nested
    repairs compose; the outermost repaired span is then spliced textually.
    ``label`` overrides the path shown in diff headers.
    """
    path = label or str(file)
    if source is None:
        source = Path(file).read_text(encoding="utf-8")
    effective = [p for p in plans if p.ops]
    if not effective:
        return RewriteResult(content=source, diff="", line_map={})

    tree = ast.parse(source)
    offsets = _line_offsets(source)

    located: list[tuple[ast.Call, RepairPlan]] = []
    for plan in effective:
        node = locate_call(tree, plan.site)
        if node is None:
            raise TargetNotFound(f"{path}: call {plan.site.call_text!r} not found")
        located.append((node, plan))

    spans = {id(node): _span(offsets, node) for node, _ in located}
    seen_spans: set[tuple[int, int]] = set()
    for node, plan in located:
        span = spans[id(node)]
        if span in seen_spans:
            raise ConflictingEdits(f"{path}: two plans target {plan.site.call_text!r}")
        seen_spans.add(span)
    for (na, _), (nb, _) in zip(located, located[1:]):
        a, b = spans[id(na)], spans[id(nb)]
        disjoint = a[1] <= b[0] or b[1] <= a[0]
        nested = (a[0] <= b[0] and b[1] <= a[1]) or (b[0] <= a[0] and a[1] <= b[1])
        if not (disjoint or nested):
            raise ConflictingEdits(f"{path}: overlapping repair spans")

    # Deepest spans first so inner repairs land before the outer unparse.
    located.sort(key=lambda item: spans[id(item[0])][1] - spans[id(item[0])][0])
    for node, plan in located:
        rewrite_call(node, plan)

    outer: list[ast.Call] = []
    for node, _ in located:
        a = spans[id(node)]
        contained = any(
            other is not node
            and spans[id(other)][0] <= a[0]
            and a[1] <= spans[id(other)][1]
            for other, _ in located
        )
        if not contained:
            outer.append(node)

    content = source
    for node in sorted(outer, key=lambda n: spans[id(n)][0], reverse=True):
        start, end = spans[id(node)]
        content = content[:start] + ast.unparse(node) + content[end:]

    diff = "".join(
        difflib.unified_diff(
            source.splitlines(keepends=True),
            content.splitlines(keepends=True),
            fromfile=f"a/{path}",
            tofile=f"b/{path}",
        )
    )

    line_map: dict[int, int] = {}
    matcher = difflib.SequenceMatcher(
        a=source.splitlines(), b=content.splitlines(), autojunk=False
    )
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            for k in range(i2 - i1):
                line_map[i1 + k + 1] = j1 + k + 1
    return RewriteResult(content=content, diff=diff, line_map=line_map)
