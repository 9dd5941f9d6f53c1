"""Parameter mapping between two versions of one signature.

Mapping proceeds in three rounds: same-kind name matches first (checking for
reorders and type changes), then cross-kind name matches (positional/keyword
conversions), then a structural round that pairs leftover positionals by
(index, annotation) and leftover keywords by annotation to recover renames.
Whatever remains unmatched on the old side was removed; on the new side it
was added.

The structural round is a heuristic: a removal plus an addition at the same
index with indistinguishable annotations is reported as a rename.  That is a
known failure mode, kept deliberately and surfaced as low confidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .sigmodel import (
    ApiSignature,
    Parameter,
    ParamKind,
    annotations_textually_equal,
)


class ChangeKind(str, Enum):
    UNCHANGED = "unchanged"
    REMOVAL = "removal"
    RENAME = "rename"
    REORDER = "reorder"
    KEY2POS = "key2pos"
    POS2KEY = "pos2key"
    TYPE_CHANGE = "type_change"
    ADDED_REQUIRED = "added_required"
    ADDED_OPTIONAL = "added_optional"


@dataclass(frozen=True)
class ParamChange:
    kind: ChangeKind
    old_name: Optional[str] = None
    new_name: Optional[str] = None
    old_index: Optional[int] = None
    new_index: Optional[int] = None
    new_kind: Optional[ParamKind] = None
    detail: str = ""

    def __post_init__(self):
        if self.kind is ChangeKind.RENAME and self.new_name == self.old_name:
            raise ValueError("rename must change the name")
        if self.kind is ChangeKind.REORDER and self.new_index == self.old_index:
            raise ValueError("reorder must change the index")
        if self.kind is ChangeKind.REMOVAL and (
            self.new_name is not None or self.new_index is not None
        ):
            raise ValueError("removal carries no new name/index")


@dataclass
class ChangeDict:
    """Per-parameter change record between an old and a new signature."""

    entries: dict[tuple[str, int], list[ParamChange]] = field(default_factory=dict)
    additions: list[ParamChange] = field(default_factory=list)
    new_has_var_positional: bool = False
    new_has_var_keyword: bool = False
    new_positional_count: int = 0
    old_kinds: dict[str, ParamKind] = field(default_factory=dict)
    low_confidence: bool = False

    def old_kind(self, name: str) -> ParamKind:
        return self.old_kinds[name]

    def changes_for_name(self, name: str) -> list[ParamChange]:
        for (old_name, _), changes in self.entries.items():
            if old_name == name:
                return changes
        return []

    def changes_for_positional_index(self, index: int) -> list[ParamChange]:
        """Changes for the old parameter a positional argument at ``index`` binds to.

        Arguments beyond the positional group belong to the old ``*args``.
        """
        n_pos = sum(1 for k in self.old_kinds.values() if k is ParamKind.POSITIONAL)
        if index < n_pos:
            for (name, old_index), changes in self.entries.items():
                if old_index == index and self.old_kinds[name] is ParamKind.POSITIONAL:
                    return changes
            return []
        for (name, _), changes in self.entries.items():
            if self.old_kinds[name] is ParamKind.VAR_POSITIONAL:
                return changes
        return []

    def to_json(self) -> dict:
        return {
            "entries": [
                {
                    "old": [name, index],
                    "changes": [
                        {
                            "kind": c.kind.value,
                            "to": c.new_name,
                            "new_index": c.new_index,
                            "detail": c.detail or None,
                        }
                        for c in changes
                    ],
                }
                for (name, index), changes in self.entries.items()
            ],
            "additions": [
                {
                    "kind": c.kind.value,
                    "name": c.new_name,
                    "new_index": c.new_index,
                    "param_kind": c.new_kind.value if c.new_kind else None,
                }
                for c in self.additions
            ],
            "new_has_var_positional": self.new_has_var_positional,
            "new_has_var_keyword": self.new_has_var_keyword,
            "low_confidence": self.low_confidence,
        }


def establish_mapping(
    old_sig: ApiSignature,
    new_sig: ApiSignature,
    type_incompatible_pairs: Optional[set[tuple[str, str]]] = None,
) -> ChangeDict:
    """Map every old parameter to its fate in the new signature.

    ``type_incompatible_pairs`` is an opt-in list of (old annotation, new
    annotation) normalized-text pairs known to be semantically incompatible;
    without it a differing annotation never counts as a type change, because
    annotation drift is usually cosmetic.
    """
    result = ChangeDict(
        new_has_var_positional=new_sig.var_positional is not None,
        new_has_var_keyword=new_sig.var_keyword is not None,
        new_positional_count=len(new_sig.positional),
        old_kinds={p.name: p.kind for p in old_sig.parameters},
    )

    old_pos = list(old_sig.positional)
    old_kw = list(old_sig.keyword_only)
    new_pos = list(new_sig.positional)
    new_kw = list(new_sig.keyword_only)

    def record(old: Parameter, *changes: ParamChange) -> None:
        result.entries[(old.name, old.index)] = list(changes)

    def type_changed(old: Parameter, new: Parameter) -> bool:
        if not type_incompatible_pairs:
            return False
        if old.annotation_text is None or new.annotation_text is None:
            return False
        if annotations_textually_equal(old.annotation_text, new.annotation_text):
            return False
        from .sigmodel import normalize_annotation

        pair = (
            normalize_annotation(old.annotation_text),
            normalize_annotation(new.annotation_text),
        )
        return pair in type_incompatible_pairs

    def default_note(old: Parameter, new: Parameter) -> str:
        if old.has_default and new.has_default and old.default_text != new.default_text:
            return f"default changed: {old.default_text} -> {new.default_text}"
        return ""

    # Step 1: name matches within the same kind group.
    for old in list(old_pos):
        new = next((p for p in new_pos if p.name == old.name), None)
        if new is None:
            continue
        changes: list[ParamChange] = []
        if new.index != old.index:
            changes.append(
                ParamChange(
                    kind=ChangeKind.REORDER,
                    old_name=old.name,
                    new_name=new.name,
                    old_index=old.index,
                    new_index=new.index,
                    new_kind=new.kind,
                )
            )
        if type_changed(old, new):
            changes.append(
                ParamChange(
                    kind=ChangeKind.TYPE_CHANGE,
                    old_name=old.name,
                    new_name=new.name,
                    old_index=old.index,
                    new_index=new.index,
                    new_kind=new.kind,
                    detail=f"{old.annotation_text} -> {new.annotation_text}",
                )
            )
        if not changes:
            changes.append(
                ParamChange(
                    kind=ChangeKind.UNCHANGED,
                    old_name=old.name,
                    new_name=new.name,
                    old_index=old.index,
                    new_index=new.index,
                    new_kind=new.kind,
                    detail=default_note(old, new),
                )
            )
        record(old, *changes)
        old_pos.remove(old)
        new_pos.remove(new)

    for old in list(old_kw):
        new = next((p for p in new_kw if p.name == old.name), None)
        if new is None:
            continue
        if type_changed(old, new):
            record(
                old,
                ParamChange(
                    kind=ChangeKind.TYPE_CHANGE,
                    old_name=old.name,
                    new_name=new.name,
                    old_index=old.index,
                    new_index=new.index,
                    new_kind=new.kind,
                    detail=f"{old.annotation_text} -> {new.annotation_text}",
                ),
            )
        else:
            record(
                old,
                ParamChange(
                    kind=ChangeKind.UNCHANGED,
                    old_name=old.name,
                    new_name=new.name,
                    old_index=old.index,
                    new_index=new.index,
                    new_kind=new.kind,
                    detail=default_note(old, new),
                ),
            )
        old_kw.remove(old)
        new_kw.remove(new)

    # Step 2: name matches across kinds (conversions).
    for old in list(old_pos):
        new = next((p for p in new_kw if p.name == old.name), None)
        if new is None:
            continue
        changes = [
            ParamChange(
                kind=ChangeKind.POS2KEY,
                old_name=old.name,
                new_name=new.name,
                old_index=old.index,
                new_index=new.index,
                new_kind=new.kind,
            )
        ]
        if type_changed(old, new):
            changes.append(
                ParamChange(
                    kind=ChangeKind.TYPE_CHANGE,
                    old_name=old.name,
                    new_name=new.name,
                    old_index=old.index,
                    new_index=new.index,
                    new_kind=new.kind,
                )
            )
        record(old, *changes)
        old_pos.remove(old)
        new_kw.remove(new)

    for old in list(old_kw):
        new = next((p for p in new_pos if p.name == old.name), None)
        if new is None:
            continue
        changes = [
            ParamChange(
                kind=ChangeKind.KEY2POS,
                old_name=old.name,
                new_name=new.name,
                old_index=old.index,
                new_index=new.index,
                new_kind=new.kind,
            )
        ]
        if type_changed(old, new):
            changes.append(
                ParamChange(
                    kind=ChangeKind.TYPE_CHANGE,
                    old_name=old.name,
                    new_name=new.name,
                    old_index=old.index,
                    new_index=new.index,
                    new_kind=new.kind,
                )
            )
        record(old, *changes)
        old_kw.remove(old)
        new_pos.remove(new)

    # Step 3: structural matches on the leftovers recover renames.
    # Positionals pair on (same index, same annotation text); keywords pair
    # on annotation text alone.  An absent annotation matches anything.
    # Ties break to the lowest new index.
    def annotations_match(a: Optional[str], b: Optional[str]) -> bool:
        if a is None or b is None:
            return True
        return annotations_textually_equal(a, b)

    for old in list(old_pos):
        candidates = [
            p
            for p in new_pos
            if p.index == old.index
            and annotations_match(p.annotation_text, old.annotation_text)
        ]
        if not candidates:
            continue
        new = min(candidates, key=lambda p: p.index)
        record(
            old,
            ParamChange(
                kind=ChangeKind.RENAME,
                old_name=old.name,
                new_name=new.name,
                old_index=old.index,
                new_index=new.index,
                new_kind=new.kind,
            ),
        )
        old_pos.remove(old)
        new_pos.remove(new)

    for old in list(old_kw):
        candidates = [
            p
            for p in new_kw
            if annotations_match(p.annotation_text, old.annotation_text)
        ]
        if not candidates:
            continue
        new = min(candidates, key=lambda p: p.index)
        record(
            old,
            ParamChange(
                kind=ChangeKind.RENAME,
                old_name=old.name,
                new_name=new.name,
                old_index=old.index,
                new_index=new.index,
                new_kind=new.kind,
            ),
        )
        old_kw.remove(old)
        new_kw.remove(new)

    if old_pos or old_kw or new_pos or new_kw:
        # Leftovers on both sides mean the greedy pairing above may have
        # guessed; downstream reporting shows these rows as low confidence.
        result.low_confidence = bool((old_pos or old_kw) and (new_pos or new_kw))

    for old in old_pos + old_kw:
        record(
            old,
            ParamChange(kind=ChangeKind.REMOVAL, old_name=old.name, old_index=old.index),
        )

    for new in new_pos + new_kw:
        result.additions.append(
            ParamChange(
                kind=(
                    ChangeKind.ADDED_OPTIONAL if new.has_default else ChangeKind.ADDED_REQUIRED
                ),
                new_name=new.name,
                new_index=new.index,
                new_kind=new.kind,
            )
        )

    # Variadic parameters map by kind; losing one is a removal.
    for old_var, new_var in (
        (old_sig.var_positional, new_sig.var_positional),
        (old_sig.var_keyword, new_sig.var_keyword),
    ):
        if old_var is None:
            continue
        if new_var is None:
            record(
                old_var,
                ParamChange(
                    kind=ChangeKind.REMOVAL, old_name=old_var.name, old_index=old_var.index
                ),
            )
        else:
            record(
                old_var,
                ParamChange(
                    kind=ChangeKind.UNCHANGED,
                    old_name=old_var.name,
                    new_name=new_var.name,
                    old_index=old_var.index,
                    new_index=new_var.index,
                    new_kind=new_var.kind,
                ),
            )

    return result
