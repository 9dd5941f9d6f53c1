"""Per-parameter and per-call compatibility judgment.

A parameter's fate under an upgrade is a function of three things: whether
it is positional or keyword-only (P), what happened to it between versions
(E), and how the call actually passes it (M).  The judgment is an exact
truth-table lookup, with one override: when the new signature grows ``*args``
or ``**kwargs``, removals/renames of arguments the variadic would absorb are
treated as compatible (and flagged, since forwarding may still blow up
downstream).

A call is compatible iff every one of its parameters is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .callx import CallSite, Passing
from .parammap import ChangeDict, ChangeKind, ParamChange
from .sigmodel import ApiSignature, ParamKind


class ParamType(str, Enum):
    POSITIONAL = "p"
    KEYWORD = "k"


class Verdict(str, Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"


class CallStatus(str, Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"
    UNKNOWN = "Unknown"


class RuleSource(str, Enum):
    TABLE = "table"
    VARIADIC_OVERRIDE = "variadic_override"
    RULE1_UNTOUCHED = "rule1_untouched"


class IllegalCombination(ValueError):
    def __init__(self, p: ParamType, e: ChangeKind, m: Passing):
        super().__init__(f"no such compatibility row: ({p.value}, {e.value}, {m.value})")
        self.combination = (p, e, m)


_C = Verdict.COMPATIBLE
_I = Verdict.INCOMPATIBLE
_P = ParamType.POSITIONAL
_K = ParamType.KEYWORD
_N = Passing.NOT_PASSED
_UP = Passing.POSITIONAL
_UK = Passing.KEYWORD

# All 27 legal (P, E, M) rows.  Additions only ever appear unpassed, and a
# keyword-only parameter can never be passed positionally.
COMPATIBILITY_TABLE: dict[tuple[ParamType, ChangeKind, Passing], Verdict] = {
    (_P, ChangeKind.REMOVAL, _N): _C,
    (_P, ChangeKind.REMOVAL, _UP): _I,
    (_P, ChangeKind.REMOVAL, _UK): _I,
    (_P, ChangeKind.REORDER, _N): _C,
    (_P, ChangeKind.REORDER, _UP): _I,
    (_P, ChangeKind.REORDER, _UK): _C,
    (_P, ChangeKind.RENAME, _N): _C,
    (_P, ChangeKind.RENAME, _UP): _C,
    (_P, ChangeKind.RENAME, _UK): _I,
    (_P, ChangeKind.POS2KEY, _N): _C,
    (_P, ChangeKind.POS2KEY, _UP): _I,
    (_P, ChangeKind.POS2KEY, _UK): _C,
    (_P, ChangeKind.TYPE_CHANGE, _N): _C,
    (_P, ChangeKind.TYPE_CHANGE, _UP): _I,
    (_P, ChangeKind.TYPE_CHANGE, _UK): _I,
    (_P, ChangeKind.ADDED_REQUIRED, _N): _I,
    (_P, ChangeKind.ADDED_OPTIONAL, _N): _C,
    (_K, ChangeKind.REMOVAL, _N): _C,
    (_K, ChangeKind.REMOVAL, _UK): _I,
    (_K, ChangeKind.RENAME, _N): _C,
    (_K, ChangeKind.RENAME, _UK): _I,
    (_K, ChangeKind.KEY2POS, _N): _C,
    (_K, ChangeKind.KEY2POS, _UK): _C,
    (_K, ChangeKind.TYPE_CHANGE, _N): _C,
    (_K, ChangeKind.TYPE_CHANGE, _UK): _I,
    (_K, ChangeKind.ADDED_REQUIRED, _N): _I,
    (_K, ChangeKind.ADDED_OPTIONAL, _N): _C,
}


@dataclass(frozen=True)
class ParamVerdict:
    param: str
    p: ParamType
    e: ChangeKind
    m: Passing
    verdict: Verdict
    rule_source: RuleSource = RuleSource.TABLE
    vpp_warning: bool = False
    new_name: Optional[str] = None


@dataclass
class CallVerdict:
    call: Optional[CallSite]
    per_param: list[ParamVerdict] = field(default_factory=list)
    overall: CallStatus = CallStatus.COMPATIBLE
    unknown_reason: Optional[str] = None

    @property
    def incompatible_params(self) -> list[ParamVerdict]:
        return [v for v in self.per_param if v.verdict is Verdict.INCOMPATIBLE]


def assess_parameter(p: ParamType, e: ChangeKind, m: Passing) -> Verdict:
    """Exact truth-table lookup; anything off the table is an error."""
    if e is ChangeKind.UNCHANGED:
        return _C
    try:
        return COMPATIBILITY_TABLE[(p, e, m)]
    except KeyError:
        raise IllegalCombination(p, e, m) from None


def _param_type(kind: ParamKind) -> ParamType:
    if kind in (ParamKind.POSITIONAL, ParamKind.VAR_POSITIONAL):
        return ParamType.POSITIONAL
    return ParamType.KEYWORD


def parameter_verdicts(
    change_dict: ChangeDict, passing: dict[str, Passing]
) -> list[ParamVerdict]:
    """Judge every old parameter and every addition for one call.

    ``passing`` maps old-signature parameter names to how the call supplies
    them.  Parameters that changed in no way are compatible regardless of
    passing; additions are always judged as unpassed.
    """
    verdicts: list[ParamVerdict] = []
    for (name, _index), changes in change_dict.entries.items():
        m = passing.get(name, Passing.NOT_PASSED)
        real_changes = [c for c in changes if c.kind is not ChangeKind.UNCHANGED]
        if not real_changes:
            if m is not Passing.NOT_PASSED:
                verdicts.append(
                    ParamVerdict(
                        param=name,
                        p=_param_type(change_dict.old_kind(name)),
                        e=ChangeKind.UNCHANGED,
                        m=m,
                        verdict=_C,
                        rule_source=RuleSource.RULE1_UNTOUCHED,
                    )
                )
            continue
        for change in real_changes:
            verdicts.append(_assess_change(name, change, m, change_dict))

    for change in change_dict.additions:
        p = ParamType.POSITIONAL if change.new_kind is ParamKind.POSITIONAL else ParamType.KEYWORD
        verdicts.append(
            ParamVerdict(
                param=change.new_name or "?",
                p=p,
                e=change.kind,
                m=Passing.NOT_PASSED,
                verdict=assess_parameter(p, change.kind, Passing.NOT_PASSED),
                new_name=change.new_name,
            )
        )
    return verdicts


def assess_call(
    site: Optional[CallSite],
    change_dict: ChangeDict,
    new_sig: Optional[ApiSignature],
    passing: dict[str, Passing],
) -> CallVerdict:
    """Conjoin the per-parameter verdicts for one call."""
    result = CallVerdict(call=site)
    if new_sig is None:
        result.overall = CallStatus.UNKNOWN
        result.unknown_reason = "new signature unresolved"
        return result

    result.per_param = parameter_verdicts(change_dict, passing)
    if any(v.verdict is Verdict.INCOMPATIBLE for v in result.per_param):
        result.overall = CallStatus.INCOMPATIBLE
    else:
        result.overall = CallStatus.COMPATIBLE
    return result


def _assess_change(
    name: str, change: ParamChange, m: Passing, change_dict: ChangeDict
) -> ParamVerdict:
    p = _param_type(change_dict.old_kind(name))

    # Variadic acceptance: a new-side catch-all absorbs what a removal or
    # rename would otherwise reject.  False negatives are possible when the
    # absorbed argument gets forwarded onward, hence the warning flag.
    absorbable = change.kind in (ChangeKind.REMOVAL, ChangeKind.RENAME)
    if absorbable and m is Passing.KEYWORD and change_dict.new_has_var_keyword:
        return ParamVerdict(
            param=name, p=p, e=change.kind, m=m, verdict=_C,
            rule_source=RuleSource.VARIADIC_OVERRIDE, vpp_warning=True,
            new_name=change.new_name,
        )
    if absorbable and m is Passing.POSITIONAL and change_dict.new_has_var_positional:
        return ParamVerdict(
            param=name, p=p, e=change.kind, m=m, verdict=_C,
            rule_source=RuleSource.VARIADIC_OVERRIDE, vpp_warning=True,
            new_name=change.new_name,
        )

    return ParamVerdict(
        param=name,
        p=p,
        e=change.kind,
        m=m,
        verdict=assess_parameter(p, change.kind, m),
        new_name=change.new_name,
    )
