"""Canonical data model for API signatures.

A signature is an ordered list of parameters with their kinds, defaults and
annotation text exactly as written in source.  Parsing accepts the textual
form used in library sources, stub files and reflection output; rendering
produces text that parses back to an equal structure.

Defaults and annotations are kept as verbatim source text and never
evaluated.  Comparisons elsewhere are textual after light normalization.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional


class ParamKind(str, Enum):
    POSITIONAL = "positional"
    KEYWORD_ONLY = "keyword_only"
    VAR_POSITIONAL = "var_positional"
    VAR_KEYWORD = "var_keyword"


class SigOrigin(str, Enum):
    REFLECTED = "reflected"
    STATIC_SOURCE = "static_source"
    PYI_STUB = "pyi_stub"


class SignatureSyntaxError(ValueError):
    """Raised for malformed signature text; carries the offending offset."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (position {position})")
        self.position = position


class DuplicateParamError(ValueError):
    def __init__(self, name: str):
        super().__init__(f"duplicate parameter name: {name!r}")
        self.name = name


@dataclass(frozen=True)
class Parameter:
    name: str
    kind: ParamKind
    index: int  # ordinal within its kind group, 0-based
    has_default: bool = False
    default_text: Optional[str] = None
    annotation_text: Optional[str] = None

    @property
    def required(self) -> bool:
        return not self.has_default and self.kind in (
            ParamKind.POSITIONAL,
            ParamKind.KEYWORD_ONLY,
        )


@dataclass(frozen=True)
class ApiSignature:
    qualified_name: str
    parameters: tuple[Parameter, ...]
    origin: SigOrigin = SigOrigin.STATIC_SOURCE
    version_tag: str = ""
    self_stripped: bool = False

    def __post_init__(self):
        _check_invariants(self.parameters)

    @property
    def positional(self) -> tuple[Parameter, ...]:
        return tuple(p for p in self.parameters if p.kind is ParamKind.POSITIONAL)

    @property
    def keyword_only(self) -> tuple[Parameter, ...]:
        return tuple(p for p in self.parameters if p.kind is ParamKind.KEYWORD_ONLY)

    @property
    def var_positional(self) -> Optional[Parameter]:
        return next(
            (p for p in self.parameters if p.kind is ParamKind.VAR_POSITIONAL), None
        )

    @property
    def var_keyword(self) -> Optional[Parameter]:
        return next(
            (p for p in self.parameters if p.kind is ParamKind.VAR_KEYWORD), None
        )

    def param(self, name: str) -> Optional[Parameter]:
        return next((p for p in self.parameters if p.name == name), None)


_KIND_ORDER = {
    ParamKind.POSITIONAL: 0,
    ParamKind.VAR_POSITIONAL: 1,
    ParamKind.KEYWORD_ONLY: 2,
    ParamKind.VAR_KEYWORD: 3,
}


def _check_invariants(params: Iterable[Parameter]) -> None:
    seen: set[str] = set()
    var_pos = var_kw = 0
    rank = -1
    default_started = False
    for p in params:
        if p.name in seen:
            raise DuplicateParamError(p.name)
        seen.add(p.name)
        if _KIND_ORDER[p.kind] < rank:
            raise SignatureSyntaxError(f"parameter {p.name!r} out of kind order")
        rank = _KIND_ORDER[p.kind]
        if p.kind is ParamKind.VAR_POSITIONAL:
            var_pos += 1
        elif p.kind is ParamKind.VAR_KEYWORD:
            var_kw += 1
        elif p.kind is ParamKind.POSITIONAL:
            if p.has_default:
                default_started = True
            elif default_started:
                raise SignatureSyntaxError(
                    f"positional parameter {p.name!r} without default follows one with"
                )
    if var_pos > 1 or var_kw > 1:
        raise SignatureSyntaxError("more than one variadic parameter of a kind")


def parse_signature(
    text: str,
    qualified_name: str = "",
    version_tag: str = "",
    origin: SigOrigin = SigOrigin.STATIC_SOURCE,
    method_context: bool = False,
) -> ApiSignature:
    """Parse a parenthesized parameter list written in Python 3 syntax.

    ``method_context`` marks signatures lifted from a method body: a leading
    ``self``/``cls`` is then stripped and recorded.  The flag is explicit
    because free functions may legitimately name their first parameter
    ``self``.
    """
    stripped = text.strip()
    if not stripped.startswith("("):
        stripped = "(" + stripped + ")"
    src = f"def _f{stripped}: pass"
    try:
        tree = ast.parse(src)
    except SyntaxError as exc:
        raise SignatureSyntaxError(
            f"cannot parse signature {text!r}", max((exc.offset or 7) - 7, 0)
        ) from exc
    fn = tree.body[0]
    assert isinstance(fn, ast.FunctionDef)
    params = _params_from_arguments(fn.args, src)

    self_stripped = False
    if (
        method_context
        and params
        and params[0].kind is ParamKind.POSITIONAL
        and params[0].name in ("self", "cls")
    ):
        params = _reindex(params[1:])
        self_stripped = True

    return ApiSignature(
        qualified_name=qualified_name,
        parameters=tuple(params),
        origin=origin,
        version_tag=version_tag,
        self_stripped=self_stripped,
    )


def signature_from_arguments(
    args: ast.arguments,
    source: str,
    qualified_name: str = "",
    version_tag: str = "",
    origin: SigOrigin = SigOrigin.STATIC_SOURCE,
    method_context: bool = False,
) -> ApiSignature:
    """Build a signature from an ``ast.arguments`` node of already-parsed source."""
    params = _params_from_arguments(args, source)
    self_stripped = False
    if (
        method_context
        and params
        and params[0].kind is ParamKind.POSITIONAL
        and params[0].name in ("self", "cls")
    ):
        params = _reindex(params[1:])
        self_stripped = True
    return ApiSignature(
        qualified_name=qualified_name,
        parameters=tuple(params),
        origin=origin,
        version_tag=version_tag,
        self_stripped=self_stripped,
    )


def _segment(source: str, node: Optional[ast.AST]) -> Optional[str]:
    if node is None:
        return None
    return ast.get_source_segment(source, node) or ast.unparse(node)


def _params_from_arguments(args: ast.arguments, source: str) -> list[Parameter]:
    params: list[Parameter] = []

    # `/`-separated positional-only parameters are treated as plain
    # positional parameters for the compatibility model.
    plain = list(args.posonlyargs) + list(args.args)
    defaults: list[Optional[ast.expr]] = [None] * (
        len(plain) - len(args.defaults)
    ) + list(args.defaults)
    for i, (a, d) in enumerate(zip(plain, defaults)):
        params.append(
            Parameter(
                name=a.arg,
                kind=ParamKind.POSITIONAL,
                index=i,
                has_default=d is not None,
                default_text=_segment(source, d),
                annotation_text=_segment(source, a.annotation),
            )
        )
    if args.vararg is not None:
        params.append(
            Parameter(
                name=args.vararg.arg,
                kind=ParamKind.VAR_POSITIONAL,
                index=0,
                annotation_text=_segment(source, args.vararg.annotation),
            )
        )
    for i, (a, d) in enumerate(zip(args.kwonlyargs, args.kw_defaults)):
        params.append(
            Parameter(
                name=a.arg,
                kind=ParamKind.KEYWORD_ONLY,
                index=i,
                has_default=d is not None,
                default_text=_segment(source, d),
                annotation_text=_segment(source, a.annotation),
            )
        )
    if args.kwarg is not None:
        params.append(
            Parameter(
                name=args.kwarg.arg,
                kind=ParamKind.VAR_KEYWORD,
                index=0,
                annotation_text=_segment(source, args.kwarg.annotation),
            )
        )
    _check_invariants(params)
    return params


def _reindex(params: list[Parameter]) -> list[Parameter]:
    out: list[Parameter] = []
    counters = {kind: 0 for kind in ParamKind}
    for p in params:
        out.append(replace(p, index=counters[p.kind]))
        counters[p.kind] += 1
    return out


def render_signature(sig: ApiSignature) -> str:
    """Render back to text; the result re-parses to an equal structure."""
    parts: list[str] = []
    for p in sig.positional:
        parts.append(_render_param(p))
    if sig.var_positional is not None:
        parts.append("*" + _render_param(sig.var_positional))
    elif sig.keyword_only:
        parts.append("*")
    for p in sig.keyword_only:
        parts.append(_render_param(p))
    if sig.var_keyword is not None:
        parts.append("**" + _render_param(sig.var_keyword))
    return "(" + ", ".join(parts) + ")"


def _render_param(p: Parameter) -> str:
    text = p.name
    if p.annotation_text is not None:
        text += f": {p.annotation_text}"
        if p.has_default:
            text += f" = {p.default_text}"
    elif p.has_default:
        text += f"={p.default_text}"
    return text


def normalize_annotation(text: Optional[str]) -> Optional[str]:
    """Whitespace/quote normalization used for textual annotation comparison."""
    if text is None:
        return None
    out = "".join(text.split())
    while len(out) >= 2 and out[0] == out[-1] and out[0] in "'\"":
        out = out[1:-1]
    return out


def annotations_textually_equal(a: Optional[str], b: Optional[str]) -> bool:
    return normalize_annotation(a) == normalize_annotation(b)


# --- Signature JSON: the exchange format with the sidecar and the report ---

def signature_to_json(sig: ApiSignature) -> dict:
    return {
        "qualified_name": sig.qualified_name,
        "version": sig.version_tag,
        "origin": sig.origin.value,
        "params": [
            {
                "name": p.name,
                "kind": p.kind.value,
                "index": p.index,
                "has_default": p.has_default,
                "default": p.default_text,
                "annotation": p.annotation_text,
            }
            for p in sig.parameters
        ],
    }


def signature_from_json(doc: dict) -> ApiSignature:
    params = tuple(
        Parameter(
            name=p["name"],
            kind=ParamKind(p["kind"]),
            index=p["index"],
            has_default=p["has_default"],
            default_text=p.get("default"),
            annotation_text=p.get("annotation"),
        )
        for p in doc["params"]
    )
    return ApiSignature(
        qualified_name=doc["qualified_name"],
        parameters=params,
        origin=SigOrigin(doc.get("origin", "reflected")),
        version_tag=doc.get("version", ""),
    )


def signature_json_dumps(sig: ApiSignature) -> str:
    return json.dumps(signature_to_json(sig), sort_keys=True)
