"""Converters between oracle-world scenarios and the implementation's types."""

from __future__ import annotations

from param_mend.benchgen import site_from_call_text
from param_mend.callx import CallSite
from param_mend.sigmodel import ApiSignature, Parameter, ParamKind

from oracles import OCall, OParam


def to_api_signature(
    params: list[OParam], name: str = "f", version: str = ""
) -> ApiSignature:
    out: list[Parameter] = []
    pos_i = kw_i = 0
    for p in params:
        if p.kind == "positional":
            out.append(
                Parameter(
                    name=p.name,
                    kind=ParamKind.POSITIONAL,
                    index=pos_i,
                    has_default=p.has_default,
                    default_text="0" if p.has_default else None,
                    annotation_text=p.annotation,
                )
            )
            pos_i += 1
        else:
            out.append(
                Parameter(
                    name=p.name,
                    kind=ParamKind.KEYWORD_ONLY,
                    index=kw_i,
                    has_default=p.has_default,
                    default_text="0" if p.has_default else None,
                    annotation_text=p.annotation,
                )
            )
            kw_i += 1
    return ApiSignature(qualified_name=name, parameters=tuple(out), version_tag=version)


def to_call_site(call: OCall, callee: str = "f") -> CallSite:
    return site_from_call_text(call.render(callee))


def sig(text: str, name: str = "f", method: bool = False) -> ApiSignature:
    from param_mend.sigmodel import parse_signature

    return parse_signature(text, qualified_name=name, method_context=method)
