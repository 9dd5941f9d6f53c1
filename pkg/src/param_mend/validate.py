"""Validation of repaired calls.

Static validation rewrites the repaired call with every argument explicitly
named (the full parameter mirror) and checks that mirror against the new
signature: names must exist, positions must bind the right parameter, and
required parameters must all be present.  Dynamic validation hands the
repaired snippet to a sidecar process running inside the target-version
interpreter; when no sidecar is configured the result is "unavailable" and a
statically-passing repair is reported with a star.
"""

from __future__ import annotations

import ast
import json
import subprocess
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .sigmodel import ApiSignature


class ArityMismatch(Exception):
    pass


class SidecarUnreachable(Exception):
    pass


@dataclass(frozen=True)
class MirrorArg:
    parameter_name: str
    value_text: str
    position_claimed: Optional[int]  # None for arguments passed by keyword
    variadic: bool = False


@dataclass
class MirrorCall:
    args: list[MirrorArg] = field(default_factory=list)
    plan_id: int = 0

    def render(self, callee: str = "f") -> str:
        parts = [f"{a.parameter_name}={a.value_text}" for a in self.args]
        return f"{callee}({', '.join(parts)})"


@dataclass(frozen=True)
class ValidationOutcome:
    status: str  # "pass" | "fail" | "unavailable"
    reason: str = ""

    def __bool__(self) -> bool:
        return self.status == "pass"


PASS = ValidationOutcome("pass")


def build_mirror(
    repaired_call: str, new_sig: ApiSignature, plan_id: int = 0
) -> MirrorCall:
    """Name every argument of a repaired call by binding order.

    Positional arguments take the name of the new-signature parameter at
    their slot; keyword arguments already carry names.  Arguments landing in
    a variadic catch-all keep the catch-all's name and are marked as such.
    """
    node = ast.parse(repaired_call.strip(), mode="eval").body
    if not isinstance(node, ast.Call):
        raise ArityMismatch(f"not a call expression: {repaired_call!r}")
    positional = new_sig.positional
    var_pos = new_sig.var_positional
    var_kw = new_sig.var_keyword

    mirror = MirrorCall(plan_id=plan_id)
    for i, arg in enumerate(node.args):
        text = ast.unparse(arg)
        if i < len(positional):
            mirror.args.append(MirrorArg(positional[i].name, text, position_claimed=i))
        elif var_pos is not None:
            mirror.args.append(
                MirrorArg(var_pos.name, text, position_claimed=i, variadic=True)
            )
        else:
            raise ArityMismatch(
                f"{len(node.args)} positional arguments, signature takes {len(positional)}"
            )
    for kw in node.keywords:
        text = ast.unparse(kw.value)
        if kw.arg is None:
            raise ArityMismatch("** expansion cannot be mirrored")
        param = new_sig.param(kw.arg)
        if param is None and var_kw is not None:
            mirror.args.append(
                MirrorArg(var_kw.name, text, position_claimed=None, variadic=True)
            )
        else:
            mirror.args.append(MirrorArg(kw.arg, text, position_claimed=None))
    return mirror


def validate_static(mirror: MirrorCall, new_sig: ApiSignature) -> ValidationOutcome:
    """Check the mirror's names, positions and completeness against the signature."""
    positional = new_sig.positional
    names = {p.name for p in new_sig.parameters}
    bound: set[str] = set()

    for arg in mirror.args:
        if arg.variadic:
            continue
        if arg.parameter_name not in names:
            return ValidationOutcome("fail", f"unknown parameter name {arg.parameter_name!r}")
        if arg.position_claimed is not None:
            if arg.position_claimed >= len(positional):
                return ValidationOutcome(
                    "fail", f"position {arg.position_claimed} beyond positional arity"
                )
            expected = positional[arg.position_claimed].name
            if expected != arg.parameter_name:
                return ValidationOutcome(
                    "fail",
                    f"position {arg.position_claimed} binds {expected!r}, "
                    f"mirror claims {arg.parameter_name!r}",
                )
        param = new_sig.param(arg.parameter_name)
        if param is not None and param.kind.value in ("var_positional", "var_keyword"):
            continue
        if arg.parameter_name in bound:
            return ValidationOutcome("fail", f"duplicate argument {arg.parameter_name!r}")
        bound.add(arg.parameter_name)

    missing = [p.name for p in new_sig.parameters if p.required and p.name not in bound]
    if missing:
        return ValidationOutcome("fail", f"required parameters not supplied: {missing}")
    return PASS


@dataclass
class SidecarConfig:
    """How to reach the reflection/execution sidecar.

    ``command`` is the argv prefix of the sidecar process; one JSON request
    goes to its stdin, one JSON response comes back on stdout.
    """

    command: Sequence[str]
    env_path: str = ""
    timeout_seconds: float = 30.0


def sidecar_request(config: SidecarConfig, request: dict) -> dict:
    try:
        proc = subprocess.run(
            list(config.command),
            input=(json.dumps(request) + "\n").encode(),
            capture_output=True,
            timeout=config.timeout_seconds + 10,
        )
    except FileNotFoundError as exc:
        raise SidecarUnreachable(f"sidecar command not found: {config.command}") from exc
    except subprocess.TimeoutExpired as exc:
        raise SidecarUnreachable("sidecar timed out") from exc
    if proc.returncode != 0:
        raise SidecarUnreachable(
            f"sidecar exited {proc.returncode}: {proc.stderr.decode(errors='replace')[:500]}"
        )
    line = proc.stdout.decode().strip().splitlines()
    if not line:
        raise SidecarUnreachable("sidecar produced no response")
    try:
        return json.loads(line[-1])
    except json.JSONDecodeError as exc:
        raise SidecarUnreachable(f"sidecar response is not JSON: {line[-1][:200]}") from exc


def reflect_signature_via_sidecar(
    config: SidecarConfig, module_path: str, attribute_chain: str
) -> dict:
    return sidecar_request(
        config,
        {
            "env_path": config.env_path,
            "module_path": module_path,
            "attribute_chain": attribute_chain,
            "mode": "signature",
            "timeout_seconds": config.timeout_seconds,
        },
    )


def validate_dynamic(
    snippet: str, config: Optional[SidecarConfig]
) -> ValidationOutcome:
    """Run the repaired snippet in the target environment via the sidecar.

    Passing means the snippet evaluated without raising.  Import and setup
    failures inside the environment come back as "unavailable" rather than
    "fail": they say nothing about the repair itself.
    """
    if config is None:
        return ValidationOutcome("unavailable", "dynamic validation off")
    response = sidecar_request(
        config,
        {
            "env_path": config.env_path,
            "module_path": "",
            "attribute_chain": "",
            "mode": "execute",
            "snippet": snippet,
            "timeout_seconds": config.timeout_seconds,
        },
    )
    if response.get("ok"):
        return PASS
    error = response.get("error", {})
    etype = error.get("type", "")
    message = error.get("message", "")
    if etype in ("ImportError", "ModuleNotFoundError", "EnvironmentNotFound", "Timeout"):
        return ValidationOutcome("unavailable", f"{etype}: {message}")
    return ValidationOutcome("fail", f"{etype}: {message}")
