"""End-to-end pipeline: configuration, per-file tasks, report assembly.

Signature acquisition prefers live reflection through the sidecar (one
interpreter per environment) and falls back to the static index built from
the library sources found under each environment path; in static-only mode
the index is authoritative and the report's coverage column says so.  Every
per-file or per-call failure degrades to a report row, never an abort.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .callx import (
    BindingError,
    CallSite,
    ParseFailure,
    classify_passing,
    extract_calls,
)
from .compat import CallStatus, assess_call
from .libindex import ApiIndex, index_library, lookup_candidates
from .parammap import establish_mapping
from .repair import (
    RepairPlan,
    TargetNotFound,
    Unrepairable,
    apply_repair,
    plan_repair,
    prune_candidates,
    rewrite_file,
)
from .sigmodel import (
    ApiSignature,
    SigOrigin,
    render_signature,
    signature_from_json,
)
from .validate import (
    SidecarConfig,
    SidecarUnreachable,
    build_mirror,
    reflect_signature_via_sidecar,
    validate_dynamic,
    validate_static,
)

_REQUIRED_KEYS = (
    "project_path",
    "library_name",
    "current_version",
    "target_version",
    "current_env_path",
    "target_env_path",
)
_OPTIONAL_KEYS = {
    "run_command": "",
    "entry_file": "",
    "dry_run": True,
    "static_only": False,
    "rng_seed": 0,
    "sidecar_command": "",
}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


@dataclass
class RunConfig:
    project_path: str
    library_name: str
    current_version: str
    target_version: str
    current_env_path: str
    target_env_path: str
    run_command: str = ""
    entry_file: str = ""
    dry_run: bool = True
    static_only: bool = False
    rng_seed: int = 0
    sidecar_command: str = ""


def load_config(path: str | Path) -> RunConfig:
    """Parse a flat ``key = value`` document or its JSON equivalent.

    The schema is strict: unknown keys are rejected, the two versions must
    differ, and both environment paths are required.
    """
    text = Path(path).read_text(encoding="utf-8")
    raw: dict[str, object]
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"line {lineno}", f"expected key=value, got {stripped!r}")
            key, _, value = stripped.partition("=")
            raw[key.strip()] = value.strip()
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    known = set(_REQUIRED_KEYS) | set(_OPTIONAL_KEYS)
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown key")
    for key in _REQUIRED_KEYS:
        if key not in raw or raw[key] in ("", None):
            raise ConfigError(key, "required")

    def as_bool(key: str) -> bool:
        value = raw.get(key, _OPTIONAL_KEYS[key])
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        raise ConfigError(key, f"expected true/false, got {value!r}")

    def as_int(key: str) -> int:
        value = raw.get(key, _OPTIONAL_KEYS[key])
        if isinstance(value, bool):
            raise ConfigError(key, "expected integer")
        try:
            return int(value)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected integer, got {value!r}") from None

    config = RunConfig(
        project_path=str(raw["project_path"]),
        library_name=str(raw["library_name"]),
        current_version=str(raw["current_version"]),
        target_version=str(raw["target_version"]),
        current_env_path=str(raw["current_env_path"]),
        target_env_path=str(raw["target_env_path"]),
        run_command=str(raw.get("run_command", "")),
        entry_file=str(raw.get("entry_file", "")),
        dry_run=as_bool("dry_run"),
        static_only=as_bool("static_only"),
        rng_seed=as_int("rng_seed"),
        sidecar_command=str(raw.get("sidecar_command", "")),
    )
    if config.current_version == config.target_version:
        raise ConfigError("target_version", "must differ from current_version")
    return config


def dump_config(config: RunConfig) -> str:
    lines = []
    for key in _REQUIRED_KEYS + tuple(_OPTIONAL_KEYS):
        value = getattr(config, key)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


@dataclass
class ReportRow:
    file: str
    line: int
    invocation_form: str
    call_text: str
    restored_path: str
    coverage: str = "static"
    old_signature: Optional[str] = None
    new_signature: Optional[str] = None
    per_param: list[dict] = field(default_factory=list)
    overall: str = CallStatus.UNKNOWN.value
    unknown_reason: Optional[str] = None
    repair_result: str = "NotAttempted"
    repaired_call: Optional[str] = None
    suggestions: list[str] = field(default_factory=list)
    low_confidence: bool = False

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "line": self.line,
            "invocation_form": self.invocation_form,
            "call_text": self.call_text,
            "restored_path": self.restored_path,
            "coverage": self.coverage,
            "old_signature": self.old_signature,
            "new_signature": self.new_signature,
            "per_param": self.per_param,
            "overall": self.overall,
            "unknown_reason": self.unknown_reason,
            "repair_result": self.repair_result,
            "repaired_call": self.repaired_call,
            "suggestions": self.suggestions,
            "low_confidence": self.low_confidence,
        }


@dataclass
class RunReport:
    library: str
    current_version: str
    target_version: str
    rng_seed: int
    rows: list[ReportRow] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    diffs: dict[str, str] = field(default_factory=dict)
    written_files: list[str] = field(default_factory=list)

    @property
    def incompatible_count(self) -> int:
        return sum(1 for r in self.rows if r.overall == CallStatus.INCOMPATIBLE.value)

    def to_json(self) -> dict:
        return {
            "library": self.library,
            "current_version": self.current_version,
            "target_version": self.target_version,
            "rng_seed": self.rng_seed,
            "rows": [r.to_json() for r in self.rows],
            "diagnostics": sorted(self.diagnostics),
            "diffs": self.diffs,
            "written_files": sorted(self.written_files),
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    def render_table(self) -> str:
        headers = ("location", "form", "api", "status", "repair")
        table = [headers]
        for row in self.rows:
            table.append(
                (
                    f"{row.file}:{row.line}",
                    row.invocation_form,
                    row.restored_path,
                    row.overall,
                    row.repair_result,
                )
            )
        widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
        lines = []
        for i, row in enumerate(table):
            lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)))
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        summary = (
            f"{len(self.rows)} call(s): "
            f"{self.incompatible_count} incompatible, "
            f"{sum(1 for r in self.rows if r.overall == 'Compatible')} compatible, "
            f"{sum(1 for r in self.rows if r.overall == 'Unknown')} unknown"
        )
        return "\n".join(lines + ["", summary])


def find_library_root(env_path: str | Path, library_name: str) -> Optional[Path]:
    """Locate the library package inside an environment or source checkout.

    Returns the directory whose *parent* should be indexed, so actual paths
    start with the library name.
    """
    env = Path(env_path)
    if not env.exists():
        return None
    if env.name == library_name and env.is_dir():
        return env
    direct = env / library_name
    if direct.is_dir():
        return direct
    for site in sorted(env.glob("**/site-packages")):
        candidate = site / library_name
        if candidate.is_dir():
            return candidate
    return None


class _SignatureSource:
    """Reflect-then-static signature acquisition for one environment."""

    def __init__(self, config: RunConfig, env_path: str, version: str):
        self.config = config
        self.env_path = env_path
        self.version = version
        self._index: Optional[ApiIndex] = None
        self._index_failed: Optional[str] = None
        self._cache: dict[str, tuple[list[ApiSignature], str]] = {}
        self.sidecar: Optional[SidecarConfig] = None
        if not config.static_only and config.sidecar_command:
            self.sidecar = SidecarConfig(
                command=config.sidecar_command.split(), env_path=env_path
            )

    def index(self) -> Optional[ApiIndex]:
        if self._index is None and self._index_failed is None:
            root = find_library_root(self.env_path, self.config.library_name)
            if root is None:
                self._index_failed = (
                    f"library {self.config.library_name!r} not found under {self.env_path}"
                )
            else:
                self._index = index_library(
                    root.parent, self.version, package=root.name
                )
        return self._index

    def candidates(self, call_path: str) -> tuple[list[ApiSignature], str]:
        """Signature candidates plus the coverage tag ("dynamic" or "static")."""
        if call_path in self._cache:
            return self._cache[call_path]
        result: tuple[list[ApiSignature], str]
        reflected = self._reflect(call_path)
        if reflected is not None:
            result = ([reflected], "dynamic")
        else:
            index = self.index()
            found = lookup_candidates(index, call_path) if index is not None else []
            result = (found, "static")
        self._cache[call_path] = result
        return result

    def _reflect(self, call_path: str) -> Optional[ApiSignature]:
        if self.sidecar is None:
            return None
        parts = call_path.split(".")
        for i in range(len(parts), 0, -1):
            try:
                response = reflect_signature_via_sidecar(
                    self.sidecar, ".".join(parts[:i]), ".".join(parts[i:])
                )
            except SidecarUnreachable:
                return None
            if "error" in response:
                etype = response["error"].get("type")
                if etype in ("ImportError", "ModuleNotFoundError"):
                    continue  # try a shorter module split
                return None
            doc = dict(response)
            doc.setdefault("qualified_name", call_path)
            doc.setdefault("version", self.version)
            sig = signature_from_json(doc)
            return ApiSignature(
                qualified_name=call_path,
                parameters=sig.parameters,
                origin=SigOrigin.REFLECTED,
                version_tag=self.version,
                self_stripped=sig.self_stripped,
            )
        return None


def _pair_candidates(
    old: list[ApiSignature], new: list[ApiSignature]
) -> list[tuple[ApiSignature, ApiSignature]]:
    pairs: list[tuple[ApiSignature, ApiSignature]] = []
    used: set[int] = set()
    for old_sig in old:
        match = None
        for i, new_sig in enumerate(new):
            if i in used:
                continue
            if new_sig.qualified_name == old_sig.qualified_name:
                match = i
                break
        if match is None:
            for i, _ in enumerate(new):
                if i not in used:
                    match = i
                    break
        if match is not None:
            used.add(match)
            pairs.append((old_sig, new[match]))
    return pairs


def _literal_args_only(site: CallSite) -> bool:
    import ast as _ast

    for arg in site.args:
        try:
            _ast.literal_eval(arg.expr_text)
        except (ValueError, SyntaxError):
            return False
    return True


_EXEC_TEMPLATE = """\
import importlib
_parts = {path!r}.split(".")
_obj = None
_err = None
for _i in range(len(_parts), 0, -1):
    try:
        _obj = importlib.import_module(".".join(_parts[:_i]))
    except ImportError as exc:
        _err = exc
        continue
    for _attr in _parts[_i:]:
        _obj = getattr(_obj, _attr)
    break
if _obj is None:
    raise _err or ImportError({path!r})
_obj{arglist}
"""


def _dynamic_snippet(site: CallSite, repaired_text: str, config: RunConfig) -> Optional[str]:
    if not _literal_args_only(site):
        return None
    open_paren = repaired_text.find("(")
    if open_paren < 0:
        return None
    arglist = repaired_text[open_paren:]
    preamble = ""
    if config.entry_file:
        module = Path(config.entry_file).stem
        preamble = f"from {module} import *\n"
    return preamble + _EXEC_TEMPLATE.format(path=site.restored_path, arglist=arglist)


def run(config: RunConfig, write: bool = False) -> RunReport:
    """Execute the whole pipeline over a project; one report row per call."""
    project = Path(config.project_path)
    if not project.exists():
        raise FileNotFoundError(f"project root not readable: {project}")

    report = RunReport(
        library=config.library_name,
        current_version=config.current_version,
        target_version=config.target_version,
        rng_seed=config.rng_seed,
    )

    old_source = _SignatureSource(config, config.current_env_path, config.current_version)
    new_source = _SignatureSource(config, config.target_env_path, config.target_version)

    files = sorted(
        p
        for p in project.rglob("*.py")
        if p.is_file()
        and not any(part.startswith(".") for part in p.relative_to(project).parts)
    )

    def process(path: Path) -> tuple[list[ReportRow], list[str], list[tuple[CallSite, RepairPlan]]]:
        rows: list[ReportRow] = []
        diagnostics: list[str] = []
        plans: list[tuple[CallSite, RepairPlan]] = []
        rel = str(path.relative_to(project))
        try:
            sites = extract_calls(path, config.library_name)
        except ParseFailure as exc:
            diagnostics.append(f"parse failure: {rel}: {exc.reason}")
            return rows, diagnostics, plans
        for site in sites:
            site.file = rel
            rows.append(_process_site(site, config, old_source, new_source, plans))
        return rows, diagnostics, plans

    all_plans: dict[Path, list[RepairPlan]] = {}
    workers = max(1, min(8, len(files)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for path, (rows, diags, plans) in zip(files, pool.map(process, files)):
            report.rows.extend(rows)
            report.diagnostics.extend(diags)
            if plans:
                all_plans[path] = [plan for _, plan in plans]

    if old_source._index is not None:
        report.diagnostics.extend(old_source._index.diagnostics)
    if new_source._index is not None:
        report.diagnostics.extend(new_source._index.diagnostics)
    for source in (old_source, new_source):
        if source._index_failed:
            report.diagnostics.append(source._index_failed)

    for path, plans in sorted(all_plans.items()):
        rel = str(path.relative_to(project))
        try:
            result = rewrite_file(path, plans, label=rel)
        except (TargetNotFound, OSError) as exc:
            report.diagnostics.append(f"rewrite failed: {rel}: {exc}")
            continue
        if result.diff:
            report.diffs[rel] = result.diff
            if write and not config.dry_run:
                path.write_text(result.content, encoding="utf-8")
                report.written_files.append(rel)

    report.rows.sort(key=lambda r: (r.file, r.line, r.call_text))
    return report


def _process_site(
    site: CallSite,
    config: RunConfig,
    old_source: _SignatureSource,
    new_source: _SignatureSource,
    plans: list[tuple[CallSite, RepairPlan]],
) -> ReportRow:
    row = ReportRow(
        file=site.file,
        line=site.line,
        invocation_form=site.invocation_form.value,
        call_text=site.call_text,
        restored_path=site.restored_path,
    )
    old_candidates, old_coverage = old_source.candidates(site.restored_path)
    new_candidates, new_coverage = new_source.candidates(site.restored_path)
    row.coverage = (
        "dynamic" if old_coverage == "dynamic" and new_coverage == "dynamic" else "static"
    )
    if not old_candidates or not new_candidates:
        row.overall = CallStatus.UNKNOWN.value
        row.unknown_reason = "no signature found for " + (
            "current version" if not old_candidates else "target version"
        )
        return row

    pairs = _pair_candidates(old_candidates, new_candidates)
    surviving = prune_candidates(pairs, site)
    row.old_signature = render_signature(pairs[0][0])
    row.new_signature = render_signature(pairs[0][1])

    if not surviving:
        # every candidate is compatible as called; report the first pair
        old_sig, new_sig = pairs[0]
        try:
            passing = classify_passing(site, old_sig)
        except BindingError as exc:
            row.overall = CallStatus.UNKNOWN.value
            row.unknown_reason = str(exc)
            return row
        change_dict = establish_mapping(old_sig, new_sig)
        verdict = assess_call(site, change_dict, new_sig, passing)
        _fill_verdicts(row, verdict, change_dict.low_confidence)
        row.overall = CallStatus.COMPATIBLE.value
        return row

    candidate_plans: list[tuple[RepairPlan, ApiSignature, ApiSignature]] = []
    for candidate_id, (old_sig, new_sig) in enumerate(surviving):
        try:
            passing = classify_passing(site, old_sig)
        except BindingError as exc:
            row.overall = CallStatus.UNKNOWN.value
            row.unknown_reason = str(exc)
            return row
        change_dict = establish_mapping(old_sig, new_sig)
        try:
            plan = plan_repair(site, change_dict, passing)
            plan.candidate_id = candidate_id
        except Unrepairable as exc:
            plan = RepairPlan(site=site, candidate_id=candidate_id, partial=True)
            plan.suggestions.append(exc.reason)
        candidate_plans.append((plan, old_sig, new_sig))

    distinct_ops = {tuple(p.ops) for p, _, _ in candidate_plans}
    if len(distinct_ops) > 1:
        row.overall = CallStatus.UNKNOWN.value
        row.unknown_reason = (
            f"{len(candidate_plans)} incompatible signature candidates disagree on the repair"
        )
        return row

    plan, old_sig, new_sig = candidate_plans[0]
    row.old_signature = render_signature(old_sig)
    row.new_signature = render_signature(new_sig)
    passing = classify_passing(site, old_sig)
    change_dict = establish_mapping(old_sig, new_sig)
    verdict = assess_call(site, change_dict, new_sig, passing)
    _fill_verdicts(row, verdict, change_dict.low_confidence)
    row.overall = CallStatus.INCOMPATIBLE.value
    row.suggestions.extend(plan.suggestions)

    if not plan.ops:
        row.repair_result = "Failed"
        return row

    repaired = apply_repair(site.call_text, plan)
    row.repaired_call = repaired
    try:
        mirror = build_mirror(repaired, new_sig)
    except Exception as exc:  # ArityMismatch or parse trouble
        row.repair_result = "Failed"
        row.suggestions.append(f"mirror construction failed: {exc}")
        return row
    static = validate_static(mirror, new_sig)
    if not static:
        row.repair_result = "Failed"
        row.suggestions.append(f"static validation failed: {static.reason}")
        return row

    if config.static_only or not config.sidecar_command:
        row.repair_result = "Successful*" if not plan.partial else "Failed"
        if not plan.partial:
            plans.append((site, plan))
        return row

    snippet = _dynamic_snippet(site, repaired, config)
    if snippet is None:
        outcome = validate_dynamic("", None)
    else:
        sidecar = SidecarConfig(
            command=config.sidecar_command.split(), env_path=config.target_env_path
        )
        try:
            outcome = validate_dynamic(snippet, sidecar)
        except SidecarUnreachable as exc:
            outcome = validate_dynamic("", None)
            row.suggestions.append(f"sidecar unreachable: {exc}")

    if plan.partial:
        row.repair_result = "Failed"
    elif outcome.status == "pass":
        row.repair_result = "Successful"
        plans.append((site, plan))
    elif outcome.status == "unavailable":
        row.repair_result = "Successful*"
        row.suggestions.append(f"dynamic validation unavailable: {outcome.reason}")
        plans.append((site, plan))
    else:
        row.repair_result = "Failed"
        row.suggestions.append(f"dynamic validation failed: {outcome.reason}")
    return row


def _fill_verdicts(row: ReportRow, verdict, low_confidence: bool) -> None:
    row.low_confidence = low_confidence
    row.per_param = [
        {
            "param": pv.param,
            "P": pv.p.value,
            "E": pv.e.value,
            "M": pv.m.value,
            "verdict": pv.verdict.value,
            "rule_source": pv.rule_source.value,
            "vpp_warning": pv.vpp_warning,
        }
        for pv in verdict.per_param
    ]
