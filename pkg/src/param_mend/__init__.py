"""Parameter-level API compatibility checking and repair for library upgrades."""

from .sigmodel import (
    ApiSignature,
    Parameter,
    ParamKind,
    SigOrigin,
    parse_signature,
    render_signature,
)
from .callx import CallSite, ArgUse, Passing, InvocationForm, extract_calls, classify_passing
from .parammap import ChangeDict, ChangeKind, ParamChange, establish_mapping
from .compat import (
    CallStatus,
    CallVerdict,
    ParamType,
    ParamVerdict,
    Verdict,
    assess_call,
    assess_parameter,
)
from .repair import EditKind, EditOp, RepairPlan, apply_repair, plan_repair, prune_candidates
from .validate import MirrorCall, build_mirror, validate_dynamic, validate_static
from .libindex import ApiIndex, index_library, lookup_candidates, simplify_qualified_name
from .benchgen import MetricCounts, compute_metrics, count_combinations, mutate
from .orchestrate import RunConfig, RunReport, load_config, run

__version__ = "0.1.0"

__all__ = [
    "ApiSignature",
    "Parameter",
    "ParamKind",
    "SigOrigin",
    "parse_signature",
    "render_signature",
    "CallSite",
    "ArgUse",
    "Passing",
    "InvocationForm",
    "extract_calls",
    "classify_passing",
    "ChangeDict",
    "ChangeKind",
    "ParamChange",
    "establish_mapping",
    "CallStatus",
    "CallVerdict",
    "ParamType",
    "ParamVerdict",
    "Verdict",
    "assess_call",
    "assess_parameter",
    "EditKind",
    "EditOp",
    "RepairPlan",
    "apply_repair",
    "plan_repair",
    "prune_candidates",
    "MirrorCall",
    "build_mirror",
    "validate_dynamic",
    "validate_static",
    "ApiIndex",
    "index_library",
    "lookup_candidates",
    "simplify_qualified_name",
    "MetricCounts",
    "compute_metrics",
    "count_combinations",
    "mutate",
    "RunConfig",
    "RunReport",
    "load_config",
    "run",
    "__version__",
]
