import random
import sys
from pathlib import Path

import pytest

from param_mend.callx import Passing, classify_passing
from param_mend.validate import (
    ArityMismatch,
    SidecarConfig,
    SidecarUnreachable,
    build_mirror,
    reflect_signature_via_sidecar,
    sidecar_request,
    validate_dynamic,
    validate_static,
)

from oracles import random_binding_call, random_scenario
from support import sig, to_api_signature, to_call_site

FAKE_SIDECAR = [sys.executable, str(Path(__file__).parent / "fake_sidecar.py")]


def test_mirror_names_every_argument():
    new_sig = sig("(y: int, x: int, *, e: bool, w: str)")
    mirror = build_mirror("f(2, 1, e=True, w='hello')", new_sig)
    assert [(a.parameter_name, a.value_text) for a in mirror.args] == [
        ("y", "2"),
        ("x", "1"),
        ("e", "True"),
        ("w", "'hello'"),
    ]
    assert mirror.render() == "f(y=2, x=1, e=True, w='hello')"
    assert validate_static(mirror, new_sig).status == "pass"


def test_mirror_empty_call():
    mirror = build_mirror("f()", sig("(a=1, b=2)"))
    assert mirror.args == []
    assert validate_static(mirror, sig("(a=1, b=2)")).status == "pass"


def test_mirror_arity_mismatch():
    with pytest.raises(ArityMismatch):
        build_mirror("f(1, 2, 3)", sig("(a, b)"))


def test_static_fails_on_unknown_name():
    new_sig = sig("(G, weight='weight')")
    mirror = build_mirror("f(G, maxcardinality=None)", new_sig)
    outcome = validate_static(mirror, new_sig)
    assert outcome.status == "fail"
    assert "maxcardinality" in outcome.reason


def test_static_fails_on_missing_required():
    new_sig = sig("(a, b)")
    mirror = build_mirror("f(1)", new_sig)
    outcome = validate_static(mirror, new_sig)
    assert outcome.status == "fail"
    assert "b" in outcome.reason


def test_static_fails_on_duplicate():
    new_sig = sig("(a, b=1)")
    mirror = build_mirror("f(1, a=2)", new_sig)
    assert validate_static(mirror, new_sig).status == "fail"


def test_static_accepts_variadic_overflow():
    new_sig = sig("(a, *args, **kwargs)")
    mirror = build_mirror("f(1, 2, 3, extra=4)", new_sig)
    assert validate_static(mirror, new_sig).status == "pass"


def test_mirror_agrees_with_passing_classification():
    # for a compatible, unrepaired call the mirror must name exactly the
    # parameters the classifier says are passed
    rng = random.Random(5150)
    for _ in range(300):
        scenario = random_scenario(rng)
        call = random_binding_call(rng, scenario.old_params)
        old_sig = to_api_signature(scenario.old_params)
        site = to_call_site(call)
        passing = classify_passing(site, old_sig)
        mirror = build_mirror(call.render(), old_sig)
        named = {a.parameter_name for a in mirror.args}
        passed = {k for k, v in passing.items() if v is not Passing.NOT_PASSED}
        assert named == passed
        assert validate_static(mirror, old_sig).status == "pass"


def test_dynamic_unavailable_without_sidecar():
    outcome = validate_dynamic("print('hi')", None)
    assert outcome.status == "unavailable"
    assert outcome.reason == "dynamic validation off"


def test_dynamic_pass_via_fake_sidecar():
    config = SidecarConfig(command=FAKE_SIDECAR)
    outcome = validate_dynamic("def g(a, b=1):\n    pass\ng(1, b=2)\n", config)
    assert outcome.status == "pass"


def test_dynamic_fail_reports_type_error():
    config = SidecarConfig(command=FAKE_SIDECAR)
    outcome = validate_dynamic("def g(a):\n    pass\ng(1, nope=2)\n", config)
    assert outcome.status == "fail"
    assert "unexpected keyword" in outcome.reason


def test_dynamic_import_trouble_is_unavailable():
    config = SidecarConfig(command=FAKE_SIDECAR)
    outcome = validate_dynamic("import no_such_module_xyz\n", config)
    assert outcome.status == "unavailable"


def test_sidecar_unreachable():
    config = SidecarConfig(command=["/no/such/binary"])
    with pytest.raises(SidecarUnreachable):
        sidecar_request(config, {"mode": "execute", "snippet": ""})


def test_reflect_signature_roundtrip():
    config = SidecarConfig(command=FAKE_SIDECAR)
    response = reflect_signature_via_sidecar(config, "json", "dumps")
    names = [p["name"] for p in response["params"]]
    assert names[0] == "obj"
    assert "indent" in names


def test_reflect_error_paths():
    config = SidecarConfig(command=FAKE_SIDECAR)
    assert reflect_signature_via_sidecar(config, "json", "nonexistent")["error"][
        "type"
    ] == "AttributeError"
    assert reflect_signature_via_sidecar(config, "no_such_module_xyz", "")["error"][
        "type"
    ] == "ImportError"
