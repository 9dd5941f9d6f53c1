import itertools
import random

import pytest

from param_mend.callx import Passing, classify_passing
from param_mend.compat import (
    COMPATIBILITY_TABLE,
    CallStatus,
    IllegalCombination,
    ParamType,
    RuleSource,
    Verdict,
    assess_call,
    assess_parameter,
)
from param_mend.parammap import ChangeKind, establish_mapping

from oracles import OCall, OParam, oracle_verdict, random_binding_call, random_scenario
from support import sig, to_api_signature, to_call_site

P, K = ParamType.POSITIONAL, ParamType.KEYWORD
UP, UK, UN = Passing.POSITIONAL, Passing.KEYWORD, Passing.NOT_PASSED
C, I = Verdict.COMPATIBLE, Verdict.INCOMPATIBLE

# every row of the model, spelled out
EXPECTED_ROWS = {
    (P, ChangeKind.REMOVAL, UN): C,
    (P, ChangeKind.REMOVAL, UP): I,
    (P, ChangeKind.REMOVAL, UK): I,
    (P, ChangeKind.REORDER, UN): C,
    (P, ChangeKind.REORDER, UP): I,
    (P, ChangeKind.REORDER, UK): C,
    (P, ChangeKind.RENAME, UN): C,
    (P, ChangeKind.RENAME, UP): C,
    (P, ChangeKind.RENAME, UK): I,
    (P, ChangeKind.POS2KEY, UN): C,
    (P, ChangeKind.POS2KEY, UP): I,
    (P, ChangeKind.POS2KEY, UK): C,
    (P, ChangeKind.TYPE_CHANGE, UN): C,
    (P, ChangeKind.TYPE_CHANGE, UP): I,
    (P, ChangeKind.TYPE_CHANGE, UK): I,
    (P, ChangeKind.ADDED_REQUIRED, UN): I,
    (P, ChangeKind.ADDED_OPTIONAL, UN): C,
    (K, ChangeKind.REMOVAL, UN): C,
    (K, ChangeKind.REMOVAL, UK): I,
    (K, ChangeKind.RENAME, UN): C,
    (K, ChangeKind.RENAME, UK): I,
    (K, ChangeKind.KEY2POS, UN): C,
    (K, ChangeKind.KEY2POS, UK): C,
    (K, ChangeKind.TYPE_CHANGE, UN): C,
    (K, ChangeKind.TYPE_CHANGE, UK): I,
    (K, ChangeKind.ADDED_REQUIRED, UN): I,
    (K, ChangeKind.ADDED_OPTIONAL, UN): C,
}


def test_table_has_exactly_27_rows():
    assert len(EXPECTED_ROWS) == 27
    assert COMPATIBILITY_TABLE == EXPECTED_ROWS


@pytest.mark.parametrize("row,expected", sorted(EXPECTED_ROWS.items(), key=str))
def test_each_row(row, expected):
    assert assess_parameter(*row) is expected


def test_unchanged_is_compatible_for_any_passing():
    for p in (P, K):
        for m in (UP, UK, UN):
            assert assess_parameter(p, ChangeKind.UNCHANGED, m) is C


def test_illegal_combinations_exhaustively():
    changes = [k for k in ChangeKind if k is not ChangeKind.UNCHANGED]
    for p, e, m in itertools.product((P, K), changes, (UP, UK, UN)):
        if (p, e, m) in EXPECTED_ROWS:
            assess_parameter(p, e, m)
        else:
            with pytest.raises(IllegalCombination):
                assess_parameter(p, e, m)


def test_monotone_conjunction():
    # one incompatible parameter sinks the call
    old = sig("(a, b)")
    new = sig("(a,)")
    site = to_call_site(OCall(("1", "2"), ()))
    cd = establish_mapping(old, new)
    verdict = assess_call(site, cd, new, classify_passing(site, old))
    assert verdict.overall is CallStatus.INCOMPATIBLE
    assert any(v.verdict is I for v in verdict.per_param)


def test_unknown_propagates_when_new_sig_missing():
    old = sig("(a,)")
    site = to_call_site(OCall(("1",), ()))
    cd = establish_mapping(old, old)
    verdict = assess_call(site, cd, None, classify_passing(site, old))
    assert verdict.overall is CallStatus.UNKNOWN
    assert verdict.unknown_reason


def test_removed_positional_passed_positionally():
    # a removed third positional passed by position breaks the call
    old = sig("(a, v, mode='valid', old_behavior=False)")
    new = sig("(a, v, mode='valid')")
    site = to_call_site(OCall(("x", "y", "'valid'", "False"), ()))
    cd = establish_mapping(old, new)
    verdict = assess_call(site, cd, new, classify_passing(site, old))
    assert verdict.overall is CallStatus.INCOMPATIBLE


def test_runnable_but_incompatible_misbinding():
    # the removed middle parameter leaves the call runnable yet misbound
    old = sig("(G, maxcardinality=None, weight='weight')")
    new = sig("(G, weight='weight')")
    site = to_call_site(OCall(("G", "None"), ()))
    cd = establish_mapping(old, new)
    verdict = assess_call(site, cd, new, classify_passing(site, old))
    assert verdict.overall is CallStatus.INCOMPATIBLE
    # and the binding oracle agrees the call still binds
    new_params = [
        OParam("G", "positional"),
        OParam("weight", "positional", has_default=True),
    ]
    old_params = [
        OParam("G", "positional"),
        OParam("maxcardinality", "positional", has_default=True),
        OParam("weight", "positional", has_default=True),
    ]
    call = OCall(("G", "None"), ())
    image = {"G": "G", "maxcardinality": None, "weight": "weight"}
    assert oracle_verdict(old_params, new_params, call, image) == "Incompatible"


def test_variadic_override_absorbs_removals():
    old = sig("(X, metric='euclidean', p=None, w=None, V=None, VI=None)")
    new = sig("(X, metric='euclidean', *args, **kwargs)")
    site = to_call_site(
        OCall(("X", "'euclidean'", "None", "None"), (("V", "None"), ("VI", "None")))
    )
    cd = establish_mapping(old, new)
    verdict = assess_call(site, cd, new, classify_passing(site, old))
    assert verdict.overall is CallStatus.COMPATIBLE
    overridden = [v for v in verdict.per_param if v.rule_source is RuleSource.VARIADIC_OVERRIDE]
    assert overridden and all(v.vpp_warning for v in overridden)


def test_rule1_untouched_parameters_compatible():
    old = sig("(a, b=1, *, c=2)")
    new = sig("(a, b=1, *, c=3)")  # default drift only, no structural change
    site = to_call_site(OCall(("1",), ()))
    cd = establish_mapping(old, new)
    verdict = assess_call(site, cd, new, classify_passing(site, old))
    assert verdict.overall is CallStatus.COMPATIBLE


def test_oracle_agreement_sample():
    rng = random.Random(20240901)
    disagreements = []
    for _ in range(2000):
        scenario = random_scenario(rng)
        call = random_binding_call(rng, scenario.old_params)
        expected = oracle_verdict(
            scenario.old_params, scenario.new_params, call, scenario.image
        )
        old_sig = to_api_signature(scenario.old_params)
        new_sig = to_api_signature(scenario.new_params)
        site = to_call_site(call)
        passing = classify_passing(site, old_sig)
        verdict = assess_call(site, establish_mapping(old_sig, new_sig), new_sig, passing)
        if verdict.overall.value != expected:
            disagreements.append((scenario.script, call.render(), expected, verdict.overall))
    assert not disagreements, disagreements[:5]
