import json

from matdirac import verify
from matdirac.cli import main


def test_every_ref_maps_to_library_callables():
    for ref, fns in verify.REFS.items():
        assert fns, ref
        for fn in fns:
            assert callable(fn)
            assert fn.__module__.startswith("matdirac."), (ref, fn)


def test_report_refs_are_registered(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify-all", "--trials", "3", "--samples", "3", "--json", str(out)]) == 0
    report = json.loads(out.read_text())
    refs = {c["ref"] for c in report["checks"]}
    assert refs <= set(verify.REFS)
    # every registered identity is exercised
    assert refs == set(verify.REFS)


def test_suite_order():
    names = [n for n, _ in verify.SUITES]
    assert names == ["gamma", "factorization", "kg_consistency", "jordan", "canonical_forms",
                     "projector", "current_identity", "conservation", "gauge", "polar"]
