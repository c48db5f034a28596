"""Smoke test for the lambda_sync_py extension module."""

import json

import lambda_sync_py as ls


def main() -> None:
    dyck = json.dumps({"kind": "dyck", "n": 2})
    assert ls.is_admissible(dyck, "α1 β1")
    assert not ls.is_admissible(dyck, "α1 β2")
    assert ls.enumerate_words("golden-mean", 2) == ["a a", "a b", "b a"]

    lgs = ls.build_lgs(dyck, 3)
    assert ls.vertex_counts(lgs) == [1, 2, 4, 8]
    report = json.loads(ls.validate(lgs))
    assert all(report[k]["status"] == "pass" for k in ("left_resolving", "local_property", "iota_surjective"))
    groups = json.loads(ls.groups(lgs))
    assert groups["k0"]["stabilization"]["torsion"] == "Z/2"

    abc = ["1", "2", "3"]
    assert ls.xi(abc, "1", "0", "1 1 2 1 2 1 3 2 1") == "0 1 0 1 2 0 1 2 0 1 3 2 0 1"
    assert ls.eta(abc, "1", "0", "0 1 0 1 2 0 1 2 0 1 3 2 0 1") == "1 1 2 1 2 1 3 2 1"
    assert ls.phi(abc, "1", "0", "1 1 2 1 3 2 1 3 1") == "1 0 1 2 0 1 3 2 0 1 3 0 1"
    assert ls.psi(abc, "1", "0", "1 0 1 2 0 1 3 2 0 1 3 0 1") == "1 1 2 1 3 2 1 3 1"
    try:
        ls.eta(abc, "1", "0", "1 2")
    except ls.LambdaSyncError:
        pass
    else:
        raise AssertionError("eta accepted a word starting with the expanded symbol")

    cover = json.loads(ls.fischer_cover("golden-mean"))
    assert len(cover["states"]) == 2
    rows = json.loads(ls.invariance_report("golden-mean", 4))
    assert rows and all(r["verdict"] != "Mismatch" for r in rows)
    expanded = json.loads(ls.expand("golden-mean", "b", "z"))
    assert expanded["kind"] == "expanded" and expanded["fresh"] == "z"
    print("smoke test passed")


if __name__ == "__main__":
    main()
