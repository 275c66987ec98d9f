"""HTTP service: every endpoint, error mapping, and replayability."""

import pytest
from fastapi.testclient import TestClient

from lrlab import demos
from lrlab.service import app

client = TestClient(app)


def post(path, **body):
    resp = client.post(path, json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()


def test_info_lists_endpoints():
    data = client.get("/").json()
    assert data["service"] == "lrlab"
    assert "/check" in data["endpoints"] and "/distinguish" in data["endpoints"]


def test_check_endpoint():
    out = post("/check", source=demos.SELF_APP_SRC)
    assert out["ok"] and out["exit_code"] == 0
    assert out["data"]["type"] == "(mu a. a -> a) -> (mu a. a -> a)"


def test_check_type_error_maps_to_exit_3():
    out = post("/check", source="if 1 then true else false")
    assert not out["ok"] and out["exit_code"] == 3
    assert "if" in out["error"]


def test_parse_error_maps_to_exit_3():
    out = post("/check", source="if true then")
    assert not out["ok"] and out["exit_code"] == 3


def test_eval_endpoint():
    out = post("/eval", source="(\\x:Int. x = 0) 1", fuel=100)
    assert out["exit_code"] == 0 and out["data"]["value"] == "false"


def test_eval_divergent_reports_cycle():
    out = post("/eval", source=demos.KNOT_SRC, fuel=2000)
    assert out["exit_code"] == 2
    assert "cycle" in out["lines"][1]


def test_trace_endpoint():
    out = post("/trace", source="!(ref true)", fuel=100)
    assert out["lines"][1].startswith("STEP 1 RULE alloc")


def test_sn_endpoint():
    out = post("/sn", source="(\\x:Bool. x) true", fuel=500)
    assert out["exit_code"] == 0
    assert out["lines"][1].startswith("VERDICT Proven")


def test_safe_endpoint():
    out = post("/safe", source=demos.KNOT_SRC, fuel=3000)
    assert out["exit_code"] == 2 and "cycle" in out["human"]


def test_member_endpoint_plain_and_step_indexed():
    out = post("/member", source="<true, 2>", type="Bool * Int", fuel=200)
    assert out["exit_code"] == 0 and out["data"]["model"] == "plain"
    out = post("/member", source="fold true as mu a. Bool", type="mu a. Bool",
               k=5, fuel=200)
    assert out["exit_code"] == 0 and out["data"]["model"] == "step-indexed"


def test_member_with_world():
    out = post("/member", source="ref true", type="Ref Bool",
               world="W { }", k=10, fuel=200)
    assert out["exit_code"] == 0


def test_member_rejects_quantified_types():
    out = post("/member", source="/\\a. \\x:a. x", type="all a. a -> a")
    assert out["exit_code"] == 3 and "equiv" in out["error"]


def test_equiv_endpoint_packages():
    out = post("/equiv", left=demos.PACKAGE_INT_SRC, right=demos.PACKAGE_BOOL_SRC,
               rel="{(1, true)}", fuel=1000)
    assert out["exit_code"] == 0
    assert out["lines"][1].startswith("VERDICT Proven")


def test_equiv_type_mismatch_is_usage_error():
    out = post("/equiv", left="true", right="1")
    assert out["exit_code"] == 3


def test_distinguish_endpoint():
    out = post("/distinguish", left=demos.PACKAGE_INT_SRC,
               right=demos.PACKAGE_INT_VARIANT_SRC, ctx_size=8, fuel=1000)
    assert out["exit_code"] == 1
    assert out["lines"][1].startswith("DISTINGUISHED size=")
    out = post("/distinguish", left="true", right="true", ctx_size=3, fuel=100)
    assert out["exit_code"] == 2
    assert out["lines"][1] == "NO-CONTEXT bound=3 fuel=100"


def test_free_thm_endpoint():
    out = post("/free-thm", kind="identity", source="/\\a. \\x:a. x",
               count=10, fuel=500)
    assert out["exit_code"] == 0
    assert "SUMMARY proven=10 disproven=0 bounded=0" in out["lines"][-1]


def test_free_thm_wrong_shape_is_usage_error():
    out = post("/free-thm", kind="identity", source="true", count=1)
    assert out["exit_code"] == 3


@pytest.mark.parametrize("name,code", [("omega", 2), ("landin", 2), ("packages", 0)])
def test_demo_endpoints(name, code):
    out = post("/demo", name=name, fuel=10_000)
    assert out["exit_code"] == code, out


def test_demo_landin_contains_trace_and_cycle():
    out = post("/demo", name="landin", fuel=10_000)
    assert any(line.startswith("STEP 1 RULE alloc") for line in out["lines"])
    assert "cycle of period 2" in out["human"]


def test_gen_endpoint():
    out = post("/gen", level="stlc", type="Bool -> Bool", size=10, count=3, seed=5)
    assert out["exit_code"] == 0
    assert len([l for l in out["lines"] if l.startswith("GEN ")]) == 3


def test_replayability_byte_identical():
    body = dict(left=demos.PACKAGE_INT_SRC, right=demos.PACKAGE_BOOL_SRC,
                rel="{(1, true)}", fuel=500, seed=42)
    first = post("/equiv", **body)
    second = post("/equiv", **body)
    assert first["lines"] == second["lines"]
    g1 = post("/gen", level="full", size=15, count=5, seed=7)
    g2 = post("/gen", level="full", size=15, count=5, seed=7)
    assert g1["lines"] == g2["lines"]
    g3 = post("/gen", level="full", size=15, count=5, seed=8)
    assert g1["lines"] != g3["lines"]
