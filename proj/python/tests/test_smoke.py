import pytest

import chasm


def test_generate_is_deterministic():
    a = chasm.generate("random-homogeneous-formula", seed=5, n=4, d=8, s=60)
    assert a == chasm.generate("random-homogeneous-formula", seed=5, n=4, d=8, s=60)
    info = chasm.circuit_info(a)
    assert info["degree"] == 8
    assert info["is_tree"] and info["homogeneous"]
    assert info["size"] <= 60


@pytest.mark.parametrize("pass_name", ["general", "hom", "hom-alt"])
def test_depth4_preserves_the_polynomial(pass_name):
    src = chasm.generate("random-homogeneous-formula", seed=2, n=4, d=12, s=80)
    out, report = chasm.depth4(src, 4, pass_name, seed=1)
    assert report["max_bottom_degree"] <= 4
    assert report["audit"]["bad_cap_violations"] == 0
    assert chasm.verify(src, out)["verdict"] == "equal"


def test_shallow_pass():
    src = chasm.generate("shallow", seed=1, n=4, d=16, delta=2)
    out, report = chasm.depth4(src, 4, "shallow")
    assert chasm.verify(out, src, trials=16)["verdict"] == "equal"


def test_verify_reports_a_witness():
    a = chasm.generate("balanced-product", seed=1, d=8)
    b = chasm.generate("balanced-product", seed=2, d=8)
    v = chasm.verify(a, b, trials=4)
    assert v["verdict"] == "different"
    assert v["value_a"] != v["value_b"]
    assert len(v["witness"]) == 4


def test_vsbr_bounds():
    src = chasm.generate("random-homogeneous-formula", seed=3, n=4, d=8, s=60)
    out, stats = chasm.vsbr(src)
    assert stats["max_mul_fanin"] <= 5
    assert stats["halving_violations"] == 0
    assert stats["depth"] <= stats["depth_bound"]
    assert chasm.verify(src, out)["verdict"] == "equal"


def test_tensor_rank():
    t = chasm.generate("random-tensor", seed=4, shape=[2, 2, 2], p=3)
    assert 0 <= chasm.brute_force_rank(t) <= 4


def test_rank_certificate():
    src = chasm.generate("random-sml-formula", seed=1, n=2, d=4, s=40)
    dec, report = chasm.rank_certificate(src, mode="sml")
    assert report["exact"]
    assert dec.startswith("decomposition")


def test_errors_map_to_python_exceptions():
    src = chasm.generate("random-homogeneous-formula", seed=2, n=4, d=6, s=50)
    with pytest.raises(chasm.PreconditionError):
        chasm.depth4(src, 0)
    with pytest.raises(chasm.ParseError):
        chasm.circuit_info("circuit broken\ngate g0 = frob\n")
    assert issubclass(chasm.CapExceeded, RuntimeError)
