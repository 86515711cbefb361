import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funqueplus.evaluation import (Database, FeatureBucket, cefs, cgfs, content_key, cross_db_srocc,
                                   feature_buckets, fisher_mean, read_cache_meta, read_feature_cache, srocc,
                                   write_feature_cache)
from funqueplus.fusion import predict_many, train


def test_srocc_cases():
    x = [1.0, 2.0, 3.0, 4.0]
    assert srocc(x, x) == pytest.approx(1.0)
    assert srocc(x[::-1], x) == pytest.approx(-1.0)
    r = np.array([1, 2.5, 2.5, 4]) - 2.5
    m = np.array([1, 2, 3, 4]) - 2.5
    assert srocc([1, 2, 2, 4], x) == pytest.approx((r * m).sum() / math.sqrt((r * r).sum() * (m * m).sum()))
    assert srocc([5, 5, 5], [1, 2, 3]) == 0.0
    with pytest.raises(ValueError):
        srocc([1, 2], [1, 2])


def test_fisher_mean():
    assert fisher_mean([0.5, 0.5]) == 0.5
    assert fisher_mean([0.2, 0.8]) == pytest.approx(0.5722, abs=1e-4)
    assert fisher_mean([1.0, 1.0]) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        fisher_mean([])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 0.99), min_size=1, max_size=8))
def test_fisher_at_least_arithmetic_for_positive(rs):
    assert fisher_mean(rs) >= np.mean(rs) - 1e-12


def _db(name, rng, n=40, noise=0.0):
    q = rng.uniform(0, 1, n)
    feats = {"good": q + rng.normal(0, noise, n), "junk": rng.normal(size=n)}
    return Database(name, feats, 5 * q)


def test_cross_db_perfect_feature(rng):
    dbs = [_db("a", rng), _db("b", rng)]
    res = cross_db_srocc(["good"], dbs)
    assert res.matrix == {("a", "b"): pytest.approx(1.0), ("b", "a"): pytest.approx(1.0)}
    assert res.overall == pytest.approx(1.0)


def test_cross_db_pairs_match_single_pair_oracle(rng):
    dbs = [_db(n, rng, noise=0.2) for n in "abc"]
    res = cross_db_srocc(["good", "junk"], dbs)
    assert len(res.matrix) == 6 and res.complete
    for tr in dbs:
        for te in dbs:
            if tr is te:
                continue
            model = train(tr.vectors(["good", "junk"]), tr.mos, feature_ids=["good", "junk"])
            want = srocc(predict_many(model, te.vectors(["good", "junk"])), te.mos)
            assert res.matrix[(tr.name, te.name)] == pytest.approx(want, abs=1e-12)
    assert res.test_average("a") == pytest.approx(fisher_mean([res.matrix[("b", "a")], res.matrix[("c", "a")]]))


def test_cross_db_records_failed_training(rng):
    good = _db("a", rng)
    flat = Database("flat", {"good": np.ones(10), "junk": np.ones(10)}, np.arange(10.0))
    res = cross_db_srocc(["good"], [good, flat])
    assert not res.complete and ("flat", "a") in res.failed
    assert ("a", "flat") in res.matrix


def test_feature_buckets():
    b = feature_buckets(2, ("Y", "Cb"))
    assert [x.name for x in b[:5]] == ["Y-SSIM", "Y-Info", "Y-DLM", "Y-Sharpness", "Y-MAD"]
    info = b[1]
    assert ("Y-SRRED-HV@2", "Y-TRRED-HV@2") in info.groups
    assert ("Y-SRRED-A@1", "Y-SRRED-A@2", "Y-TRRED-A@1", "Y-TRRED-A@2") in info.groups
    assert b[5].name == "Cb-SSIM"
    assert len(feature_buckets(1)[2].groups) == 1


def test_cgfs_single_bucket(rng):
    dbs = [_db(n, rng, noise=0.1) for n in "ab"]
    res = cgfs([FeatureBucket("only", (("good",),))], dbs)
    assert res.features == ["good"] and len(res.audit) == 1 and res.passes == 1


def test_cgfs_first_pass_always_selects(rng):
    dbs = [_db(n, rng) for n in "ab"]
    res = cgfs([FeatureBucket("j", (("junk",),))], dbs)
    assert res.features == ["junk"]


def test_cgfs_matches_cefs_and_skips_noise(rng):
    dbs = [_db(n, rng, noise=0.3) for n in "abc"]
    for d in dbs:
        d.features["good2"] = d.mos / 5 + rng.normal(0, 0.3, len(d.mos))
    buckets = [FeatureBucket("g", (("good",), ("junk",))), FeatureBucket("h", (("good2",), ("junk",)))]
    greedy, oracle = cgfs(buckets, dbs), cefs(buckets, dbs)
    assert set(greedy.features) == set(oracle.features) == {"good", "good2"}
    assert greedy.score == pytest.approx(oracle.score)


def test_feature_cache_round_trip(tmp_path):
    rows = [{"ref_path": "r.yuv", "dis_path": "d1.yuv", "mos": 3.5, "error": "", "features": {"x": 0.1, "y": 1 / 3}},
            {"ref_path": "r.yuv", "dis_path": "d2.yuv", "mos": 1.0, "error": "DecodeError: bad", "features": {}},
            {"ref_path": "r.yuv", "dis_path": "d3.yuv", "mos": 2.0, "error": "", "features": {"x": 0.2, "y": 2.0}}]
    p = tmp_path / "db1.csv"
    write_feature_cache(p, rows, ["x", "y"], {"levels": 2})
    db = read_feature_cache(p)
    assert db.name == "db1" and db.videos == ["d1.yuv", "d3.yuv"]
    assert db.features["y"][0] == 1 / 3
    assert read_cache_meta(p) == {"levels": 2}


def test_content_key(tmp_path):
    a = tmp_path / "a.bin"
    a.write_bytes(b"abc")
    k1 = content_key([a], {"levels": 2})
    assert k1 == content_key([a], {"levels": 2})
    assert k1 != content_key([a], {"levels": 3})
    a.write_bytes(b"abd")
    assert k1 != content_key([a], {"levels": 2})
