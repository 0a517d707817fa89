import math
import random

import pytest

import dfdetect as d


def test_class_weight():
    assert d.class_weight(42690, 219470) == pytest.approx(219470 / 42690, rel=1e-15)
    with pytest.raises(d.Error) as info:
        d.class_weight(3, 0)
    assert info.value.code == "data.single_class"
    assert isinstance(info.value, ValueError)


def test_auc_eer_small_examples():
    assert d.auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert d.auc([0.5, 0.5], [0, 1]) == 0.5
    assert d.eer([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 0.0
    roc = d.roc_curve([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    assert roc[0][:2] == (0.0, 0.0) and roc[-1][:2] == (1.0, 1.0)


def test_auc_matches_pairwise_count():
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randint(2, 60)
        labels = [rng.randint(0, 1) for _ in range(n)]
        labels[0], labels[1] = 0, 1
        scores = [rng.randint(0, 9) / 9 for _ in range(n)]
        pos = [s for s, y in zip(scores, labels) if y == 1]
        neg = [s for s, y in zip(scores, labels) if y == 0]
        wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
        assert d.auc(scores, labels) == pytest.approx(wins / (len(pos) * len(neg)), abs=1e-12)


def test_weighted_bce():
    # inputs are probabilities
    assert d.weighted_bce([0.5], [1]) == pytest.approx(math.log(2.0), rel=1e-15)
    assert d.weighted_bce([0.5], [0], 2.0) == pytest.approx(2.0 * math.log(2.0), rel=1e-15)


def test_evaluate_report():
    r = d.evaluate([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0], 0.5)
    # report fields are percentages
    assert r.auc == 100.0 and r.eer == 0.0 and r.accuracy == 100.0
    assert r.confusion == {"tp": 2, "fp": 0, "tn": 2, "fn": 0}
    assert r.table_row("toy").startswith("toy & ")
    assert "auc" in r.render().lower()


def test_model_forward_and_checkpoint(tmp_path):
    m = d.build_model("toy_mlp", [1, 1, 8], embed_dim=16, head_hidden=8, seed=3, model_id="m0")
    assert m.model_id == "m0" and m.input_size == 8
    assert m.count_params() > m.count_params(trainable_only=True) or m.count_params() > 0
    x = [[0.1 * i for i in range(8)], [0.0] * 8]
    y = m.forward(x)
    assert len(y) == 2 and all(math.isfinite(v) for v in y)
    m.save(tmp_path / "m.ckpt.json")
    back = d.load_checkpoint(tmp_path / "m.ckpt.json")
    assert back.forward(x) == y
    with pytest.raises(d.Error) as info:
        m.forward([[0.0] * 3])
    assert info.value.code == "model.shape_mismatch"


def test_fuse_and_classify():
    members = [
        ("a", [("s1", 0.9), ("s2", 0.2)]),
        ("b", [("s2", 0.4), ("s1", 0.7)]),
    ]
    ids, rows = d.fuse(members)
    assert ids == ["a", "b"]
    fused = dict(rows)
    assert fused["s1"] == pytest.approx(0.8, abs=1e-15)
    assert fused["s2"] == pytest.approx(0.3, abs=1e-15)
    assert d.classify(rows, 0.5) == {"s1": 1, "s2": 0}
    with pytest.raises(d.Error):
        d.fuse([("a", [("s1", 0.9)]), ("b", [("s9", 0.1)])])


def test_synth_manifest_round_trip(tmp_path):
    man = d.synth_dataset(seed=7, n_real=30, n_fake=20, dim=4)
    assert len(man) == 50
    assert man.count("train") + man.count("val") + man.count("test") == 50
    man.save(tmp_path / "manifest.txt")
    again = d.load_manifest(tmp_path / "manifest.txt")
    assert again.records() == man.records()
    assert len(again.records()[0]["inline"]) == 4
