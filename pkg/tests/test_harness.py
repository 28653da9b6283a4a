import json

import numpy as np
import pytest

from starfc.config import RunConfig, config_from_dict, load_config
from starfc.fileio import SequenceFormatError, write_sequence_csv
from starfc.harness import (aggregate_curves, groom_sequences, load_dataset, load_sequences,
                            process_dataset, reweighted_global, run_experiment)
from starfc.metrics import FixationSequence
from starfc.synthetic import make_corpus


def _seq(n, bad_at=None, w=100):
    pts = [(float(i), float(i)) for i in range(n)]
    if bad_at is not None:
        pts[bad_at - 1] = (float(w + 3), 1.0)
    return FixationSequence(pts)


def test_groom_truncates():
    kept, stats = groom_sequences([_seq(15, bad_at=13)], 100, 100)
    assert len(kept) == 1 and len(kept[0]) == 12
    assert kept[0].points.tolist() == _seq(12).points.tolist()
    assert (stats.total, stats.kept, stats.truncated, stats.discarded) == (1, 1, 1, 0)


def test_groom_discards_short_prefix():
    kept, stats = groom_sequences([_seq(11, bad_at=5)], 100, 100)
    assert kept == []
    assert (stats.total, stats.kept, stats.truncated, stats.discarded) == (1, 0, 1, 1)


def test_groom_short_and_nan():
    nan = FixationSequence([(1.0, 1.0)] * 12 + [(np.nan, 3.0)])
    kept, stats = groom_sequences([_seq(9), nan], 100, 100)
    assert [len(s) for s in kept] == [12]
    assert stats.discarded == 1 and stats.truncated == 1


def test_groom_never_reorders_or_leaves_bounds():
    rng = np.random.default_rng(0)
    raw = [FixationSequence(rng.uniform(-10, 110, (rng.integers(1, 30), 2))) for _ in range(200)]
    kept, stats = groom_sequences(raw, 100, 100, min_len=3)
    assert stats.kept + stats.discarded == stats.total == 200
    for s in kept:
        assert np.all(s.points >= 0) and np.all(s.points < 100)
    originals = [r.points for r in raw]
    for s in kept:
        assert any(len(o) >= len(s) and np.array_equal(o[:len(s)], s.points) for o in originals)


def test_load_sequences_csv(tmp_path):
    f = tmp_path / "img7.csv"
    f.write_text("observer,index,x,y\n" + "".join(f"a,{i},{i},{2 * i}\n" for i in range(10)))
    seqs = load_sequences(f)
    assert len(seqs) == 1 and len(seqs[0]) == 10
    assert seqs[0].image_id == "img7" and seqs[0].source == "a"


def test_load_sequences_groups_and_orders(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("observer,index,x,y\nb,1,5,5\na,0,1,1\nb,0,4,4\na,1,2,2\n")
    seqs = load_sequences(f)
    assert [s.source for s in seqs] == ["b", "a"]
    assert seqs[0].tolist() == [(4, 4), (5, 5)]


def test_load_sequences_errors(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    with pytest.raises(SequenceFormatError):
        load_sequences(empty)
    bad = tmp_path / "b.csv"
    bad.write_text("observer,index,x,y\na,0,1,1\na,1,oops,2\n")
    with pytest.raises(SequenceFormatError, match=":3:"):
        load_sequences(bad)


def test_load_sequences_directory(tmp_path):
    d = tmp_path / "img"
    d.mkdir()
    write_sequence_csv(d / "o1.csv", {"s": [(1, 1), (2, 2)]})
    write_sequence_csv(d / "o2.csv", {"s": [(3, 3)]})
    seqs = load_sequences(d)
    assert [s.source for s in seqs] == ["s", "o2:s"]
    assert all(s.image_id == "img" for s in seqs)


def test_config_parsing(tmp_path):
    toml = tmp_path / "a.toml"
    toml.write_text('fov_deg = 40\nfusion = "mca"\nmodels = ["starfc", "center"]\n'
                    '[central]\nbackend = "external"\nmap_dir = "maps"\n[ior]\nstrength = 2.0\n'
                    '[baselines]\nsr = "builtin:spectral_residual"\n')
    cfg = load_config(toml)
    assert cfg.fov_deg == 40 and cfg.ior_strength == 2.0
    assert cfg.central.kind == "external" and cfg.central.params == {"map_dir": "maps"}
    assert cfg.baselines == {"sr": "builtin:spectral_residual"}
    simple = tmp_path / "b.cfg"
    simple.write_text("dotpitch_m = 0.0005\nperipheral.backend = center_surround\nn_fixations = 7\n"
                      "acuity.rod_weight = 0\nbaselines.lds = maps/lds  # comment\n")
    cfg = load_config(simple)
    assert cfg.dotpitch_m == 0.0005 and cfg.n_fixations == 7
    assert cfg.peripheral.kind == "center_surround"
    assert cfg.acuity_params().rod_weight == 0
    assert cfg.baselines == {"lds": "maps/lds"}
    assert cfg.geometry(100, 50).dotpitch == 0.0005
    with pytest.raises(ValueError):
        config_from_dict({"bogus": 1})


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        RunConfig(n_fixations=0).validate(check_paths=False)
    with pytest.raises(FileNotFoundError):
        RunConfig(dataset_root=str(tmp_path / "missing")).validate()


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    return make_corpus(tmp_path_factory.mktemp("corpus"), n_images=6, n_categories=3, width=96, height=72)


def test_dataset_layout(corpus):
    ds = load_dataset(corpus)
    assert len(ds.images) == 6
    assert ds.categories == ["cat0", "cat1", "cat2"]
    assert all(e.sequence_path is not None for e in ds.images)


def test_category_reweighting(corpus):
    cfg = RunConfig(models=["starfc", "center"], dataset_root=str(corpus))
    results = process_dataset(load_dataset(corpus), cfg)
    global_, per_cat, counts = aggregate_curves(results)
    for key, curve in global_.items():
        assert reweighted_global(per_cat, counts, key) == pytest.approx(curve, abs=1e-9)


def test_missing_humans_skipped(tmp_path, corpus, caplog):
    import shutil
    root = tmp_path / "ds"
    shutil.copytree(corpus, root)
    (root / "cat0" / "000.csv").unlink()
    (root / "cat1" / "001.csv").write_text("garbage\n")
    cfg = RunConfig(models=["center"], dataset_root=str(root))
    summary = run_experiment(cfg, tmp_path / "out")
    assert summary["total"] == 6 and summary["processed"] + summary["skipped"] == 6
    assert summary["skipped"] == 2
    assert "cat0/000" in summary["skipped_images"]


def test_report_files(tmp_path, corpus):
    cfg = RunConfig(models=["starfc", "sr", "center"], baselines={"sr": "builtin:spectral_residual"},
                    dataset_root=str(corpus), full_curves=True)
    summary = run_experiment(cfg, tmp_path / "out")
    out = tmp_path / "out"
    for rel in ["summary.json", "grooming_stats.json", "scores.json", "curves/ED.csv", "curves/FD.csv",
                "curves/HD.csv", "curves_full/ED.csv", "hist/amplitude.csv", "hist/spatial.csv",
                "sequences/cat0/000.csv"]:
        assert (out / rel).is_file(), rel
    table = json.loads((out / "summary.json").read_text())["table"]
    assert set(table) == {"human", "starfc", "sr", "center"}
    assert set(table["starfc"]) == {"AUC ED", "AUC HD", "AUC FD", "MSE"}
    assert table["human"]["MSE"] == 0
    stats = json.loads((out / "grooming_stats.json").read_text())
    assert stats["total"] == stats["kept"] + stats["discarded"]
    full = (out / "curves_full" / "ED.csv").read_text().splitlines()
    assert max(int(line.split(",")[2]) for line in full[1:]) == 10
    seqs = load_sequences(out / "sequences" / "cat0" / "000.csv")
    assert [s.source for s in seqs] == ["starfc", "sr", "center"]
    assert all(len(s) == 10 for s in seqs)


def test_six_significant_digits(tmp_path, corpus):
    run_experiment(RunConfig(models=["center"], dataset_root=str(corpus)), tmp_path / "o")
    for line in (tmp_path / "o" / "curves" / "ED.csv").read_text().splitlines()[1:]:
        value = line.split(",")[3]
        assert len(value.replace(".", "").replace("-", "").lstrip("0")) <= 6


def test_drop_first(tmp_path, corpus):
    cfg = RunConfig(models=["center"], dataset_root=str(corpus), drop_first=True)
    results = process_dataset(load_dataset(corpus), cfg)
    ok = [r for r in results if r.status == "ok"]
    # humans start at the center, so dropping it changes their first fixation
    assert all(not np.array_equal(h.points[0], (47, 35)) for r in ok for h in r.humans)
