import json

import numpy as np
from PIL import Image

from lcsc.config import load_config
from lcsc.fixtures import (
    PALETTE,
    main,
    make_corpus,
    make_training_corpus,
    random_layout,
)
from lcsc.seeding import make_rng
from lcsc.store import read_records


def test_random_layout_produces_disjoint_instances():
    for seed in range(5):
        ann, labels, rgb = random_layout(
            make_rng("t", seed), 64, 64, list(PALETTE)
        )
        ids = [s["id"] for s in ann["segments"]]
        assert ids and ids == sorted(set(ids))
        assert set(np.unique(labels)) == set(ids) | {0}
        assert rgb.shape == (64, 64, 3)
        assert 0.0 <= rgb.min() and rgb.max() <= 1.0


def test_make_corpus_layout(tmp_path):
    root = make_corpus(tmp_path, n_samples=2, image_size=64, channels=8,
                       grid_size=4, seed=1)
    assert (root / "captions.json").exists()
    assert (root / "embeddings" / "manifest.json").exists()
    assert (root / "embeddings" / "blob.bin").exists()
    cfg = load_config(root / "config.json")
    assert cfg.channels == 8
    assert cfg.grid_size == 4
    assert cfg.buckets[0].target_height == 64
    dirs = sorted(p.name for p in (root / "samples").iterdir())
    assert dirs == ["sample-0000", "sample-0001"]
    for d in dirs:
        assert (root / "samples" / d / "annotation.json").exists()
        assert (root / "samples" / d / "labels.png").exists()
        assert (root / "samples" / d / "image.png").exists()


def test_label_png_round_trips_16_bit(tmp_path):
    from lcsc.fixtures import _write_label_png

    labels = np.zeros((8, 8), dtype=np.int32)
    labels[0, 0] = 60000
    labels[7, 7] = 3
    path = tmp_path / "labels.png"
    _write_label_png(path, labels)
    with Image.open(path) as img:
        back = np.asarray(img).astype(np.int32)
    assert np.array_equal(back, labels)


def test_corpus_annotations_match_labels(tmp_path):
    root = make_corpus(tmp_path, n_samples=3, image_size=64, channels=8,
                       grid_size=4, seed=5)
    captions = json.loads((root / "captions.json").read_text())
    for d in (root / "samples").iterdir():
        ann = json.loads((d / "annotation.json").read_text())
        with Image.open(d / "labels.png") as img:
            labels = np.asarray(img).astype(np.int32)
        declared = {s["id"] for s in ann["segments"]}
        assert set(np.unique(labels)) - {0} == declared
        assert all(s["caption_key"] in captions for s in ann["segments"])


def test_training_corpus_target_is_linear_readout(tmp_path):
    root = make_training_corpus(tmp_path, n_samples=3, seed=4)
    meta = json.loads((root / "corpus.json").read_text())
    assert meta["samples"] == 3
    files = sorted(root.glob("*.lcsc"))
    assert len(files) == 3
    for f in files:
        stored = read_records(f)
        lc = stored.records["lc"]
        target = stored.records["target_latent"]
        assert lc.shape == (8, 16, 16)
        assert target.shape == (4, 16, 16)
        # halving is exact in float32
        assert np.array_equal(target, 0.5 * lc[:4])
        wm = stored.records["weight_map"]
        assert wm.min() == 1.0 and wm.max() == 2.0


def test_fixtures_cli_entry(tmp_path, capsys):
    assert main(["--out", str(tmp_path / "r"), "--samples", "2"]) == 0
    assert len(list((tmp_path / "r" / "samples").iterdir())) == 2
    assert main(["--out", str(tmp_path / "c"), "--kind", "compiled",
                 "--samples", "2"]) == 0
    assert len(list((tmp_path / "c").glob("*.lcsc"))) == 2
