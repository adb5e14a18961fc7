import numpy as np

from fedtopo.idx import parse_idx_images, parse_idx_labels, read_idx_bytes
from fedtopo.synth import generate, render_glyph, write_corpus


def test_generate_is_deterministic():
    a_images, a_labels = generate(50, seed=3)
    b_images, b_labels = generate(50, seed=3)
    assert np.array_equal(a_images, b_images)
    assert np.array_equal(a_labels, b_labels)
    c_images, _ = generate(50, seed=4)
    assert not np.array_equal(a_images, c_images)


def test_generate_shapes_and_types():
    images, labels = generate(23, seed=0)
    assert images.shape == (23, 28, 28)
    assert images.dtype == np.uint8
    assert labels.shape == (23,)
    assert labels.min() >= 0 and labels.max() <= 9


def test_labels_balanced():
    _, labels = generate(100, seed=1)
    counts = np.bincount(labels, minlength=10)
    assert counts.tolist() == [10] * 10


def test_images_vary_within_class():
    images, labels = generate(60, seed=2)
    sevens = images[labels == 7]
    assert len(sevens) >= 2
    assert not np.array_equal(sevens[0], sevens[1])
    assert images.std() > 10  # noise and strokes, not a constant field


def test_glyphs_pairwise_distinct():
    glyphs = [render_glyph(d) for d in range(10)]
    for i in range(10):
        assert glyphs[i].max() > 0
        for j in range(i + 1, 10):
            assert not np.array_equal(glyphs[i], glyphs[j]), (i, j)


def test_write_corpus_round_trips(tmp_path):
    paths = write_corpus(tmp_path, train_count=40, test_count=20, seed=5)
    assert set(paths) == {"train_images", "train_labels", "test_images", "test_labels"}
    images = parse_idx_images(read_idx_bytes(paths["train_images"]))
    labels = parse_idx_labels(read_idx_bytes(paths["train_labels"]))
    assert images.count == 40 and (images.rows, images.cols) == (28, 28)
    assert labels.count == 40
    test_images = parse_idx_images(read_idx_bytes(paths["test_images"]))
    assert test_images.count == 20
    # train and test draws must not repeat each other
    train_set = {images.pixels[i].tobytes() for i in range(40)}
    test_set = {test_images.pixels[i].tobytes() for i in range(20)}
    assert not train_set & test_set


def test_corpus_uses_standard_filenames(tmp_path):
    paths = write_corpus(tmp_path, train_count=10, test_count=10, seed=6)
    assert paths["train_images"].name == "train-images-idx3-ubyte"
    assert paths["test_labels"].name == "t10k-labels-idx1-ubyte"
