import numpy as np
import pytest
from PIL import Image

from wavecomm.dataset import (
    bilinear_resize,
    decode_image,
    load_dataset,
    load_label_map,
    read_manifest_csv,
    write_manifest_csv,
    ManifestEntry,
)
from wavecomm.errors import WavecommInputError


def write_png(path, array, mode="L"):
    Image.fromarray(array, mode=mode).save(path)


@pytest.fixture
def image_dir(tmp_path):
    rng = np.random.default_rng(0)
    for name in ("a.png", "b.png", "c.png"):
        write_png(tmp_path / name, rng.integers(0, 256, (48, 40), dtype=np.uint8))
    return tmp_path


def test_directory_of_three_pngs(image_dir):
    records, report = load_dataset(image_dir, (64, 64))
    assert [r.id for r in records] == ["a.png", "b.png", "c.png"]
    assert all(r.pixels.shape == (64, 64) for r in records)
    assert report.ok()


def test_grayscale_at_target_size_is_unchanged(tmp_path):
    rng = np.random.default_rng(1)
    original = rng.integers(0, 256, (32, 32), dtype=np.uint8)
    write_png(tmp_path / "x.png", original)
    records, _ = load_dataset(tmp_path, (32, 32))
    np.testing.assert_array_equal(records[0].pixels, original.astype(np.float64))


def test_rgb_luma_conversion_matches_hand_weights(tmp_path):
    rgb = np.array(
        [[[255, 0, 0], [0, 255, 0]], [[0, 0, 255], [100, 150, 200]]], dtype=np.uint8
    )
    write_png(tmp_path / "c.png", rgb, mode="RGB")
    records, _ = load_dataset(tmp_path, (2, 2))
    expected = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    assert np.abs(records[0].pixels - expected).max() < 0.5


def test_corrupt_file_collected_not_fatal(image_dir):
    (image_dir / "broken.png").write_bytes(b"not a png at all")
    records, report = load_dataset(image_dir, (16, 16))
    assert len(records) == 3
    assert len(report.errors) == 1
    assert report.errors[0][0] == "broken.png"


def test_empty_directory_fatal(tmp_path):
    with pytest.raises(WavecommInputError):
        load_dataset(tmp_path, (16, 16))


def test_all_corrupt_fatal(tmp_path):
    (tmp_path / "bad.png").write_bytes(b"junk")
    with pytest.raises(WavecommInputError):
        load_dataset(tmp_path, (16, 16))


def test_ingestion_determinism(image_dir):
    a, _ = load_dataset(image_dir, (32, 32))
    b, _ = load_dataset(image_dir, (32, 32))
    assert [r.id for r in a] == [r.id for r in b]
    for ra, rb in zip(a, b):
        np.testing.assert_array_equal(ra.pixels, rb.pixels)


def test_resize_preserves_range():
    rng = np.random.default_rng(2)
    img = rng.uniform(0, 255, (37, 53))
    out = bilinear_resize(img, (64, 64))
    assert out.shape == (64, 64)
    assert out.min() >= img.min() - 1e-9
    assert out.max() <= img.max() + 1e-9


def test_manifest_roundtrip_and_labels(tmp_path, image_dir):
    entries = [
        ManifestEntry("a.png", "a.png", "covid"),
        ManifestEntry("b.png", "b.png", None),
        ManifestEntry("c.png", "c.png", "healthy"),
    ]
    manifest = tmp_path / "m.csv"
    write_manifest_csv(manifest, entries)
    back = read_manifest_csv(manifest)
    assert [(e.id, e.path, e.label) for e in back] == [
        ("a.png", "a.png", "covid"),
        ("b.png", "b.png", None),
        ("c.png", "c.png", "healthy"),
    ]
    assert load_label_map(manifest) == {"a.png": "covid", "c.png": "healthy"}


def test_manifest_driven_loading(image_dir):
    manifest = image_dir / "manifest.csv"
    write_manifest_csv(
        manifest,
        [ManifestEntry("first", "a.png", "x"), ManifestEntry("second", "b.png", "y")],
    )
    records, report = load_dataset(manifest, (16, 16))
    assert [r.id for r in records] == ["first", "second"]
    assert [r.label for r in records] == ["x", "y"]


def test_manifest_duplicate_ids_rejected(tmp_path):
    manifest = tmp_path / "m.csv"
    manifest.write_text("id,path,label\nsame,a.png,\nsame,b.png,\n")
    with pytest.raises(WavecommInputError):
        read_manifest_csv(manifest)


def test_manifest_bad_header_rejected(tmp_path):
    manifest = tmp_path / "m.csv"
    manifest.write_text("name,file\nx,a.png\n")
    with pytest.raises(WavecommInputError):
        read_manifest_csv(manifest)


def test_decode_rejects_garbage():
    with pytest.raises(Exception):
        decode_image(b"definitely not an image")


def test_channels_mode_keeps_planes(tmp_path):
    rgb = np.zeros((4, 4, 3), dtype=np.uint8)
    rgb[:, :, 0] = 200
    rgb[:, :, 1] = 90
    rgb[:, :, 2] = 30
    write_png(tmp_path / "c.png", rgb, mode="RGB")
    records, _ = load_dataset(tmp_path, (4, 4), color_mode="channels")
    pixels = records[0].pixels
    assert pixels.shape == (3, 4, 4)
    np.testing.assert_array_equal(pixels[0], np.full((4, 4), 200.0))
    np.testing.assert_array_equal(pixels[2], np.full((4, 4), 30.0))


def test_channels_mode_replicates_grayscale(image_dir):
    records, _ = load_dataset(image_dir, (8, 8), color_mode="channels")
    pixels = records[0].pixels
    assert pixels.shape == (3, 8, 8)
    np.testing.assert_array_equal(pixels[0], pixels[1])


def test_unknown_color_mode_rejected(image_dir):
    with pytest.raises(WavecommInputError):
        load_dataset(image_dir, (8, 8), color_mode="hsv")


def test_bad_target_size(image_dir):
    with pytest.raises(WavecommInputError):
        load_dataset(image_dir, (1, 64))
