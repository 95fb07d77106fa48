import json
import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from patlab.core import Configuration, GeneratorInstance, build_generator_space, four_neighbor
from patlab.dataset import default_templates, generate_records, stroke_space
from patlab.errors import BadMagic, CountMismatch, TooManyGenerators, TruncatedFile
from patlab.formats import (
    ascii_render,
    read_bundle,
    read_heatmap_binary,
    read_heatmap_csv,
    read_idx,
    read_png,
    write_bundle,
    write_heatmap_binary,
    write_heatmap_csv,
    write_idx,
    write_png,
)
from patlab.growth import GrowthRule, growth_step


class TestIdx:
    def test_single_image_layout(self, tmp_path):
        path = tmp_path / "z.idx"
        write_idx(np.zeros((1, 28, 28), dtype=np.uint8), path)
        blob = path.read_bytes()
        assert len(blob) == 16 + 784
        assert blob[:4] == b"\x00\x00\x08\x03"
        assert struct.unpack(">III", blob[4:16]) == (1, 28, 28)

    def test_label_vector_magic(self, tmp_path):
        path = tmp_path / "l.idx"
        write_idx(np.arange(10, dtype=np.uint8), path)
        assert path.read_bytes()[:4] == b"\x00\x00\x08\x01"

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        arr = rng.integers(0, 256, size=(7, 5, 3)).astype(np.uint8)
        path = tmp_path / "t.idx"
        write_idx(arr, path)
        again = read_idx(path)
        assert again.dtype == np.uint8
        assert np.array_equal(arr, again)
        write_idx(again, tmp_path / "t2.idx")
        assert path.read_bytes() == (tmp_path / "t2.idx").read_bytes()

    @given(
        shape=st.lists(st.integers(1, 6), min_size=1, max_size=3),
        seed=st.integers(0, 10_000),
    )
    def test_round_trip_random_tensors(self, shape, seed):
        import tempfile

        arr = np.random.default_rng(seed).integers(0, 256, size=shape).astype(np.uint8)
        with tempfile.TemporaryDirectory() as tmp:
            path = f"{tmp}/h.idx"
            write_idx(arr, path)
            assert np.array_equal(read_idx(path), arr)

    def test_mnist_shaped_file_parses(self, tmp_path):
        # header laid out independently with struct, zero payload
        path = tmp_path / "mnist.idx"
        with open(path, "wb") as fh:
            fh.write(struct.pack(">IIII", 0x00000803, 10_000, 28, 28))
            fh.write(bytes(10_000 * 28 * 28))
        assert read_idx(path).shape == (10_000, 28, 28)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.idx"
        path.write_bytes(b"\x00\x00\x09\x03" + bytes(12))
        with pytest.raises(BadMagic):
            read_idx(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short.idx"
        path.write_bytes(struct.pack(">II", 0x00000801, 10) + bytes(4))
        with pytest.raises(TruncatedFile):
            read_idx(path)

    def test_wrong_dtype_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_idx(np.zeros((2, 2), dtype=np.int32), tmp_path / "x.idx")

    def test_rank_four_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_idx(np.zeros((1, 1, 1, 1), dtype=np.uint8), tmp_path / "x.idx")


class TestHeatmapFiles:
    def test_binary_layout(self, tmp_path):
        values = np.array([[1.5, -2.0, 0.25]])
        path = tmp_path / "h.hmap"
        write_heatmap_binary(values, path)
        blob = path.read_bytes()
        assert blob[:4] == b"HMAP"
        assert struct.unpack("<II", blob[4:12]) == (3, 1)
        assert np.array_equal(
            np.frombuffer(blob[12:], dtype="<f4"), values.astype("<f4").ravel()
        )

    def test_binary_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        values = rng.normal(size=(9, 4)).astype(np.float32).astype(np.float64)
        path = tmp_path / "h.hmap"
        write_heatmap_binary(values, path)
        assert np.array_equal(read_heatmap_binary(path), values)

    def test_binary_magic_and_truncation(self, tmp_path):
        path = tmp_path / "h.hmap"
        path.write_bytes(b"XMAP" + bytes(8))
        with pytest.raises(BadMagic):
            read_heatmap_binary(path)
        path.write_bytes(b"HMAP" + struct.pack("<II", 5, 5) + bytes(8))
        with pytest.raises(TruncatedFile):
            read_heatmap_binary(path)

    def test_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        values = rng.normal(size=(6, 7))
        path = tmp_path / "h.csv"
        write_heatmap_csv(values, path)
        assert np.array_equal(read_heatmap_csv(path), values)


class TestPng:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        image = rng.integers(0, 256, size=(28, 28)).astype(np.uint8) / 255.0
        path = tmp_path / "i.png"
        write_png(image, path)
        assert np.array_equal(read_png(path), np.rint(image * 255).astype(np.uint8))

    def test_png_and_idx_decode_identically(self, tmp_path):
        records = generate_records(stroke_space(), default_templates(), 21, 3)
        write_bundle(records, tmp_path / "bundle")
        images = read_idx(tmp_path / "bundle/images.idx")
        for i, rec in enumerate(records):
            write_png(rec.image, tmp_path / f"{i}.png")
            assert np.array_equal(read_png(tmp_path / f"{i}.png"), images[i])


class TestAsciiRender:
    def test_empty_lattice_blank_lines(self):
        text = ascii_render(Configuration.empty(3, 3))
        assert text.split("\n") == ["", "", ""]

    def test_worked_example_first_iteration(self):
        space = build_generator_space(
            [[0, 0, 0, 0], [1, 2, 3, 4], [1, 2, 3, 4], [1, 2, 3, 4]], four_neighbor()
        )
        seed = Configuration.empty(5, 5).with_generator((2, 2), GeneratorInstance(1, 1))
        iter1 = growth_step(space, seed, GrowthRule("revised"))
        assert ascii_render(iter1).split("\n") == ["", "  A", " BA", "  C", ""]

    def test_letters_extend_past_d(self):
        cfg = Configuration.empty(3, 1).with_generator((0, 1), GeneratorInstance(5, 1))
        assert ascii_render(cfg) == " E"

    def test_too_many_generators(self):
        cfg = Configuration.empty(2, 1).with_generator((0, 0), GeneratorInstance(27, 1))
        with pytest.raises(TooManyGenerators):
            ascii_render(cfg)

    def test_diamond_listing_shape(self):
        # reconstructed all-bonds-3 settings, grown for the listing's
        # radius of 4, alpha=2 diamond around the alpha=1 center
        from patlab.growth import GrowthRule, develop

        space = build_generator_space(
            [[0, 0, 0, 0], [3, 3, 3, 3], [3, 3, 3, 3]], four_neighbor()
        )
        seed = Configuration.empty(9, 9).with_generator((4, 4), GeneratorInstance(1, 1))
        grown, _ = develop(space, seed, GrowthRule("modified", step_cap=4), 100)
        assert ascii_render(grown) == "\n".join([
            "    B",
            "   BBB",
            "  BBBBB",
            " BBBBBBB",
            "BBBBABBBB",
            " BBBBBBB",
            "  BBBBB",
            "   BBB",
            "    B",
        ])


class TestBundle:
    def test_round_trip(self, tmp_path):
        records = generate_records(stroke_space(), default_templates(), 33, 12)
        write_bundle(records, tmp_path / "b")
        bundle = read_bundle(tmp_path / "b")
        assert len(bundle) == 12
        for i, rec in enumerate(records):
            assert np.array_equal(bundle.images[i], np.rint(rec.image * 255).astype(np.uint8))
            assert np.array_equal(bundle.y_g[i], rec.seed_alpha)
            assert np.array_equal(bundle.y_s[i], rec.seed_s)
            assert bundle.manifest[i]["steps"] == rec.steps
            assert bundle.manifest[i]["rng_seed"] == rec.rng_seed
        # empty sites store 0 in the y_s file but load back as s=1
        raw = read_idx(tmp_path / "b/y_s.idx")
        assert (raw[bundle.y_g == 0] == 0).all()
        assert (bundle.y_s[bundle.y_g == 0] == 1).all()

    def test_count_mismatch_detected(self, tmp_path):
        records = generate_records(stroke_space(), default_templates(), 33, 4)
        write_bundle(records, tmp_path / "b")
        manifest = (tmp_path / "b/manifest.jsonl").read_text().splitlines()
        (tmp_path / "b/manifest.jsonl").write_text("\n".join(manifest[:-1]) + "\n")
        with pytest.raises(CountMismatch):
            read_bundle(tmp_path / "b")

    def test_manifest_is_json_lines(self, tmp_path):
        records = generate_records(stroke_space(), default_templates(), 33, 2)
        write_bundle(records, tmp_path / "b")
        lines = (tmp_path / "b/manifest.jsonl").read_text().splitlines()
        docs = [json.loads(line) for line in lines]
        assert [d["index"] for d in docs] == [0, 1]
        assert all({"index", "class", "steps", "rng_seed"} == set(d) for d in docs)
