import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linekit.errors import MapFormatError, OutOfBoundsError
from linekit.geom import Homography
from linekit.maps import (
    TensorMap,
    bilinear_sample,
    bilinear_sample_many,
    decode_junction_map,
    normalize_descriptors,
    read_map,
    read_pgm,
    warp_map,
    write_map,
    write_pgm,
)


class TestBilinearSample:
    def test_constant_map(self):
        m = TensorMap.constant(4, 4, value=0.7)
        assert bilinear_sample(m, (1.3, 2.6))[0] == pytest.approx(0.7)

    def test_grid_point_exact(self):
        rng = np.random.default_rng(0)
        m = TensorMap(rng.random((5, 6, 3)).astype(np.float32))
        v = bilinear_sample(m, (4, 2))
        assert np.allclose(v, m.data[2, 4])

    def test_linear_precision_1x2(self):
        m = TensorMap(np.array([[0.0, 1.0]], dtype=np.float32))
        assert bilinear_sample(m, (0.5, 0))[0] == pytest.approx(0.5)

    def test_out_of_bounds(self):
        m = TensorMap.constant(4, 4)
        with pytest.raises(OutOfBoundsError):
            bilinear_sample(m, (3.001, 0.0))
        with pytest.raises(OutOfBoundsError):
            bilinear_sample(m, (0.0, -0.001))

    @given(st.floats(min_value=0, max_value=7), st.floats(min_value=0, max_value=5))
    @settings(max_examples=60)
    def test_affine_map_exact(self, x, y):
        # bilinear interpolation reproduces any affine function of (x, y)
        xs, ys = np.meshgrid(np.arange(8, dtype=np.float64), np.arange(6, dtype=np.float64))
        m = TensorMap((0.03 * xs + 0.07 * ys + 0.1).astype(np.float32))
        want = 0.03 * x + 0.07 * y + 0.1
        assert bilinear_sample(m, (x, y))[0] == pytest.approx(want, abs=1e-6)

    def test_top_edge_samples(self):
        m = TensorMap(np.arange(12, dtype=np.float32).reshape(3, 4))
        v = bilinear_sample(m, (3.0, 2.0))
        assert v[0] == pytest.approx(11.0)


class TestDecodeJunctionMap:
    def test_single_hot_cell(self):
        k = 19  # lands at x = 3, y = 2 inside the patch
        logits = np.zeros((2, 2, 65), dtype=np.float32)
        logits[1, 0, k] = 50.0
        out = decode_junction_map(TensorMap(logits))
        assert out.data.shape == (16, 16, 1)
        # hand-computed softmax of one +50 logit among 65 zeros
        expect = np.exp(50.0) / (np.exp(50.0) + 64.0)
        y, x = 8 + k // 8, 0 + k % 8
        assert out.data[y, x, 0] == pytest.approx(expect, rel=1e-6)
        rest = out.data.copy()
        rest[y, x, 0] = 0
        assert rest.max() < 1e-6

    def test_uniform_logits(self):
        out = decode_junction_map(TensorMap(np.zeros((1, 1, 65), dtype=np.float32)))
        assert np.allclose(out.data, 1.0 / 65.0, atol=1e-7)

    def test_dustbin_discarded(self):
        logits = np.zeros((1, 1, 65), dtype=np.float32)
        logits[0, 0, 64] = 50.0
        out = decode_junction_map(TensorMap(logits))
        assert out.data.max() < 1e-6

    def test_wrong_channel_count(self):
        with pytest.raises(ValueError):
            decode_junction_map(TensorMap.constant(2, 2, channels=64))

    def test_patch_sums_and_range(self):
        rng = np.random.default_rng(3)
        logits = rng.normal(size=(3, 4, 65)).astype(np.float32)
        out = decode_junction_map(TensorMap(logits))
        assert out.data.min() >= 0 and out.data.max() <= 1
        probs = np.exp(logits - logits.max(axis=2, keepdims=True))
        probs /= probs.sum(axis=2, keepdims=True)
        for i in range(3):
            for j in range(4):
                patch = out.data[8 * i : 8 * i + 8, 8 * j : 8 * j + 8, 0]
                assert patch.sum() == pytest.approx(1.0 - probs[i, j, 64], abs=1e-6)


class TestWarpMap:
    def test_identity(self):
        rng = np.random.default_rng(1)
        m = TensorMap(rng.random((6, 7, 2)).astype(np.float32))
        out, mask = warp_map(m, Homography.identity(), 6, 7)
        assert np.allclose(out.data, m.data, atol=1e-6)
        assert mask.all()

    def test_full_offscreen_translation(self):
        m = TensorMap.constant(5, 5, value=1.0)
        _, mask = warp_map(m, Homography.translation(5, 0), 5, 5)
        assert not mask.any()

    def test_unit_translation_matches_index_shift(self):
        rng = np.random.default_rng(2)
        m = TensorMap(rng.random((5, 8)).astype(np.float32))
        out, mask = warp_map(m, Homography.translation(1, 0), 5, 8)
        assert not mask[:, 0].any()
        assert mask[:, 1:].all()
        assert np.allclose(out.data[:, 1:, 0], m.data[:, :-1, 0], atol=1e-6)

    def test_round_trip_on_valid_region(self):
        rng = np.random.default_rng(4)
        m = TensorMap(rng.random((32, 32)).astype(np.float32))
        h = Homography.rotation(0.2, center=(15.5, 15.5))
        fwd, mask_f = warp_map(m, h, 32, 32)
        back, mask_b = warp_map(fwd, h.inverse(), 32, 32)
        both = mask_b & warp_map(TensorMap(mask_f.astype(np.float32)), h.inverse(), 32, 32)[0].data[:, :, 0] > 0.999
        # interior pixels that stayed valid through both warps
        assert both.sum() > 200
        assert np.abs(back.data[both] - m.data[both]).max() < 1e-1
        smooth = TensorMap((np.linspace(0, 1, 32)[None, :] * np.ones((32, 1))).astype(np.float32))
        fwd_s, _ = warp_map(smooth, h, 32, 32)
        back_s, _ = warp_map(fwd_s, h.inverse(), 32, 32)
        assert np.abs(back_s.data[both] - smooth.data[both]).max() < 1e-5


class TestLmapIO:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        m = TensorMap(rng.standard_normal((7, 3, 5)).astype(np.float32))
        p = tmp_path / "m.lmap"
        write_map(m, p)
        back = read_map(p)
        assert back.data.shape == m.data.shape
        assert np.array_equal(
            back.data.view(np.uint32), m.data.view(np.uint32)
        )

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "x.lmap"
        p.write_bytes(b"XXXX" + b"\x00" * 32)
        with pytest.raises(MapFormatError):
            read_map(p)

    def test_truncated_payload(self, tmp_path):
        m = TensorMap(np.zeros((2, 2, 1), dtype=np.float32))
        p = tmp_path / "t.lmap"
        write_map(m, p)
        raw = p.read_bytes()
        p.write_bytes(raw[:-4])  # drop one float
        with pytest.raises(MapFormatError):
            read_map(p)

    def test_non_finite_rejected(self, tmp_path):
        m = TensorMap(np.zeros((1, 2, 1), dtype=np.float32))
        p = tmp_path / "n.lmap"
        write_map(m, p)
        raw = bytearray(p.read_bytes())
        raw[18:22] = np.array([np.nan], dtype="<f4").tobytes()
        p.write_bytes(bytes(raw))
        with pytest.raises(MapFormatError):
            read_map(p)

    def test_fuzzed_round_trips(self, tmp_path):
        rng = np.random.default_rng(6)
        p = tmp_path / "f.lmap"
        for _ in range(50):
            h, w, c = rng.integers(1, 9, size=3)
            data = rng.standard_normal((h, w, c)).astype(np.float32) * 10.0 ** rng.integers(-20, 20)
            m = TensorMap(data)
            write_map(m, p)
            back = read_map(p)
            assert np.array_equal(back.data.view(np.uint32), m.data.view(np.uint32))


class TestPgmIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        g = (rng.integers(0, 256, size=(9, 5)) / 255.0).astype(np.float32)
        p = tmp_path / "g.pgm"
        write_pgm(TensorMap(g), p)
        back = read_pgm(p)
        assert np.allclose(back.data[:, :, 0], g, atol=1e-7)
        write_pgm(back, tmp_path / "g2.pgm")
        assert (tmp_path / "g2.pgm").read_bytes() == p.read_bytes()

    def test_bad_header(self, tmp_path):
        p = tmp_path / "bad.pgm"
        p.write_bytes(b"P3\n2 2\n255\n....")
        with pytest.raises(MapFormatError):
            read_pgm(p)


class TestNormalizeDescriptors:
    def test_unit_norm(self):
        rng = np.random.default_rng(8)
        m = normalize_descriptors(TensorMap(rng.standard_normal((4, 4, 16)).astype(np.float32)))
        norms = np.linalg.norm(m.data.astype(np.float64), axis=2)
        assert np.allclose(norms, 1.0, atol=1e-6)


def test_sample_many_matches_single():
    rng = np.random.default_rng(9)
    m = TensorMap(rng.random((6, 6, 2)).astype(np.float32))
    pts = rng.uniform(0, 5, size=(20, 2))
    batch = bilinear_sample_many(m, pts)
    for p, row in zip(pts, batch):
        assert np.allclose(bilinear_sample(m, p), row)
