import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhvc.errors import DimensionMismatch
from mhvc.flow import FlowField, constant_flow, zero_flow
from mhvc.frameio import frame_from_stack
from mhvc.fusion import (
    DEFAULT_FUSION,
    GATE_ONE,
    GateField,
    build_pyramid,
    fuse,
    predict_gates,
    predict_mask,
    smooth_gate,
    synthesize_predictor,
)


def _pyr(rng, side=16, lo=0, hi=256):
    return build_pyramid(rng.integers(lo, hi, (3, side, side)).astype(np.int32))


def _gates(rng, side=16):
    return GateField(tuple(
        rng.integers(0, GATE_ONE + 1, (side // s, side // s)).astype(np.int32)
        for s in (1, 2, 4)))


def _const_gates(side, value):
    return GateField(tuple(np.full((side // s, side // s), value, np.int32) for s in (1, 2, 4)))


class TestPyramid:
    def test_constant_frame_constant_everywhere(self):
        p = build_pyramid(np.full((3, 16, 16), 93, np.int32))
        assert all(np.all(lv == 93) for lv in p.levels)

    def test_mean_rounds_half_up(self):
        tile = np.zeros((3, 8, 8), np.int32)
        tile[:, 1::2, :] = 255  # 2x2 blocks average 127.5
        p = build_pyramid(tile)
        assert np.all(p.levels[1] == 128)

    def test_divisibility(self):
        with pytest.raises(DimensionMismatch):
            build_pyramid(np.zeros((3, 18, 16), np.int32))

    def test_level_shapes(self, rng):
        p = _pyr(rng, 32)
        assert [lv.shape for lv in p.levels] == [(3, 32, 32), (3, 16, 16), (3, 8, 8)]


class TestGates:
    def test_equal_references_gate_one_exact(self, rng):
        p = _pyr(rng)
        g = predict_gates(p, p)
        assert all(np.all(lv == GATE_ONE) for lv in g.levels)

    def test_large_disagreement_hits_floor(self, rng):
        key = build_pyramid(np.zeros((3, 16, 16), np.int32))
        pre = build_pyramid(np.full((3, 16, 16), 255, np.int32))
        g = predict_gates(key, pre)
        floor = round(DEFAULT_FUSION.gate_floor * GATE_ONE)
        assert all(np.all(lv == floor) for lv in g.levels)

    def test_strictly_decreasing_in_difference(self):
        """Uniform difference d makes the windowed mean exactly d; the gate
        must strictly decrease as d grows until it saturates at the floor."""
        base = build_pyramid(np.full((3, 16, 16), 0, np.int32))
        prev = None
        for d in range(0, 129, 8):
            pre = build_pyramid(np.full((3, 16, 16), d, np.int32))
            g = int(predict_gates(base, pre).levels[0][8, 8])
            want = round((1.0 - (1.0 - 0.05) * (1.0 - np.exp(-d / 8.0))) * GATE_ONE)
            assert g == want
            if prev is not None and prev > 13:
                assert g < prev
            prev = g

    def test_bounds(self, rng):
        for _ in range(20):
            g = predict_gates(_pyr(rng), _pyr(rng))
            for lv in g.levels:
                assert lv.min() >= 0 and lv.max() <= GATE_ONE


class TestFuse:
    def test_gate_one_returns_key_exactly(self, rng):
        k, p = _pyr(rng), _pyr(rng)
        out = fuse(k, p, _const_gates(16, GATE_ONE))
        assert all(np.array_equal(a, b) for a, b in zip(out.levels, k.levels))

    def test_gate_zero_returns_pre_exactly(self, rng):
        k, p = _pyr(rng), _pyr(rng)
        out = fuse(k, p, _const_gates(16, 0))
        assert all(np.array_equal(a, b) for a, b in zip(out.levels, p.levels))

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_equal_inputs_invariant_any_gate(self, seed):
        r = np.random.default_rng(seed)
        k = _pyr(r)
        out = fuse(k, k, _gates(r))
        assert all(np.array_equal(a, b) for a, b in zip(out.levels, k.levels))

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_convex_envelope(self, seed):
        r = np.random.default_rng(seed)
        k, p, g = _pyr(r), _pyr(r), _gates(r)
        out = fuse(k, p, g)
        for o, a, b in zip(out.levels, k.levels, p.levels):
            assert np.all(o >= np.minimum(a, b))
            assert np.all(o <= np.maximum(a, b))

    def test_out_of_range_gate_rejected(self, rng):
        k, p = _pyr(rng), _pyr(rng)
        bad = GateField.__new__(GateField)  # bypass constructor check
        object.__setattr__(bad, "levels", tuple(
            np.full((16 // s, 16 // s), GATE_ONE + 1, np.int32) for s in (1, 2, 4)))
        with pytest.raises(ValueError):
            fuse(k, p, bad)


class TestSynthesize:
    def test_identical_references_reproduce_frame(self, rng):
        stack = rng.integers(0, 256, (3, 16, 16)).astype(np.int32)
        p = build_pyramid(stack)
        out = synthesize_predictor(p, p, _gates(rng))
        assert np.array_equal(np.stack(out.planes).astype(np.int32), stack)

    def test_gate_one_returns_warped_key(self, rng):
        k, p = _pyr(rng), _pyr(rng)
        out = synthesize_predictor(k, p, _const_gates(16, GATE_ONE))
        assert np.array_equal(np.stack(out.planes).astype(np.int32), k.levels[0])

    def test_disocclusion_strip_leans_on_short_term(self):
        base = np.full((3, 16, 16), 100, np.int32)
        key = base.copy()
        key[:, :, 6:10] = 250  # long-range reference is wrong on the strip
        kp, pp = build_pyramid(key), build_pyramid(base)
        gates = predict_gates(kp, pp)
        out = np.stack(synthesize_predictor(kp, pp, gates).planes).astype(float)
        strip = out[:, :, 6:10]
        assert np.abs(strip - 100).mean() < np.abs(strip - 250).mean()

    def test_smooth_gate_average(self):
        g = GateField((
            np.full((16, 16), 256, np.int32),
            np.full((8, 8), 128, np.int32),
            np.full((4, 4), 0, np.int32),
        ))
        # (256 + 128 + 0 + 1) // 3 = 128
        assert np.all(smooth_gate(g) == 128)


class TestMask:
    def test_constant_flow_full_mask(self, small_clip):
        m = predict_mask(small_clip[0], constant_flow(32, 32, 13, -7))
        assert np.all(m.m == GATE_ONE)

    def test_zero_flow_full_mask(self, small_clip):
        m = predict_mask(small_clip[0], zero_flow(32, 32))
        assert np.all(m.m == GATE_ONE)

    def test_step_flow_dips_to_floor(self, small_clip):
        u = np.zeros((32, 32), np.int32)
        u[:, 16:] = 16 * 4  # 16 px discontinuity
        m = predict_mask(small_clip[0], FlowField(u, np.zeros((32, 32), np.int32)))
        floor = round(DEFAULT_FUSION.mask_floor * GATE_ONE)
        assert m.m.min() == floor
        assert m.m[:, :8].min() == GATE_ONE  # far from the step

    def test_divergence_closed_form(self, small_clip):
        delta_px = 2
        u = np.zeros((32, 32), np.int32)
        u[:, 16:] = delta_px * 4
        m = predict_mask(small_clip[0], FlowField(u, np.zeros((32, 32), np.int32)))
        # central difference at the step columns: |du/dx| = delta/2
        want = round((1.0 - DEFAULT_FUSION.mask_beta * delta_px / 2) * GATE_ONE)
        assert int(m.m[5, 15]) == want
        assert int(m.m[5, 16]) == want

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_bounds(self, seed, small_clip):
        r = np.random.default_rng(seed)
        f = FlowField(r.integers(-64, 65, (32, 32)).astype(np.int32),
                      r.integers(-64, 65, (32, 32)).astype(np.int32))
        m = predict_mask(small_clip[0], f)
        assert m.m.min() >= 0 and m.m.max() <= GATE_ONE


class TestDebugDump:
    def test_gate_and_mask_write_grayscale_pngs(self, tmp_path, rng, small_clip):
        from PIL import Image

        from mhvc.fusion import dump_gray_png

        k, p = _pyr(rng, 32), _pyr(rng, 32)
        gates = predict_gates(k, p)
        m = predict_mask(small_clip[0], zero_flow(32, 32))
        dump_gray_png(gates.levels[0], tmp_path / "gate.png")
        dump_gray_png(m.m, tmp_path / "mask.png")
        img = Image.open(tmp_path / "mask.png")
        assert img.mode == "L" and img.size == (32, 32)
        assert np.asarray(img).max() == 255  # full mask maps to white


class TestDeterminism:
    def test_gates_and_mask_repeat_bit_identical(self, rng, small_clip):
        k, p = _pyr(rng, 32), _pyr(rng, 32)
        f = FlowField(rng.integers(-8, 9, (32, 32)).astype(np.int32),
                      rng.integers(-8, 9, (32, 32)).astype(np.int32))
        g1 = predict_gates(k, p)
        g2 = predict_gates(k, p)
        assert all(np.array_equal(a, b) for a, b in zip(g1.levels, g2.levels))
        m1 = predict_mask(small_clip[0], f)
        m2 = predict_mask(small_clip[0], f)
        assert np.array_equal(m1.m, m2.m)
