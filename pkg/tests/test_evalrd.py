import numpy as np
import pytest

from conftest import quick_config
from mhvc.evalrd import (
    RdCurve,
    bd_rate,
    compute_bpp,
    psnr_profile,
    rd_sweep,
    write_sweep_csv,
)
from mhvc.scheduler import FrameStats
from mhvc.synthetic import moving_texture_clip

ANCHOR = RdCurve("anchor", ((0.05, 30.0), (0.10, 33.0), (0.20, 36.0), (0.40, 39.0)))


def _stats(psnrs, types=None):
    types = types or ["P"] * len(psnrs)
    return [FrameStats(i, t, "q1", 1000, p, None, "")
            for i, (p, t) in enumerate(zip(psnrs, types))]


class TestBpp:
    def test_reference_value(self):
        assert compute_bpp(19906560, 1920, 1080, 96) == pytest.approx(0.1, abs=0)

    def test_zero_bits(self):
        assert compute_bpp(0, 64, 64, 10) == 0.0

    def test_doubling_frames_halves(self):
        one = compute_bpp(8000, 64, 64, 5)
        two = compute_bpp(8000, 64, 64, 10)
        assert two == pytest.approx(one / 2, abs=0)

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            compute_bpp(100, 0, 64, 10)


class TestBdRate:
    def test_identical_curves_zero(self):
        assert bd_rate(ANCHOR, ANCHOR) == 0.0

    def test_doubled_rate_plus_hundred(self):
        doubled = RdCurve("d", tuple((2 * b, p) for b, p in ANCHOR.points))
        assert bd_rate(doubled, ANCHOR) == pytest.approx(100.0, abs=0.05)

    def test_halved_rate_minus_fifty(self):
        halved = RdCurve("h", tuple((b / 2, p) for b, p in ANCHOR.points))
        assert bd_rate(halved, ANCHOR) == pytest.approx(-50.0, abs=0.05)

    def test_multiplicative_antisymmetry(self):
        other = RdCurve("o", ((0.06, 30.5), (0.11, 33.2), (0.19, 35.9), (0.37, 39.3)))
        f = bd_rate(other, ANCHOR)
        b = bd_rate(ANCHOR, other)
        assert (1 + f / 100) * (1 + b / 100) == pytest.approx(1.0, abs=1e-6)

    def test_matches_dense_integration_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            c1 = RdCurve("a", tuple(zip(np.sort(rng.uniform(0.02, 1.0, 4)),
                                        np.sort(rng.uniform(28, 42, 4)))))
            c2 = RdCurve("b", tuple(zip(np.sort(rng.uniform(0.02, 1.0, 4)),
                                        np.sort(rng.uniform(28, 42, 4)))))
            lo = max(c1.psnr.min(), c2.psnr.min())
            hi = min(c1.psnr.max(), c2.psnr.max())
            if hi <= lo:
                continue
            p1 = np.polyfit(c1.psnr, np.log10(c1.bpp), 3)
            p2 = np.polyfit(c2.psnr, np.log10(c2.bpp), 3)
            xs = np.linspace(lo, hi, 10**4)
            d = np.trapezoid(np.polyval(p1, xs) - np.polyval(p2, xs), xs) / (hi - lo)
            oracle = (10**d - 1) * 100
            got = bd_rate(c1, c2)
            assert abs(got - oracle) <= max(0.1, abs(oracle) * 1e-3)

    def test_insufficient_points(self):
        short = RdCurve("s", ANCHOR.points[:3])
        with pytest.raises(ValueError):
            bd_rate(short, ANCHOR)

    def test_no_overlap(self):
        far = RdCurve("f", tuple((b, p + 20) for b, p in ANCHOR.points))
        with pytest.raises(ValueError):
            bd_rate(far, ANCHOR)

    def test_curve_validation(self):
        with pytest.raises(ValueError):
            RdCurve("bad", ((0.2, 30.0), (0.1, 33.0)))
        with pytest.raises(ValueError):
            RdCurve("bad", ((0.0, 30.0), (0.1, 33.0)))


class TestProfile:
    def test_flat_profile_zero_slope(self):
        series, slope = psnr_profile(_stats([40.0] * 20))
        assert len(series) == 20
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_linear_degradation_recovered(self):
        psnrs = [45.0 - 0.1 * t for t in range(30)]
        _, slope = psnr_profile(_stats(psnrs))
        assert slope == pytest.approx(-0.1, abs=1e-9)

    def test_intra_frames_excluded_from_trend(self):
        psnrs = [50.0] + [45.0 - 0.1 * t for t in range(1, 21)]
        types = ["I"] + ["P"] * 20
        _, slope = psnr_profile(_stats(psnrs, types))
        assert slope == pytest.approx(-0.1, abs=1e-9)

    def test_length_matches_frames(self):
        series, _ = psnr_profile(_stats([40, 41, 42]))
        assert series.shape == (3, 2)


@pytest.fixture(scope="module")
def sweep_result():
    clip = moving_texture_clip(32, 32, 8, dx=1.0, seed=19)
    result = rd_sweep(clip, lambda tag: quick_config(tag),
                      [228, 512, 1024, 1626], ["ls", "ss"], anchor="ss")
    return clip, result


class TestSweep:

    def test_cell_count(self, sweep_result):
        _, result = sweep_result
        assert len(result.cells) == 8
        assert len(result.bd_rows) == 2

    def test_anchor_against_itself_zero(self, sweep_result):
        _, result = sweep_result
        by_test = {t: pct for t, _, pct in result.bd_rows}
        assert by_test["ss"] == 0.0

    def test_deterministic_csv(self, sweep_result, tmp_path):
        clip, result = sweep_result
        again = rd_sweep(clip, lambda tag: quick_config(tag),
                         [228, 512, 1024, 1626], ["ls", "ss"], anchor="ss")
        for name, res in (("one", result), ("two", again)):
            write_sweep_csv(res, tmp_path / f"{name}_pts.csv", tmp_path / f"{name}_bd.csv")
        assert (tmp_path / "one_pts.csv").read_bytes() == (tmp_path / "two_pts.csv").read_bytes()
        assert (tmp_path / "one_bd.csv").read_bytes() == (tmp_path / "two_bd.csv").read_bytes()

    def test_unknown_anchor_rejected(self, sweep_result):
        clip, _ = sweep_result
        with pytest.raises(ValueError):
            rd_sweep(clip[:4], lambda tag: quick_config(tag),
                     [228, 512, 1024, 1626], ["ls"], anchor="tp")
