from __future__ import annotations

import numpy as np
import pytest

from dermcontrast.contrast import (
    ContrastScore,
    average_points,
    contrast_ratio,
    is_abnormal_score,
    luminance,
    relative_luminance,
    srgb_channel_to_linear,
)
from dermcontrast.errors import InputDomainError, ProtocolViolation

from .oracles import BREAKPOINT_GAP, CONTRAST_GREY119_VS_WHITE, LINEAR_119


class TestChannelLinearization:
    def test_zero_maps_to_zero(self):
        assert srgb_channel_to_linear(0) == 0.0

    def test_full_scale_maps_to_one(self):
        assert srgb_channel_to_linear(255) == pytest.approx(1.0, abs=1e-15)

    def test_reference_value_119(self):
        assert srgb_channel_to_linear(119) == pytest.approx(LINEAR_119, abs=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(InputDomainError):
            srgb_channel_to_linear(-1)
        with pytest.raises(InputDomainError):
            srgb_channel_to_linear(256)

    def test_monotone_nondecreasing(self):
        values = [srgb_channel_to_linear(c) for c in np.linspace(0, 255, 2000)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_continuity_at_breakpoint(self):
        c_star = 0.03928 * 255
        delta = 1e-9
        below = srgb_channel_to_linear(c_star - delta)
        above = srgb_channel_to_linear(c_star + delta)
        assert abs(above - below) < 1e-6
        assert abs(above - below) == pytest.approx(BREAKPOINT_GAP, abs=1e-8)


class TestRelativeLuminance:
    def test_black(self):
        assert relative_luminance((0.0, 0.0, 0.0)) == 0.0

    def test_white_weights_sum_to_one(self):
        assert relative_luminance((1.0, 1.0, 1.0)) == pytest.approx(1.0, abs=1e-15)

    def test_grey_fixed_point(self):
        v = 0.1845
        assert relative_luminance((v, v, v)) == pytest.approx(v, abs=1e-12)

    def test_grey_equals_channel_linearization(self):
        for c in (0, 13, 119, 200, 255):
            assert luminance((c, c, c)) == pytest.approx(
                srgb_channel_to_linear(c), abs=1e-15
            )

    def test_rejects_out_of_range(self):
        with pytest.raises(InputDomainError):
            relative_luminance((1.2, 0.0, 0.0))


class TestAveragePoints:
    def test_idempotent_on_constant(self):
        assert average_points([(10, 10, 10)] * 3) == (10, 10, 10)

    def test_arithmetic_mean(self):
        pts = [(0, 0, 0), (255, 255, 255), (0, 0, 0)]
        assert average_points(pts) == (85, 85, 85)

    def test_exact_per_channel_means(self):
        pts = [(12, 40, 200), (14, 44, 210), (10, 42, 190)]
        assert average_points(pts) == (12, 42, 200)

    def test_not_requantized(self):
        pts = [(1, 1, 1), (2, 2, 2), (1, 1, 1)]
        r, g, b = average_points(pts)
        assert r == pytest.approx(4 / 3)

    def test_wrong_count_is_protocol_violation(self):
        with pytest.raises(ProtocolViolation):
            average_points([(1, 2, 3)] * 2)
        with pytest.raises(ProtocolViolation):
            average_points([(1, 2, 3)] * 4)
        with pytest.raises(ProtocolViolation):
            average_points([])

    def test_permutation_invariant(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            pts = [tuple(rng.integers(0, 256, 3)) for _ in range(3)]
            base = average_points(pts)
            for perm in ((1, 0, 2), (2, 1, 0), (1, 2, 0)):
                assert average_points([pts[i] for i in perm]) == base


class TestContrastRatio:
    def test_white_vs_black_is_21(self):
        score = contrast_ratio((255, 255, 255), (0, 0, 0))
        assert score.value == pytest.approx(21.0, abs=1e-9)

    def test_self_contrast_is_one(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            c = tuple(int(v) for v in rng.integers(0, 256, 3))
            assert contrast_ratio(c, c).value == 1.0

    def test_reference_value(self):
        score = contrast_ratio((119, 119, 119), (255, 255, 255))
        assert score.value == pytest.approx(CONTRAST_GREY119_VS_WHITE, abs=1e-12)

    def test_symmetric_bitwise(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            a = tuple(int(v) for v in rng.integers(0, 256, 3))
            b = tuple(int(v) for v in rng.integers(0, 256, 3))
            assert contrast_ratio(a, b).value == contrast_ratio(b, a).value

    def test_range_and_extremes(self):
        rng = np.random.default_rng(17)
        for _ in range(500):
            a = tuple(int(v) for v in rng.integers(0, 256, 3))
            b = tuple(int(v) for v in rng.integers(0, 256, 3))
            v = contrast_ratio(a, b).value
            assert 1.0 <= v <= 21.0
            if v == pytest.approx(21.0, abs=1e-9):
                assert {a, b} == {(255, 255, 255), (0, 0, 0)}

    def test_carries_luminances(self):
        score = contrast_ratio((119, 119, 119), (255, 255, 255))
        assert score.lighter == pytest.approx(1.0, abs=1e-12)
        assert score.darker == pytest.approx(LINEAR_119, abs=1e-12)
        assert score.lighter >= score.darker


class TestAbnormalScoreFilter:
    def test_degenerate_dark_input(self):
        score = contrast_ratio((0, 0, 0), (255, 255, 255))
        assert score.darker == 0.0
        assert is_abnormal_score(score)

    def test_mid_grey_not_flagged(self):
        score = contrast_ratio((119, 119, 119), (255, 255, 255))
        assert not is_abnormal_score(score)

    def test_strict_inequality_at_floor(self):
        at_floor = ContrastScore(value=2.0, lighter=0.5, darker=0.01)
        below = ContrastScore(value=2.0, lighter=0.5, darker=0.009)
        assert not is_abnormal_score(at_floor, l_min=0.01)
        assert is_abnormal_score(below, l_min=0.01)
