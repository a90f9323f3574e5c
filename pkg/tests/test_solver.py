"""Direct per-pixel solving and the coarse-to-fine optimizer."""

import numpy as np
import pytest

from paintlayers import (
    OrderedPalette,
    PixelOutsideSimplexError,
    SolveCancelled,
    SolveOptions,
    composite_from_alphas,
    direct_solve_pixel,
    reconstruction_error,
    solve_alphas,
)
from paintlayers.compositor import LayerStack, composite_stack
from paintlayers.energy import AlphaStack
from paintlayers.solver import build_pyramid

from conftest import FOUR_COLORS, oracle_composite_image, synthetic_painting


def rgb_palette(*colors):
    return OrderedPalette(colors=np.asarray(colors, dtype=np.float64))


class TestDirectSolvePixel:
    def test_segment_midpoint(self):
        palette = rgb_palette([0, 0, 0], [255, 0, 0])
        alphas = direct_solve_pixel(np.array([127.5, 0.0, 0.0]), palette)
        assert np.allclose(alphas, [0.5], atol=1e-9)

    def test_two_layer_reference(self):
        palette = rgb_palette([0, 0, 0], [255, 0, 0], [0, 0, 255])
        alphas = direct_solve_pixel(np.array([95.625, 0.0, 63.75]), palette)
        assert np.allclose(alphas, [0.5, 0.25], atol=1e-9)

    def test_background_pixel_gives_zeros(self):
        palette = rgb_palette([7, 9, 11], [255, 0, 0], [0, 255, 0], [0, 0, 255])
        alphas = direct_solve_pixel(np.array([7.0, 9.0, 11.0]), palette)
        assert np.allclose(alphas, [0.0, 0.0, 0.0], atol=1e-9)

    def test_top_color_pixel_is_sparse(self):
        palette = rgb_palette([0, 0, 0], [255, 0, 0], [0, 0, 255])
        alphas = direct_solve_pixel(np.array([0.0, 0.0, 255.0]), palette)
        assert np.array_equal(alphas, [0.0, 1.0])

    def test_outside_simplex_rejected(self):
        palette = rgb_palette([0, 0, 0], [255, 0, 0])
        with pytest.raises(PixelOutsideSimplexError):
            direct_solve_pixel(np.array([0.0, 100.0, 0.0]), palette)

    def test_more_than_three_layers_rejected(self):
        rng = np.random.default_rng(0)
        palette = rgb_palette(*rng.uniform(0, 255, size=(5, 3)))
        with pytest.raises(ValueError, match="3 layers"):
            direct_solve_pixel(np.array([10.0, 10.0, 10.0]), palette)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_roundtrip_on_random_in_simplex_pixels(self, n):
        rng = np.random.default_rng(40 + n)
        colors = rng.uniform(0, 255, size=(n + 1, 3))
        palette = rgb_palette(*colors)
        for _ in range(300):
            truth = rng.uniform(0.02, 0.98, size=n)
            pixel = composite_from_alphas(truth, palette)
            alphas = direct_solve_pixel(pixel, palette)
            assert np.max(np.abs(alphas - truth)) < 1e-7
            back = composite_from_alphas(alphas, palette)
            assert np.linalg.norm(back - pixel) <= 1e-6


class TestBuildPyramid:
    def test_halves_down_to_floor(self):
        image = np.zeros((100, 64, 3))
        levels = build_pyramid(image, 32)
        assert [lvl.shape[:2] for lvl in levels] == [(50, 32), (100, 64)]

    def test_single_level_when_already_small(self):
        image = np.zeros((16, 16, 3))
        levels = build_pyramid(image, 32)
        assert len(levels) == 1

    def test_box_filter_preserves_mean(self):
        rng = np.random.default_rng(1)
        image = rng.uniform(0, 255, size=(64, 64, 3))
        levels = build_pyramid(image, 16)
        for lvl in levels:
            assert lvl.mean() == pytest.approx(image.mean(), rel=1e-12)

    def test_odd_dimensions_handled(self):
        image = np.zeros((33, 65, 3))
        levels = build_pyramid(image, 16)
        assert levels[-1].shape[:2] == (33, 65)
        assert levels[-2].shape[:2] == (17, 33)


class TestSolveAlphas:
    def test_synthetic_four_color_reconstruction(self, small_four_color_painting):
        image, colors, _ = small_four_color_painting
        palette = rgb_palette(*colors)
        opts = SolveOptions(w_opaque=100.0, w_spatial=1000.0)
        stack = solve_alphas(image, palette, opts)
        assert stack.planes.min() >= 0.0 and stack.planes.max() <= 1.0
        recomposed = composite_stack(LayerStack(palette=palette, alphas=stack))
        err = reconstruction_error(image, recomposed)
        assert err["rmse"] < 1.0

    @pytest.mark.parametrize("n", [2, 3])
    def test_unregularized_matches_direct_solver(self, n):
        rng = np.random.default_rng(60 + n)
        colors = rng.uniform(0, 255, size=(n + 1, 3))
        palette = rgb_palette(*colors)
        truth = rng.uniform(0.05, 0.95, size=(n, 12, 12))
        image = oracle_composite_image(colors, truth)
        opts = SolveOptions(
            w_opaque=0.0,
            w_spatial=0.0,
            pyramid_min_dim=64,  # single level
            max_iterations_per_level=2000,
            gradient_tolerance=1e-10,
            convergence=1e-14,
        )
        stack = solve_alphas(image, palette, opts)
        direct = np.empty_like(truth)
        for y in range(12):
            for x in range(12):
                direct[:, y, x] = direct_solve_pixel(image[y, x], palette)
        assert np.max(np.abs(stack.planes - direct)) < 1e-3

    def test_occluded_layer_driven_transparent(self):
        # every pixel equals the top color; the hidden middle layer must fade out
        palette = rgb_palette([10, 10, 10], [200, 30, 30], [30, 30, 220])
        image = np.zeros((16, 16, 3))
        image[:] = palette.colors[2]
        opts = SolveOptions(w_opaque=100.0, w_spatial=0.0, pyramid_min_dim=16)
        stack = solve_alphas(image, palette, opts)
        assert stack.planes[1].min() > 0.95  # top layer opaque
        assert stack.planes[0].max() < 0.05  # occluded layer transparent

    def test_progress_sink_sees_every_level(self, small_four_color_painting):
        image, colors, _ = small_four_color_painting
        palette = rgb_palette(*colors)
        seen = []
        opts = SolveOptions(pyramid_min_dim=16, max_iterations_per_level=40)
        solve_alphas(image, palette, opts, progress_sink=lambda *args: seen.append(args))
        assert [lvl for lvl, *_ in seen] == [0, 1, 2]
        sizes = [(w, h) for _, w, h, _, _ in seen]
        assert sizes == [(16, 16), (32, 32), (64, 64)]
        for _, w, h, stack, energy in seen:
            assert isinstance(stack, AlphaStack)
            assert stack.planes.shape == (3, h, w)
            assert np.isfinite(energy)

    def test_energy_monotone_within_levels(self, small_four_color_painting):
        image, colors, _ = small_four_color_painting
        palette = rgb_palette(*colors)
        trace: dict[int, list[float]] = {}
        opts = SolveOptions(pyramid_min_dim=32, max_iterations_per_level=60)
        solve_alphas(
            image, palette, opts,
            on_iteration=lambda lvl, e: trace.setdefault(lvl, []).append(e),
        )
        assert trace
        for level, energies in trace.items():
            for before, after in zip(energies, energies[1:]):
                assert after <= before + 1e-9 * max(1.0, abs(before))

    def test_cancellation_raises(self, small_four_color_painting):
        image, colors, _ = small_four_color_painting
        palette = rgb_palette(*colors)
        calls = [0]

        def cancel_after_a_few():
            calls[0] += 1
            return calls[0] > 5

        with pytest.raises(SolveCancelled):
            solve_alphas(image, palette, SolveOptions(), should_cancel=cancel_after_a_few)

    def test_rgba_mode_roundtrip(self):
        rng = np.random.default_rng(31)
        layer_colors = np.array([[0.0, 0.0, 0.0], [220.0, 40.0, 30.0], [20.0, 60.0, 210.0]])
        palette = OrderedPalette(colors=layer_colors, mode="rgba-premultiplied")
        truth = np.stack(
            [
                np.tile(np.linspace(0.1, 0.9, 16), (16, 1)),
                np.tile(np.linspace(0.8, 0.2, 16)[:, None], (1, 16)),
            ]
        )
        blend = palette.blend_colors()
        image = oracle_composite_image(blend, truth)
        opts = SolveOptions(w_opaque=10.0, w_spatial=100.0, pyramid_min_dim=16)
        stack = solve_alphas(image, palette, opts)
        recomposed = composite_stack(LayerStack(palette=palette, alphas=stack))
        assert reconstruction_error(image, recomposed)["rmse"] < 1.0

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            SolveOptions(w_opaque=-1.0)
        with pytest.raises(ValueError):
            SolveOptions(w_spatial=-0.5)

    def test_channel_mismatch_rejected(self):
        rgb = rgb_palette([0, 0, 0], [255, 255, 255])
        with pytest.raises(ValueError, match="channels"):
            solve_alphas(np.zeros((8, 8, 4)), rgb, SolveOptions(pyramid_min_dim=8))
        rgba = OrderedPalette(colors=rgb.colors, mode="rgba-premultiplied")
        with pytest.raises(ValueError, match="channels"):
            solve_alphas(np.zeros((8, 8, 3)), rgba, SolveOptions(pyramid_min_dim=8))
