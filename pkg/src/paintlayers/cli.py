"""Command line client: palette extraction, solving, compositing, recoloring,
and hosting the HTTP service.

Commands exit 0 on success and print one machine-readable JSON error line to
stderr (exit 1) on pipeline failures; usage errors exit 2.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from dataclasses import asdict

import click
import numpy as np

from .compositor import LayerStack, composite_stack, quantize_to_uint8, recolor, reconstruction_error
from .energy import MODE_RGBA, OrderedPalette
from .errors import DecompositionError
from .palette import SimplifyParams, simplify_palette
from .geometry import collect_pixel_colors
from .solver import SolveOptions, solve_alphas
from .stack_io import image_hash, load_image, load_layerstack, save_layerstack


def fail_with_json(func):
    """Print pipeline failures as one JSON line on stderr and exit 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (DecompositionError, OSError, ValueError) as exc:
            click.echo(json.dumps({"error": str(exc), "type": type(exc).__name__}), err=True)
            sys.exit(1)

    return wrapper


def write_png(image, path):
    from PIL import Image

    Image.fromarray(quantize_to_uint8(image)).save(path)


@click.group()
@click.version_option(package_name="paintlayers")
def main():
    """Decompose digital paintings into translucent single-color layers."""


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--termination", default=0.05, show_default=True,
              help="Plane fitting stops when this fraction of surface samples remains.")
@click.option("--inside", default=0.99, show_default=True,
              help="Fraction of pixels each positioned plane must keep inside.")
@click.option("--bandwidth", default=40.0, show_default=True,
              help="Mean-shift bandwidth for merging hull vertices.")
@click.option("--threshold", default=3.0, show_default=True,
              help="RANSAC inlier distance threshold.")
@click.option("--samples", default=10_000, show_default=True,
              help="Number of hull surface samples.")
@click.option("--seed", default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None,
              help="Write the palette JSON here instead of stdout.")
@fail_with_json
def palette(image, termination, inside, bandwidth, threshold, samples, seed, output):
    """Identify the paint colors of IMAGE."""
    pixels, _ = load_image(image)
    params = SimplifyParams(
        ransac_distance_threshold=threshold,
        termination_fraction=termination,
        inside_fraction=inside,
        meanshift_bandwidth=bandwidth,
        n_surface_samples=samples,
        seed=seed,
    )
    result, _, diagnostics = simplify_palette(collect_pixel_colors(pixels), params)
    document = {
        "colors": np.rint(result.colors).astype(int).tolist(),
        "background_index": result.background_index,
        "params": asdict(params),
        "diagnostics": diagnostics,
    }
    text = json.dumps(document, indent=2, sort_keys=True)
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        click.echo(text)


def parse_order(value, palette_size):
    try:
        order = [int(part) for part in value.split(",")]
    except ValueError:
        raise click.UsageError(f"--order must be comma-separated integers, got {value!r}")
    if sorted(order) != list(range(palette_size)):
        raise click.UsageError(
            f"--order must be a permutation of 0..{palette_size - 1}, got {value!r}"
        )
    return order


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.argument("palette_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--order", required=True,
              help="Comma-separated palette indices, bottom (background) first.")
@click.option("--w-opaque", default=100.0, show_default=True)
@click.option("--w-spatial", default=1000.0, show_default=True)
@click.option("--min-dim", default=32, show_default=True,
              help="Pyramid stops halving below this size.")
@click.option("--max-iterations", default=500, show_default=True,
              help="Quasi-Newton iteration cap per pyramid level.")
@click.option("-o", "--output", "output_dir", required=True,
              type=click.Path(file_okay=False),
              help="Directory for the layer stack.")
@fail_with_json
def solve(image, palette_json, order, w_opaque, w_spatial, min_dim, max_iterations, output_dir):
    """Solve per-pixel layer opacities for IMAGE using PALETTE_JSON."""
    pixels, mode = load_image(image)
    with open(palette_json, encoding="utf-8") as handle:
        document = json.load(handle)
    colors = np.asarray(document["colors"], dtype=np.float64)
    ordering = parse_order(order, len(colors))
    if mode == MODE_RGBA:
        # transparent background; every palette color is an opaque layer
        ordered = OrderedPalette(
            colors=np.vstack([np.zeros(3), colors[ordering]]), mode=MODE_RGBA
        )
    else:
        ordered = OrderedPalette(colors=colors[ordering])
    options = SolveOptions(
        w_opaque=w_opaque,
        w_spatial=w_spatial,
        pyramid_min_dim=min_dim,
        max_iterations_per_level=max_iterations,
    )

    def report(level, width, height, stack, energy):
        click.echo(f"level {level}: {width}x{height} energy {energy:.6g}", err=True)

    alphas = solve_alphas(pixels, ordered, options, progress_sink=report)
    stack = LayerStack(
        palette=ordered, alphas=alphas, source_image_hash=image_hash(pixels), params=options
    )
    save_layerstack(stack, output_dir)
    error = reconstruction_error(pixels, composite_stack(stack))
    click.echo(json.dumps({"output": output_dir, **error}))


@main.command()
@click.argument("stack_dir", type=click.Path(exists=True, file_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False),
              help="Path of the recomposed PNG.")
@click.option("--compare", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Print reconstruction error against this original image.")
@fail_with_json
def composite(stack_dir, output, compare):
    """Recompose the layer stack in STACK_DIR into a PNG."""
    stack = load_layerstack(stack_dir)
    image = composite_stack(stack)
    write_png(image, output)
    if compare:
        original, _ = load_image(compare)
        click.echo(json.dumps({"output": output, **reconstruction_error(original, image)}))
    else:
        click.echo(json.dumps({"output": output}))


@main.command(name="recolor")
@click.argument("stack_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--layer", required=True, type=int,
              help="Palette index to recolor (0 is the background).")
@click.option("--color", required=True, help="New color as r,g,b.")
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@fail_with_json
def recolor_command(stack_dir, layer, color, output):
    """Recolor one layer of STACK_DIR and write the recomposition."""
    try:
        rgb = [int(part) for part in color.split(",")]
    except ValueError:
        raise click.UsageError(f"--color must be r,g,b integers, got {color!r}")
    if len(rgb) != 3:
        raise click.UsageError("--color needs exactly three channels")
    stack = load_layerstack(stack_dir)
    try:
        edited = recolor(stack, layer, np.asarray(rgb, dtype=np.float64))
    except IndexError as exc:
        raise click.UsageError(str(exc))
    write_png(composite_stack(edited), output)
    click.echo(json.dumps({"output": output, "layer": layer, "color": rgb}))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=None, type=int,
              help="Defaults to DECOMPOSE_PORT or 8000.")
def serve(host, port):
    """Run the interactive decomposition service."""
    import uvicorn

    from .service import create_app

    if port is None:
        port = int(os.environ.get("DECOMPOSE_PORT", "8000"))
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
