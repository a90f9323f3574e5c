"""Image loading and the on-disk layer-stack format.

A stack directory holds ``manifest.json`` plus one grayscale alpha PNG per
layer (16-bit by default). The manifest is self-contained: recomposition
needs nothing outside the directory.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from .compositor import LayerStack
from .energy import MODE_RGB, MODE_RGBA, AlphaStack, OrderedPalette
from .errors import ManifestError, UnsupportedImageError
from .solver import SolveOptions

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1
_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

ImageSource = Union[str, Path, bytes, io.IOBase]


@dataclass(frozen=True)
class Manifest:
    """On-disk description of a layer stack directory."""

    version: int
    mode: str  # "rgb" | "rgba-premultiplied"
    background_color: Optional[list[int]]  # null for a transparent background
    layers: list[dict]  # {"color": [r, g, b], "alpha_file": str, "bit_depth": 8|16}
    params: dict
    source_hash: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _read_bytes(source: ImageSource) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()


def _png_depth_and_colortype(data: bytes) -> tuple[int, int]:
    # IHDR layout: 8-byte signature, 4-byte length, 4-byte type, then
    # width(4), height(4), bit depth(1), color type(1).
    if len(data) < 26 or not data.startswith(_PNG_SIGNATURE):
        raise UnsupportedImageError("input is not a PNG file")
    return data[24], data[25]


def load_image(source: ImageSource) -> tuple[np.ndarray, str]:
    """Load an 8-bit RGB or RGBA PNG into a float [0, 255] pixel grid.

    RGBA pixels come back premultiplied (round(c * a / 255)); any gamma or
    ICC chunks in the file are ignored. Returns (image, mode).
    """
    data = _read_bytes(source)
    depth, _ = _png_depth_and_colortype(data)
    if depth != 8:
        raise UnsupportedImageError(f"unsupported PNG bit depth {depth}; only 8-bit is accepted")
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as exc:
        raise UnsupportedImageError(f"cannot decode PNG: {exc}") from exc

    has_alpha = img.mode in ("RGBA", "LA", "PA") or "transparency" in img.info
    img = img.convert("RGBA" if has_alpha else "RGB")
    arr = np.asarray(img, dtype=np.float64)
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise UnsupportedImageError("image has zero pixels")
    if not has_alpha:
        return arr, MODE_RGB
    alpha = arr[:, :, 3:4]
    premultiplied = np.concatenate([np.rint(arr[:, :, :3] * alpha / 255.0), alpha], axis=2)
    return premultiplied, MODE_RGBA


def image_hash(image: np.ndarray) -> str:
    """Content hash of a decoded pixel grid (shape plus 8-bit pixel data)."""
    arr = np.clip(np.rint(np.asarray(image, dtype=np.float64)), 0, 255).astype(np.uint8)
    digest = hashlib.sha256()
    digest.update(str(arr.shape).encode())
    digest.update(arr.tobytes())
    return digest.hexdigest()


def _write_alpha_png(plane: np.ndarray, path: Path, bit_depth: int) -> None:
    if bit_depth == 16:
        arr = np.rint(plane * 65535.0).astype(np.uint16)
    elif bit_depth == 8:
        arr = np.rint(plane * 255.0).astype(np.uint8)
    else:
        raise ValueError(f"alpha bit depth must be 8 or 16, got {bit_depth}")
    Image.fromarray(arr).save(path)


def _read_alpha_png(path: Path, bit_depth: int) -> np.ndarray:
    arr = np.asarray(Image.open(path))
    if arr.ndim != 2:
        raise ManifestError(f"alpha file {path} is not grayscale")
    scale = 65535.0 if bit_depth == 16 else 255.0
    return arr.astype(np.float64) / scale


def save_layerstack(stack: LayerStack, directory: Union[str, Path], bit_depth: int = 16) -> Manifest:
    """Write a stack as manifest.json + per-layer alpha PNGs; returns the manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    colors = np.rint(stack.palette.colors).astype(int)
    layers = []
    for i in range(stack.palette.layer_count):
        name = f"layer_{i:03d}.png"
        _write_alpha_png(stack.alphas.planes[i], directory / name, bit_depth)
        layers.append(
            {"color": colors[i + 1].tolist(), "alpha_file": name, "bit_depth": bit_depth}
        )

    background = None if stack.palette.mode == MODE_RGBA else colors[0].tolist()
    params = {"solve": asdict(stack.params)} if stack.params is not None else {}
    manifest = Manifest(
        version=MANIFEST_VERSION,
        mode=stack.palette.mode,
        background_color=background,
        layers=layers,
        params=params,
        source_hash=stack.source_image_hash,
    )
    (directory / MANIFEST_NAME).write_text(manifest.to_json(), encoding="utf-8")
    return manifest


def load_layerstack(directory: Union[str, Path]) -> LayerStack:
    """Load a stack directory written by save_layerstack."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise ManifestError(f"missing manifest: {manifest_path}")
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"corrupt manifest {manifest_path}: {exc}") from exc
    if doc.get("version") != MANIFEST_VERSION:
        raise ManifestError(f"unsupported manifest version {doc.get('version')!r}")
    mode = doc.get("mode")
    if mode not in (MODE_RGB, MODE_RGBA):
        raise ManifestError(f"unknown stack mode {mode!r}")

    planes = []
    colors = [doc.get("background_color") or [0, 0, 0]]
    for layer in doc.get("layers", []):
        path = directory / layer["alpha_file"]
        if not path.exists():
            raise ManifestError(f"missing alpha file: {path}")
        planes.append(_read_alpha_png(path, int(layer.get("bit_depth", 16))))
        colors.append(layer["color"])
    if not planes:
        raise ManifestError("manifest lists no layers")
    shapes = {p.shape for p in planes}
    if len(shapes) != 1:
        raise ManifestError(f"alpha planes disagree on dimensions: {sorted(shapes)}")

    params = None
    solve_doc = doc.get("params", {}).get("solve")
    if isinstance(solve_doc, dict):
        try:
            params = SolveOptions(**solve_doc)
        except (TypeError, ValueError):
            params = None

    palette = OrderedPalette(colors=np.asarray(colors, dtype=np.float64), mode=mode)
    alphas = AlphaStack(planes=np.clip(np.stack(planes), 0.0, 1.0))
    return LayerStack(
        palette=palette,
        alphas=alphas,
        source_image_hash=doc.get("source_hash", ""),
        params=params,
    )
