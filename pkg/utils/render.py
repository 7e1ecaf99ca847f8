"""
Image output for basin grids.
Brown marks the basin of infinity and black the undecided pixels; every other end gets its own
hue. Sphere views shade the same colours towards the rim. PPM (P6) is the canonical format, PNG goes
through Pillow.
"""

import colorsys
import json
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from PIL import Image

from config import END_COLORS, INFINITY_COLOR, SPHERE_BACKGROUND, SPHERE_LIMB_DARKENING, UNCLASSIFIED_COLOR
from core.basin_grid import BasinGrid
from core.cycle_finder import CycleSet
from core.errors import ParseError, RenderIOError, UnknownLabel
from core.sphere_view import SphereBasins

logger = logging.getLogger(__name__)

RGB = Tuple[int, int, int]


def hex_to_rgb(value: str) -> RGB:
    """#rrggbb to an (r, g, b) tuple"""
    value = value.lstrip('#')
    if len(value) != 6:
        raise ValueError(f"bad colour {value!r}")
    return tuple(int(value[i:i + 2], 16) for i in (0, 2, 4))


@dataclass(frozen=True)
class Palette:
    """Colours per end label; undecided pixels use `unclassified`."""

    colors: Dict[int, RGB]
    unclassified: RGB = UNCLASSIFIED_COLOR

    def table(self, label_count: int) -> np.ndarray:
        """Row i is the colour of label i; the extra last row serves label -1."""
        missing = [label for label in range(label_count) if label not in self.colors]
        if missing:
            raise UnknownLabel(missing[0])
        rows = [self.colors[label] for label in range(label_count)] + [self.unclassified]
        return np.array(rows, dtype=np.uint8).reshape(label_count + 1, 3)


def _extra_hues(count: int, taken):
    """Further distinct colours spread by the golden angle in hue."""
    hue = 0.0
    while count:
        hue = (hue + 0.618033988749895) % 1.0
        rgb = tuple(int(round(255 * c)) for c in colorsys.hsv_to_rgb(hue, 0.65, 0.95))
        if rgb not in taken:
            taken.add(rgb)
            count -= 1
            yield rgb


def build_palette(cycles: CycleSet, overrides: Optional[Dict[str, RGB]] = None) -> Palette:
    """Infinity is brown; the other ends take END_COLORS in label order, then generated hues.

    `overrides` maps an end name (or a label as text) to a colour.
    """
    overrides = overrides or {}
    names = cycles.end_names()
    infinity_label = cycles.offsets[cycles.infinity_index]
    taken = {tuple(UNCLASSIFIED_COLOR), tuple(INFINITY_COLOR)}
    base = [hex_to_rgb(c) for c in END_COLORS]
    free_labels = [label for label in range(len(names)) if label != infinity_label]
    generated = _extra_hues(max(0, len(free_labels) - len(base)), taken | set(base))
    colors = {infinity_label: tuple(INFINITY_COLOR)}
    for position, label in enumerate(free_labels):
        colors[label] = base[position] if position < len(base) else next(generated)
    for key, rgb in overrides.items():
        label = int(key) if str(key).isdigit() else (names.index(key) if key in names else None)
        if label is None:
            logger.warning("palette override %r matches no end", key)
            continue
        colors[label] = tuple(rgb)
    return Palette(colors)


def load_palette_overrides(path) -> Dict[str, RGB]:
    """JSON object mapping end names or labels to [r, g, b] or "#rrggbb"."""
    with open(path, 'r') as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}")
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object")
    overrides = {}
    for key, value in data.items():
        try:
            rgb = hex_to_rgb(value) if isinstance(value, str) else tuple(int(v) for v in value)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: colour for {key!r}: {exc}")
        if len(rgb) != 3 or not all(0 <= v <= 255 for v in rgb):
            raise ParseError(f"{path}: colour for {key!r} must be three values in 0..255")
        overrides[str(key)] = rgb
    return overrides


def _colour_labels(labels: np.ndarray, count: int, palette: Palette) -> np.ndarray:
    if labels.size and (labels.min() < -1 or labels.max() >= count):
        bad = labels.min() if labels.min() < -1 else labels.max()
        raise UnknownLabel(int(bad))
    return palette.table(count)[labels]


def render(grid: BasinGrid, palette: Palette) -> np.ndarray:
    """RGB image of shape (height, width, 3), row 0 at the largest imaginary part."""
    return _colour_labels(grid.labels, grid.cycles.label_count, palette)


def render_sphere(sphere: SphereBasins, palette: Palette, background: RGB = SPHERE_BACKGROUND) -> np.ndarray:
    """Palette colours darkened towards the rim of the disk; pixels off the sphere take the background."""
    colours = _colour_labels(sphere.labels, sphere.cycles.label_count, palette).astype(float)
    shade = 1.0 - SPHERE_LIMB_DARKENING * (1.0 - sphere.depth)
    image = np.rint(colours * shade[..., None]).astype(np.uint8)
    image[~sphere.visible] = background
    return image


def render_mask(mask: np.ndarray, color: RGB = (255, 255, 255), background: RGB = UNCLASSIFIED_COLOR) -> np.ndarray:
    """Boolean mask as a two-colour image"""
    image = np.empty(mask.shape + (3,), dtype=np.uint8)
    image[...] = background
    image[mask] = color
    return image


def write_ppm(image: np.ndarray, path) -> None:
    """Write a binary P6 image"""
    height, width = image.shape[:2]
    header = f"P6\n{width} {height}\n255\n".encode('ascii')
    try:
        with open(path, 'wb') as handle:
            handle.write(header)
            handle.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())
    except OSError as exc:
        raise RenderIOError(f"cannot write {path}: {exc}")
    logger.info("wrote %dx%d PPM to %s", width, height, path)


def read_ppm(path) -> np.ndarray:
    """Binary P6 with maxval 255; comment lines in the header are skipped."""
    try:
        with open(path, 'rb') as handle:
            data = handle.read()
    except OSError as exc:
        raise RenderIOError(f"cannot read {path}: {exc}")
    fields, position = [], 0
    while len(fields) < 4:
        while position < len(data) and data[position:position + 1].isspace():
            position += 1
        if data[position:position + 1] == b'#':
            try:
                position = data.index(b'\n', position) + 1
            except ValueError:
                raise ParseError(f"{path}: unterminated comment in PPM header")
            continue
        end = position
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        if end == position:
            raise ParseError(f"{path}: truncated PPM header")
        fields.append(data[position:end])
        position = end
    magic, width, height, maxval = fields
    if magic != b'P6' or maxval != b'255':
        raise ParseError(f"{path}: only binary P6 with maxval 255 is supported")
    width, height = int(width), int(height)
    pixels = data[position + 1:]
    if len(pixels) != width * height * 3:
        raise ParseError(f"{path}: expected {width * height * 3} pixel bytes, found {len(pixels)}")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3)


def write_png(image: np.ndarray, path) -> None:
    """Write a PNG copy through Pillow"""
    try:
        Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8)).save(path, format='PNG')
    except OSError as exc:
        raise RenderIOError(f"cannot write {path}: {exc}")
    logger.info("wrote PNG to %s", path)
