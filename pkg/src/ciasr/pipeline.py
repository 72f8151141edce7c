"""Raster ingestion, patch segmentation, parallel per-patch fitting and
rendering of parameter heatmaps / pseudo-RGB composites.

The pipeline turns an amplitude raster into a coarse parameter map: the image
is cut into non-overlapping square patches, each patch's pixels are fitted as
an i.i.d. amplitude sample, and the fitted (alpha, gamma, delta) grids are
rendered as 8-bit rasters.  Low alpha marks heavy-tailed (strong-scatterer)
cells, gamma tracks texture dispersion and delta the dominant-reflector
intensity; in the pseudo-RGB composite the red channel is inverted
(red = 1 - norm(alpha)) so heavy-tailed cells light up.
"""

from __future__ import annotations

import json
import re
import warnings as _warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .estimator import DEFAULT_MOBM, MobmConfig, fit
from .exceptions import DomainError, RasterFormatError

#: Below this many pixels per patch the moment estimator loses stability.
MIN_STABLE_PATCH_PIXELS = 100_000

_MIN_PATCH_SIZE = 32
_CONSTANT_CHANNEL_LEVEL = 128


@dataclass(frozen=True)
class RasterImage:
    """Row-major nonnegative amplitude raster."""

    pixels: np.ndarray  # shape (height, width), float
    bit_depth: int

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 2 or p.size == 0:
            raise RasterFormatError("pixels must form a non-empty 2-D raster")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise RasterFormatError("pixels must be finite and non-negative")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class PatchGrid:
    """Non-overlapping square patches cut from a raster, in row-major order."""

    patches: tuple[np.ndarray, ...]
    grid_rows: int
    grid_cols: int
    patch_size: int


@dataclass(frozen=True)
class ParamMap:
    """Per-patch parameter estimates on the segmentation grid.

    Failed cells carry NaN in all three maps and True in ``failed``;
    ``fit_warnings`` holds one tuple of warning strings per cell.
    """

    alpha_map: np.ndarray
    gamma_map: np.ndarray
    delta_map: np.ndarray
    failed: np.ndarray
    fit_warnings: tuple[tuple[str, ...], ...]
    patch_size: int

    @property
    def grid_rows(self) -> int:
        return self.alpha_map.shape[0]

    @property
    def grid_cols(self) -> int:
        return self.alpha_map.shape[1]

    def to_json(self) -> str:
        def grid(m: np.ndarray) -> list:
            return [[None if not np.isfinite(v) else v for v in row] for row in m.tolist()]

        payload = {
            "grid_rows": self.grid_rows,
            "grid_cols": self.grid_cols,
            "patch_size": self.patch_size,
            "alpha": grid(self.alpha_map),
            "gamma": grid(self.gamma_map),
            "delta": grid(self.delta_map),
            "failed": self.failed.astype(bool).tolist(),
            "warnings": [list(w) for w in self.fit_warnings],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "ParamMap":
        payload = json.loads(text)

        def grid(rows: list) -> np.ndarray:
            return np.array(
                [[np.nan if v is None else float(v) for v in row] for row in rows]
            )

        return ParamMap(
            alpha_map=grid(payload["alpha"]),
            gamma_map=grid(payload["gamma"]),
            delta_map=grid(payload["delta"]),
            failed=np.array(payload["failed"], dtype=bool),
            fit_warnings=tuple(tuple(w) for w in payload["warnings"]),
            patch_size=int(payload["patch_size"]),
        )


@dataclass(frozen=True)
class RenderResult:
    """8-bit rendering of a ParamMap: grayscale (rows, cols) or RGB
    (rows, cols, 3) pixel grid plus rendering metadata."""

    pixels: np.ndarray
    metadata: dict


# ---------------------------------------------------------------------------
# raster codecs


def _parse_pgm_header(blob: bytes):
    # P5, whitespace/comment-tolerant: magic, width, height, maxval
    pos = 0
    fields = []
    if not blob.startswith(b"P5"):
        raise RasterFormatError("not a binary PGM (missing P5 magic)")
    pos = 2
    while len(fields) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        token = blob[start:pos]
        if not re.fullmatch(rb"\d+", token):
            raise RasterFormatError(f"malformed PGM header token {token!r}")
        fields.append(int(token))
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    return width, height, maxval, pos


def _load_pgm16(path: Path) -> RasterImage:
    blob = path.read_bytes()
    width, height, maxval, offset = _parse_pgm_header(blob)
    if width < 1 or height < 1:
        raise RasterFormatError("PGM dimensions must be positive")
    if not (0 < maxval < 65536):
        raise RasterFormatError(f"PGM maxval {maxval} out of range")
    # sample size per the netpbm rule: 2 bytes (big-endian) above 255
    dtype = ">u2" if maxval > 255 else "u1"
    itemsize = 2 if maxval > 255 else 1
    payload = blob[offset:]
    expected = width * height * itemsize
    if len(payload) != expected:
        raise RasterFormatError(
            f"PGM payload holds {len(payload)} bytes, expected {expected}"
        )
    data = np.frombuffer(payload, dtype=dtype).astype(float).reshape(height, width)
    return RasterImage(pixels=data, bit_depth=16 if maxval > 255 else 8)


def _load_flat_f64(path: Path) -> RasterImage:
    sidecar = Path(str(path) + ".json")
    if not sidecar.exists():
        raise RasterFormatError(f"flat-f64 raster needs a sidecar {sidecar.name}")
    meta = json.loads(sidecar.read_text())
    try:
        width, height = int(meta["width"]), int(meta["height"])
    except KeyError as exc:
        raise RasterFormatError(f"sidecar lacks required key {exc}") from exc
    data = np.frombuffer(path.read_bytes(), dtype="<f8")
    if data.size != width * height:
        raise RasterFormatError(
            f"sidecar declares {width}x{height} = {width * height} pixels "
            f"but payload holds {data.size} values"
        )
    if np.any(data < 0) or not np.all(np.isfinite(data)):
        raise RasterFormatError("flat-f64 raster must be finite and non-negative")
    return RasterImage(pixels=data.reshape(height, width).copy(), bit_depth=64)


def load_raster(path: str | Path, format: str | None = None) -> RasterImage:
    """Read an amplitude raster.

    Formats: ``pgm16`` (binary PGM, 8- or 16-bit, values passed through
    unscaled) and ``flat-f64`` (little-endian doubles plus a JSON sidecar
    declaring width/height).  When ``format`` is None it is inferred from the
    file suffix (.pgm) or the presence of a sidecar.
    """
    path = Path(path)
    if format is None:
        format = "pgm16" if path.suffix.lower() == ".pgm" else "flat-f64"
    if format == "pgm16":
        return _load_pgm16(path)
    if format in ("flat-f64", "flat-f64+json"):
        return _load_flat_f64(path)
    raise RasterFormatError(f"unknown raster format {format!r}")


def write_pgm(path: str | Path, pixels: np.ndarray) -> None:
    """Write an 8-bit binary PGM from a (rows, cols) uint8 array."""
    arr = np.asarray(pixels)
    if arr.ndim != 2 or arr.dtype != np.uint8:
        raise RasterFormatError("write_pgm expects a 2-D uint8 array")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + arr.tobytes())


def write_ppm(path: str | Path, pixels: np.ndarray) -> None:
    """Write an 8-bit binary PPM from a (rows, cols, 3) uint8 array."""
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise RasterFormatError("write_ppm expects a (rows, cols, 3) uint8 array")
    header = f"P6\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + arr.tobytes())


# ---------------------------------------------------------------------------
# segmentation and fitting


def segment_patches(img: RasterImage, patch_size: int) -> PatchGrid:
    """Cut the raster into non-overlapping square patches (row-major).

    Trailing rows/columns that do not fill a whole patch are dropped with a
    warning — padding would distort the amplitude statistics the estimator
    consumes.
    """
    if patch_size < _MIN_PATCH_SIZE:
        raise DomainError(f"patch_size must be >= {_MIN_PATCH_SIZE}")
    if patch_size > img.height or patch_size > img.width:
        raise DomainError(
            f"patch_size {patch_size} exceeds image {img.width}x{img.height}"
        )
    rows = img.height // patch_size
    cols = img.width // patch_size
    if rows * patch_size != img.height or cols * patch_size != img.width:
        _warnings.warn(
            f"dropping partial margins: {img.width}x{img.height} is not a "
            f"multiple of patch_size {patch_size}",
            RuntimeWarning,
            stacklevel=2,
        )
    if patch_size * patch_size < MIN_STABLE_PATCH_PIXELS:
        _warnings.warn(
            f"patches hold {patch_size * patch_size} pixels "
            f"(< {MIN_STABLE_PATCH_PIXELS}); estimates may be unstable",
            RuntimeWarning,
            stacklevel=2,
        )
    patches = []
    for r in range(rows):
        for c in range(cols):
            block = img.pixels[
                r * patch_size : (r + 1) * patch_size,
                c * patch_size : (c + 1) * patch_size,
            ]
            patches.append(np.ascontiguousarray(block, dtype=float).ravel())
    return PatchGrid(
        patches=tuple(patches), grid_rows=rows, grid_cols=cols, patch_size=patch_size
    )


def _fit_one(args) -> tuple[float, float, float, bool, tuple[str, ...]]:
    """Fit a single patch; never raises (failures are flagged in the result).

    Module-level so it can cross a process boundary; deterministic, so the
    outcome is identical no matter which worker runs it.
    """
    patch, config = args
    try:
        report = fit(patch, config)
    except Exception as exc:  # noqa: BLE001 - per-cell failures must not abort the map
        return (np.nan, np.nan, np.nan, True, (f"fit failed: {exc}",))
    p = report.params
    return (p.alpha, p.gamma, p.delta, False, report.warnings)


def fit_patches(
    grid: PatchGrid,
    config: MobmConfig = DEFAULT_MOBM,
    workers: int = 1,
) -> ParamMap:
    """Moment-fit every patch; failures are flagged per cell, never fatal.

    ``workers`` > 1 distributes patches over a process pool; the map is
    order-preserving and each fit is deterministic, so the result is
    bit-identical for any worker count.
    """
    if not grid.patches:
        raise DomainError("patch grid is empty")
    if workers < 1:
        raise DomainError("workers must be >= 1")
    jobs = [(patch, config) for patch in grid.patches]
    if workers == 1:
        results = [_fit_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fit_one, jobs))
    shape = (grid.grid_rows, grid.grid_cols)
    alpha = np.array([r[0] for r in results]).reshape(shape)
    gamma = np.array([r[1] for r in results]).reshape(shape)
    delta = np.array([r[2] for r in results]).reshape(shape)
    failed = np.array([r[3] for r in results], dtype=bool).reshape(shape)
    warnings_grid = tuple(r[4] for r in results)
    return ParamMap(
        alpha_map=alpha,
        gamma_map=gamma,
        delta_map=delta,
        failed=failed,
        fit_warnings=warnings_grid,
        patch_size=grid.patch_size,
    )


# ---------------------------------------------------------------------------
# rendering


def _normalize_channel(values: np.ndarray, failed: np.ndarray, invert: bool) -> np.ndarray:
    """Min-max normalize over successful cells to uint8; failed cells black.

    A constant map has no min-max ordering, so it renders at the fixed
    mid-gray level 128.
    """
    out = np.zeros(values.shape, dtype=np.uint8)
    ok = ~failed
    vals = values[ok]
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if hi == lo:
        out[ok] = _CONSTANT_CHANNEL_LEVEL
        return out
    norm = (values[ok] - lo) / (hi - lo)
    if invert:
        norm = 1.0 - norm
    out[ok] = np.round(255.0 * norm).astype(np.uint8)
    return out


_MODES = ("heatmap-alpha", "heatmap-gamma", "heatmap-delta", "pseudo-rgb")


def render_maps(pm: ParamMap, mode: str) -> RenderResult:
    """Render a ParamMap as an 8-bit raster.

    Channels are min-max normalized over successful cells; the alpha channel
    (both its heatmap and the red channel of the composite) is inverted so
    that heavy-tailed (low-alpha) cells render bright.  Failed cells render
    black and are listed in the metadata.
    """
    if mode not in _MODES:
        raise DomainError(f"mode must be one of {_MODES}")
    if bool(np.all(pm.failed)):
        raise DomainError("cannot render a ParamMap with zero successful cells")
    failed_cells = [[int(r), int(c)] for r, c in zip(*np.nonzero(pm.failed))]
    metadata = {
        "mode": mode,
        "grid_rows": pm.grid_rows,
        "grid_cols": pm.grid_cols,
        "patch_size": pm.patch_size,
        "failed_cells": failed_cells,
    }
    if mode == "pseudo-rgb":
        channels = [
            _normalize_channel(pm.alpha_map, pm.failed, invert=True),
            _normalize_channel(pm.gamma_map, pm.failed, invert=False),
            _normalize_channel(pm.delta_map, pm.failed, invert=False),
        ]
        return RenderResult(pixels=np.stack(channels, axis=-1), metadata=metadata)
    which = mode.split("-", 1)[1]
    grid_by_name = {
        "alpha": (pm.alpha_map, True),
        "gamma": (pm.gamma_map, False),
        "delta": (pm.delta_map, False),
    }
    values, invert = grid_by_name[which]
    return RenderResult(
        pixels=_normalize_channel(values, pm.failed, invert), metadata=metadata
    )
