"""8-bit raster I/O: binary PGM (P5), PPM (P6) and PNG.

PGM/PPM are parsed and written here so the byte layout is exact: header
``P6\\n<w> <h>\\n255\\n`` followed by the raw interleaved samples. PNG goes
through Pillow.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError


@dataclass(eq=False)
class ImageBuffer:
    """Row-major, channel-interleaved 8-bit raster of shape (H, W, C)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W, 1|3) array, got shape {data.shape}")
        if data.dtype != np.uint8:
            if data.size and (data.min() < 0 or data.max() > 255):
                raise ValueError("channel values must lie in [0, 255]")
            data = data.astype(np.uint8)
        self.data = np.ascontiguousarray(data)

    @classmethod
    def from_bytes(cls, width: int, height: int, channels: int,
                   raw: bytes) -> "ImageBuffer":
        if len(raw) != width * height * channels:
            raise ValueError("data length must equal width*height*channels")
        arr = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, channels)
        return cls(arr.copy())

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def with_flat(self, flat: np.ndarray) -> "ImageBuffer":
        return ImageBuffer(np.asarray(flat, dtype=np.uint8).reshape(self.shape))

    def tobytes(self) -> bytes:
        return self.data.tobytes()

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)


_MAGIC = {b"P5": 1, b"P6": 3}


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageFormatError("truncated PNM header")
    return buf[start:pos], pos


def decode_pnm(buf: bytes) -> ImageBuffer:
    magic = buf[:2]
    if magic not in _MAGIC:
        raise ImageFormatError("not a binary PGM/PPM file")
    channels = _MAGIC[magic]
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        if not tok.isdigit():
            raise ImageFormatError(f"bad PNM header token {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"only maxval 255 is supported, got {maxval}")
    if width < 1 or height < 1:
        raise ImageFormatError("PNM dimensions must be positive")
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise ImageFormatError("truncated PNM header")
    pos += 1
    size = width * height * channels
    raw = buf[pos:pos + size]
    if len(raw) != size:
        raise ImageFormatError(f"PNM payload has {len(raw)} bytes, expected {size}")
    return ImageBuffer.from_bytes(width, height, channels, raw)


def encode_pnm(img: ImageBuffer) -> bytes:
    magic = b"P6" if img.channels == 3 else b"P5"
    return b"%s\n%d %d\n255\n" % (magic, img.width, img.height) + img.tobytes()


def _format_for(path: Path, fmt: str | None) -> str:
    if fmt:
        return fmt.lower()
    suffix = path.suffix.lower().lstrip(".")
    if suffix in ("ppm", "pgm", "pnm"):
        return "pnm"
    if suffix == "png":
        return "png"
    raise ImageFormatError(f"unsupported image extension {path.suffix!r}")


def read_image(path: str | os.PathLike, fmt: str | None = None) -> ImageBuffer:
    path = Path(path)
    kind = _format_for(path, fmt)
    raw = path.read_bytes()
    if kind == "pnm":
        return decode_pnm(raw)
    if kind != "png":
        raise ImageFormatError(f"unsupported image format {kind!r}")
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("L", "RGB"):
                arr = np.asarray(im, dtype=np.uint8)
            else:
                raise ImageFormatError(
                    f"PNG mode {im.mode!r} is not 8-bit grayscale or RGB")
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageFormatError(f"cannot decode PNG: {exc}") from exc
    return ImageBuffer(arr)


def write_image(img: ImageBuffer, path: str | os.PathLike,
                fmt: str | None = None) -> None:
    path = Path(path)
    kind = _format_for(path, fmt)
    if kind == "pnm":
        if path.suffix.lower() == ".pgm" and img.channels != 1:
            raise ImageFormatError("PGM output needs a single-channel image")
        if path.suffix.lower() == ".ppm" and img.channels != 3:
            raise ImageFormatError("PPM output needs a three-channel image")
        path.write_bytes(encode_pnm(img))
        return
    if kind != "png":
        raise ImageFormatError(f"unsupported image format {kind!r}")
    arr = img.data[:, :, 0] if img.channels == 1 else img.data
    Image.fromarray(np.ascontiguousarray(arr)).save(path)
