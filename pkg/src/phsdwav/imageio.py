"""Image buffers, binary PGM and a FITS subset, plus the synthetic edge images.

Arrays are stored as ``samples[y, t]``: rows run along the periodic ``y``
axis, columns along ``t``.  ``width`` is the ``t`` extent.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError

FITS_BLOCK = 2880
FITS_CARD = 80


@dataclass
class ImageBuffer:
    samples: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise ValueError("image samples must be two-dimensional")
        if self.bit_depth not in (8, 16):
            raise ValueError(f"bit_depth must be 8 or 16, got {self.bit_depth}")

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    def to_integers(self) -> np.ndarray:
        """Round half away from zero and clip into the sample range."""
        s = self.samples
        r = np.sign(s) * np.floor(np.abs(s) + 0.5)
        dtype = np.uint8 if self.bit_depth == 8 else np.uint16
        return np.clip(r, 0, self.max_value).astype(dtype)

    def transposed(self) -> "ImageBuffer":
        return ImageBuffer(self.samples.T.copy(), self.bit_depth)


# -- PGM ---------------------------------------------------------------------

_WS = b" \t\r\n\v\f"


def _pgm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        if data[pos] in _WS:
            pos += 1
        elif data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos] not in _WS and data[pos] != ord("#"):
        pos += 1
    if start == pos:
        raise ParseError("unexpected end of PGM header", start)
    return data[start:pos], pos


def _pgm_int(data: bytes, pos: int, what: str) -> tuple[int, int]:
    tok, end = _pgm_token(data, pos)
    if not tok.isdigit() or len(tok) > 9:
        raise ParseError(f"bad PGM {what} {tok[:16]!r}", end - len(tok))
    return int(tok), end


def read_pgm(data: bytes) -> ImageBuffer:
    """Parse a binary (P5) greymap with maxval 255 or 65535."""
    if data[:2] != b"P5":
        raise ParseError("not a binary PGM (missing P5 magic)", 0)
    pos = 2
    if len(data) <= pos or data[pos] not in _WS and data[pos] != ord("#"):
        raise ParseError("missing whitespace after magic", pos)
    width, pos = _pgm_int(data, pos, "width")
    height, pos = _pgm_int(data, pos, "height")
    maxval, pos = _pgm_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise ParseError(f"invalid PGM size {width}x{height}", pos)
    if maxval not in (255, 65535):
        raise ParseError(f"unsupported maxval {maxval}", pos)
    if pos >= len(data) or data[pos] not in _WS:
        raise ParseError("missing whitespace before raster", pos)
    pos += 1
    nbytes = 1 if maxval == 255 else 2
    need = width * height * nbytes
    if len(data) - pos < need:
        raise ParseError(f"raster truncated: need {need} bytes, have {len(data) - pos}", len(data))
    dtype = np.uint8 if nbytes == 1 else np.dtype(">u2")
    raster = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    return ImageBuffer(raster.reshape(height, width).astype(np.float64), 8 * nbytes)


def write_pgm(image: ImageBuffer) -> bytes:
    maxval = image.max_value
    header = f"P5\n{image.width} {image.height}\n{maxval}\n".encode("ascii")
    ints = image.to_integers()
    if image.bit_depth == 16:
        return header + ints.astype(">u2").tobytes()
    return header + ints.tobytes()


# -- FITS --------------------------------------------------------------------

@dataclass(frozen=True)
class FitsHeaderCard:
    keyword: str
    value: object
    comment: str = ""

    @classmethod
    def parse(cls, card: bytes, offset: int = 0) -> "FitsHeaderCard":
        if len(card) != FITS_CARD:
            raise ParseError("short header card", offset)
        try:
            text = card.decode("ascii")
        except UnicodeDecodeError as exc:
            raise ParseError("non-ASCII header card", offset + exc.start) from None
        keyword = text[:8].rstrip()
        if keyword != keyword.upper() or not re.fullmatch(r"[A-Z0-9_-]*", keyword):
            raise ParseError(f"invalid keyword {keyword!r}", offset)
        if text[8:10] != "= ":
            return cls(keyword, None, text[8:].strip())
        value, comment = _split_value(text[10:], offset + 10)
        return cls(keyword, value, comment)

    def to_bytes(self) -> bytes:
        if self.value is None:
            body = f"{self.keyword:<8}{self.comment}"
        else:
            v = self.value
            if isinstance(v, bool):
                v = "T" if v else "F"
            elif isinstance(v, str):
                v = "'" + v.replace("'", "''") + "'"
            body = f"{self.keyword:<8}= {v!s:>20}"
            if self.comment:
                body += f" / {self.comment}"
        return body[:FITS_CARD].ljust(FITS_CARD).encode("ascii")


def _split_value(field: str, offset: int):
    s = field.strip()
    if s.startswith("'"):
        i, chars = 1, []
        while True:
            j = s.find("'", i)
            if j < 0:
                raise ParseError("unterminated string value", offset)
            chars.append(s[i:j])
            if s[j + 1:j + 2] == "'":
                chars.append("'")
                i = j + 2
                continue
            rest = s[j + 1:]
            break
        value = "".join(chars).rstrip()
    else:
        raw, _, rest = s.partition("/")
        value = _parse_scalar(raw.strip(), offset)
        return value, rest.strip()
    comment = rest.strip()
    if comment.startswith("/"):
        comment = comment[1:].strip()
    return value, comment


def _parse_scalar(raw: str, offset: int):
    if raw == "T":
        return True
    if raw == "F":
        return False
    if raw == "":
        return None
    if re.fullmatch(r"[+-]?\d{1,30}", raw):
        return int(raw)
    if re.fullmatch(r"[+-]?(\d+\.?\d*|\.\d+)([EeDd][+-]?\d{1,3})?", raw):
        return float(raw.replace("D", "E").replace("d", "e"))
    raise ParseError(f"unparseable value {raw[:20]!r}", offset)


def read_fits_header(data: bytes) -> tuple[list[FitsHeaderCard], int]:
    """Return the primary header cards and the byte offset of the data unit."""
    cards = []
    pos = 0
    while True:
        if pos + FITS_CARD > len(data):
            raise ParseError("missing END card", pos)
        card = FitsHeaderCard.parse(data[pos:pos + FITS_CARD], pos)
        pos += FITS_CARD
        if card.keyword == "END":
            break
        cards.append(card)
    data_start = -(-pos // FITS_BLOCK) * FITS_BLOCK
    return cards, data_start


def read_fits(data: bytes) -> ImageBuffer:
    """Primary-HDU 2-D images with BITPIX 8 or 16; BZERO/BSCALE applied.

    Physical values are rounded and clipped into ``[0, 2**bit_depth - 1]``.
    """
    cards, data_start = read_fits_header(data)
    if not cards or cards[0].keyword != "SIMPLE" or cards[0].value is not True:
        raise ParseError("first card must be SIMPLE = T", 0)
    header = {}
    for i, c in enumerate(cards):
        header.setdefault(c.keyword, (c.value, i * FITS_CARD))

    def need_int(key, allowed=None):
        if key not in header:
            raise ParseError(f"missing {key}", 0)
        value, off = header[key]
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParseError(f"{key} must be an integer", off)
        if allowed is not None and value not in allowed:
            raise ParseError(f"unsupported {key} = {value}", off)
        return value

    bitpix = need_int("BITPIX", (8, 16))
    need_int("NAXIS", (2,))
    width = need_int("NAXIS1")
    height = need_int("NAXIS2")
    if width < 1 or height < 1:
        raise ParseError(f"invalid image size {width}x{height}", header["NAXIS1"][1])

    def real(key, default):
        value, off = header.get(key, (default, 0))
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"{key} must be numeric", off)
        return float(value)

    bzero = real("BZERO", 0.0)
    bscale = real("BSCALE", 1.0)
    nbytes = width * height * (bitpix // 8)
    if len(data) - data_start < nbytes:
        raise ParseError(
            f"data unit truncated: need {nbytes} bytes, have {max(len(data) - data_start, 0)}",
            len(data))
    dtype = np.uint8 if bitpix == 8 else np.dtype(">i2")
    raw = np.frombuffer(data, dtype=dtype, count=width * height, offset=data_start)
    with np.errstate(all="ignore"):
        phys = bzero + bscale * raw.astype(np.float64)
    if not np.all(np.isfinite(phys)):
        raise ParseError("non-finite physical values after BSCALE/BZERO", data_start)
    depth = 8 if bitpix == 8 else 16
    phys = np.clip(np.floor(phys + 0.5), 0, (1 << depth) - 1)
    return ImageBuffer(phys.reshape(height, width), depth)


def fits_bytes(samples: np.ndarray, bitpix: int = 16, bzero: float | None = None) -> bytes:
    """Build a minimal primary-HDU FITS image (test fixtures and demos)."""
    samples = np.asarray(samples)
    height, width = samples.shape
    cards = [FitsHeaderCard("SIMPLE", True), FitsHeaderCard("BITPIX", bitpix),
             FitsHeaderCard("NAXIS", 2), FitsHeaderCard("NAXIS1", width),
             FitsHeaderCard("NAXIS2", height)]
    if bzero is not None:
        cards += [FitsHeaderCard("BZERO", bzero), FitsHeaderCard("BSCALE", 1)]
    cards.append(FitsHeaderCard("END", None))
    head = b"".join(c.to_bytes() for c in cards)
    head += b" " * (-len(head) % FITS_BLOCK)
    if bitpix == 8:
        body = samples.astype(np.uint8).tobytes()
    else:
        stored = samples - (bzero or 0)
        body = stored.astype(">i2").tobytes()
    body += b"\0" * (-len(body) % FITS_BLOCK)
    return head + body


def read_image(path) -> ImageBuffer:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P5":
        return read_pgm(data)
    if data[:6] == b"SIMPLE":
        return read_fits(data)
    raise ParseError(f"{path}: unrecognized image format", 0)


# -- synthetic edges ---------------------------------------------------------

def gen_edge(kind: str, size: int = 64) -> ImageBuffer:
    """Pixel-centre samples of the unit-square edge images, {0, 1} -> {0, 255}."""
    if size < 8:
        raise ValueError("size must be at least 8")
    c = (np.arange(size) + 0.5) / size
    t = c[None, :]
    y = c[:, None]
    if kind == "vertical":
        mask = np.broadcast_to(t > 0.5, (size, size))
    elif kind == "horizontal":
        mask = np.broadcast_to(y > 0.5, (size, size))
    elif kind == "skewed":
        mask = t > (y + 2.5) / 6.0
    else:
        raise ValueError(f"unknown edge kind {kind!r}")
    return ImageBuffer(np.where(mask, 255.0, 0.0), 8)
