"""Grayscale raster input: PGM files, Sobel gradients, watershed basins, vertex placement.

Pixel ``(i, j)`` (row ``i`` of ``height``, column ``j`` of ``width``) maps to
the point ``((j + 0.5) / width, (i + 0.5) / height)``, so images of any aspect
ratio land in the unit square with the first row at small ``y``.
"""

from __future__ import annotations

import heapq
import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, PgmFormatError

_NEIGHBORS8 = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


@dataclass
class RasterImage:
    """Row-major grayscale image with values in [0, 1]."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=float).reshape(self.height, self.width)
        if not np.all(np.isfinite(self.pixels)):
            raise ValueError("pixel values must be finite")
        if self.pixels.size and (self.pixels.min() < 0 or self.pixels.max() > 1):
            raise ValueError("pixel values must lie in [0, 1]")

    @classmethod
    def from_array(cls, a) -> "RasterImage":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise ValueError("image array must be 2-D")
        return cls(a.shape[1], a.shape[0], a)


@dataclass
class LabelMap:
    """Row-major segment ids; 0 marks watershed-line pixels."""

    width: int
    height: int
    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(self.height, self.width)
        if self.labels.size and self.labels.min() < 0:
            raise ValueError("labels must be non-negative")

    @property
    def n_basins(self) -> int:
        return len(np.setdiff1d(np.unique(self.labels), [0]))


# ---------------------------------------------------------------- PGM I/O

_TOKEN = re.compile(rb"#[^\n\r]*[\n\r]?|\s+")


def _header_tokens(data: bytes, count: int):
    """First ``count`` whitespace-separated header tokens, skipping comments; also the payload offset."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        m = _TOKEN.match(data, pos)
        if m:
            pos = m.end()
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace() and data[end:end + 1] != b"#":
            end += 1
        if end == pos:
            raise PgmFormatError("truncated PGM header")
        tokens.append(data[pos:end])
        pos = end
    return tokens, pos


def load_pgm(path) -> RasterImage:
    """Read a P2 (ASCII) or P5 (binary, 8- or 16-bit big-endian) PGM, scaled to [0, 1] by maxval."""
    data = Path(path).read_bytes()
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise PgmFormatError(f"{path}: unsupported magic {data[:2]!r}, expected P2 or P5")
    magic = data[:2]
    tokens, pos = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise PgmFormatError(f"{path}: malformed header") from None
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise PgmFormatError(f"{path}: invalid dimensions or maxval")
    count = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        pos += 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(data) - pos < need:
            raise PgmFormatError(f"{path}: truncated payload ({len(data) - pos} of {need} bytes)")
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos).astype(float)
    else:
        body = _TOKEN.sub(b" ", data[pos:]).split()
        if len(body) < count:
            raise PgmFormatError(f"{path}: truncated payload ({len(body)} of {count} values)")
        try:
            raw = np.array([int(t) for t in body[:count]], dtype=float)
        except ValueError:
            raise PgmFormatError(f"{path}: non-integer pixel value") from None
    if raw.max(initial=0) > maxval:
        raise PgmFormatError(f"{path}: pixel value exceeds maxval {maxval}")
    return RasterImage(width, height, raw / maxval)


def write_pgm(path, img: RasterImage, maxval: int = 255, binary: bool = True) -> None:
    """Write ``img`` quantized to ``maxval`` levels (rounding to nearest)."""
    if not 0 < maxval < 65536:
        raise ValueError("maxval must be in 1..65535")
    q = np.rint(img.pixels * maxval).astype(np.int64)
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{maxval}\n".encode()
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        body = q.astype(dtype).tobytes()
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in q).encode() + b"\n"
    Path(path).write_bytes(header + body)


# ---------------------------------------------------------------- gradient

def sobel_gradient_magnitude(img: RasterImage) -> RasterImage:
    """Magnitude of the 3x3 Sobel response with replicated borders, divided by its maximum."""
    if img.width < 3 or img.height < 3:
        raise EmptyInputError("Sobel gradient needs an image of at least 3x3 pixels")
    p = np.pad(img.pixels, 1, mode="edge")
    h, w = img.height, img.width
    # written as differences so flat regions give exactly 0
    dx = p[:, 2:] - p[:, :-2]
    dy = p[2:, :] - p[:-2, :]
    gx = dx[:-2] + 2.0 * dx[1:-1] + dx[2:]
    gy = dy[:, :-2] + 2.0 * dy[:, 1:-1] + dy[:, 2:]
    mag = np.hypot(gx, gy)
    top = mag.max()
    if top > 0:
        mag /= top
    return RasterImage(w, h, mag)


# ---------------------------------------------------------------- watershed

def _neighbors(i, j, h, w):
    for di, dj in _NEIGHBORS8:
        a, b = i + di, j + dj
        if 0 <= a < h and 0 <= b < w:
            yield a, b


def regional_minima(a: np.ndarray) -> np.ndarray:
    """Label the 8-connected plateaus with no strictly lower neighbor (1, 2, ... in raster order)."""
    h, w = a.shape
    zone = np.zeros((h, w), dtype=np.int64)
    out = np.zeros((h, w), dtype=np.int64)
    nz = 0
    nmin = 0
    for si in range(h):
        for sj in range(w):
            if zone[si, sj]:
                continue
            nz += 1
            val = a[si, sj]
            members = [(si, sj)]
            zone[si, sj] = nz
            is_min = True
            queue = deque(members)
            while queue:
                i, j = queue.popleft()
                for p, q in _neighbors(i, j, h, w):
                    v = a[p, q]
                    if v < val:
                        is_min = False
                    elif v == val and not zone[p, q]:
                        zone[p, q] = nz
                        members.append((p, q))
                        queue.append((p, q))
            if is_min:
                nmin += 1
                for i, j in members:
                    out[i, j] = nmin
    return out


def watershed_segments(gradmag: RasterImage) -> LabelMap:
    """Priority-flood watershed from the regional minima of ``gradmag``.

    Pixels are flooded in order of (value, arrival). A pixel whose labelled
    neighbors, at the time it is flooded, carry more than one basin id becomes
    a watershed line (label 0); lines do not propagate labels.
    """
    a = gradmag.pixels
    h, w = a.shape
    labels = regional_minima(a)
    LINE = -1
    state = labels.copy()
    queued = labels > 0
    heap = []
    counter = 0
    for i, j in zip(*np.nonzero(labels)):
        for p, q in _neighbors(i, j, h, w):
            if not queued[p, q]:
                queued[p, q] = True
                heapq.heappush(heap, (a[p, q], counter, p, q))
                counter += 1
    while heap:
        _, _, i, j = heapq.heappop(heap)
        seen = set()
        for p, q in _neighbors(i, j, h, w):
            s = state[p, q]
            if s > 0:
                seen.add(s)
        if len(seen) == 1:
            state[i, j] = seen.pop()
            for p, q in _neighbors(i, j, h, w):
                if not queued[p, q]:
                    queued[p, q] = True
                    heapq.heappush(heap, (a[p, q], counter, p, q))
                    counter += 1
        else:
            state[i, j] = LINE
    state[state == LINE] = 0
    return LabelMap(w, h, state)


def absorb_watershed_lines(labels: LabelMap, gradmag: RasterImage) -> LabelMap:
    """Give each line pixel the label of its lowest-gradient labelled 8-neighbor.

    Repeats until no line pixel with a labelled neighbor remains, so thick
    lines are absorbed from the outside in.
    """
    lab = labels.labels.copy()
    a = gradmag.pixels
    h, w = lab.shape
    while True:
        todo = list(zip(*np.nonzero(lab == 0)))
        if not todo:
            break
        updates = []
        for i, j in todo:
            best = None
            for p, q in _neighbors(i, j, h, w):
                if lab[p, q] > 0 and (best is None or (a[p, q], lab[p, q]) < best):
                    best = (a[p, q], lab[p, q])
            if best is not None:
                updates.append((i, j, best[1]))
        if not updates:
            break
        for i, j, v in updates:
            lab[i, j] = v
    return LabelMap(labels.width, labels.height, lab)


def pixel_centers(width: int, height: int, rows, cols) -> np.ndarray:
    return np.column_stack([(np.asarray(cols) + 0.5) / width, (np.asarray(rows) + 0.5) / height])


def segment_centroids(labels: LabelMap, img: RasterImage):
    """Per-basin centroid (normalized coordinates) and mean intensity, basins in increasing id order.

    Returns ``(points, intensity, ids)``; line pixels (label 0) are ignored.
    """
    if (labels.width, labels.height) != (img.width, img.height):
        raise ValueError("label map and image differ in size")
    lab = labels.labels.ravel()
    ids = np.unique(lab[lab > 0])
    if len(ids) == 0:
        raise EmptyInputError("label map has no basins")
    rows, cols = np.divmod(np.arange(lab.size), labels.width)
    keep = lab > 0
    idx = np.searchsorted(ids, lab[keep])
    cnt = np.bincount(idx, minlength=len(ids)).astype(float)
    r = np.bincount(idx, weights=rows[keep], minlength=len(ids)) / cnt
    c = np.bincount(idx, weights=cols[keep], minlength=len(ids)) / cnt
    val = np.bincount(idx, weights=img.pixels.ravel()[keep], minlength=len(ids)) / cnt
    return pixel_centers(labels.width, labels.height, r, c), val, ids


def watershed_vertices(img: RasterImage):
    """Full placement pipeline: Sobel magnitude, watershed, line absorption, centroids."""
    grad = sobel_gradient_magnitude(img)
    basins = absorb_watershed_lines(watershed_segments(grad), grad)
    pts, val, _ = segment_centroids(basins, img)
    return pts, val


def sample_image_random(img: RasterImage, n: int, seed=None):
    """``n`` distinct pixels drawn uniformly; returns their centers and intensities."""
    total = img.width * img.height
    if n < 1:
        raise EmptyInputError("need at least one sample")
    if n > total:
        raise ValueError(f"cannot draw {n} distinct pixels from a {img.width}x{img.height} image")
    rng = np.random.default_rng(seed)
    flat = rng.choice(total, size=n, replace=False)
    rows, cols = np.divmod(flat, img.width)
    return pixel_centers(img.width, img.height, rows, cols), img.pixels.ravel()[flat]
