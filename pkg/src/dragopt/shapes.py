"""Random smooth closed shapes: sampling, Fourier smoothing, rasterization,
and contour recovery from (possibly blurry) images.

Conventions: the flow domain is [0, Lx] x [0, Ly] with y pointing up.
Images are row-major (height, width) arrays with row 0 at the domain top.
Contour polylines are counter-clockwise in domain coordinates and closed
implicitly (the last point is not a repeat of the first).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .config import IMAGE_HEIGHT, IMAGE_WIDTH
from .errors import ExtractionError, ShapeError

_SEED_STRIDE = 0x9E3779B1  # odd golden-ratio constant for attempt offsets


@dataclass(frozen=True)
class RawPolarShape:
    """Radii sampled at equally spaced polar angles around a center."""

    center: tuple[float, float]
    angles: np.ndarray  # (n,), strictly increasing in [0, 2pi)
    radii: np.ndarray   # (n,), positive


@dataclass(frozen=True)
class ShapeContour:
    """Closed boundary: Fourier coefficients c_k, k = -K..K, plus a polyline.

    ``coeffs[k + K]`` holds c_k; the curve is z(t) = sum_k c_k exp(2i pi k t)
    for t in [0, 1). ``polyline`` has shape (N, 2), counter-clockwise.
    """

    coeffs: np.ndarray    # complex128, (2K+1,)
    polyline: np.ndarray  # float64, (N, 2)

    @property
    def order(self) -> int:
        return (len(self.coeffs) - 1) // 2


def sample_raw_shape(seed: int, n_angles: int, r_min: float, r_max: float,
                     center: tuple[float, float]) -> RawPolarShape:
    """Draw i.i.d. uniform radii on [r_min, r_max] at equally spaced angles."""
    if n_angles < 8:
        raise ShapeError(f"n_angles must be >= 8, got {n_angles}")
    if not (0.0 < r_min <= r_max):
        raise ShapeError(f"invalid radius range [{r_min}, {r_max}]")
    rng = np.random.default_rng(seed)
    radii = rng.uniform(r_min, r_max, n_angles)
    angles = np.arange(n_angles) * (2.0 * np.pi / n_angles)
    return RawPolarShape(center=tuple(center), angles=angles, radii=radii)


def _fit_descriptors(points: np.ndarray, k_max: int) -> np.ndarray:
    """DFT of a closed boundary sampled uniformly in parameter, truncated to |k| <= k_max."""
    z = points[:, 0] + 1j * points[:, 1]
    n = len(z)
    spectrum = np.fft.fft(z) / n
    freqs = np.rint(np.fft.fftfreq(n, d=1.0 / n)).astype(int)
    coeffs = np.zeros(2 * k_max + 1, dtype=np.complex128)
    keep = np.abs(freqs) <= k_max
    coeffs[freqs[keep] + k_max] = spectrum[keep]
    return coeffs


def evaluate_descriptors(coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Evaluate z(t) = sum_k c_k exp(2i pi k t); returns (len(t), 2) points."""
    k_max = (len(coeffs) - 1) // 2
    k = np.arange(-k_max, k_max + 1)
    z = np.exp(2j * np.pi * np.outer(t, k)) @ coeffs
    return np.column_stack([z.real, z.imag])


def polyline_is_simple(poly: np.ndarray) -> bool:
    """True if the implicitly closed polyline has no proper self-intersection."""
    n = len(poly)
    a = poly
    b = np.roll(poly, -1, axis=0)
    i, j = np.triu_indices(n, k=2)
    # the closing segment (n-1, 0) is adjacent to segment 0: skip that pair
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]

    def cross(o, p, q):
        return (p[:, 0] - o[:, 0]) * (q[:, 1] - o[:, 1]) - \
               (p[:, 1] - o[:, 1]) * (q[:, 0] - o[:, 0])

    d1 = cross(a[i], b[i], a[j])
    d2 = cross(a[i], b[i], b[j])
    d3 = cross(a[j], b[j], a[i])
    d4 = cross(a[j], b[j], b[i])
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)
    return not bool(proper.any())


def signed_area(poly: np.ndarray) -> float:
    """Shoelace area of the implicitly closed polyline (positive = CCW)."""
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def enclosed_area(contour: ShapeContour) -> float:
    return abs(signed_area(contour.polyline))


def fourier_smooth(raw: RawPolarShape, k_max: int, n_points: int = 256) -> ShapeContour:
    """Low-pass the polar boundary samples through Fourier descriptors.

    Keeps coefficients |k| <= k_max of the complex boundary sequence and
    resamples the truncated series at n_points. Raises ShapeError if the
    smoothed contour self-intersects (callers resample with a fresh seed).
    """
    if k_max < 1:
        raise ShapeError(f"k_max must be >= 1, got {k_max}")
    cx, cy = raw.center
    pts = np.column_stack([cx + raw.radii * np.cos(raw.angles),
                           cy + raw.radii * np.sin(raw.angles)])
    coeffs = _fit_descriptors(pts, k_max)
    t = np.arange(n_points) / n_points
    poly = evaluate_descriptors(coeffs, t)
    if signed_area(poly) < 0:
        poly = poly[::-1].copy()
    if not polyline_is_simple(poly):
        raise ShapeError("smoothed contour self-intersects")
    if abs(signed_area(poly)) <= 0.0:
        raise ShapeError("smoothed contour has zero area")
    return ShapeContour(coeffs=coeffs, polyline=poly)


def points_inside(px: np.ndarray, py: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd rule point-in-polygon test for a batch of points."""
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    inside = np.zeros(px.shape, dtype=bool)
    # chunk the point set so the (points x edges) temporaries stay small
    chunk = max(1, 2_000_000 // max(len(poly), 1))
    for lo in range(0, len(px), chunk):
        qx = px[lo:lo + chunk, None]
        qy = py[lo:lo + chunk, None]
        crosses = (y0 > qy) != (y1 > qy)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qy - y0) / (y1 - y0)
            xint = x0 + t * (x1 - x0)
        hits = crosses & (qx < xint)
        inside[lo:lo + chunk] = (hits.sum(axis=1) % 2).astype(bool)
    return inside


def pixel_centers(width: int, height: int, lx: float, ly: float):
    """Domain coordinates of pixel centers; row 0 maps to the domain top."""
    cols = (np.arange(width) + 0.5) * (lx / width)
    rows = ly - (np.arange(height) + 0.5) * (ly / height)
    return np.meshgrid(cols, rows)  # xx, yy of shape (height, width)


def rasterize(contour: ShapeContour, lx: float, ly: float,
              width: int = IMAGE_WIDTH, height: int = IMAGE_HEIGHT) -> np.ndarray:
    """Binary image: pixel = 1 iff its center lies inside the contour."""
    poly = contour.polyline
    if poly[:, 0].min() <= 0 or poly[:, 0].max() >= lx or \
       poly[:, 1].min() <= 0 or poly[:, 1].max() >= ly:
        raise ShapeError("contour not strictly inside the domain")
    xx, yy = pixel_centers(width, height, lx, ly)
    img = points_inside(xx.ravel(), yy.ravel(), poly).reshape(height, width)
    img = img.astype(np.uint8)
    validate_binary_image(img)
    return img


def validate_binary_image(img: np.ndarray) -> None:
    labels, count = ndimage.label(img)  # 4-connectivity by default
    if count == 0:
        raise ShapeError("rasterization produced an empty image")
    if count > 1:
        raise ShapeError(f"rasterization produced {count} components")
    border = np.concatenate([img[0, :], img[-1, :], img[:, 0], img[:, -1]])
    if border.any():
        raise ShapeError("object touches the image border")


def frontal_area(contour: ShapeContour) -> float:
    """Transverse extent max_y - min_y of the boundary (2D frontal area)."""
    extent = float(contour.polyline[:, 1].max() - contour.polyline[:, 1].min())
    if extent <= 1e-12:
        raise ShapeError("degenerate contour: zero transverse extent")
    return extent


_MOORE = [(0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]


def _moore_trace(mask: np.ndarray) -> np.ndarray:
    """Ordered boundary pixels (row, col) of a single 4-connected component."""
    rows, cols = np.nonzero(mask)
    start = (int(rows[0]), int(cols[0]))  # topmost, then leftmost: W and N are empty
    h, w = mask.shape

    def filled(p):
        return 0 <= p[0] < h and 0 <= p[1] < w and mask[p[0], p[1]]

    boundary = [start]
    backtrack = (start[0], start[1] - 1)
    current = start
    first_move: tuple[tuple[int, int], tuple[int, int]] | None = None
    for _ in range(8 * mask.size):
        # scan the Moore neighborhood clockwise starting after the backtrack
        offset = (backtrack[0] - current[0], backtrack[1] - current[1])
        k0 = _MOORE.index(offset)
        nxt = None
        for step in range(1, 9):
            cand_off = _MOORE[(k0 + step) % 8]
            cand = (current[0] + cand_off[0], current[1] + cand_off[1])
            if filled(cand):
                nxt = cand
                break
            backtrack = cand
        if nxt is None:
            return np.array(boundary)  # isolated pixel
        move = (current, nxt)
        if first_move is None:
            first_move = move
        elif move == first_move:
            boundary.pop()  # last append duplicated the start
            return np.array(boundary)
        boundary.append(nxt)
        current = nxt
    raise ExtractionError("boundary trace did not close")


def sobel_gradients(image: np.ndarray):
    """3x3 Sobel responses (gx along columns, gy along rows) and magnitude."""
    img = image.astype(np.float64)
    kx = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
    ky = kx.T
    gx = ndimage.convolve(img, kx, mode="nearest")
    gy = ndimage.convolve(img, ky, mode="nearest")
    return gx, gy, np.hypot(gx, gy)


def extract_contour(image: np.ndarray, lx: float, ly: float, k_max: int,
                    threshold: float = 0.5, n_points: int = 256) -> ShapeContour:
    """Recover a smooth contour from a binary or blurry gray image.

    Thresholds the image, traces the outer boundary of the largest component
    (Moore neighborhood), then shifts each boundary pixel half a pixel outward
    along the local Sobel gradient so the polygon lands on the 0/1 transition
    instead of on interior pixel centers. The traced boundary is resampled
    uniformly by arc length and low-passed to |k| <= k_max descriptors.
    """
    if image.ndim != 2:
        raise ExtractionError(f"expected a 2D image, got shape {image.shape}")
    height, width = image.shape
    mask = image >= threshold
    if not mask.any():
        raise ExtractionError("empty image: nothing above threshold")
    labels, count = ndimage.label(mask)
    if count > 1:
        sizes = ndimage.sum_labels(np.ones_like(labels), labels, range(1, count + 1))
        if np.sum(sizes >= 16) > 1:
            raise ExtractionError(f"multiple components above threshold ({count})")
        biggest = int(np.argmax(sizes)) + 1
        mask = labels == biggest
    if mask.sum() < 16:
        raise ExtractionError("component too small (< 16 pixels)")
    border = np.concatenate([mask[0, :], mask[-1, :], mask[:, 0], mask[:, -1]])
    if border.any():
        raise ExtractionError("component touches the image border")

    trace = _moore_trace(mask)
    if len(trace) < 4:
        raise ExtractionError("degenerate boundary trace")

    gx, gy, gmag = sobel_gradients(image.astype(np.float64))
    r, c = trace[:, 0], trace[:, 1]
    g = gmag[r, c]
    safe = g > 1e-9
    # gradient points toward higher intensity (inward); offset outward by half a pixel
    off_c = np.where(safe, -0.5 * gx[r, c] / np.maximum(g, 1e-30), 0.0)
    off_r = np.where(safe, -0.5 * gy[r, c] / np.maximum(g, 1e-30), 0.0)
    px = (c + 0.5 + off_c) * (lx / width)
    py = ly - (r + 0.5 + off_r) * (ly / height)
    pts = np.column_stack([px, py])

    pts = _resample_arclength(pts, n_points)
    coeffs = _fit_descriptors(pts, k_max)
    t = np.arange(n_points) / n_points
    poly = evaluate_descriptors(coeffs, t)
    if signed_area(poly) < 0:
        poly = poly[::-1].copy()
        coeffs = _fit_descriptors(poly, k_max)
    if not polyline_is_simple(poly):
        raise ExtractionError("extracted contour self-intersects")
    return ShapeContour(coeffs=coeffs, polyline=poly)


def _resample_arclength(pts: np.ndarray, n_out: int) -> np.ndarray:
    """Resample a closed polyline at n_out points equally spaced in arc length."""
    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total <= 0:
        raise ExtractionError("zero-length boundary")
    target = np.arange(n_out) * (total / n_out)
    x = np.interp(target, s, closed[:, 0])
    y = np.interp(target, s, closed[:, 1])
    return np.column_stack([x, y])


def generate_contour(seed: int, n_angles: int, r_min: float, r_max: float,
                     center: tuple[float, float], k_max: int,
                     lx: float, ly: float, margin: float = 0.1,
                     max_attempts: int = 64) -> ShapeContour:
    """Sample-smooth-validate loop; invalid draws retry with a derived seed."""
    last_err: ShapeError | None = None
    for attempt in range(max_attempts):
        attempt_seed = (seed + attempt * _SEED_STRIDE) % (2 ** 63)
        raw = sample_raw_shape(attempt_seed, n_angles, r_min, r_max, center)
        try:
            contour = fourier_smooth(raw, k_max)
        except ShapeError as err:
            last_err = err
            continue
        poly = contour.polyline
        if poly[:, 0].min() < margin or poly[:, 0].max() > lx - margin or \
           poly[:, 1].min() < margin or poly[:, 1].max() > ly - margin:
            last_err = ShapeError("contour too close to domain walls")
            continue
        return contour
    raise ShapeError(f"no valid contour after {max_attempts} attempts: {last_err}")
