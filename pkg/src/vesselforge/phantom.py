"""Synthetic angiogram phantoms with exact ground truth.

A tube of width ``w`` darkens the background by ``depth * exp(-(d / w)**2)``
where ``d`` is the distance to its centerline polyline. With that profile
the scale-normalized Hessian response across the tube peaks at ``sigma == w``.
The ground-truth mask marks every pixel with ``d <= w``.

Bias bumps add ``amplitude * exp(-r**2 / (2 radius**2))`` (amplitude may be
negative for shadows). Noise is i.i.d. Gaussian drawn from
``numpy.random.Generator(PCG64(seed)).standard_normal((height, width))``
in row-major order and scaled by ``noise_sigma``; no other draws are made,
so reruns with the same seed are bit-identical.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .imaging import save_image, save_mask


@dataclass(frozen=True)
class Tube:
    points: Tuple[Tuple[float, float], ...]  # (x, y) control points
    width: float
    depth: float

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(tuple(map(float, p)) for p in self.points))
        if len(self.points) < 2:
            raise ValueError("tube needs at least two control points")
        if not self.width > 0:
            raise ValueError("tube width must be > 0")
        if self.depth < 0:
            raise ValueError("tube depth must be >= 0")


@dataclass(frozen=True)
class BiasBump:
    center: Tuple[float, float]  # (x, y)
    radius: float
    amplitude: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(map(float, self.center)))
        if not self.radius > 0:
            raise ValueError("bias radius must be > 0")


@dataclass(frozen=True)
class PhantomSpec:
    width: int = 256
    height: int = 256
    tubes: Tuple[Tube, ...] = ()
    bias_field: Tuple[BiasBump, ...] = ()
    noise_sigma: float = 0.0
    background_level: float = 180.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tubes", tuple(
            t if isinstance(t, Tube) else Tube(**t) for t in self.tubes))
        object.__setattr__(self, "bias_field", tuple(
            b if isinstance(b, BiasBump) else BiasBump(**b) for b in self.bias_field))
        if self.width <= 0 or self.height <= 0:
            raise ValueError("phantom dimensions must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.background_level - sum(t.depth for t in self.tubes) < 0:
            raise ValueError("background_level minus total tube depth must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "PhantomSpec":
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown phantom keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "PhantomSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


def polyline_distance(points, shape) -> np.ndarray:
    """Euclidean distance from every pixel centre to a polyline of (x, y) points."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    dist = np.full(shape, np.inf)
    pts = np.asarray(points, dtype=np.float64)
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        dx, dy = x1 - x0, y1 - y0
        seg2 = dx * dx + dy * dy
        if seg2 == 0:
            t = np.zeros(shape)
        else:
            t = np.clip(((xx - x0) * dx + (yy - y0) * dy) / seg2, 0.0, 1.0)
        d = np.hypot(xx - (x0 + t * dx), yy - (y0 + t * dy))
        np.minimum(dist, d, out=dist)
    return dist


def generate_phantom(spec: PhantomSpec):
    """Return ``(image, mask)``; the image is clamped to [0, 255]."""
    shape = (spec.height, spec.width)
    image = np.full(shape, float(spec.background_level))
    mask = np.zeros(shape, dtype=bool)
    for tube in spec.tubes:
        d = polyline_distance(tube.points, shape)
        image -= tube.depth * np.exp(-(d / tube.width) ** 2)
        mask |= d <= tube.width
    if spec.bias_field:
        yy, xx = np.mgrid[0:spec.height, 0:spec.width].astype(np.float64)
        for bump in spec.bias_field:
            cx, cy = bump.center
            r2 = (xx - cx) ** 2 + (yy - cy) ** 2
            image += bump.amplitude * np.exp(-r2 / (2.0 * bump.radius**2))
    if spec.noise_sigma > 0:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        image += spec.noise_sigma * rng.standard_normal(shape)
    return np.clip(image, 0.0, 255.0), mask


def write_phantom(spec: PhantomSpec, directory) -> Tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    image, mask = generate_phantom(spec)
    image_path, mask_path = directory / "image.pgm", directory / "mask.pgm"
    save_image(image, image_path)
    save_mask(mask, mask_path)
    return image_path, mask_path


def straight_tube_spec(width: float, size: int = 128, depth: float = 80.0,
                       background: float = 180.0, noise_sigma: float = 0.0,
                       seed: int = 0) -> PhantomSpec:
    """One horizontal tube across the middle row."""
    row = size // 2
    tube = Tube(points=((-size, row), (2 * size, row)), width=width, depth=depth)
    return PhantomSpec(width=size, height=size, tubes=(tube,), noise_sigma=noise_sigma,
                       background_level=background, seed=seed)


def _wavy_polyline(rng, size, n_ctrl=6):
    # a vessel entering from one side and meandering across
    horizontal = rng.random() < 0.5
    start = rng.uniform(0.2, 0.8) * size
    end = rng.uniform(0.2, 0.8) * size
    ts = np.linspace(-0.05, 1.05, n_ctrl)
    across = start + (end - start) * ts + rng.normal(0, 0.06 * size, n_ctrl)
    along = ts * size
    pts = np.stack([along, across], axis=1) if horizontal else np.stack([across, along], axis=1)
    # densify with a smooth interpolant so the tube is curved, not kinked
    fine = np.linspace(0, n_ctrl - 1, 8 * n_ctrl)
    xs = np.interp(fine, np.arange(n_ctrl), pts[:, 0])
    ys = np.interp(fine, np.arange(n_ctrl), pts[:, 1])
    k = np.array([1, 2, 3, 2, 1], dtype=float)
    k /= k.sum()
    xs = np.convolve(np.pad(xs, 2, mode="edge"), k, mode="valid")
    ys = np.convolve(np.pad(ys, 2, mode="edge"), k, mode="valid")
    return tuple(zip(xs.tolist(), ys.tolist()))


def benchmark_suite(n: int = 10, size: int = 256, seed: int = 2024) -> List[PhantomSpec]:
    """Seeded suite of angiogram-like phantoms.

    Case ``i`` sweeps bias amplitude over 40..80, noise sigma over 5..15 and
    tube widths over 2..6 so every case differs in "device" characteristics.
    """
    specs = []
    for i in range(n):
        frac = i / max(n - 1, 1)
        rng = np.random.default_rng(seed + i)
        bias_amp = 40.0 + 40.0 * frac
        noise = 5.0 + 10.0 * ((i * 7) % n) / max(n - 1, 1)
        widths = (2.0, 3.0 + (i % 3), 6.0) if i % 2 else (2.0 + (i % 3), 4.0, 6.0)
        tubes = tuple(
            Tube(points=_wavy_polyline(rng, size), width=w, depth=float(rng.uniform(20, 35)))
            for w in widths)
        bumps = []
        for j in range(3):
            sign = 1.0 if j != 1 else -1.0
            bumps.append(BiasBump(
                center=(float(rng.uniform(0, size)), float(rng.uniform(0, size))),
                radius=float(rng.uniform(0.15, 0.3) * size),
                amplitude=sign * bias_amp))
        specs.append(PhantomSpec(width=size, height=size, tubes=tubes, bias_field=tuple(bumps),
                                 noise_sigma=noise, background_level=200.0 - bias_amp / 2,
                                 seed=seed + 100 + i))
    return specs
