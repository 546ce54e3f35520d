"""Nonsubsampled contourlet decomposition, subband enhancement and reconstruction.

Pyramid: an a-trous Gaussian scheme. Level ``l`` (1-based) smooths the
previous low-pass with a sigma-1 Gaussian whose taps are spaced ``2**(l-1)``
apart, and the band-pass plane is the difference of consecutive low-passes.

Directional stage: each band-pass plane is split in the frequency plane by
``d`` angular wedges over orientation [0, pi). Wedge ``k`` is centred on
orientation ``k*pi/d`` measured from the +x frequency axis, so wedge
``d/2`` collects the spectrum of horizontal lines (whose normal points
along y). Adjacent wedges overlap with a raised-cosine taper and the windows
sum to one everywhere, so summing the directional planes returns the input.

``directions`` is listed from the coarsest scale to the finest.
Every plane keeps the input resolution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from ._filters import BOUNDARY_MODES, gaussian_kernel
from .imaging import as_image, rescale_to_range, save_image

from scipy.ndimage import correlate1d

ALLOWED_DIRECTIONS = (2, 4, 8, 16)
# raised-cosine transition width as a fraction of the wedge spacing
WEDGE_ROLLOFF = 0.5


@dataclass(frozen=True)
class NsctConfig:
    levels: int = 3
    directions: Tuple[int, ...] = (8, 8, 4)
    mode: str = "reflect"

    def __post_init__(self):
        object.__setattr__(self, "directions", tuple(int(d) for d in self.directions))
        if not 1 <= self.levels <= 5:
            raise ValueError("nsct.levels must be in 1..5")
        if len(self.directions) != self.levels:
            raise ValueError("nsct.directions must have one entry per level")
        for d in self.directions:
            if d not in ALLOWED_DIRECTIONS:
                raise ValueError(f"nsct.directions entries must be in {ALLOWED_DIRECTIONS}")
        if self.mode not in BOUNDARY_MODES:
            raise ValueError(f"nsct.mode must be one of {sorted(BOUNDARY_MODES)}")


@dataclass(frozen=True)
class EnhanceParams:
    noise_factor: float = 3.0
    gain: float = 2.0
    stretch_lo: float = 1.0
    stretch_hi: float = 99.0

    def __post_init__(self):
        # noise_factor == 0 is accepted so the identity case can be exercised
        if self.noise_factor < 0:
            raise ValueError("enhance.noise_factor must be > 0")
        if self.gain < 1:
            raise ValueError("enhance.gain must be >= 1")
        if not 0 <= self.stretch_lo < self.stretch_hi <= 100:
            raise ValueError("enhance stretch bounds need 0 <= stretch_lo < stretch_hi <= 100")


@dataclass
class SubbandSet:
    """Low-pass plane plus directional planes, ``bands[i]`` for scale ``i``.

    ``bands[0]`` is the coarsest scale, matching ``config.directions``.
    """

    lowpass: np.ndarray
    bands: List[List[np.ndarray]]
    config: NsctConfig
    original_dims: Tuple[int, int] = field(default=(0, 0))  # (width, height)

    def planes(self):
        yield self.lowpass
        for scale in self.bands:
            yield from scale

    def map_bands(self, fn) -> "SubbandSet":
        return SubbandSet(self.lowpass, [[fn(p) for p in scale] for scale in self.bands],
                          self.config, self.original_dims)


def _atrous_kernel(level: int) -> np.ndarray:
    base = gaussian_kernel(1.0)
    step = 2 ** (level - 1)
    k = np.zeros((base.size - 1) * step + 1)
    k[::step] = base
    return k


def nsp_decompose(image, levels: int, mode: str = "reflect"):
    """A-trous pyramid: returns ``(lowpass, bandpass)`` with ``bandpass[0]`` finest.

    ``image == lowpass + sum(bandpass)`` holds by construction.
    """
    img = as_image(image)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    need = 2**levels * 8
    if min(img.shape) < need:
        raise ValueError(f"image too small for {levels} levels: need >= {need} px per side")
    m = BOUNDARY_MODES[mode]
    current = img
    bandpass = []
    for level in range(1, levels + 1):
        k = _atrous_kernel(level)
        smooth = correlate1d(correlate1d(current, k, axis=1, mode=m), k, axis=0, mode=m)
        bandpass.append(current - smooth)
        current = smooth
    return current, bandpass


def wedge_windows(shape: Tuple[int, int], d: int) -> np.ndarray:
    """``(d, H, W)`` frequency windows in numpy FFT layout, summing to 1."""
    if d not in ALLOWED_DIRECTIONS:
        raise ValueError(f"direction count must be in {ALLOWED_DIRECTIONS}")
    h, w = shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    theta = np.mod(np.arctan2(fy, fx), np.pi)
    spacing = np.pi / d
    flat = (1.0 - WEDGE_ROLLOFF) / 2.0
    windows = np.empty((d, h, w))
    for k in range(d):
        # angular offset from the wedge centre, wrapped to [-pi/2, pi/2)
        t = np.mod(theta - k * spacing + np.pi / 2, np.pi) - np.pi / 2
        u = np.abs(t) / spacing
        ramp = np.clip((u - flat) / WEDGE_ROLLOFF, 0.0, 1.0)
        windows[k] = np.cos(0.5 * np.pi * ramp) ** 2
    windows[:, 0, 0] = 1.0 / d  # orientation undefined at DC
    # remove rounding drift so the partition of unity is exact to ~1 ulp
    windows /= windows.sum(axis=0, keepdims=True)
    return windows


def _pad_width(shape) -> int:
    return max(8, min(shape) // 4)


def nsdfb_decompose(bandpass, d: int, mode: str = "reflect") -> List[np.ndarray]:
    """Split a plane into ``d`` directional planes that sum back to it."""
    plane = as_image(bandpass)
    if mode == "periodic":
        padded, pad = plane, 0
    else:
        pad = _pad_width(plane.shape)
        padded = np.pad(plane, pad, mode="symmetric")
    spectrum = np.fft.fft2(padded)
    windows = wedge_windows(padded.shape, d)
    out = []
    for k in range(d):
        part = np.fft.ifft2(spectrum * windows[k]).real
        if pad:
            part = part[pad:-pad, pad:-pad]
        out.append(np.ascontiguousarray(part))
    return out


def nsct_decompose(image, config: NsctConfig = NsctConfig()) -> SubbandSet:
    img = as_image(image)
    lowpass, bandpass = nsp_decompose(img, config.levels, config.mode)
    # bandpass is finest-first; directions are coarsest-first
    bands = []
    for i, d in enumerate(config.directions):
        plane = bandpass[config.levels - 1 - i]
        bands.append(nsdfb_decompose(plane, d, config.mode))
    h, w = img.shape
    return SubbandSet(lowpass, bands, config, (w, h))


def nsct_reconstruct(subbands: SubbandSet, config: NsctConfig = None) -> np.ndarray:
    config = subbands.config if config is None else config
    if len(subbands.bands) != config.levels:
        raise ValueError("subband scale count does not match config")
    shape = subbands.lowpass.shape
    out = np.array(subbands.lowpass, dtype=np.float64, copy=True)
    for scale, d in zip(subbands.bands, config.directions):
        if len(scale) != d:
            raise ValueError("directional band count does not match config")
        for plane in scale:
            if plane.shape != shape:
                raise ValueError("dimension mismatch between subband planes")
            out += plane
    return out


def estimate_noise_sigma(plane) -> float:
    """Robust noise scale ``median(|x|) / 0.6745``."""
    return float(np.median(np.abs(np.asarray(plane, dtype=np.float64)))) / 0.6745


def classify_pixels(scale: Sequence[np.ndarray], threshold: float):
    """Return ``(noise, strong)`` masks for one scale.

    ``noise`` is per pixel (all directions below the threshold), ``strong``
    is per coefficient, shape ``(d, H, W)``.
    """
    stack = np.abs(np.stack(scale))
    noise = stack.max(axis=0) < threshold
    strong = stack >= threshold
    return noise, strong


def enhance_subbands(subbands: SubbandSet, params: EnhanceParams = EnhanceParams()) -> SubbandSet:
    """Zero noise pixels, keep strong coefficients, amplify weak ones by ``gain``.

    The low-pass plane is passed through untouched.
    """
    new_bands = []
    for scale in subbands.bands:
        sigma = float(np.mean([estimate_noise_sigma(p) for p in scale]))
        threshold = params.noise_factor * sigma
        noise, strong = classify_pixels(scale, threshold)
        stack = np.stack(scale)
        out = np.where(strong, stack, params.gain * stack)
        out[:, noise] = 0.0
        new_bands.append([out[k] for k in range(len(scale))])
    return SubbandSet(subbands.lowpass, new_bands, subbands.config, subbands.original_dims)


def contrast_stretch(lowpass, stretch_lo: float = 1.0, stretch_hi: float = 99.0) -> np.ndarray:
    """Clip to the given percentiles and map that interval back onto [min, max]."""
    plane = as_image(lowpass)
    p_lo, p_hi = np.percentile(plane, [stretch_lo, stretch_hi])
    if p_hi <= p_lo:
        return plane.copy()
    vmin, vmax = plane.min(), plane.max()
    clipped = np.clip(plane, p_lo, p_hi)
    return vmin + (clipped - p_lo) * ((vmax - vmin) / (p_hi - p_lo))


def high_freq_emphasis(original, enhanced) -> np.ndarray:
    original = as_image(original)
    enhanced = as_image(enhanced)
    if original.shape != enhanced.shape:
        raise ValueError("dimension mismatch")
    return rescale_to_range(original + enhanced, 0.0, 255.0)


def dump_subbands(subbands: SubbandSet, directory) -> List[Path]:
    """Write each plane, individually rescaled to [0, 255], as PGM."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    path = directory / "lowpass.pgm"
    save_image(_view(subbands.lowpass), path)
    written.append(path)
    for i, scale in enumerate(subbands.bands):
        for k, plane in enumerate(scale):
            path = directory / f"scale{i}_dir{k:02d}.pgm"
            save_image(_view(plane), path)
            written.append(path)
    return written


def _view(plane):
    if np.ptp(plane) == 0:
        return np.zeros_like(plane)
    return rescale_to_range(plane, 0.0, 255.0)
