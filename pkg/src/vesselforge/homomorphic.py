"""Log-domain Gaussian illumination correction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._filters import gaussian_kernel, separable
from .imaging import as_image


@dataclass(frozen=True)
class HomomorphicParams:
    """Parameters for :func:`homomorphic_filter`.

    ``sigma_lpf`` is expressed for an image whose short side is
    ``reference_size`` pixels and scaled linearly with the actual short side.
    Set ``reference_size`` to ``None`` to use ``sigma_lpf`` verbatim.
    """

    sigma_lpf: float = 40.0
    epsilon: float = 1.0
    reference_size: Optional[int] = 512

    def __post_init__(self):
        if not self.sigma_lpf > 0:
            raise ValueError("homomorphic.sigma_lpf must be > 0")
        if not self.epsilon > 0:
            raise ValueError("homomorphic.epsilon must be > 0")
        if self.reference_size is not None and self.reference_size <= 0:
            raise ValueError("homomorphic.reference_size must be positive or null")

    def effective_sigma(self, shape) -> float:
        if self.reference_size is None:
            return float(self.sigma_lpf)
        return float(self.sigma_lpf) * min(shape) / self.reference_size


def gaussian_lowpass(image, sigma: float, mode: str = "reflect") -> np.ndarray:
    """Separable sampled-Gaussian blur, radius ``ceil(4 sigma)``, unit-sum kernel."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    k = gaussian_kernel(sigma)
    return separable(as_image(image), k, k, mode=mode)


def homomorphic_filter(image, params: HomomorphicParams = HomomorphicParams()) -> np.ndarray:
    """Remove the low-frequency log-intensity component, keeping the maximum intensity.

    The additive constant is chosen so that ``max(output) == max(image)``.
    """
    img = as_image(image)
    if img.min() < 0:
        raise ValueError("homomorphic_filter requires non-negative pixels")
    eps = params.epsilon
    log_img = np.log(img + eps)
    detail = log_img - gaussian_lowpass(log_img, params.effective_sigma(img.shape))
    c_n = np.log(img.max() + eps) - detail.max()
    out = np.exp(detail + c_n) - eps
    return np.maximum(out, 0.0)
