"""Global mean/variance intensity normalization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import as_image, compute_stats


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class NormalizationParams:
    m0: float = 128.0
    var0: float = 2500.0

    def __post_init__(self):
        if not self.var0 >= 0:
            raise ValueError("normalization.var0 must be >= 0")


def normalize(image, params: NormalizationParams = NormalizationParams()) -> np.ndarray:
    """Map pixels to ``m0 +/- sqrt(var0 * (x - M)^2 / VAR)``.

    The sign is ``+`` for pixels strictly above the input mean ``M`` and ``-``
    otherwise, so a pixel equal to ``M`` lands exactly on ``m0``.
    """
    img = as_image(image)
    stats = compute_stats(img)
    # float jitter on a constant image (e.g. after filtering) counts as zero spread
    if stats.variance <= (1e-10 * max(1.0, abs(stats.mean))) ** 2:
        raise DegenerateInputError("degenerate input: zero variance")
    dev = np.sqrt(params.var0 * (img - stats.mean) ** 2 / stats.variance)
    return np.where(img > stats.mean, params.m0 + dev, params.m0 - dev)
