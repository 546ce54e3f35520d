"""Stage composition, JSON configuration and the Frangi-only baseline.

Stage order: homomorphic correction, normalization, NSCT enhancement
(decompose, stretch low-pass, enhance bands, reconstruct, add back to the
normalized image), then Frangi vesselness.

Config JSON mirrors :class:`PipelineConfig`::

    {
      "homomorphic":   {"sigma_lpf": 40.0, "epsilon": 1.0, "reference_size": 512},
      "normalization": {"m0": 128.0, "var0": 2500.0},
      "nsct":          {"levels": 3, "directions": [8, 8, 4], "mode": "reflect"},
      "enhance":       {"noise_factor": 3.0, "gain": 2.0, "stretch_lo": 1.0, "stretch_hi": 99.0},
      "frangi":        {"alpha": 0.5, "beta": 15.0, "sigma_min": 0.5, "sigma_max": 15.0,
                        "sigma_step": 0.5, "polarity": "dark_vessels"},
      "stage_toggles": {"homomorphic": true, "normalize": true, "nsct": true}
    }

Every section and key is optional; unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .frangi import FrangiParams, VesselnessMap, frangi_filter
from .homomorphic import HomomorphicParams, homomorphic_filter
from .imaging import as_image
from .normalize import NormalizationParams, normalize
from .nsct import (EnhanceParams, NsctConfig, contrast_stretch, dump_subbands,
                   enhance_subbands, high_freq_emphasis, nsct_decompose, nsct_reconstruct)

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid or unknown configuration field; ``field`` names it."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class StageError(RuntimeError):
    """Numerical failure inside one pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.__cause__ = cause


@dataclass(frozen=True)
class StageToggles:
    homomorphic: bool = True
    normalize: bool = True
    nsct: bool = True

    @classmethod
    def all_off(cls) -> "StageToggles":
        return cls(False, False, False)


@dataclass(frozen=True)
class PipelineConfig:
    homomorphic: HomomorphicParams = field(default_factory=HomomorphicParams)
    normalization: NormalizationParams = field(default_factory=NormalizationParams)
    nsct: NsctConfig = field(default_factory=NsctConfig)
    enhance: EnhanceParams = field(default_factory=EnhanceParams)
    frangi: FrangiParams = field(default_factory=FrangiParams)
    stage_toggles: StageToggles = field(default_factory=StageToggles)

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        out = {}
        for f in dataclasses.fields(self):
            section = dataclasses.asdict(getattr(self, f.name))
            for k, v in section.items():
                if isinstance(v, tuple):
                    section[k] = list(v)
                elif hasattr(v, "value"):
                    section[k] = v.value
            out[f.name] = section
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        sections = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for name, values in data.items():
            if name not in sections:
                raise ConfigError(name, "unknown config section")
            if not isinstance(values, dict):
                raise ConfigError(name, "section must be a JSON object")
            section_type = sections[name].default_factory
            known = {f.name for f in dataclasses.fields(section_type)}
            for key in values:
                if key not in known:
                    raise ConfigError(f"{name}.{key}", "unknown config key")
            try:
                kwargs[name] = section_type(**values)
            except (TypeError, ValueError) as exc:
                raise ConfigError(name, str(exc)) from exc
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(data)

    def with_overrides(self, overrides: Dict[str, Any]) -> "PipelineConfig":
        """Apply dotted ``section.key`` overrides on top of this config."""
        data = self.to_dict()
        for dotted, value in overrides.items():
            section, _, key = dotted.partition(".")
            if not key or section not in data:
                raise ConfigError(dotted, "override must be section.key with a known section")
            if key not in data[section]:
                raise ConfigError(dotted, "unknown config key")
            log.info("override %s = %r (was %r)", dotted, value, data[section][key])
            data[section][key] = value
        return PipelineConfig.from_dict(data)

    def fingerprint(self) -> str:
        """Stable short hash of every parameter."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except Exception as exc:
        raise StageError(name, exc) from exc


def enhance_image(image, config: PipelineConfig = PipelineConfig(),
                  dump_dir: Optional[Path] = None) -> np.ndarray:
    """Everything before Frangi; returns the image handed to the vesselness stage."""
    img = as_image(image)
    toggles = config.stage_toggles
    if toggles.homomorphic:
        img = _stage("homomorphic", homomorphic_filter, img, config.homomorphic)
    if toggles.normalize:
        img = _stage("normalize", normalize, img, config.normalization)
    if toggles.nsct:
        img = _stage("nsct", _nsct_enhance, img, config, dump_dir)
    return img


def _nsct_enhance(img, config: PipelineConfig, dump_dir):
    bands = nsct_decompose(img, config.nsct)
    if dump_dir is not None:
        dump_subbands(bands, dump_dir)
    enhanced = enhance_subbands(bands, config.enhance)
    enhanced.lowpass = contrast_stretch(bands.lowpass, config.enhance.stretch_lo,
                                        config.enhance.stretch_hi)
    recon = nsct_reconstruct(enhanced, config.nsct)
    return high_freq_emphasis(img, recon)


def enhance_full(image, config: PipelineConfig = PipelineConfig(),
                 dump_dir: Optional[Path] = None) -> Tuple[np.ndarray, VesselnessMap]:
    enhanced = enhance_image(image, config, dump_dir)
    vessels = _stage("frangi", frangi_filter, enhanced, config.frangi)
    return enhanced, vessels


def frangi_only(image, params: FrangiParams = FrangiParams()) -> VesselnessMap:
    return _stage("frangi", frangi_filter, as_image(image), params)
