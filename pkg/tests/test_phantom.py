import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vesselforge import phantom as ph
from vesselforge.imaging import load_image, load_mask


def test_empty_spec_is_constant():
    img, mask = ph.generate_phantom(ph.PhantomSpec(40, 30, background_level=90.0))
    assert img.shape == (30, 40)
    assert np.all(img == 90.0) and not mask.any()


def test_straight_tube_geometry():
    spec = ph.PhantomSpec(64, 64, (ph.Tube(((-10, 32), (80, 32)), 3, 80),), (), 0.0, 180.0)
    img, mask = ph.generate_phantom(spec)
    assert np.all(img.argmin(axis=0) == 32)
    assert img[32, 10] == pytest.approx(100.0)
    rows = np.flatnonzero(mask.any(axis=1))
    assert rows.tolist() == list(range(29, 36))
    assert mask[29:36].all()


def test_determinism():
    spec = ph.benchmark_suite()[3]
    a, ma = ph.generate_phantom(spec)
    b, mb = ph.generate_phantom(spec)
    assert a.tobytes() == b.tobytes() and np.array_equal(ma, mb)


def test_noise_follows_documented_generator():
    spec = ph.PhantomSpec(16, 8, noise_sigma=2.0, background_level=100.0, seed=42)
    img, _ = ph.generate_phantom(spec)
    expected = 100.0 + 2.0 * np.random.Generator(np.random.PCG64(42)).standard_normal((8, 16))
    np.testing.assert_array_equal(img, expected)


def test_bias_bump_peak():
    spec = ph.PhantomSpec(64, 64, (), (ph.BiasBump((20, 30), 10, 50),), 0.0, 100.0)
    img, _ = ph.generate_phantom(spec)
    assert img[30, 20] == pytest.approx(150.0)
    assert img.argmax() == 30 * 64 + 20


@pytest.mark.parametrize("kwargs", [
    dict(tubes=(dict(points=((0, 0), (1, 1)), width=0, depth=5),)),
    dict(tubes=(dict(points=((0, 0),), width=2, depth=5),)),
    dict(tubes=(dict(points=((0, 0), (9, 9)), width=2, depth=300),), background_level=200),
    dict(width=0),
    dict(noise_sigma=-1),
])
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        ph.PhantomSpec(**kwargs)


def test_json_round_trip(tmp_path):
    spec = ph.benchmark_suite()[1]
    (tmp_path / "s.json").write_text(json.dumps(spec.to_dict()))
    assert ph.PhantomSpec.from_json(tmp_path / "s.json") == spec
    with pytest.raises(ValueError, match="unknown"):
        ph.PhantomSpec.from_dict({"colour": 1})


def test_write_phantom(tmp_path):
    spec = ph.straight_tube_spec(3, size=64)
    image_p, mask_p = ph.write_phantom(spec, tmp_path / "out")
    img, mask = ph.generate_phantom(spec)
    np.testing.assert_array_equal(load_mask(mask_p), mask)
    assert np.abs(load_image(image_p) - img).max() <= 0.5


def test_suite_covers_requested_ranges():
    specs = ph.benchmark_suite()
    assert len(specs) == 10
    amps = [max(abs(b.amplitude) for b in s.bias_field) for s in specs]
    noises = [s.noise_sigma for s in specs]
    widths = {t.width for s in specs for t in s.tubes}
    assert 40 <= min(amps) and max(amps) <= 80
    assert min(noises) == 5 and max(noises) == 15
    assert widths <= {2.0, 3.0, 4.0, 5.0, 6.0} and {2.0, 6.0} <= widths


@settings(max_examples=20, deadline=None)
@given(st.floats(10, 60), st.floats(0, 10), st.floats(1.5, 6), st.integers(0, 1000))
def test_mask_darker_than_background(depth, noise, width, seed):
    if depth <= 2 * noise:
        return
    tube = ph.Tube(((0, 10), (64, 50)), width, depth)
    img, mask = ph.generate_phantom(ph.PhantomSpec(64, 64, (tube,), (), noise, 150.0, seed))
    assert img[mask].mean() < img[~mask].mean()
