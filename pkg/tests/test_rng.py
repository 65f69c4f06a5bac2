import math

import numpy as np

from gladssn.rng import Rng, mix64

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64_py(z):
    # independent reimplementation on python ints, straight from the recipe
    z &= MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK
    z ^= z >> 31
    return z


def uniform_py(seed, i):
    z = mix64_py((seed + (i + 1) * GAMMA) & MASK)
    return ((z >> 11) + 1) * 2.0**-53


def test_mix64_matches_pure_python():
    for z in [0, 1, 42, 2**63, MASK, 0xDEADBEEFCAFEBABE]:
        assert int(mix64(np.uint64(z))) == mix64_py(z)


def test_uniform_stream_matches_pure_python():
    seed = 12345
    r = Rng(seed)
    got = r.uniform(size=8)
    want = np.array([uniform_py(seed, i) for i in range(8)])
    np.testing.assert_array_equal(got, want)
    # stream continues from the counter, no overlap
    got2 = r.uniform(size=3)
    want2 = np.array([uniform_py(seed, i) for i in range(8, 11)])
    np.testing.assert_array_equal(got2, want2)


def test_normal_stream_matches_pure_python():
    seed = 7
    r = Rng(seed)
    got = r.normal(size=5)
    us = [uniform_py(seed, i) for i in range(6)]  # 5 draws -> 3 pairs
    want = []
    for u1, u2 in zip(us[0::2], us[1::2]):
        rad = math.sqrt(-2.0 * math.log(u1))
        want.append(rad * math.cos(2.0 * math.pi * u2))
        want.append(rad * math.sin(2.0 * math.pi * u2))
    np.testing.assert_allclose(got, want[:5], rtol=0, atol=1e-15)


def test_same_seed_same_stream():
    a = Rng(99)
    b = Rng(99)
    np.testing.assert_array_equal(a.uniform(size=100), b.uniform(size=100))
    np.testing.assert_array_equal(a.normal(size=(7, 3)), b.normal(size=(7, 3)))


def test_different_seeds_differ():
    a = Rng(1).uniform(size=64)
    b = Rng(2).uniform(size=64)
    assert np.any(a != b)


def test_uniform_range_and_moments():
    u = Rng(3).uniform(size=100000)
    assert np.all(u > 0.0)
    assert np.all(u <= 1.0)
    assert abs(u.mean() - 0.5) < 5e-3
    assert abs(u.var() - 1.0 / 12.0) < 5e-3


def test_normal_moments():
    z = Rng(4).normal(size=100000)
    assert abs(z.mean()) < 2e-2
    assert abs(z.std() - 1.0) < 2e-2


def test_scalar_draws_match_array_head():
    assert Rng(11).uniform() == Rng(11).uniform(size=1)[0]
    assert Rng(11).normal() == Rng(11).normal(size=1)[0]


def test_odd_normal_request_consumes_full_pair():
    # 3 gaussians burn 4 uniforms; the next draw starts at index 4
    r = Rng(5)
    r.normal(size=3)
    assert r.uniform() == uniform_py(5, 4)


def test_seed_wraps_mod_2_64():
    big = 2**64 + 123
    np.testing.assert_array_equal(Rng(big).uniform(size=4),
                                  Rng(123).uniform(size=4))
