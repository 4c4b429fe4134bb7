from fractions import Fraction

import pytest

from jetforge.errors import AllSamplesSingular
from jetforge.sampling import PRNG_NAME, SplitMix64, radical_aware_point, random_point, sample_points
from jetforge.symcore import parse, symbol

X, Y = symbol("x"), symbol("y")


def test_reference_vectors():
    # published SplitMix64 outputs
    r = SplitMix64(0)
    assert [r.next_u64() for _ in range(2)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4]
    r = SplitMix64(1234567)
    assert [r.next_u64() for _ in range(3)] == [6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_name_is_versioned():
    assert PRNG_NAME == "splitmix64/v1"


def test_determinism_and_ranges():
    a, b = SplitMix64(42), SplitMix64(42)
    xs = [a.rational() for _ in range(200)]
    assert xs == [b.rational() for _ in range(200)]
    assert all(abs(x) <= 20 and x.denominator <= 7 for x in xs)
    assert all(SplitMix64(s).nonzero_rational() != 0 for s in range(50))
    r = SplitMix64(3)
    assert all(-2 <= r.randint(-2, 2) <= 2 for _ in range(100))


def test_radical_aware_points_make_roots_rational():
    e = parse("(1 + x^2)^(1/2) + y", [X, Y])
    rng = SplitMix64(5)
    for _ in range(10):
        pt = radical_aware_point(rng, [X, Y], [e])
        assert isinstance(e.eval_rational(pt), Fraction)


def test_sample_points_rejects_poles():
    e = parse("1/x", [X])
    pts = sample_points(SplitMix64(0), [X], 5, lambda p: e.eval_rational(p) is not None)
    assert len(pts) == 5 and all(p[X] != 0 for p in pts)


def test_all_singular():
    with pytest.raises(AllSamplesSingular):
        sample_points(SplitMix64(0), [X], 1, lambda p: False)


def test_random_point_keys():
    assert set(random_point(SplitMix64(1), [X, Y])) == {X, Y}
