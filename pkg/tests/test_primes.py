import math
import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from factorsim.errors import CapacityExceededError, InvalidArgumentError, ParseError
from factorsim.primes import (
    PiOracle,
    load_cache,
    lucy_pi,
    nth_prime,
    pi_exact,
    sieve,
    sieve_window,
    write_cache,
)


def trial_division(n):
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


def test_sieve_small_counts():
    assert sieve(100).pi(100) == 25
    assert sieve(10).pi(1) == 0
    t = sieve(2)
    assert t.pi(2) == 1 and t.is_prime(2)


def test_sieve_rejects_tiny_limit():
    with pytest.raises(InvalidArgumentError):
        sieve(1)


def test_nth_prime_examples():
    t = sieve(2100)
    assert t.nth_prime(304) == 2003
    assert t.nth_prime(305) == 2011
    assert t.nth_prime(1) == 2
    with pytest.raises(CapacityExceededError):
        t.nth_prime(10**6)


def test_is_prime_matches_trial_division():
    t = sieve(10**5)
    flags = [t.is_prime(n) for n in range(10**5 + 1)]
    expect = [trial_division(n) for n in range(10**5 + 1)]
    assert flags == expect


def test_pi_exhaustive_to_1e4():
    t = sieve(10**4)
    count = 0
    for x in range(10**4 + 1):
        count += trial_division(x)
        assert t.pi(x) == count


def test_pi_random_to_1e6_against_sympy():
    t = sieve(10**6)
    rng = random.Random(7)
    xs = [rng.randrange(0, 10**6 + 1) for _ in range(1000)]
    assert [t.pi(x) for x in xs] == [int(sympy.primepi(x)) for x in xs]
    assert np.array_equal(t.pi_many(xs), [t.pi(x) for x in xs])


def test_pi_exact_defaults():
    assert pi_exact(2003) == 304
    assert pi_exact(2) == 1
    assert pi_exact(1) == 0 and pi_exact(0) == 0
    assert nth_prime(304) == 2003


@pytest.mark.parametrize("x, expect", [(10**6, 78498), (10**7, 664579), (10**8, 5761455), (10**9, 50847534)])
def test_lucy_known_values(x, expect):
    assert lucy_pi(x) == expect


def test_lucy_matches_sieve_random():
    t = sieve(10**6)
    rng = random.Random(3)
    for x in [rng.randrange(2, 10**6) for _ in range(1000)]:
        assert lucy_pi(x) == t.pi(x)


def test_full_sieve_at_1e8_matches_lucy():
    t = sieve(10**8)
    rng = random.Random(11)
    for x in [10**8] + [rng.randrange(9 * 10**7, 10**8) for _ in range(5)]:
        assert t.pi(x) == lucy_pi(x)


@given(st.integers(min_value=1, max_value=5000))
@settings(max_examples=200, deadline=None)
def test_nth_prime_round_trip(n):
    t = _TABLE
    p = t.nth_prime(n)
    assert t.pi(p) == n and t.pi(p - 1) == n - 1 and t.is_prime(p)


_TABLE = sieve(60000)


@given(st.integers(0, 59999), st.integers(0, 59999))
@settings(max_examples=200, deadline=None)
def test_pi_monotone(a, b):
    a, b = sorted((a, b))
    assert _TABLE.pi(a) <= _TABLE.pi(b)


def test_sieve_window_matches_sympy():
    lo, hi = 10**9, 10**9 + 5000
    assert sieve_window(lo, hi).tolist() == list(sympy.primerange(lo, hi))


def test_oracle_large_path_and_cache(tmp_path):
    path = tmp_path / "pi.tsv"
    o = PiOracle.for_limit(10**5, threshold=10**5, cache_path=path)
    assert o.pi(10**6) == 78498
    assert o.pi(10**5) == 9592
    o.save()
    text = path.read_text()
    assert text == "1000000\t78498\n"
    again = PiOracle.for_limit(10**5, threshold=10**5, cache_path=path)
    again._ensure_loaded()
    assert again.large_cache == {10**6: 78498}
    assert again.is_prime(1000003) and not again.is_prime(1000001)


def test_cache_rejects_bad_lines(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("10\t4\nfoo bar\n")
    with pytest.raises(ParseError):
        load_cache(p)
    p.write_text("100\t25\n10\t4\n")
    with pytest.raises(ParseError):
        load_cache(p)
    write_cache(p, {100: 25, 10: 4})
    assert load_cache(p) == {10: 4, 100: 25}
