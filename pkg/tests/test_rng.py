import numpy as np

from estimand_lab.rng import make_generator, split_seed, split_seed_array, splitmix64


def test_split_seed_matches_published_splitmix64_stream():
    # first outputs of the SplitMix64 stream seeded with 1234567
    assert split_seed(1234567, 0) == 6457827717110365317
    assert split_seed(1234567, 1) == 3203168211198807973
    assert split_seed(1234567, 2) == 9817491932198370423


def test_split_seed_deterministic_and_distinct():
    assert split_seed(42, 0) == split_seed(42, 0)
    assert split_seed(42, 0) != split_seed(42, 1)
    assert split_seed(42, 0) != split_seed(43, 0)


def test_split_seed_no_collisions_in_a_million_replications():
    seeds = split_seed_array(20260810, 1_000_000)
    assert len(np.unique(seeds)) == 1_000_000


def test_split_seed_array_agrees_with_scalar():
    arr = split_seed_array(99, 64)
    for r in range(64):
        assert int(arr[r]) == split_seed(99, r)


def test_splitmix64_is_in_64_bit_range():
    for s in (0, 1, 2**63, 2**64 - 1):
        assert 0 <= splitmix64(s) < 2**64


def test_generator_reproducible():
    a = make_generator(7).standard_normal(5)
    b = make_generator(7).standard_normal(5)
    assert np.array_equal(a, b)
    c = make_generator(8).standard_normal(5)
    assert not np.array_equal(a, c)
