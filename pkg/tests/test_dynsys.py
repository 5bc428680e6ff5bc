"""Maps, trajectories, recurrences, transforms, canonical form, noise."""

import math

import numpy as np
import pytest

from caterpillar.dynsys import (CoordinateTransform, NoiseChannel, Trajectory,
                                affine_map, apply_noise, canonical_check,
                                check_inverse, conjugate_map, constant_rule,
                                generate_trajectory, identity_transform,
                                lift_timeseries, linear_rule, pack_state,
                                permutation_map, permutation_rule,
                                polar_transform, quantized_map, real_map,
                                repeat_rule, rotation_map, step_map,
                                step_timeseries, table_transform,
                                trajectory_consistent, unpack_state,
                                TimeSeriesMap, xor_rule)
from caterpillar.streams import stream


def test_pack_unpack_roundtrip():
    rng = stream(7, "pack")
    for _ in range(50):
        state = tuple(int(v) for v in rng.integers(0, 16, size=3))
        assert unpack_state(pack_state(state, 4), 3, 4) == state


def test_step_identity_map():
    ident = affine_map([[1]], [0], 8)
    assert step_map(ident, (5,)) == (5,)


def test_step_affine_wraps():
    inc = affine_map([[1]], [1], 8)
    assert step_map(inc, (255,)) == (0,)


def test_step_permutation_table():
    table = list(range(8))
    table[6], table[2] = 2, 6
    pmap = permutation_map(table, 1, 3)
    assert step_map(pmap, (6,)) == (2,)


def test_step_dimension_mismatch():
    inc = affine_map([[1]], [1], 8)
    with pytest.raises(ValueError):
        step_map(inc, (1, 2))


def test_permutation_map_rejects_non_bijection():
    with pytest.raises(ValueError):
        permutation_map([0, 0, 1, 2], 1, 2)


def test_quantized_map_rounds_half_even():
    # outputs land exactly on .5 boundaries: 0.5 -> 0, 1.5 -> 2
    qmap = quantized_map(lambda s: (s[0] + 0.5,), 1, 4, scale=1.0)
    assert step_map(qmap, (0,)) == (0,)
    assert step_map(qmap, (1,)) == (2,)


def test_trajectory_identity():
    ident = affine_map([[1]], [0], 8)
    traj = generate_trajectory(ident, (3,), 2)
    assert traj.states == [(3,), (3,), (3,)]


def test_trajectory_counter():
    inc = affine_map([[1]], [1], 2)
    traj = generate_trajectory(inc, (0,), 3)
    assert traj.states == [(0,), (1,), (2,), (3,)]
    assert trajectory_consistent(inc, traj)


def test_trajectory_revisits_on_permutation_cycle():
    rng = stream(11, "perm")
    table = [int(v) for v in rng.permutation(16)]
    pmap = permutation_map(table, 1, 4)
    traj = generate_trajectory(pmap, (5,), 16)
    assert (5,) in traj.states[1:]


def test_trajectory_negative_steps():
    with pytest.raises(ValueError):
        generate_trajectory(affine_map([[1]], [0], 8), (0,), -1)


# -- scalar recurrences -------------------------------------------------------

def test_timeseries_repeat_last():
    assert step_timeseries(repeat_rule(1, 8), [7]) == 7


def test_timeseries_xor():
    assert step_timeseries(xor_rule(2, 8), [3, 5]) == 6


def test_timeseries_modular_sum():
    assert step_timeseries(linear_rule([1, 1], 0, 4), [9, 9]) == 2


def test_timeseries_short_history():
    with pytest.raises(ValueError):
        step_timeseries(xor_rule(2, 8), [3])


def test_lift_identity_order_one():
    lifted = lift_timeseries(repeat_rule(1, 8))
    assert lifted.dimension == 1
    assert step_map(lifted, (9,)) == (9,)


@pytest.mark.parametrize("ts,seed_hist,steps", [
    (xor_rule(2, 8), [1, 2], 5),
    (linear_rule([1, 1, 1], 0, 8), [3, 7, 11], 100),
])
def test_lift_matches_scalar_stream(ts, seed_hist, steps):
    window = list(seed_hist)
    scalar = []
    for _ in range(steps):
        nxt = step_timeseries(ts, window)
        scalar.append(nxt)
        window = window[1:] + [nxt]
    traj = generate_trajectory(lift_timeseries(ts), tuple(reversed(seed_hist)), steps)
    assert [s[0] for s in traj.states[1:]] == scalar


# -- conjugation --------------------------------------------------------------

def test_conjugate_by_identity():
    inc = affine_map([[1]], [1], 4)
    phi = conjugate_map(inc, identity_transform(1, 4))
    for x in range(16):
        assert step_map(phi, (x,)) == step_map(inc, (x,))


def test_conjugate_by_coordinate_swap():
    w = 3
    fmap = affine_map([[1, 0], [0, 1]], [1, 0], w)  # (a, b) -> (a + 1, b)
    swap = CoordinateTransform(lambda s: (s[1], s[0]), lambda s: (s[1], s[0]), 2, w)
    phi = conjugate_map(fmap, swap)
    for a in range(8):
        for b in range(8):
            assert step_map(phi, (a, b)) == (a, (b + 1) % 8)


def test_conjugate_table_covariance_exhaustive():
    rng = stream(13, "conj")
    dim, w = 2, 3
    size = 1 << (dim * w)
    fmap = permutation_map([int(v) for v in rng.permutation(size)], dim, w)
    xf = table_transform([int(v) for v in rng.permutation(size)], dim, w)
    phi = conjugate_map(fmap, xf)
    for packed in range(size):
        x = unpack_state(packed, dim, w)
        assert xf.forward(step_map(fmap, x)) == step_map(phi, xf.forward(x))


def test_double_conjugation_restores_map():
    rng = stream(17, "conj2")
    size = 256
    fmap = permutation_map([int(v) for v in rng.permutation(size)], 1, 8)
    table = [int(v) for v in rng.permutation(size)]
    xf = table_transform(table, 1, 8)
    inv_table = [0] * size
    for i, v in enumerate(table):
        inv_table[v] = i
    back = conjugate_map(conjugate_map(fmap, xf), table_transform(inv_table, 1, 8))
    for x in range(size):
        assert step_map(back, (x,)) == step_map(fmap, (x,))


def test_conjugate_dimension_mismatch():
    with pytest.raises(ValueError):
        conjugate_map(affine_map([[1]], [0], 4), identity_transform(2, 4))


def test_table_transform_inverse_exact():
    rng = stream(19, "xf")
    xf = table_transform([int(v) for v in rng.permutation(64)], 2, 3)
    states = [unpack_state(p, 2, 3) for p in range(64)]
    assert check_inverse(xf, states)


# -- canonical form -----------------------------------------------------------

def test_canonical_identity_on_constant_trajectory():
    traj = Trajectory([(4.0, 2.0)] * 5)
    report = canonical_check(identity_transform(2), traj)
    assert all(report.constant)


def test_canonical_rotation_polar():
    omega = math.pi / 2
    traj = generate_trajectory(rotation_map(omega), (1.0, 0.0), 1000)
    report = canonical_check(polar_transform(omega), traj, tol=1e-9)
    assert report.constant[0]
    assert report.time_uniform
    assert report.time_increment == pytest.approx(1.0, abs=1e-9)


def test_canonical_wrong_transform_flags_false():
    omega = math.pi / 2
    traj = generate_trajectory(rotation_map(omega), (1.0, 0.0), 100)
    report = canonical_check(identity_transform(2), traj)
    assert not report.constant[0]
    assert not report.time_uniform


def test_canonical_short_trajectory_rejected():
    with pytest.raises(ValueError):
        canonical_check(identity_transform(1), Trajectory([(0,), (1,)]))


# -- observation noise --------------------------------------------------------

def test_noise_q1_is_identity():
    ch = NoiseChannel(1.0, 8)
    rng = stream(23, "noise")
    assert all(apply_noise(ch, w, rng) == w for w in (0, 170, 255))


@pytest.mark.parametrize("q", [0.5, 0.9])
def test_noise_flip_rate(q):
    ch = NoiseChannel(q, 8)
    rng = stream(29, f"noise{q}")
    n = 100_000 // 8
    flipped = 0
    for _ in range(n):
        flipped += bin(apply_noise(ch, 0, rng)).count("1")
    bits = n * 8
    rate = flipped / bits
    se = math.sqrt(q * (1 - q) / bits) if q < 1 else 0.0
    assert abs(rate - (1 - q)) <= 3 * max(se, 1e-3)


def test_noise_uniform_at_half():
    # chi-square sanity: at q = 1/2 the output word distribution is uniform
    ch = NoiseChannel(0.5, 3)
    rng = stream(31, "chi")
    counts = np.zeros(8)
    n = 8000
    for _ in range(n):
        counts[apply_noise(ch, 5, rng)] += 1
    chi2 = float(((counts - n / 8) ** 2 / (n / 8)).sum())
    assert chi2 < 24.32  # df=7, p=0.001


def test_noise_channel_validation():
    with pytest.raises(ValueError):
        NoiseChannel(0.4, 8)
    with pytest.raises(ValueError):
        NoiseChannel(1.1, 8)
