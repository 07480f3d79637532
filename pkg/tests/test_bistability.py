import math

import numpy as np
import pytest

from optomech_switch import bistability_curve, solve_transmitted_power, turning_points
from optomech_switch.bistability import input_power_of_ptrans
from conftest import CLEAN_BISTABLE, FIG_BISTABLE, random_params


def test_bistable_window_exists():
    curve = bistability_curve(FIG_BISTABLE, np.linspace(0.01, 1.0, 60), 0.10)
    counts = curve.root_counts()
    assert counts.max() == 3
    assert len(curve.knees) == 2


def test_upper_knee_decreases_with_rocking():
    knees = [max(bistability_curve(FIG_BISTABLE, np.linspace(0.01, 1.0, 5), c).knees)
             for c in (0.10, 0.36, 0.49)]
    assert knees[0] > knees[1] > knees[2]


def test_knees_bracket_three_root_region():
    c = 0.10
    lo, hi = sorted(turning_points(FIG_BISTABLE, c))[0][0], \
        sorted(turning_points(FIG_BISTABLE, c))[-1][0]
    lo, hi = sorted(inp for inp, _ in turning_points(FIG_BISTABLE, c))
    for ip in (0.5 * lo, lo + 0.3 * (hi - lo), hi * 1.2):
        n = sum(m for _, m in solve_transmitted_power(FIG_BISTABLE, math.sqrt(ip), c))
        assert n == (3 if lo < ip < hi else 1)


def test_chi_zero_single_branch_no_knees():
    p = FIG_BISTABLE.with_(chi=0.0)
    curve = bistability_curve(p, np.linspace(0.01, 1.0, 20), 0.0)
    assert np.all(curve.root_counts() == 1)
    assert curve.knees == ()


def test_input_power_inverts_the_cubic(rng):
    for _ in range(20):
        p = random_params(rng)
        eta0 = rng.uniform(0.05, 1.0)
        c = rng.uniform(0.0, 0.4)
        for root, _ in solve_transmitted_power(p, eta0, c):
            if root < 1e-12:
                continue
            back = input_power_of_ptrans(p, c, root)
            assert back == pytest.approx(eta0**2, rel=1e-8, abs=1e-12)


def test_middle_branch_unstable_outer_stable_clean_set():
    lo, hi = sorted(inp for inp, _ in turning_points(CLEAN_BISTABLE, 0.0))
    curve = bistability_curve(CLEAN_BISTABLE, np.linspace(0.5 * lo, 1.3 * hi, 40), 0.0)
    for ip, branches in curve.points:
        if len(branches) == 3:
            assert not branches[1].stable
            assert branches[0].stable and branches[2].stable
        elif len(branches) == 1:
            assert branches[0].stable


def test_middle_branch_unstable_published_set():
    """Instability of the middle branch holds on the published set too."""
    curve = bistability_curve(FIG_BISTABLE, np.linspace(0.15, 0.7, 25), 0.10)
    mids = [b[1] for _, b in curve.points if len(b) == 3]
    assert mids and all(not m.stable for m in mids)


def test_grid_validation():
    with pytest.raises(ValueError):
        bistability_curve(FIG_BISTABLE, [0.5], 0.0)
    with pytest.raises(ValueError):
        bistability_curve(FIG_BISTABLE, [0.5, 0.4], 0.0)
    with pytest.raises(ValueError):
        bistability_curve(FIG_BISTABLE, [-0.1, 0.5], 0.0)
