import numpy as np
import pytest

from stratawave import asymptotics, continuation
from stratawave.continuation import NoConvergence


def test_newton_refines_the_asymptotic_guess(p_default):
    s = 0.02
    guess = asymptotics.branch_expansion(1, 1, p_default, s)
    point = continuation.newton_correct(guess["lambda"], guess["profile"], s,
                                        p_default, nx=64, ny=97)
    # frozen from a converged run; the corrector must land on the same wave
    assert point.lam == pytest.approx(-1.1205320969224928, abs=1e-8)
    assert point.profile.coeffs[0] == -s
    assert point.profile.coeffs[1] == pytest.approx(-1.82289978e-4, rel=1e-4)
    assert point.residual < 1e-10
    assert len(point.profile.coeffs) >= 8
    assert point.s == s


def test_newton_rejects_negative_amplitude(p_default):
    guess = asymptotics.branch_expansion(1, 1, p_default, 0.01)
    with pytest.raises(ValueError, match="nonnegative"):
        continuation.newton_correct(-1.1, guess["profile"], -0.01, p_default)


def test_newton_basin_guard(p_default):
    s = 0.01
    guess = asymptotics.branch_expansion(1, 1, p_default, s)
    with pytest.raises(NoConvergence, match="basin"):
        continuation.newton_correct(25.0, guess["profile"], s, p_default,
                                    nx=32, ny=33)


def test_trace_branch_validation(p_default):
    with pytest.raises(ValueError):
        continuation.trace_branch(1, 3, p_default, 0.01, 0.005)
    with pytest.raises(ValueError, match="positive"):
        continuation.trace_branch(1, 1, p_default, -0.1, 0.005)
    with pytest.raises(ValueError, match="positive"):
        continuation.trace_branch(1, 1, p_default, 0.01, 0.0)


def test_trace_small_branch(p_default):
    branch = continuation.trace_branch(1, 1, p_default, 0.01, 0.005,
                                       nx=32, ny=49, tol=1e-9)
    s_vals = branch.amplitudes
    assert s_vals[0] == 0.0
    assert s_vals[-1] == pytest.approx(0.01)
    assert np.all(np.diff(s_vals) > 0)
    assert len(branch) == s_vals.size

    first = branch.points[0]
    assert first.lam == pytest.approx(-1.1207441833126341, rel=1e-12)
    assert first.residual == 0.0
    assert first.profile.sup_norm() == 0.0

    # on this branch lambda(s) rises away from the bifurcation point
    assert np.all(np.diff(branch.lambdas) > 0)

    pt = branch.point_at(0.0051)
    assert pt.s == pytest.approx(0.005)
    assert branch.point_at(5.0) is branch.points[-1]

    d = branch.to_dict()
    assert d["k"] == 1 and d["i"] == 1
    assert len(d["points"]) == len(branch.points)
    assert d["points"][1]["branch_id"] == [1, 1]


def test_branch_points_satisfy_the_projected_equation(p_default):
    branch = continuation.trace_branch(1, 1, p_default, 0.01, 0.005,
                                       nx=32, ny=49, tol=1e-9)
    for pt in branch.points[1:]:
        assert pt.residual < 1e-9
