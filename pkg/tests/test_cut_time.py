import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from se2geodesics.classification import vertical_period
from se2geodesics.cut_time import (
    MAX_GRID_POINTS,
    SearchConfig,
    equioptimality_check,
    estimate_cut_time,
    group_distance,
    refine_maxwell,
    shift_identity_check,
)
from se2geodesics.flow import Covector, NotNaturalError
from se2geodesics.group import GroupElement

SMALL = SearchConfig(n_alpha=72, n_h3=24, horizon=6.0)


def _rhs(t, s):
    h1, h2, h3, x, y, th = s
    return [h2 * h3, -h1 * h3, -h1 * h2, h1 * np.cos(th), h1 * np.sin(th), h2]


def _oracle_endpoint(p, t):
    sol = solve_ivp(_rhs, (0, t), [*p, 0, 0, 0], method="DOP853", rtol=1e-12, atol=1e-13)
    return GroupElement(*sol.y[3:, -1])


def oracle_meeting_time(p, q, t_lo, t_hi):
    """Independent oracle: equal-time meeting of two given geodesics via scipy."""
    res = minimize_scalar(
        lambda t: group_distance(_oracle_endpoint(p, t), _oracle_endpoint(q, t)) ** 2,
        bounds=(t_lo, t_hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return res.x, math.sqrt(res.fun)


# group distance


def test_group_distance_examples():
    g = GroupElement(0.3, -1.0, 2.0)
    assert group_distance(g, g) == 0.0
    assert group_distance(GroupElement(0, 0, 0), GroupElement(0, 0, 2 * math.pi)) == pytest.approx(0, abs=1e-15)
    assert group_distance(GroupElement(1, 0, 0), GroupElement(0, 0, 0)) == 1.0


def test_group_distance_short_arc():
    d = group_distance(GroupElement(0, 0, 3.0), GroupElement(0, 0, -3.0))
    assert d == pytest.approx(2 * math.pi - 6.0)


# configuration


def test_default_config_values():
    c = SearchConfig()
    assert (c.n_alpha, c.n_h3, c.h3_max, c.horizon, c.time_step, c.delta, c.separation) == (
        720,
        200,
        4.0,
        10.0,
        5e-3,
        2e-2,
        1e-3,
    )
    ci = SearchConfig.ci()
    assert (ci.n_alpha, ci.n_h3, ci.horizon) == (180, 50, 7.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_alpha=1),
        dict(n_h3=1),
        dict(horizon=0.0),
        dict(time_step=-1e-3),
        dict(delta=0.0),
        dict(h3_max=math.nan),
        dict(time_step=10.0),
        dict(n_alpha=MAX_GRID_POINTS, n_h3=2),
        dict(time_step=1e-6),
    ],
)
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        SearchConfig(**kwargs)


def test_config_json_round_trip():
    c = SearchConfig.ci()
    assert SearchConfig(**json.loads(json.dumps(c.to_json()))) == c


# estimator


def test_rejects_non_natural():
    with pytest.raises(NotNaturalError):
        estimate_cut_time(Covector(0.5, 0.5, 0.0), SMALL)


def test_rotation_meets_reverse_rotation_at_pi():
    est = estimate_cut_time(Covector(0, 1, 0), SMALL)
    assert abs(est.value - math.pi) <= 1e-6
    assert est.lower <= math.pi <= est.upper
    assert est.partner is not None and est.partner.h2 == pytest.approx(-1.0)


@pytest.mark.parametrize("horizon", [5.0, 10.0, 20.0])
def test_straight_line_never_matched(horizon):
    est = estimate_cut_time(Covector(1, 0, 0), SearchConfig(n_alpha=72, n_h3=24, horizon=horizon))
    assert est.horizon_exceeded
    assert est.to_json()["value"] == "horizon_exceeded"


@pytest.mark.parametrize("p", [(0, 1, 0), (0.6, 0.8, 0.3), (0.6, 0.8, 1.0)])
def test_bracket_invariants(p):
    est = estimate_cut_time(Covector(*p), SMALL)
    assert est.lower <= est.value <= est.upper
    assert est.upper - est.lower <= 2 * SMALL.time_step
    assert est.match_tol == SMALL.delta
    assert est.grid_spec["n_alpha"] == 72


def test_json_report_shape():
    est = estimate_cut_time(Covector(0.6, 0.8, 0.3), SMALL)
    d = json.loads(json.dumps(est.to_json()))
    assert {"p", "value", "lower", "upper", "config"} <= set(d)
    assert d["config"]["delta"] == SMALL.delta


def test_noninflexional_matches_independent_oracle():
    p = Covector(0.6, 0.8, 0.3)
    est = estimate_cut_time(p, SMALL)
    t_star, dist = oracle_meeting_time(tuple(p), (0.6, -0.8, 0.3), 3.0, 4.5)
    assert dist <= 1e-6
    assert abs(est.value - t_star) <= 2 * SMALL.time_step
    # the partner of this covector meets it after half a vertical period
    assert abs(est.value - 0.5 * vertical_period(p)) <= 2 * SMALL.time_step


def test_inflexional_estimate_is_a_maxwell_point():
    p = Covector(0.6, 0.8, 1.0)
    est = estimate_cut_time(p, SMALL)
    assert est.refined
    q = est.partner
    assert np.linalg.norm(q.as_array() - p.as_array()) >= SMALL.separation
    d = group_distance(_oracle_endpoint(tuple(p), est.value), _oracle_endpoint(tuple(q), est.value))
    assert d <= 1e-8


def test_reflection_symmetry():
    a = estimate_cut_time(Covector(0.6, 0.8, 1.0), SMALL)
    b = estimate_cut_time(Covector(0.6, -0.8, -1.0), SMALL)
    assert abs(a.value - b.value) <= max(a.width, b.width)


def test_refinement_does_not_raise_estimate():
    coarse = estimate_cut_time(Covector(0.6, 0.8, 1.0), SMALL)
    fine = estimate_cut_time(Covector(0.6, 0.8, 1.0), SearchConfig(n_alpha=144, n_h3=48, horizon=6.0))
    assert fine.value <= coarse.value + coarse.width


def test_critical_covector_consistent():
    est = estimate_cut_time(Covector(0.6, 0.8, 0.8), SMALL)
    assert est.horizon_exceeded


def test_refine_maxwell_from_nearby_seed():
    sol = refine_maxwell(Covector(0.6, 0.8, 0.3), Covector(0.62, -0.78, 0.32), 3.6, 5e-3, 6.0)
    assert sol is not None
    q, t = sol
    assert np.allclose(q.as_array(), [0.6, -0.8, 0.3], atol=1e-8)
    assert t == pytest.approx(3.6277678736, abs=1e-8)


def test_refine_maxwell_rejects_trivial_meeting():
    assert refine_maxwell(Covector(0.6, 0.8, 0.3), Covector(1.0, 0.0, -3.8), 0.4, 5e-3, 6.0, t_min=0.05) is None


def test_deterministic():
    a = estimate_cut_time(Covector(0.6, 0.8, 1.0), SMALL).to_json()
    b = estimate_cut_time(Covector(0.6, 0.8, 1.0), SMALL).to_json()
    assert a == b


# equioptimality


def test_equioptimality_equilibrium():
    rep = equioptimality_check(Covector(1, 0, 0), [0.0, 1.0, 2.0], SMALL)
    assert rep.passed and all(e.horizon_exceeded for e in rep.estimates)


def test_equioptimality_rotation():
    rep = equioptimality_check(Covector(0, 1, 0), [0.0, 1.0, 2.0], SMALL)
    assert rep.passed
    assert all(abs(e.value - math.pi) <= 0.05 for e in rep.estimates)


@pytest.mark.parametrize("p", [(0.6, 0.8, 0.3), (0.6, 0.8, 1.0)])
def test_equioptimality_generic(p):
    rep = equioptimality_check(Covector(*p), [0.0, 0.5, 1.0], SMALL)
    assert rep.passed, rep.to_json()
    assert rep.max_deviation <= 2 * SMALL.time_step


# shift identity


def test_shift_identity_zero_tau():
    assert shift_identity_check(Covector(0.6, 0.8, 1.0), 0.0, 5.0) <= 1e-12


def test_shift_identity_straight_line():
    assert shift_identity_check(Covector(1, 0, 0), 2.7, 5.0) <= 1e-10


def test_shift_identity_generic():
    assert shift_identity_check(Covector(0.6, 0.8, 1.0), 1.3, 5.0) <= 1e-6
    assert shift_identity_check(Covector(0.6, 0.8, 1.0), -2.1, 5.0) <= 1e-6
