from fractions import Fraction as F

import mpmath as mp
import pytest

import liouville as lv
from liouville.errors import InputError


def spec_I(n0=2, delta="1", horizon=30, eps=F(1, 10)):
    return lv.RegimeSpec(regime="I", p=F(2), q=F(1), N=3, horizon=horizon,
                         eps=eps, n0=n0, delta=mp.mpf(delta))


# ---------------------------------------------------------------------------
# build


def test_build_regime_I_closed_forms():
    built = lv.build(spec_I())
    # independent high-precision evaluation of the shell and solution laws
    assert abs(built.tree.weight(0) - mp.mpf("2.2700753357346468067")) < mp.mpf("1e-15")
    assert abs(built.u.value(0) - mp.mpf("0.84932180028801904272")) < mp.mpf("1e-15")
    w5 = mp.mpf(7) ** mp.mpf("1.5") * mp.ln(7) ** mp.mpf("0.6")
    assert abs(built.tree.weight(5) - w5) < mp.mpf("1e-25") * w5


def test_build_regime_IV_solution_shape():
    spec = lv.RegimeSpec(regime="IV", p=F(-2), q=F(1), N=3, horizon=20,
                         lam=mp.mpf(1), n0=2, delta=mp.mpf(2))
    built = lv.build(spec)
    for n in range(20):
        expected = mp.mpf(2) / (n + 2) + 2
        assert abs(built.u.value(n) - expected) < mp.mpf("1e-30")
        assert built.u.value(n + 1) < built.u.value(n)


def test_build_regime_V1_unit_decay():
    spec = lv.RegimeSpec(regime="V1", p=F(1, 2), q=F(1, 2), N=3, horizon=10,
                         lam=mp.mpf(4))
    built = lv.build(spec)
    for n in range(11):
        assert abs(built.u.value(n) - mp.e ** (-n)) < mp.mpf("1e-28")


def test_build_regime_V2_two_sided_shape():
    spec = lv.RegimeSpec(regime="V2", p=F(2), q=F(-1), N=3, horizon=5, lam=mp.mpf(4))
    built = lv.build(spec)
    assert isinstance(built.tree, lv.TwoSidedRadialTree)
    assert built.u.lo == -6 and built.u.hi == 6
    # decaying outward on the positive arm, growing on the negative one
    assert built.u.value(3) < built.u.value(0) < built.u.value(-3)


def test_build_rejects_region_mismatch():
    with pytest.raises(InputError):
        lv.build(lv.RegimeSpec(regime="I", p=F(-2), q=F(1), N=3, horizon=10,
                               eps=F(1, 10), n0=2, delta=mp.mpf(1)))


def test_build_rejects_small_n0():
    with pytest.raises(InputError):
        lv.build(spec_I(n0=1))


# ---------------------------------------------------------------------------
# delta0


def test_delta0_regime_I_value_and_direction():
    bound = lv.delta0(spec_I())
    assert bound.direction == "upper"
    assert abs(bound.value - mp.mpf("1.4001843760509165114")) < mp.mpf("1e-15")


def test_delta0_regime_I_difference_factors_cancel_at_q1():
    # with q = 1 the two difference factors cancel: delta0 = 2^(1/4) g(n0)
    bound = lv.delta0(spec_I())
    g2 = mp.sqrt(2 * mp.ln(2))
    assert abs(bound.value - 2 ** mp.mpf("0.25") * g2) < mp.mpf("1e-30")


def test_delta0_regime_I_is_exact_root_threshold():
    # at delta = delta0 the root margin vanishes; slightly above it fails
    bound = lv.delta0(spec_I())
    eps = mp.mpf("1e-6")
    for factor, expect_ok in ((1 - eps, True), (1 + eps, False)):
        built = lv.build(spec_I(delta=bound.value * factor))
        margin = lv.margin_at(built.tree, built.u, F(2), F(1), 0)
        assert (margin <= 0) == expect_ok


def test_delta0_regime_IV_direction_lower():
    spec = lv.RegimeSpec(regime="IV", p=F(-2), q=F(1), N=3, horizon=10,
                         lam=mp.mpf(1), n0=2, delta=mp.mpf(1))
    bound = lv.delta0(spec)
    assert bound.direction == "lower"
    expected = 2 ** (1 / (2 * mp.mpf(-2))) / (1 + mp.mpf(1) / 2)
    assert abs(bound.value - expected) < mp.mpf("1e-30")


def test_delta0_regime_IV_is_root_threshold():
    bound = lv.delta0(lv.RegimeSpec(regime="IV", p=F(-2), q=F(1), N=3, horizon=10,
                                    lam=mp.mpf(1), n0=2, delta=mp.mpf(1)))
    eps = mp.mpf("1e-6")
    for factor, expect_ok in ((1 + eps, True), (1 - eps, False)):
        spec = lv.RegimeSpec(regime="IV", p=F(-2), q=F(1), N=3, horizon=10,
                             lam=mp.mpf(1), n0=2, delta=bound.value * factor)
        built = lv.build(spec)
        margin = lv.margin_at(built.tree, built.u, F(-2), F(1), 0)
        assert (margin <= 0) == expect_ok


def test_delta0_unsupported_regime():
    with pytest.raises(InputError):
        lv.delta0(lv.RegimeSpec(regime="II", p=F(0), q=F(3), N=3, horizon=10,
                                eps=F(1, 2), n0=2))


# ---------------------------------------------------------------------------
# lambda functions


def test_lambda1_frozen_value_at_1e6():
    v = lv.lambda_fn("I", lv.pq(2, 1), F(1, 10), 10 ** 6)
    assert abs(v - mp.mpf("0.022990766065603724851")) < mp.mpf("1e-15")


def test_lambda1_negative_at_small_n():
    assert lv.lambda_fn("I", lv.pq(2, 1), F(1, 10), 1000) < 0


def test_lambda3_frozen_value_at_1e6():
    v = lv.lambda_fn("III", lv.pq(-1, F(3, 2)), F(1, 10), 10 ** 6)
    assert abs(v - mp.mpf("-0.02078252441823125778")) < mp.mpf("1e-15")


def test_lambda_limits():
    assert abs(lv.lambda_limit("I", lv.pq(2, 1), F(1, 10)) - mp.mpf("0.05")) < mp.mpf("1e-30")
    assert lv.lambda_limit("II", lv.pq(0, 3), F(1, 2)) == mp.inf
    v = lv.lambda_limit("III", lv.pq(-1, F(3, 2)), F(1, 10))
    assert abs(v - 2 ** mp.mpf("-0.25") / 10) < mp.mpf("1e-30")
    v4 = lv.lambda_limit("IV", lv.pq(-2, 1), 1)
    assert abs(v4 - mp.mpf("0.65353235120240618407")) < mp.mpf("1e-15")
    with pytest.raises(InputError):
        lv.lambda_limit("V1", lv.pq(F(1, 2), F(1, 2)), 8)


def test_lambda_domain_errors():
    with pytest.raises(InputError):
        lv.lambda_fn("I", lv.pq(2, 1), F(1, 10), 2)
    with pytest.raises(InputError):
        lv.lambda_fn("IV", lv.pq(-2, 1), 1, 1)


def test_v1_conditions_at_lambda8():
    root = lv.lambda_fn("V1", lv.pq(F(1, 2), F(1, 2)), 8, 0)
    interior = lv.lambda_fn("V1", lv.pq(F(1, 2), F(1, 2)), 8, 1)
    assert abs(root - mp.mpf("1.1058121763447322436")) < mp.mpf("1e-15")
    assert abs(interior - mp.mpf("1.0978011229883013195")) < mp.mpf("1e-15")
    assert root >= 1 and interior >= 1


def test_v2_condition_blows_up():
    vals = [lv.lambda_fn("V2", lv.pq(2, -1), lam, 1) for lam in (2, 4, 8, 16, 32)]
    assert all(vals[i] < vals[i + 1] for i in range(len(vals) - 1))
    assert vals[-1] > 100


def test_lambda_convergence_monotone_on_grid():
    grid = [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]
    for regime, pt, param in [
        ("I", lv.pq(2, 1), F(1, 10)),
        ("III", lv.pq(-1, F(3, 2)), F(1, 10)),
        ("IV", lv.pq(-2, 1), 1),
    ]:
        limit = lv.lambda_limit(regime, pt, param)
        devs = [abs(lv.lambda_fn(regime, pt, param, n) / limit - 1) for n in grid]
        assert all(devs[i] > devs[i + 1] for i in range(len(devs) - 1))


# ---------------------------------------------------------------------------
# verify


def test_verify_constant_function_all_margins_zero():
    tree = lv.RadialTree(3, [2 ** n for n in range(6)])
    u = lv.RadialFunction([mp.mpf(5)] * 6)
    rep = lv.verify_radial(tree, u, F(2), F(1))
    assert rep.verified
    assert rep.max_margin == 0


def test_verify_zero_gradient_with_negative_q_reported():
    tree = lv.RadialTree(3, [1] * 6)
    u = lv.RadialFunction([mp.mpf(5)] * 6)
    rep = lv.verify_radial(tree, u, F(2), F(-1))
    assert not rep.verified
    assert rep.undefined_layers == (0, 1, 2, 3, 4)


def test_verify_miscalibrated_delta_fails(regime1_small):
    spec = regime1_small.spec
    bad = lv.RegimeSpec(**{**spec.__dict__, "delta": spec.delta * 10})
    rep = lv.verify(lv.build(bad))
    assert not rep.verified
    assert rep.max_margin > 0


def test_verify_margin_sign_tracks_lambda(regime1_small):
    # the direct margin and the calibration function decide identically
    spec = regime1_small.spec
    thr = lv.interior_threshold(spec)
    for n in (1, 5, 20, 60):
        lam = lv.lambda_fn("I", spec.point, spec.eps, n + spec.n0)
        margin = lv.margin_at(regime1_small.tree, regime1_small.u, spec.p, spec.q, n)
        assert (margin <= 0) == (thr <= lam)


def test_verify_agrees_with_materialized_bruteforce(regime1_small):
    built = regime1_small
    g, layers = built.tree.materialize(8)
    gu = lv.induced_graph_function(built.u, layers)
    for n in range(0, 7):
        x = layers.index(n)
        direct = lv.laplacian(g, gu, x) + lv.nonlinear_term(
            gu[x], lv.gradient_norm(g, gu, x) ** 2, built.spec.p, built.spec.q)
        radial = lv.margin_at(built.tree, built.u, built.spec.p, built.spec.q, n)
        assert abs(direct - radial) <= mp.mpf("1e-25") * max(abs(direct), abs(radial))


def test_verify_horizon_bounds_checked(regime1_small):
    with pytest.raises(InputError):
        lv.verify(regime1_small, horizon=regime1_small.tree.horizon)


# ---------------------------------------------------------------------------
# calibrate


def test_calibrate_regime_I_small(regime1_small):
    spec = regime1_small.spec
    assert spec.n0 >= 2 and spec.delta > 0
    assert lv.verify(regime1_small).verified
    assert lv.tail_check(spec).ok


def test_calibrate_consistency_invariant(regime1_small, regime3_small):
    # master inequality: threshold <= Lambda(n + n0) across the horizon
    for built in (regime1_small, regime3_small):
        spec = built.spec
        thr = lv.interior_threshold(spec)
        for n in range(1, spec.horizon + 1):
            assert thr <= lv.lambda_fn(spec.regime, spec.point, spec.eps, n + spec.n0)


def test_calibrate_regime_II_immediate():
    spec = lv.calibrate("II", lv.pq(0, 3), N=3, horizon=50, eps=F(1, 2))
    assert spec.n0 == 2
    assert spec.delta is None
    assert lv.verify(lv.build(spec)).verified


def test_calibrate_regime_II_root_condition_search():
    # at (10, 5/2) the root inequality fails for n0 = 2 and the search must
    # walk n0 up until it holds
    bad = lv.RegimeSpec(regime="II", p=F(10), q=F(5, 2), N=3, horizon=50,
                        eps=F(1, 2), n0=2)
    rep = lv.verify(lv.build(bad))
    assert not rep.verified and rep.worst_layer == 0
    spec = lv.calibrate("II", lv.pq(10, F(5, 2)), N=3, horizon=50, eps=F(1, 2))
    assert spec.n0 > 2
    assert lv.verify(lv.build(spec)).verified


def test_verify_bumps_precision_on_borderline_margin():
    # pinning delta exactly at the root threshold leaves a margin at rounding
    # scale, which must trigger re-evaluation at higher precision
    d0 = lv.delta0(spec_I(horizon=5))
    rep = lv.verify(lv.build(spec_I(horizon=5, delta=d0.value)))
    assert rep.precision_bits > 128


def test_harnack_on_thousand_layer_regime_I():
    spec = lv.calibrate("I", lv.pq(2, 1), N=3, horizon=1000, eps=F(1, 10))
    built = lv.build(spec)
    assert built.tree.harnack_check(built.u, built.tree.p0()).holds


def test_calibrate_rejects_bad_region():
    with pytest.raises(InputError):
        lv.calibrate("I", lv.pq(-2, 1), N=3, horizon=20, eps=F(1, 10))


def test_calibrate_requires_params():
    with pytest.raises(InputError):
        lv.calibrate("I", lv.pq(2, 1), N=3, horizon=20)
    with pytest.raises(InputError):
        lv.calibrate("IV", lv.pq(-2, 1), N=3, horizon=20)


def test_calibrated_builds_positive_monotone_harnack(regime1_small, regime4_walk,
                                                     regime5_walk):
    for built, decreasing in ((regime1_small, True), (regime4_walk, True),
                              (regime5_walk, True)):
        u = built.u
        assert u.is_positive()
        if decreasing:
            for n in range(u.lo, u.hi):
                assert u.value(n + 1) < u.value(n)
        assert built.tree.harnack_check(u, built.tree.p0()).holds


def test_v2_build_positive_and_monotone_in_layer():
    spec = lv.calibrate("V2", lv.pq(2, -1), N=3, horizon=30)
    built = lv.build(spec)
    assert built.u.is_positive()
    for n in range(built.u.lo, built.u.hi):
        assert built.u.value(n + 1) < built.u.value(n)  # decreasing left to right
    assert built.tree.harnack_check(built.u, built.tree.p0()).holds


# ---------------------------------------------------------------------------
# volume


def test_volume_band_regime_I():
    spec = spec_I(horizon=520)
    built = lv.build(spec)
    band = lv.volume_band(built, lv.volume_target(spec), 16, 512)
    assert band.spread <= 4


def test_volume_band_wrong_target_blows_up():
    spec = spec_I(horizon=520)
    built = lv.build(spec)
    target = lv.volume_target(spec)
    wrong = lambda n: target(n) * mp.mpf(n) ** 2
    band = lv.volume_band(built, wrong, 16, 512)
    assert band.spread > 100


def test_volume_band_regime_IV_exponential():
    spec = lv.RegimeSpec(regime="IV", p=F(-2), q=F(1), N=3, horizon=300,
                         lam=mp.mpf(1), n0=2, delta=mp.mpf(1))
    built = lv.build(spec)
    band = lv.volume_band(built, lv.volume_target(spec), 16, 256)
    assert band.spread <= 4


def test_volume_band_v2_bounded():
    spec = lv.RegimeSpec(regime="V2", p=F(2), q=F(-1), N=3, horizon=200, lam=mp.mpf(4))
    built = lv.build(spec)
    band = lv.volume_band(built, lv.volume_target(spec), 16, 199)
    assert band.spread <= 4


def test_volume_band_input_checks(regime1_small):
    with pytest.raises(InputError):
        lv.volume_band(regime1_small, lambda n: mp.mpf(1), 1, 10)
    with pytest.raises(InputError):
        lv.volume_band(regime1_small, lambda n: mp.mpf(0), 2, 10)


def test_layer_rows_shape(regime1_small):
    rows = list(lv.layer_rows(regime1_small, horizon=10))
    assert len(rows) == 11
    n, w, u, lap, grad, margin = rows[3]
    assert n == 3 and w > 0 and u > 0 and margin <= 0
