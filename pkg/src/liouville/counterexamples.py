"""Radially symmetric positive solutions on homogeneous trees.

Each admissible exponent region has a recipe: shell weights and layerwise
values on T_N making u a positive solution of

    Delta u + u^p |grad u|^q <= 0

while the ball volumes realize the growth rate that the nonexistence
theory shows to be critical.  Six families are implemented:

    I   polynomial-log weights, decaying u            (region G1)
    II  n (ln n)^(1+eps) weights, u -> 1 from above   (region G2)
    III polynomial-log weights, u -> 1 from above     (region G3)
    IV  exponential weights, u -> delta from above    (region G4)
    V1  exponential weights, exponentially decaying u (p+q=1, p>=0, q>0)
    V2  two-sided tree, u decaying one way and        (p+q=1, q<0)
        growing the other

Whether a recipe solves the inequality at a layer reduces to a per-layer
calibration function: the interior inequality at layer n is equivalent to
`threshold <= Lambda(n + n0)` where the threshold is a power of delta
(families I, III, IV), the constant 1 (family II), or a rate-dependent
closed form (family V).  Calibration searches n0 (or the rate lambda)
until the pointwise check passes on the requested horizon, then
re-verifies every layer margin directly from the tree.

A verified report is a *finite-horizon certificate*: margins are checked
pointwise up to the horizon and the calibration function must clear twice
the calibrated threshold on the tail half of the window.  It is evidence,
not a proof for all n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath as mp

from .errors import CalibrationError, InputError
from .graphs import GraphFunction, WeightedGraph, gradient_norm, laplacian
from .numerics import check_nonpositive, precision, rel_tol, to_mpf
from .radial import RadialFunction, RadialTree, TwoSidedRadialTree
from .regions import PQPoint, classify_g, exponents, pq

REGIMES = ("I", "II", "III", "IV", "V1", "V2")

# Acceptance factor for the rate search in family V: the closed-form layer
# conditions must clear 1 with five percent to spare.
V_COND_MARGIN = Fraction(21, 20)

_N0_CAP = 2 ** 34
_LAMBDA_CAP = 64
_MAX_PRECISION_BUMPS = 2


@dataclass(frozen=True)
class RegimeSpec:
    """A fully pinned construction: regime, exponents, and parameters.

    horizon is the number of certified layers: margins are checked for
    0 <= n <= horizon (both arms for V2).  eps applies to regimes I-III,
    lam to IV and V, delta to I, III, IV; n0 is ignored by V1/V2.
    """

    regime: str
    p: Fraction
    q: Fraction
    N: int
    horizon: int
    eps: Fraction | None = None
    lam: mp.mpf | None = None
    n0: int = 2
    delta: mp.mpf | None = None

    @property
    def point(self) -> PQPoint:
        return pq(self.p, self.q)


def _region_matches(regime: str, point: PQPoint) -> bool:
    if regime == "V1":
        return point.p + point.q == 1 and point.p >= 0 and point.q > 0
    if regime == "V2":
        return point.p + point.q == 1 and point.q < 0
    return classify_g(point) == {"I": "G1", "II": "G2", "III": "G3", "IV": "G4"}[regime]


def validate_spec(spec: RegimeSpec) -> None:
    if spec.regime not in REGIMES:
        raise InputError(f"unknown regime {spec.regime!r}")
    if not _region_matches(spec.regime, spec.point):
        raise InputError(
            f"(p,q)=({spec.p},{spec.q}) is not in the exponent region of regime {spec.regime}"
        )
    if spec.N < 2:
        raise InputError("tree degree N must be at least 2")
    if spec.horizon < 2:
        raise InputError("horizon must be at least 2")
    if spec.regime in ("I", "II", "III", "IV") and spec.n0 < 2:
        raise InputError("n0 must be at least 2 (logarithms need n + n0 >= 2)")
    if spec.regime in ("I", "II", "III") and spec.eps is None:
        raise InputError(f"regime {spec.regime} needs eps")
    if spec.regime in ("IV", "V1", "V2"):
        if spec.lam is None or not to_mpf(spec.lam) > 0:
            raise InputError(f"regime {spec.regime} needs a positive lam")
    if spec.regime in ("I", "III", "IV"):
        if spec.delta is None or not to_mpf(spec.delta) > 0:
            raise InputError(f"regime {spec.regime} needs a positive delta")


# ---------------------------------------------------------------------------
# Closed-form profiles and construction


def _poly_profiles(spec: RegimeSpec):
    """(weight, u) closures in the absolute index m = n + n0, regimes I-IV."""
    point = spec.point
    if spec.regime == "I":
        ex = exponents(point, "I")
        lam_w, beta, sigma = to_mpf(ex.lam), to_mpf(ex.beta), to_mpf(ex.sigma)
        eps = to_mpf(spec.eps)
        delta = to_mpf(spec.delta)
        w = lambda m: mp.mpf(m) ** lam_w * mp.ln(m) ** (beta + eps)
        u = lambda m: delta / (mp.mpf(m) ** sigma * mp.ln(m) ** beta)
        return w, u
    if spec.regime == "II":
        eps = to_mpf(spec.eps)
        w = lambda m: mp.mpf(m) * mp.ln(m) ** (1 + eps)
        u = lambda m: mp.ln(m) ** (-eps / 2) + 1
        return w, u
    if spec.regime == "III":
        ex = exponents(point, "III")
        beta, sigma = to_mpf(ex.beta), to_mpf(ex.sigma)
        eps = to_mpf(spec.eps)
        delta = to_mpf(spec.delta)
        w = lambda m: mp.mpf(m) ** beta * mp.ln(m) ** (beta + eps)
        u = lambda m: delta / (mp.mpf(m) ** sigma * mp.ln(m) ** beta) + 1
        return w, u
    if spec.regime == "IV":
        lam = to_mpf(spec.lam)
        delta = to_mpf(spec.delta)
        w = lambda m: lam * mp.e ** (lam * m)
        u = lambda m: delta / mp.mpf(m) + delta
        return w, u
    raise InputError(f"regime {spec.regime} has no polynomial profile")


@dataclass(frozen=True)
class BuiltCounterexample:
    tree: RadialTree | TwoSidedRadialTree
    u: RadialFunction
    spec: RegimeSpec


def build(spec: RegimeSpec) -> BuiltCounterexample:
    """Realize the recipe with stored layers one past the certified horizon."""
    validate_spec(spec)
    stored = spec.horizon + 1
    if spec.regime in ("I", "II", "III", "IV"):
        w, u = _poly_profiles(spec)
        weights = [w(n + spec.n0) for n in range(stored + 1)]
        values = [u(n + spec.n0) for n in range(stored + 1)]
        return BuiltCounterexample(RadialTree(spec.N, weights),
                                   RadialFunction(values), spec)
    lam = to_mpf(spec.lam)
    if spec.regime == "V1":
        weights = [lam * mp.e ** (lam * n) for n in range(stored + 1)]
        values = [mp.e ** (-lam * n / 4) for n in range(stored + 1)]
        return BuiltCounterexample(RadialTree(spec.N, weights),
                                   RadialFunction(values), spec)
    # V2: one arm per sign, same normalized shell law on both.
    M = stored
    pos = [lam * mp.e ** (lam * n) for n in range(0, M)]
    neg = [lam * mp.e ** (lam * n) for n in range(-1, -M - 1, -1)]
    values = [mp.e ** (-(lam - 1) * n) for n in range(-M, M + 1)]
    return BuiltCounterexample(TwoSidedRadialTree(spec.N, pos, neg),
                               RadialFunction(values, lo=-M), spec)


# ---------------------------------------------------------------------------
# Margin verification


@dataclass(frozen=True)
class MarginReport:
    """Pointwise margins F(n) = lap + u^p grad^q over the checked layers."""

    verified: bool
    max_margin: mp.mpf
    worst_layer: int
    layers: tuple[int, int]
    n_layers: int
    precision_bits: int
    tol: mp.mpf
    failures: tuple[tuple[int, mp.mpf], ...]
    undefined_layers: tuple[int, ...]
    label: str = "finite-horizon certificate"


def nonlinear_term(u_value, grad_sq, p, q) -> mp.mpf:
    """u^p |grad u|^q with the q = 0 convention |grad u|^0 = 1.

    A zero gradient with q < 0 is undefined and raises; it is never a pass.
    """
    u_value = to_mpf(u_value)
    if not u_value > 0:
        raise InputError("solution value must be positive")
    q = Fraction(q)
    if q == 0:
        return mp.power(u_value, to_mpf(p))
    grad_sq = to_mpf(grad_sq)
    if grad_sq == 0:
        if q > 0:
            return mp.mpf(0)
        raise InputError("zero gradient with q < 0: u^p |grad u|^q undefined")
    return mp.power(u_value, to_mpf(p)) * mp.power(grad_sq, to_mpf(q) / 2)


def margin_at(tree, u: RadialFunction, p, q, n: int) -> mp.mpf:
    """F(n) for one layer; raises on a zero gradient with q < 0."""
    lap = tree.laplacian_at(u, n)
    return lap + nonlinear_term(u.value(n), tree.gradient_sq_at(u, n), p, q)


def _checked_layers(tree, horizon: int | None) -> range:
    if isinstance(tree, TwoSidedRadialTree):
        deepest = tree.arm_horizon - 1
        h = deepest if horizon is None else horizon
        if h > deepest:
            raise InputError(f"horizon {h} exceeds checkable layers (needs u at {h + 1})")
        return range(-h, h + 1)
    deepest = tree.horizon - 1
    h = deepest if horizon is None else horizon
    if h > deepest:
        raise InputError(f"horizon {h} exceeds checkable layers (needs u at {h + 1})")
    return range(0, h + 1)


def _verify_pass(tree, u, p, q, layers, bits, force) -> MarginReport | None:
    tol = rel_tol()
    max_margin = mp.mpf("-inf")
    worst = layers.start
    failures = []
    undefined = []
    borderline = False
    for n in layers:
        lap = tree.laplacian_at(u, n)
        try:
            term = nonlinear_term(u.value(n), tree.gradient_sq_at(u, n), p, q)
        except InputError:
            undefined.append(n)
            continue
        check = check_nonpositive(lap + term, max(abs(lap), term), tol)
        if check.borderline:
            borderline = True
        if check.margin > max_margin:
            max_margin = check.margin
            worst = n
        if not check.holds and len(failures) < 20:
            failures.append((n, check.margin))
    if borderline and not force:
        return None
    return MarginReport(
        verified=not failures and not undefined,
        max_margin=max_margin,
        worst_layer=worst,
        layers=(layers.start, layers.stop - 1),
        n_layers=len(layers) - len(undefined),
        precision_bits=bits,
        tol=tol,
        failures=tuple(failures),
        undefined_layers=tuple(undefined),
    )


def verify_radial(tree, u: RadialFunction, p, q, horizon: int | None = None,
                  rebuild_spec: RegimeSpec | None = None) -> MarginReport:
    """Check F(n) <= 0 at every layer within the horizon.

    Margins are compared against the relative tolerance of their dominant
    term.  If any nonzero margin lands within ten tolerances of zero, the
    pass is redone at doubled precision (rebuilding from closed forms when
    a spec is available) so borderline signs cannot be rounding artifacts.
    """
    bits = mp.mp.prec
    for bump in range(_MAX_PRECISION_BUMPS + 1):
        force = bump == _MAX_PRECISION_BUMPS
        with precision(bits):
            if bump > 0 and rebuild_spec is not None:
                rebuilt = build(rebuild_spec)
                tree, u = rebuilt.tree, rebuilt.u
            layers = _checked_layers(tree, horizon)
            report = _verify_pass(tree, u, p, q, layers, bits, force)
        if report is not None:
            return report
        bits *= 2
    raise AssertionError("unreachable: final verification pass is forced")


def verify(built: BuiltCounterexample, horizon: int | None = None) -> MarginReport:
    return verify_radial(built.tree, built.u, built.spec.p, built.spec.q,
                         horizon=horizon, rebuild_spec=built.spec)


def verify_graph(g: WeightedGraph, u: GraphFunction, p, q) -> MarginReport:
    """Vertexwise margin check on an explicit finite graph."""
    tol = rel_tol()
    bits = mp.mp.prec
    max_margin = mp.mpf("-inf")
    worst = 0
    failures = []
    undefined = []
    for x in g.vertices():
        lap = laplacian(g, u, x)
        grad = gradient_norm(g, u, x)
        try:
            term = nonlinear_term(u[x], grad * grad, p, q)
        except InputError:
            undefined.append(x)
            continue
        check = check_nonpositive(lap + term, max(abs(lap), term), tol)
        if check.margin > max_margin:
            max_margin = check.margin
            worst = x
        if not check.holds and len(failures) < 20:
            failures.append((x, check.margin))
    return MarginReport(
        verified=not failures and not undefined,
        max_margin=max_margin,
        worst_layer=worst,
        layers=(0, g.n_vertices - 1),
        n_layers=g.n_vertices - len(undefined),
        precision_bits=bits,
        tol=tol,
        failures=tuple(failures),
        undefined_layers=tuple(undefined),
    )


# ---------------------------------------------------------------------------
# Calibration functions Lambda and their reported limits


def _lambda_poly(point: PQPoint, eps, n, family: str) -> mp.mpf:
    """Shared interior calibration function for the polynomial families."""
    p, q = to_mpf(point.p), to_mpf(point.q)
    ex = exponents(point, family)
    lam_w, beta, sigma = to_mpf(ex.lam), to_mpf(ex.beta), to_mpf(ex.sigma)
    eps = to_mpf(eps)
    n = mp.mpf(n)

    def W(m):
        return m ** lam_w * mp.ln(m) ** (beta + eps)

    def g(m):
        return m ** sigma * mp.ln(m) ** beta

    Wn, Wm = W(n), W(n - 1)
    gn, g_up, g_dn = g(n), g(n + 1), g(n - 1)
    drift = 1 - gn * (Wn / g_up + Wm / g_dn) / (Wn + Wm)
    quad = (Wn * (1 / gn - 1 / g_up) ** 2 + Wm * (1 / g_dn - 1 / gn) ** 2) / (2 * (Wn + Wm))
    if family == "I":
        return gn ** (p - 1) * drift * quad ** (-q / 2)
    return drift * (1 / gn + 1) ** (-p) / gn * quad ** (-q / 2)


def _lambda_log(point: PQPoint, eps, n) -> mp.mpf:
    p, q = to_mpf(point.p), to_mpf(point.q)
    eps = to_mpf(eps)
    n = mp.mpf(n)

    def W(m):
        return m * mp.ln(m) ** (1 + eps)

    def f(m):
        return mp.ln(m) ** (-eps / 2)

    Wn, Wm = W(n), W(n - 1)
    neg_lap = f(n) - (Wn * f(n + 1) + Wm * f(n - 1)) / (Wn + Wm)
    quad = (Wn * (f(n + 1) - f(n)) ** 2 + Wm * (f(n - 1) - f(n)) ** 2) / (2 * (Wn + Wm))
    return neg_lap * (f(n) + 1) ** (-p) * quad ** (-q / 2)


def _lambda_exp(point: PQPoint, lam, n) -> mp.mpf:
    p = to_mpf(point.p)
    lam = to_mpf(lam)
    n = mp.mpf(n)
    r = mp.e ** (-lam)
    drift = 1 / n - (1 / (n + 1) + r / (n - 1)) / (1 + r)
    quad = ((1 / (n + 1) - 1 / n) ** 2 + r * (1 / (n - 1) - 1 / n) ** 2) / (2 * (1 + r))
    return drift * (1 / n + 1) ** (-p) * quad ** mp.mpf("-0.5")


def _v1_layer_rhs(point: PQPoint, lam, n: int) -> mp.mpf:
    """Closed-form right-hand sides whose value >= 1 makes layer n work."""
    q = to_mpf(point.q)
    lam = to_mpf(lam)
    root = 2 ** (q / 2) * (1 - mp.e ** (-lam / 4)) ** (1 - q)
    if n == 0:
        return root
    r = mp.e ** (-lam)
    return (root * ((1 + r) / (1 + mp.e ** (-lam / 2))) ** (q / 2)
            * (1 - mp.e ** (-3 * lam / 4)) / (1 + r))


def _v2_layer_rhs(point: PQPoint, lam) -> mp.mpf:
    q = to_mpf(point.q)
    lam = to_mpf(lam)
    if lam <= 1:
        return mp.mpf(0)
    r = mp.e ** (-lam)
    return ((1 - mp.e ** (-(lam - 1))) ** (1 - q)
            * (2 * (1 + r) / (1 + mp.e ** (lam - 2))) ** (q / 2)
            * (1 - mp.e ** (-1)) / (1 + r))


def lambda_fn(regime: str, point: PQPoint, param, n: int) -> mp.mpf:
    """Per-layer calibration value for the given regime at absolute index n.

    Regimes I-III need n >= 3 so that ln(n-1) stays positive; regime IV
    needs n >= 2.  For V1, n = 0 selects the root condition and any n >= 1
    the (n-independent) interior one; for V2 the closed form does not
    depend on n at all.
    """
    if regime in ("I", "II", "III") and n < 3:
        raise InputError(f"regime {regime} calibration needs n >= 3, got {n}")
    if regime == "IV" and n < 2:
        raise InputError(f"regime IV calibration needs n >= 2, got {n}")
    if regime == "I":
        return _lambda_poly(point, param, n, "I")
    if regime == "II":
        return _lambda_log(point, param, n)
    if regime == "III":
        return _lambda_poly(point, param, n, "III")
    if regime == "IV":
        return _lambda_exp(point, param, n)
    if regime == "V1":
        return _v1_layer_rhs(point, param, n)
    if regime == "V2":
        return _v2_layer_rhs(point, param)
    raise InputError(f"unknown regime {regime!r}")


def lambda_limit(regime: str, point: PQPoint, param) -> mp.mpf:
    """Reported large-n limit of the calibration function (+inf for II)."""
    if regime == "II":
        return mp.inf
    if regime in ("I", "III"):
        sigma = to_mpf(exponents(point, regime).sigma)
        q = to_mpf(point.q)
        return (2 / sigma) ** (q / 2 - 1) * to_mpf(param)
    if regime == "IV":
        lam = to_mpf(param)
        return mp.sqrt(2) * (1 - mp.e ** (-lam)) / (1 + mp.e ** (-lam))
    raise InputError(f"regime {regime} has no closed-form limit; use lambda_fn directly")


# ---------------------------------------------------------------------------
# delta_0 thresholds from the root condition


@dataclass(frozen=True)
class DeltaBound:
    value: mp.mpf
    direction: str  # "upper" or "lower"


def _delta0_value(regime: str, point: PQPoint, n0: int) -> DeltaBound:
    p, q = to_mpf(point.p), to_mpf(point.q)
    if regime == "IV":
        return DeltaBound(2 ** (1 / (2 * p)) / (1 / mp.mpf(n0) + 1), "lower")
    if regime == "I":
        ex = exponents(point, "I")
        e = p + q - 1
    elif regime == "III":
        ex = exponents(point, "III")
        e = q - 1
    else:
        raise InputError(f"regime {regime} has no delta_0 formula")
    beta, sigma = to_mpf(ex.beta), to_mpf(ex.sigma)

    def g(m):
        return mp.mpf(m) ** sigma * mp.ln(m) ** beta

    diff = 1 / g(n0) - 1 / g(n0 + 1)
    if regime == "I":
        value = 2 ** (q / (2 * e)) * g(n0) ** (p / e) * diff ** ((1 - q) / e)
    else:
        value = 2 ** (q / (2 * e)) * (1 / g(n0) + 1) ** (-p / e) * diff ** ((1 - q) / e)
    return DeltaBound(value, "upper")


def delta0(spec: RegimeSpec) -> DeltaBound:
    """Closed-form root-layer bound on delta for regimes I, III, IV.

    For I and III delta must stay below the bound, for IV above it (p < 0
    flips the power).  The IV formula reduces to 2^(1/2p) (1/n0 + 1)^(-1):
    its root inequality does not involve the shell weights at all.
    """
    return _delta0_value(spec.regime, spec.point, spec.n0)


def interior_threshold(spec: RegimeSpec) -> mp.mpf:
    """The quantity that must stay below Lambda at every interior layer."""
    if spec.regime == "I":
        return mp.power(to_mpf(spec.delta), to_mpf(spec.p + spec.q - 1))
    if spec.regime == "III":
        return mp.power(to_mpf(spec.delta), to_mpf(spec.q - 1))
    if spec.regime == "IV":
        return mp.power(to_mpf(spec.delta), to_mpf(spec.p))
    return mp.mpf(1)


# ---------------------------------------------------------------------------
# Tail margin


@dataclass(frozen=True)
class TailReport:
    """Calibration-function clearance on the outer half of the horizon.

    A passing verify() plus a passing tail is still only a finite-horizon
    certificate with an empirical tail margin, never a proof for all n.
    """

    ok: bool
    window: tuple[int, int]
    min_value: mp.mpf
    threshold: mp.mpf
    required: mp.mpf
    label: str = "finite-horizon certificate + tail margin"


def tail_check(spec: RegimeSpec, horizon: int | None = None) -> TailReport:
    H = spec.horizon if horizon is None else horizon
    lo = max(1, math.ceil(H / 2))
    if spec.regime in ("V1", "V2"):
        vals = [lambda_fn(spec.regime, spec.point, spec.lam, n) for n in (0, 1)]
        min_value = min(vals)
        required = to_mpf(V_COND_MARGIN)
        return TailReport(ok=min_value >= required, window=(lo, H),
                          min_value=min_value, threshold=mp.mpf(1), required=required)
    param = spec.eps if spec.regime in ("I", "II", "III") else spec.lam
    min_value = min(
        lambda_fn(spec.regime, spec.point, param, n + spec.n0) for n in range(lo, H + 1)
    )
    threshold = interior_threshold(spec)
    required = 2 * threshold
    return TailReport(ok=min_value >= required, window=(lo, H),
                      min_value=min_value, threshold=threshold, required=required)


# ---------------------------------------------------------------------------
# Calibration search


def _probe_offsets(H: int) -> list[int]:
    probes = {1, 2, 3, 5, H // 2, H}
    k = 8
    while k < H:
        probes.add(k)
        k *= 4
    return sorted(n for n in probes if n >= 1)


def calibrate(regime: str, point: PQPoint, *, N: int, horizon: int,
              eps=None, lam=None) -> RegimeSpec:
    """Search the free parameters until build + verify + tail all pass.

    Regimes I-IV walk n0 through powers of two; the shift n -> n + n0 is
    what makes the calibration function positive and flat enough on the
    horizon.  delta is fixed from the recipe bounds: the root bound
    delta_0, the limit-based delta_1 = (limit/2)^(1/e), and a tail cap
    (window-minimum/2)^(1/e) that keeps the factor-two tail clearance
    reachable; with p < 0 (regime IV) the three combine through max
    instead of min.  Regimes V double the rate lambda from 1 until the
    closed-form layer conditions clear 1 with a five percent margin.
    """
    if regime not in REGIMES:
        raise InputError(f"unknown regime {regime!r}")
    if not _region_matches(regime, point):
        raise InputError(
            f"(p,q)=({point.p},{point.q}) is not in the exponent region of regime {regime}"
        )
    if regime in ("I", "II", "III"):
        if eps is None:
            raise InputError(f"regime {regime} calibration needs eps")
        eps = Fraction(eps)
        if eps <= 0:
            raise InputError("eps must be positive")
    if regime == "IV" and lam is None:
        raise InputError("regime IV calibration needs lam")
    if regime in ("V1", "V2"):
        return _calibrate_rate(regime, point, N=N, horizon=horizon)
    if regime == "II":
        return _calibrate_log(point, eps, N=N, horizon=horizon)
    return _calibrate_poly(regime, point, eps=eps, lam=lam, N=N, horizon=horizon)


def _window_min(regime, point, param, n0, H) -> mp.mpf:
    lo = max(1, math.ceil(H / 2))
    return min(lambda_fn(regime, point, param, n + n0) for n in range(lo, H + 1))


def _calibrate_poly(regime, point, *, eps, lam, N, horizon) -> RegimeSpec:
    if regime == "I":
        e = to_mpf(point.p + point.q - 1)
        param = eps
    elif regime == "III":
        e = to_mpf(point.q - 1)
        param = eps
    else:
        e = to_mpf(point.p)
        param = to_mpf(lam)
    delta1 = mp.power(lambda_limit(regime, point, param) / 2, 1 / e)
    probes = _probe_offsets(horizon)
    best_margin = None
    n0 = 2
    while n0 <= _N0_CAP:
        probe_vals = [lambda_fn(regime, point, param, n + n0) for n in probes]
        if all(v > 0 for v in probe_vals):
            wmin = _window_min(regime, point, param, n0, horizon)
            d0 = _delta0_value(regime, point, n0)
            tail_cap = mp.power(wmin / 2, 1 / e)
            combine = max if regime == "IV" else min
            delta = combine(d0.value, delta1, tail_cap)
            spec = RegimeSpec(regime=regime, p=point.p, q=point.q, N=N, horizon=horizon,
                              eps=None if regime == "IV" else eps,
                              lam=to_mpf(lam) if regime == "IV" else None,
                              n0=n0, delta=delta)
            if min(probe_vals) >= interior_threshold(spec):
                report = verify(build(spec))
                if report.verified and tail_check(spec).ok:
                    return spec
                if best_margin is None or report.max_margin < best_margin:
                    best_margin = report.max_margin
        n0 *= 2
    raise CalibrationError(
        f"regime {regime}: no passing n0 up to {_N0_CAP}", best_margin=best_margin
    )


def _calibrate_log(point, eps, *, N, horizon) -> RegimeSpec:
    best_margin = None
    n0 = 2
    while n0 <= _N0_CAP:
        spec = RegimeSpec(regime="II", p=point.p, q=point.q, N=N, horizon=horizon,
                          eps=eps, n0=n0)
        report = verify(build(spec))
        if report.verified and tail_check(spec).ok:
            return spec
        if best_margin is None or report.max_margin < best_margin:
            best_margin = report.max_margin
        n0 *= 2
    raise CalibrationError(f"regime II: no passing n0 up to {_N0_CAP}",
                           best_margin=best_margin)


def _calibrate_rate(regime, point, *, N, horizon) -> RegimeSpec:
    required = to_mpf(V_COND_MARGIN)
    best_margin = None
    lam = mp.mpf(1)
    while lam <= _LAMBDA_CAP:
        conds = [lambda_fn(regime, point, lam, n) for n in (0, 1)]
        if min(conds) >= required:
            spec = RegimeSpec(regime=regime, p=point.p, q=point.q, N=N,
                              horizon=horizon, lam=lam)
            report = verify(build(spec))
            if report.verified:
                return spec
            if best_margin is None or report.max_margin < best_margin:
                best_margin = report.max_margin
        lam *= 2
    raise CalibrationError(
        f"regime {regime}: closed-form conditions never cleared {required} up to "
        f"lambda={_LAMBDA_CAP}", best_margin=best_margin)


# ---------------------------------------------------------------------------
# Volume growth


@dataclass(frozen=True)
class VolumeBand:
    ratio_min: mp.mpf
    ratio_max: mp.mpf

    @property
    def spread(self) -> mp.mpf:
        return self.ratio_max / self.ratio_min


def volume_target(spec: RegimeSpec) -> Callable[[int], mp.mpf]:
    """The growth law the construction is designed to realize."""
    point = spec.point
    if spec.regime == "I":
        expo = to_mpf((2 * spec.p + spec.q) / (spec.p + spec.q - 1))
        logexp = to_mpf(exponents(point, "I").beta) + to_mpf(spec.eps)
        return lambda n: mp.mpf(n) ** expo * mp.ln(n) ** logexp
    if spec.regime == "II":
        logexp = 1 + to_mpf(spec.eps)
        return lambda n: mp.mpf(n) ** 2 * mp.ln(n) ** logexp
    if spec.regime == "III":
        expo = to_mpf(spec.q / (spec.q - 1))
        logexp = to_mpf(exponents(point, "III").beta) + to_mpf(spec.eps)
        return lambda n: mp.mpf(n) ** expo * mp.ln(n) ** logexp
    lam = to_mpf(spec.lam)
    return lambda n: mp.e ** (lam * n)


def volume_band(built: BuiltCounterexample, target: Callable[[int], object],
                n_lo: int, n_hi: int) -> VolumeBand:
    """Min and max of mu(B(o, n)) / target(n) over [n_lo, n_hi].

    A bounded band certifies two-sided comparability at desk scale; a band
    that keeps widening as n_hi grows is how a wrong growth law shows up.
    """
    if n_lo < 2:
        raise InputError("volume band needs n_lo >= 2 (targets may involve ln n)")
    if n_hi < n_lo:
        raise InputError("need n_hi >= n_lo")
    tree = built.tree
    if isinstance(tree, TwoSidedRadialTree):
        if n_hi > tree.arm_horizon - 1:
            raise InputError(f"n_hi {n_hi} exceeds the volume-computable horizon")
        vols = []
        acc = mp.mpf(0)
        for k in range(n_hi + 1):
            acc += tree.layer_measure(k)
            vols.append(acc)
    else:
        if n_hi > tree.horizon:
            raise InputError(f"n_hi {n_hi} exceeds stored horizon {tree.horizon}")
        vols = tree.ball_volumes(n_hi)
    ratio_min = ratio_max = None
    for n in range(n_lo, n_hi + 1):
        t = to_mpf(target(n))
        if not t > 0:
            raise InputError(f"target must be positive, got {t} at n={n}")
        ratio = vols[n] / t
        if ratio_min is None or ratio < ratio_min:
            ratio_min = ratio
        if ratio_max is None or ratio > ratio_max:
            ratio_max = ratio
    return VolumeBand(ratio_min=ratio_min, ratio_max=ratio_max)


def layer_rows(built: BuiltCounterexample, horizon: int | None = None):
    """Yield (layer, w, u, lap, grad, margin) across the checked layers."""
    for n in _checked_layers(built.tree, horizon):
        lap = built.tree.laplacian_at(built.u, n)
        grad = mp.sqrt(built.tree.gradient_sq_at(built.u, n))
        try:
            margin = lap + nonlinear_term(built.u.value(n), grad * grad,
                                          built.spec.p, built.spec.q)
        except InputError:
            margin = mp.nan
        try:
            w = built.tree.weight(n)
        except InputError:
            w = mp.nan
        yield (n, w, built.u.value(n), lap, grad, margin)
