"""Search and exact certification of the constants C1, C2, C3 and nu.

The chain is sequential: C1 comes from a two-parameter feasibility problem,
C2 from a quadratic in one parameter given C1, C3 from a second
two-parameter problem given C2, and nu = -log_3(C3).

Searches run in float64.  Every emitted certificate carries rational
witnesses and is re-checked in exact rational arithmetic, with upstream
constants replaced by their certified (upper) rational values.  All
constraints are monotone in the upstream constant, so an upper bound
upstream keeps the downstream check sound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

from ._arith import fraction_from_json, fraction_to_json, to_fraction

C1_TARGET = Fraction(99993, 100000)
C2_TARGET = Fraction(999986, 1000000)
C3_TARGET = 1 - Fraction(13, 10**13)
C3_STRETCH = 1 - Fraction(227, 10**14)
NU_TARGET = Fraction(119, 10**14)
# below this C3 the nu target is expected to be reachable
NU_TARGET_GATE = 1 - Fraction(1309, 10**15)

EPS12_MAX = Fraction(1, 24)
EPS5_BOUND = Fraction(1, 10)

# Rational upper bound for ln 3; checked exactly in verify_certificate.
LN3_UPPER = Fraction(1098612288668110, 10**15)

DEFAULT_RESOLUTION = 400
DEFAULT_ROUNDS = 24

# snapping lattices: coarse for the first witness, fine for the second
_C1_LATTICE = (10**6, 10**12)
_C3_LATTICE = (10**10, 10**18)
_EPS3_DENOM = 10**18
_NU_DENOM = 10**30


@dataclass(frozen=True)
class CertifiedConstant:
    """A constant with rational witnesses and its exact constraint slack.

    For C1, C2, C3 ``value`` is an upper bound; for nu it is a lower bound.
    """

    name: str
    value: Fraction
    witnesses: dict
    residual: Fraction
    verified: bool = False
    depends_on: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value_numerator": self.value.numerator,
            "value_denominator": self.value.denominator,
            "witnesses": {k: fraction_to_json(v) for k, v in self.witnesses.items()},
            "residual": fraction_to_json(self.residual),
            "verified": self.verified,
            "depends_on": list(self.depends_on),
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "CertifiedConstant":
        return cls(
            name=obj["name"],
            value=Fraction(int(obj["value_numerator"]), int(obj["value_denominator"])),
            witnesses={k: fraction_from_json(v) for k, v in obj["witnesses"].items()},
            residual=fraction_from_json(obj["residual"]),
            verified=bool(obj["verified"]),
            depends_on=tuple(obj.get("depends_on", ())),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CertifiedConstant":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------- residuals

def c1_constraint_residual(eps1, eps2) -> Fraction:
    """Slack of the C1 constraint (already multiplied through by n).

    (1 - e2) + e2 (1 - e1) - (3 + 1/9) / (4 (1 - 4 e1 - 3 e2)) - 3 (4 e1 + 3 e2)
    Feasible iff the result is >= 0; the matching constant is 1 - e1 e2.
    """
    e1, e2 = to_fraction(eps1), to_fraction(eps2)
    if not (0 <= e1 <= EPS12_MAX and 0 <= e2 <= EPS12_MAX):
        raise ValueError(f"eps1, eps2 must lie in [0, 1/24], got {e1}, {e2}")
    lin = 4 * e1 + 3 * e2
    return (1 - e2) + e2 * (1 - e1) - Fraction(28, 9) / (4 * (1 - lin)) - 3 * lin


def c2_constraint_residual(eps3, c1) -> Fraction:
    """(1 - e3) - C1 / (1 - e3) - 3 e3; nonnegative means C2 = 1 - e3 works."""
    e3, c1 = to_fraction(eps3), to_fraction(c1)
    if not 0 < e3 < 1 - c1:
        raise ValueError(f"eps3 must lie in (0, 1 - C1), got {e3}")
    return (1 - e3) - c1 / (1 - e3) - 3 * e3


def c3_constraint_residual(eps4, eps5, c2) -> Fraction:
    """(1 - e4 e5) - 3 (e4 + e5) - C2 / ((1 - e4)^3 (1 - e5))."""
    e4, e5, c2 = to_fraction(eps4), to_fraction(eps5), to_fraction(c2)
    if not (0 <= e4 < 1 and 0 <= e5 < EPS5_BOUND):
        raise ValueError(f"need 0 <= eps4 < 1 and 0 <= eps5 < 1/10, got {e4}, {e5}")
    return (1 - e4 * e5) - 3 * (e4 + e5) - c2 / ((1 - e4) ** 3 * (1 - e5))


def _c1_residual_float(a: float, b: float) -> float:
    return 1.0 - a * b - (7.0 / 9.0) / (1.0 - 4.0 * a - 3.0 * b) - 12.0 * a - 9.0 * b


def _c3_residual_float(c2: Fraction) -> Callable[[float, float], float]:
    # subtract 1 - C2 analytically; the terms left are all of order 1e-5
    gap = float(1 - c2)
    c2f = float(c2)

    def res(x: float, y: float) -> float:
        return gap - x * y - 3.0 * (x + y) - c2f * math.expm1(-3.0 * math.log1p(-x) - math.log1p(-y))
    return res


# ------------------------------------------------------------------- search

def _bisect_max(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Largest t in [lo, hi] with f(t) >= 0, for f decreasing and f(lo) >= 0."""
    if f(hi) >= 0:
        return hi
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return lo


def _maximize_product(res: Callable[[float, float], float], x_cap: float, y_cap: float,
                      resolution: int, rounds: int) -> tuple[float, float]:
    """Maximize x*y over {res(x, y) >= 0} for res decreasing in both arguments.

    For each x the best y is found by bisection, so the grid runs over x
    only: a coarse grid on the feasible x-range followed by ``rounds`` of
    zooming.  Ties keep the smaller x.
    """
    x_max = _bisect_max(lambda x: res(x, 0.0), 0.0, x_cap)

    def y_star(x: float) -> float:
        if res(x, 0.0) < 0:
            return 0.0
        return _bisect_max(lambda y: res(x, y), 0.0, y_cap)

    def pick(xs):
        best_x, best_f = None, -1.0
        for x in xs:
            fx = x * y_star(x)
            if fx > best_f:
                best_x, best_f = x, fx
        return best_x

    best = pick(x_max * i / resolution for i in range(1, resolution + 1))
    half = x_max / resolution
    m = 8
    for _ in range(rounds):
        xs = [best + half * j / m for j in range(-m, m + 1)]
        best = pick(x for x in xs if 0.0 < x <= x_max)
        half /= m
    return best, y_star(best)


def _max_feasible_int(g: Callable[[int], bool], guess: int, top: int) -> int | None:
    """Largest j in [0, top] with g(j) true, g monotone (true then false)."""
    guess = max(0, min(guess, top))
    if g(guess):
        lo, step = guess, 1
        while lo + step <= top and g(lo + step):
            lo += step
            step *= 2
        hi = min(lo + step, top + 1)
    else:
        hi, step = guess, 1
        while hi - step >= 0 and not g(hi - step):
            hi -= step
            step *= 2
        if hi - step < 0:
            if not g(0):
                return None
            lo = 0
        else:
            lo = hi - step
    # invariant: g(lo) true, g(hi) false or hi == top + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if g(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _snap(exact_res: Callable[[Fraction, Fraction], Fraction], res: Callable[[float, float], float],
          x_float: float, top: int, lattice: tuple[int, int]) -> tuple[Fraction, Fraction]:
    """Rational witnesses near the float optimum, exactly feasible.

    x is snapped to the coarse lattice (both neighbours are tried), then y
    is pushed as far as exact feasibility allows on the fine lattice, up to
    index ``top``.
    """
    qx, qy = lattice
    y_cap = top / qy
    best = None
    base = math.floor(x_float * qx)
    for i in (base, base + 1):
        if i <= 0:
            continue
        x = Fraction(i, qx)
        xf = float(x)
        guess = math.floor(_bisect_max(lambda y: res(xf, y), 0.0, y_cap) * qy) if res(xf, 0.0) >= 0 else 0
        j = _max_feasible_int(lambda j: exact_res(x, Fraction(j, qy)) >= 0, guess, top)
        if not j:
            continue
        y = Fraction(j, qy)
        if best is None or x * y > best[0] * best[1]:
            best = (x, y)
    if best is None:
        raise RuntimeError("no exactly feasible witness near the float optimum")
    return best


# --------------------------------------------------------------- certifiers

def certify_c1(grid_resolution: int = DEFAULT_RESOLUTION,
               refine_rounds: int = DEFAULT_ROUNDS) -> CertifiedConstant:
    """Best C1 = 1 - eps1 eps2 over the feasible region in (0, 1/24]^2."""
    if grid_resolution < 100:
        raise ValueError("grid_resolution must be >= 100")
    cap = float(EPS12_MAX)
    x, _ = _maximize_product(_c1_residual_float, cap, cap, grid_resolution, refine_rounds)
    top = math.floor(EPS12_MAX * _C1_LATTICE[1])
    e1, e2 = _snap(c1_constraint_residual, _c1_residual_float, x, top, _C1_LATTICE)
    cert = CertifiedConstant("C1", 1 - e1 * e2, {"eps1": e1, "eps2": e2},
                             c1_constraint_residual(e1, e2))
    return replace(cert, verified=verify_certificate(cert))


def _eps3_below_root(c1: Fraction) -> Fraction:
    """Rational just below the small root of 4 e^2 - 5 e + (1 - C1) = 0."""
    disc = 25 - 16 * (1 - c1)
    k = 10**24
    scaled = disc * k * k
    t = math.isqrt(scaled.numerator // scaled.denominator)
    if t * t != scaled:
        t += 1
    sqrt_hi = Fraction(t, k)
    e3 = Fraction(math.floor((5 - sqrt_hi) / 8 * _EPS3_DENOM), _EPS3_DENOM)
    while c2_constraint_residual(e3, c1) < 0:
        e3 -= Fraction(1, _EPS3_DENOM)
    return e3


def certify_c2(c1_cert: CertifiedConstant) -> CertifiedConstant:
    """C2 = 1 - eps3 with eps3 just below the root of the balance equation."""
    if c1_cert.name != "C1" or not verify_certificate(c1_cert):
        raise ValueError("certify_c2 needs a verified C1 certificate")
    c1 = c1_cert.value
    e3 = _eps3_below_root(c1)
    cert = CertifiedConstant("C2", 1 - e3, {"eps3": e3}, c2_constraint_residual(e3, c1),
                             depends_on=("C1",))
    return replace(cert, verified=verify_certificate(cert, {"C1": c1_cert}))


def certify_c3(c2_cert: CertifiedConstant, grid_resolution: int = DEFAULT_RESOLUTION,
               refine_rounds: int = DEFAULT_ROUNDS,
               upstream: Mapping[str, CertifiedConstant] | None = None) -> CertifiedConstant:
    """Best C3 = 1 - eps4 eps5 given the certified upper bound on C2.

    ``upstream`` must hold the C1 certificate that C2 depends on.
    """
    if grid_resolution < 100:
        raise ValueError("grid_resolution must be >= 100")
    upstream = _as_mapping(upstream)
    if c2_cert.name != "C2" or not verify_certificate(c2_cert, upstream):
        raise ValueError("certify_c3 needs a verified C2 certificate")
    c2 = c2_cert.value
    res = _c3_residual_float(c2)
    y_cap = float(EPS5_BOUND) * (1 - 1e-12)
    x, _ = _maximize_product(res, 1.0 - 1e-12, y_cap, grid_resolution, refine_rounds)

    def exact_res(e4, e5):
        return c3_constraint_residual(e4, e5, c2)

    top = math.ceil(EPS5_BOUND * _C3_LATTICE[1]) - 1
    e4, e5 = _snap(exact_res, res, x, top, _C3_LATTICE)
    cert = CertifiedConstant("C3", 1 - e4 * e5, {"eps4": e4, "eps5": e5},
                             exact_res(e4, e5), depends_on=("C2",))
    return replace(cert, verified=verify_certificate(cert, {"C2": c2_cert, **upstream}))


def certify_nu(c3_cert: CertifiedConstant,
               upstream: Mapping[str, CertifiedConstant] | None = None) -> CertifiedConstant:
    """Rational lower bound on nu = -log_3(C3).

    Uses -ln(1 - x) >= x with x = 1 - C3, and ln 3 < LN3_UPPER.
    """
    x = 1 - c3_cert.value
    ratio = x / LN3_UPPER
    nu_lo = Fraction(math.floor(ratio * _NU_DENOM), _NU_DENOM)
    cert = CertifiedConstant("nu", nu_lo, {"ln3_upper": LN3_UPPER}, ratio - nu_lo,
                             depends_on=("C3",))
    ups = dict(upstream or {})
    ups["C3"] = c3_cert
    return replace(cert, verified=verify_certificate(cert, ups))


def certify_all(grid_resolution: int = DEFAULT_RESOLUTION,
                refine_rounds: int = DEFAULT_ROUNDS) -> dict[str, CertifiedConstant]:
    c1 = certify_c1(grid_resolution, refine_rounds)
    c2 = certify_c2(c1)
    c3 = certify_c3(c2, grid_resolution, refine_rounds, upstream={"C1": c1})
    nu = certify_nu(c3, {"C1": c1, "C2": c2})
    return {"C1": c1, "C2": c2, "C3": c3, "nu": nu}


@lru_cache(maxsize=None)
def default_chain() -> dict[str, CertifiedConstant]:
    """The certificate chain at default settings, computed once per process."""
    return certify_all()


# ------------------------------------------------------------- verification

def _exp_lower(u: Fraction, terms: int = 60) -> Fraction:
    """Partial Taylor sum of exp(u); a lower bound for u > 0."""
    total, term = Fraction(0), Fraction(1)
    for k in range(terms):
        total += term
        term = term * u / (k + 1)
    return total


def _as_mapping(upstream) -> dict:
    if upstream is None:
        return {}
    if isinstance(upstream, Mapping):
        return dict(upstream)
    return {c.name: c for c in upstream}


def verify_certificate(cert: CertifiedConstant,
                       upstream: Mapping[str, CertifiedConstant] | Iterable | None = None) -> bool:
    """Re-check a certificate in exact rational arithmetic.

    Upstream certificates named in ``depends_on`` must be supplied and are
    verified recursively.  Raises ValueError if one is missing; returns
    False for any failed check.
    """
    ups = _as_mapping(upstream)
    for dep in cert.depends_on:
        if ups.get(dep) is None:
            raise ValueError(f"{cert.name} certificate needs upstream {dep}")
        if not verify_certificate(ups[dep], ups):
            return False
    w = cert.witnesses
    try:
        if cert.name == "C1":
            e1, e2 = w["eps1"], w["eps2"]
            if not (e1 > 0 and e2 > 0):
                return False
            res = c1_constraint_residual(e1, e2)
            value = 1 - e1 * e2
        elif cert.name == "C2":
            e3 = w["eps3"]
            res = c2_constraint_residual(e3, ups["C1"].value)
            value = 1 - e3
        elif cert.name == "C3":
            e4, e5 = w["eps4"], w["eps5"]
            if not (e4 > 0 and e5 > 0):
                return False
            res = c3_constraint_residual(e4, e5, ups["C2"].value)
            value = 1 - e4 * e5
        elif cert.name == "nu":
            u = w["ln3_upper"]
            if u <= 0 or _exp_lower(u) <= 3:
                return False
            x = 1 - ups["C3"].value
            if x <= 0:
                return False
            res = x / u - cert.value
            value = cert.value
            if value <= 0:
                return False
        else:
            return False
    except (KeyError, ValueError, ZeroDivisionError):
        return False
    if cert.name != "nu" and not value < 1:
        return False
    return res >= 0 and res == cert.residual and value == cert.value
