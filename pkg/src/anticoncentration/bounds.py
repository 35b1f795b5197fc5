"""Closed-form anticoncentration bounds.

Each evaluator returns a :class:`BoundReport`.  A bound evaluated outside
its hypotheses is still reported, with ``applicable=False`` and a reason,
so comparison tables never hide a row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from ._arith import decode_value, encode_value, is_prime, to_fraction

# Shevtsova's upper estimate for the Berry-Esseen constant, i.i.d. case.
BERRY_ESSEEN_C = 0.4748
# Maximum of the standard normal density, 1/sqrt(2*pi).
PHI_MAX = 1.0 / math.sqrt(2.0 * math.pi)
LAMBDA_MAX = Fraction(9, 10)

Number = Union[Fraction, float, int]


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    value: Number
    applicable: bool
    reason_if_not: str = ""
    intermediates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "value": encode_value(self.value),
            "applicable": self.applicable,
            "reason_if_not": self.reason_if_not,
            "intermediates": encode_value(self.intermediates),
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "BoundReport":
        return cls(
            bound_name=obj["bound_name"],
            value=decode_value(obj["value"]),
            applicable=bool(obj["applicable"]),
            reason_if_not=obj.get("reason_if_not", ""),
            intermediates=decode_value(obj.get("intermediates", {})),
        )


@dataclass(frozen=True)
class PeakLocation:
    """Where the l-fold sum of a uniform interval peaks.

    ``centered`` is the peak for the support {-(n-1)/2, ..., (n-1)/2};
    ``translated`` lists the peak points for the support {1, ..., n}.
    """

    centered: Fraction
    translated: tuple[int, ...]


def _require_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"support size n must be >= 2, got {n}")


def sigma_rho(n: int) -> tuple[float, float]:
    """Standard deviation and Berry-Esseen ratio E|Y|^3 / sigma^3.

    Y is uniform on the centered interval of n points.  The third absolute
    moment is summed exactly over the doubled (integer) support.
    """
    _require_n(n)
    var = Fraction(n * n - 1, 12)
    # 2Y ranges over -(n-1), -(n-3), ..., n-1
    cube_sum = sum(abs(z) ** 3 for z in range(-(n - 1), n, 2))
    third = Fraction(cube_sum, 8 * n)
    sigma = math.sqrt(var)
    rho = float(third) / (sigma ** 3)
    return sigma, rho


def berry_esseen_interval_bound(n: int, ell: int) -> BoundReport:
    """Finite-n upper bound on max P[Y = x] over Z from the Berry-Esseen route.

    Uses the exact sigma(n), rho(n) instead of their n -> infinity limits.
    """
    _require_n(n)
    if ell < 2:
        raise ValueError(f"ell must be >= 2, got {ell}")
    sigma, rho = sigma_rho(n)
    root = math.sqrt(ell - 1)
    be_term = 2.0 * BERRY_ESSEEN_C * rho / root
    gauss_term = PHI_MAX * n / (sigma * root)
    window = be_term + gauss_term
    value = window / n
    return BoundReport(
        "berry-esseen", value, True, "",
        {
            "n": n, "ell": ell, "sigma": sigma, "rho": rho,
            "C_BE": BERRY_ESSEEN_C, "phi_max": PHI_MAX,
            "berry_esseen_term": be_term, "gaussian_term": gauss_term,
            "window_probability_bound": window,
            "trivial_bound": 1.0 / n, "nontrivial": value < 1.0 / n,
            "domain": "Z",
        },
    )


def peak_triple_count_formula(n: int) -> int:
    """Number of ordered triples from {1..n} whose sum is floor(3(n+1)/2)."""
    _require_n(n)
    return (3 * n * n + 1) // 4 if n % 2 else 3 * n * n // 4


def triple_bound(n: int) -> BoundReport:
    """Bound for the sum of three uniform draws from n distinct integers."""
    count = peak_triple_count_formula(n)
    value = Fraction(count, n ** 3)
    return BoundReport(
        "triple", value, True, "",
        {
            "n": n, "parity": "odd" if n % 2 else "even",
            "peak_count": count, "peak_point": 3 * (n + 1) // 2,
            "trivial_bound": Fraction(1, n), "nontrivial": value < Fraction(1, n),
            "domain": "Z",
        },
    )


def peak_location(n: int, ell: int) -> PeakLocation:
    _require_n(n)
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    centered = Fraction(0) if (ell % 2 == 0 or n % 2 == 1) else Fraction(-1, 2)
    shift = Fraction(ell * (n + 1), 2)
    lo = math.floor(shift + centered)
    translated = (lo,) if centered == 0 else (lo, lo + 1)
    return PeakLocation(centered, translated)


def lev_coefficient(ell: int) -> float:
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    return math.sqrt(8.0 / (math.pi * ell)) * (
        1.0 + 2.0 / math.sqrt(ell) + 0.75 ** (ell / 2 + 3) * ell ** 1.5
    )


def lev_bound(p: int, n: int, ell: int) -> BoundReport:
    """1/p + C(ell)/n for a uniform summand on an n-subset of Z_p."""
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if not 2 <= n <= p:
        raise ValueError(f"need 2 <= n <= p, got n={n}, p={p}")
    c = lev_coefficient(ell)
    value = 1.0 / p + c / n
    return BoundReport(
        "lev", value, True, "",
        {
            "p": p, "n": n, "ell": ell, "C_tilde": c,
            "trivial_bound": 1.0 / n, "nontrivial": value < 1.0 / n,
        },
    )


def _check_c3(c3) -> Fraction:
    c3 = to_fraction(c3)
    if not 0 < c3 < 1:
        raise ValueError(f"c3 must lie in (0, 1), got {c3}")
    return c3


def nu_exponent(c3) -> float:
    """-log_3(c3), computed from 1 - c3 to keep precision near c3 = 1."""
    c3 = _check_c3(c3)
    return -math.log1p(-float(1 - c3)) / math.log(3.0)


def restated_bound(lam, ell0: int, nu: float) -> float:
    """lam * (3 / ell0) ** nu, the power-of-three restatement."""
    return float(to_fraction(lam)) * math.exp(nu * math.log(3.0 / ell0))


def iterated_bound(lam, ell: int, p: int, c3) -> BoundReport:
    """c3**k * lam for the largest power of three 3**k <= ell."""
    lam = to_fraction(lam)
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if lam > LAMBDA_MAX:
        raise ValueError(f"lambda must be <= 9/10, got {lam}")
    if ell < 3:
        raise ValueError(f"ell must be >= 3, got {ell}")
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    c3 = _check_c3(c3)
    k, ell0 = 0, 1
    while ell0 * 3 <= ell:
        k += 1
        ell0 *= 3
    value = c3 ** k * lam
    threshold = 2 / (c3 ** (k - 1) * lam)
    headline = 2 / (c3 ** k * lam)
    applicable = p > threshold
    nu = nu_exponent(c3)
    return BoundReport(
        "iterated", value, applicable,
        "" if applicable else f"needs p > 2/(c3^{k - 1} lambda) = {float(threshold):.6g}",
        {
            "lambda": lam, "ell": ell, "p": p, "c3": c3, "k": k, "ell0": ell0,
            "p_threshold": threshold, "p_threshold_headline": headline,
            "nu": nu, "restated_value": restated_bound(lam, ell0, nu),
        },
    )


def _prime_factors(factorization) -> list[int]:
    if isinstance(factorization, Mapping):
        items = list(factorization.items())
    else:
        items = [(q, 1) for q in factorization]
    out = []
    for q, e in items:
        if q < 2 or e < 1:
            raise ValueError(f"invalid factor {q}^{e}")
        out.extend([int(q)] * int(e))
    return out


def freiman_transfer_applicable(k: int, factorization, n: int, ell: int) -> bool:
    """Whether an order-ell Freiman isomorphism into Z is guaranteed.

    ``factorization`` is either a list of primes (with repetition) or a
    mapping prime -> exponent, and must multiply to ``k``.
    """
    _require_n(n)
    factors = _prime_factors(factorization)
    if not factors:
        raise ValueError("empty factorization")
    if math.prod(factors) != k:
        raise ValueError(f"factors {factors} do not multiply to {k}")
    return ell <= n and min(factors) > n ** n


def _row(report: BoundReport) -> dict:
    return {
        "bound_name": report.bound_name,
        "value": report.value,
        "applicable": report.applicable,
        "reason_if_not": report.reason_if_not,
    }


def best_bound(p: int | None, n: int, ell: int, lam=None, c3=None,
               uniform: bool = True) -> BoundReport:
    """Smallest applicable bound among all evaluators.

    ``p=None`` means the summands live on Z.  For uniform summands the
    pointwise bound lambda is 1/n and ``lam`` may be omitted.
    Inapplicable candidates are listed but never win.
    """
    _require_n(n)
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    if uniform:
        lam = Fraction(1, n) if lam is None else to_fraction(lam)
    elif lam is None:
        raise ValueError("lambda is required for non-uniform summands")
    else:
        lam = to_fraction(lam)

    candidates: list[BoundReport] = [
        BoundReport("trivial", lam, True, "", {"lambda": lam})
    ]
    if uniform and p is not None and n <= p and ell >= 2:
        candidates.append(lev_bound(p, n, ell))
    if uniform and ell >= 3:
        tb = triple_bound(n)
        if p is not None and not freiman_transfer_applicable(p, [p], n, 3):
            tb = BoundReport(tb.bound_name, tb.value, False,
                             f"no Freiman transfer: p={p} <= n^n or n < 3", tb.intermediates)
        candidates.append(tb)
    if uniform and p is None and ell >= 2:
        candidates.append(berry_esseen_interval_bound(n, ell))
    if p is not None and ell >= 3 and c3 is not None and lam <= LAMBDA_MAX:
        candidates.append(iterated_bound(lam, ell, p, c3))

    usable = [c for c in candidates if c.applicable]
    winner = min(usable, key=lambda c: c.value)
    return BoundReport(
        "best", winner.value, True, "",
        {"winner": winner.bound_name, "candidates": [_row(c) for c in candidates]},
    )


def bound_rows(reports: Iterable[BoundReport]) -> list[dict]:
    return [_row(r) for r in reports]
