"""Small exact-arithmetic helpers shared across the package."""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Sequence


def is_prime(n: int) -> bool:
    """Deterministic trial division; fine up to about 1e12."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    i = 5
    while i * i <= n:
        if n % i == 0 or n % (i + 2) == 0:
            return False
        i += 6
    return True


def to_fraction(x) -> Fraction:
    """Coerce a number to a Fraction.

    Floats go through their shortest decimal repr, so ``0.9`` becomes
    ``9/10`` rather than the binary neighbour of 0.9.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, numbers.Real):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def common_denominator(values: Sequence[Fraction]) -> tuple[list[int], int]:
    """Return integer numerators over a shared denominator."""
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return [v.numerator * (den // v.denominator) for v in values], den


def reduce_ints(nums: Sequence[int], den: int) -> tuple[tuple[int, ...], int]:
    g = math.gcd(den, *nums)
    if g > 1:
        return tuple(x // g for x in nums), den // g
    return tuple(nums), den


def naive_int_convolve(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Schoolbook linear convolution, skipping zero entries."""
    out = [0] * (len(a) + len(b) - 1)
    nzb = [(j, y) for j, y in enumerate(b) if y]
    for i, x in enumerate(a):
        if x:
            for j, y in nzb:
                out[i + j] += x * y
    return out


def kronecker_int_convolve(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Exact linear convolution of nonnegative integer vectors.

    Packs each vector into one big integer with slots wide enough that no
    coefficient of the product can carry into its neighbour, multiplies,
    and unpacks.  Python's big-int multiply does the heavy lifting.
    """
    la, lb = len(a), len(b)
    ma, mb = max(a), max(b)
    if ma == 0 or mb == 0:
        return [0] * (la + lb - 1)
    bits = ma.bit_length() + mb.bit_length() + min(la, lb).bit_length()
    width = bits // 8 + 1
    pa = int.from_bytes(b"".join(x.to_bytes(width, "little") for x in a), "little")
    pb = int.from_bytes(b"".join(x.to_bytes(width, "little") for x in b), "little")
    n_out = la + lb - 1
    raw = (pa * pb).to_bytes(width * n_out, "little")
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") for i in range(n_out)]


def fraction_to_json(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator}


def fraction_from_json(obj) -> Fraction:
    return Fraction(int(obj["num"]), int(obj["den"]))


def encode_value(v):
    """JSON-encode a value, keeping Fractions exact as {num, den}."""
    if isinstance(v, Fraction):
        return fraction_to_json(v)
    if isinstance(v, dict):
        return {str(k): encode_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [encode_value(x) for x in v]
    return v


def decode_value(v):
    if isinstance(v, dict):
        if set(v) == {"num", "den"}:
            return fraction_from_json(v)
        return {k: decode_value(x) for k, x in v.items()}
    if isinstance(v, list):
        return [decode_value(x) for x in v]
    return v


def format_number(v, digits: int = 12) -> str:
    """Human form: exact rationals as ``num/den (decimal)``."""
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator} ({_sig(v, digits)})"
    if isinstance(v, float):
        return f"{v:.{digits}g}"
    return str(v)


def _sig(q: Fraction, digits: int) -> str:
    # float() is fine for display except when the value sits within 1e-12 of 1
    if q != 0 and abs(1 - q) < Fraction(1, 10**9):
        gap = 1 - q
        return f"1 - {float(gap):.{digits}g}"
    return f"{float(q):.{digits}g}"
