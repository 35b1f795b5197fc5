"""Probability distributions on Z_p and on Z.

Two arithmetic backends are supported:

``"exact"``
    Weights are rationals stored as integer numerators over one shared
    denominator.  Convolution is carried out in exact integer arithmetic.
``"float"``
    Weights are a float64 numpy vector.

Every distribution is immutable; all operations return new objects.
Mixing backends in one operation raises instead of silently converting.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from ._arith import (
    common_denominator,
    is_prime,
    kronecker_int_convolve,
    naive_int_convolve,
    reduce_ints,
    to_fraction,
)

EXACT = "exact"
FLOAT = "float"
BACKENDS = (EXACT, FLOAT)

FLOAT_TOL = 1e-12

# exact: "kronecker" (packed big-int product) or "naive" (schoolbook)
# float: "naive" (direct np.convolve) or "transform" (FFT)
EXACT_METHODS = ("kronecker", "naive")
FLOAT_METHODS = ("naive", "transform")


class _Weights:
    """Backend-specific storage shared by both distribution kinds."""

    __slots__ = ("backend", "_num", "_den", "_arr")

    def _init_exact(self, nums: Sequence[int], den: int) -> None:
        self.backend = EXACT
        self._num, self._den = reduce_ints(nums, den)
        self._arr = None

    def _init_float(self, arr: np.ndarray) -> None:
        self.backend = FLOAT
        arr = np.array(arr, dtype=np.float64)
        arr.setflags(write=False)
        self._arr = arr
        self._num = None
        self._den = None

    def _init_from_weights(self, weights, backend: str | None) -> None:
        weights = list(weights)
        if not weights:
            raise ValueError("weights must be nonempty")
        if backend is None:
            backend = FLOAT if any(isinstance(w, (float, np.floating)) for w in weights) else EXACT
        if backend == EXACT:
            fracs = [to_fraction(w) for w in weights]
            if any(f < 0 for f in fracs):
                raise ValueError("weights must be nonnegative")
            if sum(fracs) != 1:
                raise ValueError(f"weights sum to {sum(fracs)}, not exactly 1")
            nums, den = common_denominator(fracs)
            self._init_exact(nums, den)
        elif backend == FLOAT:
            arr = np.asarray(weights, dtype=np.float64)
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ValueError("weights must be finite and nonnegative")
            if abs(arr.sum() - 1.0) > FLOAT_TOL:
                raise ValueError(f"weights sum to {arr.sum()!r}, not 1")
            self._init_float(arr)
        else:
            raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")

    def __len__(self) -> int:
        return len(self._num) if self.backend == EXACT else len(self._arr)

    def _w(self, i: int):
        if self.backend == EXACT:
            return Fraction(self._num[i], self._den)
        return float(self._arr[i])

    @property
    def weights(self) -> tuple:
        """Weights as a tuple of Fractions (exact) or floats."""
        if self.backend == EXACT:
            return tuple(Fraction(x, self._den) for x in self._num)
        return tuple(float(x) for x in self._arr)

    @property
    def numerators(self) -> tuple[int, ...]:
        self._require_exact()
        return self._num

    @property
    def denominator(self) -> int:
        self._require_exact()
        return self._den

    def as_array(self) -> np.ndarray:
        """Float64 copy of the weight vector (either backend)."""
        if self.backend == EXACT:
            return np.array([float(Fraction(x, self._den)) for x in self._num])
        return self._arr.copy()

    @property
    def max_weight(self):
        if self.backend == EXACT:
            return Fraction(max(self._num), self._den)
        return float(self._arr.max())

    def _require_exact(self) -> None:
        if self.backend != EXACT:
            raise ValueError("operation needs the exact backend")

    def _same_weights(self, other: "_Weights") -> bool:
        if self.backend != other.backend:
            return False
        if self.backend == EXACT:
            return self._den == other._den and self._num == other._num
        return np.array_equal(self._arr, other._arr)


class ModularDistribution(_Weights):
    """A probability vector on Z_m indexed by residues 0..m-1."""

    __slots__ = ("modulus",)

    def __init__(self, modulus: int, weights: Iterable, backend: str | None = None):
        if not isinstance(modulus, numbers.Integral) or modulus < 2:
            raise ValueError(f"modulus must be an integer >= 2, got {modulus!r}")
        self.modulus = int(modulus)
        self._init_from_weights(weights, backend)
        if len(self) != self.modulus:
            raise ValueError(f"expected {self.modulus} weights, got {len(self)}")

    @classmethod
    def _exact(cls, modulus: int, nums: Sequence[int], den: int) -> "ModularDistribution":
        self = cls.__new__(cls)
        self.modulus = modulus
        self._init_exact(nums, den)
        return self

    @classmethod
    def _float(cls, modulus: int, arr: np.ndarray) -> "ModularDistribution":
        self = cls.__new__(cls)
        self.modulus = modulus
        self._init_float(arr)
        return self

    def weight(self, x: int):
        return self._w(x % self.modulus)

    def support(self) -> list[int]:
        if self.backend == EXACT:
            return [i for i, v in enumerate(self._num) if v]
        return [int(i) for i in np.flatnonzero(self._arr)]

    def to_float(self) -> "ModularDistribution":
        if self.backend == FLOAT:
            return self
        return ModularDistribution._float(self.modulus, self.as_array())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModularDistribution):
            return NotImplemented
        return self.modulus == other.modulus and self._same_weights(other)

    def __hash__(self) -> int:
        if self.backend == EXACT:
            return hash((self.modulus, self._num, self._den))
        return hash((self.modulus, self._arr.tobytes()))

    def __repr__(self) -> str:
        return f"ModularDistribution(modulus={self.modulus}, backend={self.backend!r}, support={self.support()[:8]}...)"


class IntegerDistribution(_Weights):
    """A finitely supported probability vector on Z.

    ``weights[i]`` is the probability of the point ``offset + i``.  The
    window is trimmed on construction so that the first and last weights
    are nonzero.
    """

    __slots__ = ("offset",)

    def __init__(self, offset: int, weights: Iterable, backend: str | None = None):
        self._init_from_weights(weights, backend)
        self.offset = int(offset)
        self._trim()

    @classmethod
    def _exact(cls, offset: int, nums: Sequence[int], den: int) -> "IntegerDistribution":
        self = cls.__new__(cls)
        self.offset = offset
        self._init_exact(nums, den)
        self._trim()
        return self

    @classmethod
    def _float(cls, offset: int, arr: np.ndarray) -> "IntegerDistribution":
        self = cls.__new__(cls)
        self.offset = offset
        self._init_float(arr)
        self._trim()
        return self

    def _trim(self) -> None:
        if self.backend == EXACT:
            nums = self._num
            lo = next(i for i, v in enumerate(nums) if v)
            hi = len(nums) - next(i for i, v in enumerate(reversed(nums)) if v)
            if lo or hi < len(nums):
                self._num = nums[lo:hi]
                self.offset += lo
        else:
            nz = np.flatnonzero(self._arr)
            lo, hi = int(nz[0]), int(nz[-1]) + 1
            if lo or hi < len(self._arr):
                arr = self._arr[lo:hi].copy()
                arr.setflags(write=False)
                self._arr = arr
                self.offset += lo

    @property
    def points(self) -> range:
        return range(self.offset, self.offset + len(self))

    def weight(self, x: int):
        i = x - self.offset
        if 0 <= i < len(self):
            return self._w(i)
        return Fraction(0) if self.backend == EXACT else 0.0

    def support(self) -> list[int]:
        if self.backend == EXACT:
            return [self.offset + i for i, v in enumerate(self._num) if v]
        return [self.offset + int(i) for i in np.flatnonzero(self._arr)]

    def to_float(self) -> "IntegerDistribution":
        if self.backend == FLOAT:
            return self
        return IntegerDistribution._float(self.offset, self.as_array())

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntegerDistribution):
            return NotImplemented
        return self.offset == other.offset and self._same_weights(other)

    def __hash__(self) -> int:
        if self.backend == EXACT:
            return hash((self.offset, self._num, self._den))
        return hash((self.offset, self._arr.tobytes()))

    def __repr__(self) -> str:
        return f"IntegerDistribution(offset={self.offset}, backend={self.backend!r}, length={len(self)})"


Distribution = Union[ModularDistribution, IntegerDistribution]


@dataclass(frozen=True)
class ConcentrationResult:
    """Largest point mass of a distribution and every point attaining it."""

    max_probability: Union[Fraction, float]
    argmax_points: tuple[int, ...]

    def to_dict(self) -> dict:
        mp = self.max_probability
        return {
            "max_probability": {"num": mp.numerator, "den": mp.denominator}
            if isinstance(mp, Fraction) else mp,
            "argmax_points": list(self.argmax_points),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ConcentrationResult":
        mp = obj["max_probability"]
        if isinstance(mp, dict):
            mp = Fraction(int(mp["num"]), int(mp["den"]))
        return cls(mp, tuple(int(x) for x in obj["argmax_points"]))


def uniform_on(support: Iterable[int], modulus: int | None = None,
               backend: str = EXACT) -> Distribution:
    """Uniform law on a set of distinct points.

    With ``modulus=None`` the result lives on Z, otherwise on Z_modulus and
    every point must already be a residue in ``0..modulus-1``.
    """
    pts = [int(x) for x in support]
    if not pts:
        raise ValueError("support must be nonempty")
    if len(set(pts)) != len(pts):
        raise ValueError(f"support points must be distinct: {pts}")
    n = len(pts)
    if modulus is None:
        lo, hi = min(pts), max(pts)
        cells = [0] * (hi - lo + 1)
        for x in pts:
            cells[x - lo] = 1
        if backend == EXACT:
            return IntegerDistribution._exact(lo, cells, n)
        if backend == FLOAT:
            return IntegerDistribution._float(lo, np.array(cells, dtype=np.float64) / n)
        raise ValueError(f"unknown backend {backend!r}")
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    bad = [x for x in pts if not 0 <= x < modulus]
    if bad:
        raise ValueError(f"points {bad} are not residues mod {modulus}")
    cells = [0] * modulus
    for x in pts:
        cells[x] = 1
    if backend == EXACT:
        return ModularDistribution._exact(modulus, cells, n)
    if backend == FLOAT:
        return ModularDistribution._float(modulus, np.array(cells, dtype=np.float64) / n)
    raise ValueError(f"unknown backend {backend!r}")


def point_mass(x: int, modulus: int | None = None, backend: str = EXACT) -> Distribution:
    if modulus is not None:
        x %= modulus
    return uniform_on([x], modulus, backend)


def _check_method(backend: str, method: str | None) -> str:
    if backend == EXACT:
        method = method or "kronecker"
        if method not in EXACT_METHODS:
            raise ValueError(f"method {method!r} is not exact; use one of {EXACT_METHODS}")
    else:
        method = method or "naive"
        if method not in FLOAT_METHODS:
            raise ValueError(f"unknown float method {method!r}; use one of {FLOAT_METHODS}")
    return method


def convolve(d1: Distribution, d2: Distribution, method: str | None = None) -> Distribution:
    """Law of the sum of independent draws from ``d1`` and ``d2``."""
    if d1.backend != d2.backend:
        raise ValueError(f"backend mismatch: {d1.backend} vs {d2.backend}")
    method = _check_method(d1.backend, method)
    if isinstance(d1, ModularDistribution) and isinstance(d2, ModularDistribution):
        if d1.modulus != d2.modulus:
            raise ValueError(f"modulus mismatch: {d1.modulus} vs {d2.modulus}")
        p = d1.modulus
        if d1.backend == EXACT:
            conv = kronecker_int_convolve if method == "kronecker" else naive_int_convolve
            lin = conv(d1._num, d2._num)
            folded = lin[:p]
            for i, v in enumerate(lin[p:]):
                folded[i] += v
            return ModularDistribution._exact(p, folded, d1._den * d2._den)
        if method == "transform":
            out = np.fft.irfft(np.fft.rfft(d1._arr) * np.fft.rfft(d2._arr), n=p)
            np.maximum(out, 0.0, out=out)
        else:
            lin = np.convolve(d1._arr, d2._arr)
            out = lin[:p].copy()
            out[:p - 1] += lin[p:]
        return ModularDistribution._float(p, out)
    if isinstance(d1, IntegerDistribution) and isinstance(d2, IntegerDistribution):
        offset = d1.offset + d2.offset
        if d1.backend == EXACT:
            conv = kronecker_int_convolve if method == "kronecker" else naive_int_convolve
            return IntegerDistribution._exact(offset, conv(d1._num, d2._num), d1._den * d2._den)
        if method == "transform":
            size = len(d1) + len(d2) - 1
            out = np.fft.irfft(np.fft.rfft(d1._arr, size) * np.fft.rfft(d2._arr, size), n=size)
            np.maximum(out, 0.0, out=out)
        else:
            out = np.convolve(d1._arr, d2._arr)
        return IntegerDistribution._float(offset, out)
    raise ValueError("cannot convolve a distribution on Z with one on Z_p")


def self_convolve(d: Distribution, ell: int, method: str | None = None) -> Distribution:
    """Law of the sum of ``ell`` independent copies, by repeated squaring."""
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    result = None
    base = d
    while True:
        if ell & 1:
            result = base if result is None else convolve(result, base, method)
        ell >>= 1
        if not ell:
            return result
        base = convolve(base, base, method)


def concentration_at(d: Distribution, x: int):
    """Probability of the single point ``x``."""
    return d.weight(x)


def max_concentration(d: Distribution) -> ConcentrationResult:
    """Largest point mass, with all maximizers in ascending order."""
    base = d.offset if isinstance(d, IntegerDistribution) else 0
    if d.backend == EXACT:
        top = max(d._num)
        pts = tuple(base + i for i, v in enumerate(d._num) if v == top)
        return ConcentrationResult(Fraction(top, d._den), pts)
    top = float(d._arr.max())
    pts = tuple(base + int(i) for i in np.flatnonzero(d._arr >= top - FLOAT_TOL))
    return ConcentrationResult(top, pts)


def translate(d: Distribution, b: int) -> Distribution:
    """Shift every point by ``b`` (mod p on Z_p)."""
    if isinstance(d, IntegerDistribution):
        if d.backend == EXACT:
            return IntegerDistribution._exact(d.offset + b, d._num, d._den)
        return IntegerDistribution._float(d.offset + b, d._arr)
    p = d.modulus
    b %= p
    if d.backend == EXACT:
        return ModularDistribution._exact(p, d._num[-b:] + d._num[:-b] if b else d._num, d._den)
    return ModularDistribution._float(p, np.roll(d._arr, b))


def dilate(d: ModularDistribution, a: int) -> ModularDistribution:
    """Move the weight at ``x`` to ``a*x mod p``; needs p prime and a != 0."""
    p = d.modulus
    if not is_prime(p):
        raise ValueError(f"dilation needs a prime modulus, got {p}")
    a %= p
    if a == 0:
        raise ValueError("dilation factor must be nonzero mod p")
    idx = [(a * x) % p for x in range(p)]
    if d.backend == EXACT:
        out = [0] * p
        for x, v in enumerate(d._num):
            out[idx[x]] = v
        return ModularDistribution._exact(p, out, d._den)
    out = np.empty(p)
    out[idx] = d._arr
    return ModularDistribution._float(p, out)


def dft(d: ModularDistribution) -> np.ndarray:
    """Coefficients ``sum_x w(x) exp(-2 pi i x k / p)`` for k = 0..p-1."""
    return np.fft.fft(d.as_array())


def inverse_dft(coeffs: Sequence[complex]) -> np.ndarray:
    """Recover the (real) weight vector from its DFT coefficients."""
    return np.fft.ifft(np.asarray(coeffs)).real


def is_symmetric(d: ModularDistribution) -> bool:
    """True iff the weight at x equals the weight at -x for every residue."""
    p = d.modulus
    if d.backend == EXACT:
        return all(d._num[x] == d._num[(-x) % p] for x in range(p))
    arr = d._arr
    return bool(np.all(np.abs(arr - arr[(-np.arange(p)) % p]) <= FLOAT_TOL))
