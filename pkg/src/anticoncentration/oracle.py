"""Brute-force ground truth for the formulas and bounds.

Everything here is computed either by direct enumeration or with the
exact backend, and every experiment yields :class:`ScanRecord` values
that serialize to JSON lines and CSV.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from ._arith import decode_value, encode_value, is_prime, to_fraction
from .bounds import LAMBDA_MAX, peak_location, peak_triple_count_formula
from .dist import (
    ModularDistribution,
    max_concentration,
    self_convolve,
    uniform_on,
)

DEFAULT_BUDGET = 10**8
SCAN_BUDGET = 10**7
RANDOM_DENOMINATOR = 10**6

CSV_FIELDS = ("experiment", "instance", "exact_value", "bound_value", "pass", "seed")


class BudgetExceeded(ValueError):
    def __init__(self, required: int, budget: int, what: str):
        super().__init__(f"{what} needs {required} evaluations, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class ScanRecord:
    experiment: str
    instance: str
    exact_value: Fraction
    bound_value: Union[Fraction, float]
    passed: bool
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "instance": self.instance,
            "exact_value": encode_value(self.exact_value),
            "bound_value": encode_value(self.bound_value),
            "pass": self.passed,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj) -> "ScanRecord":
        return cls(obj["experiment"], obj["instance"], decode_value(obj["exact_value"]),
                   decode_value(obj["bound_value"]), bool(obj["pass"]), obj.get("seed"))

    def to_csv_row(self) -> list[str]:
        return [self.experiment, self.instance, _csv_num(self.exact_value),
                _csv_num(self.bound_value), "true" if self.passed else "false",
                "" if self.seed is None else str(self.seed)]

    @classmethod
    def from_csv_row(cls, row: Sequence[str]) -> "ScanRecord":
        exp, inst, ev, bv, ok, seed = row
        return cls(exp, inst, _parse_num(ev), _parse_num(bv), ok == "true",
                   int(seed) if seed else None)


def _csv_num(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def _parse_num(s: str):
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    return float(s)


def records_to_jsonl(records: Iterable[ScanRecord]) -> str:
    return "".join(json.dumps(r.to_dict()) + "\n" for r in records)


def records_from_jsonl(text: str) -> list[ScanRecord]:
    return [ScanRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def records_to_csv(records: Iterable[ScanRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow(r.to_csv_row())
    return buf.getvalue()


def records_from_csv(text: str) -> list[ScanRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_FIELDS:
        raise ValueError("missing or unexpected CSV header")
    return [ScanRecord.from_csv_row(r) for r in rows[1:]]


def _fmt_set(points: Iterable[int]) -> str:
    return "{" + ",".join(str(x) for x in points) + "}"


# ----------------------------------------------------------- enumeration

def count_solutions(points: Iterable[int], ell: int, x: int, modulus: int | None = None,
                    budget: int = DEFAULT_BUDGET) -> int:
    """Number of ordered ell-tuples from ``points`` with sum ``x``.

    Enumerates the first ell-1 coordinates and looks the last one up, so
    the work is |A|^(ell-1) even though the budget is charged at |A|^ell.
    """
    pts = [int(a) for a in points]
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    required = len(pts) ** ell
    if required > budget:
        raise BudgetExceeded(required, budget, "count_solutions")
    if modulus is not None:
        pts = [a % modulus for a in pts]
        x %= modulus
    members = set(pts)
    count = 0
    for head in itertools.product(pts, repeat=ell - 1):
        rest = x - sum(head)
        if modulus is not None:
            rest %= modulus
        if rest in members:
            count += 1
    return count


def peak_triple_count(n: int) -> int:
    """Triples from {1..n} hitting the peak floor(3(n+1)/2).

    Odd n follows the paired-sum count 2 (sum_{x<n} x - sum_{x<=(n-1)/2} x) + n;
    even n uses the analogous closed form 3 n^2 / 4.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if n % 2:
        return 2 * (n * (n - 1) // 2 - (n - 1) * (n + 1) // 8) + n
    return peak_triple_count_formula(n)


def triple_formula_scan(n_max: int, n_min: int = 2) -> list[ScanRecord]:
    """Brute-force peak counts against the closed form for n_min..n_max."""
    out = []
    for n in range(n_min, n_max + 1):
        peak = 3 * (n + 1) // 2
        brute = count_solutions(range(1, n + 1), 3, peak)
        formula = peak_triple_count(n)
        out.append(ScanRecord("triple-formula", f"n={n} peak={peak}",
                              Fraction(brute, n ** 3), Fraction(formula, n ** 3),
                              brute == formula))
    return out


def leader_radcliffe_scan(n: int, ell: int, window: int,
                          budget: int = SCAN_BUDGET) -> list[ScanRecord]:
    """Every n-subset of {0..window-1} against the interval {0..n-1}.

    One record per subset: its l-fold max concentration must not exceed the
    interval's.  The interval's own record also requires the peak points
    predicted by ``peak_location`` to attain the maximum.
    """
    if n < 2 or ell < 2:
        raise ValueError("need n >= 2 and ell >= 2")
    if window < n:
        raise ValueError("window must be at least n")
    required = math.comb(window, n) * n ** ell
    if required > budget:
        raise BudgetExceeded(required, budget, "leader_radcliffe_scan")

    interval = self_convolve(uniform_on(range(n)), ell)
    top = max_concentration(interval).max_probability
    # interval {0..n-1} is {1..n} shifted by -1 in each summand
    peaks = [t - ell for t in peak_location(n, ell).translated]
    peak_ok = all(interval.weight(t) == top for t in peaks)
    records = []
    for subset in itertools.combinations(range(window), n):
        mc = max_concentration(self_convolve(uniform_on(subset), ell)).max_probability
        inst = f"n={n} ell={ell} A={_fmt_set(subset)}"
        ok = mc <= top
        if subset == tuple(range(n)):
            inst += f" interval peaks={_fmt_set(peaks)}"
            ok = ok and peak_ok
        records.append(ScanRecord("leader-radcliffe", inst, mc, top, ok))
    return records


# ------------------------------------------------------------ random laws

def _water_fill(weights: list[int], cap: int) -> list[int]:
    """Clip integer weights at ``cap`` and hand the excess to the rest.

    Excess is spread proportionally over entries still below the cap, and
    the rounding remainder unit by unit in index order; repeats until no
    entry exceeds the cap.  Total mass is preserved exactly.
    """
    w = list(weights)
    while True:
        excess = sum(v - cap for v in w if v > cap)
        if not excess:
            return w
        w = [min(v, cap) for v in w]
        room = [i for i, v in enumerate(w) if v < cap]
        base = sum(w[i] for i in room)
        given = 0
        for i in room:
            share = excess * w[i] // base if base else 0
            w[i] += share
            given += share
        left = excess - given
        for i in room:
            if not left:
                break
            if w[i] < cap:
                w[i] += 1
                left -= 1
        if left:
            # every slot hit the cap on the first pass; spill into any room left
            for i in range(len(w)):
                take = min(cap - w[i], left) if w[i] < cap else 0
                w[i] += take
                left -= take
        if left:
            raise RuntimeError("not enough room below the cap")


def random_bounded_distribution(p: int, lam, seed: int,
                                denominator: int = RANDOM_DENOMINATOR) -> ModularDistribution:
    """Reproducible random law on Z_p with every weight <= lam.

    Weights are integers over ``denominator``.  Raw weights are heavy
    tailed so that the cap is often active.  The fully uniform law on Z_p
    is never returned.
    """
    lam = to_fraction(lam)
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if not 0 < lam <= LAMBDA_MAX:
        raise ValueError(f"lambda must lie in (0, 9/10], got {lam}")
    if p <= 2 / lam:
        raise ValueError(f"need p > 2/lambda = {float(2 / lam):.6g}, got p={p}")
    cap = math.floor(lam * denominator)
    rng = random.Random(seed)
    while True:
        size = rng.randint(min(p, math.ceil(denominator / cap) + 1), p)
        support = rng.sample(range(p), size)
        power = rng.choice((1, 2, 3, 4))
        raw = [rng.randint(1, 1000) ** power for _ in support]
        total = sum(raw)
        nums = [r * denominator // total for r in raw]
        for i in range(denominator - sum(nums)):
            nums[i % size] += 1
        nums = _water_fill(nums, cap)
        cells = [0] * p
        for x, v in zip(support, nums):
            cells[x] = v
        if len(set(cells)) > 1:
            return ModularDistribution._exact(p, cells, denominator)


def general3_stress(p: int, lam, trials: int, seed: int, c3, max_k: int = 3) -> list[ScanRecord]:
    """Exact 3^k-fold concentrations of random bounded laws against c3^k * lambda.

    The pointwise bound used for each trial is the law's own max weight
    when p exceeds 2 / (max weight), which is the sharpest choice the
    hypotheses allow; otherwise the requested ``lam``.
    """
    lam = to_fraction(lam)
    c3 = to_fraction(c3)
    records = []
    for t in range(trials):
        trial_seed = seed * 1_000_003 + t
        d = random_bounded_distribution(p, lam, trial_seed)
        top = d.max_weight
        lam_used = top if p > 2 / top else lam
        inst = f"p={p} trial={t} max_weight={top} lambda={lam_used}"
        summed = d
        for k in range(1, max_k + 1):
            if k > 1 and not p > 2 / (c3 ** (k - 1) * lam_used):
                break
            summed = self_convolve(summed, 3)
            mc = max_concentration(summed).max_probability
            bound = c3 ** k * lam_used
            records.append(ScanRecord("general3" if k == 1 else f"general3-k{k}",
                                      f"{inst} fold={3 ** k}", mc, bound, mc <= bound, trial_seed))
    return records


def summarize(records: Sequence[ScanRecord]) -> dict:
    passed = sum(r.passed for r in records)
    return {"records": len(records), "passed": passed, "failed": len(records) - passed}
