"""Wigner 3j symbols and linear-polarization transition coefficients.

Angular momenta and projections are passed as doubled integers (``two_j = 2j``)
so half-integers are exact and parity checks are integer arithmetic. The 3j
symbol is evaluated with the Racah sum over exact rationals; floats only
appear when a value is handed back to the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import InvalidInputError

MAX_TWO_J = 200


@dataclass(frozen=True)
class SignedSqrt:
    """Exact real number ``sign * sqrt(square)`` with a rational square."""

    sign: int
    square: Fraction

    def __float__(self) -> float:
        if self.sign == 0 or self.square == 0:
            return 0.0
        num, den = self.square.numerator, self.square.denominator
        return self.sign * math.sqrt(num / den)

    def __neg__(self) -> "SignedSqrt":
        return SignedSqrt(-self.sign, self.square)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0 or self.square == 0


ZERO = SignedSqrt(0, Fraction(0))


def _check_pair(two_j: int, two_m: int) -> None:
    if two_j < 0:
        raise InvalidInputError(f"negative angular momentum 2j={two_j}")
    if two_j > MAX_TWO_J:
        raise InvalidInputError(f"2j={two_j} exceeds supported bound {MAX_TWO_J}")
    if (two_j - two_m) % 2:
        raise InvalidInputError(f"parity mismatch: 2j={two_j}, 2m={two_m}")
    if abs(two_m) > two_j:
        raise InvalidInputError(f"|m| > j for 2j={two_j}, 2m={two_m}")


def _fact(two_x: int) -> int:
    # two_x is always even here; the callers have validated parity.
    return math.factorial(two_x // 2)


@lru_cache(maxsize=4096)
def wigner_3j_exact(two_j1: int, two_j2: int, two_j3: int,
                    two_m1: int, two_m2: int, two_m3: int) -> SignedSqrt:
    """Exact 3j symbol as ``SignedSqrt``; zero when a selection rule fails.

    Raises ``InvalidInputError`` for malformed arguments (parity mismatch,
    ``|m| > j``, negative or oversized ``j``).
    """
    for tj, tm in ((two_j1, two_m1), (two_j2, two_m2), (two_j3, two_m3)):
        _check_pair(tj, tm)

    if two_m1 + two_m2 + two_m3 != 0:
        return ZERO
    if not abs(two_j1 - two_j2) <= two_j3 <= two_j1 + two_j2:
        return ZERO
    if (two_j1 + two_j2 + two_j3) % 2:
        return ZERO
    if two_m1 == two_m2 == two_m3 == 0 and ((two_j1 + two_j2 + two_j3) // 2) % 2:
        return ZERO

    delta = Fraction(
        _fact(two_j1 + two_j2 - two_j3) * _fact(two_j1 - two_j2 + two_j3)
        * _fact(-two_j1 + two_j2 + two_j3),
        _fact(two_j1 + two_j2 + two_j3 + 2),
    )
    prefactor = (
        _fact(two_j1 + two_m1) * _fact(two_j1 - two_m1)
        * _fact(two_j2 + two_m2) * _fact(two_j2 - two_m2)
        * _fact(two_j3 + two_m3) * _fact(two_j3 - two_m3)
    )

    # Denominator factorial arguments, doubled, as affine functions of 2k.
    k_min = max(0, two_j2 - two_j3 - two_m1, two_j1 - two_j3 + two_m2) // 2
    k_max = min(two_j1 + two_j2 - two_j3, two_j1 - two_m1, two_j2 + two_m2) // 2
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        tk = 2 * k
        denom = (
            _fact(tk)
            * _fact(two_j3 - two_j2 + tk + two_m1)
            * _fact(two_j3 - two_j1 + tk - two_m2)
            * _fact(two_j1 + two_j2 - two_j3 - tk)
            * _fact(two_j1 - tk - two_m1)
            * _fact(two_j2 - tk + two_m2)
        )
        total += Fraction(-1 if k % 2 else 1, denom)

    if total == 0:
        return ZERO
    phase_exp = (two_j1 - two_j2 - two_m3) // 2
    sign = (-1) ** (phase_exp % 2) * (1 if total > 0 else -1)
    return SignedSqrt(sign, delta * prefactor * total * total)


def wigner_3j(two_j1: int, two_j2: int, two_j3: int,
              two_m1: int, two_m2: int, two_m3: int) -> float:
    """Wigner 3j symbol (j1 j2 j3; m1 m2 m3) with all arguments doubled."""
    return float(wigner_3j_exact(two_j1, two_j2, two_j3, two_m1, two_m2, two_m3))


def _check_levels(two_jb: int, two_jc: int) -> None:
    if two_jb < 0 or two_jc < 0:
        raise InvalidInputError("angular momenta must be non-negative")
    if (two_jb - two_jc) % 2:
        raise InvalidInputError(
            f"levels 2Jb={two_jb}, 2Jc={two_jc} have no common projections")
    if abs(two_jb - two_jc) > 2:
        raise InvalidInputError(
            f"transition 2Jb={two_jb} -> 2Jc={two_jc} is dipole-forbidden (|dJ| > 1)")
    if two_jb == two_jc == 0:
        raise InvalidInputError("J=0 -> J=0 is dipole-forbidden")


def transition_coefficient_exact(two_jb: int, two_jc: int, two_m: int) -> SignedSqrt:
    """Exact alpha_m = (-1)^(Jb - m) (Jb 1 Jc; -m 0 m)."""
    for tj, label in ((two_jb, "Jb"), (two_jc, "Jc")):
        if (tj - two_m) % 2 or abs(two_m) > tj:
            raise InvalidInputError(f"2m={two_m} is not a projection of level {label} (2J={tj})")
    value = wigner_3j_exact(two_jb, 2, two_jc, -two_m, 0, two_m)
    if ((two_jb - two_m) // 2) % 2:
        value = -value
    return value


def transition_coefficient(two_jb: int, two_jc: int, two_m: int) -> float:
    return float(transition_coefficient_exact(two_jb, two_jc, two_m))


@dataclass(frozen=True)
class TransitionCoefficients:
    """alpha_m for every projection shared by the two levels.

    ``entries`` maps doubled projection ``2m`` to the float coefficient,
    ``exact`` to its exact ``SignedSqrt`` form. Keys are in ascending order.
    """

    two_jb: int
    two_jc: int
    entries: dict[int, float]
    exact: dict[int, SignedSqrt] = field(repr=False)

    @property
    def projections(self) -> list[int]:
        return list(self.entries)

    def squares(self) -> dict[int, Fraction]:
        return {tm: v.square if not v.is_zero else Fraction(0) for tm, v in self.exact.items()}


def common_projections(two_jb: int, two_jc: int) -> list[int]:
    top = min(two_jb, two_jc)
    return list(range(-top, top + 1, 2))


def build_coefficient_table(two_jb: int, two_jc: int) -> TransitionCoefficients:
    _check_levels(two_jb, two_jc)
    exact = {tm: transition_coefficient_exact(two_jb, two_jc, tm)
             for tm in common_projections(two_jb, two_jc)}
    entries = {tm: float(v) for tm, v in exact.items()}
    if not all(math.isfinite(v) for v in entries.values()):
        raise InvalidInputError("non-finite transition coefficient")
    if two_jb == two_jc:
        # With the (-1)^(Jb-m) phase alpha_m is odd in m for Jb = Jc; only magnitudes pair up.
        for tm, v in exact.items():
            if v.square != exact[-tm].square:
                raise AssertionError(f"|alpha_m| asymmetry at 2m={tm}")
    return TransitionCoefficients(two_jb, two_jc, entries, exact)
