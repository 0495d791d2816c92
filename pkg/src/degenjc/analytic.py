"""Closed-form dynamics of the damped dispersive model.

Two independent routes are provided. The entropy functions evaluate the
weighted sums over sublevel pairs (difference frequencies chi, sum
frequencies lambda) directly. The density-matrix functions build explicit
matrices from the coherent-state solution; ``1 - Tr(rho^2)`` of those must
agree with the sums.

Times are absolute (units of 1/Omega when Omega = 1).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce

import numpy as np

from .angular import SignedSqrt, TransitionCoefficients, build_coefficient_table
from .errors import InvalidInputError, InvariantViolation, NoFinitePeriodError
from .hilbert import LevelSpec, atomic_initial_state, coherent_vector

BOUND_TOL = 1e-12


class FrequencyConvention(enum.Enum):
    """How sublevel frequencies omega_m follow from alpha_m.

    PAPER_TEXT uses omega_m = alpha_m * Omega. SZ_DERIVED uses the diagonal
    of S_z, omega_m = alpha_m**2 * Omega / 2, which is what the effective
    Hamiltonian Omega (2 a^+ a + 1) S_z actually generates.
    """

    PAPER_TEXT = "paper-text"
    SZ_DERIVED = "sz-derived"


@dataclass(frozen=True)
class ModelParams:
    levels: LevelSpec
    omega: float = 1.0
    kappa: float = 0.0
    alpha: complex = 1.0
    convention: FrequencyConvention = FrequencyConvention.PAPER_TEXT
    cutoff: int = 30

    def __post_init__(self):
        if not self.omega > 0:
            raise InvalidInputError(f"Omega must be positive, got {self.omega}")
        if not self.kappa >= 0:
            raise InvalidInputError(f"kappa must be non-negative, got {self.kappa}")
        if self.cutoff < 2:
            raise InvalidInputError(f"cutoff must be >= 2, got {self.cutoff}")
        if not isinstance(self.convention, FrequencyConvention):
            object.__setattr__(self, "convention", FrequencyConvention(self.convention))

    @property
    def alpha_sq(self) -> float:
        return abs(self.alpha) ** 2

    @cached_property
    def coeffs(self) -> TransitionCoefficients:
        return build_coefficient_table(self.levels.two_jb, self.levels.two_jc)

    @cached_property
    def table(self) -> "FrequencyTable":
        return build_frequency_table(self.levels, self.coeffs, self.omega, self.convention)

    def describe(self) -> dict:
        return {
            "two_jb": self.levels.two_jb,
            "two_jc": self.levels.two_jc,
            "omega": self.omega,
            "kappa": self.kappa,
            "alpha": self.alpha,
            "alpha_sq": self.alpha_sq,
            "convention": self.convention.value,
            "cutoff": self.cutoff,
        }


@dataclass(frozen=True)
class FrequencyTable:
    """Sublevel frequencies omega_m keyed by doubled projection.

    When the frequencies are commensurate, ``multiples[m] * unit == omegas[m]``
    with exact rational multiples; otherwise both are ``None``.
    """

    omegas: dict[int, float]
    multiples: dict[int, Fraction] | None = field(default=None, repr=False)
    unit: float | None = None

    @classmethod
    def from_multiples(cls, multiples: dict[int, Fraction], unit: float) -> "FrequencyTable":
        multiples = {m: Fraction(v) for m, v in multiples.items()}
        return cls({m: float(v) * unit for m, v in multiples.items()}, multiples, unit)

    @property
    def chi(self) -> dict[tuple[int, int], float]:
        return {(m, k): wm - wk for m, wm in self.omegas.items() for k, wk in self.omegas.items()}

    @property
    def lam(self) -> dict[tuple[int, int], float]:
        return {(m, k): wm + wk for m, wm in self.omegas.items() for k, wk in self.omegas.items()}


def _rational_sqrt(x: Fraction) -> Fraction | None:
    num, den = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if num * num == x.numerator and den * den == x.denominator:
        return Fraction(num, den)
    return None


def _commensurate(values: dict[int, SignedSqrt]) -> tuple[Fraction, dict[int, Fraction]] | None:
    """Write each value as p_m * sqrt(base) with rational p_m, if possible."""
    nonzero = [v.square for v in values.values() if not v.is_zero]
    if not nonzero:
        return Fraction(1), {m: Fraction(0) for m in values}
    base = nonzero[0]
    out = {}
    for m, v in values.items():
        if v.is_zero:
            out[m] = Fraction(0)
            continue
        root = _rational_sqrt(v.square / base)
        if root is None:
            return None
        out[m] = v.sign * root
    return base, out


def build_frequency_table(levels: LevelSpec, coeffs: TransitionCoefficients, omega: float,
                          convention: FrequencyConvention = FrequencyConvention.PAPER_TEXT
                          ) -> FrequencyTable:
    if not coeffs.entries:
        raise InvalidInputError("empty coefficient table")
    if (coeffs.two_jb, coeffs.two_jc) != (levels.two_jb, levels.two_jc):
        raise InvalidInputError("coefficients do not match the level pair")
    convention = FrequencyConvention(convention)
    if convention is FrequencyConvention.SZ_DERIVED:
        return FrequencyTable.from_multiples(
            {m: sq / 2 for m, sq in coeffs.squares().items()}, omega)
    split = _commensurate(coeffs.exact)
    if split is None:
        return FrequencyTable({m: a * omega for m, a in coeffs.entries.items()})
    base, multiples = split
    return FrequencyTable.from_multiples(multiples, float(SignedSqrt(1, base)) * omega)


def _fraction_gcd(values: list[Fraction]) -> Fraction:
    den = reduce(math.lcm, (v.denominator for v in values), 1)
    num = reduce(math.gcd, (int(v * den) for v in values), 0)
    return Fraction(num, den)


def disentanglement_period(table: FrequencyTable) -> float:
    """Smallest t > 0 with sin(chi t) = sin(lambda t) = 0 for every pair."""
    if table.multiples is None:
        raise NoFinitePeriodError("sublevel frequencies are incommensurate")
    p = table.multiples
    freqs = [abs(p[m] - p[k]) for m in p for k in p] + [abs(p[m] + p[k]) for m in p for k in p]
    freqs = [f for f in freqs if f != 0]
    if not freqs:
        raise NoFinitePeriodError("all pair frequencies vanish; the state never entangles")
    return math.pi / (float(_fraction_gcd(freqs)) * table.unit)


def gamma_fn(x, t, alpha_sq: float, kappa: float):
    """Reservoir damping exponent; identically zero for kappa = 0 or x = 0."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    if kappa == 0:
        out = np.zeros(x.shape)
    else:
        decay = np.exp(-2 * kappa * t)
        # kappa/(kappa^2+x^2) times the bracket, scaled by hypot to avoid underflow.
        with np.errstate(invalid="ignore", divide="ignore"):
            h = np.hypot(kappa, x)
            k_, x_ = kappa / h, x / h
            bracket = k_ * (decay * np.cos(2 * x * t) - 1) - x_ * decay * np.sin(2 * x * t)
            out = alpha_sq * np.expm1(-2 * kappa * t) - alpha_sq * k_ * bracket
        out = np.where((x == 0) | (t == 0), 0.0, out)
    return out if out.ndim else float(out)


def theta_fn(x, t, alpha_sq: float, kappa: float):
    """Phase accompanying ``gamma_fn``; -x t exactly when kappa = 0."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    out = -x * t
    if kappa != 0:
        decay = np.exp(-2 * kappa * t)
        with np.errstate(invalid="ignore", divide="ignore"):
            h = np.hypot(kappa, x)
            k_, x_ = kappa / h, x / h
            bracket = x_ * (decay * np.cos(2 * x * t) - 1) + k_ * decay * np.sin(2 * x * t)
            out = out + alpha_sq * k_ * bracket
        out = np.where((x == 0) | (t == 0), 0.0, out)
    return out if out.ndim else float(out)


def coherent_amplitude(alpha: complex, kappa: float, t):
    """Amplitude of the damped coherent state, alpha * exp(-kappa t)."""
    return alpha * np.exp(-kappa * np.asarray(t, dtype=float))


def sublevel_frequencies(levels: LevelSpec, table: FrequencyTable) -> tuple[np.ndarray, np.ndarray]:
    """omega_m over each level's own projections; uncoupled sublevels get 0."""
    omega_b = np.array([table.omegas.get(m, 0.0) for m in levels.projections_b])
    omega_c = np.array([table.omegas.get(m, 0.0) for m in levels.projections_c])
    return omega_b, omega_c


def _check_same_levels(levels: LevelSpec) -> None:
    if levels.two_jb != levels.two_jc:
        warnings.warn("entropy formulas for Jb != Jc are experimental", stacklevel=3)


def _check_bounds(name: str, values: np.ndarray, upper: float, inclusive: bool) -> None:
    lo = values.min(initial=0.0)
    hi = values.max(initial=0.0)
    too_high = hi > upper + BOUND_TOL if inclusive else hi >= upper
    if lo < -BOUND_TOL or too_high:
        raise InvariantViolation(f"{name} left its bounds: range [{lo:.3g}, {hi:.3g}]")


def linear_entropies(omega_b, omega_c, alpha_sq: float, kappa: float, t):
    """(S_total, S_atom, S_field) from the weighted pair sums.

    ``omega_b`` and ``omega_c`` list omega_m for the sublevels of each level.
    Block bb uses chi over b pairs, cc uses chi over c pairs, and the two
    cross blocks use lambda = omega_m(b) + omega_m'(c).
    """
    omega_b = np.asarray(omega_b, dtype=float)
    omega_c = np.asarray(omega_c, dtype=float)
    d_b, d_c = len(omega_b), len(omega_c)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))

    w_b, w_c, w_bc = 1 / d_b**2, 1 / d_c**2, 2 / (d_b * d_c)
    weight_total = 0.25 * (w_b * d_b**2 + w_c * d_c**2 + w_bc * d_b * d_c)
    if abs(weight_total - 1) > 1e-15:
        raise InvariantViolation(f"pair weights sum to {weight_total}, not 1")

    blocks = (
        (w_b, (omega_b[:, None] - omega_b[None, :]).ravel()),
        (w_c, (omega_c[:, None] - omega_c[None, :]).ravel()),
        (w_bc, (omega_b[:, None] + omega_c[None, :]).ravel()),
    )
    amp_sq = alpha_sq * np.exp(-2 * kappa * t_arr)[:, None]
    tt = t_arr[:, None]
    purity = np.zeros_like(t_arr)
    purity_atom = np.zeros_like(t_arr)
    purity_field = np.zeros_like(t_arr)
    for weight, freqs in blocks:
        two_gamma = 2 * gamma_fn(freqs[None, :], tt, alpha_sq, kappa)
        overlap = -4 * amp_sq * np.sin(freqs[None, :] * tt) ** 2
        purity += weight * np.exp(two_gamma).sum(axis=1)
        purity_atom += weight * np.exp(two_gamma + overlap).sum(axis=1)
        purity_field += weight * np.exp(overlap).sum(axis=1)
    s_total = 1 - 0.25 * purity
    s_atom = 1 - 0.25 * purity_atom
    s_field = 1 - 0.25 * purity_field

    _check_bounds("S", s_total, 1.0, inclusive=False)
    _check_bounds("S_A", s_atom, 1 - 1 / (d_b + d_c), inclusive=True)
    _check_bounds("S_F", s_field, 1.0, inclusive=False)
    if np.ndim(t) == 0:
        return float(s_total[0]), float(s_atom[0]), float(s_field[0])
    return s_total, s_atom, s_field


def _entropies(params: ModelParams, t):
    _check_same_levels(params.levels)
    omega_b, omega_c = sublevel_frequencies(params.levels, params.table)
    return linear_entropies(omega_b, omega_c, params.alpha_sq, params.kappa, t)


def entropy_total(params: ModelParams, t):
    return _entropies(params, t)[0]


def entropy_atom(params: ModelParams, t):
    return _entropies(params, t)[1]


def entropy_field(params: ModelParams, t):
    return _entropies(params, t)[2]


# -- explicit matrices ------------------------------------------------------

def sublevel_energies(params: ModelParams) -> np.ndarray:
    """Per atomic basis state, the factor E_i with H_eff = (2 a^+ a + 1) E_i.

    Level b carries +omega_m, level c carries -omega_m.
    """
    omega_b, omega_c = sublevel_frequencies(params.levels, params.table)
    return np.concatenate((omega_b, -omega_c))


def _check_time(t) -> float:
    t = float(t)
    if t < 0:
        raise InvalidInputError(f"time must be non-negative, got {t}")
    return t


def _pair_coefficients(params: ModelParams, t: float) -> np.ndarray:
    psi = atomic_initial_state(params.levels)
    energies = sublevel_energies(params)
    diff = energies[:, None] - energies[None, :]
    phase = gamma_fn(diff, t, params.alpha_sq, params.kappa) \
        + 1j * theta_fn(diff, t, params.alpha_sq, params.kappa)
    return np.outer(psi, psi) * np.exp(phase)


def _branch_amplitudes(params: ModelParams, t: float) -> np.ndarray:
    return coherent_amplitude(params.alpha, params.kappa, t) \
        * np.exp(-2j * sublevel_energies(params) * t)


def full_density(params: ModelParams, t) -> np.ndarray:
    t = _check_time(t)
    coeffs = _pair_coefficients(params, t)
    vecs = np.array([coherent_vector(b, params.cutoff) for b in _branch_amplitudes(params, t)])
    d, n = vecs.shape
    rho = np.einsum("ij,ip,jq->ipjq", coeffs, vecs, vecs.conj())
    return rho.reshape(d * n, d * n)


def reduced_field_density(params: ModelParams, t) -> np.ndarray:
    t = _check_time(t)
    weights = atomic_initial_state(params.levels) ** 2
    vecs = np.array([coherent_vector(b, params.cutoff) for b in _branch_amplitudes(params, t)])
    return np.einsum("i,ip,iq->pq", weights, vecs, vecs.conj())


def reduced_atom_density(params: ModelParams, t) -> np.ndarray:
    t = _check_time(t)
    energies = sublevel_energies(params)
    diff = energies[:, None] - energies[None, :]
    amp_sq = params.alpha_sq * math.exp(-2 * params.kappa * t)
    overlap = np.exp(-amp_sq * (1 - np.exp(-2j * diff * t)))
    return _pair_coefficients(params, t) * overlap


@dataclass(frozen=True)
class EntropySeries:
    times: np.ndarray
    s_total: np.ndarray
    s_atom: np.ndarray
    s_field: np.ndarray
    source: str
    params: ModelParams


def entropy_series(params: ModelParams, times) -> EntropySeries:
    times = np.asarray(times, dtype=float)
    s_total, s_atom, s_field = _entropies(params, times)
    return EntropySeries(times, s_total, s_atom, s_field, "analytic", params)
