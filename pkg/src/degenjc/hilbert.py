"""Operators on the truncated product space |level, m> (x) |n>.

Basis ordering (used everywhere, including partial traces): atomic states
first run over level b with ascending m, then level c with ascending m; the
photon number n is the fast index. The flat index of |level, m, n> is
``atom_index * cutoff + n``, which is what ``np.kron(atom_op, field_op)``
produces.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .angular import TransitionCoefficients, common_projections
from .errors import CutoffTooSmallError, InvalidInputError

NORM_DEFICIT_TOL = 1e-10


@dataclass(frozen=True)
class LevelSpec:
    """Upper level b and lower level c, angular momenta stored doubled."""

    two_jb: int
    two_jc: int

    def __post_init__(self):
        if self.two_jb < 0 or self.two_jc < 0:
            raise InvalidInputError("angular momenta must be non-negative")

    @property
    def dim_b(self) -> int:
        return self.two_jb + 1

    @property
    def dim_c(self) -> int:
        return self.two_jc + 1

    @property
    def dim(self) -> int:
        return self.dim_b + self.dim_c

    @property
    def projections_b(self) -> list[int]:
        return list(range(-self.two_jb, self.two_jb + 1, 2))

    @property
    def projections_c(self) -> list[int]:
        return list(range(-self.two_jc, self.two_jc + 1, 2))

    @property
    def common(self) -> list[int]:
        return common_projections(self.two_jb, self.two_jc)

    def atom_index(self, level: str, two_m: int) -> int:
        if level == "b":
            projections, offset = self.projections_b, 0
        elif level == "c":
            projections, offset = self.projections_c, self.dim_b
        else:
            raise InvalidInputError(f"unknown level {level!r}")
        try:
            return offset + projections.index(two_m)
        except ValueError:
            raise InvalidInputError(f"2m={two_m} not in level {level}") from None

    def atom_labels(self) -> list[tuple[str, int]]:
        return [("b", m) for m in self.projections_b] + [("c", m) for m in self.projections_c]

    def level_mask(self, level: str) -> np.ndarray:
        mask = np.zeros(self.dim, dtype=bool)
        if level == "b":
            mask[: self.dim_b] = True
        else:
            mask[self.dim_b:] = True
        return mask


@dataclass(frozen=True)
class BasisIndex:
    level: str
    two_m: int
    n: int


@dataclass(frozen=True)
class ProductBasis:
    levels: LevelSpec
    cutoff: int

    @property
    def dim_atom(self) -> int:
        return self.levels.dim

    @property
    def dim(self) -> int:
        return self.levels.dim * self.cutoff

    def index(self, level: str, two_m: int, n: int) -> int:
        if not 0 <= n < self.cutoff:
            raise InvalidInputError(f"photon number {n} outside cutoff {self.cutoff}")
        return self.levels.atom_index(level, two_m) * self.cutoff + n

    def label(self, flat: int) -> BasisIndex:
        a, n = divmod(flat, self.cutoff)
        level, two_m = self.levels.atom_labels()[a]
        return BasisIndex(level, two_m, n)

    @cached_property
    def photon_numbers(self) -> np.ndarray:
        return np.tile(np.arange(self.cutoff), self.dim_atom)

    def embed_atom(self, op: np.ndarray) -> np.ndarray:
        return np.kron(op, np.eye(self.cutoff))

    def embed_field(self, op: np.ndarray) -> np.ndarray:
        return np.kron(np.eye(self.dim_atom), op)


def annihilation(cutoff: int) -> np.ndarray:
    """Truncated a with a|n> = sqrt(n)|n-1>; a^+ a is exact below the top level."""
    if cutoff < 2:
        raise InvalidInputError(f"cutoff must be >= 2, got {cutoff}")
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1)


def number_operator(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff, dtype=float))


@dataclass(frozen=True)
class AtomicOperators:
    s_minus: np.ndarray
    s_plus: np.ndarray
    s_z: np.ndarray
    n_b: np.ndarray
    n_c: np.ndarray
    r_b: np.ndarray
    r_c: np.ndarray

    @property
    def s_x(self) -> np.ndarray:
        return 0.5 * (self.s_plus + self.s_minus)

    @property
    def s_y(self) -> np.ndarray:
        return -0.5j * (self.s_plus - self.s_minus)


def _check_coeffs(levels: LevelSpec, coeffs: TransitionCoefficients) -> None:
    if (coeffs.two_jb, coeffs.two_jc) != (levels.two_jb, levels.two_jc):
        raise InvalidInputError(
            f"coefficients built for 2J=({coeffs.two_jb},{coeffs.two_jc}), "
            f"levels are ({levels.two_jb},{levels.two_jc})")


def atomic_operators(levels: LevelSpec, coeffs: TransitionCoefficients) -> AtomicOperators:
    _check_coeffs(levels, coeffs)
    d = levels.dim
    s_minus = np.zeros((d, d))
    s_z = np.zeros((d, d))
    r_b = np.zeros((d, d))
    r_c = np.zeros((d, d))
    for two_m, alpha in coeffs.entries.items():
        ib = levels.atom_index("b", two_m)
        ic = levels.atom_index("c", two_m)
        s_minus[ic, ib] = alpha
        s_z[ib, ib] = 0.5 * alpha**2
        s_z[ic, ic] = -0.5 * alpha**2
        r_b[ib, ib] = alpha**2
        r_c[ic, ic] = alpha**2
    n_b = np.diag(levels.level_mask("b").astype(float))
    n_c = np.diag(levels.level_mask("c").astype(float))
    return AtomicOperators(s_minus, s_minus.T.copy(), s_z, n_b, n_c, r_b, r_c)


def dispersive_hamiltonian(levels: LevelSpec, coeffs: TransitionCoefficients,
                           g: float, delta: float, cutoff: int) -> np.ndarray:
    """delta/2 (n_b - n_c) + g (a^+ S_- + a S_+) on the product space."""
    if delta == 0:
        raise InvalidInputError("detuning must be nonzero in the dispersive limit")
    if math.sqrt(2) * abs(g / delta) > 0.25:
        warnings.warn(f"sqrt(2) g/delta = {math.sqrt(2) * abs(g / delta):.3g} "
                      "is outside the dispersive regime", stacklevel=2)
    ops = atomic_operators(levels, coeffs)
    a = annihilation(cutoff)
    h = 0.5 * delta * np.kron(ops.n_b - ops.n_c, np.eye(cutoff))
    h = h + g * (np.kron(ops.s_minus, a.T) + np.kron(ops.s_plus, a))
    return h.astype(complex)


def effective_hamiltonian(levels: LevelSpec, coeffs: TransitionCoefficients,
                          omega: float, cutoff: int) -> np.ndarray:
    """Omega (2 a^+ a + 1) S_z; diagonal in the product basis."""
    ops = atomic_operators(levels, coeffs)
    two_n_plus_one = np.diag(2.0 * np.arange(cutoff) + 1.0)
    return (omega * np.kron(ops.s_z, two_n_plus_one)).astype(complex)


def first_order_hamiltonian(levels: LevelSpec, coeffs: TransitionCoefficients,
                            g: float, delta: float, cutoff: int,
                            shift_coefficient: float = 1.0) -> np.ndarray:
    """Right side of the small-rotation expansion, kept to order g^2/delta.

    ``shift_coefficient`` scales the constant (g^2/delta)(R_b + R_c) term. The
    default 1 is the published form; carrying the rotation through second
    order gives 1/2.
    """
    ops = atomic_operators(levels, coeffs)
    chi = g * g / delta
    eye = np.eye(cutoff)
    two_n_plus_one = np.diag(2.0 * np.arange(cutoff) + 1.0)
    h = 0.5 * delta * np.kron(ops.n_b - ops.n_c, eye)
    h = h + shift_coefficient * chi * np.kron(ops.r_b + ops.r_c, eye)
    h = h + chi * np.kron(ops.s_z, two_n_plus_one)
    return h.astype(complex)


def _unitary_from_generator(generator: np.ndarray, angle: float) -> np.ndarray:
    """exp(i * angle * generator) for Hermitian ``generator``."""
    w, v = np.linalg.eigh(generator)
    return (v * np.exp(1j * angle * w)) @ v.conj().T


def small_rotation_residual(levels: LevelSpec, coeffs: TransitionCoefficients,
                            g: float, delta: float, cutoff: int,
                            exclude_edge: bool = True,
                            shift_coefficient: float = 1.0) -> float:
    """Operator-norm gap between U2 U1 H_I U1^+ U2^+ and the truncated expansion.

    With ``exclude_edge`` the norm is taken on photon numbers n < cutoff/2,
    where truncation of a and a^+ has not propagated.
    """
    eps = math.sqrt(2) * g / delta
    if abs(eps) >= 0.5:
        raise InvalidInputError(f"sqrt(2) g/delta = {eps:.3g} is not small")
    ops = atomic_operators(levels, coeffs)
    a = annihilation(cutoff)
    q = (a + a.T) / math.sqrt(2)
    p = 1j * (a.T - a) / math.sqrt(2)
    u1 = _unitary_from_generator(np.kron(ops.s_x, p), eps)
    u2 = _unitary_from_generator(np.kron(ops.s_y, q), eps)
    u = u2 @ u1
    h = dispersive_hamiltonian(levels, coeffs, g, delta, cutoff)
    diff = u @ h @ u.conj().T - first_order_hamiltonian(
        levels, coeffs, g, delta, cutoff, shift_coefficient)
    if exclude_edge:
        keep = np.tile(np.arange(cutoff) < cutoff // 2, levels.dim)
        diff = diff[np.ix_(keep, keep)]
    return float(np.linalg.norm(diff, 2))


def coherent_vector(alpha: complex, cutoff: int, tol: float = NORM_DEFICIT_TOL) -> np.ndarray:
    """Fock amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n < cutoff.

    Not renormalized; raises ``CutoffTooSmallError`` when the missing norm
    exceeds ``tol``.
    """
    if cutoff < 2:
        raise InvalidInputError(f"cutoff must be >= 2, got {cutoff}")
    n = np.arange(cutoff)
    # Log-space recursion keeps alpha^n / sqrt(n!) finite for large n.
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, cutoff)))))
    mag = abs(alpha)
    if mag == 0:
        vec = np.zeros(cutoff, dtype=complex)
        vec[0] = 1.0
        return vec
    amp = np.exp(-0.5 * mag**2 + n * np.log(mag) - 0.5 * log_fact)
    vec = amp * np.exp(1j * n * np.angle(alpha))
    deficit = 1.0 - float(np.sum(amp**2))
    if deficit > tol:
        raise CutoffTooSmallError(
            f"cutoff {cutoff} misses {deficit:.3g} of the norm of |alpha={alpha}>", deficit)
    return vec


def atomic_initial_state(levels: LevelSpec) -> np.ndarray:
    """Equal-weight superposition over both levels' sublevels."""
    psi = np.empty(levels.dim)
    psi[: levels.dim_b] = 1.0 / math.sqrt(2 * levels.dim_b)
    psi[levels.dim_b:] = 1.0 / math.sqrt(2 * levels.dim_c)
    return psi


def initial_state(levels: LevelSpec, alpha: complex, cutoff: int) -> np.ndarray:
    """|psi_A><psi_A| (x) |alpha><alpha| as a dense matrix."""
    psi = np.kron(atomic_initial_state(levels), coherent_vector(alpha, cutoff))
    return np.outer(psi, psi.conj())
