"""Brute-force master-equation integrator used as an oracle.

    d rho / dt = i [rho, H] + kappa (2 a rho a^+ - a^+ a rho - rho a^+ a)

is stepped with classical fixed-step RK4 on the full truncated product
space. When H is diagonal in the product basis (the dispersive effective
Hamiltonian is) a compiled kernel applies the same right-hand side without
forming dense products; otherwise dense matrix products are used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .analytic import ModelParams, entropy_series
from .errors import (CutoffTooSmallError, IntegrationDivergedError, InvalidInputError)
from .hilbert import ProductBasis, annihilation, effective_hamiltonian, initial_state

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8
TAIL_TOL = 1e-10
ENTROPY_PASS_TOL = 1e-6
PHOTON_PASS_TOL = 1e-8


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 100.0
    record_every: int = 100
    tolerance: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidInputError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise InvalidInputError(f"t_end must be positive, got {self.t_end}")
        if self.record_every < 1:
            raise InvalidInputError("record_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def _check_square(rho: np.ndarray, dim: int, what: str = "rho") -> None:
    if rho.shape != (dim, dim):
        raise InvalidInputError(f"{what} has shape {rho.shape}, expected ({dim}, {dim})")


def lindblad_rhs(rho: np.ndarray, hamiltonian: np.ndarray, kappa: float,
                 annihilator: np.ndarray) -> np.ndarray:
    """Dense right-hand side; ``annihilator`` is a on the full space."""
    dim = rho.shape[0]
    _check_square(rho, dim)
    _check_square(hamiltonian, dim, "hamiltonian")
    _check_square(annihilator, dim, "annihilator")
    a = annihilator
    ad = a.conj().T
    n_op = ad @ a
    out = 1j * (rho @ hamiltonian - hamiltonian @ rho)
    if kappa:
        out += kappa * (2 * a @ rho @ ad - n_op @ rho - rho @ n_op)
    return out


@numba.njit(cache=True, fastmath=True)
def _apply_block(src, g, jump, base, c, dst, acc, weight, n):
    for p in range(n):
        for q in range(n):
            v = g[p, q] * src[p, q] + jump[p, q] * src[p + 1, q + 1]
            dst[p, q] = base[p, q] + c * v
            acc[p, q] += weight * v


@numba.njit(cache=True)
def _advance_diagonal(rho, h, kappa, n, dt, n_steps):
    """RK4 steps in place for diagonal H, one atomic block at a time.

    With H diagonal the generator maps each atomic block (i, j) of rho onto
    itself, so blocks are stepped independently; the jump term only links
    (p, q) to (p + 1, q + 1). Only blocks with i <= j are integrated, the
    rest are filled in by Hermiticity. Buffers carry one zero row/column of
    padding.
    """
    n_atom = rho.shape[0] // n
    x = np.zeros((n + 1, n + 1), np.complex128)
    s1 = np.zeros((n + 1, n + 1), np.complex128)
    s2 = np.zeros((n + 1, n + 1), np.complex128)
    acc = np.empty((n, n), np.complex128)
    g = np.empty((n, n), np.complex128)
    jump = np.zeros((n, n))
    for p in range(n - 1):
        for q in range(n - 1):
            jump[p, q] = 2.0 * kappa * math.sqrt((p + 1.0) * (q + 1.0))
    for bi in range(n_atom):
        for bj in range(bi, n_atom):
            for p in range(n):
                for q in range(n):
                    x[p, q] = rho[bi * n + p, bj * n + q]
                    g[p, q] = 1j * (h[bj * n + q] - h[bi * n + p]) - kappa * (p + q)
            for _ in range(n_steps):
                acc[:, :] = 0.0
                _apply_block(x, g, jump, x, 0.5 * dt, s1, acc, 1.0, n)
                _apply_block(s1, g, jump, x, 0.5 * dt, s2, acc, 2.0, n)
                _apply_block(s2, g, jump, x, dt, s1, acc, 2.0, n)
                _apply_block(s1, g, jump, x, 0.0, s2, acc, 1.0, n)
                for p in range(n):
                    for q in range(n):
                        x[p, q] += dt / 6.0 * acc[p, q]
            for p in range(n):
                for q in range(n):
                    rho[bi * n + p, bj * n + q] = x[p, q]
                    rho[bj * n + q, bi * n + p] = x[p, q].conjugate()


def _rk4_dense(rho, hamiltonian, kappa, a, dt):
    k1 = lindblad_rhs(rho, hamiltonian, kappa, a)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, hamiltonian, kappa, a)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, hamiltonian, kappa, a)
    k4 = lindblad_rhs(rho + dt * k3, hamiltonian, kappa, a)
    return rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def spectral_bound(hamiltonian: np.ndarray, kappa: float, cutoff: int) -> float:
    """Estimate of the generator's spectral radius.

    For diagonal H the generator is triangular in the (p, q) -> (p+1, q+1)
    ordering, so its eigenvalues are the diagonal entries and the estimate is
    exact; otherwise Gershgorin row sums of H and of the jump term are added.
    """
    h = np.diag(hamiltonian).real
    spread = h.max() - h.min() if len(h) else 0.0
    bound = spread + 2 * kappa * (cutoff - 1)
    offdiag = np.abs(hamiltonian - np.diag(np.diag(hamiltonian))).sum(axis=1).max()
    if offdiag:
        bound += 2 * offdiag + 2 * kappa * (cutoff - 1)
    return float(bound)


def density_matrix_defects(rho: np.ndarray) -> dict[str, float]:
    """Hermiticity residual, trace error and most negative eigenvalue."""
    herm = float(np.abs(rho - rho.conj().T).max())
    trace_err = float(abs(np.trace(rho) - 1))
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    return {"hermiticity": herm, "trace": trace_err, "min_eigenvalue": min_eig}


def check_density_matrix(rho: np.ndarray, t: float = 0.0) -> None:
    d = density_matrix_defects(rho)
    if d["hermiticity"] > HERMITIAN_TOL:
        raise IntegrationDivergedError(f"Hermiticity residual {d['hermiticity']:.3g}", t)
    if d["trace"] > TRACE_TOL:
        raise IntegrationDivergedError(f"trace error {d['trace']:.3g}", t)
    if d["min_eigenvalue"] < -POSITIVITY_TOL:
        raise IntegrationDivergedError(f"negative eigenvalue {d['min_eigenvalue']:.3g}", t)


def evolve(rho0: np.ndarray, hamiltonian: np.ndarray, kappa: float,
           config: IntegratorConfig, basis: ProductBasis):
    """Yield ``(t, rho)`` every ``config.record_every`` steps, starting at t=0.

    Each yielded matrix is a fresh copy. Raises ``IntegrationDivergedError``
    as soon as a recorded state breaks a density-matrix invariant.
    """
    dim = basis.dim
    _check_square(rho0, dim)
    _check_square(hamiltonian, dim, "hamiltonian")
    if kappa < 0:
        raise InvalidInputError("kappa must be non-negative")
    bound = spectral_bound(hamiltonian, kappa, basis.cutoff)
    if config.dt * bound >= 1:
        raise InvalidInputError(
            f"dt={config.dt} too large for generator bound {bound:.3g} (need dt*bound < 1)")

    rho = np.array(rho0, dtype=np.complex128, copy=True)
    diagonal = not np.any(hamiltonian - np.diag(np.diag(hamiltonian)))
    if diagonal:
        h = np.ascontiguousarray(np.diag(hamiltonian).real)
    else:
        a_full = basis.embed_field(annihilation(basis.cutoff)).astype(complex)

    check_density_matrix(rho, 0.0)
    yield 0.0, rho.copy()
    done = 0
    total = config.n_steps
    while done < total:
        chunk = min(config.record_every, total - done)
        if diagonal:
            _advance_diagonal(rho, h, float(kappa), basis.cutoff, config.dt, chunk)
        else:
            for _ in range(chunk):
                rho = _rk4_dense(rho, hamiltonian, kappa, a_full, config.dt)
        done += chunk
        t = done * config.dt
        if not np.all(np.isfinite(rho)):
            raise IntegrationDivergedError("non-finite entries", t)
        check_density_matrix(rho, t)
        yield t, rho.copy()


def partial_trace_field(rho: np.ndarray, dim_atom: int, cutoff: int) -> np.ndarray:
    """Trace out the photon index, leaving the atomic density matrix."""
    _check_square(rho, dim_atom * cutoff)
    return np.einsum("ipjp->ij", rho.reshape(dim_atom, cutoff, dim_atom, cutoff))


def partial_trace_atom(rho: np.ndarray, dim_atom: int, cutoff: int) -> np.ndarray:
    """Trace out the atomic index, leaving the field density matrix."""
    _check_square(rho, dim_atom * cutoff)
    return np.einsum("ipiq->pq", rho.reshape(dim_atom, cutoff, dim_atom, cutoff))


def linear_entropy(rho: np.ndarray) -> float:
    """1 - Tr(rho^2), via the Frobenius norm of a Hermitian matrix."""
    return float(1.0 - np.sum(np.abs(rho) ** 2))


@dataclass
class OracleRun:
    times: np.ndarray
    s_total: np.ndarray
    s_atom: np.ndarray
    s_field: np.ndarray
    photon_number: np.ndarray
    population_b: np.ndarray
    population_c: np.ndarray
    tail_population: np.ndarray
    params: ModelParams
    config: IntegratorConfig


def simulate(params: ModelParams, config: IntegratorConfig) -> OracleRun:
    """Integrate from the equal-weight initial state under Omega (2a^+a+1) S_z."""
    basis = ProductBasis(params.levels, params.cutoff)
    rho0 = initial_state(params.levels, params.alpha, params.cutoff)
    ham = effective_hamiltonian(params.levels, params.coeffs, params.omega, params.cutoff)
    n = basis.photon_numbers
    in_b = np.repeat(params.levels.level_mask("b"), params.cutoff)
    tail = n >= params.cutoff - 5
    rows = []
    for t, rho in evolve(rho0, ham, params.kappa, config, basis):
        diag = np.diag(rho).real
        rows.append((
            t,
            linear_entropy(rho),
            linear_entropy(partial_trace_field(rho, basis.dim_atom, params.cutoff)),
            linear_entropy(partial_trace_atom(rho, basis.dim_atom, params.cutoff)),
            float(diag @ n),
            float(diag[in_b].sum()),
            float(diag[~in_b].sum()),
            float(diag[tail].sum()),
        ))
    cols = np.array(rows).T
    return OracleRun(*cols, params=params, config=config)


@dataclass
class ValidationReport:
    status: str
    convention: str
    cutoff: int
    dt: float
    dt_halving_change: float | None = None
    max_abs_error: dict[str, float] = field(default_factory=dict)
    criteria: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def summary(self) -> dict:
        return {
            "status": self.status,
            "convention": self.convention,
            "cutoff": self.cutoff,
            "dt": self.dt,
            "dt_halving_change": self.dt_halving_change,
            "max_abs_error": self.max_abs_error,
            "criteria": self.criteria,
            "notes": self.notes,
        }

    def to_text(self) -> str:
        lines = [f"validation: {self.status.upper()}",
                 f"convention: {self.convention}", f"cutoff: {self.cutoff}", f"dt: {self.dt:g}"]
        if self.dt_halving_change is not None:
            lines.append(f"max entropy change under dt halving: {self.dt_halving_change:.3e}")
        for name, err in self.max_abs_error.items():
            lines.append(f"max |analytic - oracle| {name}: {err:.3e}")
        for name, ok in self.criteria.items():
            lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines) + "\n"


def validate(params: ModelParams, config: IntegratorConfig) -> ValidationReport:
    """Compare analytic entropies and photon number with the oracle.

    Status is ``inconclusive`` when the cutoff or the dt-halving gate fails,
    otherwise ``pass`` or ``fail`` against the fixed tolerances.
    """
    report = ValidationReport("inconclusive", params.convention.value, params.cutoff, config.dt)
    try:
        fine = simulate(params, config)
    except CutoffTooSmallError as exc:
        report.criteria["cutoff gate"] = False
        report.notes.append(str(exc))
        return report
    tail = float(fine.tail_population.max())
    report.criteria["cutoff gate"] = tail < TAIL_TOL
    if tail >= TAIL_TOL:
        report.notes.append(f"population above n = cutoff-5 reaches {tail:.3g}")
        return report

    coarse = simulate(params, IntegratorConfig(2 * config.dt, config.t_end,
                                               config.record_every, config.tolerance))
    k = min(len(coarse.times), len(fine.times[::2]))
    gate = max(float(np.abs(getattr(fine, name)[::2][:k] - getattr(coarse, name)[:k]).max())
               for name in ("s_total", "s_atom", "s_field"))
    report.dt_halving_change = gate
    report.criteria["dt-halving gate"] = gate < config.tolerance
    if gate >= config.tolerance:
        report.notes.append(f"entropies move by {gate:.3g} when dt is halved")
        return report

    analytic = entropy_series(params, fine.times)
    errors = {
        "S": float(np.abs(analytic.s_total - fine.s_total).max()),
        "S_A": float(np.abs(analytic.s_atom - fine.s_atom).max()),
        "S_F": float(np.abs(analytic.s_field - fine.s_field).max()),
        "photon_number": float(np.abs(
            params.alpha_sq * np.exp(-2 * params.kappa * fine.times) - fine.photon_number).max()),
    }
    report.max_abs_error.update(errors)
    for name in ("S", "S_A", "S_F"):
        report.criteria[f"{name} within {ENTROPY_PASS_TOL:g}"] = errors[name] < ENTROPY_PASS_TOL
    report.criteria[f"photon number within {PHOTON_PASS_TOL:g}"] = \
        errors["photon_number"] < PHOTON_PASS_TOL
    ok = all(report.criteria.values())
    report.status = "pass" if ok else "fail"
    if not ok and params.convention.value == "paper-text":
        report.notes.append(
            "omega_m convention discrepancy: analytic curves use omega_m = alpha_m * Omega, "
            "but the integrated Hamiltonian Omega (2a^+a+1) S_z implies "
            "omega_m = alpha_m^2 * Omega / 2")
    return report
