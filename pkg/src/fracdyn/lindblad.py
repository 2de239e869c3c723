"""GKSL (Lindblad) generators, semigroup propagation, and CPTP diagnostics.

States are density matrices (Hermitian, unit trace, positive semidefinite);
generators have the GKSL form

    L(rho) = -i[H, rho]
             + sum_j gamma_j ( L_j rho L_j^dag - (1/2){L_j^dag L_j, rho} ),

which is the most general generator of a CPTP semigroup.  Superoperators act
on row-major vectorized states, vec(rho) = rho.ravel(order="C"), for which

    M = -i (H (x) I - I (x) H^T)
        + sum_j gamma_j [ L_j (x) conj(L_j)
                          - 1/2 (L_j^dag L_j (x) I + I (x) (L_j^dag L_j)^T) ]

and rho(u) = unvec(expm(u M) vec(rho)).

Rate convention: for the pure-dephasing qubit with H = (eps/2) sigma_z and a
single jump L = sigma_z at rate gamma, the upper coherence u = rho_10 obeys
du/du = (i eps - 2 gamma) u; :func:`dephasing_qubit` reproduces this exactly
with the raw (unnormalized) channel (sigma_z, gamma).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import expm as _expm

from .errors import DomainError, NumericalInstabilityError, ValidationError

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "DensityMatrix",
    "GKSLGenerator",
    "Superoperator",
    "vec",
    "unvec",
    "build_superoperator",
    "semigroup_apply",
    "cptp_diagnostics",
    "dephasing_qubit",
    "plus_state",
    "density_to_json",
    "density_from_json",
    "generator_to_json",
    "generator_from_json",
]

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Validation tolerances: strict construction / runtime warning / hard failure.
_HERM_TOL = 1e-12
_TRACE_TOL = 1e-12
_PSD_TOL = 1e-10
_FLOW_WARN_TOL = 1e-9
_FLOW_FAIL_TOL = 1e-7


def vec(rho: np.ndarray) -> np.ndarray:
    """Row-major (C-order) vectorization of a d x d matrix."""
    return np.asarray(rho, dtype=complex).ravel(order="C")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v, dtype=complex).reshape(dim, dim, order="C")


def _as_square_complex(m, name: str) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be a square matrix")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValidationError(f"{name} must have finite entries")
    return arr


def _density_defects(entries: np.ndarray) -> Tuple[float, float, float]:
    """Return (hermiticity defect, trace defect, negative-eigenvalue defect)."""
    herm = float(np.max(np.abs(entries - entries.conj().T)))
    trace = float(abs(np.trace(entries) - 1.0))
    sym = 0.5 * (entries + entries.conj().T)
    min_eig = float(np.min(np.linalg.eigvalsh(sym)))
    return herm, trace, max(0.0, -min_eig)


@dataclass(frozen=True)
class DensityMatrix:
    """A quantum state: Hermitian, unit-trace, positive-semidefinite matrix."""

    entries: np.ndarray
    herm_tol: float = _HERM_TOL
    trace_tol: float = _TRACE_TOL
    psd_tol: float = _PSD_TOL

    def __post_init__(self) -> None:
        arr = _as_square_complex(self.entries, "density matrix")
        herm, trace, neg = _density_defects(arr)
        if herm > self.herm_tol:
            raise ValidationError(f"density matrix not Hermitian (defect {herm:g})")
        if trace > self.trace_tol:
            raise ValidationError(f"density matrix trace defect {trace:g}")
        if neg > self.psd_tol:
            raise ValidationError(f"density matrix negative eigenvalue {-neg:g}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def eigenvalues(self) -> np.ndarray:
        sym = 0.5 * (self.entries + self.entries.conj().T)
        return np.linalg.eigvalsh(sym)


def plus_state() -> DensityMatrix:
    """The qubit state |+><+| with maximal coherence rho_01 = 1/2."""
    return DensityMatrix(np.full((2, 2), 0.5, dtype=complex))


@dataclass(frozen=True)
class GKSLGenerator:
    """A GKSL generator: Hermitian Hamiltonian plus weighted jump channels."""

    hamiltonian: np.ndarray
    channels: Tuple[Tuple[np.ndarray, float], ...] = ()

    def __post_init__(self) -> None:
        H = _as_square_complex(self.hamiltonian, "hamiltonian")
        herm = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
        if herm > _HERM_TOL:
            raise ValidationError(f"hamiltonian not Hermitian (defect {herm:g})")
        d = H.shape[0]
        norm: List[Tuple[np.ndarray, float]] = []
        for jump, rate in self.channels:
            L = _as_square_complex(jump, "jump operator")
            if L.shape[0] != d:
                raise ValidationError("jump operator dimension mismatch")
            rate = float(rate)
            if not math.isfinite(rate) or rate < 0.0:
                raise ValidationError("channel rates must be finite and >= 0")
            L = L.copy()
            L.setflags(write=False)
            norm.append((L, rate))
        H = H.copy()
        H.setflags(write=False)
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "channels", tuple(norm))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class Superoperator:
    """A d^2 x d^2 matrix acting on row-major vectorized states."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        d = int(self.dim)
        if d < 1:
            raise ValidationError("dim must be >= 1")
        M = _as_square_complex(self.matrix, "superoperator matrix")
        if M.shape[0] != d * d:
            raise ValidationError("superoperator matrix must be d^2 x d^2")
        M = M.copy()
        M.setflags(write=False)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "matrix", M)

    def trace_form_defect(self) -> float:
        """Norm of vec(I)^T M — zero iff the flow preserves trace exactly."""
        iv = vec(np.eye(self.dim))
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return float(np.max(np.abs(iv @ self.matrix))) / scale


def build_superoperator(gen: GKSLGenerator) -> Superoperator:
    """Assemble the d^2 x d^2 matrix of the GKSL generator (row-major vec)."""
    d = gen.dim
    eye = np.eye(d, dtype=complex)
    H = gen.hamiltonian
    M = -1.0j * (np.kron(H, eye) - np.kron(eye, H.T))
    for L, rate in gen.channels:
        if rate == 0.0:
            continue
        LdL = L.conj().T @ L
        M = M + rate * (
            np.kron(L, L.conj())
            - 0.5 * (np.kron(LdL, eye) + np.kron(eye, LdL.T))
        )
    return Superoperator(d, M)


def dephasing_qubit(epsilon: float, gamma: float) -> GKSLGenerator:
    """Pure-dephasing qubit: H = (epsilon/2) sigma_z, jump sigma_z at rate gamma.

    The coherence u = rho_10 then obeys du/dt = (i epsilon - 2 gamma) u; with
    gamma = 0 this is the closed (Liouville) qubit.
    """
    gamma = float(gamma)
    if not math.isfinite(gamma) or gamma < 0.0:
        raise DomainError("gamma must be finite and >= 0")
    H = 0.5 * float(epsilon) * PAULI_Z
    channels = ((PAULI_Z, gamma),) if gamma > 0.0 else ()
    return GKSLGenerator(H, channels)


def semigroup_apply(
    superop: Superoperator, u: float, rho: DensityMatrix
) -> DensityMatrix:
    """Propagate ``rho`` by ``expm(u M)`` and re-validate the result."""
    u = float(u)
    if not math.isfinite(u) or u < 0.0:
        raise DomainError("semigroup time u must be finite and >= 0")
    if rho.dim != superop.dim:
        raise ValidationError("state and superoperator dimensions differ")
    if u == 0.0:
        return rho
    phi = _expm(u * superop.matrix)
    out = unvec(phi @ vec(rho.entries), superop.dim)
    herm, trace, neg = _density_defects(out)
    worst = max(herm, trace, neg)
    if worst > _FLOW_FAIL_TOL:
        raise NumericalInstabilityError(
            f"propagated state defect {worst:g} exceeds {_FLOW_FAIL_TOL:g}"
        )
    if worst > _FLOW_WARN_TOL:
        warnings.warn(
            f"propagated state defect {worst:g} above {_FLOW_WARN_TOL:g}",
            RuntimeWarning,
            stacklevel=2,
        )
    # Re-admit with flow tolerances; roundoff accumulates along the flow.
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(
        out,
        herm_tol=10.0 * _FLOW_FAIL_TOL,
        trace_tol=10.0 * _FLOW_FAIL_TOL,
        psd_tol=10.0 * _FLOW_FAIL_TOL,
    )


def cptp_diagnostics(
    superop: Superoperator, u: Optional[float] = None
) -> Tuple[float, float]:
    """Trace-preservation defect and minimum Choi eigenvalue of expm(u M).

    With ``u = None`` the superoperator matrix is diagnosed directly as the
    map (for maps assembled outside the semigroup, e.g. subordinated flows).
    The map is CPTP iff the defect vanishes and the Choi matrix is PSD.
    Restricted to dim <= 8 (the Choi matrix is d^2 x d^2).
    """
    d = superop.dim
    if d > 8:
        raise ValidationError("cptp_diagnostics supports dim <= 8")
    if u is None:
        phi = superop.matrix
    else:
        u = float(u)
        if not math.isfinite(u) or u < 0.0:
            raise DomainError("diagnostic time u must be finite and >= 0")
        phi = _expm(u * superop.matrix)
    # Trace defect: tr Phi(E_ij) must equal delta_ij.
    traces = vec(np.eye(d)) @ phi
    trace_defect = float(np.max(np.abs(traces - vec(np.eye(d)))))
    # Choi matrix: C[(i,k),(j,l)] = <k| Phi(|i><j|) |l> = Phi[(k,l),(i,j)].
    choi = phi.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)
    choi = 0.5 * (choi + choi.conj().T)
    min_choi_eig = float(np.min(np.linalg.eigvalsh(choi)))
    return trace_defect, min_choi_eig


# ----------------------------------------------------------------------------
# JSON import/export: complex entries as [re, im] pairs, row-major order.
# ----------------------------------------------------------------------------

def _matrix_to_pairs(m: np.ndarray) -> List[List[float]]:
    flat = np.asarray(m, dtype=complex).ravel(order="C")
    return [[float(z.real), float(z.imag)] for z in flat]


def _pairs_to_matrix(pairs: Sequence[Sequence[float]], dim: int,
                     name: str) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape != (dim * dim, 2):
        raise ValidationError(
            f"{name} must be a flat row-major list of {dim * dim} [re, im] pairs"
        )
    return (arr[:, 0] + 1.0j * arr[:, 1]).reshape(dim, dim)


def density_to_json(rho: DensityMatrix) -> dict:
    return {"dim": rho.dim, "entries": _matrix_to_pairs(rho.entries)}


def density_from_json(data: dict, **tolerances) -> DensityMatrix:
    try:
        dim = int(data["dim"])
        pairs = data["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed density-matrix JSON: {exc}") from exc
    return DensityMatrix(_pairs_to_matrix(pairs, dim, "entries"), **tolerances)


def generator_to_json(gen: GKSLGenerator) -> dict:
    return {
        "dim": gen.dim,
        "hamiltonian": _matrix_to_pairs(gen.hamiltonian),
        "channels": [
            {"jump": _matrix_to_pairs(L), "rate": rate}
            for L, rate in gen.channels
        ],
    }


def generator_from_json(data: dict) -> GKSLGenerator:
    try:
        dim = int(data["dim"])
        ham = _pairs_to_matrix(data["hamiltonian"], dim, "hamiltonian")
        channels = tuple(
            (_pairs_to_matrix(ch["jump"], dim, "jump"), float(ch["rate"]))
            for ch in data.get("channels", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed generator JSON: {exc}") from exc
    return GKSLGenerator(ham, channels)
