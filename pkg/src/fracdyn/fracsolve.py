"""Fractional Adams-Moulton solvers and the Mittag-Leffler propagator.

Solves the Caputo-fractional master equation

    D_t^alpha rho(t) = L rho(t),   0 < alpha <= 1,

in its equivalent Volterra form rho(t) = rho(0) + (1/Gamma(alpha))
int_0^t (t-s)^(alpha-1) L rho(s) ds, on a uniform grid t_n = n h.

Two weight schemes are provided (:class:`WeightScheme`):

* ``StandardDFF`` — the standard fractional Adams scheme: predictor weights
  b_j = (j+1)^alpha - j^alpha with prefactor h^alpha/Gamma(alpha+1) and
  corrector weights a_m = (m+1)^(alpha+1) - 2 m^(alpha+1) + (m-1)^(alpha+1)
  with prefactor h^alpha/Gamma(alpha+2).  The corrector is applied in
  implicit form: the new-point weight multiplies the unknown state, so each
  step solves (I - pref*L) rho_{n+1} = rho_0 + pref * (history sum); the left
  factor is decomposed once and reused across all steps.  At alpha = 1 this
  reduces exactly to the classical trapezoid (Adams-Moulton-2) rule.

* ``PaperPrinted`` — predictor weights b_j = (j+1)^(1-alpha) - j^(1-alpha)
  and corrector weights a_m = (m+1)^alpha - 2 m^alpha + (m-1)^alpha (with
  endpoint weights a_0 = 1 and a_{-1} = 1 on the predicted point), both with
  prefactor h^alpha/Gamma(1+alpha), applied in explicit
  predict-evaluate-correct form.  Interior corrector weights are negative for
  alpha < 1 (e.g. sqrt(2)-2 at alpha = 1/2) and the scheme loses the
  O(h^(1+alpha)) order; it is retained for comparison and selected runs only.
  The alpha -> 1 limit is taken as the classical rectangle/trapezoid pair.

:func:`fam_solve_soe` replaces the dense history sum with Q exponential
accumulators driven by a :class:`~fracdyn.kernels.SOEKernel`: the kernel is
kept exact on the two most recent intervals (lag <= 2h) and approximated by
sum_q w_q e^(-xi_q tau) beyond, giving O(Q) work per step instead of O(n).

:func:`ml_propagate` evaluates the exact solution rho(t) = E_alpha(t^alpha M)
rho(0) through the eigendecomposition of the superoperator.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.special import gamma as _sc_gamma

from .errors import (
    DomainError,
    FracdynError,
    NumericalInstabilityError,
    ValidationError,
)
from .kernels import SOEKernel
from .lindblad import DensityMatrix, GKSLGenerator, build_superoperator, unvec, vec
from .specfun import FractionalOrder, _alpha_value, _mittag_leffler_any

__all__ = [
    "WeightScheme",
    "FracTrajectory",
    "predictor_weights",
    "corrector_weights",
    "fam_solve",
    "fam_solve_soe",
    "ml_propagate",
]

_AlphaLike = Union[float, FractionalOrder]

DEFAULT_MAX_HORIZON = 1.0e6

# Per-step state-defect thresholds (matrix mode).
_STATE_WARN_TOL = 1e-7
_STATE_FAIL_TOL = 1e-5


class WeightScheme(enum.Enum):
    """Weight-set selector for the fractional Adams-Moulton solver."""

    PaperPrinted = "paper_printed"
    StandardDFF = "standard_dff"


def _coerce_scheme(scheme: Union[WeightScheme, str]) -> WeightScheme:
    if isinstance(scheme, WeightScheme):
        return scheme
    if isinstance(scheme, str):
        key = scheme.strip().lower().replace("-", "_")
        for member in WeightScheme:
            if key in (member.name.lower(), member.value):
                return member
    raise ValidationError(f"unknown weight scheme: {scheme!r}")


# ----------------------------------------------------------------------------
# Weight sets
# ----------------------------------------------------------------------------

def predictor_weights(
    scheme: Union[WeightScheme, str], alpha: _AlphaLike, n: int
) -> np.ndarray:
    """Predictor weights [b_0 ... b_n] for the requested scheme."""
    scheme = _coerce_scheme(scheme)
    a = _alpha_value(alpha)
    if n < 0:
        raise ValidationError("n must be >= 0")
    j = np.arange(n + 1, dtype=float)
    if a == 1.0:
        # Both formulas degenerate at alpha = 1; the limit is the rectangle
        # rule with unit weights.
        return np.ones(n + 1)
    if scheme is WeightScheme.PaperPrinted:
        p = 1.0 - a
    else:
        p = a
    return (j + 1.0) ** p - j**p


def corrector_weights(
    scheme: Union[WeightScheme, str], alpha: _AlphaLike, n: int
) -> np.ndarray:
    """Corrector weights [c_0 ... c_{n+1}] for the step t_n -> t_{n+1}.

    Index i is the distance from the new grid point t_{n+1}: c[0] weights the
    new point (the implicit unknown for ``StandardDFF``, the predicted value
    for ``PaperPrinted``), c[i] the state at t_{n+1-i}, and c[n+1] the initial
    point t_0.  The associated prefactor is h^alpha/Gamma(alpha+2) for
    ``StandardDFF`` and h^alpha/Gamma(1+alpha) for ``PaperPrinted``.
    """
    scheme = _coerce_scheme(scheme)
    a = _alpha_value(alpha)
    if n < 0:
        raise ValidationError("n must be >= 0")
    c = np.empty(n + 2)
    if a == 1.0:
        # Classical trapezoid limits: [1, 2, ..., 2, 1] against h/Gamma(3)
        # for StandardDFF, [1/2, 1, ..., 1, 1/2] against h for PaperPrinted.
        if scheme is WeightScheme.StandardDFF:
            c.fill(2.0)
            c[0] = 1.0
            c[-1] = 1.0
        else:
            c.fill(1.0)
            c[0] = 0.5
            c[-1] = 0.5
        return c
    if scheme is WeightScheme.StandardDFF:
        c[0] = 1.0
        if n >= 1:
            i = np.arange(1, n + 1, dtype=float)
            c[1:-1] = (i + 1.0) ** (a + 1.0) - 2.0 * i ** (a + 1.0) \
                + (i - 1.0) ** (a + 1.0)
        c[-1] = float(n) ** (a + 1.0) - (n - a) * float(n + 1) ** a
    else:
        c[0] = 1.0
        c[1] = 1.0
        if n >= 1:
            m = np.arange(1, n + 1, dtype=float)
            c[2:] = (m + 1.0) ** a - 2.0 * m**a + (m - 1.0) ** a
    return c


def _interior_weights_standard(a: float, n_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """Fixed interior weights v_i and per-step oldest weights for StandardDFF."""
    i = np.arange(n_max + 1, dtype=float)
    if a == 1.0:
        v = np.full(n_max + 1, 2.0)
        v[0] = 1.0
        oldest = np.ones(n_max)
    else:
        v = np.empty(n_max + 1)
        v[0] = 1.0
        ii = i[1:]
        v[1:] = (ii + 1.0) ** (a + 1.0) - 2.0 * ii ** (a + 1.0) \
            + (ii - 1.0) ** (a + 1.0)
        nn = np.arange(n_max, dtype=float)
        oldest = nn ** (a + 1.0) - (nn - a) * (nn + 1.0) ** a
    return v, oldest


def _interior_weights_paper(a: float, n_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """Fixed interior weights and per-step oldest weights for PaperPrinted."""
    v = np.empty(n_max + 1)
    oldest = np.empty(n_max)
    if a == 1.0:
        v.fill(1.0)
        oldest.fill(0.5)
        return v, oldest
    v[0] = 1.0  # unused (distance 0 handled by the predicted point)
    if n_max >= 1:
        v[1] = 1.0  # a_0 = 1
    if n_max >= 2:
        m = np.arange(1, n_max, dtype=float)
        v[2:] = (m + 1.0) ** a - 2.0 * m**a + (m - 1.0) ** a
    # Weight on the initial point at step n: a_n interior (a_0 = 1 at n = 0).
    oldest[0] = 1.0
    if n_max >= 2:
        m = np.arange(1, n_max, dtype=float)
        oldest[1:] = (m + 1.0) ** a - 2.0 * m**a + (m - 1.0) ** a
    return v, oldest


# ----------------------------------------------------------------------------
# Trajectory container
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class FracTrajectory:
    """Solution of a fractional master equation on a uniform grid t_n = n h."""

    alpha: FractionalOrder
    h: float
    scheme: WeightScheme
    states: Union[np.ndarray, Tuple[DensityMatrix, ...]]

    @property
    def is_scalar(self) -> bool:
        return isinstance(self.states, np.ndarray)

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    def times(self) -> np.ndarray:
        return self.h * np.arange(len(self.states))

    def final(self):
        return self.states[-1]

    def to_csv(self, path) -> None:
        """Write the trajectory as CSV.

        Scalar mode: header ``t,re_u,im_u,abs_u``.  Matrix mode: header
        ``t,re_00,im_00,...`` with row-major state entries.
        """
        times = self.times()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if self.is_scalar:
                writer.writerow(["t", "re_u", "im_u", "abs_u"])
                for t, u in zip(times, self.states):
                    z = complex(u)
                    writer.writerow([repr(float(t)), repr(z.real),
                                     repr(z.imag), repr(abs(z))])
            else:
                d = self.states[0].dim
                header = ["t"]
                for i in range(d):
                    for j in range(d):
                        header += [f"re_{i}{j}", f"im_{i}{j}"]
                writer.writerow(header)
                for t, rho in zip(times, self.states):
                    flat = vec(rho.entries)
                    row = [repr(float(t))]
                    for z in flat:
                        row += [repr(float(z.real)), repr(float(z.imag))]
                    writer.writerow(row)


# ----------------------------------------------------------------------------
# Scalar solver cores (optionally numba-compiled)
# ----------------------------------------------------------------------------

def _dense_implicit_core(lam, u0, pref, vr, oldest, left_inv, n_steps):
    # StandardDFF scalar: (1 + pref*lam) u_{n+1} = u0 + pref * history.
    u = np.empty(n_steps + 1, dtype=np.complex128)
    g = np.empty(n_steps + 1, dtype=np.complex128)
    u[0] = u0
    g[0] = -lam * u0
    # vr[j] = v_{N-j}, so vr[N-n+m] = v_{n-m} weights g_{m+1}.
    big_n = len(vr) - 1
    for n in range(n_steps):
        acc = oldest[n] * g[0]
        base = big_n - n
        for m in range(n):
            acc += vr[base + m] * g[1 + m]
        u[n + 1] = (u0 + pref * acc) * left_inv
        g[n + 1] = -lam * u[n + 1]
    return u


def _dense_explicit_core(lam, u0, pref, vr, oldest, br, n_steps):
    # PaperPrinted scalar: predict with b-weights, correct explicitly.
    u = np.empty(n_steps + 1, dtype=np.complex128)
    g = np.empty(n_steps + 1, dtype=np.complex128)
    u[0] = u0
    g[0] = -lam * u0
    big_n = len(vr) - 1
    for n in range(n_steps):
        pacc = 0.0 + 0.0j
        base = big_n - n
        for m in range(n + 1):
            pacc += br[base + m] * g[m]
        g_pred = -lam * (u0 + pref * pacc)
        acc = oldest[n] * g[0]
        for m in range(n):
            acc += vr[base + m] * g[1 + m]
        u[n + 1] = u0 + pref * (acc + g_pred)
        g[n + 1] = -lam * u[n + 1]
    return u


def _soe_core(lam, u0, pref, alpha_w, a2, b2, w, eh, phi0, phi1,
              left_inv, n_steps):
    # StandardDFF + SOE history: near field (lag <= 2h) exact, far field via
    # Q exponential accumulators H_q.
    u = np.empty(n_steps + 1, dtype=np.complex128)
    g = np.empty(n_steps + 1, dtype=np.complex128)
    u[0] = u0
    g[0] = -lam * u0
    n_modes = len(w)
    H = np.zeros(n_modes, dtype=np.complex128)
    for n in range(n_steps):
        far = 0.0 + 0.0j
        for q in range(n_modes):
            far += w[q] * H[q]
        rhs = u0 + pref * alpha_w * g[n] + far
        if n >= 1:
            rhs += a2 * g[n] + b2 * g[n - 1]
        u[n + 1] = rhs * left_inv
        g[n + 1] = -lam * u[n + 1]
        if n >= 1:
            for q in range(n_modes):
                H[q] = eh[q] * (H[q] + eh[q] * (phi1[q] * g[n - 1]
                                                + phi0[q] * g[n]))
    return u


try:  # pragma: no cover - exercised indirectly
    from numba import njit as _njit

    _dense_implicit_core = _njit(cache=True)(_dense_implicit_core)
    _dense_explicit_core = _njit(cache=True)(_dense_explicit_core)
    _soe_core = _njit(cache=True)(_soe_core)
    _HAVE_NUMBA = True
except Exception:  # pragma: no cover
    _HAVE_NUMBA = False


# ----------------------------------------------------------------------------
# Common solve machinery
# ----------------------------------------------------------------------------

def _soe_phi_weights(xi: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Linear-interpolation integrals against e^(-xi tau) over one step.

    phi0 = (1/h) int_0^h e^(-xi s) (h - s) ds,
    phi1 = (1/h) int_0^h e^(-xi s) s ds,
    evaluated stably for xi h -> 0.
    """
    x = xi * h
    phi0 = np.empty_like(x)
    phi1 = np.empty_like(x)
    small = x < 1e-3
    xs = x[small]
    phi0[small] = h * (0.5 - xs / 6.0 + xs**2 / 24.0)
    phi1[small] = h * (0.5 - xs / 3.0 + xs**2 / 8.0)
    xl = x[~small]
    with np.errstate(under="ignore"):
        exl = np.exp(-xl)
        phi0[~small] = h * (xl - 1.0 + exl) / (xl * xl)
        phi1[~small] = h * (1.0 - (1.0 + xl) * exl) / (xl * xl)
    return phi0, phi1


def _validate_solve_args(alpha, h, n_steps, max_horizon):
    a = _alpha_value(alpha)
    h = float(h)
    if not (h > 0.0) or not math.isfinite(h):
        raise DomainError("step h must be finite and > 0")
    n_steps = int(n_steps)
    if n_steps < 1:
        raise DomainError("N must be >= 1")
    if h * n_steps > max_horizon:
        raise DomainError(
            f"horizon h*N = {h * n_steps:g} exceeds configured max {max_horizon:g}"
        )
    return a, h, n_steps


def _scalar_rate(gen) -> Optional[complex]:
    if isinstance(gen, GKSLGenerator):
        return None
    lam = complex(gen)
    if not (lam.real > 0.0) or not math.isfinite(abs(lam)):
        raise DomainError("scalar rate lambda must have positive real part")
    return lam


def _wrap_matrix_states(
    raw: np.ndarray, dim: int, alpha: FractionalOrder, h: float,
    scheme: WeightScheme, init: DensityMatrix
) -> FracTrajectory:
    """Validate per-step defects and assemble DensityMatrix states."""
    states: List[DensityMatrix] = [init]
    for n in range(1, raw.shape[0]):
        m = unvec(raw[n], dim)
        herm = float(np.max(np.abs(m - m.conj().T)))
        trace = float(abs(np.trace(m) - 1.0))
        sym = 0.5 * (m + m.conj().T)
        min_eig = float(np.min(np.linalg.eigvalsh(sym)))
        worst = max(herm, trace, -min_eig)
        if worst > _STATE_FAIL_TOL:
            raise NumericalInstabilityError(
                f"state invariant defect {worst:g} at step {n} "
                f"(t = {n * h:g}) exceeds {_STATE_FAIL_TOL:g}"
            )
        if worst > _STATE_WARN_TOL:
            warnings.warn(
                f"state defect {worst:g} at step {n} above {_STATE_WARN_TOL:g}",
                RuntimeWarning,
                stacklevel=3,
            )
        states.append(
            DensityMatrix(sym, herm_tol=2 * _STATE_FAIL_TOL,
                          trace_tol=2 * _STATE_FAIL_TOL,
                          psd_tol=2 * _STATE_FAIL_TOL)
        )
    return FracTrajectory(alpha, h, scheme, tuple(states))


def _matrix_dense_loop(M, rho0_vec, pref, vr, oldest, n_steps, implicit,
                       pref_p=None, br=None):
    d2 = M.shape[0]
    u = np.empty((n_steps + 1, d2), dtype=np.complex128)
    g = np.empty((n_steps + 1, d2), dtype=np.complex128)
    u[0] = rho0_vec
    g[0] = M @ rho0_vec
    big_n = len(vr) - 1
    if implicit:
        lu = lu_factor(np.eye(d2) - pref * M)
    for n in range(n_steps):
        acc = oldest[n] * g[0]
        if n >= 1:
            acc = acc + vr[big_n - n: big_n] @ g[1: n + 1]
        if implicit:
            rhs = rho0_vec + pref * acc
            u[n + 1] = lu_solve(lu, rhs)
        else:
            pacc = br[big_n - n: big_n + 1] @ g[0: n + 1]
            g_pred = M @ (rho0_vec + pref_p * pacc)
            u[n + 1] = rho0_vec + pref * (acc + g_pred)
        g[n + 1] = M @ u[n + 1]
    return u


def fam_solve(
    gen: Union[GKSLGenerator, float, complex],
    alpha: _AlphaLike,
    h: float,
    n_steps: int,
    init: Union[DensityMatrix, float, complex],
    scheme: Union[WeightScheme, str] = WeightScheme.StandardDFF,
    max_horizon: float = DEFAULT_MAX_HORIZON,
) -> FracTrajectory:
    """Solve D^alpha rho = L rho by the fractional Adams-Moulton method.

    ``gen`` is a :class:`~fracdyn.lindblad.GKSLGenerator` (matrix mode) or a
    positive scalar rate lambda (scalar mode, L -> multiplication by -lambda).
    Returns the trajectory at t_n = n h for n = 0..N.
    """
    scheme = _coerce_scheme(scheme)
    a, h, n_steps = _validate_solve_args(alpha, h, n_steps, max_horizon)
    order = alpha if isinstance(alpha, FractionalOrder) else FractionalOrder(a)

    if scheme is WeightScheme.StandardDFF:
        vr_src, oldest = _interior_weights_standard(a, n_steps)
        pref = h**a / _sc_gamma(a + 2.0)
    else:
        vr_src, oldest = _interior_weights_paper(a, n_steps)
        pref = h**a / _sc_gamma(1.0 + a)
    # vr[j] = v_{n_steps - j}: contiguous reversed view for the history dot.
    vr = vr_src[::-1].copy()

    lam = _scalar_rate(gen)
    if lam is not None:
        u0 = complex(init)
        if scheme is WeightScheme.StandardDFF:
            left = 1.0 + pref * lam
            if left == 0.0:
                raise FracdynError("internal error: singular left factor")
            u = _dense_implicit_core(lam, u0, pref, vr, oldest,
                                     1.0 / left, n_steps)
        else:
            b = predictor_weights(scheme, a, n_steps)
            br = b[::-1].copy()
            u = _dense_explicit_core(lam, u0, pref, vr, oldest, br, n_steps)
        return FracTrajectory(order, h, scheme, u)

    if not isinstance(init, DensityMatrix):
        raise ValidationError("matrix mode requires a DensityMatrix initial state")
    if init.dim != gen.dim:
        raise ValidationError("initial state and generator dimensions differ")
    M = build_superoperator(gen).matrix
    if scheme is WeightScheme.StandardDFF:
        raw = _matrix_dense_loop(M, vec(init.entries), pref, vr, oldest,
                                 n_steps, implicit=True)
    else:
        b = predictor_weights(scheme, a, n_steps)
        raw = _matrix_dense_loop(M, vec(init.entries), pref, vr, oldest,
                                 n_steps, implicit=False,
                                 pref_p=pref, br=b[::-1].copy())
    return _wrap_matrix_states(raw, gen.dim, order, h, scheme, init)


def fam_solve_soe(
    gen: Union[GKSLGenerator, float, complex],
    alpha: _AlphaLike,
    h: float,
    n_steps: int,
    init: Union[DensityMatrix, float, complex],
    soe: SOEKernel,
    scheme: Union[WeightScheme, str] = WeightScheme.StandardDFF,
    max_horizon: float = DEFAULT_MAX_HORIZON,
) -> FracTrajectory:
    """Like :func:`fam_solve` but with O(Q) compressed-history steps.

    Requires the ``StandardDFF`` scheme (the compressed accumulators realize
    the piecewise-linear product integral that underlies those weights) and a
    :class:`~fracdyn.kernels.SOEKernel` valid on [h, N h] at matching alpha.
    """
    scheme = _coerce_scheme(scheme)
    if scheme is not WeightScheme.StandardDFF:
        raise ValidationError("fam_solve_soe supports the StandardDFF scheme only")
    a, h, n_steps = _validate_solve_args(alpha, h, n_steps, max_horizon)
    order = alpha if isinstance(alpha, FractionalOrder) else FractionalOrder(a)

    if abs(_alpha_value(soe.alpha) - a) > 1e-12:
        raise ValidationError("SOE kernel alpha does not match solver alpha")
    t_lo, t_hi = soe.valid_range
    if t_lo > h * (1.0 + 1e-9) or t_hi < h * n_steps * (1.0 - 1e-9):
        raise ValidationError(
            f"SOE kernel valid on [{t_lo:g}, {t_hi:g}] does not cover "
            f"[{h:g}, {h * n_steps:g}]"
        )

    w, xi = soe.weights_rates()
    with np.errstate(under="ignore"):
        eh = np.exp(-xi * h)
    phi0, phi1 = _soe_phi_weights(xi, h)

    pref = h**a / _sc_gamma(a + 2.0)
    if a == 1.0:
        # K == 1: the near-field product integrals reduce to trapezoid cells.
        a2 = 0.5 * h
        b2 = 0.5 * h
    else:
        ha_g = h**a / _sc_gamma(a)
        a2 = ha_g * (2.0 * (2.0**a - 1.0) / a
                     - (2.0 ** (a + 1.0) - 1.0) / (a + 1.0))
        b2 = ha_g * ((2.0 ** (a + 1.0) - 1.0) / (a + 1.0)
                     - (2.0**a - 1.0) / a)

    lam = _scalar_rate(gen)
    if lam is not None:
        u0 = complex(init)
        left = 1.0 + pref * lam
        if left == 0.0:
            raise FracdynError("internal error: singular left factor")
        u = _soe_core(lam, u0, pref, a, a2, b2, w, eh, phi0, phi1,
                      1.0 / left, n_steps)
        return FracTrajectory(order, h, scheme, u)

    if not isinstance(init, DensityMatrix):
        raise ValidationError("matrix mode requires a DensityMatrix initial state")
    if init.dim != gen.dim:
        raise ValidationError("initial state and generator dimensions differ")
    M = build_superoperator(gen).matrix
    d2 = M.shape[0]
    rho0 = vec(init.entries)
    u = np.empty((n_steps + 1, d2), dtype=np.complex128)
    g = np.empty((n_steps + 1, d2), dtype=np.complex128)
    u[0] = rho0
    g[0] = M @ rho0
    H = np.zeros((len(w), d2), dtype=np.complex128)
    lu = lu_factor(np.eye(d2) - pref * M)
    for n in range(n_steps):
        rhs = rho0 + (pref * a) * g[n] + w @ H
        if n >= 1:
            rhs = rhs + a2 * g[n] + b2 * g[n - 1]
        u[n + 1] = lu_solve(lu, rhs)
        g[n + 1] = M @ u[n + 1]
        if n >= 1:
            H = eh[:, None] * (H + eh[:, None]
                               * np.outer(phi1, g[n - 1])
                               + eh[:, None] * np.outer(phi0, g[n]))
    return _wrap_matrix_states(u, gen.dim, order, h, scheme, init)


def ml_propagate(
    gen: GKSLGenerator,
    alpha: _AlphaLike,
    t: float,
    init: DensityMatrix,
) -> DensityMatrix:
    """Exact spectral propagation rho(t) = E_alpha(t^alpha M) rho(0).

    Diagonalizes the superoperator M = V diag(lambda_j) V^(-1) and applies
    E_alpha(lambda_j t^alpha) mode by mode.  Raises a diagnostic error if the
    eigenbasis condition number reaches 1e8 (use :func:`fam_solve` then).
    """
    a = _alpha_value(alpha)
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise DomainError("time t must be finite and >= 0")
    if not isinstance(init, DensityMatrix):
        raise ValidationError("init must be a DensityMatrix")
    if init.dim != gen.dim:
        raise ValidationError("initial state and generator dimensions differ")
    if t == 0.0:
        return init

    M = build_superoperator(gen).matrix
    evals, V = np.linalg.eig(M)
    cond = float(np.linalg.cond(V))
    if not math.isfinite(cond) or cond >= 1e8:
        raise NumericalInstabilityError(
            f"superoperator eigenbasis condition number {cond:.3g} >= 1e8; "
            "use fam_solve instead"
        )
    coeffs = np.linalg.solve(V, vec(init.entries))
    factors = np.array(
        [_mittag_leffler_any(a, z) for z in evals * t**a], dtype=complex
    )
    out = unvec(V @ (factors * coeffs), gen.dim)
    herm, trace, neg = (
        float(np.max(np.abs(out - out.conj().T))),
        float(abs(np.trace(out) - 1.0)),
        max(0.0, -float(np.min(np.linalg.eigvalsh(0.5 * (out + out.conj().T))))),
    )
    worst = max(herm, trace, neg)
    if worst > _STATE_FAIL_TOL:
        raise NumericalInstabilityError(
            f"spectral propagation defect {worst:g} exceeds {_STATE_FAIL_TOL:g}"
        )
    return DensityMatrix(
        0.5 * (out + out.conj().T),
        herm_tol=2 * _STATE_FAIL_TOL,
        trace_tol=2 * _STATE_FAIL_TOL,
        psd_tol=2 * _STATE_FAIL_TOL,
    )
