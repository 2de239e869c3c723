"""Extraction of effective fractional parameters from coherence data.

Pipeline for summarizing a dephasing curve by the two-parameter fractional
relaxation law E_alpha(-lambda t^alpha): a windowed RMSE objective on
coherence magnitudes, coarse-grid plus Nelder-Mead optimization of
(alpha, ln lambda), the plateau-anchored ansatz
u_inf + (1 - u_inf) E_alpha(-lambda t^alpha) for saturating baths, the
optimization-free local-order and single-point estimators, and the
bath-correlation-time rule for choosing fitting windows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import DomainError, NonConvergenceError, ValidationError
from .specfun import FractionalOrder, mittag_leffler
from .spinboson import AsymptoticRegime, BathSpec, CoherenceSeries, \
    asymptotic_Q, bath_correlation

__all__ = [
    "FitResult",
    "FitWindow",
    "bath_correlation_time",
    "default_fit_window",
    "fit_fractional",
    "lambda_from_point",
    "local_order_estimate",
    "rmse_objective",
]

_MAX_EVALS = 10_000
_ALPHA_GRID = np.arange(1, 21) * 0.05          # 0.05 .. 1.00
_LOG_LAMBDA_GRID = np.linspace(-3.0, 2.0, 41)  # lambda in [1e-3, 1e2]
_SIMPLEX_TOL = 5e-7                            # diameter < 1e-6 in (alpha, ln lambda)
_SLOPE_RUN_TOL = 0.05
_SLOPE_RUN_MIN = 5


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitWindow:
    """Fitting interval 0 < t_start < t_end."""

    t_start: float
    t_end: float

    def __post_init__(self) -> None:
        ts, te = float(self.t_start), float(self.t_end)
        if not (math.isfinite(ts) and math.isfinite(te)):
            raise ValidationError("FitWindow bounds must be finite")
        if not (0.0 < ts < te):
            raise ValidationError(
                f"FitWindow requires 0 < t_start < t_end, got ({ts}, {te})"
            )


@dataclass(frozen=True)
class FitResult:
    """Fitted fractional parameters and fit diagnostics."""

    alpha: FractionalOrder
    lam: float
    window: FitWindow
    rmse: float
    evaluations: int
    converged: bool
    u_inf: Optional[float] = None

    def __post_init__(self) -> None:
        if not isinstance(self.alpha, FractionalOrder):
            object.__setattr__(self, "alpha", FractionalOrder(float(self.alpha)))
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ValidationError(f"FitResult.lam must be positive, got {self.lam}")
        if self.rmse < 0.0 or not math.isfinite(self.rmse):
            raise ValidationError("FitResult.rmse must be finite and >= 0")
        if self.evaluations < 1:
            raise ValidationError("FitResult.evaluations must be positive")
        if self.u_inf is not None and not (0.0 <= self.u_inf < 1.0):
            raise ValidationError(
                f"FitResult.u_inf must lie in [0, 1), got {self.u_inf}"
            )

    def model(self, t) -> np.ndarray:
        """Evaluate the fitted coherence model on an array of times."""
        return _model_values(self.alpha.alpha, self.lam, np.asarray(t, float),
                             self.u_inf)

    def to_json(self) -> str:
        doc = {"alpha": self.alpha.alpha, "lambda": self.lam}
        if self.u_inf is not None:
            doc["u_inf"] = self.u_inf
        doc["window"] = {"t_start": self.window.t_start,
                         "t_end": self.window.t_end}
        doc["rmse"] = self.rmse
        doc["converged"] = self.converged
        doc["evaluations"] = self.evaluations
        return json.dumps(doc)


# ---------------------------------------------------------------------------
# Objective
# ---------------------------------------------------------------------------

def _model_values(alpha: float, lam: float, times: np.ndarray,
                  u_inf: Optional[float]) -> np.ndarray:
    out = np.empty(times.size, dtype=float)
    for i, t in enumerate(times.ravel()):
        out[i] = mittag_leffler(alpha, -lam * t**alpha) if t > 0.0 else 1.0
    out = out.reshape(times.shape)
    if u_inf is not None:
        out = u_inf + (1.0 - u_inf) * out
    return out


def _window_samples(target: CoherenceSeries,
                    window: FitWindow) -> Tuple[np.ndarray, np.ndarray]:
    mask = (target.times >= window.t_start) & (target.times <= window.t_end)
    times = target.times[mask]
    mags = np.abs(target.values[mask])
    if times.size < 4:
        raise ValidationError(
            f"fit window [{window.t_start}, {window.t_end}] holds "
            f"{times.size} samples; at least 4 are required"
        )
    return times, mags


def rmse_objective(alpha, lam: float, target: CoherenceSeries,
                   window: FitWindow, u_inf: Optional[float] = None) -> float:
    """Windowed RMSE between |target| and the fractional relaxation model.

    Without ``u_inf`` the model is E_alpha(-lambda t^alpha); with ``u_inf``
    it is the plateau-anchored form u_inf + (1-u_inf) E_alpha(-lambda t^alpha).
    Magnitudes are compared, making the objective invariant under a global
    phase of the target.
    """
    a = alpha.alpha if isinstance(alpha, FractionalOrder) else float(alpha)
    if not (0.0 < a <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {a}")
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be positive, got {lam}")
    if u_inf is not None and not (0.0 <= u_inf < 1.0):
        raise DomainError(f"u_inf must lie in [0, 1), got {u_inf}")
    times, mags = _window_samples(target, window)
    resid = _model_values(a, lam, times, u_inf) - mags
    return float(np.sqrt(np.mean(resid * resid)))


# ---------------------------------------------------------------------------
# Grid + simplex fit
# ---------------------------------------------------------------------------

def _resolve_plateau(target: CoherenceSeries, plateau,
                     bath: Optional[BathSpec]) -> Optional[float]:
    if plateau is None:
        return None
    if plateau == "auto":
        if bath is not None and bath.chi > 1.0:
            q_inf = asymptotic_Q(bath, 1.0, AsymptoticRegime.SuperOhmic)
            return math.exp(-q_inf)
        tail = max(5, target.times.size // 10)
        return float(np.median(np.abs(target.values[-tail:])))
    u_inf = float(plateau)
    if not (0.0 <= u_inf < 1.0):
        raise ValidationError(f"plateau must lie in [0, 1), got {u_inf}")
    return u_inf


def fit_fractional(target: CoherenceSeries, window: FitWindow,
                   plateau: Union[None, float, str] = None,
                   bath: Optional[BathSpec] = None,
                   init: Optional[Tuple[float, float]] = None,
                   max_evaluations: int = _MAX_EVALS) -> FitResult:
    """Fit (alpha, lambda) by coarse grid search plus Nelder-Mead refinement.

    ``plateau`` may be ``None`` (plain model), an explicit u_inf in [0, 1),
    or ``"auto"`` (analytic plateau e^{-Q_inf} when a super-Ohmic ``bath``
    is supplied, otherwise the tail median of |target|).  ``init`` replaces
    the coarse grid stage with an explicit (alpha, lambda) starting point.
    If the evaluation budget is exhausted before the simplex converges, the
    best point so far is returned with ``converged=False``.
    """
    if max_evaluations < 1:
        raise ValidationError("max_evaluations must be positive")
    u_inf = _resolve_plateau(target, plateau, bath)
    times, mags = _window_samples(target, window)
    if np.any(mags <= 0.0):
        raise ValidationError(
            "fit_fractional requires positive magnitudes on the window"
        )

    count = [0]

    def objective(params: np.ndarray) -> float:
        a, log_lam = float(params[0]), float(params[1])
        if not (0.0 < a <= 1.0) or abs(log_lam) > 700.0:
            return math.inf
        count[0] += 1
        resid = _model_values(a, math.exp(log_lam), times, u_inf) - mags
        return float(np.sqrt(np.mean(resid * resid)))

    if init is not None:
        a0, lam0 = float(init[0]), float(init[1])
        if not (0.0 < a0 <= 1.0) or not lam0 > 0.0:
            raise ValidationError("init must provide alpha in (0,1], lambda > 0")
        best = np.array([a0, math.log(lam0)])
        best_val = objective(best)
    else:
        best, best_val = None, math.inf
        cells = [(a, ll * math.log(10.0))
                 for a in _ALPHA_GRID for ll in _LOG_LAMBDA_GRID]
        for cell in cells:
            if count[0] >= max_evaluations:
                break
            val = objective(np.array(cell))
            if val < best_val:
                best, best_val = np.array(cell), val

    converged = True
    start = best
    for attempt in range(2):
        budget = max_evaluations - count[0]
        if budget <= 4:
            converged = False
            break
        res = minimize(objective, start, method="Nelder-Mead",
                       options={"xatol": _SIMPLEX_TOL, "fatol": 1e-15,
                                "maxfev": budget})
        if res.fun <= best_val:
            best, best_val = np.asarray(res.x), float(res.fun)
        if not res.success:
            converged = False
            break
        if attempt == 0:
            # One restart from a slightly perturbed optimum guards against
            # premature simplex collapse.
            start = best + np.array([-1e-3 if best[0] > 0.5 else 1e-3, 1e-3])
            start[0] = min(max(start[0], 1e-4), 1.0)

    alpha_hat = float(min(max(best[0], 1e-12), 1.0))
    lam_hat = math.exp(float(best[1]))
    rmse = rmse_objective(alpha_hat, lam_hat, target, window, u_inf)
    return FitResult(FractionalOrder(alpha_hat), lam_hat, window, rmse,
                     count[0], converged, u_inf)


# ---------------------------------------------------------------------------
# Optimization-free estimators
# ---------------------------------------------------------------------------

def local_order_estimate(target: CoherenceSeries,
                         plateau: Optional[float] = None) -> float:
    """Median local log-log slope of X(t) = -ln|u| (or -ln v with a plateau).

    Computes alpha_loc(t_i) = [ln X(t_{i+1}) - ln X(t_{i-1})] /
    [ln t_{i+1} - ln t_{i-1}] on interior points, then returns the median
    over the maximal run (>= 5 points) where successive slopes differ by
    less than 0.05.
    """
    mags = np.abs(target.values)
    if plateau is not None:
        if not (0.0 <= plateau < 1.0):
            raise DomainError(f"plateau must lie in [0, 1), got {plateau}")
        mags = (mags - plateau) / (1.0 - plateau)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = -np.log(mags)
    keep = (target.times > 0.0) & np.isfinite(x) & (x > 0.0)
    times, x = target.times[keep], x[keep]
    if times.size < _SLOPE_RUN_MIN:
        raise ValidationError(
            "local_order_estimate needs at least 5 samples with -ln|u| > 0"
        )
    ln_t, ln_x = np.log(times), np.log(x)
    slopes = (ln_x[2:] - ln_x[:-2]) / (ln_t[2:] - ln_t[:-2])

    best_lo, best_len = 0, 0
    lo = 0
    for i in range(1, slopes.size + 1):
        if i == slopes.size or abs(slopes[i] - slopes[i - 1]) >= _SLOPE_RUN_TOL:
            if i - lo > best_len:
                best_lo, best_len = lo, i - lo
            lo = i
    if best_len < _SLOPE_RUN_MIN:
        raise NonConvergenceError(
            "no stable slope plateau found; supply a longer or denser series"
        )
    return float(np.median(slopes[best_lo:best_lo + best_len]))


def lambda_from_point(alpha, t_star: float, u_star: float,
                      u_inf: Optional[float] = None) -> float:
    """Solve E_alpha(-lambda t_star^alpha) = v_star for lambda.

    ``v_star`` is ``u_star`` itself, or the plateau-normalized value
    (u_star - u_inf) / (1 - u_inf) when ``u_inf`` is given.  The root is
    bracketed in ln lambda (the left side is strictly monotone in lambda)
    and solved to 1e-10 in the function value.
    """
    a = alpha.alpha if isinstance(alpha, FractionalOrder) else float(alpha)
    if not (0.0 < a <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {a}")
    if not (t_star > 0.0 and math.isfinite(t_star)):
        raise DomainError(f"t_star must be positive, got {t_star}")
    v_star = u_star
    if u_inf is not None:
        if not (0.0 <= u_inf < 1.0):
            raise DomainError(f"u_inf must lie in [0, 1), got {u_inf}")
        v_star = (u_star - u_inf) / (1.0 - u_inf)
    if not (0.0 < v_star < 1.0):
        raise DomainError(
            "u_star must lie strictly between the plateau and 1"
        )
    scale = t_star**a

    def f(log_lam: float) -> float:
        return mittag_leffler(a, -math.exp(log_lam) * scale) - v_star

    lo, hi = -40.0, 40.0
    root = brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16)
    if abs(f(root)) > 1e-10:
        raise NonConvergenceError("lambda_from_point did not reach 1e-10")
    return math.exp(root)


# ---------------------------------------------------------------------------
# Window rule
# ---------------------------------------------------------------------------

def bath_correlation_time(bath: BathSpec) -> float:
    """First time at which |C(t)| drops to e^{-1} |C(0)|, bisected to 1e-6."""
    c0 = abs(bath_correlation(bath, 0.0))
    if c0 == 0.0:
        raise DomainError("bath_correlation_time requires C(0) != 0")
    goal = c0 / math.e
    step = 0.05 / bath.omega_c
    t_max = 1e3 / bath.omega_c
    prev = 0.0
    t = step
    while t <= t_max:
        if abs(bath_correlation(bath, t)) <= goal:
            lo, hi = prev, t
            while hi - lo > 1e-6:
                mid = 0.5 * (lo + hi)
                if abs(bath_correlation(bath, mid)) <= goal:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        prev = t
        t += step
    raise NonConvergenceError(
        "no e^-1 crossing of |C(t)| found below 1e3 / omega_c"
    )


def default_fit_window(bath: BathSpec, end_factor: float = 20.0) -> FitWindow:
    """Window rule (2 tau_B, end_factor * tau_B) with end_factor in [20, 60]."""
    if not (20.0 <= end_factor <= 60.0):
        raise ValidationError(
            f"end_factor must lie in [20, 60], got {end_factor}"
        )
    tau_b = bath_correlation_time(bath)
    return FitWindow(2.0 * tau_b, end_factor * tau_b)
