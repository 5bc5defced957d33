"""Shared numerical optimizers: forward interval bracketing, golden-section
line search, and nonlinear conjugate gradient (Fletcher-Reeves with periodic
restarts). Used by both MLP weight training and GPC hyperparameter tuning.

The default bracketing step and golden-section tolerance are both 0.01.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInterval, NoBracketFound

GOLDEN_RATIO = (1.0 + np.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class LineSearchConfig:
    step: float = 0.01
    tolerance: float = 0.01
    max_expansions: int = 60

    def __post_init__(self) -> None:
        if self.step <= 0 or self.tolerance <= 0:
            raise ValueError("step and tolerance must be positive")


@dataclass(frozen=True)
class CgConfig:
    max_iterations: int = 500
    gradient_norm_tolerance: float = 1e-5
    restart_period: int | None = None  # None: restart every dim iterations

    def __post_init__(self) -> None:
        if self.max_iterations <= 0 or self.gradient_norm_tolerance <= 0:
            raise ValueError("max_iterations and gradient_norm_tolerance must be positive")
        if self.restart_period is not None and self.restart_period <= 0:
            raise ValueError("restart_period must be positive")


def bracket_minimum(
    phi: Callable[[float], float], config: LineSearchConfig | None = None
) -> tuple[float, float]:
    """Bracket a local minimizer of phi on t >= 0 by forward stepping with a
    doubling step starting from config.step.

    Returns (a, b) with a local minimizer inside. If phi never stops
    decreasing within the expansion budget, raises NoBracketFound.
    """
    cfg = config or LineSearchConfig()
    t0, t1 = 0.0, cfg.step
    f0, f1 = phi(t0), phi(t1)
    if f1 >= f0:
        return t0, t1
    step = cfg.step
    for _ in range(cfg.max_expansions):
        step *= 2.0
        t2 = t1 + step
        f2 = phi(t2)
        if f2 >= f1:
            return t0, t2
        t0, t1, f1 = t1, t2, f2
    raise NoBracketFound(
        f"no minimum bracketed within {cfg.max_expansions} doubling expansions"
    )


def golden_section(
    phi: Callable[[float], float], interval: tuple[float, float], tolerance: float
) -> tuple[float, float]:
    """Golden-section search on [a, b]; returns (t_best, phi(t_best)) where
    t_best is the best evaluated probe, within `tolerance` of a local
    minimizer for unimodal phi. One new evaluation per iteration.
    """
    a, b = interval
    if not a < b:
        raise InvalidInterval(f"need a < b, got [{a}, {b}]")
    inv_phi = 1.0 / GOLDEN_RATIO
    c = b - (b - a) * inv_phi
    d = a + (b - a) * inv_phi
    fc, fd = phi(c), phi(d)
    best_t, best_f = (c, fc) if fc <= fd else (d, fd)
    while (b - a) > tolerance:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * inv_phi
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * inv_phi
            fd = phi(d)
        t, f = (c, fc) if fc <= fd else (d, fd)
        if f < best_f:
            best_t, best_f = t, f
    return best_t, best_f


def line_minimize(
    phi: Callable[[float], float], ls: LineSearchConfig
) -> tuple[float, float]:
    """Bracket then golden-section: returns (t, phi(t)) for t >= 0."""
    a, b = bracket_minimum(phi, ls)
    return golden_section(phi, (a, b), ls.tolerance)


def conjugate_gradient(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    cg: CgConfig | None = None,
    ls: LineSearchConfig | None = None,
) -> tuple[np.ndarray, list[float]]:
    """Minimize a smooth objective with Fletcher-Reeves conjugate gradient.

    Each step line-searches along the current direction with bracketing plus
    golden section; the direction restarts to steepest descent every
    restart_period iterations (default: the parameter dimension) and whenever
    the update would not be a descent direction. Stops on the gradient-norm
    tolerance, the iteration cap, or failure to make progress.

    Returns the final point and the objective trace (one entry per accepted
    iterate, starting with the initial value).
    """
    cg = cg or CgConfig()
    ls = ls or LineSearchConfig()
    x = np.asarray(x0, dtype=float).copy()
    restart_period = cg.restart_period or max(x.size, 1)

    f = objective(x)
    g = gradient(x)
    trace = [f]
    if np.linalg.norm(g) <= cg.gradient_norm_tolerance:
        return x, trace
    d = -g

    def search_along(point: np.ndarray, direction: np.ndarray) -> tuple[float, float]:
        return line_minimize(lambda t: objective(point + t * direction), ls)

    for it in range(cg.max_iterations):
        try:
            t, ft = search_along(x, d)
        except NoBracketFound:
            if np.array_equal(d, -g):
                break
            d = -g  # retry once along steepest descent
            try:
                t, ft = search_along(x, d)
            except NoBracketFound:
                break
        if ft >= f or t == 0.0:
            # no progress along this direction; try steepest descent once
            if np.array_equal(d, -g):
                break
            d = -g
            continue
        x = x + t * d
        f = ft
        trace.append(f)
        g_new = gradient(x)
        if np.linalg.norm(g_new) < cg.gradient_norm_tolerance:
            break
        if (it + 1) % restart_period == 0:
            d = -g_new
        else:
            beta = float(g_new @ g_new) / float(g @ g)
            d = -g_new + beta * d
            if d @ g_new >= 0:
                d = -g_new
        g = g_new
    return x, trace


def finite_difference_gradient(
    objective: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Central-difference gradient (f(x+h e_i) - f(x-h e_i)) / (2h)."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        bump = np.zeros_like(x)
        bump[i] = h
        grad[i] = (objective(x + bump) - objective(x - bump)) / (2.0 * h)
    return grad
