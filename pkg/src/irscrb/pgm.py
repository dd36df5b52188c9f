"""Projected-gradient design of constant-modulus reflection patterns.

Minimizes the targeted angle-CRB objective (the sum of inverse information
densities over a look-angle grid) by alternating a per-component
magnitude-normalized gradient step with projection back onto the
constant-modulus set. The normalized step makes the raw objective
non-monotone, so the best feasible iterate seen is tracked and returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemConfig, ula_derivative_matrix
from .patterns import ReflectionPattern, project_constant_modulus


@dataclass(frozen=True)
class PgmSettings:
    """Stopping threshold, step size, iteration cap, and look angles."""

    look_angles: np.ndarray
    epsilon: float = 1e-10
    delta: float = 1.0
    max_iter: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "look_angles",
                           np.asarray(self.look_angles, dtype=float))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be strictly positive")
        if self.delta <= 0:
            raise ValueError("delta must be strictly positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.look_angles.size < 1:
            raise ValueError("need at least one look angle")


@dataclass
class PgmTrace:
    iterations: int
    objective_history: np.ndarray
    final_objective: float
    converged: bool
    max_modulus_dev: float = 0.0


def targeted_look_angles(l_t: int, delta1: float, delta2: float) -> np.ndarray:
    """l_t look angles evenly spaced over [delta1, delta2), left-anchored."""
    if l_t < 1:
        raise ValueError("need at least one look angle")
    return delta1 + (delta2 - delta1) * np.arange(l_t) / l_t


def _objective_matrix(w: np.ndarray, du: np.ndarray, coef: float):
    """Objective and per-look-angle quadratic forms for an n x k matrix."""
    v = du.conj().T @ w                      # l_t x k
    quad = np.sum(np.abs(v) ** 2, axis=1)
    _check_quad(quad)
    return coef * np.sum(1.0 / quad), v, quad


def _gradient_matrix(v: np.ndarray, quad: np.ndarray, du: np.ndarray,
                     coef: float) -> np.ndarray:
    return -coef * (du @ (v / (quad ** 2)[:, None]))


def _coef(config: SystemConfig, sigma_sq: float) -> float:
    return config.sigma_n_sq / (2.0 * config.rho * sigma_sq)


def pgm_objective(w_vec: np.ndarray, look_angles, config: SystemConfig,
                  sigma_sq: float = 1.0) -> float:
    """Targeted angle-CRB objective for the column-stacked pattern vector.

    Equals the angle CRB trace evaluated with the look angles as the true
    angles; the Kronecker-structured quadratic forms are evaluated
    column-by-column, never materializing an nk x nk matrix.
    """
    w = _to_matrix(w_vec, config)
    du = ula_derivative_matrix(np.asarray(look_angles, dtype=float), config.n)
    f, _, _ = _objective_matrix(w, du, _coef(config, sigma_sq))
    return float(f)


def wirtinger_gradient(w_vec: np.ndarray, look_angles, config: SystemConfig,
                       sigma_sq: float = 1.0) -> np.ndarray:
    """Conjugate-coordinate gradient of pgm_objective, column-stacked.

    Satisfies Re(w^H g) = -f(w) (the objective is homogeneous of degree -2).
    """
    w = _to_matrix(w_vec, config)
    du = ula_derivative_matrix(np.asarray(look_angles, dtype=float), config.n)
    coef = _coef(config, sigma_sq)
    _, v, quad = _objective_matrix(w, du, coef)
    return _gradient_matrix(v, quad, du, coef).reshape(-1, order="F")


def _to_matrix(w_vec: np.ndarray, config: SystemConfig) -> np.ndarray:
    w_vec = np.asarray(w_vec, dtype=complex)
    if w_vec.size != config.n * config.k:
        raise ValueError(f"expected {config.n * config.k} entries, got {w_vec.size}")
    return w_vec.reshape(config.n, config.k, order="F")


def _check_quad(quad: np.ndarray):
    bad = np.where(quad <= 0)[0]
    if bad.size:
        raise ValueError(
            f"look angle index {bad[0]} has non-positive information under "
            "this pattern; the objective is undefined there"
        )


def design_pattern(config: SystemConfig, settings: PgmSettings,
                   init: ReflectionPattern, seed=None):
    """Run the projected-gradient design from a feasible initial pattern.

    Each iteration moves every component by delta along the negative
    gradient phase (magnitude-normalized step; components with zero gradient
    stay put), projects back to modulus sqrt(beta), and stops once the
    squared relative change drops below epsilon or max_iter is reached.

    Returns (pattern, trace) where the pattern is the best feasible iterate
    encountered (the initial pattern included) and the trace records the raw
    per-iterate objective history. The iteration is deterministic; seed is
    accepted for interface uniformity with the sampling routines.
    """
    del seed
    if not init.constant_modulus:
        raise ValueError("initial pattern must satisfy the constant-modulus constraint")
    if init.w.shape != (config.n, config.k):
        raise ValueError(
            f"init is {init.w.shape}, config expects ({config.n}, {config.k})"
        )
    if not np.isclose(init.beta, config.beta):
        raise ValueError(
            f"init has reflection power {init.beta}, config expects {config.beta}"
        )
    beta = config.beta
    root_beta = np.sqrt(beta)
    du = ula_derivative_matrix(settings.look_angles, config.n)
    coef = _coef(config, 1.0)

    w = init.w.copy()
    f0, v, quad = _objective_matrix(w, du, coef)
    history = [float(f0)]
    best_f, best_w = float(f0), w.copy()
    max_dev = float(np.max(np.abs(np.abs(w) - root_beta)))
    converged = False
    iterations = 0

    for iterations in range(1, settings.max_iter + 1):
        grad = _gradient_matrix(v, quad, du, coef)
        mag = np.abs(grad)
        step = np.where(mag > 0, settings.delta * grad / np.where(mag > 0, mag, 1.0), 0)
        cand = project_constant_modulus(w - step, beta)
        max_dev = max(max_dev, float(np.max(np.abs(np.abs(cand) - root_beta))))
        f, v, quad = _objective_matrix(cand, du, coef)
        history.append(float(f))
        if f < best_f:
            best_f, best_w = float(f), cand.copy()
        rel_change = (np.linalg.norm(cand - w) ** 2) / (np.linalg.norm(w) ** 2)
        w = cand
        if rel_change <= settings.epsilon:
            converged = True
            break

    pattern = ReflectionPattern(w=best_w, beta=beta, name=f"pgm[{init.name}]")
    trace = PgmTrace(iterations=iterations,
                     objective_history=np.array(history),
                     final_objective=best_f,
                     converged=converged,
                     max_modulus_dev=max_dev)
    return pattern, trace
