"""Hybrid FIM (random gains, deterministic angles) and its CRB traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bayes_crb import real_parameter_fim
from .model import PriorSpec, SystemConfig, ula_derivative_matrix, ula_matrix
from .patterns import ReflectionPattern

# densities this far below the pattern's domain-average are treated as nulls
UNIDENTIFIABLE_REL = 1e-12


@dataclass(frozen=True)
class HybridFimBlocks:
    """Gain block, diagonal angle block, gain prior, and the angles used.

    density_floor is the unidentifiability threshold: an upper bound on the
    domain-peak angle information scaled by UNIDENTIFIABLE_REL.
    """

    j_aa_d: np.ndarray
    j_pp_d: np.ndarray
    j_aa_p: np.ndarray
    psi: np.ndarray
    density_floor: float


def hybrid_fim_blocks(pattern: ReflectionPattern, psi, config: SystemConfig,
                      prior: PriorSpec) -> HybridFimBlocks:
    """Information blocks at fixed true angles psi.

    The gain block is the Gram of the training design at the given angles;
    the angle block is diagonal (zero-mean reflected gains kill the
    cross-angle and gain-angle couplings) with the per-angle density on the
    diagonal.
    """
    psi = np.asarray(psi, dtype=float)
    if pattern.w.shape != (config.n, config.k):
        raise ValueError(
            f"pattern is {pattern.w.shape}, config expects ({config.n}, {config.k})"
        )
    if psi.shape != (config.l,):
        raise ValueError(f"expected {config.l} angles, got shape {psi.shape}")
    if np.any(np.abs(psi) > 1.0):
        raise ValueError("angles must lie in [-1, 1]")
    n, k, l = config.n, config.k, config.l
    q = pattern.q()
    wbar = pattern.w_bar()
    u = ula_matrix(psi, n)
    du = ula_derivative_matrix(psi, n)

    j_aa_d = np.empty((l + 1, l + 1), dtype=complex)
    j_aa_d[0, 0] = k
    j_aa_d[0, 1:] = wbar.conj() @ u
    j_aa_d[1:, 0] = np.conj(j_aa_d[0, 1:])
    j_aa_d[1:, 1:] = u.conj().T @ q @ u
    j_aa_d *= config.rho / config.sigma_n_sq

    dens = 2.0 * np.real(np.einsum("nl,nm,ml->l", du.conj(), q, du))
    j_pp_d = np.diag(config.rho * prior.sigma_sq / config.sigma_n_sq * dens)

    j_aa_p = np.eye(l + 1, dtype=complex) / prior.sigma_sq
    # peak density over the domain is at most 2 pi^2 tr(Q) sum(m^2)
    series = np.sum(np.arange(n) ** 2)
    peak_bound = (config.rho * prior.sigma_sq / config.sigma_n_sq
                  * 2.0 * np.pi ** 2 * np.trace(q).real * series)
    return HybridFimBlocks(j_aa_d=j_aa_d, j_pp_d=j_pp_d, j_aa_p=j_aa_p, psi=psi,
                           density_floor=UNIDENTIFIABLE_REL * float(peak_bound))


def hybrid_crb_psi(blocks: HybridFimBlocks) -> float:
    """Angle CRB trace: sum of inverse per-angle densities."""
    lam = np.diag(blocks.j_pp_d)
    bad = np.where(lam <= blocks.density_floor)[0]
    if bad.size:
        raise ValueError(
            f"angle index {bad[0]} (psi={blocks.psi[bad[0]]:+.6f}) has vanishing "
            "information density; the angle is unidentifiable under this pattern"
        )
    return float(np.sum(1.0 / lam))


def hybrid_crb_alpha(blocks: HybridFimBlocks) -> float:
    """Gain CRB trace with both real and imaginary parts counted.

    Matches the Bayesian module's accounting: twice the trace of each of the
    two conjugate real-conversion blocks, i.e. 4 tr((J_aa_d + J_aa_p)^-1).
    """
    j = blocks.j_aa_d + blocks.j_aa_p
    try:
        inv = np.linalg.solve(j, np.eye(j.shape[0], dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise ValueError("gain FIM is singular") from exc
    return float(4.0 * np.trace(inv).real)


def hybrid_trace_real(blocks: HybridFimBlocks) -> float:
    """Full real-parameter hybrid CRB trace via assemble-and-invert.

    Serves as the cross-check route for hybrid_crb_alpha/hybrid_crb_psi.
    """
    j_aa = blocks.j_aa_d + blocks.j_aa_p
    fim = real_parameter_fim(j_aa, blocks.j_pp_d)
    inv = np.linalg.solve(fim, np.eye(fim.shape[0]))
    return float(np.trace(inv))
