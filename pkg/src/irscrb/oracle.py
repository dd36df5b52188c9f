"""Brute-force verification backends.

Everything here is kept independent of the closed-form modules: blocks are
assembled from the score-function/design-matrix route and averaged over
parameter draws, so agreement with the closed forms is a genuine check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PriorSpec, SystemConfig, sample_complex_gaussian
from .patterns import ReflectionPattern


@dataclass(frozen=True)
class OracleReport:
    """A Monte-Carlo estimate with per-entry standard errors of the mean."""

    estimate: np.ndarray
    standard_error: np.ndarray
    n_samples: int


@dataclass(frozen=True)
class McBayesFim:
    j_aa_d: OracleReport
    j_pp_d: OracleReport


@dataclass(frozen=True)
class McHybridFim:
    j_aa_d: OracleReport
    j_pp_d: OracleReport
    j_ap_d: OracleReport


def _design_matrix(pattern: ReflectionPattern, psi: np.ndarray, n: int) -> np.ndarray:
    """K x (L+1) matrix A with y = sqrt(rho) A alpha + noise."""
    u = np.exp(1j * np.pi * np.outer(np.arange(n), psi))
    return np.hstack([np.ones((pattern.k, 1)), pattern.w.conj().T @ u])


def _mean_vector(pattern, channel, config) -> np.ndarray:
    a = _design_matrix(pattern, channel.psi, config.n)
    return np.sqrt(config.rho) * (a @ channel.alpha)


def log_likelihood(y, pattern, channel, config) -> float:
    """Conditional log-density of the received vector given the parameters."""
    r = np.asarray(y) - _mean_vector(pattern, channel, config)
    return float(-config.k * np.log(np.pi * config.sigma_n_sq)
                 - np.vdot(r, r).real / config.sigma_n_sq)


def score_alpha(y, pattern, channel, config) -> np.ndarray:
    """Conjugate-gain derivative of the conditional log-likelihood, length l+1."""
    a = _design_matrix(pattern, channel.psi, config.n)
    r = np.asarray(y) - _mean_vector(pattern, channel, config)
    return np.sqrt(config.rho) / config.sigma_n_sq * (a.conj().T @ r)


def score_psi(y, pattern, channel, config) -> np.ndarray:
    """Angle derivatives of the conditional log-likelihood, length l."""
    r = np.asarray(y) - _mean_vector(pattern, channel, config)
    m = np.arange(config.n)
    out = np.empty(config.l)
    for i in range(config.l):
        du = 1j * np.pi * m * np.exp(1j * np.pi * m * channel.psi[i])
        dm = np.sqrt(config.rho) * channel.alpha[1 + i] * (pattern.w.conj().T @ du)
        out[i] = 2.0 / config.sigma_n_sq * np.vdot(r, dm).real
    return out


def _report(total, total_sq, n) -> OracleReport:
    mean = total / n
    # complex entries: variance of real and imaginary parts combined
    var = np.maximum(total_sq / n - np.abs(mean) ** 2, 0.0)
    return OracleReport(estimate=mean, standard_error=np.sqrt(var / n), n_samples=n)


def mc_bayes_fim(pattern: ReflectionPattern, config: SystemConfig, prior: PriorSpec,
                 n_angle_draws: int, seed=None, batch: int = 20000) -> McBayesFim:
    """Average the conditional information blocks over angle draws.

    Per draw the gain block is (rho/sn2) A^H A with A the design matrix, and
    the angle block is the diagonal of gain-averaged squared mean derivatives
    (reflected gains are zero-mean with variance sigma_sq, so the angle block
    is diagonal draw by draw and the gain moments enter analytically).
    """
    if n_angle_draws < 1000:
        raise ValueError("use at least 1000 angle draws")
    rng = np.random.default_rng(seed)
    n, k, l = config.n, config.k, config.l
    w = pattern.w
    m = np.arange(n)
    sum_aa = np.zeros((l + 1, l + 1), dtype=complex)
    sum_aa_sq = np.zeros((l + 1, l + 1))
    sum_pp = np.zeros(l)
    sum_pp_sq = np.zeros(l)
    done = 0
    while done < n_angle_draws:
        b = int(min(batch, n_angle_draws - done))
        psi = rng.uniform(prior.delta1, prior.delta2, size=(b, l))
        u = np.exp(1j * np.pi * psi[:, None, :] * m[None, :, None])      # b x n x l
        wu = np.einsum("nk,bnl->bkl", w.conj(), u)                        # b x k x l
        a = np.concatenate([np.ones((b, k, 1)), wu], axis=2)              # b x k x (l+1)
        aha = np.einsum("bki,bkj->bij", a.conj(), a)
        sum_aa += aha.sum(axis=0)
        sum_aa_sq += (np.abs(aha) ** 2).sum(axis=0)
        du = (1j * np.pi * m[None, :, None]) * u
        wdu = np.einsum("nk,bnl->bkl", w.conj(), du)
        dens = np.sum(np.abs(wdu) ** 2, axis=1)                           # b x l
        sum_pp += dens.sum(axis=0)
        sum_pp_sq += (dens ** 2).sum(axis=0)
        done += b
    c_aa = config.rho / config.sigma_n_sq
    c_pp = 2.0 * config.rho * prior.sigma_sq / config.sigma_n_sq
    aa = _report(c_aa * sum_aa, c_aa ** 2 * sum_aa_sq, n_angle_draws)
    pp_diag = _report(c_pp * sum_pp, c_pp ** 2 * sum_pp_sq, n_angle_draws)
    pp = OracleReport(estimate=np.diag(pp_diag.estimate),
                      standard_error=np.diag(pp_diag.standard_error),
                      n_samples=n_angle_draws)
    return McBayesFim(j_aa_d=aa, j_pp_d=pp)


def mc_hybrid_fim(pattern: ReflectionPattern, psi, config: SystemConfig,
                  prior: PriorSpec, n_gain_draws: int, seed=None) -> McHybridFim:
    """Average the conditional information blocks over gain draws at fixed angles.

    The gain block does not depend on the gains, the angle block averages
    Re{conj(a_p) a_q} quadratic forms, and the cross block averages the
    gain-linear forms (it should vanish for zero-mean reflected gains).
    """
    psi = np.asarray(psi, dtype=float)
    rng = np.random.default_rng(seed)
    n, l = config.n, config.l
    w = pattern.w
    mrange = np.arange(n)
    u = np.exp(1j * np.pi * np.outer(mrange, psi))                        # n x l
    du = (1j * np.pi * mrange[:, None]) * u
    q = w @ w.conj().T
    wbar = w.sum(axis=1)

    # gain block is constant in the gains: zero Monte-Carlo error
    a = _design_matrix(pattern, psi, n)
    aa = config.rho / config.sigma_n_sq * (a.conj().T @ a)
    aa_rep = OracleReport(estimate=aa, standard_error=np.zeros(aa.shape),
                          n_samples=n_gain_draws)

    dqd = du.conj().T @ q @ du                                            # l x l
    cross_base = np.vstack([wbar.conj() @ du, u.conj().T @ q @ du])       # (l+1) x l

    alpha = sample_complex_gaussian(rng, 0.0, prior.sigma_sq, size=(n_gain_draws, l))
    pp_draws = 2.0 * config.rho / config.sigma_n_sq * np.real(
        np.einsum("bp,bq,pq->bpq", alpha.conj(), alpha, dqd))
    ap_draws = config.rho / config.sigma_n_sq * (
        alpha[:, None, :] * cross_base[None, :, :])
    pp = _report(pp_draws.sum(axis=0), (pp_draws ** 2).sum(axis=0), n_gain_draws)
    ap = _report(ap_draws.sum(axis=0),
                 (np.abs(ap_draws) ** 2).sum(axis=0), n_gain_draws)
    return McHybridFim(j_aa_d=aa_rep, j_pp_d=pp, j_ap_d=ap)


def generic_hermitian_eig(matrix: np.ndarray):
    """Spectral decomposition of a Hermitian matrix, eigenvalues ascending."""
    matrix = np.asarray(matrix)
    herm_dev = np.max(np.abs(matrix - matrix.conj().T))
    scale = max(np.max(np.abs(matrix)), 1.0)
    if herm_dev > 1e-10 * scale:
        raise ValueError(f"matrix is not Hermitian (deviation {herm_dev:.2e})")
    return np.linalg.eigh(matrix)


def wirtinger_finite_difference(f, w: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference Wirtinger gradient of a real function of a complex vector.

    Uses df = 2 Re(g^H dw): g_j = (df/da_j + 1j df/db_j) / 2 with a, b the
    real and imaginary parts of coordinate j.
    """
    w = np.asarray(w, dtype=complex)
    g = np.empty(w.shape, dtype=complex)
    for j in range(w.size):
        e = np.zeros(w.size, dtype=complex)
        e[j] = h
        d_re = (f(w + e) - f(w - e)) / (2 * h)
        d_im = (f(w + 1j * e) - f(w - 1j * e)) / (2 * h)
        g[j] = 0.5 * (d_re + 1j * d_im)
    return g
