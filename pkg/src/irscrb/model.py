"""Physical signal model: ULA responses, cascaded channel, training signal, priors.

Angles are normalized path angles in [-1, 1] (half-wavelength element
spacing), so every array response is 2-periodic in the angle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions and powers of the training setup.

    n: reflecting-element count, k: training-symbol count, l: cascaded
    path count, rho: transmit power, sigma_n_sq: noise variance,
    beta: per-element reflection power (modulus squared).
    """

    n: int
    k: int
    l: int
    rho: float = 1.0
    sigma_n_sq: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 reflecting elements, got n={self.n}")
        if self.k < 1 or self.l < 1:
            raise ValueError(f"k and l must be positive, got k={self.k}, l={self.l}")
        if self.rho <= 0 or self.sigma_n_sq <= 0:
            raise ValueError("rho and sigma_n_sq must be strictly positive")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")

    @property
    def snr(self) -> float:
        return self.rho / self.sigma_n_sq

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.snr)


@dataclass(frozen=True)
class PriorSpec:
    """Gain and angle prior: direct gain CN(mu0, sigma_sq), reflected gains
    CN(0, sigma_sq), angles i.i.d. uniform on [delta1, delta2]."""

    mu0: complex = 1.0 + 0.0j
    sigma_sq: float = 1.0
    delta1: float = -1.0
    delta2: float = 1.0

    def __post_init__(self):
        if self.sigma_sq <= 0:
            raise ValueError("sigma_sq must be strictly positive")
        if not (-1.0 <= self.delta1 < self.delta2 <= 1.0):
            raise ValueError(
                f"angle support must satisfy -1 <= delta1 < delta2 <= 1, "
                f"got [{self.delta1}, {self.delta2}]"
            )

    @property
    def full_support(self) -> bool:
        """True when the angle prior covers the whole domain [-1, 1]."""
        return self.delta1 == -1.0 and self.delta2 == 1.0


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the channel parameters: gains alpha (direct gain first,
    length l+1) and cascaded path angles psi (length l)."""

    alpha: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=complex))
        object.__setattr__(self, "psi", np.asarray(self.psi, dtype=float))
        if self.alpha.ndim != 1 or self.psi.ndim != 1:
            raise ValueError("alpha and psi must be one-dimensional")
        if self.alpha.size != self.psi.size + 1:
            raise ValueError(
                f"alpha must hold one more entry than psi, "
                f"got {self.alpha.size} gains for {self.psi.size} angles"
            )
        if np.any(np.abs(self.psi) > 1.0):
            raise ValueError("every path angle must lie in [-1, 1]")

    @property
    def l(self) -> int:
        return self.psi.size


def ula_response(psi: float, n: int) -> np.ndarray:
    """Array response of an n-element ULA at normalized angle psi."""
    if n < 1:
        raise ValueError("need at least one element")
    return np.exp(1j * np.pi * np.arange(n) * psi)


def ula_response_derivative(psi: float, n: int) -> np.ndarray:
    """Derivative of ula_response with respect to psi.

    Entry m equals 1j*pi*m*exp(1j*pi*m*psi); its squared norm is
    pi^2 * sum(m^2, m=1..n-1) for every psi.
    """
    if n < 1:
        raise ValueError("need at least one element")
    m = np.arange(n)
    return 1j * np.pi * m * np.exp(1j * np.pi * m * psi)


def ula_matrix(psi: np.ndarray, n: int) -> np.ndarray:
    """n x len(psi) matrix whose columns are ULA responses."""
    psi = np.asarray(psi, dtype=float)
    return np.exp(1j * np.pi * np.outer(np.arange(n), psi))


def ula_derivative_matrix(psi: np.ndarray, n: int) -> np.ndarray:
    """n x len(psi) matrix whose columns are ULA response derivatives."""
    m = np.arange(n)
    return (1j * np.pi * m[:, None]) * ula_matrix(psi, n)


def wrap_angle(psi):
    """Wrap angles into [-1, 1) modulo the 2-periodicity of the response."""
    return np.mod(np.asarray(psi, dtype=float) + 1.0, 2.0) - 1.0


def cascade_channel(gains_t, angles_t, gains_r, angles_r):
    """Combine transmit-side and receive-side paths into cascaded paths.

    Every (i, j) pair contributes gain a_i * a_j and wrapped angle
    psi_i + psi_j; the resulting sum of gain-weighted ULA responses equals
    the elementwise product of the two single-hop channel vectors.

    Returns (gains, angles), each of length len(gains_t) * len(gains_r).
    """
    gains_t = np.asarray(gains_t, dtype=complex)
    gains_r = np.asarray(gains_r, dtype=complex)
    angles_t = np.asarray(angles_t, dtype=float)
    angles_r = np.asarray(angles_r, dtype=float)
    if gains_t.size == 0 or gains_r.size == 0:
        raise ValueError("path lists must be nonempty")
    if gains_t.size != angles_t.size or gains_r.size != angles_r.size:
        raise ValueError("each gain needs a matching angle")
    if np.any(np.abs(angles_t) > 1.0) or np.any(np.abs(angles_r) > 1.0):
        raise ValueError("input angles must lie in [-1, 1]")
    gains = np.outer(gains_t, gains_r).ravel()
    angles = wrap_angle(np.add.outer(angles_t, angles_r).ravel())
    return gains, angles


def cascaded_vector(channel: ChannelRealization, n: int) -> np.ndarray:
    """Cascaded channel vector h = sum_l alpha_l * u_n(psi_l)."""
    return ula_matrix(channel.psi, n) @ channel.alpha[1:]


def synthesize_received(pattern, channel: ChannelRealization, noise: np.ndarray,
                        config: SystemConfig) -> np.ndarray:
    """Received training vector y = sqrt(rho) (alpha_0 1 + W^H h) + noise.

    All k training symbols carry amplitude sqrt(rho).
    """
    noise = np.asarray(noise, dtype=complex)
    if pattern.w.shape != (config.n, config.k):
        raise ValueError(
            f"pattern is {pattern.w.shape}, config expects ({config.n}, {config.k})"
        )
    if channel.l != config.l or noise.shape != (config.k,):
        raise ValueError("channel or noise dimensions do not match the config")
    h = cascaded_vector(channel, config.n)
    return np.sqrt(config.rho) * (channel.alpha[0] + pattern.w.conj().T @ h) + noise


def sample_complex_gaussian(rng: np.random.Generator, mean, var: float, size=None):
    """Circularly-symmetric complex Gaussian draws with the given variance."""
    scale = np.sqrt(var / 2.0)
    return mean + scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def sample_prior(prior: PriorSpec, config: SystemConfig, seed=None) -> ChannelRealization:
    """Draw one channel realization from the prior.

    seed may be an integer, a SeedSequence, or an existing Generator; the
    draw is deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    alpha = np.empty(config.l + 1, dtype=complex)
    alpha[0] = sample_complex_gaussian(rng, prior.mu0, prior.sigma_sq)
    alpha[1:] = sample_complex_gaussian(rng, 0.0, prior.sigma_sq, size=config.l)
    psi = rng.uniform(prior.delta1, prior.delta2, size=config.l)
    return ChannelRealization(alpha=alpha, psi=psi)
