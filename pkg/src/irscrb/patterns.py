"""Reflection-pattern generators, the constant-modulus projection, and CSV I/O."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import SystemConfig

MODULUS_TOL = 1e-12


@dataclass
class ReflectionPattern:
    """An n x k reflection-coefficient matrix with per-entry power beta.

    constant_modulus is derived at construction: True when every entry has
    modulus sqrt(beta) to within MODULUS_TOL (the on-off pattern is the
    baseline that fails this and is flagged rather than rejected).
    """

    w: np.ndarray
    beta: float
    name: str = "pattern"
    constant_modulus: bool = field(init=False)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=complex)
        if self.w.ndim != 2:
            raise ValueError("pattern matrix must be two-dimensional")
        if self.beta <= 0:
            raise ValueError("beta must be strictly positive")
        dev = np.max(np.abs(np.abs(self.w) - np.sqrt(self.beta)))
        self.constant_modulus = bool(dev <= MODULUS_TOL)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def k(self) -> int:
        return self.w.shape[1]

    def q(self) -> np.ndarray:
        """Gram matrix Q = W W^H."""
        return self.w @ self.w.conj().T

    def w_bar(self) -> np.ndarray:
        """Column sum over the k training symbols."""
        return self.w.sum(axis=1)

    def w1_bar(self) -> complex:
        """Sum of the first-row entries."""
        return complex(self.w[0, :].sum())


def _check_k_le_n(config: SystemConfig):
    if config.k > config.n:
        raise ValueError(f"need k <= n, got k={config.k}, n={config.n}")


def on_off_pattern(config: SystemConfig) -> ReflectionPattern:
    """Activate element k alone during symbol k, amplitude sqrt(beta)."""
    _check_k_le_n(config)
    w = np.zeros((config.n, config.k), dtype=complex)
    idx = np.arange(config.k)
    w[idx, idx] = np.sqrt(config.beta)
    return ReflectionPattern(w=w, beta=config.beta, name="on-off")


def _dft_columns(config: SystemConfig, cols: np.ndarray) -> np.ndarray:
    p = np.arange(config.n)[:, None]
    return np.sqrt(config.beta) * np.exp(-2j * np.pi * p * cols[None, :] / config.n)


def dft_first_k(config: SystemConfig) -> ReflectionPattern:
    """First k columns of the n x n DFT matrix, scaled to power beta."""
    _check_k_le_n(config)
    w = _dft_columns(config, np.arange(config.k))
    return ReflectionPattern(w=w, beta=config.beta, name="dft-first")


def _equispaced_columns(config: SystemConfig) -> np.ndarray:
    # nearest-integer spacing; exact stride n/k when k divides n
    return np.round(1 + np.arange(config.k) * config.n / config.k).astype(int) - 1


def dft_equispaced(config: SystemConfig) -> ReflectionPattern:
    """Equi-spaced k columns of the n x n DFT matrix."""
    _check_k_le_n(config)
    w = _dft_columns(config, _equispaced_columns(config))
    return ReflectionPattern(w=w, beta=config.beta, name="dft-equispaced")


def dft_equispaced_phase_shifted(config: SystemConfig) -> ReflectionPattern:
    """Equi-spaced DFT columns with column k rotated by exp(2j*pi*(k-1)/k).

    The rotation zeroes the first-row sum while leaving the Gram matrix,
    hence the angle-information density, untouched.
    """
    _check_k_le_n(config)
    w = _dft_columns(config, _equispaced_columns(config))
    w = w * np.exp(2j * np.pi * np.arange(config.k) / config.k)[None, :]
    return ReflectionPattern(w=w, beta=config.beta, name="dft-equispaced-shifted")


PATTERN_BUILDERS = {
    "on-off": on_off_pattern,
    "dft-first": dft_first_k,
    "dft-equispaced": dft_equispaced,
    "dft-equispaced-shifted": dft_equispaced_phase_shifted,
}


def pattern_by_name(name: str, config: SystemConfig) -> ReflectionPattern:
    try:
        return PATTERN_BUILDERS[name](config)
    except KeyError:
        raise ValueError(
            f"unknown pattern {name!r}; choose from {sorted(PATTERN_BUILDERS)}"
        ) from None


def project_constant_modulus(w: np.ndarray, beta: float) -> np.ndarray:
    """Nearest point with every entry at modulus sqrt(beta).

    Phases are preserved; exact zeros map to sqrt(beta) (phase-0 convention,
    any phase would be equally near).
    """
    if beta <= 0:
        raise ValueError("beta must be strictly positive")
    w = np.asarray(w, dtype=complex)
    mag = np.abs(w)
    safe = np.where(mag == 0, 1.0, mag)
    return np.where(mag == 0, np.sqrt(beta) + 0j, np.sqrt(beta) * w / safe)


def validate_pattern(pattern: ReflectionPattern, config: SystemConfig | None = None) -> ReflectionPattern:
    """Check shape, finiteness, and the constant-modulus flag; return the pattern."""
    if not np.all(np.isfinite(pattern.w)):
        raise ValueError("pattern contains non-finite entries")
    if config is not None and pattern.w.shape != (config.n, config.k):
        raise ValueError(
            f"pattern is {pattern.w.shape}, config expects ({config.n}, {config.k})"
        )
    dev = np.max(np.abs(np.abs(pattern.w) - np.sqrt(pattern.beta)))
    if pattern.constant_modulus and dev > MODULUS_TOL:
        raise ValueError("pattern flagged constant-modulus but entries deviate")
    return pattern


def save_pattern(path, pattern: ReflectionPattern):
    """Write a pattern to CSV, two values (real, imag) per entry."""
    with open(path, "w") as fh:
        fh.write(f"# irscrb reflection pattern: name={pattern.name}\n")
        fh.write(f"# n={pattern.n} k={pattern.k} beta={pattern.beta!r}\n")
        fh.write("# row p holds re,im pairs for entries (p, 1..k)\n")
        for row in pattern.w:
            fields = []
            for v in row:
                fields.append(repr(float(v.real)))
                fields.append(repr(float(v.imag)))
            fh.write(",".join(fields) + "\n")


def load_pattern(path) -> ReflectionPattern:
    """Read a pattern written by save_pattern."""
    name, beta = "pattern", None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].replace(":", " ").split():
                    if tok.startswith("name="):
                        name = tok[5:]
                    elif tok.startswith("beta="):
                        beta = float(tok[5:])
                continue
            vals = [float(x) for x in line.split(",")]
            if len(vals) % 2:
                raise ValueError(f"odd field count in pattern row of {path}")
            rows.append([complex(re, im) for re, im in zip(vals[::2], vals[1::2])])
    if not rows:
        raise ValueError(f"no pattern data found in {path}")
    w = np.array(rows, dtype=complex)
    if beta is None:
        beta = float(np.max(np.abs(w)) ** 2)
    return ReflectionPattern(w=w, beta=beta, name=name)
