"""Synthesis and sampling of 2D spectrally sparse signals.

A signal is a superposition of ``s`` complex sinusoids on an n-by-n grid,

    X(j, k) = sum_p c_p * exp(i*2*pi*(f_p1*j + f_p2*k)),

with continuous-valued frequency pairs (f_p1, f_p2) in [0, 1)^2. This module
synthesizes random instances (pairwise-separated frequencies, randomized
amplitudes and phases), samples observed entries uniformly without
replacement, and provides the relative-error metric that decides whether a
recovery counts as successful.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FrequencyPair",
    "SpectralSignal",
    "ObservationSet",
    "evaluate_signal",
    "synth_random",
    "sample_observations",
    "relative_error",
    "min_separation",
    "write_dense_csv",
]


@dataclass(frozen=True)
class FrequencyPair:
    """A 2D frequency (cycles per sample along each axis), each in [0, 1)."""

    f1: float
    f2: float

    def __post_init__(self):
        for name, f in (("f1", self.f1), ("f2", self.f2)):
            if not (0.0 <= f < 1.0):
                raise ValueError(f"{name}={f} outside [0, 1)")


def _freq_array(freqs) -> np.ndarray:
    """Coerce a list of FrequencyPair or an (s, 2) array-like to float array."""
    if len(freqs) and isinstance(freqs[0], FrequencyPair):
        arr = np.array([[p.f1, p.f2] for p in freqs], dtype=float)
    else:
        arr = np.atleast_2d(np.asarray(freqs, dtype=float))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (s, 2) frequencies, got shape {arr.shape}")
    return arr


def min_separation(freqs) -> float:
    """Smallest per-axis gap |f_p - f_q| over all pairs p != q.

    Plain absolute difference on both axes (no wrap-around); ``inf`` for a
    single component. Synthesis enforces this to be at least 1/n.
    """
    arr = _freq_array(freqs)
    s = arr.shape[0]
    if s < 2:
        return float("inf")
    gaps = np.abs(arr[:, None, :] - arr[None, :, :])  # (s, s, 2)
    off = ~np.eye(s, dtype=bool)
    return float(min(gaps[off, 0].min(), gaps[off, 1].min()))


def evaluate_signal(freqs, coeffs, n: int) -> np.ndarray:
    """Evaluate the superposition of sinusoids on the n-by-n grid.

    Parameters
    ----------
    freqs : list of FrequencyPair or (s, 2) array-like
        Frequency pairs, entries in [0, 1).
    coeffs : (s,) array-like of complex
        One coefficient per sinusoid.
    n : int
        Grid side length.

    Returns
    -------
    (n, n) complex ndarray with entry (j, k) equal to
    ``sum_p c_p * exp(2j*pi*(f_p1*j + f_p2*k))``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    f = _freq_array(freqs)
    c = np.asarray(coeffs, dtype=complex).ravel()
    if f.shape[0] != c.shape[0]:
        raise ValueError(f"{f.shape[0]} frequencies but {c.shape[0]} coefficients")
    if f.shape[0] < 1:
        raise ValueError("need at least one sinusoid")
    grid = np.arange(n)
    # Columns of V1/V2 are the per-axis complex exponentials; the dense matrix
    # is (V1 * c) @ V2.T, the outer-product expansion of the sum.
    v1 = np.exp(2j * np.pi * np.outer(grid, f[:, 0]))
    v2 = np.exp(2j * np.pi * np.outer(grid, f[:, 1]))
    return (v1 * c) @ v2.T


@dataclass
class SpectralSignal:
    """Ground-truth signal: size, frequencies, coefficients, dense values.

    ``freqs`` is an (s, 2) float array and ``coeffs`` an (s,) complex array.
    Frequency components must be distinct across sinusoids on both axes, so
    the dense matrix has rank exactly s.
    """

    n: int
    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        self.freqs = _freq_array(self.freqs)
        self.coeffs = np.asarray(self.coeffs, dtype=complex).ravel()
        s = self.freqs.shape[0]
        if s != self.coeffs.shape[0]:
            raise ValueError("freqs and coeffs length mismatch")
        if not (1 <= s <= self.n):
            raise ValueError(f"need 1 <= s <= n, got s={s}, n={self.n}")
        if np.any(self.freqs < 0.0) or np.any(self.freqs >= 1.0):
            raise ValueError("frequencies must lie in [0, 1)")
        for axis in (0, 1):
            vals = self.freqs[:, axis]
            if np.unique(vals).size != s:
                raise ValueError(f"axis-{axis + 1} frequency components not distinct")

    @property
    def s(self) -> int:
        return self.freqs.shape[0]

    @cached_property
    def dense(self) -> np.ndarray:
        """The n-by-n evaluation of the signal (computed once, then cached)."""
        return evaluate_signal(self.freqs, self.coeffs, self.n)

    def min_separation(self) -> float:
        return min_separation(self.freqs)

    def to_json_dict(self) -> dict:
        return {
            "n": int(self.n),
            "s": int(self.s),
            "freqs": [[float(a), float(b)] for a, b in self.freqs],
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SpectralSignal":
        coeffs = np.array([complex(re, im) for re, im in d["coeffs"]])
        sig = cls(n=int(d["n"]), freqs=np.asarray(d["freqs"], dtype=float), coeffs=coeffs)
        if "s" in d and int(d["s"]) != sig.s:
            raise ValueError(f"declared s={d['s']} but {sig.s} components given")
        return sig

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2))

    @classmethod
    def load_json(cls, path) -> "SpectralSignal":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


@dataclass
class ObservationSet:
    """Observed entries of an n-by-n signal: index set T plus sampled values.

    ``rows``/``cols`` are parallel int arrays of the m distinct 0-based
    indices; ``values`` holds the corresponding complex samples.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.intp).ravel()
        self.cols = np.asarray(self.cols, dtype=np.intp).ravel()
        self.values = np.asarray(self.values, dtype=complex).ravel()
        m = self.rows.size
        if not (self.cols.size == m == self.values.size):
            raise ValueError("rows, cols, values length mismatch")
        if not (1 <= m <= self.n * self.n):
            raise ValueError(f"need 1 <= m <= n^2, got m={m}, n={self.n}")
        if np.any(self.rows < 0) or np.any(self.rows >= self.n) or np.any(
            self.cols < 0
        ) or np.any(self.cols >= self.n):
            raise ValueError("observation index out of range")
        if np.unique(self.rows * self.n + self.cols).size != m:
            raise ValueError("observation indices must be distinct")

    @property
    def m(self) -> int:
        return self.rows.size

    def index_pairs(self) -> set[tuple[int, int]]:
        return {(int(j), int(k)) for j, k in zip(self.rows, self.cols)}

    def embed(self) -> np.ndarray:
        """n-by-n matrix holding the observed values, zero elsewhere."""
        out = np.zeros((self.n, self.n), dtype=complex)
        out[self.rows, self.cols] = self.values
        return out

    def to_json_dict(self) -> dict:
        return {
            "n": int(self.n),
            "m": int(self.m),
            "entries": [
                [int(j), int(k), float(v.real), float(v.imag)]
                for j, k, v in zip(self.rows, self.cols, self.values)
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ObservationSet":
        entries = d["entries"]
        rows = [e[0] for e in entries]
        cols = [e[1] for e in entries]
        values = [complex(e[2], e[3]) for e in entries]
        obs = cls(n=int(d["n"]), rows=rows, cols=cols, values=values)
        if "m" in d and int(d["m"]) != obs.m:
            raise ValueError(f"declared m={d['m']} but {obs.m} entries given")
        return obs

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2))

    @classmethod
    def load_json(cls, path) -> "ObservationSet":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def synth_random(
    n: int, s: int, rng_seed: int, max_attempts: int = 100_000
) -> SpectralSignal:
    """Draw a random signal instance following the synthesis protocol.

    Frequencies are drawn uniformly on [0, 1)^2 by rejection until every pair
    is separated by at least 1/n on both axes. Amplitudes are ``0.5 + w**2``
    with w standard normal; phases are uniform on [0, 2*pi). Deterministic
    for a given seed.

    Raises
    ------
    ValueError
        If s is infeasible for the separation condition (admission rule
        s <= n/2).
    RuntimeError
        If no separated draw is found within ``max_attempts``.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if s > n // 2:
        raise ValueError(f"s={s} too large for separated synthesis at n={n} (need s <= n/2)")
    rng = np.random.default_rng(rng_seed)
    sep = 1.0 / n
    for _ in range(max_attempts):
        freqs = rng.random((s, 2))
        if min_separation(freqs) >= sep:
            break
    else:
        raise RuntimeError(
            f"no frequency set with separation >= 1/{n} found in {max_attempts} attempts"
        )
    amps = 0.5 + rng.standard_normal(s) ** 2
    phases = rng.uniform(0.0, 2.0 * np.pi, s)
    return SpectralSignal(n=n, freqs=freqs, coeffs=amps * np.exp(1j * phases))


def sample_observations(signal: SpectralSignal, m: int, rng_seed: int) -> ObservationSet:
    """Observe m distinct entries of the signal, uniformly without replacement."""
    n = signal.n
    if not (1 <= m <= n * n):
        raise ValueError(f"need 1 <= m <= n^2 = {n * n}, got m={m}")
    rng = np.random.default_rng(rng_seed)
    flat = rng.choice(n * n, size=m, replace=False)
    rows, cols = np.divmod(flat, n)
    return ObservationSet(n=n, rows=rows, cols=cols, values=signal.dense[rows, cols])


def relative_error(X_rec: np.ndarray, X_true: np.ndarray) -> float:
    """Frobenius-norm relative error ||X_rec - X_true||_F / ||X_true||_F."""
    X_rec = np.asarray(X_rec)
    X_true = np.asarray(X_true)
    if X_rec.shape != X_true.shape:
        raise ValueError(f"shape mismatch: {X_rec.shape} vs {X_true.shape}")
    denom = np.linalg.norm(X_true)
    if denom == 0.0:
        raise ValueError("reference matrix has zero Frobenius norm")
    return float(np.linalg.norm(X_rec - X_true) / denom)


def write_dense_csv(X: np.ndarray, path) -> None:
    """Export a complex matrix as row-major CSV with 're+imi' cells."""
    X = np.asarray(X, dtype=complex)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in X:
            writer.writerow([f"{z.real:.17g}{z.imag:+.17g}i" for z in row])
