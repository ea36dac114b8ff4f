"""Structure-enforcing maps for the ADMM solver.

Three projections drive the iteration on 2n-by-2n block matrices
[[T1, X], [X^H, T2]]: a trace-penalized PSD proximal step (shift eigenvalues
down by 1/rho, clip at zero), per-diagonal Toeplitz averaging of the diagonal
blocks, and overwriting observed entries of the top-right block. Hermitian
symmetrization keeps the eigensolver's contract honest.

All functions are pure; none mutates its input.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .signal_model import ObservationSet

__all__ = [
    "BlockMatrix2n",
    "symmetrize",
    "psd_trace_prox",
    "toeplitz_project",
    "data_consistency",
    "feasible_project",
]

# below this side length a full dense eigendecomposition is cheaper than the
# subset solver's setup cost
_SUBSET_MIN_SIDE = 128


@dataclass
class BlockMatrix2n:
    """A 2n-by-2n complex matrix with named n-by-n block views.

    Views share memory with ``data``; mutate through them deliberately.
    """

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {self.data.shape}")
        if self.data.shape[0] % 2 != 0 or self.data.shape[0] == 0:
            raise ValueError(f"side length must be even and positive, got {self.data.shape[0]}")

    @property
    def n(self) -> int:
        return self.data.shape[0] // 2

    @property
    def TL(self) -> np.ndarray:
        return self.data[: self.n, : self.n]

    @property
    def TR(self) -> np.ndarray:
        return self.data[: self.n, self.n :]

    @property
    def BL(self) -> np.ndarray:
        return self.data[self.n :, : self.n]

    @property
    def BR(self) -> np.ndarray:
        return self.data[self.n :, self.n :]

    def hermitian_defect(self) -> float:
        """Frobenius norm of data - data^H."""
        return float(np.linalg.norm(self.data - self.data.conj().T))

    def is_feasible(
        self,
        obs: ObservationSet | None = None,
        variant: str = "toeplitz",
        herm_tol: float = 1e-12,
    ) -> bool:
        """Check the constraint-set membership enforced by feasible_project.

        Toeplitz structure, BL = TR^H, and observed-entry agreement are exact
        equality checks (they hold by assignment after a projection);
        Hermitian-ness is checked to ``herm_tol`` times the Frobenius norm.
        """
        scale = float(np.linalg.norm(self.data))
        if self.hermitian_defect() > herm_tol * max(scale, 1.0):
            return False
        if variant == "toeplitz":
            for block in (self.TL, self.BR):
                if not np.array_equal(block[:-1, :-1], block[1:, 1:]):
                    return False
        elif variant != "nuclear":
            raise ValueError(f"unknown variant {variant!r}")
        if not np.array_equal(self.BL, self.TR.conj().T):
            return False
        if obs is not None:
            if obs.n != self.n:
                return False
            if not np.array_equal(self.TR[obs.rows, obs.cols], obs.values):
                return False
        return True


def symmetrize(A: np.ndarray) -> np.ndarray:
    """Frobenius-nearest Hermitian matrix, (A + A^H)/2. Output is exactly Hermitian."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return 0.5 * (A + A.conj().T)


def psd_trace_prox(A: np.ndarray, rho: float) -> np.ndarray:
    """Minimizer of trace(M) + (rho/2)*||M - A||_F^2 over M >= 0 (PSD).

    Equals V D+ V^H where V D V^H eigendecomposes A - (1/rho) I and D+ clips
    negatives: each output eigenvalue is max(lambda_i(A) - 1/rho, 0). Only the
    eigenpairs above the 1/rho threshold are computed, which is what makes the
    step cheap when the iterate is close to low rank.

    ``A`` must be Hermitian (symmetrize first); only its lower triangle is read.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not (rho > 0):
        raise ValueError(f"rho must be positive, got {rho}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries; eigendecomposition would fail")
    shift = 1.0 / rho
    if A.shape[0] < _SUBSET_MIN_SIDE:
        w, V = np.linalg.eigh(A)
        keep = w > shift
        if not np.any(keep):
            return np.zeros_like(A)
        V = V[:, keep]
        return (V * (w[keep] - shift)) @ V.conj().T
    w, V = scipy.linalg.eigh(A, subset_by_value=(shift, np.inf), check_finite=False)
    if w.size == 0:
        return np.zeros_like(A)
    return (V * (w - shift)) @ V.conj().T


@lru_cache(maxsize=8)
def _diag_offsets(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Offset-index matrix idx[i,j] = i - j + n - 1 and per-offset entry counts."""
    i = np.arange(n)
    idx = i[:, None] - i[None, :] + (n - 1)
    counts = np.bincount(idx.ravel(), minlength=2 * n - 1).astype(float)
    idx.setflags(write=False)
    counts.setflags(write=False)
    return idx, counts


def toeplitz_project(B: np.ndarray) -> np.ndarray:
    """Replace every diagonal of B by its arithmetic mean.

    This is the Frobenius-orthogonal projection onto the Toeplitz subspace.
    Each output diagonal is exactly constant (one float broadcast along it),
    and projecting a Hermitian matrix yields a Hermitian result.
    """
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {B.shape}")
    n = B.shape[0]
    idx, counts = _diag_offsets(n)
    flat = idx.ravel()
    nbins = 2 * n - 1
    if np.iscomplexobj(B):
        sums = np.bincount(flat, weights=B.real.ravel(), minlength=nbins).astype(complex)
        sums += 1j * np.bincount(flat, weights=B.imag.ravel(), minlength=nbins)
    else:
        sums = np.bincount(flat, weights=B.ravel(), minlength=nbins)
    return (sums / counts)[idx]


def data_consistency(Xblock: np.ndarray, obs: ObservationSet | None) -> np.ndarray:
    """Copy of Xblock with the observed entries overwritten by their samples.

    ``obs=None`` stands for an empty observation set (ObservationSet itself
    requires at least one entry) and returns the block unchanged.
    """
    X = np.array(Xblock, dtype=complex)
    if obs is None:
        return X
    if X.shape != (obs.n, obs.n):
        raise ValueError(f"block shape {X.shape} does not match observations for n={obs.n}")
    X[obs.rows, obs.cols] = obs.values
    return X


def feasible_project(
    A: np.ndarray, obs: ObservationSet, variant: str = "toeplitz"
) -> BlockMatrix2n:
    """Project onto the solver's constraint set (exactly, in Frobenius norm).

    Symmetrizes A, then Toeplitz-averages the diagonal blocks (skipped for the
    ``nuclear`` variant, which leaves them free Hermitian), pins the observed
    entries of the top-right block, and mirrors it into the bottom-left.

    Because the constraint set sits inside the Hermitian subspace and
    symmetrization is the orthogonal projection onto that subspace, the result
    minimizes ||N - A||_F over the set for the raw input A as well.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2 != 0:
        raise ValueError(f"expected an even-sized square matrix, got shape {A.shape}")
    n = A.shape[0] // 2
    if obs.n != n:
        raise ValueError(f"observations are for n={obs.n}, matrix has n={n}")
    if variant not in ("toeplitz", "nuclear"):
        raise ValueError(f"unknown variant {variant!r}")
    H = symmetrize(A)
    out = np.empty_like(H)
    if variant == "toeplitz":
        out[:n, :n] = toeplitz_project(H[:n, :n])
        out[n:, n:] = toeplitz_project(H[n:, n:])
    else:
        out[:n, :n] = H[:n, :n]
        out[n:, n:] = H[n:, n:]
    tr = data_consistency(H[:n, n:], obs)
    out[:n, n:] = tr
    out[n:, :n] = tr.conj().T
    return BlockMatrix2n(out)
