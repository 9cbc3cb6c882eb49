"""Dense complex linear algebra primitives.

Matrices, pure states and density matrices are plain ``numpy`` arrays of
dtype ``complex128``. The ``as_*`` helpers check the validity invariants
and return a fresh read-only array; every function here is pure.

Entropies are measured in bits throughout.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DimensionCapError, InvariantError

DIM_CAP = 4096

# tolerance ladder
TOL_CONSTRUCTION = 1e-12
TOL_ALGEBRA = 1e-10
TOL_SPECTRAL = 1e-9
TOL_OPTIMIZER = 1e-6

# eigenvalues in [-NEG_CLAMP, 0) are treated as zero
NEG_CLAMP = 1e-10
# eigenvalues below this are left out of smoothed log sums
LOG_FLOOR = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_matrix(a, dim_cap: int = DIM_CAP) -> np.ndarray:
    """Validate a 2-D complex matrix with finite entries."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if max(m.shape) > dim_cap:
        raise DimensionCapError(f"matrix shape {m.shape} exceeds dimension cap {dim_cap}")
    if not np.all(np.isfinite(m)):
        raise InvariantError("matrix has non-finite entries")
    return _frozen(m)


def as_pure_state(v, tol: float = TOL_CONSTRUCTION, normalize: bool = False) -> np.ndarray:
    """Validate (or normalize) a state vector."""
    psi = np.array(v, dtype=np.complex128).reshape(-1)
    if psi.size == 0 or not np.all(np.isfinite(psi)):
        raise InvariantError("state vector must be non-empty and finite")
    norm = np.linalg.norm(psi)
    if normalize:
        if norm == 0:
            raise InvariantError("cannot normalize the zero vector")
        psi = psi / norm
    elif abs(norm**2 - 1.0) > tol:
        raise InvariantError(f"state norm^2 = {norm**2!r} differs from 1 by more than {tol}")
    return _frozen(psi)


def as_density(rho, herm_tol: float = TOL_CONSTRUCTION, trace_tol: float = TOL_ALGEBRA) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD up to ``-NEG_CLAMP``, unit trace."""
    m = np.array(as_matrix(rho))
    if m.shape[0] != m.shape[1]:
        raise InvariantError(f"density matrix must be square, got {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > herm_tol:
        raise InvariantError("density matrix is not Hermitian")
    tr = np.trace(m).real
    if abs(tr - 1.0) > trace_tol:
        raise InvariantError(f"density matrix trace {tr!r} is not 1")
    lam_min = np.linalg.eigvalsh(m)[0]
    if lam_min < -NEG_CLAMP:
        raise InvariantError(f"density matrix has negative eigenvalue {lam_min!r}")
    return _frozen(m)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return np.outer(psi, psi.conj())


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def tensor(*mats, dim_cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors).

    Raises DimensionCapError when the result would exceed ``dim_cap`` along
    either axis.
    """
    if not mats:
        raise ValueError("tensor needs at least one factor")
    arrs = [np.asarray(m, dtype=np.complex128) for m in mats]
    rows = int(np.prod([a.shape[0] for a in arrs]))
    cols = int(np.prod([a.shape[1] if a.ndim == 2 else 1 for a in arrs]))
    if max(rows, cols) > dim_cap:
        raise DimensionCapError(f"tensor product dimension {rows}x{cols} exceeds cap {dim_cap}")
    return reduce(np.kron, arrs)


def partial_trace(rho, dims: tuple[int, int], which: str = "second") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``which`` names the factor that is traced out: ``"second"`` keeps the
    first subsystem, ``"first"`` keeps the second. Works on a trailing batch
    of square matrices as well.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    d1, d2 = int(dims[0]), int(dims[1])
    if rho.shape[-1] != d1 * d2 or rho.shape[-2] != d1 * d2:
        raise ValueError(f"operator of shape {rho.shape[-2:]} does not factor as {d1}x{d2}")
    t = rho.reshape(rho.shape[:-2] + (d1, d2, d1, d2))
    if which == "second":
        return np.einsum("...ijkj->...ik", t)
    if which == "first":
        return np.einsum("...ijil->...jl", t)
    raise ValueError(f"which must be 'first' or 'second', got {which!r}")


def eig_hermitian(m, tol: float = TOL_ALGEBRA) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigh((m + m.conj().T) / 2)


def entropy_of_spectrum(lam, clamp: float = NEG_CLAMP) -> float:
    """-sum l log2 l over a spectrum, with 0 log 0 = 0."""
    lam = np.asarray(lam, dtype=float)
    if lam.size and lam.min() < -clamp:
        raise InvariantError(f"spectrum has eigenvalue {lam.min()!r} below -{clamp}")
    lam = lam[lam > 0]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy in bits."""
    rho = np.asarray(rho, dtype=np.complex128)
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    h = entropy_of_spectrum(lam)
    return min(h, float(np.log2(rho.shape[0])))


def entropies(batch) -> np.ndarray:
    """Smoothed entropies of a stack of Hermitian matrices.

    Eigenvalues below ``LOG_FLOOR`` are dropped from the sum; the bias is
    under 1e-11 bits per state.
    """
    batch = np.asarray(batch, dtype=np.complex128)
    lam = np.linalg.eigvalsh(batch)
    safe = np.where(lam > LOG_FLOOR, lam, 1.0)
    return -np.sum(np.where(lam > LOG_FLOOR, lam * np.log2(safe), 0.0), axis=-1)


def log2_clipped(rho) -> np.ndarray:
    """Matrix log2 on the support above ``LOG_FLOOR``; zero elsewhere.

    Used for entropy gradients, where the excluded directions carry no
    weight in the smoothed objective.
    """
    lam, vec = np.linalg.eigh(rho)
    logs = np.where(lam > LOG_FLOOR, np.log2(np.where(lam > LOG_FLOOR, lam, 1.0)), 0.0)
    return (vec * logs[..., None, :]) @ dagger(vec)


def schmidt_decompose(psi, dims: tuple[int, int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt decomposition ``psi = sum_i c_i |u_i>|v_i>``.

    Returns ``(coefficients, u, v)`` with coefficients descending and the
    basis vectors as the columns of ``u`` and ``v``.
    """
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    d1, d2 = int(dims[0]), int(dims[1])
    if psi.size != d1 * d2:
        raise ValueError(f"state of dimension {psi.size} does not factor as {d1}x{d2}")
    u, s, vh = np.linalg.svd(psi.reshape(d1, d2), full_matrices=False)
    return s, u, vh.T


def swap_operator(d: int) -> np.ndarray:
    """The d^2 x d^2 permutation S|a>|b> = |b>|a>."""
    if d < 1:
        raise ValueError("swap dimension must be at least 1")
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    a, b = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    s[(b * d + a).ravel(), (a * d + b).ravel()] = 1.0
    return s


def swap_trace(x, d: int) -> complex:
    """tr(S x) for an operator on C^d (x) C^d, without building S."""
    t = np.asarray(x, dtype=np.complex128).reshape(d, d, d, d)
    return complex(np.einsum("jiij->", t))


def shannon_entropy(p, tol: float = TOL_ALGEBRA) -> float:
    """Shannon entropy in bits of a probability vector."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and non-negative")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    q = p[p > 0]
    return float(max(0.0, -np.sum(q * np.log2(q))))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure_state(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniformly random pure state(s) via normalized Gaussian amplitudes."""
    shape = (d,) if size is None else (size, d)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (full rank by default)."""
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a), initial=0.0))


def is_psd(m, tol: float = TOL_ALGEBRA) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    return bool(np.linalg.eigvalsh((m + m.conj().T) / 2)[0] >= -tol)


def complete_basis(cols: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of the column span of ``cols``."""
    cols = np.asarray(cols, dtype=np.complex128)
    u, s, _ = np.linalg.svd(cols, full_matrices=True)
    rank = int(np.sum(s > TOL_ALGEBRA))
    return u[:, rank:]


def direct_sum(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Block-diagonal matrix from square blocks."""
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.complex128)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out
