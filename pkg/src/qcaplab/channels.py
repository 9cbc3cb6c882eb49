"""Quantum channel representations and the named channel constructions.

Five concrete forms share one surface (``apply``, ``apply_pure``,
``adjoint``, ``choi``, ``to_kraus``):

* ``KrausChannel``      rho -> sum_k E_k rho E_k^dag
* ``MeasPrepChannel``   rho -> sum_i tr(M_i rho) sigma_i   (entanglement breaking)
* ``QCChannel``         rho -> sum_i tr(M_i rho) |i><i|
* ``CQChannel``         rho -> sum_i <i|rho|i> sigma_i
* ``DirectSumChannel``  rho -> (+)_i p_i Phi_i(rho)        (block-diagonal output)

Trace preservation is not enforced when a channel object is built, so that
broken inputs can be diagnosed with ``validate_cptp``; the named
constructors below always return valid channels, and the document loader
rejects invalid ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Sequence, Union

import numpy as np

from . import linalg_core as la
from .errors import InvariantError

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

CPTP_TOL = 1e-9


def _stack(ops, name: str) -> np.ndarray:
    arr = np.array([np.asarray(o, dtype=np.complex128) for o in ops])
    if arr.ndim != 3 or arr.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty sequence of matrices of equal shape")
    if not np.all(np.isfinite(arr)):
        raise InvariantError(f"{name} contain non-finite entries")
    if max(arr.shape[1:]) > la.DIM_CAP:
        raise la.DimensionCapError(f"{name} dimension {arr.shape[1:]} exceeds cap {la.DIM_CAP}")
    arr.setflags(write=False)
    return arr


class _ChannelBase:
    dim_in: int
    dim_out: int

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.complex128)
        if rho.shape[-2:] != (self.dim_in, self.dim_in):
            raise ValueError(f"input of shape {rho.shape[-2:]} does not match dim_in={self.dim_in}")
        return self._apply(rho)

    def apply_pure(self, psi) -> np.ndarray:
        """Output for pure input(s); ``psi`` may be a stack of shape (N, dim_in)."""
        psi = np.asarray(psi, dtype=np.complex128)
        if psi.shape[-1] != self.dim_in:
            raise ValueError(f"state of dimension {psi.shape[-1]} does not match dim_in={self.dim_in}")
        return self._apply_pure(psi)

    def __call__(self, rho) -> np.ndarray:
        return self.apply(rho)

    @cached_property
    def kraus_ops(self) -> np.ndarray:
        return self.to_kraus().kraus


@dataclass(frozen=True, eq=False)
class KrausChannel(_ChannelBase):
    kraus: np.ndarray

    def __init__(self, kraus):
        object.__setattr__(self, "kraus", _stack(kraus, "Kraus operators"))

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    def _apply(self, rho):
        k = self.kraus
        return np.sum(k @ rho[..., None, :, :] @ la.dagger(k), axis=-3)

    def _apply_pure(self, psi):
        r, dout, din = self.kraus.shape
        v = (psi @ self.kraus.reshape(r * dout, din).T).reshape(psi.shape[:-1] + (r, dout))
        return np.swapaxes(v, -1, -2) @ v.conj()

    def adjoint(self, x) -> np.ndarray:
        k = self.kraus
        r, dout, din = k.shape
        y = np.asarray(x, dtype=np.complex128)[..., None, :, :] @ k
        y = y.reshape(y.shape[:-3] + (r * dout, din))
        return k.reshape(r * dout, din).conj().T @ y

    def completeness(self) -> np.ndarray:
        return np.einsum("kji,kjl->il", self.kraus.conj(), self.kraus)

    def choi(self) -> np.ndarray:
        a = self.kraus.reshape(self.kraus.shape[0], -1)
        return a.T @ a.conj()

    def to_kraus(self) -> "KrausChannel":
        return self


@dataclass(frozen=True, eq=False)
class MeasPrepChannel(_ChannelBase):
    effects: np.ndarray
    preps: np.ndarray

    def __init__(self, effects, preps):
        e = _stack(effects, "effects")
        p = _stack(preps, "preparations")
        if e.shape[0] != p.shape[0]:
            raise ValueError(f"{e.shape[0]} effects but {p.shape[0]} preparations")
        if e.shape[1] != e.shape[2] or p.shape[1] != p.shape[2]:
            raise ValueError("effects and preparations must be square")
        object.__setattr__(self, "effects", e)
        object.__setattr__(self, "preps", p)

    @property
    def dim_in(self) -> int:
        return self.effects.shape[1]

    @property
    def dim_out(self) -> int:
        return self.preps.shape[1]

    def probabilities(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.complex128)
        m, d = self.effects.shape[0], self.dim_in
        flat = np.swapaxes(rho, -1, -2).reshape(rho.shape[:-2] + (d * d,))
        return flat @ self.effects.reshape(m, d * d).T

    def _mix(self, probs):
        m, e = self.preps.shape[0], self.dim_out
        return (probs.astype(np.complex128) @ self.preps.reshape(m, e * e)).reshape(probs.shape[:-1] + (e, e))

    def _apply(self, rho):
        return self._mix(self.probabilities(rho))

    def _apply_pure(self, psi):
        m, d = self.effects.shape[0], self.dim_in
        y = (psi @ self.effects.reshape(m * d, d).T).reshape(psi.shape[:-1] + (m, d))
        probs = np.sum(y * psi.conj()[..., None, :], axis=-1).real
        return self._mix(probs)

    def adjoint(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        m, d, e = self.effects.shape[0], self.dim_in, self.dim_out
        w = np.swapaxes(x, -1, -2).reshape(x.shape[:-2] + (e * e,)) @ self.preps.reshape(m, e * e).T
        return (w @ self.effects.reshape(m, d * d)).reshape(x.shape[:-2] + (d, d))

    def completeness(self) -> np.ndarray:
        return self.effects.sum(axis=0)

    def choi(self) -> np.ndarray:
        return sum(np.kron(s, m.T) for s, m in zip(self.preps, self.effects))

    def to_kraus(self) -> KrausChannel:
        return kraus_from_meas_prepare(self)

    def to_meas_prep(self) -> "MeasPrepChannel":
        return self


@dataclass(frozen=True, eq=False)
class QCChannel(_ChannelBase):
    effects: np.ndarray

    def __init__(self, effects):
        e = _stack(effects, "effects")
        if e.shape[1] != e.shape[2]:
            raise ValueError("effects must be square")
        object.__setattr__(self, "effects", e)

    @property
    def dim_in(self) -> int:
        return self.effects.shape[1]

    @property
    def dim_out(self) -> int:
        return self.effects.shape[0]

    def _flags(self) -> np.ndarray:
        return np.eye(self.dim_out, dtype=np.complex128)[:, :, None] * np.eye(self.dim_out)[:, None, :]

    def to_meas_prep(self) -> MeasPrepChannel:
        return MeasPrepChannel(self.effects, self._flags())

    def _apply(self, rho):
        probs = np.einsum("mij,...ji->...m", self.effects, rho)
        return probs[..., :, None] * np.eye(self.dim_out)

    def _apply_pure(self, psi):
        probs = np.einsum("...i,mij,...j->...m", psi.conj(), self.effects, psi, optimize=True).real
        return probs[..., :, None] * np.eye(self.dim_out)

    def adjoint(self, x) -> np.ndarray:
        w = np.einsum("...mm->...m", x)
        return np.einsum("...m,mij->...ij", w, self.effects)

    def completeness(self) -> np.ndarray:
        return self.effects.sum(axis=0)

    def choi(self) -> np.ndarray:
        return self.to_meas_prep().choi()

    def to_kraus(self) -> KrausChannel:
        return kraus_from_meas_prepare(self.to_meas_prep())


@dataclass(frozen=True, eq=False)
class CQChannel(_ChannelBase):
    preps: np.ndarray

    def __init__(self, preps):
        p = _stack(preps, "preparations")
        if p.shape[1] != p.shape[2]:
            raise ValueError("preparations must be square")
        object.__setattr__(self, "preps", p)

    @property
    def dim_in(self) -> int:
        return self.preps.shape[0]

    @property
    def dim_out(self) -> int:
        return self.preps.shape[1]

    def to_meas_prep(self) -> MeasPrepChannel:
        n = self.dim_in
        basis = np.eye(n, dtype=np.complex128)
        return MeasPrepChannel(basis[:, :, None] * basis[:, None, :], self.preps)

    def _apply(self, rho):
        w = np.einsum("...ii->...i", rho)
        return np.einsum("...m,mij->...ij", w, self.preps)

    def _apply_pure(self, psi):
        return np.einsum("...m,mij->...ij", np.abs(psi) ** 2, self.preps)

    def adjoint(self, x) -> np.ndarray:
        w = np.einsum("mij,...ji->...m", self.preps, x)
        return w[..., :, None] * np.eye(self.dim_in)

    def completeness(self) -> np.ndarray:
        return np.eye(self.dim_in, dtype=np.complex128)

    def choi(self) -> np.ndarray:
        return self.to_meas_prep().choi()

    def to_kraus(self) -> KrausChannel:
        return kraus_from_meas_prepare(self.to_meas_prep())


MEASURE_PREPARE_FORMS = (MeasPrepChannel, QCChannel, CQChannel)


@dataclass(frozen=True, eq=False)
class DirectSumChannel(_ChannelBase):
    """Weighted parts whose outputs occupy orthogonal diagonal blocks.

    Keeps every part in its own form, so applying the channel or its
    adjoint costs the sum of the part costs.
    """

    weights: np.ndarray
    parts: tuple

    def __init__(self, weights, parts):
        w = np.asarray(weights, dtype=float).reshape(-1)
        parts = tuple(parts)
        if not parts or w.size != len(parts):
            raise ValueError("direct sum needs one weight per part")
        if np.any(w < 0) or abs(w.sum() - 1.0) > la.TOL_ALGEBRA:
            raise ValueError("direct-sum weights must be a probability vector")
        if any(p.dim_in != parts[0].dim_in for p in parts):
            raise ValueError("direct-sum parts must share dim_in")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "parts", parts)

    @property
    def dim_in(self) -> int:
        return self.parts[0].dim_in

    @property
    def dim_out(self) -> int:
        return sum(p.dim_out for p in self.parts)

    @property
    def offsets(self) -> list[int]:
        return [0] + np.cumsum([p.dim_out for p in self.parts]).tolist()

    def blocks(self, rho) -> list[np.ndarray]:
        """The diagonal output blocks p_i Phi_i(rho)."""
        rho = np.asarray(rho, dtype=np.complex128)
        return [w * p._apply(rho) for w, p in zip(self.weights, self.parts)]

    def blocks_pure(self, psi) -> list[np.ndarray]:
        psi = np.asarray(psi, dtype=np.complex128)
        return [w * p._apply_pure(psi) for w, p in zip(self.weights, self.parts)]

    def _assemble(self, blocks: list[np.ndarray]) -> np.ndarray:
        lead = blocks[0].shape[:-2]
        out = np.zeros(lead + (self.dim_out, self.dim_out), dtype=np.complex128)
        for lo, b in zip(self.offsets, blocks):
            k = b.shape[-1]
            out[..., lo:lo + k, lo:lo + k] = b
        return out

    def _apply(self, rho):
        return self._assemble(self.blocks(rho))

    def _apply_pure(self, psi):
        return self._assemble(self.blocks_pure(psi))

    def adjoint_blocks(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        """sum_i p_i Phi_i^*(X_i) for per-block operators X_i."""
        return sum(w * p.adjoint(x) for w, p, x in zip(self.weights, self.parts, xs))

    def adjoint(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        offs = self.offsets
        return self.adjoint_blocks([x[..., lo:hi, lo:hi] for lo, hi in zip(offs[:-1], offs[1:])])

    def completeness(self) -> np.ndarray:
        return sum(w * p.completeness() for w, p in zip(self.weights, self.parts))

    def choi(self) -> np.ndarray:
        return self.to_kraus().choi()

    def to_kraus(self) -> KrausChannel:
        offs = self.offsets
        ops = []
        for w, p, lo in zip(self.weights, self.parts, offs):
            if w == 0:
                continue
            k = p.kraus_ops
            big = np.zeros((k.shape[0], self.dim_out, self.dim_in), dtype=np.complex128)
            big[:, lo:lo + p.dim_out, :] = np.sqrt(w) * k
            ops.extend(big)
        return KrausChannel(ops)

    def to_meas_prep(self) -> MeasPrepChannel:
        if not all(isinstance(p, MEASURE_PREPARE_FORMS) for p in self.parts):
            raise TypeError("direct sum has a part that is not measure-and-prepare")
        offs = self.offsets
        effects, preps = [], []
        for w, p, lo in zip(self.weights, self.parts, offs):
            if w == 0:
                continue
            mp = p.to_meas_prep()
            for m, s in zip(mp.effects, mp.preps):
                effects.append(w * m)
                big = np.zeros((self.dim_out, self.dim_out), dtype=np.complex128)
                big[lo:lo + mp.dim_out, lo:lo + mp.dim_out] = s
                preps.append(big)
        return MeasPrepChannel(effects, preps)


Channel = Union[KrausChannel, MeasPrepChannel, QCChannel, CQChannel, DirectSumChannel]


def apply(ch: Channel, rho) -> np.ndarray:
    return ch.apply(rho)


# ---------------------------------------------------------------------------
# diagnostics and conversions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CPTPReport:
    completeness_residual: float
    choi_min_eigenvalue: float
    tol: float = CPTP_TOL

    @property
    def passed(self) -> bool:
        return self.completeness_residual <= self.tol and self.choi_min_eigenvalue >= -self.tol

    def to_dict(self) -> dict:
        return {
            "completeness_residual": self.completeness_residual,
            "choi_min_eigenvalue": self.choi_min_eigenvalue,
            "passed": self.passed,
        }


def validate_cptp(ch: Channel, tol: float = CPTP_TOL) -> CPTPReport:
    """Trace-preservation residual and Choi positivity of a channel.

    The Choi matrix is built from the unnormalized maximally entangled
    vector, so a perfect identity channel has Choi spectrum {0, ..., d}.
    """
    residual = la.max_abs(ch.completeness() - np.eye(ch.dim_in))
    choi = ch.choi()
    lam_min = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2)[0])
    if isinstance(ch, MeasPrepChannel):
        # preps that are not states make the channel non-physical even when
        # the Choi matrix happens to be PSD
        traces = np.einsum("mii->m", ch.preps).real
        residual = max(residual, float(np.max(np.abs(traces - 1.0))))
    elif isinstance(ch, DirectSumChannel):
        residual = max([residual] + [validate_cptp(c, tol).completeness_residual for c in ch.parts])
    return CPTPReport(residual, lam_min, tol)


def kraus_from_meas_prepare(ch: MeasPrepChannel, cutoff: float = 1e-14) -> KrausChannel:
    """Kraus form of a measure-and-prepare channel.

    With M_i = sum mu |u><u| and sigma_i = sum lam |v><v| the operators
    sqrt(lam mu) |v><u| reproduce the channel.
    """
    ops = []
    for m, s in zip(ch.effects, ch.preps):
        mu, u = np.linalg.eigh((m + m.conj().T) / 2)
        lam, v = np.linalg.eigh((s + s.conj().T) / 2)
        for a in np.nonzero(mu > cutoff)[0]:
            for b in np.nonzero(lam > cutoff)[0]:
                ops.append(np.sqrt(lam[b] * mu[a]) * np.outer(v[:, b], u[:, a].conj()))
    if not ops:
        ops.append(np.zeros((ch.dim_out, ch.dim_in), dtype=np.complex128))
    return KrausChannel(ops)


def _stinespring_rows(dim_in: int, dim_out: int, r: int) -> np.ndarray:
    # |j> -> |j>|0> when the input fits in the output register
    if dim_in <= dim_out:
        return np.arange(dim_in) * r
    return np.arange(dim_in)


def stinespring_unitary(ch: KrausChannel) -> np.ndarray:
    """Unitary dilation U with U|psi>|0> = sum_i E_i|psi>|i>.

    U acts on C^{dim_out} (x) C^{r} where r is the Kraus count; the input is
    embedded as |j>|0> (or as the first ``dim_in`` basis vectors when
    ``dim_in > dim_out``). Columns outside the embedded input are an
    orthonormal completion.
    """
    k = ch.kraus
    r, dout, din = k.shape
    big = dout * r
    if big < din:
        raise ValueError(f"dilation space {big} is smaller than the input dimension {din}")
    iso = np.einsum("kaj->akj", k).reshape(big, din)
    u = np.zeros((big, big), dtype=np.complex128)
    cols = _stinespring_rows(din, dout, r)
    u[:, cols] = iso
    taken = set(cols.tolist())
    rest = [c for c in range(big) if c not in taken]
    if rest:
        u[:, rest] = la.complete_basis(iso)
    return u


def stinespring_apply(u: np.ndarray, rho, dim_in: int, dim_out: int, r: int) -> np.ndarray:
    """tr_anc(U (embedded rho) U^dag) for a dilation from ``stinespring_unitary``."""
    rho = np.asarray(rho, dtype=np.complex128)
    big = dim_out * r
    emb = np.zeros((big, big), dtype=np.complex128)
    rows = _stinespring_rows(dim_in, dim_out, r)
    emb[np.ix_(rows, rows)] = rho
    return la.partial_trace(u @ emb @ u.conj().T, (dim_out, r), "second")


def apply_on_subsystem(ch: Channel, rho, dims: tuple[int, int], which: str) -> np.ndarray:
    """(Phi (x) id) or (id (x) Phi) on a bipartite operator."""
    d1, d2 = dims
    t = np.asarray(rho, dtype=np.complex128).reshape(d1, d2, d1, d2)
    k = ch.kraus_ops
    if which == "first":
        out = np.einsum("kai,ijcl,kbc->ajbl", k, t, k.conj(), optimize=True)
        n1, n2 = ch.dim_out, d2
    elif which == "second":
        out = np.einsum("kaj,ijcl,kbl->iacb", k, t, k.conj(), optimize=True)
        n1, n2 = d1, ch.dim_out
    else:
        raise ValueError(f"which must be 'first' or 'second', got {which!r}")
    return out.reshape(n1 * n2, n1 * n2)


def tensor_square_apply(ch: Channel, rho12) -> np.ndarray:
    """(Phi (x) Phi)(rho12) for a state on two copies of the input space."""
    d = ch.dim_in
    rho12 = np.asarray(rho12, dtype=np.complex128)
    if rho12.shape != (d * d, d * d):
        raise ValueError(f"input of shape {rho12.shape} does not match dim_in^2={d * d}")
    if isinstance(ch, MEASURE_PREPARE_FORMS):
        mp = ch.to_meas_prep()
        t = rho12.reshape(d, d, d, d)
        probs = np.einsum("mji,nlk,ikjl->mn", mp.effects, mp.effects, t, optimize=True).real
        out = np.einsum("mn,mab,ncd->acbd", probs, mp.preps, mp.preps, optimize=True)
        e = mp.dim_out
        return out.reshape(e * e, e * e)
    mid = apply_on_subsystem(ch, rho12, (d, d), "first")
    return apply_on_subsystem(ch, mid, (ch.dim_out, d), "second")


# ---------------------------------------------------------------------------
# everyday channels (fixtures and building blocks)
# ---------------------------------------------------------------------------


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel([np.eye(d)])


def dephasing_channel(d: int) -> KrausChannel:
    """Complete dephasing in the computational basis."""
    return KrausChannel([la.projector(la.ket(i, d)) for i in range(d)])


def depolarizing_channel(d: int, p: float = 1.0) -> KrausChannel:
    """rho -> (1-p) rho + p I/d; ``p = 1`` is the completely depolarizing channel."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing probability must be in [0, 1]")
    ops = []
    if p < 1.0:
        ops.append(np.sqrt(1.0 - p) * np.eye(d))
    for x in build_pauli_generalized(d):
        ops.append(np.sqrt(p) / d * x)
    return KrausChannel(ops)


def amplitude_damping_channel(gamma: float) -> KrausChannel:
    g = float(gamma)
    return KrausChannel([
        np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - g)]]),
        np.array([[0.0, np.sqrt(g)], [0.0, 0.0]]),
    ])


def constant_channel(sigma, dim_in: int) -> MeasPrepChannel:
    return MeasPrepChannel([np.eye(dim_in)], [sigma])


def random_kraus_channel(dim_in: int, dim_out: int, r: int, rng: np.random.Generator) -> KrausChannel:
    """Random channel from a Haar-ish isometry C^{dim_in} -> C^{dim_out} (x) C^r."""
    if dim_out * r < dim_in:
        raise ValueError(f"an isometry needs dim_out * r >= dim_in (got {dim_out} * {r} < {dim_in})")
    g = rng.standard_normal((dim_out * r, dim_in)) + 1j * rng.standard_normal((dim_out * r, dim_in))
    q, _ = np.linalg.qr(g)
    return KrausChannel(q.reshape(dim_out, r, dim_in).transpose(1, 0, 2))


# ---------------------------------------------------------------------------
# named constructions
# ---------------------------------------------------------------------------


def build_pauli_generalized(n: int) -> list[np.ndarray]:
    """Weyl-Heisenberg operators X_{m n + d} = T^m R^d.

    T|j> = |j+1 mod n>, R|j> = exp(2 pi i j / n)|j>.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    t = np.roll(np.eye(n, dtype=np.complex128), 1, axis=0)
    r = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    tp = [np.linalg.matrix_power(t, m) for m in range(n)]
    rp = [np.linalg.matrix_power(r, d) for d in range(n)]
    return [tp[m] @ rp[d] for m in range(n) for d in range(n)]


def build_swap_channel(d: int) -> KrausChannel:
    """Channel induced by the SWAP test on C^d (x) C^d.

    Output is tr(P_sym rho)|0><0| + tr(P_anti rho)|1><1|, which on product
    inputs gives weights (1 +/- |<psi1|psi2>|^2) / 2.
    """
    s = la.swap_operator(d)
    lam, vec = np.linalg.eigh(s)
    ops = []
    for idx in range(d * d):
        flag = 0 if lam[idx] > 0 else 1
        ops.append(np.outer(la.ket(flag, 2), vec[:, idx].conj()))
    return KrausChannel(ops)


def build_trace_channel(d: int) -> KrausChannel:
    """rho12 -> tr_2(rho12) on C^d (x) C^d."""
    ops = []
    for k in range(d):
        e = np.zeros((d, d * d), dtype=np.complex128)
        e[np.arange(d), np.arange(d) * d + k] = 1.0
        ops.append(e)
    return KrausChannel(ops)


def _pauli_trace_effects(epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    paulis = [PAULI_X, PAULI_Y, PAULI_Z]
    effects, preps = [], []
    for i, si in enumerate(paulis):
        for j, sj in enumerate(paulis):
            for s in (1, -1):
                for t in (1, -1):
                    k = (s / 3) * np.kron(si, PAULI_I) + (t / 3) * np.kron(PAULI_I, sj) + s * t * np.kron(si, sj)
                    effects.append(np.eye(4) / 36 + (epsilon / 4) * k)
                    preps.append((PAULI_I + s * si) / 2)
    return np.array(effects), np.array(preps)


def pauli_trace_expansion(epsilon: float) -> tuple[MeasPrepChannel, float]:
    """Measure-and-prepare realization of the depolarized two-qubit partial trace.

    Expands rho_eps = (1-eps) I/4 + eps rho over products of Pauli
    eigenprojectors P_i^{+-} (x) P_j^{+-}; the 36 expansion coefficients are
    tr(M rho) for the returned effects, and tracing out the second factor
    prepares P_i^{+-}. Returns the channel and the smallest effect
    eigenvalue: the coefficients are non-negative on every input iff that
    value is >= 0.
    """
    effects, preps = _pauli_trace_effects(epsilon)
    floor = float(min(np.linalg.eigvalsh(m)[0] for m in effects))
    return MeasPrepChannel(effects, preps), floor


def pauli_expansion_max_epsilon() -> float:
    """Largest eps for which all 36 expansion coefficients stay non-negative.

    Effects are I/36 + eps K; the bound is (1/36) / max(-lambda_min(K)).
    """
    e0, _ = _pauli_trace_effects(0.0)
    e1, _ = _pauli_trace_effects(1.0)
    worst = max(-np.linalg.eigvalsh(b - a)[0] for a, b in zip(e0, e1))
    return float((1.0 / 36.0) / worst)


def build_trace_channel_eb(d: int, epsilon: float, form: str = "auto") -> Channel:
    """rho12 -> tr_2((1-eps) I/d^2 + eps rho12) = (1-eps) I/d + eps tr_2(rho12).

    ``form="kraus"`` always returns the Kraus form. For ``d == 2``,
    ``form="meas_prep"`` returns the Pauli-expansion realization and raises
    if some expansion coefficient can go negative; ``"auto"`` returns that
    realization when it is valid and the Kraus form otherwise.
    """
    if not 0.0 < epsilon < 1.0 / d**2:
        raise ValueError(f"epsilon must lie in (0, 1/d^2) = (0, {1.0 / d**2}), got {epsilon}")
    if form not in ("auto", "kraus", "meas_prep"):
        raise ValueError(f"unknown form {form!r}")
    if form != "kraus" and d == 2:
        ch, floor = pauli_trace_expansion(epsilon)
        if floor >= -la.TOL_ALGEBRA:
            return ch
        if form == "meas_prep":
            raise ValueError(f"Pauli expansion has negative coefficients at epsilon={epsilon} (floor {floor})")
    elif form == "meas_prep":
        raise ValueError("the measure-and-prepare realization is only available for d = 2")
    ops = [np.sqrt(epsilon) * e for e in build_trace_channel(d).kraus]
    w = np.sqrt((1.0 - epsilon) / d)
    for a in range(d):
        for x in range(d * d):
            e = np.zeros((d, d * d), dtype=np.complex128)
            e[a, x] = w
            ops.append(e)
    return KrausChannel(ops)


def _flag_pair(v, v_prime, dim: int, what: str) -> tuple[np.ndarray, np.ndarray]:
    v = la.ket(0, dim) if v is None else la.as_pure_state(v, tol=la.TOL_ALGEBRA)
    v_prime = la.ket(1, dim) if v_prime is None else la.as_pure_state(v_prime, tol=la.TOL_ALGEBRA)
    if v.shape != v_prime.shape:
        raise ValueError(f"{what} states must have equal dimension")
    if abs(np.vdot(v, v_prime)) > la.TOL_ALGEBRA:
        raise ValueError(f"{what} states must be orthogonal")
    return v, v_prime


def build_cube_channel(d: int, v=None, v_prime=None) -> MeasPrepChannel:
    """Channel that is pure exactly on |psi>|psi> with |psi> in the +-1 cube.

    Effects Pi_ij (x) Pi'_ij / (d(d-1)) for i < j prepare |v><v|; the
    remainder M = I - sum of those prepares |v'><v'|. Default flags are the
    first two basis vectors of C^{d^2}.
    """
    if d < 2:
        raise ValueError("cube channel needs d >= 2")
    v, v_prime = _flag_pair(v, v_prime, d * d, "cube flag")
    effects = []
    for i, j in combinations(range(d), 2):
        plus = (la.ket(i, d) + la.ket(j, d)) / np.sqrt(2)
        minus = (la.ket(i, d) - la.ket(j, d)) / np.sqrt(2)
        effects.append(np.kron(la.projector(plus), la.projector(minus)) / (d * (d - 1)))
    rest = np.eye(d * d) - sum(effects)
    if np.linalg.eigvalsh(rest)[0] <= 0:
        raise InvariantError("cube remainder effect is not strictly positive")
    preps = [la.projector(v)] * len(effects) + [la.projector(v_prime)]
    return MeasPrepChannel(effects + [rest], preps)


def build_H_channel(hmat, scale: float = 0.5, w=None, w_prime=None) -> MeasPrepChannel:
    """Two-outcome channel rho -> tr(sH rho)|w><w| + tr((I - sH) rho)|w'><w'|."""
    h = la.as_matrix(hmat)
    d = h.shape[0]
    if h.shape != (d, d) or la.max_abs(h - h.conj().T) > la.TOL_ALGEBRA:
        raise ValueError("hmat must be a Hermitian square matrix")
    lam = np.linalg.eigvalsh(scale * h)
    if lam[0] < -la.TOL_ALGEBRA or lam[-1] > 1.0 + la.TOL_ALGEBRA:
        raise ValueError(f"scale*hmat must satisfy 0 <= scale*hmat <= I (spectrum [{lam[0]}, {lam[-1]}])")
    w, w_prime = _flag_pair(w, w_prime, d, "H-channel flag")
    return MeasPrepChannel([scale * h, np.eye(d) - scale * h], [la.projector(w), la.projector(w_prime)])


def orthomix(parts: Sequence[tuple[float, Channel]]) -> Channel:
    """Weighted mixture whose parts land in mutually orthogonal blocks.

    rho -> (+)_i p_i Phi_i(rho); the output space is the direct sum of the
    part output spaces, block i standing for Phi_i(rho) (x) |i><i|. Parts
    with weight zero are dropped. The result is a ``MeasPrepChannel`` when
    every part is measure-and-prepare and a ``DirectSumChannel`` otherwise.
    """
    if not parts:
        raise ValueError("orthomix needs at least one part")
    kept = [(float(p), c) for p, c in parts if float(p) != 0.0]
    if any(p < 0 for p, _ in parts) or not kept:
        raise ValueError("orthomix weights must be a probability vector")
    ds = DirectSumChannel([p for p, _ in kept], [c for _, c in kept])
    if all(isinstance(c, MEASURE_PREPARE_FORMS) for _, c in kept):
        return ds.to_meas_prep()
    return ds
