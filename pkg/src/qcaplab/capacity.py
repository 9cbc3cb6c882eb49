"""Minimum output entropy and Holevo capacity estimation.

Local optimizers work over pure input states written as unit vectors in
C^d (2d real coordinates); the global phase is left free since every
objective here is phase invariant. Gradients are the Euclidean gradients
of f(x / |x|), i.e. already projected onto the tangent space of the
sphere, returned in complex form g with df = Re<delta|g>.

Every optimizer is seeded and deterministic, and all values are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import linalg_core as la
from .channels import (
    Channel,
    CQChannel,
    DirectSumChannel,
    KrausChannel,
    MeasPrepChannel,
    MEASURE_PREPARE_FORMS,
    build_pauli_generalized,
)
from .errors import InvariantError, SizeCapError
from .zero_error import ClassicalChannel

DEFAULT_RESTARTS = 64
DEFAULT_SAMPLES = 20000
MIN_ENTROPY_ORACLE_CAP = 25
LN2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class Ensemble:
    probs: np.ndarray
    states: np.ndarray  # pure states, one per row

    def __init__(self, probs, states):
        p = np.asarray(probs, dtype=float).reshape(-1)
        s = np.asarray(states, dtype=np.complex128)
        if s.ndim != 2 or s.shape[0] != p.size:
            raise InvariantError("ensemble needs one pure state per probability")
        if np.any(p < -la.TOL_ALGEBRA) or abs(p.sum() - 1.0) > la.TOL_ALGEBRA:
            raise InvariantError("ensemble probabilities must form a distribution")
        if p.size > s.shape[1] ** 2:
            raise InvariantError(f"ensemble size {p.size} exceeds dim^2 = {s.shape[1] ** 2}")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))
        object.__setattr__(self, "states", s)

    def to_dict(self) -> dict:
        return {"probs": self.probs.tolist(), "states": self.states}


@dataclass
class OptResult:
    value: float
    payload: Any
    iterations: int
    seed: int | None
    converged: bool
    history: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "payload": self.payload.to_dict() if hasattr(self.payload, "to_dict") else self.payload,
            "iterations": self.iterations,
            "seed": self.seed,
            "converged": self.converged,
            **({"info": self.info} if self.info else {}),
        }


def _normalize(psi: np.ndarray) -> np.ndarray:
    return psi / np.linalg.norm(psi, axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# objectives and gradients
# ---------------------------------------------------------------------------


def _compress(ch: Channel) -> Channel:
    """Equivalent channel for entropy work with preparations restricted to their support.

    Output spectra (hence entropies) are unchanged and the adjoint agrees on
    the support, where every log-gradient lives.
    """
    if isinstance(ch, DirectSumChannel):
        return DirectSumChannel(ch.weights, [_compress(p) for p in ch.parts])
    if isinstance(ch, MeasPrepChannel):
        lam, vec = np.linalg.eigh(ch.preps.sum(axis=0))
        u = vec[:, lam > la.LOG_FLOOR]
        if 0 < u.shape[1] < ch.dim_out:
            return MeasPrepChannel(ch.effects, la.dagger(u) @ ch.preps @ u)
    return ch


def _output_blocks(ch: Channel, psi: np.ndarray) -> list[np.ndarray]:
    # block-diagonal outputs are diagonalized block by block
    if isinstance(ch, DirectSumChannel):
        return ch.blocks_pure(psi)
    return [ch.apply_pure(psi)]


def _adjoint_blocks(ch: Channel, xs: list[np.ndarray]) -> np.ndarray:
    if isinstance(ch, DirectSumChannel):
        return ch.adjoint_blocks(xs)
    return ch.adjoint(xs[0])


def _pure_entropies(ch: Channel, psi: np.ndarray) -> np.ndarray:
    return sum(la.entropies(b) for b in _output_blocks(ch, psi))


def output_entropy(ch: Channel, psi) -> np.ndarray | float:
    """H(Phi(|psi><psi|)) for one state or a stack of states."""
    psi = np.asarray(psi, dtype=np.complex128)
    h = _pure_entropies(ch, _normalize(psi))
    return float(h) if np.ndim(h) == 0 else h


def entropy_gradient(ch: Channel, psi) -> tuple[np.ndarray, np.ndarray]:
    """Values and sphere gradients of H(Phi(psi psi^dag)) for a stack of unit vectors.

    With G = -Phi^*(log2 Phi(psi psi^dag)) the gradient is
    2 (G psi - <psi|G|psi> psi).
    """
    psi = np.atleast_2d(np.asarray(psi, dtype=np.complex128))
    blocks = _output_blocks(ch, psi)
    vals = sum(la.entropies(b) for b in blocks)
    g = -_adjoint_blocks(ch, [la.log2_clipped(b) for b in blocks])
    gpsi = np.einsum("nij,nj->ni", g, psi)
    expect = np.einsum("ni,ni->n", psi.conj(), gpsi).real
    grad = 2.0 * (gpsi - expect[:, None] * psi)
    return vals, grad


def finite_difference_gradient(f, psi: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central differences of f(x / |x|) in the 2d real coordinates of psi."""
    psi = np.asarray(psi, dtype=np.complex128)
    d = psi.size
    grad = np.zeros(d, dtype=np.complex128)
    for k in range(d):
        for unit in (1.0, 1j):
            e = np.zeros(d, dtype=np.complex128)
            e[k] = unit * step
            diff = (f(_normalize(psi + e)) - f(_normalize(psi - e))) / (2 * step)
            grad[k] += diff * unit
    return grad


def holevo_quantity(ch: Channel, probs, states) -> float:
    """H(sum p_i Phi(psi_i)) - sum p_i H(Phi(psi_i)) for a pure-state ensemble."""
    p = np.asarray(probs, dtype=float)
    outs = ch.apply_pure(_normalize(np.asarray(states, dtype=np.complex128)))
    avg = np.einsum("m,mij->ij", p, outs)
    return float(la.entropies(avg) - p @ la.entropies(outs))


def holevo_quantity_mixed(ch: Channel, probs, rhos) -> float:
    """Holevo quantity for an ensemble of density matrices."""
    p = np.asarray(probs, dtype=float)
    outs = ch.apply(np.asarray(rhos, dtype=np.complex128))
    avg = np.einsum("m,mij->ij", p, outs)
    return float(la.entropies(avg) - p @ la.entropies(outs))


def _holevo_parts(ch: Channel, probs: np.ndarray, states: np.ndarray):
    outs = ch.apply_pure(states)
    avg = np.einsum("...m,...mij->...ij", probs, outs)
    h_out = la.entropies(outs)
    chi = la.entropies(avg) - np.einsum("...m,...m->...", probs, h_out)
    return chi, outs, avg, h_out


def holevo_gradient(ch: Channel, probs, states) -> tuple[float, np.ndarray, np.ndarray]:
    """chi and its gradients with respect to the states and the probabilities.

    d chi / d psi_j = 2 p_j (A_j psi_j - <psi_j|A_j|psi_j> psi_j) with
    A_j = Phi^*(log2 Phi(psi_j psi_j^dag) - log2 rho_avg);
    d chi / d p_j = D(Phi(psi_j) || rho_avg) - 1/ln 2.
    """
    p = np.asarray(probs, dtype=float)
    s = np.asarray(states, dtype=np.complex128)
    chi, outs, avg, h_out = _holevo_parts(ch, p, s)
    log_avg = la.log2_clipped(avg)
    log_out = la.log2_clipped(outs)
    a = ch.adjoint(log_out - log_avg[None])
    apsi = np.einsum("mij,mj->mi", a, s)
    expect = np.einsum("mi,mi->m", s.conj(), apsi).real
    g_states = 2.0 * p[:, None] * (apsi - expect[:, None] * s)
    rel = -h_out - np.einsum("mij,ji->m", outs, log_avg).real
    g_probs = rel - 1.0 / LN2
    return float(chi), g_states, g_probs


# ---------------------------------------------------------------------------
# minimum output entropy
# ---------------------------------------------------------------------------


def _descend(ch: Channel, psi: np.ndarray, max_iters: int, tol: float):
    """Batched projected gradient descent with Armijo backtracking."""
    psi = _normalize(psi.copy())
    n = psi.shape[0]
    vals, grad = entropy_gradient(ch, psi)
    bad = ~np.all(np.isfinite(grad), axis=1)
    for i in np.nonzero(bad)[0]:
        grad[i] = finite_difference_gradient(lambda x: output_entropy(ch, x), psi[i])
    step = np.full(n, 0.1)
    active = np.ones(n, dtype=bool)
    iters = 0
    for iters in range(1, max_iters + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        gnorm2 = np.sum(np.abs(grad[idx]) ** 2, axis=1)
        t = step[idx]
        accepted = np.zeros(idx.size, dtype=bool)
        new_psi = psi[idx].copy()
        new_vals = vals[idx].copy()
        for _ in range(40):
            todo = ~accepted
            if not todo.any():
                break
            cand = _normalize(psi[idx[todo]] - t[todo, None] * grad[idx[todo]])
            cv = _pure_entropies(ch, cand)
            ok = cv <= vals[idx[todo]] - 1e-4 * t[todo] * gnorm2[todo]
            sel = np.nonzero(todo)[0][ok]
            new_psi[sel] = cand[ok]
            new_vals[sel] = cv[ok]
            accepted[sel] = True
            t[todo & ~accepted] *= 0.5
        decrease = vals[idx] - new_vals
        psi[idx[accepted]] = new_psi[accepted]
        step[idx] = np.where(accepted, np.minimum(t * 2.0, 10.0), t)
        done = (~accepted) | (decrease <= tol) | (gnorm2 <= tol**2)
        active[idx[done]] = False
        upd = idx[accepted]
        if upd.size:
            v, g = entropy_gradient(ch, psi[upd])
            vals[upd], grad[upd] = v, g
    return psi, vals, iters, ~active


def min_entropy_ascent(ch: Channel, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                       tol: float = 1e-12, max_iters: int = 300) -> OptResult:
    """Multistart local minimization of the output entropy over pure inputs.

    c-q channels take the exact path min_i H(sigma_i). Otherwise seeded
    random starts are descended with projected gradient steps; the best
    local value is returned, an upper bound on the true minimum.
    """
    if isinstance(ch, CQChannel):
        h = la.entropies(ch.preps)
        i = int(np.argmin(h))
        return OptResult(float(h[i]), la.ket(i, ch.dim_in), 0, seed, True, info={"method": "cq-exact"})
    if ch.dim_in > 64:
        raise SizeCapError(f"min_entropy_ascent is limited to dim_in <= 64 (got {ch.dim_in})")
    ch = _compress(ch)
    rng = np.random.default_rng(seed)
    starts = la.random_pure_state(ch.dim_in, rng, size=restarts)
    psi, vals, iters, conv = _descend(ch, starts, max_iters, tol)
    best = int(np.argmin(vals))
    return OptResult(float(max(vals[best], 0.0)), psi[best], iters, seed, bool(conv[best]),
                     info={"method": "projected-gradient", "restarts": restarts})


def _mm_polish(ch: Channel, psi: np.ndarray, max_iters: int, tol: float):
    """Majorize-minimize steps psi <- lowest eigenvector of -Phi^*(log2 Phi(psi psi^dag)).

    Concavity of the entropy makes each step non-increasing; steps that
    would increase the value through round-off are rejected.
    """
    psi = _normalize(psi.copy())
    vals = _pure_entropies(ch, psi)
    active = np.ones(psi.shape[0], dtype=bool)
    it = 0
    for it in range(1, max_iters + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        logs = []
        for b in _output_blocks(ch, psi[idx]):
            lam, vec = np.linalg.eigh(b)
            logs.append((vec * np.log2(np.maximum(lam, 1e-300))[:, None, :]) @ la.dagger(vec))
        g = -_adjoint_blocks(ch, logs)
        _, gv = np.linalg.eigh((g + la.dagger(g)) / 2)
        cand = gv[:, :, 0]
        cv = _pure_entropies(ch, cand)
        better = cv <= vals[idx]
        gain = np.where(better, vals[idx] - cv, 0.0)
        psi[idx[better]] = cand[better]
        vals[idx[better]] = cv[better]
        active[idx[(~better) | (gain <= tol)]] = False
    return psi, vals, it


def min_entropy_oracle(ch: Channel, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                       polish_fraction: float = 0.01, polish_iters: int = 300,
                       chunk: int = 2000) -> OptResult:
    """Brute-force companion: dense sampling of pure inputs plus local polish.

    Draws ``samples`` uniform pure states, keeps the best ``polish_fraction``
    and polishes them with majorize-minimize steps. The result is an upper
    bound on the minimum output entropy.
    """
    if ch.dim_in > MIN_ENTROPY_ORACLE_CAP:
        raise SizeCapError(f"min_entropy_oracle is limited to dim_in <= {MIN_ENTROPY_ORACLE_CAP}")
    ch = _compress(ch)
    rng = np.random.default_rng(seed)
    keep = max(1, int(round(samples * polish_fraction)))
    pool_psi = np.zeros((0, ch.dim_in), dtype=np.complex128)
    pool_val = np.zeros(0)
    drawn = 0
    while drawn < samples:
        m = min(chunk, samples - drawn)
        psi = la.random_pure_state(ch.dim_in, rng, size=m)
        vals = _pure_entropies(ch, psi)
        pool_psi = np.concatenate([pool_psi, psi])
        pool_val = np.concatenate([pool_val, vals])
        order = np.argsort(pool_val, kind="stable")[:keep]
        pool_psi, pool_val = pool_psi[order], pool_val[order]
        drawn += m
    sampled_best = float(pool_val[0])
    psi, vals, iters = _mm_polish(ch, pool_psi, polish_iters, tol=1e-13)
    best = int(np.argmin(vals))
    return OptResult(float(max(vals[best], 0.0)), psi[best], iters, seed, True,
                     info={"method": "sampling+mm", "samples": samples, "polished": keep,
                           "best_sampled": sampled_best})


def min_output_entropy(ch: Channel, seed: int = 0, restarts: int = DEFAULT_RESTARTS,
                       samples: int = DEFAULT_SAMPLES) -> OptResult:
    """Smaller of the ascent and (when the size allows) the oracle estimate."""
    res = min_entropy_ascent(ch, restarts=restarts, seed=seed)
    if ch.dim_in <= MIN_ENTROPY_ORACLE_CAP and not isinstance(ch, CQChannel):
        alt = min_entropy_oracle(ch, samples=samples, seed=seed)
        if alt.value < res.value:
            res = alt
    return res


# ---------------------------------------------------------------------------
# Holevo capacity
# ---------------------------------------------------------------------------


def _blahut_step(ch: Channel, probs: np.ndarray, states: np.ndarray) -> np.ndarray:
    _, outs, avg, h_out = _holevo_parts(ch, probs, states)
    rel = -h_out - np.einsum("mij,ji->m", outs, la.log2_clipped(avg)).real
    w = probs * np.exp2(rel - rel.max())
    return w / w.sum()


def _holevo_local(ch: Channel, probs: np.ndarray, states: np.ndarray, max_iters: int, tol: float):
    """Alternate Blahut-Arimoto re-weighting with projected gradient ascent on states."""
    chi = float(_holevo_parts(ch, probs, states)[0])
    history = [chi]
    step = 0.1
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        start = chi
        new_p = _blahut_step(ch, probs, states)
        new_chi = float(_holevo_parts(ch, new_p, states)[0])
        if new_chi >= chi:
            probs, chi = new_p, new_chi
        history.append(chi)
        _, g, _ = holevo_gradient(ch, probs, states)
        gnorm2 = float(np.sum(np.abs(g) ** 2))
        if gnorm2 > 0:
            t = step
            for _ in range(40):
                cand = _normalize(states + t * g)
                cv = float(_holevo_parts(ch, probs, cand)[0])
                if cv >= chi + 1e-4 * t * gnorm2:
                    states, chi = cand, cv
                    step = min(2 * t, 10.0)
                    break
                t *= 0.5
            else:
                step = t
        history.append(chi)
        if history[-1] < history[-2] or history[-2] < history[-3]:
            raise InvariantError("Holevo objective decreased")
        if chi - start <= tol:
            converged = True
            break
    return probs, states, chi, it, converged, history


def holevo_ascent(ch: Channel, ensemble_size: int | None = None, restarts: int = DEFAULT_RESTARTS,
                  seed: int = 0, tol: float = 1e-12, max_iters: int = 500) -> OptResult:
    """Local maximization of the Holevo quantity over pure-state ensembles.

    Each restart alternates the closed-form Blahut-Arimoto re-weighting
    p_i <- p_i 2^{D(Phi(psi_i)||rho_avg)} / Z with gradient steps on the
    states; both halves never decrease the objective. Returns the best
    local value, a lower bound on chi.
    """
    d = ch.dim_in
    if d > 16:
        raise SizeCapError(f"holevo_ascent is limited to dim_in <= 16 (got {d})")
    m = d * d if ensemble_size is None else int(ensemble_size)
    if not 1 <= m <= d * d:
        raise ValueError(f"ensemble size must lie in [1, {d * d}]")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        states = la.random_pure_state(d, rng, size=m)
        probs = np.full(m, 1.0 / m)
        out = _holevo_local(ch, probs, states, max_iters, tol)
        if best is None or out[2] > best[2]:
            best = out
    probs, states, chi, it, conv, history = best
    return OptResult(float(max(chi, 0.0)), Ensemble(probs, states), it, seed, conv, history,
                     info={"method": "blahut-arimoto+gradient", "restarts": restarts})


def holevo_oracle(ch: Channel, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                  polish: int = 8, chunk: int = 500) -> OptResult:
    """Random ensembles (Dirichlet weights, Gaussian pure states) with polish.

    The value is achieved by an explicit ensemble, so it is a certified
    lower bound on chi.
    """
    d = ch.dim_in
    if d > 4:
        raise SizeCapError(f"holevo_oracle is limited to dim_in <= 4 (got {d})")
    m = d * d
    rng = np.random.default_rng(seed)
    pool_p = np.zeros((0, m))
    pool_s = np.zeros((0, m, d), dtype=np.complex128)
    pool_v = np.zeros(0)
    drawn = 0
    while drawn < samples:
        k = min(chunk, samples - drawn)
        p = rng.dirichlet(np.ones(m), size=k)
        s = la.random_pure_state(d, rng, size=k * m).reshape(k, m, d)
        v = _holevo_parts(ch, p, s)[0]
        pool_p = np.concatenate([pool_p, p])
        pool_s = np.concatenate([pool_s, s])
        pool_v = np.concatenate([pool_v, v])
        order = np.argsort(-pool_v, kind="stable")[:polish]
        pool_p, pool_s, pool_v = pool_p[order], pool_s[order], pool_v[order]
        drawn += k
    best = None
    for p, s in zip(pool_p, pool_s):
        out = _holevo_local(ch, p, s, 300, 1e-13)
        if best is None or out[2] > best[2]:
            best = out
    probs, states, chi, it, conv, history = best
    return OptResult(float(max(chi, 0.0)), Ensemble(probs, states), it, seed, conv, history,
                     info={"method": "sampling+polish", "samples": samples, "best_sampled": float(pool_v[0])})


# ---------------------------------------------------------------------------
# covariant lift
# ---------------------------------------------------------------------------


def covariant_lift(ch: Channel) -> Channel:
    """Psi(rho (x) |i><i|) = X_i Phi(rho) X_i^dag with X_i the generalized Paulis.

    The n^2-dimensional index register is measured in the computational
    basis first, which extends the rule from product inputs to every input.
    The lift of a measure-and-prepare channel stays measure-and-prepare.
    """
    n = ch.dim_out
    if n > 8:
        raise SizeCapError(f"covariant lift is limited to output dimension <= 8 (got {n})")
    paulis = build_pauli_generalized(n)
    labels = n * n
    if isinstance(ch, MEASURE_PREPARE_FORMS):
        mp = ch.to_meas_prep()
        effects, preps = [], []
        for i, x in enumerate(paulis):
            flag = la.projector(la.ket(i, labels))
            for m, s in zip(mp.effects, mp.preps):
                effects.append(np.kron(m, flag))
                preps.append(x @ s @ x.conj().T)
        return MeasPrepChannel(effects, preps)
    ops = []
    for i, x in enumerate(paulis):
        bra = la.ket(i, labels)[None, :]
        for e in ch.kraus_ops:
            ops.append(np.kron(x @ e, bra))
    return KrausChannel(ops)


def lift_capacity_identity_check(ch: Channel, seed: int = 0, restarts: int = DEFAULT_RESTARTS,
                                 samples: int = DEFAULT_SAMPLES, min_entropy: OptResult | None = None) -> dict:
    """Evaluate both sides of chi(Psi) = log2 n - min H(Phi).

    The min-entropy achiever |phi> (best of the ascent and the oracle) is
    lifted to the ensemble {1/n^2, |phi><phi| (x) |i><i|} over all n^2 Pauli
    labels and its Holevo quantity under Psi is computed directly.
    """
    n = ch.dim_out
    lift = covariant_lift(ch)
    res = min_entropy if min_entropy is not None else min_output_entropy(ch, seed, restarts, samples)
    phi = _normalize(np.asarray(res.payload, dtype=np.complex128))
    min_h = output_entropy(ch, phi)
    labels = n * n
    rhos = np.array([np.kron(la.projector(phi), la.projector(la.ket(i, labels))) for i in range(labels)])
    chi = holevo_quantity_mixed(lift, np.full(labels, 1.0 / labels), rhos)
    # weights 1/n on the first n labels only, for comparison
    printed = holevo_quantity_mixed(lift, np.full(n, 1.0 / n), rhos[:n])
    target = float(np.log2(n) - min_h)
    return {
        "n": n,
        "min_entropy": float(min_h),
        "chi_estimate": float(chi),
        "logn_minus_minH": target,
        "residual": float(abs(chi - target)),
        "chi_first_n_labels_uniform": float(printed),
        "min_entropy_method": res.info.get("method"),
    }


# ---------------------------------------------------------------------------
# classical capacity
# ---------------------------------------------------------------------------


def mutual_information(ch: ClassicalChannel, r) -> float:
    r = np.asarray(r, dtype=float)
    p = ch.p
    q = r @ p
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0) / np.where(q > 0, q, 1.0)), 0.0)
    return float(r @ terms.sum(axis=1))


def arimoto_blahut(ch: ClassicalChannel, tol: float = 1e-10, max_iters: int = 100000) -> OptResult:
    """Capacity of a discrete memoryless channel in bits.

    Iterates r(x) <- r(x) 2^{D(p(.|x)||q)} / Z and stops once the gap between
    max_x D(p(.|x)||q) (an upper bound) and I(r) drops below ``tol``.
    """
    p = ch.p
    r = np.full(ch.inputs, 1.0 / ch.inputs)
    history = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        q = r @ p
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(p > 0, p / np.where(q > 0, q, 1.0)[None, :], 1.0)
            div = np.sum(np.where(p > 0, p * np.log2(ratio), 0.0), axis=1)
        lower = float(r @ div)
        upper = float(div.max())
        history.append(lower)
        if upper - lower <= tol:
            converged = True
            break
        r = r * np.exp2(div - upper)
        r /= r.sum()
    return OptResult(max(lower, 0.0), r, it, None, converged, history,
                     info={"upper_bound": upper})
