"""Confusability graphs, independence numbers and the quantum analogue.

Graphs are stored with bitset adjacency (Python ints) so the exact
independent-set search stays fast up to the 64-vertex cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import linalg_core as la
from .channels import Channel, QCChannel, tensor_square_apply
from .errors import InvariantError, SizeCapError

EXACT_ALPHA_CAP = 64


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        clean = set()
        for e in edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise InvariantError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvariantError(f"edge ({u}, {v}) out of range for n={n}")
            clean.add((min(u, v), max(u, v)))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(clean))

    @property
    def adjacency(self) -> list[int]:
        adj = [0] * self.n
        for u, v in self.edges:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return adj

    def is_independent(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return all((min(a, b), max(a, b)) not in self.edges for a, b in combinations(vs, 2))

    def sorted_edges(self) -> list[list[int]]:
        return [list(e) for e in sorted(self.edges)]


def empty_graph(n: int) -> Graph:
    return Graph(n)


def complete_graph(n: int) -> Graph:
    return Graph(n, combinations(range(n), 2))


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    return Graph(n, [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p])


@dataclass(frozen=True, eq=False)
class ClassicalChannel:
    """Row-stochastic matrix p[x, y] = p(y|x)."""

    p: np.ndarray

    def __init__(self, p):
        m = np.array(p, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise InvariantError("classical channel must be a non-empty 2-D matrix")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise InvariantError("transition probabilities must be finite and non-negative")
        if np.max(np.abs(m.sum(axis=1) - 1.0)) > la.TOL_ALGEBRA:
            raise InvariantError("rows of a classical channel must sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "p", m)

    @property
    def inputs(self) -> int:
        return self.p.shape[0]

    @property
    def outputs(self) -> int:
        return self.p.shape[1]

    def as_qc_channel(self):
        """Embed as a q-c channel with diagonal effects M_y = diag(p(y|.))."""
        return QCChannel([np.diag(self.p[:, y]).astype(np.complex128) for y in range(self.outputs)])


def binary_symmetric_channel(p: float) -> ClassicalChannel:
    return ClassicalChannel([[1 - p, p], [p, 1 - p]])


def confusability_graph(ch: ClassicalChannel, threshold: float = 0.0) -> Graph:
    """Inputs x, x' are adjacent iff some output y has p(y|x) p(y|x') > threshold."""
    p = ch.p
    edges = [
        (x, xp)
        for x, xp in combinations(range(ch.inputs), 2)
        if np.any(p[x] * p[xp] > threshold)
    ]
    return Graph(ch.inputs, edges)


def graph_tensor_product(g: Graph, h: Graph) -> Graph:
    """Strong product: (v1,u1) ~ (v2,u2) iff each coordinate is equal-or-adjacent."""
    ga, ha = g.adjacency, h.adjacency

    def close(adj, a, b):
        return a == b or (adj[a] >> b) & 1

    verts = [(v, u) for v in range(g.n) for u in range(h.n)]
    edges = [
        (i, j)
        for i, j in combinations(range(len(verts)), 2)
        if close(ga, verts[i][0], verts[j][0]) and close(ha, verts[i][1], verts[j][1])
    ]
    return Graph(len(verts), edges)


def _clique_cover_bound(cand: int, adj: list[int]) -> int:
    """Greedy partition of ``cand`` into cliques; an upper bound on alpha."""
    classes = 0
    rest = cand
    while rest:
        classes += 1
        members = 0
        pool = rest
        while pool:
            low = pool & -pool
            v = low.bit_length() - 1
            members |= low
            pool &= adj[v]
            pool &= ~low
        rest &= ~members
    return classes


def independence_number(g: Graph, cap: int = EXACT_ALPHA_CAP) -> tuple[int, list[int]]:
    """Exact maximum independent set by branch and bound.

    Branches include-first on the lowest-index candidate and prunes with a
    greedy clique-cover bound, so the returned witness is the
    lexicographically smallest maximum independent set.
    """
    if g.n > cap:
        raise SizeCapError(
            f"exact independence number is capped at {cap} vertices (got {g.n}); "
            "use greedy_independent_set for a non-certifying estimate"
        )
    adj = g.adjacency
    best = [0, 0]  # size, bitset

    def search(chosen: int, size: int, cand: int) -> None:
        if not cand:
            if size > best[0]:
                best[0], best[1] = size, chosen
            return
        if size + _clique_cover_bound(cand, adj) <= best[0]:
            return
        low = cand & -cand
        v = low.bit_length() - 1
        search(chosen | low, size + 1, cand & ~low & ~adj[v])
        search(chosen, size, cand & ~low)

    search(0, 0, (1 << g.n) - 1)
    witness = [v for v in range(g.n) if (best[1] >> v) & 1]
    return best[0], witness


def independence_number_brute_force(g: Graph) -> int:
    """Exhaustive check over all subsets; for cross-validation only."""
    adj = g.adjacency
    best = 0
    for mask in range(1 << g.n):
        size = bin(mask).count("1")
        if size <= best:
            continue
        ok = all(not (adj[v] & mask) for v in range(g.n) if (mask >> v) & 1)
        if ok:
            best = size
    return best


def greedy_independent_set(g: Graph) -> list[int]:
    """Min-degree greedy independent set (non-certifying lower bound)."""
    adj = g.adjacency
    alive = (1 << g.n) - 1
    chosen = []
    while alive:
        verts = [v for v in range(g.n) if (alive >> v) & 1]
        v = min(verts, key=lambda x: (bin(adj[x] & alive).count("1"), x))
        chosen.append(v)
        alive &= ~(1 << v) & ~adj[v]
    return sorted(chosen)


def shannon_capacity_lower_bound(g: Graph, max_power: int, cap: int = EXACT_ALPHA_CAP) -> list[float]:
    """alpha(G^t)^(1/t) for t = 1..max_power, each a lower bound on Theta(G)."""
    if max_power < 1:
        raise ValueError("max_power must be at least 1")
    if g.n**max_power > cap:
        raise SizeCapError(f"G^{max_power} has {g.n**max_power} vertices, above the exact cap {cap}")
    values = []
    power = g
    for t in range(1, max_power + 1):
        if t > 1:
            power = graph_tensor_product(power, g)
        alpha, _ = independence_number(power, cap)
        values.append(float(alpha ** (1.0 / t)))
    return values


# ---------------------------------------------------------------------------
# quantum side
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AlphaCertificate:
    """Pure states claimed to have pairwise orthogonal channel outputs.

    ``residual`` is whatever figure of merit the producer attached: the
    search routine stores its objective sum_{i<j} tr(Phi(psi_i) Phi(psi_j)).
    """

    states: tuple
    residual: float = 0.0

    def __init__(self, states, residual: float = 0.0):
        if residual < 0:
            raise InvariantError("certificate residual must be non-negative")
        object.__setattr__(self, "states", tuple(la.as_pure_state(s, tol=la.TOL_ALGEBRA) for s in states))
        object.__setattr__(self, "residual", float(residual))


@dataclass(frozen=True)
class CertificateCheck:
    residual: float
    max_overlap: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def alpha_certificate_check(ch: Channel, cert: AlphaCertificate, tol: float = 1e-9) -> CertificateCheck:
    """Check <psi_i| E_k^dag E_l |psi_j> = 0 for all k, l and i != j.

    ``residual`` is the largest such modulus; ``max_overlap`` is the largest
    tr(Phi(psi_i) Phi(psi_j)), which equals the sum of the squared moduli.
    """
    k = ch.kraus_ops
    states = np.array(cert.states)
    if states.shape[-1] != ch.dim_in:
        raise ValueError("certificate states do not match the channel input dimension")
    vecs = np.einsum("kab,ib->ika", k, states)
    gram = np.einsum("ika,jla->ikjl", vecs.conj(), vecs)
    m = len(cert.states)
    residual, overlap = 0.0, 0.0
    for i, j in combinations(range(m), 2):
        block = np.abs(gram[i, :, j, :])
        residual = max(residual, float(block.max(initial=0.0)))
        overlap = max(overlap, float(np.sum(block**2)))
    return CertificateCheck(residual, overlap, tol)


def pairwise_overlap(ch: Channel, states) -> float:
    """sum_{i<j} tr(Phi(psi_i) Phi(psi_j)) for pure states."""
    return _overlap_value(ch.apply_pure(np.asarray(states, dtype=np.complex128)))


def _overlap_value(outs: np.ndarray) -> float:
    tot = outs.sum(axis=0)
    # sum_{i<j} tr(A_i A_j) = (tr(T^2) - sum_i tr(A_i^2)) / 2 with T = sum A_i
    return float((np.real(np.vdot(tot, tot)) - np.real(np.sum(outs.conj() * outs))) / 2)


def alpha_search(ch: Channel, k: int, restarts: int = 64, seed: int = 0,
                 sweeps: int = 200, tol: float = 1e-14) -> AlphaCertificate:
    """Search for k pure states with pairwise orthogonal channel outputs.

    Block-coordinate descent on sum_{i<j} tr(Phi(psi_i) Phi(psi_j)): with the
    other states fixed the objective is the quadratic form
    <psi_i| Phi^*(sum_{j != i} Phi(psi_j)) |psi_i>, minimized exactly by the
    lowest eigenvector. Multistart from seeded random states; the best
    certificate carries its objective value as residual.
    """
    if ch.dim_in > 16:
        raise SizeCapError(f"alpha_search is limited to dim_in <= 16 (got {ch.dim_in})")
    if k < 1:
        raise ValueError("k must be positive")
    rng = np.random.default_rng(seed)
    best_states, best_val = None, np.inf
    for _ in range(restarts):
        states = la.random_pure_state(ch.dim_in, rng, size=k)
        outs = ch.apply_pure(states)
        val = _overlap_value(outs)
        for _ in range(sweeps):
            prev = val
            for i in range(k):
                others = outs.sum(axis=0) - outs[i]
                a = ch.adjoint(others)
                _, vec = np.linalg.eigh((a + a.conj().T) / 2)
                states[i] = vec[:, 0]
                outs[i] = ch.apply_pure(states[i])
            val = _overlap_value(outs)
            if prev - val <= tol * max(1.0, prev) or val <= tol:
                break
        if val < best_val:
            best_val, best_states = val, states.copy()
        if best_val <= tol:
            break
    return AlphaCertificate(best_states, max(best_val, 0.0))


def clique_score(ch: Channel, states: Sequence) -> float:
    """sum_{i<j} tr(S Phi(rho_i) (x) Phi(rho_j)) for a product witness.

    States may be given as density matrices or as state vectors.
    """
    rhos = [la.projector(s) if np.ndim(s) == 1 else np.asarray(s, dtype=np.complex128) for s in states]
    outs = [ch.apply(r) for r in rhos]
    d = ch.dim_out
    total = 0.0
    for i, j in combinations(range(len(outs)), 2):
        total += la.swap_trace(np.kron(outs[i], outs[j]), d).real
    return float(total)


def clique_score_joint(ch: Channel, rho_joint, k: int) -> float:
    """Score of a possibly entangled joint witness on k input registers.

    Uses the reduced pairwise marginals rho^{ij}:
    sum_{i<j} tr(S (Phi (x) Phi)(rho^{ij})).
    """
    d = ch.dim_in
    rho = np.asarray(rho_joint, dtype=np.complex128)
    if rho.shape != (d**k, d**k):
        raise ValueError(f"joint witness must be {d**k}x{d**k}")
    t = rho.reshape((d,) * (2 * k))
    letters = "abcdefghijklmnopqrstuvwxyz"
    total = 0.0
    for i, j in combinations(range(k), 2):
        row = list(letters[:k])
        col = list(letters[k:2 * k])
        for r in range(k):
            if r not in (i, j):
                col[r] = row[r]
        spec = "".join(row) + "".join(col) + "->" + row[i] + row[j] + col[i] + col[j]
        pair = np.einsum(spec, t).reshape(d * d, d * d)
        total += la.swap_trace(tensor_square_apply(ch, pair), ch.dim_out).real
    return float(total)


@dataclass(frozen=True, eq=False)
class CliqueInstance:
    channel: Channel
    k: int
    a: float
    b: float
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.a < self.b:
            raise InvariantError(f"clique thresholds must satisfy 0 <= a < b (got a={self.a}, b={self.b})")
        if self.k < 1:
            raise InvariantError("clique size k must be positive")
