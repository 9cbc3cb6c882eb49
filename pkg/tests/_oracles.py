"""Reference implementations used only by the tests.

Each one is written from the definition, with loops and a different
numerical path from the package code, so agreement is a real check.
"""

import itertools

import numpy as np
import scipy.linalg


def kron_ref(a, b):
    a, b = np.asarray(a), np.asarray(b)
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), dtype=np.complex128)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            out[i * b.shape[0]:(i + 1) * b.shape[0], j * b.shape[1]:(j + 1) * b.shape[1]] = a[i, j] * b
    return out


def partial_trace_ref(rho, d1, d2, which="second"):
    rho = np.asarray(rho)
    if which == "second":
        out = np.zeros((d1, d1), dtype=np.complex128)
        for i in range(d1):
            for j in range(d1):
                out[i, j] = sum(rho[i * d2 + k, j * d2 + k] for k in range(d2))
        return out
    out = np.zeros((d2, d2), dtype=np.complex128)
    for i in range(d2):
        for j in range(d2):
            out[i, j] = sum(rho[k * d2 + i, k * d2 + j] for k in range(d1))
    return out


def entropy_ref(rho):
    """-sum lam log2 lam using the general (non-Hermitian) eigensolver."""
    lam = np.real(scipy.linalg.eigvals(np.asarray(rho)))
    lam = lam[lam > 1e-14]
    return float(-np.sum(lam * np.log2(lam)))


def shannon_ref(p):
    return float(-sum(x * np.log2(x) for x in p if x > 0))


def swap_ref(d):
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def apply_kraus_ref(kraus, rho):
    out = 0
    for e in kraus:
        out = out + e @ rho @ e.conj().T
    return out


def apply_mp_ref(effects, preps, rho):
    return sum(np.trace(m @ rho) * s for m, s in zip(effects, preps))


def choi_ref(apply_fn, din):
    """sum_ij Phi(|i><j|) (x) |i><j| (output first)."""
    out = 0
    for i in range(din):
        for j in range(din):
            eij = np.zeros((din, din), dtype=np.complex128)
            eij[i, j] = 1.0
            out = out + kron_ref(apply_fn(eij), eij)
    return out


def mis_ref(n, edges):
    """Maximum independent set size by exhaustive enumeration.

    Small graphs check every subset; larger ones list every independent set
    by plain backtracking (no bounding).
    """
    if n > 20:
        nbr = [set() for _ in range(n)]
        for u, v in edges:
            nbr[u].add(v)
            nbr[v].add(u)
        best = 0
        stack = [(0, frozenset())]
        while stack:
            start, chosen = stack.pop()
            best = max(best, len(chosen))
            for v in range(start, n):
                if not (nbr[v] & chosen):
                    stack.append((v + 1, chosen | {v}))
        return best
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(masks.size, dtype=bool)
    for u, v in edges:
        ok &= ~(((masks >> u) & 1).astype(bool) & ((masks >> v) & 1).astype(bool))
    return int(np.bitwise_count(masks[ok]).max())


def strong_product_edges(n1, e1, n2, e2):
    a1 = {(min(u, v), max(u, v)) for u, v in e1}
    a2 = {(min(u, v), max(u, v)) for u, v in e2}

    def close(adj, x, y):
        return x == y or (min(x, y), max(x, y)) in adj

    verts = list(itertools.product(range(n1), range(n2)))
    edges = set()
    for p, q in itertools.combinations(range(len(verts)), 2):
        (v1, u1), (v2, u2) = verts[p], verts[q]
        if close(a1, v1, v2) and close(a2, u1, u2):
            edges.add((p, q))
    return edges


def h2(p):
    return shannon_ref([p, 1 - p])


def mutual_information_ref(p, r):
    p = np.asarray(p, dtype=float)
    q = r @ p
    total = 0.0
    for x in range(p.shape[0]):
        for y in range(p.shape[1]):
            if r[x] > 0 and p[x, y] > 0:
                total += r[x] * p[x, y] * np.log2(p[x, y] / q[y])
    return total


def capacity_grid(p, points=41):
    """max_r I(r; p) over the simplex grid with spacing 1/(points-1)."""
    p = np.asarray(p, dtype=float)
    m = points - 1
    best = 0.0
    for c in itertools.product(range(points), repeat=p.shape[0] - 1):
        if sum(c) > m:
            continue
        r = np.array(list(c) + [m - sum(c)], dtype=float) / m
        best = max(best, mutual_information_ref(p, r))
    return best


def local_operator_ref(qubits, terms):
    """Sum of terms embedded by matching bits on the support and elsewhere."""
    dim = 2 ** qubits
    out = np.zeros((dim, dim), dtype=np.complex128)

    def bit(x, q):
        return (x >> (qubits - 1 - q)) & 1

    for support, mat in terms:
        mat = np.asarray(mat)
        k = len(support)
        for x in range(dim):
            for y in range(dim):
                if any(bit(x, q) != bit(y, q) for q in range(qubits) if q not in support):
                    continue
                ix = sum(bit(x, q) << (k - 1 - t) for t, q in enumerate(support))
                iy = sum(bit(y, q) << (k - 1 - t) for t, q in enumerate(support))
                out[x, y] += mat[ix, iy]
    return out


def sat24_ref(n, clauses):
    """(satisfiable, min_x sum_k <A_k|psi_x>^2) over all x in {+-1}^n."""
    vecs = []
    for vars_, signs in clauses:
        a = np.zeros(n)
        for v, s in zip(vars_, signs):
            a[v] = s / 2
        vecs.append(a)
    best = np.inf
    for x in itertools.product((1.0, -1.0), repeat=n):
        psi = np.array(x) / np.sqrt(n)
        best = min(best, sum(float(a @ psi) ** 2 for a in vecs))
    return best < 1e-12, best


def rand_density(d, rng, rank=None):
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def rand_state(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
