"""Source problems, their reductions to channel problems, and a gap checker.

Three source problems are covered: k-local Hamiltonian, quantum SAT with
projector constraints, and 2-out-of-4-SAT. Each has an exact oracle at
desk scale. The reductions produce clique instances (Hamiltonian and
quantum SAT) or a channel whose minimum output entropy is 2 exactly when
the 2-out-of-4 instance is satisfiable. ``verify_gap`` runs both sides and
emits a replayable report.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import capacity as cap
from . import linalg_core as la
from .channels import (
    Channel,
    MeasPrepChannel,
    build_cube_channel,
    build_H_channel,
    build_swap_channel,
    build_trace_channel,
    build_trace_channel_eb,
    orthomix,
    validate_cptp,
)
from ._version import __version__
from .errors import InvariantError, SizeCapError
from .serialize import digest
from .zero_error import CliqueInstance, alpha_search, clique_score_joint

LOCALHAM_QUBIT_CAP = 12
CLIQUE_QUBIT_CAP = 10
SAT24_BRUTE_CAP = 24
SAT24_CHANNEL_CAP = 5

VERDICTS = ("yes-consistent", "no-consistent", "inconclusive")


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


def _check_support(support, qubits: int) -> tuple[int, ...]:
    sup = tuple(int(q) for q in support)
    if len(set(sup)) != len(sup):
        raise InvariantError(f"support {sup} repeats a qubit")
    if any(not 0 <= q < qubits for q in sup):
        raise InvariantError(f"support {sup} out of range for {qubits} qubits")
    return sup


def _check_term_matrix(mat, support: tuple[int, ...]) -> np.ndarray:
    m = la.as_matrix(mat)
    dim = 2 ** len(support)
    if m.shape != (dim, dim):
        raise InvariantError(f"term on {len(support)} qubits must be {dim}x{dim}, got {m.shape}")
    if la.max_abs(m - m.conj().T) > la.TOL_ALGEBRA:
        raise InvariantError("term matrix is not Hermitian")
    return m


@dataclass(frozen=True, eq=False)
class LocalHamInstance:
    """Sum of PSD terms H_i of norm at most 1, with promise thresholds a < b."""

    qubits: int
    terms: tuple
    a: float
    b: float

    def __init__(self, qubits: int, terms, a: float, b: float):
        qubits = int(qubits)
        clean = []
        for support, mat in terms:
            sup = _check_support(support, qubits)
            m = _check_term_matrix(mat, sup)
            lam = np.linalg.eigvalsh(m)
            if lam[0] < -la.TOL_ALGEBRA:
                raise InvariantError(f"term on {sup} is not positive semidefinite (eigenvalue {lam[0]!r})")
            if lam[-1] > 1.0 + la.TOL_ALGEBRA:
                raise InvariantError(f"term on {sup} has norm {lam[-1]!r} > 1")
            clean.append((sup, m))
        if not 0.0 <= a < b:
            raise InvariantError(f"thresholds must satisfy 0 <= a < b (got a={a}, b={b})")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "terms", tuple(clean))
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))

    @property
    def s(self) -> int:
        # an empty instance is scaled as if it had one zero term
        return max(len(self.terms), 1)

    def to_payload(self) -> dict:
        return {
            "qubits": self.qubits,
            "terms": [{"support": list(sup), "matrix": m} for sup, m in self.terms],
            "a": self.a,
            "b": self.b,
        }


@dataclass(frozen=True, eq=False)
class QSatInstance:
    """Projector constraints Pi_i on at most 4 qubits each, with promise gap epsilon."""

    qubits: int
    projections: tuple
    epsilon: float

    def __init__(self, qubits: int, projections, epsilon: float):
        qubits = int(qubits)
        clean = []
        for support, mat in projections:
            sup = _check_support(support, qubits)
            if len(sup) > 4:
                raise InvariantError(f"projection support {sup} has more than 4 qubits")
            m = _check_term_matrix(mat, sup)
            if la.max_abs(m @ m - m) > la.TOL_SPECTRAL:
                raise InvariantError(f"matrix on {sup} is not a projector")
            clean.append((sup, m))
        if not epsilon > 0:
            raise InvariantError(f"epsilon must be positive (got {epsilon})")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "projections", tuple(clean))
        object.__setattr__(self, "epsilon", float(epsilon))

    @property
    def s(self) -> int:
        return max(len(self.projections), 1)

    def to_payload(self) -> dict:
        return {
            "qubits": self.qubits,
            "projections": [{"support": list(sup), "matrix": m} for sup, m in self.projections],
            "epsilon": self.epsilon,
        }


@dataclass(frozen=True)
class Sat24Instance:
    """2-out-of-4-SAT: each clause asks that exactly two of its signed literals are +1."""

    n: int
    clauses: tuple

    def __init__(self, n: int, clauses):
        n = int(n)
        if n < 1:
            raise InvariantError("n must be positive")
        clean = []
        for c in clauses:
            if isinstance(c, dict):
                vars_, signs = c["vars"], c["signs"]
            else:
                vars_, signs = c
            vars_ = tuple(int(v) for v in vars_)
            signs = tuple(int(s) for s in signs)
            if len(vars_) != 4 or len(set(vars_)) != 4:
                raise InvariantError(f"clause {vars_} must name exactly 4 distinct variables")
            if any(not 0 <= v < n for v in vars_):
                raise InvariantError(f"clause {vars_} out of range for n={n}")
            if len(signs) != 4 or any(s not in (1, -1) for s in signs):
                raise InvariantError(f"clause signs {signs} must be four values in {{+1, -1}}")
            clean.append((vars_, signs))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "clauses", tuple(clean))

    def vectors(self) -> np.ndarray:
        """Unit vectors A_k with entries sign/2 on the clause variables."""
        a = np.zeros((len(self.clauses), self.n))
        for k, (vars_, signs) in enumerate(self.clauses):
            a[k, list(vars_)] = np.array(signs) / 2.0
        norms = np.linalg.norm(a, axis=1)
        if not np.allclose(norms, 1.0):
            raise InvariantError("clause vectors must be unit vectors")
        return a

    def to_payload(self) -> dict:
        return {"n": self.n, "clauses": [{"vars": list(v), "signs": list(s)} for v, s in self.clauses]}


@dataclass
class ReductionReport:
    reduction: str
    instance_digest: str
    seed: int
    budgets: dict
    tolerances: dict
    channel: dict
    thresholds: dict
    source: dict
    target: dict
    verdict: str
    violation: dict | None = None
    notes: dict = field(default_factory=dict)
    tool_version: str = __version__

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise InvariantError(f"unknown verdict {self.verdict!r}")

    def to_dict(self) -> dict:
        return {
            "reduction": self.reduction,
            "instance_digest": self.instance_digest,
            "seed": self.seed,
            "budgets": self.budgets,
            "tolerances": self.tolerances,
            "channel": self.channel,
            "thresholds": self.thresholds,
            "source": self.source,
            "target": self.target,
            "verdict": self.verdict,
            "violation": self.violation,
            "notes": self.notes,
            "tool_version": self.tool_version,
        }


# ---------------------------------------------------------------------------
# exact source oracles
# ---------------------------------------------------------------------------


def embed_operator(mat, support, qubits: int) -> np.ndarray:
    """mat acting on ``support`` (in the listed order) tensored with identity elsewhere.

    Qubit 0 is the most significant tensor factor.
    """
    sup = list(_check_support(support, qubits))
    rest = [q for q in range(qubits) if q not in sup]
    full = np.kron(np.asarray(mat, dtype=np.complex128), np.eye(2 ** len(rest)))
    order = sup + rest
    t = full.reshape((2,) * (2 * qubits))
    # axis p of t refers to qubit order[p]; move them back to natural order
    perm = [order.index(q) for q in range(qubits)]
    t = t.transpose(perm + [qubits + p for p in perm])
    return t.reshape(2 ** qubits, 2 ** qubits)


def _total_operator(qubits: int, terms) -> np.ndarray:
    dim = 2 ** qubits
    h = np.zeros((dim, dim), dtype=np.complex128)
    for sup, m in terms:
        h += embed_operator(m, sup, qubits)
    return h


def localham_operator(inst: LocalHamInstance) -> np.ndarray:
    if inst.qubits > LOCALHAM_QUBIT_CAP:
        raise SizeCapError(f"local Hamiltonian oracle is limited to {LOCALHAM_QUBIT_CAP} qubits")
    return _total_operator(inst.qubits, inst.terms)


def localham_min_eig(inst: LocalHamInstance) -> float:
    """Smallest eigenvalue of sum_i H_i (dense eigensolve)."""
    return float(np.linalg.eigvalsh(localham_operator(inst))[0])


def localham_ground_state(inst: LocalHamInstance) -> tuple[float, np.ndarray]:
    lam, vec = np.linalg.eigh(localham_operator(inst))
    return float(lam[0]), vec[:, 0]


def qsat_operator(inst: QSatInstance) -> np.ndarray:
    if inst.qubits > LOCALHAM_QUBIT_CAP:
        raise SizeCapError(f"quantum SAT oracle is limited to {LOCALHAM_QUBIT_CAP} qubits")
    return _total_operator(inst.qubits, inst.projections)


def qsat_satisfiable(inst: QSatInstance) -> tuple[bool, float]:
    """(satisfiable, lambda_min(sum Pi_i)); satisfiable iff the energy is <= 1e-9."""
    energy = float(np.linalg.eigvalsh(qsat_operator(inst))[0])
    return energy <= la.TOL_SPECTRAL, energy


def _sat24_signed_sums(inst: Sat24Instance) -> tuple[np.ndarray, np.ndarray]:
    n = inst.n
    # x_0 = +1 fixes the global sign
    rest = np.array(list(itertools.product((1, -1), repeat=n - 1)), dtype=np.int64).reshape(-1, n - 1)
    xs = np.hstack([np.ones((rest.shape[0], 1), dtype=np.int64), rest])
    if not inst.clauses:
        return xs, np.zeros((xs.shape[0], 0), dtype=np.int64)
    s = np.zeros((len(inst.clauses), n), dtype=np.int64)
    for k, (vars_, signs) in enumerate(inst.clauses):
        s[k, list(vars_)] = signs
    return xs, xs @ s.T


def sat24_brute_force(inst: Sat24Instance) -> tuple[bool, float]:
    """Enumerate x in {+-1}^n; return (satisfiable, min_x sum_k <A_k|psi_x>^2).

    <A_k|psi_x> = (sum of signed literals) / (2 sqrt n), so the test for
    satisfiability is an exact integer one.
    """
    sat, viol, _ = _sat24_search(inst)
    return sat, viol


def _sat24_search(inst: Sat24Instance):
    if inst.n > SAT24_BRUTE_CAP:
        raise SizeCapError(f"2-out-of-4-SAT enumeration is limited to n <= {SAT24_BRUTE_CAP}")
    xs, sums = _sat24_signed_sums(inst)
    sq = np.sum(sums**2, axis=1)
    best = int(np.argmin(sq))
    viol = float(sq[best]) / (4.0 * inst.n)
    return bool(sq[best] == 0), viol, xs[best]


def sat24_witness_state(x) -> np.ndarray:
    """|psi_x> (x) |psi_x> with |psi_x> = sum_i x_i |i> / sqrt(n)."""
    x = np.asarray(x, dtype=float)
    psi = x / np.sqrt(x.size)
    return np.kron(psi, psi).astype(np.complex128)


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------


def _flagged_clique_channel(op: np.ndarray, s: int) -> MeasPrepChannel:
    """POVM {op/s (x) I, M (x) |0><0|, M (x) |1><1|} with M = I - op/s.

    Outcomes prepare |00>, |11>, |10> on two output qubits.
    """
    dim = op.shape[0]
    h = op / s
    m = np.eye(dim) - h
    p0 = la.projector(la.ket(0, 2))
    p1 = la.projector(la.ket(1, 2))
    effects = [np.kron(h, np.eye(2)), np.kron(m, p0), np.kron(m, p1)]
    preps = [la.projector(la.ket(i, 4)) for i in (0, 3, 2)]
    residual = la.max_abs(sum(effects) - np.eye(2 * dim))
    if residual > la.TOL_SPECTRAL:
        raise InvariantError(f"POVM completeness residual {residual!r} exceeds 1e-9")
    return MeasPrepChannel(effects, preps)


def ham_to_clique(inst: LocalHamInstance) -> CliqueInstance:
    """Clique instance (Phi, k=2, a^2/s^2, b^2/s^2) for a local Hamiltonian instance."""
    if inst.qubits > CLIQUE_QUBIT_CAP:
        raise SizeCapError(f"ham_to_clique is limited to {CLIQUE_QUBIT_CAP} qubits")
    s = inst.s
    ch = _flagged_clique_channel(localham_operator(inst), s)
    return CliqueInstance(ch, 2, inst.a**2 / s**2, inst.b**2 / s**2,
                          {"s": s, "source": "localham", "qubits": inst.qubits})


def qsat_to_clique(inst: QSatInstance) -> CliqueInstance:
    """Clique instance (Phi, k=2, 0, epsilon^2/s^2) for a quantum SAT instance.

    Unsatisfiable instances have <phi|Pi|phi> >= epsilon for every state, so
    every product witness scores at least (epsilon/s)^2. The larger value
    epsilon/s^2 is kept in ``notes`` for comparison only.
    """
    if inst.qubits > CLIQUE_QUBIT_CAP:
        raise SizeCapError(f"qsat_to_clique is limited to {CLIQUE_QUBIT_CAP} qubits")
    s = inst.s
    ch = _flagged_clique_channel(qsat_operator(inst), s)
    return CliqueInstance(ch, 2, 0.0, inst.epsilon**2 / s**2,
                          {"s": s, "source": "qsat", "qubits": inst.qubits,
                           "linear_threshold": inst.epsilon / s**2})


def sat24_hamiltonian(inst: Sat24Instance) -> np.ndarray:
    """H = (1/m) sum_k |A_k A_k><A_k A_k| on C^n (x) C^n (zero when m = 0)."""
    n = inst.n
    if not inst.clauses:
        return np.zeros((n * n, n * n), dtype=np.complex128)
    a = inst.vectors()
    aa = np.einsum("ki,kj->kij", a, a).reshape(len(a), n * n)
    return (aa.T @ aa).astype(np.complex128) / len(a)


def sat24_parts(inst: Sat24Instance, trace_form: str = "plain", epsilon: float | None = None) -> list[Channel]:
    """The four parts: partial trace, swap test, cube test, clause test."""
    n = inst.n
    if trace_form == "plain":
        trace = build_trace_channel(n)
    elif trace_form == "eb":
        eps = 0.5 / n**2 if epsilon is None else epsilon
        trace = build_trace_channel_eb(n, eps)
    else:
        raise ValueError(f"trace_form must be 'plain' or 'eb', got {trace_form!r}")
    return [trace, build_swap_channel(n), build_cube_channel(n), build_H_channel(sat24_hamiltonian(inst), 0.5)]


def sat24_to_minentropy(inst: Sat24Instance, trace_form: str = "plain", epsilon: float | None = None) -> Channel:
    """Equal-weight orthogonal mixture of the four parts on C^n (x) C^n.

    With the plain partial trace the minimum output entropy is 2 iff the
    instance is satisfiable and strictly larger otherwise. ``trace_form="eb"``
    swaps in the depolarized partial trace so that every part is
    entanglement breaking; for n = 2 that part comes with an explicit
    measure-and-prepare form.
    """
    if inst.n > SAT24_CHANNEL_CAP:
        raise SizeCapError(f"sat24_to_minentropy is limited to n <= {SAT24_CHANNEL_CAP}")
    if inst.n < 2:
        raise InvariantError("the cube part needs n >= 2")
    return orthomix([(0.25, p) for p in sat24_parts(inst, trace_form, epsilon)])


def minentropy_to_holevo(ch: Channel, seed: int = 0, restarts: int = cap.DEFAULT_RESTARTS,
                         samples: int = cap.DEFAULT_SAMPLES, tol: float = 1e-3) -> dict:
    """Both sides of chi(Psi) = log2 n - min H(Phi) for the covariant lift Psi."""
    lift = cap.covariant_lift(ch)
    rep = cap.lift_capacity_identity_check(ch, seed=seed, restarts=restarts, samples=samples)
    rep["lift"] = {"dim_in": lift.dim_in, "dim_out": lift.dim_out, "form": type(lift).__name__}
    rep["tolerance"] = tol
    rep["passed"] = bool(rep["residual"] <= tol)
    return rep


# ---------------------------------------------------------------------------
# witness sampling
# ---------------------------------------------------------------------------


def _pair_scores(ch: Channel, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    a = ch.apply_pure(left)
    b = ch.apply_pure(right)
    return np.einsum("nij,nji->n", a, b).real


def sample_clique_witnesses(clique: CliqueInstance, op: np.ndarray, samples: int, seed: int) -> dict:
    """Score random product witnesses (psi_1, psi_2) of the two-register channel.

    Also records each witness's energies E_i = tr((op (x) I) rho_i) and the
    smallest slack score - E_1 E_2 / s^2, which must be non-negative.
    """
    s = clique.notes.get("s", 1)
    rng = np.random.default_rng(seed)
    d = clique.channel.dim_in
    left = la.random_pure_state(d, rng, size=samples)
    right = la.random_pure_state(d, rng, size=samples)
    scores = _pair_scores(clique.channel, left, right)
    big = np.kron(op, np.eye(2))
    e1 = np.einsum("ni,ij,nj->n", left.conj(), big, left).real
    e2 = np.einsum("ni,ij,nj->n", right.conj(), big, right).real
    slack = scores - e1 * e2 / s**2
    i = int(np.argmin(scores))
    return {
        "samples": samples,
        "min_score": float(scores[i]),
        "min_score_witness": [left[i], right[i]],
        "min_energy": float(min(e1.min(), e2.min())),
        "min_slack": float(slack.min()),
        "scores": scores,
        "energies": np.stack([e1, e2], axis=1),
    }


def constructed_clique_witness(vec: np.ndarray) -> list[np.ndarray]:
    """(|phi>|0>, |phi>|1>) for a system state |phi>."""
    return [np.kron(vec, la.ket(0, 2)), np.kron(vec, la.ket(1, 2))]


# ---------------------------------------------------------------------------
# gap verification
# ---------------------------------------------------------------------------

DEFAULT_BUDGETS = {
    "restarts": 16,
    "samples": 1000,
    "joint_samples": 100,
    "oracle_samples": cap.DEFAULT_SAMPLES,
}
DEFAULT_TOLERANCES = {"score": 1e-6, "entropy": 1e-6, "lift": 1e-3}


def _channel_summary(ch: Channel) -> dict:
    rep = validate_cptp(ch)
    if isinstance(ch, MeasPrepChannel):
        ops = {"effects": ch.effects, "preps": ch.preps}
    else:
        ops = {"kraus": ch.kraus_ops}
    return {
        "form": type(ch).__name__,
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "operators": int(len(next(iter(ops.values())))),
        "digest": digest(ops),
        "cptp": rep.passed,
    }


def _verify_clique(kind: str, inst, seed: int, budgets: dict, tols: dict) -> ReductionReport:
    if kind == "ham2clique":
        clique = ham_to_clique(inst)
        op = localham_operator(inst)
        lam, vec = localham_ground_state(inst)
        if lam <= inst.a:
            source = "yes"
        elif lam >= inst.b:
            source = "no"
        else:
            source = "promise-gap"
        src = {"oracle": "localham_min_eig", "min_eigenvalue": lam, "answer": source}
    else:
        clique = qsat_to_clique(inst)
        op = qsat_operator(inst)
        lam_all, vecs = np.linalg.eigh(op)
        lam, vec = float(lam_all[0]), vecs[:, 0]
        sat = lam <= la.TOL_SPECTRAL
        source = "yes" if sat else ("no" if lam >= inst.epsilon - la.TOL_SPECTRAL else "promise-gap")
        src = {"oracle": "qsat_satisfiable", "energy": lam, "satisfiable": bool(sat), "answer": source}
    ch = clique.channel
    tol = tols["score"]
    # constructed witness from the exact ground state
    built = constructed_clique_witness(vec)
    built_score = float(_pair_scores(ch, built[0][None], built[1][None])[0])
    # local search over product witnesses
    cert = alpha_search(ch, 2, restarts=budgets["restarts"], seed=seed)
    search_states = [np.asarray(s) for s in cert.states]
    search_score = float(_pair_scores(ch, search_states[0][None], search_states[1][None])[0])
    sampled = sample_clique_witnesses(clique, op, budgets["samples"], seed)
    tgt = {
        "estimator": "alpha_search+sampling",
        "constructed_witness_score": built_score,
        "search_score": search_score,
        "sampled_min_score": sampled["min_score"],
        "sampled_min_slack": sampled["min_slack"],
    }
    joint_min = None
    if ch.dim_in <= 8 and budgets.get("joint_samples", 0) > 0:
        rng = np.random.default_rng(seed + 1)
        vals = []
        for _ in range(budgets["joint_samples"]):
            psi = la.random_pure_state(ch.dim_in**2, rng)
            vals.append(clique_score_joint(ch, la.projector(psi), 2))
        joint_min = float(min(vals))
        tgt["joint_sampled_min_score"] = joint_min
    candidates = [(built_score, built), (search_score, search_states),
                  (sampled["min_score"], sampled["min_score_witness"])]
    best_score, best_witness = min(candidates, key=lambda c: c[0])
    tgt["min_score"] = best_score
    violation = None
    if source == "yes":
        verdict = "yes-consistent" if best_score <= clique.a + tol else "inconclusive"
    elif source == "no":
        if best_score >= clique.b - tol:
            verdict = "no-consistent"
        else:
            verdict = "inconclusive"
            violation = {"kind": "product witness scores below b", "score": best_score,
                         "witness": best_witness}
    else:
        verdict = "inconclusive"
    return ReductionReport(
        reduction=kind,
        instance_digest=digest(inst.to_payload()),
        seed=seed,
        budgets=dict(budgets),
        tolerances=dict(tols),
        channel=_channel_summary(ch),
        thresholds={"a": clique.a, "b": clique.b, "s": clique.notes["s"], "k": clique.k},
        source=src,
        target=tgt,
        verdict=verdict,
        violation=violation,
        notes={key: v for key, v in clique.notes.items() if key not in ("s",)},
    )


def _verify_sat24(inst: Sat24Instance, seed: int, budgets: dict, tols: dict) -> ReductionReport:
    sat, viol, x = _sat24_search(inst)
    ch = sat24_to_minentropy(inst)
    tol = tols["entropy"]
    res = cap.min_entropy_oracle(ch, samples=budgets["oracle_samples"], seed=seed)
    oracle_value = res.value
    best_value, best_state = oracle_value, res.payload
    tgt = {"estimator": "min_entropy_oracle", "oracle_value": oracle_value,
           "oracle_samples": budgets["oracle_samples"]}
    if sat:
        w = sat24_witness_state(x)
        wv = cap.output_entropy(ch, w)
        tgt["witness_assignment"] = x.tolist()
        tgt["witness_entropy"] = wv
        if wv < best_value:
            best_value, best_state = wv, w
    tgt["min_entropy"] = best_value
    tgt["delta"] = best_value - 2.0
    violation = None
    if best_value < 2.0 - tol:
        verdict = "inconclusive"
        violation = {"kind": "entropy below 2", "value": best_value, "state": best_state}
    elif sat:
        verdict = "yes-consistent" if best_value <= 2.0 + tol else "inconclusive"
    elif best_value > 2.0 + tol:
        verdict = "no-consistent"
    else:
        verdict = "inconclusive"
        violation = {"kind": "unsatisfiable instance reaches entropy 2", "value": best_value,
                     "state": best_state}
    return ReductionReport(
        reduction="sat24entropy",
        instance_digest=digest(inst.to_payload()),
        seed=seed,
        budgets=dict(budgets),
        tolerances=dict(tols),
        channel=_channel_summary(ch),
        thresholds={"c": 2.0},
        source={"oracle": "sat24_brute_force", "satisfiable": sat, "best_violation": viol,
                "answer": "yes" if sat else "no"},
        target=tgt,
        verdict=verdict,
        violation=violation,
    )


def _verify_lift(ch: Channel, seed: int, budgets: dict, tols: dict) -> ReductionReport:
    rep = minentropy_to_holevo(ch, seed=seed, restarts=budgets["restarts"],
                               samples=budgets["oracle_samples"], tol=tols["lift"])
    verdict = "yes-consistent" if rep["passed"] else "inconclusive"
    return ReductionReport(
        reduction="lift-holevo",
        instance_digest=digest(_channel_summary(ch)),
        seed=seed,
        budgets=dict(budgets),
        tolerances=dict(tols),
        channel=_channel_summary(cap.covariant_lift(ch)),
        thresholds={"log2_n": float(np.log2(ch.dim_out))},
        source={"oracle": "min_output_entropy", "min_entropy": rep["min_entropy"]},
        target={"estimator": "explicit_ensemble", "chi_estimate": rep["chi_estimate"],
                "logn_minus_minH": rep["logn_minus_minH"], "residual": rep["residual"],
                "chi_first_n_labels_uniform": rep["chi_first_n_labels_uniform"]},
        verdict=verdict,
    )


def verify_gap(instance, reduction: str, seed: int = 0, budgets: dict | None = None,
               tolerances: dict | None = None) -> ReductionReport:
    """Run the exact source oracle and the target estimator, then compare.

    ``reduction`` is one of ham2clique, qsat2clique, sat24entropy,
    lift-holevo. A result contradicting the reduction is reported with
    verdict ``inconclusive`` and the offending witness under ``violation``.
    """
    b = dict(DEFAULT_BUDGETS, **(budgets or {}))
    t = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
    if reduction == "ham2clique":
        if not isinstance(instance, LocalHamInstance):
            raise TypeError("ham2clique needs a LocalHamInstance")
        return _verify_clique(reduction, instance, seed, b, t)
    if reduction == "qsat2clique":
        if not isinstance(instance, QSatInstance):
            raise TypeError("qsat2clique needs a QSatInstance")
        return _verify_clique(reduction, instance, seed, b, t)
    if reduction == "sat24entropy":
        if not isinstance(instance, Sat24Instance):
            raise TypeError("sat24entropy needs a Sat24Instance")
        return _verify_sat24(instance, seed, b, t)
    if reduction == "lift-holevo":
        return _verify_lift(instance, seed, b, t)
    raise ValueError(f"unknown reduction {reduction!r}")


# ---------------------------------------------------------------------------
# instance generators
# ---------------------------------------------------------------------------


def random_psd_term(k: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random PSD matrix on k qubits with norm in [0.2, 1]."""
    d = 2**k
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    m = g @ g.conj().T
    m = m / np.linalg.eigvalsh(m)[-1]
    return m * rng.uniform(0.2, 1.0)


def random_localham_instance(qubits: int, terms: int, locality: int, rng: np.random.Generator,
                             gap: float = 0.1) -> LocalHamInstance:
    """Random instance whose thresholds bracket the true ground energy."""
    locality = min(locality, qubits)
    ts = []
    for _ in range(terms):
        sup = tuple(sorted(rng.choice(qubits, size=locality, replace=False).tolist()))
        ts.append((sup, random_psd_term(locality, rng)))
    lam = float(np.linalg.eigvalsh(_total_operator(qubits, ts))[0])
    return LocalHamInstance(qubits, ts, a=lam + gap / 2, b=lam + gap)


def _clause_for(x: np.ndarray, rng: np.random.Generator) -> tuple:
    vars_ = rng.choice(len(x), size=4, replace=False)
    agree = np.array([1, 1, -1, -1])[rng.permutation(4)]
    signs = agree * x[vars_]
    return tuple(int(v) for v in vars_), tuple(int(s) for s in signs)


def random_sat24_instance(n: int, clauses: int, rng: np.random.Generator,
                          satisfiable: bool = True, max_tries: int = 1000) -> Sat24Instance:
    """Random 2-out-of-4-SAT instance with the requested answer.

    Satisfiable instances are planted around a random assignment; for
    unsatisfiable ones random clauses are added until enumeration finds no
    solution (``clauses`` is then a minimum).
    """
    if n < 4:
        raise ValueError("2-out-of-4-SAT needs n >= 4")
    if satisfiable:
        x = rng.choice([-1, 1], size=n)
        return Sat24Instance(n, [_clause_for(x, rng) for _ in range(clauses)])
    cl = []
    for _ in range(max_tries):
        vars_ = tuple(int(v) for v in rng.choice(n, size=4, replace=False))
        signs = tuple(int(s) for s in rng.choice([-1, 1], size=4))
        cl.append((vars_, signs))
        if len(cl) >= clauses:
            inst = Sat24Instance(n, cl)
            if not sat24_brute_force(inst)[0]:
                return inst
    raise RuntimeError("could not generate an unsatisfiable instance")
