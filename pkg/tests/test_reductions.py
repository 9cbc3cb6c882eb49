import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcaplab import capacity as cap
from qcaplab import channels as chn
from qcaplab import linalg_core as la
from qcaplab import reductions as red
from qcaplab.channels import validate_cptp
from qcaplab.errors import InvariantError, SizeCapError
from qcaplab.reductions import LocalHamInstance, QSatInstance, Sat24Instance
from qcaplab.zero_error import alpha_search, clique_score

from _oracles import entropy_ref, local_operator_ref, rand_state, sat24_ref

seeds = st.integers(min_value=0, max_value=2**32 - 1)
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])
PLUS = np.full((2, 2), 0.5)


def pair_witness(phi):
    return [np.kron(phi, la.ket(0, 2)), np.kron(phi, la.ket(1, 2))]


class TestInstances:
    def test_localham_validation(self):
        with pytest.raises(InvariantError):
            LocalHamInstance(1, [((0,), np.diag([1.5, 0.0]))], 0.1, 0.2)
        with pytest.raises(InvariantError):
            LocalHamInstance(1, [((0,), np.diag([-0.5, 0.0]))], 0.1, 0.2)
        with pytest.raises(InvariantError):
            LocalHamInstance(1, [((0,), P1)], 0.3, 0.2)
        with pytest.raises(InvariantError):
            LocalHamInstance(2, [((0, 0), np.eye(4) / 2)], 0.1, 0.2)
        with pytest.raises(InvariantError):
            LocalHamInstance(1, [((0,), np.eye(4) / 2)], 0.1, 0.2)

    def test_qsat_validation(self):
        with pytest.raises(InvariantError):
            QSatInstance(1, [((0,), np.eye(2) / 2)], 1.0)
        with pytest.raises(InvariantError):
            QSatInstance(5, [((0, 1, 2, 3, 4), np.eye(32))], 1.0)
        with pytest.raises(InvariantError):
            QSatInstance(1, [((0,), P0)], 0.0)

    def test_sat24_validation(self):
        with pytest.raises(InvariantError):
            Sat24Instance(4, [((0, 1, 2, 2), (1, 1, 1, 1))])
        with pytest.raises(InvariantError):
            Sat24Instance(4, [((0, 1, 2, 3), (1, 1, 1, 0))])
        with pytest.raises(InvariantError):
            Sat24Instance(4, [((0, 1, 2, 4), (1, 1, 1, 1))])
        inst = Sat24Instance(5, [{"vars": [0, 1, 2, 4], "signs": [1, -1, 1, -1]}])
        np.testing.assert_allclose(np.linalg.norm(inst.vectors(), axis=1), [1.0])
        np.testing.assert_allclose(inst.vectors()[0], [0.5, -0.5, 0.5, 0, -0.5])


class TestLocalHamOracle:
    def test_single_term(self):
        assert red.localham_min_eig(LocalHamInstance(1, [((0,), P1)], 0.1, 0.2)) == pytest.approx(0, abs=1e-12)

    def test_every_state_penalized(self):
        inst = LocalHamInstance(1, [((0,), P1), ((0,), P0)], 0.1, 0.2)
        assert red.localham_min_eig(inst) == pytest.approx(1, abs=1e-12)

    def test_random_three_qubit(self, rng):
        inst = red.random_localham_instance(3, 4, 2, rng)
        dense = local_operator_ref(3, inst.terms)
        assert red.localham_min_eig(inst) == pytest.approx(np.linalg.eigvalsh(dense)[0], abs=1e-9)
        assert inst.a < inst.b

    def test_embedding_with_reordered_support(self, rng):
        m = red.random_psd_term(2, rng)
        for sup in [(2, 0), (0, 2), (1, 2), (2, 1)]:
            np.testing.assert_allclose(red.embed_operator(m, sup, 3), local_operator_ref(3, [(sup, m)]),
                                       atol=1e-14)

    def test_qubit_cap(self):
        inst = LocalHamInstance(13, [], 0.0, 0.5)
        with pytest.raises(SizeCapError):
            red.localham_min_eig(inst)


class TestQSatOracle:
    def test_single_projector(self):
        sat, energy = red.qsat_satisfiable(QSatInstance(1, [((0,), P1)], 1.0))
        assert sat and energy == pytest.approx(0, abs=1e-12)

    def test_complementary_pair(self):
        sat, energy = red.qsat_satisfiable(QSatInstance(1, [((0,), P0), ((0,), P1)], 1.0))
        assert not sat and energy == pytest.approx(1, abs=1e-12)

    def test_chain(self):
        p11 = la.projector(la.ket(3, 4))
        inst = QSatInstance(3, [((0, 1), p11), ((1, 2), p11)], 0.5)
        sat, energy = red.qsat_satisfiable(inst)
        assert sat
        zero = la.ket(0, 8)
        assert np.vdot(zero, red.qsat_operator(inst) @ zero).real == 0


class TestSat24Oracle:
    def test_single_clause(self):
        inst = Sat24Instance(4, [((0, 1, 2, 3), (1, 1, 1, 1))])
        assert red.sat24_brute_force(inst) == (True, 0.0)
        x = np.array([1, 1, -1, -1])
        assert inst.vectors()[0] @ x == 0

    def test_contradiction_gap(self):
        inst = Sat24Instance(4, [((0, 1, 2, 3), (1, 1, 1, 1)), ((0, 1, 2, 3), (1, 1, 1, -1))])
        sat, viol = red.sat24_brute_force(inst)
        assert not sat
        assert viol >= 1 / inst.n
        assert viol == pytest.approx(sat24_ref(4, inst.clauses)[1], abs=1e-12)

    def test_empty(self):
        assert red.sat24_brute_force(Sat24Instance(3, []))[0]

    @given(seeds, st.integers(4, 8), st.integers(1, 6))
    @settings(max_examples=40, deadline=None)
    def test_against_reference(self, seed, n, m):
        rng = np.random.default_rng(seed)
        clauses = [(tuple(rng.choice(n, 4, replace=False).tolist()), tuple(rng.choice([-1, 1], 4).tolist()))
                   for _ in range(m)]
        sat, viol = red.sat24_brute_force(Sat24Instance(n, clauses))
        rsat, rviol = sat24_ref(n, clauses)
        assert sat == rsat
        assert viol == pytest.approx(rviol, abs=1e-12)
        if not sat:
            assert viol >= 1 / n - 1e-12

    def test_generators(self, rng):
        for _ in range(5):
            assert red.sat24_brute_force(red.random_sat24_instance(5, 3, rng, True))[0]
            assert not red.sat24_brute_force(red.random_sat24_instance(4, 3, rng, False))[0]

    def test_cap(self):
        with pytest.raises(SizeCapError):
            red.sat24_brute_force(Sat24Instance(25, []))


class TestHamToClique:
    def test_completeness_exact(self, rng):
        inst = red.random_localham_instance(2, 3, 2, rng)
        ch = red.ham_to_clique(inst).channel
        h = red.localham_operator(inst) / inst.s
        np.testing.assert_allclose(ch.effects[0] + ch.effects[1] + ch.effects[2], np.eye(8), atol=1e-12)
        np.testing.assert_allclose(ch.effects[1] + ch.effects[2], np.kron(np.eye(4) - h, np.eye(2)), atol=1e-12)
        assert validate_cptp(ch).passed

    def test_thresholds(self):
        inst = LocalHamInstance(2, [((0,), P1), ((1,), P1)], 0.2, 0.6)
        c = red.ham_to_clique(inst)
        assert (c.k, c.a, c.b) == (2, pytest.approx(0.04 / 4), pytest.approx(0.36 / 4))

    def test_zero_hamiltonian(self, rng):
        inst = LocalHamInstance(1, [((0,), np.zeros((2, 2)))], 0.0, 0.5)
        ch = red.ham_to_clique(inst).channel
        assert clique_score(ch, pair_witness(rand_state(2, rng))) == pytest.approx(0, abs=1e-15)

    def test_one_qubit_examples(self):
        inst = LocalHamInstance(1, [((0,), P1)], 0.1, 0.9)
        ch = red.ham_to_clique(inst).channel
        assert clique_score(ch, pair_witness(la.ket(0, 2))) == pytest.approx(0, abs=1e-15)
        assert clique_score(ch, pair_witness(la.ket(1, 2))) == pytest.approx(1 / inst.s**2, abs=1e-15)

    def test_kraus_and_dilation(self):
        ch = red.ham_to_clique(LocalHamInstance(1, [((0,), PLUS)], 0.1, 0.9)).channel
        k = chn.kraus_from_meas_prepare(ch)
        assert validate_cptp(k).passed
        u = chn.stinespring_unitary(k)
        r, dout, din = k.kraus.shape
        rho = la.projector(rand_state(4, np.random.default_rng(2)))
        np.testing.assert_allclose(chn.stinespring_apply(u, rho, din, dout, r), ch.apply(rho), atol=1e-9)

    @pytest.mark.parametrize("seed", range(6))
    def test_soundness_and_completeness(self, seed):
        rng = np.random.default_rng(seed)
        inst = red.random_localham_instance(2, int(rng.integers(1, 4)), int(rng.integers(1, 3)), rng)
        clique = red.ham_to_clique(inst)
        op = red.localham_operator(inst)
        lam, vec = red.localham_ground_state(inst)
        built = clique_score(clique.channel, red.constructed_clique_witness(vec))
        assert abs(built - lam**2 / inst.s**2) <= 1e-9
        res = red.sample_clique_witnesses(clique, op, 1000, seed)
        assert res["min_slack"] >= -1e-12
        assert res["min_score"] >= res["min_energy"] ** 2 / inst.s**2 - 1e-12
        assert np.all(res["scores"] >= lam**2 / inst.s**2 - 1e-12)


class TestQSatToClique:
    def test_satisfiable_kernel_witness(self):
        inst = QSatInstance(2, [((0, 1), la.projector(la.ket(3, 4))), ((0,), P1)], 0.5)
        c = red.qsat_to_clique(inst)
        assert c.a == 0
        phi = la.ket(0, 4)
        assert clique_score(c.channel, pair_witness(phi)) == pytest.approx(0, abs=1e-15)

    def test_unsatisfiable_pair(self):
        inst = QSatInstance(1, [((0,), P0), ((0,), P1)], 1.0)
        c = red.qsat_to_clique(inst)
        res = red.sample_clique_witnesses(c, red.qsat_operator(inst), 10_000, 0)
        assert res["min_score"] >= inst.epsilon / inst.s**2 - 1e-6
        assert c.b == pytest.approx(inst.epsilon**2 / inst.s**2)

    def test_empty(self, rng):
        c = red.qsat_to_clique(QSatInstance(2, [], 0.5))
        for _ in range(10):
            assert clique_score(c.channel, pair_witness(rand_state(4, rng))) == pytest.approx(0, abs=1e-15)

    def test_linear_threshold_overshoots(self):
        # |0><0| and |+><+| on one qubit: lambda_min = 1 - 1/sqrt2 ~ 0.293
        eps = 0.29
        inst = QSatInstance(1, [((0,), P0), ((0,), PLUS)], eps)
        lam = red.qsat_satisfiable(inst)[1]
        assert lam == pytest.approx(1 - 1 / np.sqrt(2), abs=1e-12) and lam >= eps
        c = red.qsat_to_clique(inst)
        _, vec = np.linalg.eigh(red.qsat_operator(inst))
        built = clique_score(c.channel, red.constructed_clique_witness(vec[:, 0]))
        cert = alpha_search(c.channel, 2, restarts=16, seed=0)
        best = min(built, clique_score(c.channel, list(cert.states)))
        # a valid no-instance scores below eps/s^2 but never below eps^2/s^2
        assert best < c.notes["linear_threshold"]
        assert best >= c.b - 1e-12


def sat_instance():
    x = np.array([1, -1, 1, -1])
    clauses = [((0, 1, 2, 3), tuple(int(s) for s in x * np.array([1, 1, -1, -1]))),
               ((0, 2, 1, 3), tuple(int(s) for s in x[[0, 2, 1, 3]] * np.array([1, -1, 1, -1])))]
    return Sat24Instance(4, clauses), x


class TestSat24Channel:
    def test_structure(self):
        inst, _ = sat_instance()
        ch = red.sat24_to_minentropy(inst)
        assert ch.dim_in == 16
        assert validate_cptp(ch).passed
        eb = red.sat24_to_minentropy(inst, trace_form="eb")
        assert validate_cptp(eb).passed
        # the swap part is measure-and-prepare in disguise: symmetric/antisymmetric POVM
        sym = (np.eye(16) + la.swap_operator(4)) / 2
        qc = chn.QCChannel([sym, np.eye(16) - sym])
        rho = la.random_density(16, np.random.default_rng(0))
        np.testing.assert_allclose(red.sat24_parts(inst)[1].apply(rho), qc.apply(rho), atol=1e-12)

    def test_caps(self):
        with pytest.raises(SizeCapError):
            red.sat24_to_minentropy(Sat24Instance(6, []))
        with pytest.raises(InvariantError):
            red.sat24_to_minentropy(Sat24Instance(1, []))

    def test_satisfying_witness_entropy_two(self):
        inst, x = sat_instance()
        ch = red.sat24_to_minentropy(inst)
        w = red.sat24_witness_state(x)
        assert entropy_ref(ch.apply_pure(w)) == pytest.approx(2.0, abs=1e-9)

    def test_parts_pure_at_witness(self):
        inst, x = sat_instance()
        w = red.sat24_witness_state(x)
        for part in red.sat24_parts(inst):
            out = part.apply_pure(w)
            assert np.trace(out @ out).real >= 1 - 1e-9

    def test_two_variables_no_clauses(self):
        ch = red.sat24_to_minentropy(Sat24Instance(2, []))
        for x in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
            assert cap.output_entropy(ch, red.sat24_witness_state(x)) == pytest.approx(2.0, abs=1e-9)
        assert cap.min_entropy_ascent(ch, restarts=16).value >= 2 - 1e-6

    def test_cube_mixed_off_uniform(self):
        cube = chn.build_cube_channel(3)
        for lam in ([1.0, 1.0, 0.5], [1.0, -0.7, 0.2], [0.9, 1.0, -1.1], [1.0, 0.0, 1.0]):
            psi = np.array(lam) / np.linalg.norm(lam)
            out = cube.apply_pure(np.kron(psi, psi))
            assert np.trace(out @ out).real < 1 - 1e-3
        for signs in ([1, 1, 1], [1, -1, 1], [-1, -1, 1]):
            psi = np.array(signs) / np.sqrt(3)
            out = cube.apply_pure(np.kron(psi, psi))
            assert np.trace(out @ out).real == pytest.approx(1, abs=1e-12)

    def test_unsatisfiable_above_two(self):
        inst = Sat24Instance(4, [((0, 1, 2, 3), (1, 1, 1, 1)), ((0, 1, 2, 3), (1, 1, 1, -1))])
        res = cap.min_entropy_oracle(red.sat24_to_minentropy(inst), samples=20000, seed=0)
        assert res.value > 2.0


class TestLiftReduction:
    @pytest.mark.parametrize("make,expected", [(lambda: chn.identity_channel(2), 1.0),
                                               (lambda: chn.depolarizing_channel(2), 0.0),
                                               (lambda: chn.dephasing_channel(2), 1.0)])
    def test_examples(self, make, expected):
        rep = red.minentropy_to_holevo(make(), seed=0, restarts=8, samples=2000)
        assert rep["passed"]
        assert rep["logn_minus_minH"] == pytest.approx(expected, abs=1e-3)
        assert rep["chi_estimate"] == pytest.approx(expected, abs=1e-3)


class TestVerifyGap:
    def test_no_instance_hamiltonian(self):
        inst = LocalHamInstance(1, [((0,), np.eye(2))], 0.1, 0.9)
        rep = red.verify_gap(inst, "ham2clique", seed=0)
        assert rep.verdict == "no-consistent"
        assert rep.target["sampled_min_score"] >= rep.thresholds["b"] - 1e-6
        assert rep.violation is None

    @pytest.mark.parametrize("inst,reduction", [
        (LocalHamInstance(2, [], 0.0, 0.5), "ham2clique"),
        (QSatInstance(2, [], 0.5), "qsat2clique"),
    ])
    def test_empty_instances(self, inst, reduction):
        assert red.verify_gap(inst, reduction, seed=0).verdict == "yes-consistent"

    def test_empty_sat24(self):
        rep = red.verify_gap(Sat24Instance(2, []), "sat24entropy", seed=0, budgets={"oracle_samples": 2000})
        assert rep.verdict == "yes-consistent"

    def test_satisfiable_sat24(self):
        inst, _ = sat_instance()
        rep = red.verify_gap(inst, "sat24entropy", seed=1)
        assert rep.verdict == "yes-consistent"
        assert rep.target["min_entropy"] <= 2 + 1e-6
        assert rep.target["oracle_value"] >= 2 - 1e-6

    def test_qsat_yes(self):
        inst = QSatInstance(2, [((0, 1), la.projector(la.ket(3, 4)))], 0.5)
        assert red.verify_gap(inst, "qsat2clique", seed=0).verdict == "yes-consistent"

    def test_lift(self):
        rep = red.verify_gap(chn.dephasing_channel(2), "lift-holevo", seed=0,
                             budgets={"oracle_samples": 2000, "restarts": 4})
        assert rep.verdict == "yes-consistent"

    def test_violation_carries_witness(self):
        inst = LocalHamInstance(1, [((0,), np.eye(2))], 0.1, 0.9)
        # an impossible tolerance forces the no-side comparison to fail
        rep = red.verify_gap(inst, "ham2clique", seed=0, tolerances={"score": -1.0})
        assert rep.verdict == "inconclusive"
        assert rep.violation is not None and len(rep.violation["witness"]) == 2

    def test_promise_gap_is_inconclusive(self):
        inst = LocalHamInstance(1, [((0,), np.diag([0.5, 1.0]))], 0.2, 0.8)
        assert red.verify_gap(inst, "ham2clique", seed=0).verdict == "inconclusive"

    def test_report_fields(self):
        rep = red.verify_gap(LocalHamInstance(1, [((0,), P1)], 0.1, 0.9), "ham2clique", seed=4)
        d = rep.to_dict()
        for key in ("instance_digest", "seed", "budgets", "tolerances", "verdict", "tool_version", "channel"):
            assert key in d
        assert d["seed"] == 4 and d["verdict"] == "yes-consistent"

    def test_bad_arguments(self):
        with pytest.raises(TypeError):
            red.verify_gap(Sat24Instance(4, []), "ham2clique")
        with pytest.raises(ValueError):
            red.verify_gap(Sat24Instance(4, []), "nope")
        with pytest.raises(InvariantError):
            red.ReductionReport("x", "", 0, {}, {}, {}, {}, {}, {}, "maybe")
