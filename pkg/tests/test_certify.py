import numpy as np
import pytest

from fdpareto import numlin
from fdpareto.beamform import mrt_weights
from fdpareto.certify import (
    SdpInstance,
    certify_instance,
    dual_certificate,
    kkt_check,
    rank_reduce,
    solve_sdp_via_reduction,
)
from oracles import dual_value_on_grid, sample_feasible_weights

HAND = dict(h_self=np.array([1.0, 2.0]), h_cross=np.array([1.0, 1.0]))


def hand_instance(z=1.0, p=1.0):
    return SdpInstance.from_channels(HAND["h_self"], HAND["h_cross"], z=z, p=p)


def random_instance(rng, m, z_frac=None):
    h_self = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    h_cross = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    p = float(rng.uniform(0.5, 2.0))
    z_max = p * float(np.linalg.norm(h_cross)) ** 2
    frac = float(rng.uniform(0.05, 0.95)) if z_frac is None else z_frac
    return SdpInstance.from_channels(h_self, h_cross, z=frac * z_max, p=p)


def feasible_covariance(rng, inst, rank):
    """Random PSD q with tr(q) <= p; the instance target is set to tr(A q)."""
    m = inst.dim
    while True:
        g = rng.standard_normal((m, rank)) + 1j * rng.standard_normal((m, rank))
        q = numlin.hermitianize(g @ g.conj().T)
        q *= float(rng.uniform(0.3, 1.0)) * inst.p / float(np.trace(q).real)
        z = float(np.trace(inst.a @ q).real)
        if z > 1e-9:
            return q, SdpInstance(c=inst.c, a=inst.a, z=z, p=inst.p)


class TestDualCertificate:
    def test_zero_target(self):
        cert = dual_certificate(hand_instance(z=0.0), primal_value=0.0)
        assert cert.dual_value == 0.0
        assert cert.gap == 0.0
        assert cert.lambda1 == 0.0 and cert.lambda2 == 0.0

    def test_hand_instance_strong_duality(self):
        # lambda1*z + p*min(0, lambda_min) peaks at lambda1 = 0.8 with value
        # 0.8 (det(C - 0.8 A) = 0), matching the hand-computed leakage.
        cert = dual_certificate(hand_instance(), primal_value=0.8)
        assert cert.dual_value == pytest.approx(0.8, abs=1e-6)
        assert abs(cert.gap) <= 1e-6
        grid = dual_value_on_grid(np.diag([1.0, 4.0]),
                                  np.ones((2, 2), dtype=complex), 1.0, 1.0,
                                  np.linspace(0.0, 2.0, 4001))
        assert cert.dual_value >= grid - 1e-6

    def test_scalar_c_at_max_z(self):
        rng = np.random.default_rng(1)
        h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        p = 1.5
        inst = SdpInstance.from_channels(np.ones(3), h,
                                         z=p * np.linalg.norm(h) ** 2, p=p)
        cert = dual_certificate(inst, primal_value=p)
        assert cert.dual_value == pytest.approx(p, rel=1e-6)
        assert abs(cert.gap) <= 1e-6 * p

    def test_beats_grid_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(15):
            inst = random_instance(rng, int(rng.integers(2, 5)))
            _, sol, cert, _ = certify_instance(inst)
            grid = dual_value_on_grid(inst.c, inst.a, inst.z, inst.p,
                                      np.linspace(0.0, 50.0, 2000))
            assert cert.dual_value >= grid - 1e-7
            assert cert.gap >= -1e-8 * max(1.0, sol.leakage)

    def test_lambda2_nonpositive_and_slack_psd(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            inst = random_instance(rng, 3)
            cert = dual_certificate(inst, primal_value=1.0)
            assert cert.lambda2 <= 0.0
            slack = inst.c - cert.lambda1 * inst.a - cert.lambda2 * np.eye(3)
            assert numlin.min_eigenvalue(slack) >= -1e-9

    def test_weak_duality_on_random_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            inst = random_instance(rng, 3)
            _, h_cross = inst.channels()
            w = sample_feasible_weights(rng, h_cross, inst.p, inst.z, 40)
            if w.shape[0] == 0:
                continue
            # convex mixtures are feasible and can have rank > 1
            t = rng.dirichlet(np.ones(min(3, w.shape[0])))
            q = sum(ti * np.outer(wi, wi.conj()) for ti, wi in zip(t, w))
            primal = float(np.trace(inst.c @ q).real)
            for _ in range(5):
                lam1 = float(rng.uniform(0.0, 20.0))
                lam_min = numlin.min_eigenvalue(inst.c - lam1 * inst.a)
                lam2 = min(0.0, lam_min) - float(rng.uniform(0.0, 2.0))
                assert primal >= lam1 * inst.z + lam2 * inst.p - 1e-9 * max(1.0, primal)

    def test_strong_duality_random_interior(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            inst = random_instance(rng, int(rng.integers(2, 5)))
            _, sol, cert, _ = certify_instance(inst)
            assert abs(cert.gap) <= 1e-6 * max(1.0, sol.leakage)

    def test_rejects_negative_primal(self):
        with pytest.raises(ValueError):
            dual_certificate(hand_instance(), primal_value=-1.0)


class TestKktCheck:
    def test_hand_instance_all_pass(self):
        inst = hand_instance()
        q, sol, cert, report = certify_instance(inst)
        assert report.passed, report.to_dict()
        assert report.complementarity_residual <= 1e-7

    def test_suboptimal_point_fails_complementarity(self):
        inst = hand_instance()
        _, _, cert, _ = certify_instance(inst)
        # feasible but ignores C: w along h_cross scaled to deliver z=1
        h = HAND["h_cross"].astype(complex)
        w = (np.sqrt(inst.z) / np.linalg.norm(h)) * (h / np.linalg.norm(h))
        q = np.outer(w, w.conj())
        report = kkt_check(inst, q, cert)
        assert report.primal_target_residual <= 1e-9
        assert report.complementarity_residual > 1e-3

    def test_zero_solution(self):
        inst = hand_instance(z=0.0)
        cert = dual_certificate(inst, 0.0)
        report = kkt_check(inst, np.zeros((2, 2)), cert)
        assert report.passed


class TestRankReduce:
    def test_hand_instance_single_step(self):
        # A from h=(1,0), q=I: the deflation direction is forced to the pure
        # off-diagonal, so one step lands on [[1,+-1],[+-1,1]].
        inst = SdpInstance.from_channels(np.array([1.0, 2.0]),
                                         np.array([1.0, 0.0]), z=1.0, p=2.0)
        trace = rank_reduce(inst, np.eye(2))
        assert len(trace.iterations) == 1
        q = trace.final_q
        assert numlin.numeric_rank(q, 1e-9) == 1
        assert q[0, 0].real == pytest.approx(1.0, abs=1e-12)
        assert np.trace(q).real == pytest.approx(2.0, abs=1e-12)
        assert abs(q[0, 1]) == pytest.approx(1.0, abs=1e-12)

    def test_rank_one_input_untouched(self):
        inst = hand_instance()
        w = np.array([0.8, 0.2])
        q = np.outer(w, w.conj())
        trace = rank_reduce(inst, q)
        assert trace.iterations == []
        assert np.allclose(trace.final_q, q)

    def test_zero_input(self):
        trace = rank_reduce(hand_instance(z=0.0), np.zeros((2, 2)))
        assert trace.iterations == []
        assert np.allclose(trace.final_q, 0.0)

    @pytest.mark.parametrize("rank", [2, 3])
    def test_random_covariances(self, rank):
        rng = np.random.default_rng(40 + rank)
        for _ in range(40):
            base = random_instance(rng, 3)
            q0, inst = feasible_covariance(rng, base, rank)
            z0 = float(np.trace(inst.a @ q0).real)
            t0 = float(np.trace(q0).real)
            c0 = float(np.trace(inst.c @ q0).real)
            trace = rank_reduce(inst, q0)
            q = trace.final_q
            assert len(trace.iterations) <= rank - 1
            assert numlin.numeric_rank(q, 1e-9) <= 1
            scale = max(1.0, abs(z0), abs(t0))
            assert abs(float(np.trace(inst.a @ q).real) - z0) <= 1e-9 * scale
            assert abs(float(np.trace(q).real) - t0) <= 1e-9 * scale
            assert numlin.min_eigenvalue(q) >= -1e-9 * max(1.0, t0)
            objs = [c0] + [obj for _, _, obj in trace.iterations]
            assert all(b <= a + 1e-9 * max(1.0, abs(a)) for a, b in zip(objs, objs[1:]))
            assert all(s > 0 for _, s, _ in trace.iterations)
            ranks = [r for r, _, _ in trace.iterations]
            assert ranks == sorted(ranks, reverse=True)

    def test_rejects_indefinite_input(self):
        with pytest.raises(ValueError):
            rank_reduce(hand_instance(), np.diag([1.0, -0.5]))


class TestSolveSdpViaReduction:
    def test_hand_instance(self):
        q = solve_sdp_via_reduction(hand_instance())
        w = np.array([0.8, 0.2])
        assert np.allclose(q, np.outer(w, w.conj()), atol=1e-10)

    def test_zero_target(self):
        q = solve_sdp_via_reduction(hand_instance(z=0.0))
        assert np.allclose(q, 0.0)

    def test_max_z_is_mrt(self):
        rng = np.random.default_rng(21)
        h_self = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        h_cross = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        p = 1.2
        inst = SdpInstance.from_channels(h_self, h_cross,
                                         z=p * np.linalg.norm(h_cross) ** 2, p=p)
        q = solve_sdp_via_reduction(inst)
        w = mrt_weights(h_cross, p)
        assert np.allclose(q, np.outer(w, w.conj()), atol=1e-6 * p)


class TestSdpInstanceValidation:
    def test_rejects_nondiagonal_c(self):
        with pytest.raises(ValueError):
            SdpInstance(c=np.ones((2, 2)), a=np.eye(2) * 0.0, z=0.0, p=1.0)

    def test_rejects_rank_two_a(self):
        with pytest.raises(ValueError):
            SdpInstance(c=np.eye(2), a=np.eye(2), z=0.5, p=1.0)

    def test_rejects_out_of_range_z(self):
        with pytest.raises(ValueError):
            SdpInstance.from_channels(np.ones(2), np.array([1.0, 0.0]), z=2.0, p=1.0)

    def test_channels_roundtrip(self):
        rng = np.random.default_rng(33)
        h_self = np.abs(rng.standard_normal(3))
        h_cross = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        inst = SdpInstance.from_channels(h_self, h_cross, z=0.1, p=1.0)
        hs, hc = inst.channels()
        assert np.allclose(hs, h_self, atol=1e-12)
        assert np.allclose(np.outer(hc, hc.conj()), inst.a, atol=1e-9)
