import json
import math

import numpy as np
import pytest

import rsplab

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def test_max_entangled_marginal():
    phi = rsplab.max_entangled(3).amplitudes
    rho = np.outer(phi, phi.conj())
    np.testing.assert_allclose(rsplab.partial_trace(rho, "A", 3, 3), np.eye(3) / 3, atol=1e-12)


def test_shift_family_teleports():
    proto = rsplab.shift_family(3)
    assert proto.n == 9
    assert proto.classical_cost_bits == pytest.approx(math.log2(9))
    for seed in range(10):
        t = rsplab.run_rsp(rsplab.haar_random_state(3, seed), proto, seed)
        assert t.fidelity == pytest.approx(1.0, abs=1e-9)
        assert 1 <= t.outcome <= 9
        assert json.loads(t.to_json())["outcome"] == t.outcome


def test_solver_verdicts():
    phi = rsplab.haar_random_state(2, 7)
    ok = rsplab.solve_probabilities([I2, SX, SY, SZ], phi)
    assert ok.feasible and ok.min_residual < 1e-10
    bad = rsplab.solve_probabilities([I2, SX, SY], phi)
    assert not bad.feasible and bad.probabilities is None


def test_build_povm_rejects_infeasible():
    proto = rsplab.make_protocol([I2, SX])
    phi = rsplab.haar_random_state(2, 3)
    with pytest.raises(rsplab.RspError):
        rsplab.build_povm(phi, proto, np.array([0.5, 0.5]))


def test_scan_and_bounds():
    report = json.loads(rsplab.feasibility_scan([I2, SX, SY], 50, seed=1, generic_margin=1e-6))
    assert report["feasible_fraction"] == 0.0
    bounds = rsplab.oblivious_bound_report(rsplab.shift_family(2).unitaries, np.full(4, 0.25))
    assert bounds["is_identity"]


def test_bloch_reduction():
    phi = rsplab.haar_random_state(2, 11)
    chi = rsplab.bloch_from_state(phi)
    us = [I2, SX, SY]
    p = np.array([0.2, 0.3, 0.5])
    rs = [rsplab.rotation_from_unitary(u) for u in us]
    assert rsplab.rsp_residual(us, p, phi) * math.sqrt(2) == pytest.approx(rsplab.reduced_residual(rs, p, chi), abs=1e-12)
    m, det = rsplab.n3_matrix(chi)
    assert det == pytest.approx(4 * chi[0] * chi[1] * chi[2], abs=1e-12)
    assert det == pytest.approx(np.linalg.det(m), abs=1e-12)


def test_equatorial_rejects_pole():
    proto = rsplab.equatorial_protocol()
    with pytest.raises(rsplab.RspError):
        proto.probabilities(rsplab.PureState(np.array([1, 0], dtype=complex)))


def test_cli_entry_point():
    code, out, _ = rsplab.run_cli(["bounds", "--dim", "2"])
    assert code == 0
    assert json.loads(out)["is_identity"]
    code, _, _ = rsplab.run_cli(["demo-rsp", "--dim", "1"])
    assert code == 2


def test_invalid_state_raises():
    with pytest.raises(ValueError):
        rsplab.PureState(np.array([1, 1], dtype=complex))
