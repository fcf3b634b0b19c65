import json
import os
import sys
from fractions import Fraction as F

import numpy as np
import pandas as pd
import pytest

BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))
sys.path.insert(0, BASE_DIR)

from privcon.core.augment import build_alg1, solve_p1d  # noqa: E402
from privcon.core.exactla import RationalMatrix, dot, eigen_magnitudes  # noqa: E402
from privcon.core.netgraph import from_matrix, period, read_graph  # noqa: E402
from privcon.core.simulate import (  # noqa: E402
    compare_traces,
    conserved_quantity,
    convergence_stats,
    run_matrix,
)
from privcon.tests.fixtures import (  # noqa: E402
    CYCLE3_A,
    CYCLE3_CONSENSUS,
    CYCLE3_X0,
    EXAMPLE1_XTILDE,
    EXAMPLE2_MEAN,
    EXAMPLE2_X0,
    EXAMPLE2_XTILDE,
    example2_matrix,
)

DATA_DIR = os.path.join(BASE_DIR, "data")


def periodic_gadget_system():
    g = read_graph(os.path.join(DATA_DIR, "two_agents.json"))
    return build_alg1(g, np.random.default_rng(1), min_agents=2, stochastic=True, x0=[0.9, 0.1])


def test_identity_never_mixes():
    still = run_matrix(RationalMatrix.identity(3), [1.0, 2.0, 3.0], 1e-9, 5)
    assert not still.converged
    assert still.rounds == 5
    assert np.all(still.states == still.states[0])
    assert still.consensus_value is None
    flat = run_matrix(RationalMatrix.identity(3), [2.0, 2.0, 2.0], 1e-9, 5)
    assert flat.converged
    assert flat.rounds == 0


def test_cycle3_converges_to_average():
    trace = run_matrix(CYCLE3_A, [float(x) for x in CYCLE3_X0], 1e-9, 1000)
    assert trace.converged
    assert trace.final_spread <= 1e-9
    assert trace.consensus_value == pytest.approx(float(CYCLE3_CONSENSUS), abs=1e-9)
    assert np.allclose(trace.states[0], [0.5, 1 / 3, 0.2])
    assert "converged" in trace.summary()


def test_trace_states_are_read_only():
    trace = run_matrix(CYCLE3_A, [float(x) for x in CYCLE3_X0], 1e-9, 10)
    with pytest.raises(ValueError):
        trace.states[0, 0] = 1.0


def test_example1_reference_state_converges():
    system = solve_p1d(CYCLE3_A, CYCLE3_X0)
    trace = run_matrix(system.ap, EXAMPLE1_XTILDE, 1e-12, 200)
    assert np.max(np.abs(trace.states[-1] - float(CYCLE3_CONSENSUS))) < 1e-4


def test_example2_reference_state_converges():
    system = solve_p1d(example2_matrix(), EXAMPLE2_X0)
    assert abs(float(dot(system.v_left, [F(x) for x in EXAMPLE2_XTILDE])) - EXAMPLE2_MEAN) < 1e-5
    trace = run_matrix(system.ap, EXAMPLE2_XTILDE, 1e-12, 500)
    assert np.max(np.abs(trace.states[-1] - EXAMPLE2_MEAN)) < 1e-4


def test_period_two_gadget_does_not_converge():
    system = periodic_gadget_system()
    assert period(from_matrix(system.ap)) == 2
    mags = eigen_magnitudes(system.ap)
    assert abs(mags[0] - 1) < 1e-9
    assert abs(mags[1] - 1) < 1e-9
    trace = run_matrix(system.ap, [float(x) for x in system.x_tilde0], 1e-9, 10_000)
    assert not trace.converged
    assert trace.rounds == 10_000
    assert trace.oscillation_suspected()
    assert "period-2 oscillation suspected" in trace.summary()


def test_convergence_stats():
    constant = run_matrix(RationalMatrix.identity(2), [0.3, 0.3], 1e-9, 3)
    stats = convergence_stats(constant, 0.3)
    assert set(stats.rounds_to.values()) == {0}

    target = float(CYCLE3_CONSENSUS)
    plain = run_matrix(CYCLE3_A, [float(x) for x in CYCLE3_X0], 1e-12, 300)
    system = solve_p1d(CYCLE3_A, CYCLE3_X0)
    augmented = run_matrix(system.ap, [float(x) for x in system.x_tilde0], 1e-12, 300)
    fast = convergence_stats(plain, target).rounds_to[1e-3]
    slow = convergence_stats(augmented, target).rounds_to[1e-3]
    assert fast is not None and slow is not None
    assert slow > fast

    osc = run_matrix(periodic_gadget_system().ap, [float(x) for x in periodic_gadget_system().x_tilde0], 1e-9, 500)
    assert all(v is None for v in convergence_stats(osc, 0.5).rounds_to.values())


def test_exact_mode_conserves_weighted_sum():
    system = solve_p1d(CYCLE3_A, CYCLE3_X0)
    trace = run_matrix(system.ap, system.x_tilde0, 1e-9, 30, exact=True)
    assert trace.mode == "matrix-exact"
    assert len(trace.exact_states) == trace.rounds + 1
    assert all(dot(system.v_left, x) == CYCLE3_CONSENSUS for x in trace.exact_states)


def test_float_conserved_quantity_drift():
    system = solve_p1d(example2_matrix(), EXAMPLE2_X0)
    trace = run_matrix(system.ap, [float(x) for x in system.x_tilde0], 1e-300, 500)
    q = conserved_quantity(trace, system.v_left)
    assert np.max(np.abs(q - q[0])) <= 1e-10


def test_compare_traces_zero_for_same_run():
    t1 = run_matrix(CYCLE3_A, [1.0, 0.0, 0.0], 1e-9, 50)
    t2 = run_matrix(CYCLE3_A, [1.0, 0.0, 0.0], 1e-9, 50)
    assert compare_traces(t1, t2) == 0.0


def test_trace_export(tmp_path):
    trace = run_matrix(CYCLE3_A, [1.0, 0.0, 0.0], 1e-300, 20)
    csv_path = trace.export_csv(tmp_path / "t.csv", max_rows=5)
    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == ["round", "state_0", "state_1", "state_2"]
    assert frame["round"].tolist() == [0, 5, 10, 15, 20]

    full = trace.export_csv(tmp_path / "full.csv", max_rows=None)
    assert len(pd.read_csv(full)) == 21

    data = json.loads(trace.export_json(tmp_path / "t.json", max_rows=5).read_text())
    assert data["stride"] == 5
    assert data["rows"] == [0, 5, 10, 15, 20]
    assert data["converged"] is False


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_matrix(CYCLE3_A, [1.0, 0.0, 0.0], 0, 10)
    with pytest.raises(ValueError):
        run_matrix(CYCLE3_A, [1.0, 0.0], 1e-9, 10)
    with pytest.raises(TypeError):
        run_matrix(np.eye(3), [1.0, 0.0, 0.0], 1e-9, 10, exact=True)
