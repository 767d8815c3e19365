from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopt.bench import (
    ForceDeflectionCurve,
    TrussError,
    TrussProblem,
    compute_cfe,
    compute_sea,
    generate_tbpt_dataset,
    read_curve,
    stiffness_matrix,
    synthetic_dataset,
    truss_analyze,
    truss_solve,
    write_curve,
)
from hopt.bench.synthetic import family, ground_truth
from hopt.bench.truss import KIP
from hopt.data import DatasetFormatError
from oracles import force_method_displacement, riemann

TEN_BAR = TrussProblem.ten_bar()
MID = np.full(10, 0.5 * (0.6e-4 + 225.8e-4))


def curve_from(fn, stroke, n, mass=1.0):
    x = np.linspace(0.0, stroke, n)
    return ForceDeflectionCurve(x, fn(x), mass)


# ---------------------------------------------------------------- truss


def test_default_geometry():
    assert TEN_BAR.n_members == 10
    assert TEN_BAR.loads[1, 1] == TEN_BAR.loads[3, 1] == -100 * KIP
    assert -100 * KIP == pytest.approx(-444822.16, rel=1e-6)
    assert TEN_BAR.nodes[0, 0] == pytest.approx(18.288)


@pytest.mark.parametrize("k", [0.5, 2.0, 7.3, 1e-3])
def test_area_scaling_homogeneity(k):
    rng = np.random.default_rng(int(k * 1000))
    a = rng.uniform(1e-4, 200e-4, 10)
    d, dk = truss_solve(TEN_BAR, a), truss_solve(TEN_BAR, k * a)
    assert dk == pytest.approx(d / k, rel=1e-10, abs=0)


def test_two_bar_method_of_joints():
    a, b, P, E = 3.0, 4.0, 50e3, 200e9
    A1, A2 = 2e-4, 3e-4
    prob = TrussProblem(
        nodes=[(a, 0.0), (0.0, 0.0), (0.0, b)],
        members=[(0, 1), (0, 2)],
        E=E,
        supports=[(False, False), (True, True), (True, True)],
        loads=[(0.0, -P), (0.0, 0.0), (0.0, 0.0)],
        response_node=0,
    )
    L2 = np.hypot(a, b)
    sol = truss_analyze(prob, [A1, A2])
    assert sol.axial_forces[1] == pytest.approx(P * L2 / b, rel=1e-10)
    assert sol.axial_forces[0] == pytest.approx(-P * a / b, rel=1e-10)
    expected = P * ((a / b) ** 2 * a / (E * A1) + (L2 / b) ** 2 * L2 / (E * A2))
    assert truss_solve(prob, [A1, A2]) == pytest.approx(expected, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_ten_bar_matches_force_method(seed):
    areas = MID if seed == 0 else np.random.default_rng(seed).uniform(0.6e-4, 225.8e-4, 10)
    for node in (0, 1, 2, 3):
        dsm = truss_analyze(TEN_BAR, areas).downward(node)
        oracle = force_method_displacement(TEN_BAR, areas, node)
        assert dsm == pytest.approx(oracle, rel=1e-8)


def test_stiffness_symmetric_and_positive_definite():
    K = stiffness_matrix(TEN_BAR, MID)
    assert np.max(np.abs(K - K.T)) <= 1e-12 * np.max(np.abs(K))
    free = TEN_BAR.free_dofs
    assert np.linalg.eigvalsh(K[np.ix_(free, free)]).min() > 0


@pytest.mark.parametrize("seed", range(5))
def test_equilibrium_and_energy_balance(seed):
    areas = np.random.default_rng(seed).uniform(0.6e-4, 225.8e-4, 10)
    sol = truss_analyze(TEN_BAR, areas)
    scale = np.abs(TEN_BAR.loads).sum()
    resid = (sol.reactions + TEN_BAR.loads).sum(axis=0)
    assert np.all(np.abs(resid) <= 1e-8 * scale)
    work = 0.5 * np.sum(TEN_BAR.loads * sol.displacements)
    L = np.linalg.norm(TEN_BAR.nodes[TEN_BAR.members[:, 1]] - TEN_BAR.nodes[TEN_BAR.members[:, 0]], axis=1)
    strain = 0.5 * np.sum(sol.axial_forces**2 * L / (TEN_BAR.E * areas))
    assert work == pytest.approx(strain, rel=1e-8)


def test_unstable_structure_raises():
    sup = np.zeros((6, 2), dtype=bool)
    sup[5] = True  # one pinned node cannot stop rigid rotation
    prob = TrussProblem.from_dict({"supports": sup.tolist()})
    with pytest.raises(TrussError):
        truss_solve(prob, MID)


def test_invalid_inputs():
    with pytest.raises(TrussError):
        truss_solve(TEN_BAR, MID[:9])
    with pytest.raises(TrussError):
        truss_solve(TEN_BAR, -MID)
    with pytest.raises(TrussError):
        TrussProblem.from_dict({"colour": "red"})
    with pytest.raises(TrussError):
        TrussProblem.from_dict({"members": [[0, 9]], "E": 70e9})
    with pytest.raises(TrussError, match="E needs"):
        TrussProblem.from_dict({"members": [[0, 1]]})


def test_truss_config_round_trip(tmp_path):
    import json

    p = tmp_path / "truss.json"
    p.write_text(json.dumps({"E": 70e9, "loads": (TEN_BAR.loads * 2).tolist()}))
    prob = TrussProblem.load(p)
    # doubling loads and scaling modulus scales the response linearly
    assert truss_solve(prob, MID) == pytest.approx(2 * 68.95 / 70 * truss_solve(TEN_BAR, MID), rel=1e-10)


# ---------------------------------------------------------------- tbpt dataset


def test_tbpt_dataset_deterministic():
    a, b = generate_tbpt_dataset(50, seed=3), generate_tbpt_dataset(50, seed=3)
    assert a.digest() == b.digest()
    assert a.digest() != generate_tbpt_dataset(50, seed=4).digest()


def test_tbpt_minimum_sample_size():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        generate_tbpt_dataset(30, seed=0)
    with pytest.warns(UserWarning, match="minimum"):
        generate_tbpt_dataset(29, seed=0)


def test_tbpt_thousand_rows():
    ds = generate_tbpt_dataset(1000, seed=0)
    assert ds.features.shape == (1000, 10) and ds.responses.shape == (1000,)
    assert ds.features.min() == 0 and ds.features.max() == 1
    assert ds.responses.min() == 0 and ds.responses.max() == 1
    raw = ds.feature_normalizer.inverse(ds.features)
    lo, hi = TEN_BAR.area_bounds
    for j in range(10):
        u = np.sort((raw[:, j] - lo) / (hi - lo) * 1000)
        k = np.arange(1000)
        assert np.all(u >= k - 1e-6) and np.all(u <= k + 1 + 1e-6)
    d = ds.response_normalizer.inverse(ds.responses[:, None]).ravel()
    assert sorted(ds.meta["infeasible_rows"]) == np.flatnonzero(d > 0.60).tolist()


def test_tbpt_response_matches_solver():
    ds = generate_tbpt_dataset(30, seed=1)
    raw = ds.feature_normalizer.inverse(ds.features)
    d = ds.response_normalizer.inverse(ds.responses[:, None]).ravel()
    for i in range(0, 30, 7):
        assert d[i] == pytest.approx(truss_solve(TEN_BAR, raw[i]), rel=1e-12)


# ---------------------------------------------------------------- synthetic


@pytest.mark.parametrize("kind", ["smooth", "mixed", "discontinuous"])
def test_synthetic_determinism_and_truth(kind):
    a = synthetic_dataset(kind, 120, seed=5)
    assert a.digest() == synthetic_dataset(kind, 120, seed=5).digest()
    np.testing.assert_allclose(ground_truth(a), a.responses, atol=1e-12)
    noisy = synthetic_dataset(kind, 120, noise_sd=0.05, seed=5)
    assert np.max(np.abs(ground_truth(noisy) - noisy.responses)) > 1e-3
    assert a.meta["complexity"] == family(kind).tags()


def test_discontinuous_jump():
    ds = synthetic_dataset("discontinuous", 200, seed=0)
    x = np.array([[0.5, 0.3, 0.4, 0.6], [0.5 + 1e-9, 0.3, 0.4, 0.6]])
    y = family("discontinuous").truth(x)
    jump = np.diff(ds.response_normalizer.transform(y[:, None]).ravel())[0]
    assert jump >= 0.3


def test_mixed_levels_snapped():
    ds = synthetic_dataset("mixed", 100, seed=1)
    raw = ds.feature_normalizer.inverse(ds.features)
    assert set(np.round(raw[:, 2] * 4, 9)) <= {0, 1, 2, 3, 4}
    assert set(np.round(raw[:, 3] * 2, 9)) == {0, 1, 2}


def test_synthetic_errors():
    with pytest.raises(ValueError):
        synthetic_dataset("wiggly", 10)
    with pytest.raises(ValueError):
        synthetic_dataset("smooth", 10, noise_sd=-1)


# ---------------------------------------------------------------- SEA / CFE


def test_constant_force_example():
    c = ForceDeflectionCurve(np.array([0.0, 0.2]), np.array([10e3, 10e3]), 2.0)
    assert compute_sea(c) == pytest.approx(1000.0, rel=1e-15)
    assert compute_cfe(c) == pytest.approx(1.0, rel=1e-15)


def test_linear_ramp_cfe():
    c = curve_from(lambda x: 5e4 * x, 0.1, 11)
    assert compute_cfe(c) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_piecewise_curve_matches_riemann_oracle(seed):
    rng = np.random.default_rng(seed)
    x = np.concatenate([[0.0], np.sort(rng.uniform(0, 0.3, 40))])
    f = rng.uniform(0, 8e4, x.size)
    c = ForceDeflectionCurve(x, f, float(rng.uniform(0.5, 5)))
    e = riemann(x, f)
    assert compute_sea(c) == pytest.approx(e / c.mass, rel=1e-6)
    assert compute_cfe(c) == pytest.approx(e / x[-1] / f.max(), rel=1e-6)


def test_refinement_invariance():
    fn = lambda x: 4e4 * (1 - np.exp(-60 * x)) + 5e3 * np.sin(40 * x) ** 2  # noqa: E731
    coarse, fine = curve_from(fn, 0.25, 1001), curve_from(fn, 0.25, 2001)
    assert compute_sea(fine) == pytest.approx(compute_sea(coarse), rel=1e-4)
    assert compute_cfe(fine) == pytest.approx(compute_cfe(coarse), rel=1e-4)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1e5), min_size=2, max_size=30), st.floats(0.1, 10))
def test_cfe_in_unit_interval(forces, mass):
    if max(forces) == 0:
        return
    c = ForceDeflectionCurve(np.linspace(0, 0.2, len(forces)), np.array(forces), mass)
    assert 0 <= compute_cfe(c) <= 1 + 1e-12
    assert compute_sea(c) >= 0


def test_curve_validation():
    with pytest.raises(ValueError):
        ForceDeflectionCurve(np.array([0.1, 0.2]), np.array([1.0, 1.0]), 1.0)
    with pytest.raises(ValueError):
        ForceDeflectionCurve(np.array([0.0, 0.2, 0.1]), np.array([1.0, 1.0, 1.0]), 1.0)
    with pytest.raises(ValueError):
        ForceDeflectionCurve(np.array([0.0, 0.2]), np.array([1.0, -1.0]), 1.0)
    with pytest.raises(ValueError):
        ForceDeflectionCurve(np.array([0.0, 0.2]), np.array([1.0, 1.0]), 0.0)
    with pytest.raises(ValueError):
        compute_cfe(ForceDeflectionCurve(np.array([0.0, 0.2]), np.array([0.0, 0.0]), 1.0))


def test_curve_io(tmp_path):
    c = curve_from(lambda x: 3e4 * np.sqrt(x), 0.15, 57, mass=1.7)
    p = tmp_path / "curve.csv"
    write_curve(c, p)
    back = read_curve(p)
    assert np.array_equal(back.displacement, c.displacement) and np.array_equal(back.force, c.force)
    assert back.mass == c.mass
    p.write_text("displacement_m,force_N\n0,1\n0.1,x\n")
    with pytest.raises(DatasetFormatError, match="line 3"):
        read_curve(p)
