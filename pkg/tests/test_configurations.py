import numpy as np
import pytest

from rieszpoints import (
    CoincidentPointsError,
    FeketeSearchParams,
    InfeasiblePointError,
    KernelSpec,
    LejaState,
    PointConfig,
    ball,
    discrete_energy,
    distance_to_set,
    fekete_search,
    fekete_search_run,
    leja_next,
    leja_sequence,
    random_config,
    sample_candidates,
    sphere_surface,
)
from rieszpoints.oracles import reference_energy

SPEC = KernelSpec(2.0, 3)
UNIT_SPHERE = sphere_surface([0.0, 0.0, 0.0], 1.0)
UNIT_BALL = ball([0.0, 0.0, 0.0], 1.0)

GOLDEN = np.sqrt(5.0) / 2.0 + 0.5


def known_optimum_energy(n):
    """Energies of the classical optimal sphere configurations, evaluated
    through the independent reference sum on exact coordinates."""
    if n == 2:
        pts = [[0, 0, 1.0], [0, 0, -1.0]]
    elif n == 3:
        pts = [[1.0, 0, 0], [-0.5, np.sqrt(3) / 2, 0], [-0.5, -np.sqrt(3) / 2, 0]]
    elif n == 4:
        pts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(3.0)
    elif n == 6:
        pts = np.vstack([np.eye(3), -np.eye(3)])
    elif n == 12:
        raw = []
        for a, b in [(0.0, 1.0), (0.0, -1.0)]:
            for i in range(3):
                for s in (1.0, -1.0):
                    v = np.zeros(3)
                    v[i] = s * GOLDEN
                    v[(i + 1) % 3] = b
                    raw.append(v)
        pts = np.array(raw) / np.sqrt(1.0 + GOLDEN ** 2)
    else:
        raise ValueError(n)
    return reference_energy(PointConfig(np.asarray(pts, dtype=float)), SPEC)


def test_fekete_two_points_antipodal():
    cfg = fekete_search(UNIT_SPHERE, SPEC, FeketeSearchParams(n=2, restarts=4, seed=0))
    assert discrete_energy(cfg, SPEC) == pytest.approx(0.5, abs=1e-6)
    assert np.dot(cfg.points[0], cfg.points[1]) == pytest.approx(-1.0, abs=1e-6)


def test_fekete_tetrahedron():
    cfg = fekete_search(UNIT_SPHERE, SPEC, FeketeSearchParams(n=4, restarts=4, seed=0))
    assert discrete_energy(cfg, SPEC) == pytest.approx(0.6123724356957945, abs=1e-4)


@pytest.mark.parametrize("n", [2, 3, 4, 6, 12])
def test_fekete_reproduces_known_optima(n):
    cfg = fekete_search(UNIT_SPHERE, SPEC, FeketeSearchParams(n=n, restarts=6, seed=1))
    assert discrete_energy(cfg, SPEC) == pytest.approx(known_optimum_energy(n), abs=1e-4)


def test_fekete_below_robin_constant():
    cfg = fekete_search(UNIT_SPHERE, SPEC, FeketeSearchParams(n=50, restarts=3, seed=2))
    assert discrete_energy(cfg, SPEC) < 1.0


def test_fekete_feasible_and_deterministic():
    params = FeketeSearchParams(n=20, restarts=2, seed=5)
    a = fekete_search(UNIT_BALL, SPEC, params)
    b = fekete_search(UNIT_BALL, SPEC, params)
    np.testing.assert_array_equal(a.points, b.points)
    assert np.all(distance_to_set(UNIT_BALL, a.points) <= 1e-9)


def test_fekete_beats_every_initial_config():
    run = fekete_search_run(UNIT_SPHERE, SPEC, FeketeSearchParams(n=15, restarts=5, seed=3))
    assert run.energy <= min(run.initial_energies)
    assert run.energy == discrete_energy(run.config, SPEC)


def test_fekete_parallel_restarts_match_serial():
    params = FeketeSearchParams(n=12, restarts=4, seed=9)
    serial = fekete_search_run(UNIT_SPHERE, SPEC, params, workers=1)
    threaded = fekete_search_run(UNIT_SPHERE, SPEC, params, workers=4)
    np.testing.assert_array_equal(serial.config.points, threaded.config.points)
    assert serial.energy == threaded.energy


def test_fekete_energies_nondecreasing_small_range():
    es = [
        fekete_search_run(UNIT_SPHERE, SPEC, FeketeSearchParams(n=n, restarts=4, seed=7)).energy
        for n in range(2, 11)
    ]
    assert all(b >= a - 1e-5 for a, b in zip(es, es[1:]))


def test_leja_next_antipode_of_single_point():
    state = LejaState(
        prefix=PointConfig([[0.0, 0.0, 1.0]]),
        candidates=sample_candidates(UNIT_SPHERE, 4096, seed=1),
        dim=3,
        set_model=UNIT_SPHERE,
    )
    nxt = leja_next(state, SPEC)
    np.testing.assert_allclose(nxt, [0.0, 0.0, -1.0], atol=1e-6)


def test_leja_next_equator_after_antipodal_pair():
    state = LejaState(
        prefix=PointConfig([[1.0, 0, 0], [-1.0, 0, 0]]),
        candidates=sample_candidates(UNIT_SPHERE, 10_000, seed=2),
        dim=3,
        set_model=UNIT_SPHERE,
    )
    nxt = leja_next(state, SPEC)
    assert abs(nxt[0]) < 1e-4
    assert np.linalg.norm(nxt) == pytest.approx(1.0, abs=1e-9)


def test_leja_next_candidates_equal_prefix_raises():
    prefix = PointConfig([[0.0, 0, 1.0], [1.0, 0, 0]])
    state = LejaState(prefix=prefix, candidates=np.array(prefix.points), dim=3, set_model=UNIT_SPHERE)
    with pytest.raises(CoincidentPointsError):
        leja_next(state, SPEC)


def test_leja_next_refinement_never_worse_than_grid():
    rng = np.random.default_rng(17)
    for trial in range(20):
        m = int(rng.integers(1, 9))
        prefix_pts = rng.normal(size=(m, 3))
        prefix_pts /= np.linalg.norm(prefix_pts, axis=1, keepdims=True)
        cands = sample_candidates(UNIT_SPHERE, 10_000, seed=trial)
        state = LejaState(PointConfig(prefix_pts), cands, 3, set_model=UNIT_SPHERE)
        x = leja_next(state, SPEC)
        val = np.sum(np.linalg.norm(x - prefix_pts, axis=1) ** -1.0)
        grid_min = np.min(np.sum(np.linalg.norm(cands[:, None, :] - prefix_pts, axis=2) ** -1.0, axis=1))
        assert val <= grid_min + 1e-15


def test_leja_sequence_basics():
    one = leja_sequence(UNIT_SPHERE, SPEC, 1, [0.0, 0, 1.0], seed=0)
    assert one.n == 1
    two = leja_sequence(UNIT_SPHERE, SPEC, 2, [0.0, 0, 1.0], seed=0)
    np.testing.assert_allclose(two.points[0], [0.0, 0, 1.0])
    np.testing.assert_allclose(two.points[1], [0.0, 0, -1.0], atol=1e-6)


def test_leja_sequence_prefix_incrementality():
    short = leja_sequence(UNIT_SPHERE, SPEC, 10, [0.0, 0, 1.0], candidate_count=512, seed=42)
    long = leja_sequence(UNIT_SPHERE, SPEC, 25, [0.0, 0, 1.0], candidate_count=512, seed=42)
    np.testing.assert_array_equal(short.points, long.points[:10])


def test_leja_sequence_energy_bound():
    L = leja_sequence(UNIT_SPHERE, SPEC, 100, [0.0, 0, 1.0], candidate_count=2048, seed=3)
    assert discrete_energy(L, SPEC) <= 1.0 + 1e-6
    assert np.all(distance_to_set(UNIT_SPHERE, L.points) <= 1e-9)


def test_leja_sequence_infeasible_start():
    with pytest.raises(InfeasiblePointError):
        leja_sequence(UNIT_SPHERE, SPEC, 5, [5.0, 0, 0], seed=0)


def test_random_config_deterministic_and_feasible():
    a = random_config(UNIT_BALL, 200, seed=4)
    b = random_config(UNIT_BALL, 200, seed=4)
    np.testing.assert_array_equal(a.points, b.points)
    assert np.all(distance_to_set(UNIT_BALL, a.points) <= 1e-9)
    assert random_config(UNIT_BALL, 1, seed=0).n == 1


def test_random_config_worse_than_fekete():
    rnd = random_config(UNIT_SPHERE, 200, seed=6)
    fek = fekete_search(UNIT_SPHERE, SPEC, FeketeSearchParams(n=200, restarts=1, max_iters=800, seed=6))
    e_rnd = discrete_energy(rnd, SPEC)
    assert np.isfinite(e_rnd)
    assert e_rnd > discrete_energy(fek, SPEC)
