"""Compiled and pure-Python kernels must produce the same trajectories."""
import numpy as np
import pytest

from tensor_rmt import BACKEND
from tensor_rmt import _fppure as pure

compiled = pytest.importorskip(
    "tensor_rmt._fpcore", reason="compiled kernel not built")

CASES = [
    # xi, c1, c2, c3, st2, sm2, gcoef, gamma0, adapt
    (3.0 + 0j, 1 / 3, 1 / 3, 1 / 3, 1.0, 1.0, 0.0, 0.0, False),
    (5.0 + 1e-6j, 0.37, 0.23, 0.40, 1.0, 1.0, 6.0, 1.0, True),
    (-4.2 + 1e-4j, 0.2, 0.5, 0.3, 1.5, 0.7, 2.5, 0.5, True),
    (1.0 + 1.0j, 0.4, 0.3, 0.3, 0.8, 1.2, 0.0, 3.1, False),
]


def test_backend_constant():
    assert BACKEND in ("compiled", "pure-python")


@pytest.mark.parametrize("case", CASES)
def test_solve_point_agrees(case):
    a = pure.solve_point(*case, damping=0.5, tol=1e-13, max_sweeps=10000)
    b = compiled.solve_point(*case, damping=0.5, tol=1e-13, max_sweeps=10000)
    # same damped Jacobi trajectory: values agree to double rounding
    for x, y in zip(a[:4], b[:4]):
        assert complex(x) == pytest.approx(complex(y), abs=1e-14)
    assert a[4] == b[4]  # identical sweep count


@pytest.mark.parametrize("case", CASES[1:3])
def test_solve_point_warm_start_agrees(case):
    ginit = (-0.1 + 0.2j, -0.05 + 0.1j, -0.2 + 0.15j)
    a = pure.solve_point(*case, damping=0.5, tol=1e-13, max_sweeps=10000,
                         g_init=ginit)
    b = compiled.solve_point(*case, damping=0.5, tol=1e-13,
                             max_sweeps=10000, g_init=ginit)
    for x, y in zip(a[:4], b[:4]):
        assert complex(x) == pytest.approx(complex(y), abs=1e-14)


def test_solve_grid_agrees():
    xi = np.linspace(-6.0, 6.0, 101) + 1e-5j
    args = (0.37, 0.23, 0.40, 1.0, 1.0, 6.729815878649974, 6.729815878649974,
            False)
    a = pure.solve_grid(xi, *args, damping=0.5, tol=1e-13, max_sweeps=10000)
    b = compiled.solve_grid(xi, *args, damping=0.5, tol=1e-13,
                            max_sweeps=10000)
    for x, y in zip(a[:3], b[:3]):
        np.testing.assert_allclose(np.asarray(x), np.asarray(y), atol=1e-13)


def test_grid_matches_scalar_kernel():
    # lockstep grid must reproduce the scalar solve at each point
    xi = np.array([2.0 + 1e-6j, 4.5 + 1e-6j, -3.3 + 1e-6j])
    args = (1 / 3, 1 / 3, 1 / 3, 1.0, 1.0, 4.0, 1.0, True)
    g = pure.solve_grid(xi, *args, damping=0.5, tol=1e-13, max_sweeps=10000)
    for k, x in enumerate(xi):
        s = pure.solve_point(x, *args, damping=0.5, tol=1e-13,
                             max_sweeps=10000)
        assert complex(np.asarray(g[0])[k]) == pytest.approx(s[0], abs=1e-13)
        assert complex(np.asarray(g[2])[k]) == pytest.approx(s[2], abs=1e-13)
