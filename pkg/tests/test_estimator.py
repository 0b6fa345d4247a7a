import math

import numpy as np
import pytest

from relsub import corpus as C
from relsub import kernels
from relsub._kernels_py import epi_quotient_blocks as py_quotients
from relsub._kernels_py import pairwise_lipschitz as py_lip
from relsub.estimator import Schedule, epi_cloud, estimate, quotient_limsup_epi
from relsub.funcdsl import make_set
from relsub.intervals import hausdorff
from relsub.subdiff import subdiff


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(rho=1.5)
    with pytest.raises(ValueError):
        Schedule(steps=2)
    with pytest.raises(ValueError):
        Schedule.from_mapping({"bogus": 1})
    s = Schedule.from_mapping({"steps": 12, "epi_r_grid": [0, 0.5]})
    assert s.radii[-1] == pytest.approx(0.5 ** 11)
    assert Schedule.from_mapping(s.to_json()) == s


def test_phase_depends_only_on_seed():
    assert Schedule(seed=3).phase == Schedule(seed=3).phase
    assert Schedule(seed=3).phase != Schedule(seed=4).phase


def test_quotient_sign():
    # no regular subgradient of -|x| at 0 on (-inf, 0]; 0.5 is one for |x| at 0
    omega = make_set("(-inf,0]")
    assert quotient_limsup_epi(C.NEG_ABS, omega, 0.0, 0.0) > 0.1
    assert quotient_limsup_epi(C.ABS, make_set("R"), 0.0, 0.5) <= 1e-9


def test_isolated_epigraph_point():
    cloud = epi_cloud(C.ISOLATED, make_set("R"), 0.0)
    assert cloud.isolated


@pytest.mark.parametrize("name,kind,eps", [
    ("cube_third@0.5", "eps_regular", 0.1),
    ("neg_abs@0", "limiting", 0.0),
    ("abs@0", "eps_regular", 0.0),
    ("jump_affine@0", "plain", 0.0),
])
def test_estimate_tracks_exact(name, kind, eps):
    case = next(c for c in C.TRIPLES if c.name == name)
    ex = subdiff(case.f, case.omega, case.xbar, kind, eps).set
    es = estimate(case.f, case.omega, case.xbar, kind, eps).set
    assert hausdorff(ex, es) <= 1e-3
    assert (ex.left_unbounded, ex.right_unbounded) == (es.left_unbounded, es.right_unbounded)


def test_estimate_reports_tolerance():
    out = estimate(C.CUBE_THIRD, make_set("[0,1]"), 0.5, "eps_regular", 0.0)
    assert not out.is_exact and out.tol > 0
    assert out.set.distance(0.25) <= 1e-3


# -- kernels ------------------------------------------------------------------------

def _blocks(rng):
    starts = np.array([0, 5, 12, 30], dtype=np.int64)
    return rng.normal(size=(30, 1)), rng.normal(size=30), starts, rng.normal(size=(7, 1))


def test_backends_agree():
    if kernels.BACKEND != "cython":
        pytest.skip("compiled extension not built")
    from relsub import _kernels
    rng = np.random.default_rng(1)
    args = _blocks(rng)
    np.testing.assert_allclose(kernels.epi_quotient_blocks(*args, impl=_kernels),
                               py_quotients(*args), rtol=0, atol=1e-15)
    X = np.sort(rng.uniform(-1, 1, 200))[:, None]
    F = np.abs(X[:, 0])
    assert kernels.pairwise_lipschitz(X, F, impl=_kernels) == pytest.approx(py_lip(X, F), rel=1e-15)


def test_pairwise_lipschitz_reference():
    X = np.array([[0.0], [0.5], [2.0]])
    F = np.array([0.0, 1.0, 1.5])
    assert py_lip(X, np.ascontiguousarray(F)) == pytest.approx(2.0)
    assert math.isclose(kernels.pairwise_lipschitz(X, F), 2.0)


def test_epi_quotient_reference():
    rng = np.random.default_rng(0)
    dx, dr, starts, xs = _blocks(rng)
    out = py_quotients(dx, dr, starts, xs)
    assert out.shape == (len(xs), len(starts) - 1)
    # brute force for one block and functional
    d = np.hypot(dx[5:12, 0], dr[5:12])
    q = (xs[2, 0] * dx[5:12, 0] - dr[5:12]) / d
    assert out[2, 1] == pytest.approx(q.max())


def test_backend_is_known():
    assert kernels.BACKEND in {"cython", "numpy"}
