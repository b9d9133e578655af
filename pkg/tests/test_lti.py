import math

import numpy as np
import pytest

import dcgridcert as dc
from dcgridcert.errors import BadLineParams, NotSPR, PoleHit
from dcgridcert.lti import series_integrator, to_statespace


def test_rl_eval_points():
    line = dc.build_line("rl", r=1.0, l=1.0)
    assert dc.eval_frequency(line.tf, 0.0) == pytest.approx(1.0)
    assert dc.eval_frequency(line.tf, 1j) == pytest.approx((1 - 1j) / 2)
    assert dc.eval_frequency(line.tf, complex("inf")) == 0.0


def test_build_line_examples():
    line = dc.build_line("rl", r=2.0, l=0.5)
    assert np.allclose(line.tf.num, [1.0])
    assert np.allclose(line.tf.den, [2.0, 0.5])
    pole = dc.build_line("pole_at_origin", h=dc.RationalTransfer([1.0], [1.0]))
    assert dc.eval_frequency(pole.tf, 2j) == pytest.approx(1 / 2j)


def test_bad_line_params():
    with pytest.raises(BadLineParams):
        dc.build_line("rl", r=-1.0, l=1.0)
    with pytest.raises(BadLineParams):
        dc.build_line("rl", r=1.0, l=0.0)


def test_not_spr_detected():
    # real part negative at omega=5: rejected on the dense grid test
    tf = dc.RationalTransfer([3.0, -1.0], [1.0, 3.0, 1.0])
    assert (dc.eval_frequency(tf, 5j)).real < 0
    with pytest.raises(NotSPR):
        dc.build_line("spr", tf=tf)
    # a genuinely strictly positive-real rational is accepted
    ok = dc.build_line("spr", tf=dc.RationalTransfer([3.0, 1.0], [1.0, 3.0, 1.0]))
    assert ok.kind == "spr"


def test_pole_hit():
    tf = dc.RationalTransfer([1.0], [1.0, 1.0])
    with pytest.raises(PoleHit):
        dc.eval_frequency(tf, -1.0 + 0j)


def test_rl_strict_positive_real_on_grid():
    line = dc.build_line("rl", r=0.3, l=2e-3)
    for w in np.logspace(-2, 7, 200):
        val = dc.eval_frequency(line.tf, 1j * w)
        assert val.real > 0


def test_statespace_vs_rational_agreement():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(1, 5))
        den = np.real(np.poly(-np.abs(rng.normal(1, 2, n)) - 0.1))[::-1]
        m = int(rng.integers(0, n + 1))
        num = rng.normal(size=m + 1)
        tf = dc.RationalTransfer(num, den)
        ss = to_statespace(tf)
        for _ in range(6):
            s = complex(rng.normal(0, 5), rng.normal(0, 50))
            a = dc.eval_frequency(tf, s)
            b = dc.eval_frequency(ss, s)
            assert abs(a - b) <= 1e-10 * max(1.0, abs(a))
        assert dc.eval_frequency(ss, complex("inf")) == pytest.approx(tf.feedthrough)


def test_series_integrator_realization():
    tf = dc.RationalTransfer([2.0, 1.0], [3.0, 1.0])
    ss = series_integrator(to_statespace(tf))
    for s in (0.5 + 1j, 2j, -0.3 + 0.7j):
        want = dc.eval_frequency(tf, s) / s
        got = dc.eval_frequency(ss, s)
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_strictly_proper_at_inf_sentinel():
    tf = dc.RationalTransfer([1.0, 1.0], [1.0, 2.0, 1.0])
    assert dc.eval_frequency(tf, complex("inf")) == 0.0
    assert dc.eval_frequency(tf, complex(math.inf, 0.0)) == 0.0


def test_check_bus_assumption():
    ok = dc.check_bus_assumption(dc.StateSpace(-np.eye(2), np.zeros((2, 1)),
                                               np.zeros((1, 2)), [[0.0]]))
    assert ok.passed
    bad = dc.check_bus_assumption(dc.StateSpace([[0.1]], [[1.0]], [[1.0]], [[0.0]]))
    assert not bad.passed
    assert bad.offending.real.max() == pytest.approx(0.1)
