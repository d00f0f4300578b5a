import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

import slwave as sw
from slwave.exceptions import (
    NonNegativityViolatedError,
    RefusedResolutionError,
    SpecNotSmoothError,
)
from slwave.mollify import SupportEscapeWarning, net_norm, sample_spec, write_net_csv


@pytest.fixture(scope="module")
def grid4095():
    return sw.make_grid(4095)


@pytest.fixture(scope="module")
def kernel():
    return sw.MollifierKernel()


EPS7 = 0.2 * 0.5 ** np.arange(7)


def test_kernel_is_admissible(kernel):
    y = np.linspace(-2, 2, 4001)
    vals = kernel(y)
    assert np.all(vals >= 0)
    assert np.all(vals[np.abs(y) >= 1.0] == 0.0)
    mass, _ = quad(lambda t: float(kernel(np.array([t]))[0]), -1, 1, limit=200)
    assert abs(mass - 1.0) < 1e-10


def test_offset_kernel_is_admissible_and_distinct(kernel):
    k2 = sw.MollifierKernel(offset=0.5)
    y = np.linspace(-2, 2, 4001)
    vals = k2(y)
    assert np.all(vals >= 0)
    assert np.all(vals[(y <= -1.0) | (y >= 1.0)] == 0.0)
    lo, hi = k2.support
    mass, _ = quad(lambda t: float(k2(np.array([t]))[0]), lo, hi, limit=200)
    assert abs(mass - 1.0) < 1e-10
    assert np.abs(k2(y) - kernel(y)).max() > 0.1


def test_kernel_rejects_bad_offset():
    with pytest.raises(ValueError):
        sw.MollifierKernel(offset=1.0)


def test_mollify_eps_range(grid4095, kernel):
    d = sw.DiracDelta(0.5)
    with pytest.raises(ValueError):
        sw.mollify(d, kernel, 1.5, grid4095)
    with pytest.raises(ValueError):
        sw.mollify(d, kernel, 0.0, grid4095)
    with pytest.raises(RefusedResolutionError):
        sw.mollify(d, kernel, 4 * grid4095.h, grid4095)


def test_delta_sup_and_mass(grid4095, kernel):
    eps = 0.05
    f = sw.mollify(sw.DiracDelta(0.5), kernel, eps, grid4095)
    assert f.sup_norm() == pytest.approx(kernel.peak() / eps, rel=1e-12)
    mass = grid4095.h * f.values.sum()
    assert abs(mass - 1.0) < 1e-6


def test_delta_support_escape_is_flagged(grid4095, kernel):
    with pytest.warns(SupportEscapeWarning):
        f = sw.mollify(sw.DiracDelta(0.05), kernel, 0.2, grid4095)
    mass = grid4095.h * f.values.sum()
    assert mass < 1.0 - 1e-3


def test_delta_power_sup(grid4095, kernel):
    eps = 0.05
    f = sw.mollify(sw.DiracPower(0.5, 2), kernel, eps, grid4095)
    assert f.sup_norm() == pytest.approx((kernel.peak() / eps) ** 2, rel=1e-12)


def test_smooth_constant_convolution(kernel):
    g = sw.make_grid(511)
    f = sw.mollify(sw.Smooth(lambda x: np.ones_like(x)), kernel, 0.1, g)
    inside = (g.nodes >= 0.1) & (g.nodes <= 0.9)
    assert np.abs(f.values[inside] - 1.0).max() < 1e-10
    # mass escapes near the boundary under the zero extension (about half
    # the kernel hangs over the edge at the first node)
    assert f.values[0] < 0.55


def test_smooth_convolution_second_order(kernel):
    g = sw.make_grid(2047)
    target = sw.sample_function(lambda x: np.sin(np.pi * x), g)
    window = (g.nodes >= 0.2) & (g.nodes <= 0.8)
    devs, epss = [], [0.08, 0.04, 0.02]
    for eps in epss:
        f = sw.mollify(sw.Smooth(lambda x: np.sin(np.pi * x)), kernel, eps, g)
        devs.append(np.abs((f.values - target.values)[window]).max())
    from slwave.fitting import fit_loglog

    slope, _, _ = fit_loglog(epss, devs)
    assert slope >= 1.9


def test_sum_spec(grid4095, kernel):
    spec = sw.SpecSum(
        [(2.0, sw.DiracDelta(0.25)), (1.0, sw.Smooth(lambda x: np.ones_like(x)))],
        nonneg_required=True,
    )
    f = sw.mollify(spec, kernel, 0.05, grid4095)
    mass = grid4095.h * f.values.sum()
    assert mass == pytest.approx(3.0, abs=2e-2)


def test_build_net_sup_doubles_each_level(grid4095, kernel):
    net = sw.build_net(sw.DiracDelta(0.5), kernel, EPS7, grid4095)
    assert len(net.members) == 7
    sups = np.array([m.sup_norm() for m in net.members])
    np.testing.assert_allclose(sups[1:] / sups[:-1], 2.0, rtol=1e-12)


def test_build_net_validations(grid4095, kernel):
    d = sw.DiracDelta(0.5)
    with pytest.raises(ValueError):
        sw.build_net(d, kernel, [], grid4095)
    with pytest.raises(ValueError):
        sw.build_net(d, kernel, [0.1, 0.2], grid4095)
    with pytest.raises(ValueError):
        sw.build_net(d, kernel, [1.5, 0.7], grid4095)


def test_build_net_nonneg_violation(grid4095, kernel):
    lying_spec = sw.Smooth(lambda x: np.sin(2 * np.pi * x), nonneg_required=True)
    with pytest.raises(NonNegativityViolatedError):
        sw.build_net(lying_spec, kernel, [0.1, 0.05], grid4095)


def test_nonneg_nets_stay_nonneg(grid4095, kernel):
    spec = sw.SpecSum(
        [(1.0, sw.DiracDelta(0.3)), (0.5, sw.Smooth(lambda x: x, nonneg_required=True))],
        nonneg_required=True,
    )
    net = sw.build_net(spec, kernel, EPS7, grid4095)
    for m in net.members:
        assert m.values.min() >= 0.0


def test_monotone_norms_delta_net(grid4095, kernel):
    net = sw.build_net(sw.DiracDelta(0.5), kernel, EPS7, grid4095)
    for kind in ("sup", "L2", "H2"):
        norms = [net_norm(m, kind) for m in net.members]
        assert np.all(np.diff(norms) > 0)


def test_mass_preservation_across_ladder(grid4095, kernel):
    eps5 = 0.2 * 0.5 ** np.arange(5)
    net = sw.build_net(sw.DiracDelta(0.5), kernel, eps5, grid4095)
    for m in net.members:
        mass = grid4095.h * m.values.sum()
        assert 1 - 1e-6 <= mass <= 1 + 1e-6


def test_fit_moderateness_delta(grid4095, kernel):
    net = sw.build_net(sw.DiracDelta(0.5), kernel, EPS7, grid4095)
    rep = sw.fit_moderateness(net, "sup")
    assert abs(rep.fitted_N - 1.0) <= 0.05
    rep_l2 = sw.fit_moderateness(net, "L2")
    assert abs(rep_l2.fitted_N - 0.5) <= 0.05


def test_fit_moderateness_delta_power(grid4095, kernel):
    net = sw.build_net(sw.DiracPower(0.5, 2), kernel, EPS7, grid4095)
    rep = sw.fit_moderateness(net, "sup")
    assert abs(rep.fitted_N - 2.0) <= 0.05


def test_fit_moderateness_smooth(grid4095, kernel):
    net = sw.build_net(sw.Smooth(lambda x: np.sin(np.pi * x)), kernel, EPS7, grid4095)
    rep = sw.fit_moderateness(net, "sup")
    assert rep.fitted_N <= 0.05


def test_fit_moderateness_needs_three_members(grid4095, kernel):
    net = sw.build_net(sw.DiracDelta(0.5), kernel, [0.1, 0.05], grid4095)
    with pytest.raises(ValueError):
        sw.fit_moderateness(net, "sup")


def test_check_negligible_identical(grid4095, kernel):
    net = sw.build_net(sw.DiracDelta(0.5), kernel, EPS7, grid4095)
    rep = sw.check_negligible(net, net, "L2")
    assert rep.fitted_order == math.inf
    assert all(d == 0.0 for _, d in rep.table)


def test_check_negligible_two_kernels_smooth(grid4095, kernel):
    # both nets converge to f at the mollification rate, so their difference
    # decays at the unit rate; the finite ladder reads that slope from below
    # (per-interval orders 0.98 -> 1.000), hence the fit tolerance
    eps = 0.1 * 0.5 ** np.arange(5)
    spec = sw.Smooth(lambda x: 1.0 - np.cos(2 * np.pi * x))
    net_a = sw.build_net(spec, kernel, eps, grid4095)
    net_b = sw.build_net(spec, sw.MollifierKernel(offset=0.4), eps, grid4095)
    rep = sw.check_negligible(net_a, net_b, "L2")
    assert rep.fitted_order >= 0.95
    assert abs(rep.fitted_order - 1.0) <= 0.05


def test_check_negligible_distinct_deltas(grid4095, kernel):
    net_a = sw.build_net(sw.DiracDelta(0.4), kernel, EPS7, grid4095)
    net_b = sw.build_net(sw.DiracDelta(0.6), kernel, EPS7, grid4095)
    rep = sw.check_negligible(net_a, net_b, "sup")
    assert rep.fitted_order <= 0.05


def test_check_negligible_requires_matching_ladder(grid4095, kernel):
    net_a = sw.build_net(sw.DiracDelta(0.5), kernel, EPS7, grid4095)
    net_b = sw.build_net(sw.DiracDelta(0.5), kernel, EPS7[:-1], grid4095)
    with pytest.raises(ValueError):
        sw.check_negligible(net_a, net_b, "sup")


def test_second_difference_of_sine():
    g = sw.make_grid(255)
    f = sw.sample_function(lambda x: np.sin(np.pi * x), g)
    d2 = sw.second_difference(f)
    exact = -np.pi**2 * np.sin(np.pi * g.nodes)
    assert np.abs(d2.values - exact).max() < 1e-2


def test_sample_spec_refuses_singular(grid4095):
    with pytest.raises(SpecNotSmoothError):
        sample_spec(sw.DiracDelta(0.5), grid4095)


def test_spec_validation():
    with pytest.raises(ValueError):
        sw.DiracDelta(0.0)
    with pytest.raises(ValueError):
        sw.DiracPower(0.5, 1)
    with pytest.raises(ValueError):
        sw.SpecSum([(-1.0, sw.DiracDelta(0.5))], nonneg_required=True)
    with pytest.raises(ValueError):
        sw.SpecSum([])


def test_net_csv_export(tmp_path, grid4095, kernel):
    net = sw.build_net(sw.DiracDelta(0.5), kernel, EPS7[:4], grid4095)
    path = tmp_path / "net.csv"
    write_net_csv(net, path)
    lines = path.read_text().splitlines()
    header = json.loads(lines[0][2:])
    assert header["spec"]["kind"] == "dirac"
    assert header["kernel"]["offset"] == 0.0
    assert lines[1] == "eps,sup_norm,l2_norm,h2_norm"
    assert len(lines) == 2 + 4
    first = lines[2].split(",")
    assert float(first[0]) == EPS7[0]
