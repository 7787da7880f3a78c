import math

import numpy as np
import pytest

from vortexcorr import (
    QuadratureSpec,
    Similarity,
    VortexConfiguration,
    adler_moser_chain,
    collinear_triple,
    config_from_adler_moser,
    correlation_A_eps,
    correlation_limit,
    cross_pair_truncated,
    default_epsilon_list,
    default_quadrature_spec,
    moebius_params,
    pair_integral,
    transform,
)
from vortexcorr.correlation import _excisions_for
from vortexcorr.quadrature import integrate_disk, integrate_excised_disk


@pytest.fixture(scope="module")
def cube_roots():
    return config_from_adler_moser(adler_moser_chain(2, [-1.0]))


# ------------------------------------------------------------------ moebius


def test_moebius_closed_form_at_04():
    mp = moebius_params(0.4)
    assert mp.a == pytest.approx(0.2, abs=1e-15)
    assert mp.b == pytest.approx(0.8, abs=1e-15)
    assert mp.r1 == pytest.approx(0.5, abs=1e-15)
    assert mp.r2 == pytest.approx(2.0, abs=1e-15)


def test_moebius_small_epsilon_asymptotics():
    mp = moebius_params(1e-3)
    assert abs(mp.a / 1e-6 - 1.0) < 1e-5
    assert abs(mp.b - (1.0 - 1e-6)) < 1e-11


def test_moebius_identities_random(rng):
    for _ in range(50):
        eps = float(rng.uniform(1e-3, 0.49))
        mp = moebius_params(eps)
        assert abs(mp.a * mp.b - eps * eps) <= 1e-13 * eps * eps
        assert abs(mp.a + mp.b - 1.0) <= 1e-13
        assert abs(mp.r1 * mp.r2 - 1.0) <= 1e-13
        assert mp.r1 < 1.0 < mp.r2


def test_moebius_round_trip(rng):
    mp = moebius_params(0.3)
    for _ in range(100):
        w = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if abs(1.0 + w) < 0.2:
            continue
        assert abs(mp.to_annulus(mp.from_annulus(w)) - w) <= 1e-13 * max(1.0, abs(w))


def test_moebius_maps_boundaries():
    eps = 0.2
    mp = moebius_params(eps)
    # the boundary circles land on the annulus radii
    assert abs(mp.to_annulus(eps)) == pytest.approx(mp.r1, rel=1e-13)
    assert abs(mp.to_annulus(1.0 - eps)) == pytest.approx(mp.r2, rel=1e-13)


def test_moebius_domain_errors():
    for bad in (0.0, 0.5, 0.7, -0.1):
        with pytest.raises(ValueError):
            moebius_params(bad)


# ------------------------------------------------------------ pair integral


def test_pair_integral_vanishes():
    spec = QuadratureSpec(epsilon=0.1, cutoff_radius=100.0, target_abs_error=1e-5)
    result = pair_integral(0.0, 1.0, 0.1, spec)
    assert result.converged
    assert result.value <= result.abs_error_estimate
    assert result.value < 1e-5


def test_pair_integral_homothety():
    spec = QuadratureSpec(epsilon=0.2, cutoff_radius=200.0, target_abs_error=1e-5)
    result = pair_integral(0.0, 2.0, 0.2, spec)
    assert result.converged
    assert result.value <= result.abs_error_estimate


def test_pair_integral_preconditions():
    spec = QuadratureSpec(epsilon=0.6, cutoff_radius=100.0)
    with pytest.raises(ValueError, match="half the pair separation"):
        pair_integral(0.0, 1.0, 0.6, spec)
    small = QuadratureSpec(epsilon=0.1, cutoff_radius=3.0)
    with pytest.raises(ValueError, match="cutoff_radius"):
        pair_integral(0.0, 1.0, 0.1, small)


def test_engine_against_contour_oracle():
    """Quadrature smoke test: the conjugation-free kernel over the two-disk
    domain has a closed form via boundary contour integrals."""
    eps = 0.15
    radius = 8.0

    def kernel(zs):
        return 1.0 / (zs**2 * (zs - 1.0) ** 2)

    excisions = _excisions_for([0j, 1 + 0j], eps)
    value, err, cells, converged = integrate_excised_disk(
        kernel, excisions, radius, 1e-9, 10**6
    )
    assert converged

    def circle_integral(center, r):
        n = 8192
        theta = 2.0 * np.pi * np.arange(n) / n
        z = center + r * np.exp(1j * theta)
        dz = 1j * r * np.exp(1j * theta) * (2.0 * np.pi / n)
        return np.sum(np.conj(z) * kernel(z) * dz)

    oracle = (
        circle_integral(0.0, radius)
        - circle_integral(0.0, eps)
        - circle_integral(1.0, eps)
    ) / 2j
    assert abs(value - oracle) < 1e-8
    # closed form by residues: 2 pi - 6 pi eps^2
    assert value.real == pytest.approx(2 * math.pi - 6 * math.pi * eps * eps, abs=1e-8)
    assert abs(value.imag) < 1e-10


# ----------------------------------------------------------------- A_eps


def test_single_vortex_is_exactly_zero():
    config = VortexConfiguration.from_pairs([(0.3, 2.0)])
    result = correlation_A_eps(config, QuadratureSpec(0.1, 50.0))
    assert result.value == 0.0
    assert result.abs_error_estimate == 0.0
    assert result.cells_used == 0


def test_a_eps_overlap_rejected():
    config = collinear_triple()
    with pytest.raises(ValueError, match="overlap"):
        correlation_A_eps(config, QuadratureSpec(0.6, 50.0))


def test_a_eps_radius_rejected():
    config = collinear_triple()
    with pytest.raises(ValueError, match="cutoff_radius"):
        correlation_A_eps(config, QuadratureSpec(0.1, 5.0))


def test_two_radius_tail_consistency(cube_roots):
    """The analytic far-field correction must match the mass the quadrature
    actually finds between two truncation radii."""
    r_small, r_big = 25.0, 50.0
    a = correlation_A_eps(cube_roots, QuadratureSpec(0.1, r_small, 1e-5))
    b = correlation_A_eps(cube_roots, QuadratureSpec(0.1, r_big, 1e-5))
    # far-field coefficient (sum d)^4 - sum d^4 = 16 - 4 = 12
    assert a.tail_correction == pytest.approx(12.0 * math.pi / r_small**2, rel=1e-12)
    # corrected values agree within combined error estimates
    assert abs(a.value - b.value) <= a.abs_error_estimate + b.abs_error_estimate
    # uncorrected values differ by the annulus mass 12 pi (1/r^2 - 1/(2r)^2)
    uncorrected_gap = (a.value - a.tail_correction) - (b.value - b.tail_correction)
    assert uncorrected_gap == pytest.approx(-9.0 * math.pi / r_small**2, rel=2e-2)


def test_similarity_covariance():
    """A(s c; s eps, s R) = s^-2 A(c; eps, R) to quadrature accuracy."""
    base_cfg = collinear_triple()
    s = 3.0
    scaled_cfg = transform(base_cfg, Similarity(scale=s))
    base = correlation_A_eps(base_cfg, QuadratureSpec(0.2, 50.0, 1e-5))
    scaled = correlation_A_eps(scaled_cfg, QuadratureSpec(0.2 * s, 50.0 * s, 1e-5))
    assert abs(base.value - s * s * scaled.value) < 1e-4


def test_a_eps_budget_exhaustion():
    result = correlation_A_eps(
        collinear_triple(), QuadratureSpec(0.1, 50.0, 1e-9, max_cells=300)
    )
    assert not result.converged
    assert result.cells_used <= 300


def test_a_eps_deterministic():
    spec = QuadratureSpec(0.1, 50.0, 1e-5)
    assert correlation_A_eps(collinear_triple(), spec) == correlation_A_eps(
        collinear_triple(), spec
    )


def test_a_eps_error_tracks_target():
    """Tightening the target keeps the realized error inside it.

    The realized error fluctuates beneath whatever target is requested, so
    it is bounded by the target at every level of a halving sequence (the
    exact gap at one level can sit below the gap of the next: only the
    envelope is monotone)."""
    config = collinear_triple()
    reference = correlation_A_eps(config, QuadratureSpec(0.1, 25.0, 1e-9)).value
    target = 4e-3
    while target > 1e-5:
        value = correlation_A_eps(config, QuadratureSpec(0.1, 25.0, target)).value
        assert abs(value - reference) <= target
        target *= 0.5


# -------------------------------------------------------------- cross pairs


def test_cross_pair_rejects_equal_indices():
    spec = QuadratureSpec(0.1, 50.0)
    with pytest.raises(ValueError):
        cross_pair_truncated(collinear_triple(), 1, 1, 0.1, spec)
    with pytest.raises(IndexError):
        cross_pair_truncated(collinear_triple(), 0, 7, 0.1, spec)


def test_cross_pair_vanishes():
    spec = QuadratureSpec(0.1, 50.0, 1e-5)
    result = cross_pair_truncated(collinear_triple(), 0, 2, 0.1, spec)
    assert result.converged
    assert abs(result.value) <= result.abs_error_estimate


def test_cross_pair_decomposition_matches_a_eps():
    """Ordered-pair sum of two-disk integrals equals A_eps once the disks
    excised around third vortices are added back (the cross-term decomposition identity)."""
    config = collinear_triple()
    eps = 0.1
    spec = QuadratureSpec(eps, 50.0, 1e-5)
    pairs = [(j, k) for j in range(3) for k in range(3) if j != k]
    cross = {jk: cross_pair_truncated(config, jk[0], jk[1], eps, spec) for jk in pairs}
    total = correlation_A_eps(config, spec)

    pos = config.positions
    d = config.circulations
    corrections = []
    correction_err = 0.0
    for (j, k) in pairs:
        for l in range(3):
            if l in (j, k):
                continue
            weight = (d[j] * d[k]) ** 2

            def f(zs, p=pos[j], q=pos[k], w=weight):
                return w / (np.conj(zs - p) ** 2 * (zs - q) ** 2)

            value, err, *_ = integrate_disk(f, pos[l], eps, 1e-9)
            corrections.append(value.real)
            correction_err += err

    sum_cross = math.fsum(cross[jk].value for jk in pairs)
    lhs = sum_cross - math.fsum(corrections)
    budget = (
        math.fsum(cross[jk].abs_error_estimate for jk in pairs)
        + total.abs_error_estimate
        + correction_err
    )
    assert abs(lhs - total.value) <= budget
    # the individual two-disk integrals all vanish, so their sum is tiny
    # even though A_eps itself is only O(eps^2)
    assert abs(sum_cross) < 1e-4
    assert abs(total.value) > 0.01


# -------------------------------------------------------------------- limit


def test_correlation_limit_collinear_fast():
    spec = QuadratureSpec(0.2, 25.0, 1e-4)
    report = correlation_limit(collinear_triple(), [0.2, 0.1, 0.05], spec)
    assert not report.fit_degenerate
    assert abs(report.extrapolated_limit) < 1e-3
    values = [abs(e.value) for e in report.estimates]
    assert values[0] > values[1] > values[2]
    assert report.order_estimate == pytest.approx(2.0, abs=0.2)


def test_correlation_limit_single_vortex():
    config = VortexConfiguration.from_pairs([(0.0, 1.5)])
    report = correlation_limit(config, [0.2, 0.1, 0.05], QuadratureSpec(0.2, 50.0))
    assert report.fit_degenerate
    assert report.extrapolated_limit == 0.0
    assert all(e.value == 0.0 for e in report.estimates)


def test_correlation_limit_two_points():
    spec = QuadratureSpec(0.2, 25.0, 1e-4)
    report = correlation_limit(collinear_triple(), [0.2, 0.1], spec)
    assert len(report.estimates) == 2
    assert abs(report.extrapolated_limit) < 0.02


def test_correlation_limit_flags_noncontracting_data():
    # two like-signed vortices: truncated values grow like log(1/eps),
    # so the differences do not contract and no limit is claimed
    config = VortexConfiguration.from_pairs([(0.0, 1.0), (1.0, 1.0)])
    spec = QuadratureSpec(0.2, 25.0, 1e-4)
    report = correlation_limit(config, [0.2, 0.1, 0.05], spec)
    assert report.fit_degenerate
    assert report.extrapolated_limit == report.estimates[-1].value


def test_correlation_limit_validates_epsilons():
    spec = QuadratureSpec(0.2, 25.0, 1e-4)
    with pytest.raises(ValueError):
        correlation_limit(collinear_triple(), [0.2], spec)
    with pytest.raises(ValueError):
        correlation_limit(collinear_triple(), [0.1, 0.2], spec)


def test_report_invariants():
    spec = QuadratureSpec(0.2, 25.0, 1e-4)
    report = correlation_limit(collinear_triple(), [0.2, 0.1, 0.05], spec)
    assert len(report.epsilons) == len(report.estimates) == 3
    assert report.epsilons[0] > report.epsilons[1] > report.epsilons[2]


def test_defaults_helpers():
    config = collinear_triple()
    spec = default_quadrature_spec(config)
    assert spec.cutoff_radius == pytest.approx(150.0)
    assert spec.epsilon == pytest.approx(0.1)
    eps = default_epsilon_list(config)
    assert eps == pytest.approx([0.2, 0.1, 0.05])
