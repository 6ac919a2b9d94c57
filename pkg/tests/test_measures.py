import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import logm

from irreality_lab.channels import dephase, dephase_seq
from irreality_lab.closedform import werner_onesided_discord
from irreality_lab.measures import (
    MeasureReport,
    delta_correlation,
    delta_inner,
    discord_objective,
    entropic_ur_check,
    information,
    irreality,
    is_mub,
    ji_bounds,
    ji_decomposition,
    joint_irreality,
    joint_reality_consistent,
    measure_report,
    mub_special_case,
    mutual_information,
    onesided_discord_min,
    onesided_objective_full,
    overlap_c,
    relative_entropy,
    script_d,
    symmetric_discord,
    von_neumann_entropy,
)
from irreality_lab.qstate import (
    DensityMatrix,
    RngStream,
    bell_state,
    bloch_observable,
    bloch_state,
    local_observable,
    maximally_mixed,
    mub_pair,
    random_density_matrix,
    random_observable,
    werner_observables,
    werner_state,
)

DIMS = (2, 2)
Z = bloch_observable([0, 0, 1])
X = bloch_observable([1, 0, 0])
ZA = local_observable(Z, DIMS, "A")
ZB = local_observable(Z, DIMS, "B")
XB = local_observable(X, DIMS, "B")


def gen(seed):
    return RngStream(seed, 0).generator()


def test_entropy_values():
    assert_allclose(von_neumann_entropy(maximally_mixed(4)), 2.0, atol=1e-14)
    assert_allclose(von_neumann_entropy(bell_state()), 0.0, atol=1e-14)
    assert_allclose(information(bloch_state([0, 0, 0.5])), 1 - 0.8112781244591328, atol=1e-14)
    assert_allclose(mutual_information(bell_state()), 2.0, atol=1e-14)


def test_relative_entropy():
    rho = random_density_matrix(3, gen(1)).matrix
    sigma = random_density_matrix(3, gen(2)).matrix
    ref = np.trace(rho @ (logm(rho) - logm(sigma))).real / math.log(2)
    assert_allclose(relative_entropy(rho, sigma), ref, atol=1e-10)
    assert_allclose(relative_entropy(rho, rho), 0.0, atol=1e-12)
    with pytest.warns(RuntimeWarning):
        assert relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == math.inf


def test_irreality_is_relative_entropy():
    rho = random_density_matrix(3, gen(3))
    x = random_observable(3, gen(4))
    assert_allclose(irreality(rho, x), relative_entropy(rho, dephase(rho, x)), atol=1e-10)


def test_singlet_values():
    psi = bell_state()
    assert_allclose(joint_irreality(psi, ZA, ZB), 1.0, atol=1e-12)
    assert_allclose(joint_irreality(psi, ZB, XB), 2.0, atol=1e-12)
    assert_allclose(symmetric_discord(psi, Z, Z), 1.0, atol=1e-12)


def test_maximally_mixed_has_no_irreality():
    x, y = random_observable(4, gen(5)), random_observable(4, gen(6))
    assert abs(joint_irreality(maximally_mixed(4), x, y)) < 1e-13


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4]))
def test_decomposition_and_bounds(seed, d):
    g = gen(seed)
    rho = random_density_matrix(d, g, rank=int(g.integers(1, d + 1)))
    x, y = random_observable(d, g), random_observable(d, g)
    ji = joint_irreality(rho, x, y)
    dec = ji_decomposition(rho, x, y)
    assert_allclose(ji, dec.half_sum, atol=1e-10)
    lo, hi = ji_bounds(rho, x, y)
    assert lo - 1e-9 <= ji <= hi + 1e-9
    assert ji >= -1e-10
    assert 2 * ji >= dec.irr_x + dec.irr_y - 1e-10
    assert entropic_ur_check(rho, x, y)
    assert joint_reality_consistent(rho, x, y)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_local_decomposition(seed):
    g = gen(seed)
    rho = random_density_matrix(4, g, dims=DIMS)
    a, b = random_observable(2, g), random_observable(2, g)
    xa, yb = local_observable(a, DIMS, "A"), local_observable(b, DIMS, "B")
    rhs = irreality(rho.reduced("A"), a) + irreality(rho.reduced("B"), b) + symmetric_discord(rho, a, b)
    assert_allclose(joint_irreality(rho, xa, yb), rhs, atol=1e-10)
    assert_allclose(delta_correlation(rho, xa, yb), symmetric_discord(rho, a, b), atol=1e-10)


def test_product_additivity_and_zero_delta():
    g = gen(8)
    ra, rb = random_density_matrix(2, g), random_density_matrix(2, g)
    prod = DensityMatrix(np.kron(ra.matrix, rb.matrix), DIMS)
    a, b = random_observable(2, g), random_observable(2, g)
    ji = joint_irreality(prod, local_observable(a, DIMS, "A"), local_observable(b, DIMS, "B"))
    assert_allclose(ji, irreality(ra, a) + irreality(rb, b), atol=1e-10)
    x, y = random_observable(4, g), random_observable(4, g)
    assert abs(delta_inner(prod, x, y)) < 1e-10
    assert abs(script_d(prod, x, y)) < 1e-10


def test_mub_collapse():
    for d in (2, 3, 4):
        x, xb = mub_pair(d)
        assert is_mub(x, xb)
        assert_allclose(overlap_c(x, xb), 1 / math.sqrt(d))
        rho = random_density_matrix(d, gen(d))
        assert_allclose(dephase_seq(rho, x, xb).matrix, np.eye(d) / d, atol=1e-12)
        assert_allclose(joint_irreality(rho, x, xb), information(rho), atol=1e-10)
        lo, hi = ji_bounds(rho, x, xb)
        assert_allclose(lo, hi - math.log2(math.sqrt(d)))


def test_mub_special_case():
    rho = random_density_matrix(4, gen(11), dims=DIMS)
    x, xb = mub_pair(2)
    direct = joint_irreality(rho, local_observable(x, DIMS, "A"), local_observable(xb, DIMS, "A"))
    # the composed map leaves 1/2 x rho_B
    assert_allclose(direct, mub_special_case(rho, x, xb), atol=1e-10)
    assert_allclose(mub_special_case(rho, x, xb), information(rho.reduced("A")) + mutual_information(rho), atol=1e-14)


def test_overlap_c_higher_rank():
    # Lueders local observables: c is an operator norm per block pair
    assert_allclose(overlap_c(ZA, ZB), 1.0)
    assert_allclose(overlap_c(ZA, local_observable(X, DIMS, "A")), 1 / math.sqrt(2))


def test_onesided_minimizer_werner():
    for alpha in (0.2, 0.65, 1.0):
        rho = werner_state(alpha)
        res = onesided_discord_min(rho, "A")
        assert_allclose(res.value, werner_onesided_discord(alpha), atol=1e-9)
        assert_allclose(np.linalg.norm(res.direction), 1.0)
        assert_allclose(onesided_discord_min(rho, "B").value, werner_onesided_discord(alpha), atol=1e-9)


def test_onesided_objective_two_routes():
    g = gen(12)
    rho = random_density_matrix(4, g, dims=DIMS)
    for _ in range(5):
        n = g.standard_normal(3)
        n /= np.linalg.norm(n)
        for side in "AB":
            assert_allclose(discord_objective(rho, n, side), onesided_objective_full(rho, n, side), atol=1e-12)


def test_onesided_minimizer_beats_grid_directions():
    rho = random_density_matrix(4, gen(13), dims=DIMS)
    best = onesided_discord_min(rho, "A").value
    g = gen(14)
    for _ in range(50):
        n = g.standard_normal(3)
        assert best <= discord_objective(rho, n / np.linalg.norm(n), "A") + 1e-12


def test_report_roundtrip():
    rep = measure_report(werner_state(0.5), *werner_observables(1.0), local=(Z, Z))
    again = MeasureReport.from_dict(__import__("json").loads(rep.to_json()))
    assert again == rep
    nats = rep.to_dict("e")
    assert_allclose(nats["JI"], rep.JI * math.log(2))
    assert nats["ji_per_info"] == rep.ji_per_info


def test_report_without_y():
    rep = measure_report(bloch_state([0, 0, 0.5]), X)
    assert rep.JI is None and rep.irreality_Y is None
    assert_allclose(rep.irreality_X, 1 - 0.8112781244591328 - 0.0, atol=1e-14)
