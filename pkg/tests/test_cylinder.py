"""Cylinder functionals: atoms, profiles, membership, and the pairing ||.||."""

import math
import pickle

import numpy as np
import pytest

from gfft.cylinder import (
    BlackBoxF,
    CylinderFunctional,
    FamilyMismatchError,
    GaussPolyFactor,
    OrthogonalFamily,
    ProductGaussPoly,
    a2_dist,
    a2_inner,
    a2_norm,
    atom_from_spec,
    cosine_basis,
    eval_cylinder,
    find_O_inf_elements,
    functional_from_spec,
    gauss_moments,
    gauss_poly_integral,
    in_O_inf,
    in_O_inf_n,
    max_param_diff,
    profile_from_spec,
    s_preserves_O_inf,
    weight_norms,
)
from gfft.grid_core import GridFunction, GridMismatchError, TimeGrid, inner_product, norm_l2

from .oracles import l2_inner_quad

GRID = TimeGrid(1.0, 4096)
FAM12 = OrthogonalFamily((cosine_basis(1, GRID), cosine_basis(2, GRID)))

SQRT_PI = 1.7724538509055159  # int exp(-u^2) du


# -- atoms and families -------------------------------------------------------


def test_cosine_atom_values():
    e1 = cosine_basis(1, GRID)
    t = GRID.times()
    assert np.allclose(e1.values, np.cos(0.5 * math.pi * t))
    assert e1.values[-1] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        cosine_basis(0, GRID)


def test_cosine_orthonormal_scaling():
    e1n = cosine_basis(1, GRID, normalized=True)
    assert inner_product(e1n, e1n) == pytest.approx(1.0, abs=1e-8)


def test_family_rejects_non_orthogonal():
    e1 = cosine_basis(1, GRID)
    with pytest.raises(ValueError):
        OrthogonalFamily((e1, 2.0 * e1))


def test_family_rejects_zero_atom():
    with pytest.raises(ValueError):
        OrthogonalFamily((cosine_basis(1, GRID), GridFunction.zero(GRID)))


def test_family_same_family():
    other = OrthogonalFamily((cosine_basis(1, GRID), cosine_basis(2, GRID)))
    assert FAM12.same_family(other)
    assert not FAM12.same_family(OrthogonalFamily((cosine_basis(1, GRID), cosine_basis(3, GRID))))


def test_orthonormalizing_scale_is_two_over_sqrt_T():
    # ||e_j (rho e_k)||_2 = 1 requires rho = 2/sqrt(T): the trapezoid value of
    # int e_j^2 e_k^2 dt is T/4 for distinct half-integer cosines.
    for T in (1.0, 2.0, 16.0):
        g = TimeGrid(T, 4096)
        ej, ek = cosine_basis(1, g), cosine_basis(5, g)
        prod = ej * ek
        rho = 1.0 / norm_l2(prod)
        assert rho == pytest.approx(2.0 / math.sqrt(T), abs=1e-4)
        scaled = weight_norms(OrthogonalFamily((ej,)), (2.0 / math.sqrt(T)) * ek)
        assert scaled[0] == pytest.approx(1.0, abs=1e-4)


# -- profiles -----------------------------------------------------------------


def test_factor_validation():
    with pytest.raises(ValueError):
        GaussPolyFactor((), 1.0)
    with pytest.raises(ValueError):
        GaussPolyFactor((0.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        GaussPolyFactor((1.0,), -0.5)
    with pytest.raises(ValueError):
        GaussPolyFactor((1.0,), 1j)  # Re a must be positive


def test_pgp_eval_matches_manual():
    f = ProductGaussPoly(
        (
            GaussPolyFactor((1.0, 2.0), 1.0, 0.5),
            GaussPolyFactor((0.0, 0.0, 1.0), 2.0),
        )
    )
    u = np.array([0.3, -0.7])
    expect = (1 + 2 * 0.3) * math.exp(-0.5 * 0.09 + 0.15) * 0.49 * math.exp(-0.49)
    assert complex(f.eval(u)) == pytest.approx(expect, abs=1e-12)
    assert f.arity == 2
    assert f.degree == 2


def test_pgp_scaled():
    f = ProductGaussPoly((GaussPolyFactor((1.0, 1.0), 1.0),))
    g = f.scaled(3.0)
    u = np.array([0.4])
    assert complex(g.eval(u)) == pytest.approx(3.0 * complex(f.eval(u)), abs=1e-14)


def test_bbf_forms():
    u = np.array([0.5, -0.2])
    cos2 = BlackBoxF.from_form("cos_sum", 2, 4.0, 64, c=[1.0, 2.0])
    assert complex(cos2.eval(u)) == pytest.approx(math.cos(0.5 - 0.4), abs=1e-14)
    ind = BlackBoxF.from_form("indicator", 2, 4.0, 64, radius=0.3)
    assert complex(ind.eval(u)) == 0.0
    assert complex(ind.eval(np.array([0.1, -0.2]))) == 1.0
    exp1 = BlackBoxF.from_form("exp_i_sum", 1, 4.0, 64, c=[2.0])
    assert complex(exp1.eval(np.array([0.25]))) == pytest.approx(complex(math.cos(0.5), math.sin(0.5)), abs=1e-14)


def test_bbf_validation():
    with pytest.raises(ValueError):
        BlackBoxF.from_form("tanh_sum", 1, 4.0, 64, c=[1.0])
    with pytest.raises(ValueError):
        BlackBoxF.from_form("cos_sum", 2, 4.0, 64, c=[1.0])
    with pytest.raises(ValueError):
        BlackBoxF.from_form("cos_sum", 1, 0.0, 64, c=[1.0])
    with pytest.raises(ValueError):
        BlackBoxF.from_form("cos_sum", 1, 4.0, 8, c=[1.0])


def test_bbf_pickle_roundtrip():
    f = BlackBoxF.from_form("sin_sum", 2, 6.0, 128, c=[0.5, -1.5])
    g = pickle.loads(pickle.dumps(f))
    u = np.array([[0.1, 0.2], [1.0, -1.0]])
    assert np.allclose(g.eval(u), f.eval(u))
    assert (g.form, g.arity, g.box, g.points, g.params) == (f.form, f.arity, f.box, f.points, f.params)


def test_functional_arity_mismatch():
    prof = ProductGaussPoly((GaussPolyFactor((1.0,), 1.0),))
    with pytest.raises(ValueError):
        CylinderFunctional(FAM12, prof)


def test_eval_cylinder_matches_direct():
    from gfft.wiener_mc import RngStream, pwz, sample_path

    prof = ProductGaussPoly((GaussPolyFactor((1.0,), 1.0), GaussPolyFactor((0.0, 1.0), 2.0)))
    F = CylinderFunctional(FAM12, prof)
    x = sample_path(GRID, RngStream(5, 0))
    r = np.array([pwz(a, x) for a in FAM12.atoms])
    assert eval_cylinder(F, x) == pytest.approx(complex(prof.eval(r)), abs=1e-14)


# -- membership ---------------------------------------------------------------


def test_in_O_inf_scaled_cosine():
    h = (2.0) * cosine_basis(5, GRID)
    assert in_O_inf(FAM12, h)
    assert in_O_inf_n(FAM12, h, tol=1e-4)


def test_in_O_inf_rejects_family_member():
    # h = e1 makes <e1 h, e2 h> = int e1^3 e2 = T/8 != 0.
    assert not in_O_inf(FAM12, cosine_basis(1, GRID))


def test_in_O_inf_rejects_zero():
    assert not in_O_inf(FAM12, GridFunction.zero(GRID))


def test_in_O_inf_n_needs_unit_norms():
    h = cosine_basis(5, GRID)  # ||e_j h|| = 1/2, not 1
    assert in_O_inf(FAM12, h)
    assert not in_O_inf_n(FAM12, h, tol=1e-4)


def test_s_preserves_membership():
    h1 = 1.3 * cosine_basis(5, GRID)
    h2 = 0.7 * cosine_basis(6, GRID)
    assert s_preserves_O_inf(FAM12, h1, h2, tol=1e-6)
    with pytest.raises(ValueError):
        s_preserves_O_inf(FAM12, GridFunction.zero(GRID), h2)


def test_find_O_inf_elements_filters():
    pool = [cosine_basis(1, GRID), cosine_basis(5, GRID), GridFunction.zero(GRID), GridFunction.constant(GRID, 1.0)]
    found = find_O_inf_elements(FAM12, pool)
    assert len(found) == 2  # e5 and the constant survive
    assert any(np.array_equal(g.values, pool[1].values) for g in found)


# -- Gaussian integrals and the profile pairing --------------------------------


def test_gauss_moments_recursion():
    mu, s = 0.4 + 0.1j, 0.8 - 0.2j
    m = gauss_moments(mu, s, 4)
    assert m[0] == 1.0
    assert m[1] == pytest.approx(mu, abs=1e-15)
    assert m[2] == pytest.approx(mu * mu + s, abs=1e-14)
    assert m[3] == pytest.approx(mu**3 + 3 * mu * s, abs=1e-14)
    assert m[4] == pytest.approx(mu**4 + 6 * mu**2 * s + 3 * s**2, abs=1e-13)


def test_gauss_poly_integral_frozen():
    # int exp(-u^2) du = sqrt(pi)
    assert gauss_poly_integral((1.0,), 2.0, 0.0) == pytest.approx(SQRT_PI, abs=1e-14)
    # int u^2 exp(-u^2) du = sqrt(pi)/2
    assert gauss_poly_integral((0.0, 0.0, 1.0), 2.0, 0.0) == pytest.approx(SQRT_PI / 2, abs=1e-14)


def test_gauss_poly_integral_domain():
    with pytest.raises(ValueError):
        gauss_poly_integral((1.0,), -1.0, 0.0)


def _pgp_functional(factors):
    fam = OrthogonalFamily(tuple(cosine_basis(j + 1, GRID) for j in range(len(factors))))
    return CylinderFunctional(fam, ProductGaussPoly(tuple(factors)))


def test_a2_norm_unit_gaussian_frozen():
    F = _pgp_functional([GaussPolyFactor((1.0,), 1.0)])
    assert a2_norm(F) ** 2 == pytest.approx(SQRT_PI, abs=1e-12)


def test_a2_inner_closed_vs_quadrature():
    rng = np.random.default_rng(42)
    for _ in range(6):
        d1, d2 = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        f1 = GaussPolyFactor(
            tuple(complex(*rng.uniform(-1, 1, 2)) for _ in range(d1 + 1)),
            complex(rng.uniform(0.4, 1.5), rng.uniform(-0.3, 0.3)),
            complex(*rng.uniform(-0.5, 0.5, 2)),
        )
        f2 = GaussPolyFactor(
            tuple(complex(*rng.uniform(-1, 1, 2)) for _ in range(d2 + 1)),
            complex(rng.uniform(0.4, 1.5), rng.uniform(-0.3, 0.3)),
            complex(*rng.uniform(-0.5, 0.5, 2)),
        )
        F1, F2 = _pgp_functional([f1]), _pgp_functional([f2])
        got = a2_inner(F1, F2)
        want = l2_inner_quad(lambda u: complex(f1.eval(np.array(u))), lambda u: complex(f2.eval(np.array(u))))
        assert got == pytest.approx(want, abs=1e-10)


def test_a2_inner_hermitian():
    F1 = _pgp_functional([GaussPolyFactor((1.0, 0.5j), 1.0, 0.2)])
    F2 = _pgp_functional([GaussPolyFactor((0.3, 1.0), 1.2, -0.1j)])
    assert a2_inner(F1, F2) == pytest.approx(np.conj(a2_inner(F2, F1)), abs=1e-13)


def test_a2_inner_mixed_profile_path():
    # BlackBox x PGP goes through box quadrature; compare on a wide box.
    c = [1.0]
    bb = BlackBoxF.from_form("cos_sum", 1, 12.0, 256, c=c)
    g = GaussPolyFactor((1.0,), 1.0)
    fam = OrthogonalFamily((cosine_basis(1, GRID),))
    F1 = CylinderFunctional(fam, bb)
    F2 = CylinderFunctional(fam, ProductGaussPoly((g,)))
    got = a2_inner(F1, F2)
    want = l2_inner_quad(lambda u: math.cos(u), lambda u: complex(g.eval(np.array(u))))
    assert got == pytest.approx(want, abs=1e-8)


def test_a2_requires_same_family():
    F1 = _pgp_functional([GaussPolyFactor((1.0,), 1.0)])
    fam3 = OrthogonalFamily((cosine_basis(3, GRID),))
    F2 = CylinderFunctional(fam3, ProductGaussPoly((GaussPolyFactor((1.0,), 1.0),)))
    with pytest.raises(FamilyMismatchError):
        a2_inner(F1, F2)
    with pytest.raises(FamilyMismatchError):
        a2_dist(F1, F2)


def test_a2_dist_zero_on_self():
    F = _pgp_functional([GaussPolyFactor((1.0, 0.5), 1.0, 0.1)])
    assert a2_dist(F, F) <= 1e-14


def test_a2_dist_matches_quadrature():
    f1 = GaussPolyFactor((1.0,), 1.0)
    f2 = GaussPolyFactor((1.0,), 1.1, 0.05)
    F1, F2 = _pgp_functional([f1]), _pgp_functional([f2])

    def diff(u):
        return complex(f1.eval(np.array(u))) - complex(f2.eval(np.array(u)))

    want = math.sqrt(abs(l2_inner_quad(diff, diff)))
    assert a2_dist(F1, F2) == pytest.approx(want, abs=1e-8)


def test_max_param_diff():
    p1 = ProductGaussPoly((GaussPolyFactor((1.0, 2.0), 1.0, 0.5),))
    p2 = ProductGaussPoly((GaussPolyFactor((1.0, 2.0 + 1e-9), 1.0, 0.5),))
    assert max_param_diff(p1, p2) == pytest.approx(1e-9, abs=1e-12)
    assert max_param_diff(p1, p1) == 0.0


# -- JSON specs ---------------------------------------------------------------


def test_atom_specs(tmp_path):
    g = atom_from_spec({"cosine": 2, "scale": 3.0}, GRID)
    assert np.allclose(g.values, 3.0 * cosine_basis(2, GRID).values)
    g = atom_from_spec({"constant": 1.5}, GRID)
    assert np.allclose(g.values, 1.5)
    p = tmp_path / "atom.csv"
    cosine_basis(4, GRID).to_csv(p)
    g = atom_from_spec({"csv": str(p)}, GRID)
    assert np.array_equal(g.values, cosine_basis(4, GRID).values)


def test_atom_spec_rejects_unknown_keys():
    with pytest.raises(ValueError):
        atom_from_spec({"cosine": 1, "shift": 2.0}, GRID)
    with pytest.raises(ValueError):
        atom_from_spec({"cosine": 1, "constant": 2.0}, GRID)
    with pytest.raises(ValueError):
        atom_from_spec({"constant": 1.0, "normalized": True}, GRID)


def test_atom_spec_csv_grid_mismatch(tmp_path):
    p = tmp_path / "atom.csv"
    cosine_basis(1, TimeGrid(1.0, 128)).to_csv(p)
    with pytest.raises(GridMismatchError):
        atom_from_spec({"csv": str(p)}, GRID)


def test_profile_specs():
    f = profile_from_spec({"pgp": {"factors": [{"coeffs": [1.0, [0.0, 1.0]], "a": 1.0, "b": [0.0, -0.5]}]}})
    assert isinstance(f, ProductGaussPoly)
    assert f.factors[0].coeffs[1] == 1j
    assert f.factors[0].b == -0.5j
    g = profile_from_spec({"bbox": {"form": "indicator", "arity": 2, "box": 3.0, "points": 64, "radius": 1.0}})
    assert isinstance(g, BlackBoxF)
    with pytest.raises(ValueError):
        profile_from_spec({"pgp": {"factors": []}, "bbox": {}})
    with pytest.raises(ValueError):
        profile_from_spec({"pgp": {"factors": [{"coeffs": [1.0], "a": 1.0, "width": 2}]}})


def test_functional_from_spec():
    spec = {
        "family": [{"cosine": 1}, {"cosine": 2}],
        "f": {"pgp": {"factors": [{"coeffs": [1.0], "a": 1.0}, {"coeffs": [1.0], "a": 2.0}]}},
    }
    F = functional_from_spec(spec, GRID)
    assert F.arity == 2
    assert F.family.same_family(FAM12)
    with pytest.raises(ValueError):
        functional_from_spec({"family": [{"cosine": 1}]}, GRID)
