"""Cylinder functionals F(x) = f(<a_1, x>, ..., <a_n, x>) over an orthogonal family.

The family A = (a_1, ..., a_n) is a finite orthogonal set of nonzero grid
functions; the coordinates are stochastic pairings against the path, so a
functional is determined by its profile f on R^n.  Two profile classes are
supported:

* ProductGaussPoly: f(u) = prod_j p_j(u_j) * exp(-a_j u_j^2 / 2 + b_j u_j)
  with complex coefficients and Re a_j > 0.  The class is closed under the
  one-dimensional Gaussian/Fresnel kernels used by the transforms, and all
  L2(R^n) pairings reduce to moments of (complex-parameter) Gaussians:

      int p(u) exp(-A u^2/2 + B u) du
          = sqrt(2 pi / A) exp(B^2 / (2A)) * sum_m p_m M_m,   Re A > 0,

  where M_m are the moments of the Gaussian with mean B/A and variance 1/A,
  M_0 = 1, M_1 = mu, M_m = mu M_{m-1} + (m-1) s M_{m-2}.  The recursion is
  an identity of analytic functions in (A, B), so it is complex-safe.

* BlackBoxF: an arbitrary callable on a box [-L, L]^n with a per-axis
  quadrature budget; used by the regularized quadrature route and for
  bounded test profiles (trig sums, indicators).

Membership of a weight h relative to A:

* in_O_inf:   ||h|| > tol, every ||a_j h|| > tol, and the products a_j h
              are pairwise orthogonal within tol;
* in_O_inf_n: additionally every ||a_j h|| = 1 within tol.

The pairing a2_inner(F1, F2) = int f1 conj(f2) du reads the profiles in the
coordinates of the declared family, so both operands must declare the same
family; a mismatch raises rather than guessing a change of coordinates.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .grid_core import (
    GridFunction,
    GridMismatchError,
    HSeq,
    TimeGrid,
    inner_product,
    norm_l2,
    s_combine,
)

__all__ = [
    "cosine_basis",
    "OrthogonalFamily",
    "GaussPolyFactor",
    "ProductGaussPoly",
    "BlackBoxF",
    "CylinderFunctional",
    "FamilyMismatchError",
    "in_O_inf",
    "in_O_inf_n",
    "s_preserves_O_inf",
    "find_O_inf_elements",
    "eval_cylinder",
    "gauss_moments",
    "gauss_poly_integral",
    "a2_inner",
    "a2_norm",
    "a2_dist",
    "atom_from_spec",
    "profile_from_spec",
    "functional_from_spec",
]

#: default orthogonality tolerance for family validation and membership tests
ORTHO_TOL = 1e-8


class FamilyMismatchError(ValueError):
    """Raised when a binary operation mixes functionals over different families."""


def cosine_basis(j: int, grid: TimeGrid, normalized: bool = False) -> GridFunction:
    """Atom e_j(t) = cos((j - 1/2) pi t / T); sqrt(2/T) e_j if normalized."""
    if j < 1:
        raise ValueError(f"cosine atom index starts at 1, got {j}")
    freq = (j - 0.5) * math.pi / grid.T
    scale = math.sqrt(2.0 / grid.T) if normalized else 1.0
    return GridFunction(grid, scale * np.cos(freq * grid.times()))


@dataclass(frozen=True, eq=False)
class OrthogonalFamily:
    """Finite orthogonal family of nonzero grid functions."""

    atoms: tuple[GridFunction, ...]
    tol: float = ORTHO_TOL

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise ValueError("family needs at least one atom")
        grid = self.atoms[0].grid
        for a in self.atoms[1:]:
            if a.grid != grid:
                raise GridMismatchError("family atoms must share one grid")
        for i, a in enumerate(self.atoms):
            if norm_l2(a) <= self.tol:
                raise ValueError(f"atom {i} has L2 norm <= {self.tol}")
            for b in self.atoms[i + 1 :]:
                ip = inner_product(a, b)
                if abs(ip) > self.tol:
                    raise ValueError(f"atoms not orthogonal: |<a_i, a_j>| = {abs(ip):.3e} > {self.tol}")

    @property
    def n(self) -> int:
        return len(self.atoms)

    @property
    def grid(self) -> TimeGrid:
        return self.atoms[0].grid

    def same_family(self, other: "OrthogonalFamily", tol: float = 1e-12) -> bool:
        if self.n != other.n or self.grid != other.grid:
            return False
        return all(a.allclose(b, tol) for a, b in zip(self.atoms, other.atoms))


@dataclass(frozen=True, eq=False)
class GaussPolyFactor:
    """One coordinate factor p(u) exp(-a u^2/2 + b u), Re a > 0."""

    coeffs: tuple[complex, ...]
    a: complex
    b: complex = 0j

    def __post_init__(self) -> None:
        c = tuple(complex(x) for x in self.coeffs)
        if not c:
            raise ValueError("factor needs at least one polynomial coefficient")
        if all(x == 0 for x in c):
            raise ValueError("zero polynomial factor is excluded (it collapses the functional)")
        if not all(cmath.isfinite(x) for x in c):
            raise ValueError("polynomial coefficients must be finite")
        a, b = complex(self.a), complex(self.b)
        if not (cmath.isfinite(a) and cmath.isfinite(b)):
            raise ValueError("Gaussian parameters must be finite")
        if not a.real > 0:
            raise ValueError(f"need Re a > 0 for integrability, got a = {a}")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def eval(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        p = npoly.polyval(u, np.asarray(self.coeffs))
        return p * np.exp(-0.5 * self.a * u * u + self.b * u)


@dataclass(frozen=True, eq=False)
class ProductGaussPoly:
    """Coordinate-separable profile: product of GaussPolyFactor over R^n."""

    factors: tuple[GaussPolyFactor, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("need at least one coordinate factor")

    @property
    def arity(self) -> int:
        return len(self.factors)

    @property
    def degree(self) -> int:
        return max(f.degree for f in self.factors)

    def eval(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.arity:
            raise ValueError(f"expected last axis {self.arity}, got {u.shape}")
        out = np.ones(u.shape[:-1], dtype=complex)
        for j, f in enumerate(self.factors):
            out = out * f.eval(u[..., j])
        return out

    def scaled(self, c: complex) -> "ProductGaussPoly":
        first = self.factors[0]
        head = GaussPolyFactor(tuple(c * x for x in first.coeffs), first.a, first.b)
        return ProductGaussPoly((head,) + self.factors[1:])


# registry of named bounded profiles, so BlackBoxF instances built from JSON
# stay picklable across worker processes
def _form_cos_sum(c: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    return lambda u: np.cos(np.asarray(u) @ c).astype(complex)


def _form_sin_sum(c: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    return lambda u: np.sin(np.asarray(u) @ c).astype(complex)


def _form_exp_i_sum(c: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    return lambda u: np.exp(1j * (np.asarray(u) @ c))


def _form_indicator(radius: float, arity: int) -> Callable[[np.ndarray], np.ndarray]:
    def fn(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        inside = np.all(np.abs(u) <= radius, axis=-1)
        return np.where(inside, 1.0 + 0j, 0.0 + 0j)

    return fn


_BBF_FORMS = {"cos_sum", "sin_sum", "exp_i_sum", "indicator"}


@dataclass(frozen=True, eq=False)
class BlackBoxF:
    """Opaque profile on the box [-L, L]^n with an M-point-per-axis budget."""

    fn: Callable[[np.ndarray], np.ndarray]
    arity: int
    box: float
    points: int
    form: str | None = None
    params: tuple | None = None

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if not self.box > 0:
            raise ValueError(f"box half-width must be positive, got {self.box}")
        if self.points < 16:
            raise ValueError(f"need at least 16 quadrature points per axis, got {self.points}")

    @classmethod
    def from_form(
        cls, form: str, arity: int, box: float, points: int, *, c: Sequence[float] | None = None, radius: float = 1.0
    ) -> "BlackBoxF":
        if form not in _BBF_FORMS:
            raise ValueError(f"unknown profile form {form!r}; known: {sorted(_BBF_FORMS)}")
        if form == "indicator":
            fn = _form_indicator(float(radius), arity)
            params = (float(radius),)
        else:
            cv = np.asarray(list(c if c is not None else []), dtype=float)
            if cv.shape != (arity,):
                raise ValueError(f"form {form!r} needs {arity} coefficients, got {cv.shape}")
            fn = {"cos_sum": _form_cos_sum, "sin_sum": _form_sin_sum, "exp_i_sum": _form_exp_i_sum}[form](cv)
            params = tuple(cv.tolist())
        return cls(fn, arity, float(box), int(points), form=form, params=params)

    def eval(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.arity:
            raise ValueError(f"expected last axis {self.arity}, got {u.shape}")
        return np.asarray(self.fn(u), dtype=complex)

    def __reduce__(self):
        if self.form is None:
            # fall back to default pickling; works only for module-level callables
            return object.__reduce__(self)
        kwargs = {"radius": self.params[0]} if self.form == "indicator" else {"c": list(self.params)}
        return (_rebuild_bbf, (self.form, self.arity, self.box, self.points, kwargs))


def _rebuild_bbf(form: str, arity: int, box: float, points: int, kwargs: dict) -> BlackBoxF:
    return BlackBoxF.from_form(form, arity, box, points, **kwargs)


@dataclass(frozen=True, eq=False)
class CylinderFunctional:
    """Profile + family; F(x) = f(<a_1, x>, ..., <a_n, x>)."""

    family: OrthogonalFamily
    f: ProductGaussPoly | BlackBoxF

    def __post_init__(self) -> None:
        if self.arity != self.family.n:
            raise ValueError(f"profile arity {self.arity} != family size {self.family.n}")

    @property
    def arity(self) -> int:
        return self.f.arity if isinstance(self.f, BlackBoxF) else self.f.arity

    @property
    def grid(self) -> TimeGrid:
        return self.family.grid

    def with_profile(self, f: "ProductGaussPoly | BlackBoxF") -> "CylinderFunctional":
        return CylinderFunctional(self.family, f)


def eval_cylinder(F: CylinderFunctional, y) -> complex:
    """Evaluate F at a path y through the pairings r_j = pwz(a_j, y)."""
    from .wiener_mc import pwz  # local import; wiener_mc sits above this module

    r = np.array([pwz(a, y) for a in F.family.atoms])
    return complex(F.f.eval(r))


def weighted_atoms(A: OrthogonalFamily, h: GridFunction) -> list[GridFunction]:
    return [a * h for a in A.atoms]


def weight_norms(A: OrthogonalFamily, h: GridFunction) -> np.ndarray:
    """||a_j h||_2 for each atom."""
    return np.array([norm_l2(g) for g in weighted_atoms(A, h)])


def in_O_inf(A: OrthogonalFamily, h: GridFunction, tol: float = ORTHO_TOL) -> bool:
    """h nonzero, every a_j h nonzero, and the a_j h pairwise orthogonal."""
    if norm_l2(h) <= tol:
        return False
    g = weighted_atoms(A, h)
    if any(norm_l2(x) <= tol for x in g):
        return False
    for i in range(len(g)):
        for j in range(i + 1, len(g)):
            if abs(inner_product(g[i], g[j])) > tol:
                return False
    return True


def in_O_inf_n(A: OrthogonalFamily, h: GridFunction, tol: float = ORTHO_TOL) -> bool:
    """in_O_inf plus ||a_j h||_2 = 1 within tol for every atom."""
    if not in_O_inf(A, h, tol):
        return False
    return bool(np.max(np.abs(weight_norms(A, h) - 1.0)) <= tol)


def s_preserves_O_inf(A: OrthogonalFamily, h1: GridFunction, h2: GridFunction, tol: float = ORTHO_TOL) -> bool:
    """Whether s(h1, h2) stays in O_inf with ||a_j s||^2 = ||a_j h1||^2 + ||a_j h2||^2.

    Both inputs must already be members; that precondition is raised on,
    not folded into the return value.
    """
    if not in_O_inf(A, h1, tol):
        raise ValueError("h1 is not in O_inf(A)")
    if not in_O_inf(A, h2, tol):
        raise ValueError("h2 is not in O_inf(A)")
    s = s_combine(h1, h2)
    if not in_O_inf(A, s, tol):
        return False
    n_s = weight_norms(A, s) ** 2
    n_1 = weight_norms(A, h1) ** 2
    n_2 = weight_norms(A, h2) ** 2
    return bool(np.max(np.abs(n_s - n_1 - n_2)) <= tol)


def find_O_inf_elements(
    A: OrthogonalFamily, pool: Sequence[GridFunction], tol: float = ORTHO_TOL
) -> list[GridFunction]:
    return [h for h in pool if in_O_inf(A, h, tol)]


def gauss_moments(mu: complex, s: complex, degree: int) -> np.ndarray:
    """Moments M_0..M_degree of the (possibly complex-parameter) Gaussian.

    M_m = E[(mu + Z)^m] with Var Z = s; complex parameters are reached by
    analytic continuation of the real recursion.
    """
    M = np.empty(degree + 1, dtype=complex)
    M[0] = 1.0
    if degree >= 1:
        M[1] = mu
    for m in range(2, degree + 1):
        M[m] = mu * M[m - 1] + (m - 1) * s * M[m - 2]
    return M


def gauss_poly_integral(coeffs: Sequence[complex], A: complex, B: complex) -> complex:
    """int P(u) exp(-A u^2/2 + B u) du over R, Re A > 0, principal roots."""
    A, B = complex(A), complex(B)
    if not A.real > 0:
        raise ValueError(f"need Re A > 0 for convergence, got A = {A}")
    c = np.asarray(coeffs, dtype=complex)
    M = gauss_moments(B / A, 1.0 / A, len(c) - 1)
    return cmath.sqrt(2.0 * math.pi / A) * cmath.exp(B * B / (2.0 * A)) * complex(np.dot(c, M))


def _conj_poly(coeffs: Sequence[complex]) -> np.ndarray:
    # conj(p(u)) for real u is the polynomial with conjugated coefficients
    return np.conj(np.asarray(coeffs, dtype=complex))


def _factor_pair_integral(f1: GaussPolyFactor, f2: GaussPolyFactor) -> complex:
    P = npoly.polymul(np.asarray(f1.coeffs, dtype=complex), _conj_poly(f2.coeffs))
    A = f1.a + f2.a.conjugate()
    B = f1.b + f2.b.conjugate()
    return gauss_poly_integral(P, A, B)


def _require_same_family(F1: CylinderFunctional, F2: CylinderFunctional) -> None:
    if not F1.family.same_family(F2.family):
        raise FamilyMismatchError("a2 pairing needs both operands on the same declared family")


def _gl_axis(L: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return L * x, L * w


def _profile_box(f: ProductGaussPoly | BlackBoxF) -> tuple[np.ndarray, int]:
    """Per-axis half-widths covering the profile's mass, and a point budget."""
    if isinstance(f, BlackBoxF):
        return np.full(f.arity, f.box), f.points
    L = np.array(
        [min(max(abs(g.b) / g.a.real + 10.0 / math.sqrt(g.a.real), 8.0), 24.0) for g in f.factors]
    )
    pts = {1: 512, 2: 256}.get(f.arity, 128)
    return L, pts


def _box_quad_inner(
    fa: ProductGaussPoly | BlackBoxF, fb: ProductGaussPoly | BlackBoxF, arity: int
) -> complex:
    La, ma = _profile_box(fa)
    Lb, mb = _profile_box(fb)
    L = np.maximum(La, Lb)
    m = max(ma, mb)
    axes, weights = zip(*[_gl_axis(L[j], m) for j in range(arity)])
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    va = fa.eval(mesh)
    vb = fb.eval(mesh)
    wgt = weights[0]
    for w in weights[1:]:
        wgt = np.multiply.outer(wgt, w)
    return complex(np.sum(va * np.conj(vb) * wgt))


def a2_inner(F1: CylinderFunctional, F2: CylinderFunctional) -> complex:
    """L2(R^n) pairing of the profiles, int f1 conj(f2) du.

    Closed form when both profiles are ProductGaussPoly; otherwise a
    tensorized Gauss-Legendre quadrature over the covering box.
    """
    _require_same_family(F1, F2)
    if isinstance(F1.f, ProductGaussPoly) and isinstance(F2.f, ProductGaussPoly):
        out = 1.0 + 0j
        for fa, fb in zip(F1.f.factors, F2.f.factors):
            out *= _factor_pair_integral(fa, fb)
        return out
    return _box_quad_inner(F1.f, F2.f, F1.arity)


def a2_norm(F: CylinderFunctional) -> float:
    return math.sqrt(max(a2_inner(F, F).real, 0.0))


def a2_dist(F1: CylinderFunctional, F2: CylinderFunctional) -> float:
    """||f1 - f2||_2 by quadrature of the pointwise difference.

    Deliberately not the polarization identity: residuals near 1e-8 of the
    operand scale would drown in cancellation between O(1) closed-form
    inner products, while the pointwise difference keeps full precision.
    """
    _require_same_family(F1, F2)
    La, ma = _profile_box(F1.f)
    Lb, mb = _profile_box(F2.f)
    L = np.maximum(La, Lb)
    m = max(ma, mb)
    axes, weights = zip(*[_gl_axis(L[j], m) for j in range(F1.arity)])
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    diff = F1.f.eval(mesh) - F2.f.eval(mesh)
    wgt = weights[0]
    for w in weights[1:]:
        wgt = np.multiply.outer(wgt, w)
    return math.sqrt(max(float(np.sum((diff * np.conj(diff)).real * wgt)), 0.0))


def max_param_diff(p1: ProductGaussPoly, p2: ProductGaussPoly) -> float:
    """Max absolute difference over all (a, b, coefficient) parameters."""
    if p1.arity != p2.arity:
        raise ValueError("arity mismatch")
    worst = 0.0
    for f1, f2 in zip(p1.factors, p2.factors):
        worst = max(worst, abs(f1.a - f2.a), abs(f1.b - f2.b))
        d = max(len(f1.coeffs), len(f2.coeffs))
        c1 = np.zeros(d, dtype=complex)
        c2 = np.zeros(d, dtype=complex)
        c1[: len(f1.coeffs)] = f1.coeffs
        c2[: len(f2.coeffs)] = f2.coeffs
        worst = max(worst, float(np.max(np.abs(c1 - c2))))
    return worst


# ---------------------------------------------------------------------------
# JSON specs: atoms, profiles, functionals
# ---------------------------------------------------------------------------

def _as_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ValueError(f"expected number or [re, im] pair, got {v!r}")


def _check_keys(spec: dict, allowed: set[str], where: str) -> None:
    unknown = set(spec) - allowed
    if unknown:
        raise ValueError(f"{where}: unknown keys {sorted(unknown)}")


def atom_from_spec(spec: dict, grid: TimeGrid) -> GridFunction:
    """Atom reference: {"cosine": j} | {"constant": c} | {"csv": path}.

    Optional "scale" multiplies the atom; "normalized" applies only to
    cosine atoms.
    """
    if not isinstance(spec, dict):
        raise ValueError(f"atom spec must be an object, got {spec!r}")
    _check_keys(spec, {"cosine", "constant", "csv", "scale", "normalized"}, "atom spec")
    kinds = [k for k in ("cosine", "constant", "csv") if k in spec]
    if len(kinds) != 1:
        raise ValueError(f"atom spec needs exactly one of cosine/constant/csv, got {spec!r}")
    if "normalized" in spec and kinds[0] != "cosine":
        raise ValueError("'normalized' applies only to cosine atoms")
    if kinds[0] == "cosine":
        g = cosine_basis(int(spec["cosine"]), grid, normalized=bool(spec.get("normalized", False)))
    elif kinds[0] == "constant":
        g = GridFunction.constant(grid, float(spec["constant"]))
    else:
        g = GridFunction.from_csv(spec["csv"])
        if g.grid != grid:
            raise GridMismatchError(f"csv atom grid (T={g.grid.T}, N={g.grid.N}) != run grid (T={grid.T}, N={grid.N})")
    if "scale" in spec:
        g = g * float(spec["scale"])
    return g


def profile_from_spec(spec: dict) -> ProductGaussPoly | BlackBoxF:
    """Profile spec: {"pgp": {"factors": [...]}} or {"bbox": {...}}."""
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError(f"profile spec must be exactly one of pgp/bbox, got {spec!r}")
    kind, body = next(iter(spec.items()))
    if kind == "pgp":
        _check_keys(body, {"factors"}, "pgp spec")
        factors = []
        for fs in body["factors"]:
            _check_keys(fs, {"coeffs", "a", "b"}, "pgp factor")
            coeffs = tuple(_as_complex(c) for c in fs["coeffs"])
            factors.append(GaussPolyFactor(coeffs, _as_complex(fs["a"]), _as_complex(fs.get("b", 0))))
        return ProductGaussPoly(tuple(factors))
    if kind == "bbox":
        _check_keys(body, {"form", "arity", "box", "points", "c", "radius"}, "bbox spec")
        return BlackBoxF.from_form(
            body["form"],
            int(body["arity"]),
            float(body["box"]),
            int(body["points"]),
            c=body.get("c"),
            radius=float(body.get("radius", 1.0)),
        )
    raise ValueError(f"unknown profile kind {kind!r}")


def functional_from_spec(spec: dict, grid: TimeGrid) -> CylinderFunctional:
    """Functional spec: {"family": [atom, ...], "f": profile}."""
    _check_keys(spec, {"family", "f"}, "functional spec")
    if "family" not in spec or "f" not in spec:
        raise ValueError("functional spec needs 'family' and 'f'")
    atoms = tuple(atom_from_spec(a, grid) for a in spec["family"])
    return CylinderFunctional(OrthogonalFamily(atoms), profile_from_spec(spec["f"]))
