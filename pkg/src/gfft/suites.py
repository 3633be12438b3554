"""Verification suites behind the CLI: rotation, transform, algebra.

Each suite turns its config block into case payloads of plain JSON-able
data, runs them (optionally across worker processes), and returns typed
rows plus wall-clock timings per section.  Case k of suite s draws from
RngStream(seed, offset_s + k), so results are independent of execution
order and worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .algebra import GroupWord, MonoidElem, SeqClass, TransformClass, barwedge, monoid_op, q_group_laws, word_eval, word_reduce, xi, xi_inv
from .config import ConfigError, RunConfig
from .cylinder import (
    BlackBoxF,
    CylinderFunctional,
    GaussPolyFactor,
    OrthogonalFamily,
    ProductGaussPoly,
    a2_norm,
    atom_from_spec,
    cosine_basis,
    eval_cylinder,
    functional_from_spec,
    max_param_diff,
)
from .grid_core import GridFunction, HSeq, TimeGrid, norm_l2, s_combine, s_combine_seq, wedge
from .transform import QElem, gfft, gfft_general, plancherel_check, q_compose, t_lambda, t_lambda_mc
from .wiener_mc import RngStream, rotation_pair_estimates, rotation_seq_estimates, sample_path, zscore

_ROTATION_STREAM = 1000
_TRANSFORM_STREAM = 2000
_ALGEBRA_STREAM = 3000

Z_TOL = 3.0


@dataclass(frozen=True)
class RotationRow:
    case: str
    estimate_a: complex
    stderr_a: float
    estimate_b: complex
    stderr_b: float
    zscore: float
    passed: bool


@dataclass(frozen=True)
class TransformRow:
    case: str
    check: str
    residual: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class AlgebraRow:
    law: str
    sample_id: int
    residual: float
    passed: bool
    tolerance: float = 0.0


def _wrap_config_errors(build, what: str):
    try:
        return build()
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"invalid {what}: {e}") from e


def _map_cases(fn, payloads, parallel: int):
    if parallel > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(fn, payloads))
    return [fn(p) for p in payloads]


# -- rotation ------------------------------------------------------------------


def _run_pair_case(payload: dict) -> list[RotationRow]:
    grid = TimeGrid(payload["T"], payload["N"])
    fs = [functional_from_spec(s, grid) for s in payload["functionals"]]
    h1 = atom_from_spec(payload["h1"], grid)
    h2 = atom_from_spec(payload["h2"], grid)
    rng = RngStream(payload["seed"], _ROTATION_STREAM + payload["index"])
    rows = []
    for k, (a, b) in enumerate(rotation_pair_estimates(fs, h1, h2, payload["n"], rng)):
        z = zscore(a, b)
        rows.append(RotationRow(f"pair_{payload['name']}:f{k}", a.mean, a.stderr, b.mean, b.stderr, z, z <= Z_TOL))
    return rows


def _run_seq_case(payload: dict) -> list[RotationRow]:
    grid = TimeGrid(payload["T"], payload["N"])
    fs = [functional_from_spec(s, grid) for s in payload["functionals"]]
    H = HSeq.of(*(atom_from_spec(s, grid) for s in payload["H"]))
    extra = atom_from_spec(payload["extra"], grid)
    rng = RngStream(payload["seed"], _ROTATION_STREAM + payload["index"])
    rows = []
    for k, (e1, e2, e3) in enumerate(rotation_seq_estimates(fs, H, extra, payload["n"], rng)):
        for tag, (u, v) in (("e12", (e1, e2)), ("e13", (e1, e3)), ("e23", (e2, e3))):
            z = zscore(u, v)
            rows.append(
                RotationRow(f"{payload['name']}:f{k}:{tag}", u.mean, u.stderr, v.mean, v.stderr, z, z <= Z_TOL)
            )
    return rows


def _build_rotation_inputs(cfg: RunConfig) -> None:
    grid = TimeGrid(cfg.T, cfg.N)
    for s in cfg.rotation["functionals"]:
        functional_from_spec(s, grid)
    for p in cfg.rotation["pairs"]:
        atom_from_spec(p["h1"], grid)
        atom_from_spec(p["h2"], grid)
    for s in cfg.rotation["sequences"]:
        for a in s["H"]:
            atom_from_spec(a, grid)
        atom_from_spec(s["extra"], grid)


def run_rotation(cfg: RunConfig, parallel: int = 1) -> tuple[list[RotationRow], dict[str, float]]:
    """All configured pair and sequence rotation cases."""
    block = cfg.rotation
    base = {"T": cfg.T, "N": cfg.N, "n": cfg.n, "seed": cfg.seed, "functionals": block["functionals"]}
    pair_payloads = [
        dict(base, index=i, name=p["name"], h1=p["h1"], h2=p["h2"]) for i, p in enumerate(block["pairs"])
    ]
    seq_payloads = [
        dict(base, index=len(pair_payloads) + i, name=s["name"], H=s["H"], extra=s["extra"])
        for i, s in enumerate(block["sequences"])
    ]
    # build case inputs eagerly so config errors surface before any sampling
    _wrap_config_errors(lambda: _build_rotation_inputs(cfg), "rotation config")

    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    pair_rows = [r for rows in _map_cases(_run_pair_case, pair_payloads, parallel) for r in rows]
    timings["rotation/pairs"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    seq_rows = [r for rows in _map_cases(_run_seq_case, seq_payloads, parallel) for r in rows]
    timings["rotation/seq"] = time.perf_counter() - t0
    return pair_rows + seq_rows, timings


# -- transform -----------------------------------------------------------------


def _random_factor(rng: RngStream, deg_max: int = 3) -> GaussPolyFactor:
    d = int(rng.integers(0, deg_max + 1))
    coeffs = tuple(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(d + 1))
    a = complex(rng.uniform(0.4, 1.6), rng.uniform(-0.3, 0.3))
    b = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
    return GaussPolyFactor(coeffs, a, b)


def _random_functional(rng: RngStream, grid: TimeGrid, max_arity: int = 3) -> CylinderFunctional:
    arity = int(rng.integers(1, max_arity + 1))
    fam = OrthogonalFamily(tuple(cosine_basis(j, grid) for j in range(1, arity + 1)))
    return CylinderFunctional(fam, ProductGaussPoly(tuple(_random_factor(rng) for _ in range(arity))))


def _random_q(rng: RngStream) -> float:
    # nonzero by redraw; tiny |q| makes the roundtrip ill-conditioned
    while True:
        q = float(rng.uniform(-5.0, 5.0))
        if abs(q) >= 1e-3:
            return q


def _random_weight(rng: RngStream, grid: TimeGrid) -> GridFunction:
    scale = float(rng.uniform(0.5, 2.0))
    if int(rng.integers(0, 2)) == 0:
        return GridFunction.constant(grid, scale)
    j = int(rng.integers(4, 10))
    return scale * cosine_basis(j, grid)


def _inverse_rows(cfg: RunConfig) -> list[TransformRow]:
    grid = TimeGrid(cfg.T, cfg.N)
    sec = RngStream(cfg.seed, _TRANSFORM_STREAM + 0)
    rows = []
    for i in range(cfg.transform["inverse_cases"]):
        rng = sec.substream(i)
        F = _random_functional(rng, grid)
        q = _random_q(rng)
        h = _random_weight(rng, grid)
        back = gfft(gfft(F, q, h), -q, h)
        resid = max_param_diff(back.f, F.f)
        rows.append(TransformRow(f"inverse:{i}", "roundtrip_max_param", resid, 1e-9, resid <= 1e-9))
    return rows


def _compose_rows(cfg: RunConfig) -> list[TransformRow]:
    grid = TimeGrid(cfg.T, cfg.N)
    sec = RngStream(cfg.seed, _TRANSFORM_STREAM + 1)
    rows = []
    from .transform import compose_check

    for i in range(cfg.transform["compose_cases"]):
        rng = sec.substream(i)
        F = _random_functional(rng, grid, max_arity=2)
        q = _random_q(rng)
        h1 = _random_weight(rng, grid)
        h2 = _random_weight(rng, grid)
        dist, ref = compose_check(F, q, h1, h2)
        rel = dist / ref if ref > 0 else math.inf
        rows.append(TransformRow(f"compose:{i}", "relative_residual", rel, 1e-8, rel <= 1e-8))
    if not rows:
        return rows

    # sequence corollary: folding three weights equals one combined weight
    rng = sec.substream(10_000)
    F = _random_functional(rng, grid, max_arity=1)
    q = 2.0
    hs = [_random_weight(rng, grid) for _ in range(3)]
    lhs = F
    for h in hs:
        lhs = gfft(lhs, q, h)
    rhs = gfft(F, q, s_combine_seq(HSeq.of(*hs)))
    rel = max_param_diff(lhs.f, rhs.f)
    rows.append(TransformRow("compose_seq3", "max_param_diff", rel, 1e-8, rel <= 1e-8))

    # wedge corollary: s of a concatenation equals s of the two s-values
    H1 = HSeq.of(hs[0], hs[1])
    H2 = HSeq.of(hs[2])
    t_wedge = gfft(F, q, s_combine_seq(wedge(H1, H2)))
    t_pair = gfft(F, q, s_combine(s_combine_seq(H1), s_combine_seq(H2)))
    rel = max_param_diff(t_wedge.f, t_pair.f)
    rows.append(TransformRow("compose_wedge", "max_param_diff", rel, 1e-8, rel <= 1e-8))
    return rows


def _plancherel_rows(cfg: RunConfig) -> list[TransformRow]:
    grid = TimeGrid(cfg.T, cfg.N)
    sec = RngStream(cfg.seed, _TRANSFORM_STREAM + 2)
    rows = []
    for i in range(cfg.transform["plancherel_cases"]):
        rng = sec.substream(i)
        arity = int(rng.integers(1, 3))
        fam = OrthogonalFamily(tuple(cosine_basis(j, grid) for j in range(1, arity + 1)))
        F = CylinderFunctional(fam, ProductGaussPoly(tuple(_random_factor(rng) for _ in range(arity))))
        j = int(rng.integers(4, 10))
        e = cosine_basis(j, grid)
        h = (1.0 / norm_l2(fam.atoms[0] * e)) * e
        q = _random_q(rng)
        n_f, n_tf = plancherel_check(F, q, h)
        resid = abs(n_tf / n_f - 1.0)
        rows.append(TransformRow(f"plancherel:{i}", "norm_ratio_err", resid, 1e-8, resid <= 1e-8))
    return rows


def _indicator_row(cfg: RunConfig) -> list[TransformRow]:
    # bounded-profile isometry through the regularized quadrature route
    grid = TimeGrid(cfg.T, cfg.N)
    fam = OrthogonalFamily((cosine_basis(1, grid),))
    F = CylinderFunctional(fam, BlackBoxF.from_form("indicator", 1, 1.0, 384, radius=1.0))
    e5 = cosine_basis(5, grid)
    h = (1.0 / norm_l2(fam.atoms[0] * e5)) * e5
    qt = gfft_general(F, 2.0, h, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6], r_extent=100.0, r_points=8001, tol=1e-2)
    resid = abs(qt.l2_norm / a2_norm(F) - 1.0)
    return [
        TransformRow("plancherel_indicator", "norm_ratio_err", resid, 1e-2, resid <= 1e-2),
        TransformRow("plancherel_indicator", "l2_cauchy_diff", qt.l2_diffs[-1], qt.tol, qt.converged),
    ]


def _quadrature_rows(cfg: RunConfig) -> list[TransformRow]:
    if not cfg.transform["quadrature"]["rho_values"]:
        return []
    grid = TimeGrid(cfg.T, cfg.N)
    fam = OrthogonalFamily((cosine_basis(1, grid),))
    F = CylinderFunctional(fam, ProductGaussPoly((GaussPolyFactor((1.0, 0.2), 1.0, 0.1),)))
    h = 1.2 * cosine_basis(5, grid)
    q = 2.0
    closed = gfft(F, q, h)
    quad_cfg = cfg.transform["quadrature"]
    eps = [float(e) for e in quad_cfg["eps_sequence"]]
    tol = float(quad_cfg["tol"])
    rows = []
    for rho in quad_cfg["rho_values"]:
        qt = gfft_general(F, q, h, eps, rho=float(rho), r_extent=2.0, r_points=41, tol=tol)
        want = closed.f.eval(qt.axes[0].reshape(-1, 1))
        resid = float(np.max(np.abs(qt.values - want)))
        rows.append(TransformRow(f"quad_rho_{rho:g}", "max_abs_vs_closed", resid, 1e-6, resid <= 1e-6))
        rows.append(TransformRow(f"quad_rho_{rho:g}", "l2_cauchy_diff", qt.l2_diffs[-1], qt.tol, qt.converged))

    qt1 = gfft_general(F, q, h, eps, r_extent=2.0, r_points=41, tol=tol, box_factor=1.0)
    qt2 = gfft_general(F, q, h, eps, r_extent=2.0, r_points=41, tol=tol, box_factor=2.0)
    resid = float(np.max(np.abs(qt1.values - qt2.values)))
    rows.append(TransformRow("quad_box_doubling", "max_abs_change", resid, 1e-9, resid <= 1e-9))
    return rows


def _run_mc_case(payload: dict) -> list[TransformRow]:
    grid = TimeGrid(payload["T"], payload["N"])
    F = functional_from_spec(payload["functional"], grid)
    h = atom_from_spec(payload["weight"], grid)
    lam = payload["lam"]
    rng = RngStream(payload["seed"], _TRANSFORM_STREAM + 100 + payload["index"])
    y = sample_path(grid, rng.substream(0))
    est = t_lambda_mc(F, lam, h, y, payload["n"], rng.substream(1))
    exact = eval_cylinder(t_lambda(F, lam, h), y)
    z = abs(est.mean - exact) / est.stderr if est.stderr > 0 else (0.0 if est.mean == exact else math.inf)
    return [TransformRow(f"mc:f{payload['fidx']}:lam{lam:g}", "zscore_vs_closed", z, Z_TOL, z <= Z_TOL)]


def run_transform(cfg: RunConfig, parallel: int = 1) -> tuple[list[TransformRow], dict[str, float]]:
    """Inverse, composition, isometry, quadrature, and MC-continuation checks."""
    timings: dict[str, float] = {}
    rows: list[TransformRow] = []

    for name, fn in (
        ("transform/inverse", _inverse_rows),
        ("transform/compose", _compose_rows),
        ("transform/plancherel", _plancherel_rows),
    ):
        t0 = time.perf_counter()
        rows.extend(_wrap_config_errors(lambda fn=fn: fn(cfg), name))
        timings[name] = time.perf_counter() - t0

    t0 = time.perf_counter()
    quad_rows = _wrap_config_errors(lambda: _quadrature_rows(cfg), "transform/quadrature")
    if cfg.transform["indicator"]:
        quad_rows.extend(_indicator_row(cfg))
    rows.extend(quad_rows)
    timings["transform/quadrature"] = time.perf_counter() - t0

    mc_cfg = cfg.transform["mc"]
    mc_n = mc_cfg.get("n", cfg.n)
    payloads = []
    idx = 0
    for fidx, fspec in enumerate(mc_cfg["functionals"]):
        for lam in mc_cfg["lambdas"]:
            payloads.append(
                {
                    "T": cfg.T,
                    "N": cfg.N,
                    "n": mc_n,
                    "seed": cfg.seed,
                    "index": idx,
                    "fidx": fidx,
                    "functional": fspec,
                    "weight": mc_cfg["weight"],
                    "lam": float(lam),
                }
            )
            idx += 1
    _wrap_config_errors(
        lambda: [functional_from_spec(s, TimeGrid(cfg.T, cfg.N)) for s in mc_cfg["functionals"]], "transform.mc config"
    )
    t0 = time.perf_counter()
    rows.extend(r for case_rows in _map_cases(_run_mc_case, payloads, parallel) for r in case_rows)
    timings["transform/mc"] = time.perf_counter() - t0
    return rows, timings


# -- algebra -------------------------------------------------------------------


def _qgroup_rows(cfg: RunConfig) -> list[AlgebraRow]:
    count = cfg.algebra["q_sample"]
    rows: list[AlgebraRow] = []
    if count:
        rng = RngStream(cfg.seed, _ALGEBRA_STREAM + 0)
        ks = rng.integers(-(2**20), 2**20, size=count)
        ks = np.where(ks == 0, 1, ks)  # r = 0 is the identity, sampled separately
        sample = [QElem(float(k) / 1024.0) for k in ks]
        rows.extend(AlgebraRow(r.law, r.sample_id, r.residual, r.passed) for r in q_group_laws(sample))
        two = QElem.from_q(2.0)
        resid = abs(q_compose(two, two).q - 1.0)
        rows.append(AlgebraRow("q_compose_2_2", 0, resid, resid == 0.0))
        g = QElem.from_q(3.0)
        resid = abs(q_compose(g, g.inverse()).r)
        rows.append(AlgebraRow("q_inverse_identity", 0, resid, resid == 0.0))
    return rows


def _monoid_generators(grid: TimeGrid) -> list[MonoidElem]:
    e5 = cosine_basis(5, grid)
    e6 = cosine_basis(6, grid)
    ramp = GridFunction.from_callable(grid, lambda t: t)
    return [
        MonoidElem.identity(grid),
        MonoidElem.from_weight(GridFunction.constant(grid, 1.0)),
        MonoidElem.from_weight(GridFunction.constant(grid, 0.5)),
        MonoidElem.from_weight(e5),
        MonoidElem.from_weight(1.3 * e6),
        MonoidElem.from_weight(ramp),
    ]


def _max_diff(a: GridFunction, b: GridFunction) -> float:
    return float(np.max(np.abs(a.values - b.values)))


def _monoid_rows(cfg: RunConfig) -> list[AlgebraRow]:
    if not cfg.algebra.get("monoid_tables", True):
        return []
    grid = TimeGrid(cfg.T, cfg.N)
    gens = _monoid_generators(grid)
    rows: list[AlgebraRow] = []
    sid = 0
    for g in gens:
        resid = _max_diff(monoid_op(g, gens[0]).rep, g.rep)
        rows.append(AlgebraRow("monoid_identity", sid, resid, resid == 0.0))
        sid += 1
    sid = 0
    for x in gens:
        for y in gens:
            resid = _max_diff(monoid_op(x, y).rep, monoid_op(y, x).rep)
            rows.append(AlgebraRow("monoid_commutative", sid, resid, resid == 0.0))
            sid += 1
    sid = 0
    for x in gens:
        for y in gens:
            for z in gens:
                resid = _max_diff(monoid_op(monoid_op(x, y), z).rep, monoid_op(x, monoid_op(y, z)).rep)
                rows.append(AlgebraRow("monoid_associative", sid, resid, resid <= 1e-9, 1e-9))
                sid += 1

    # Xi: composing transform classes then forgetting q equals combining
    # the weight classes directly
    q = 2.0
    tcls = [TransformClass(q, SeqClass.from_weight(g.rep)) for g in gens[1:]]
    sid = 0
    for t1 in tcls:
        for t2 in tcls:
            lhs = xi(barwedge(t1, t2))
            rhs = SeqClass.from_seq(HSeq.of(xi(t1).rep, xi(t2).rep))
            resid = _max_diff(lhs.rep, rhs.rep)
            rows.append(AlgebraRow("xi_homomorphism", sid, resid, resid <= 1e-9, 1e-9))
            sid += 1
    sid = 0
    for t1 in tcls:
        back = xi_inv(xi(t1), q)
        resid = _max_diff(back.cls.rep, t1.cls.rep) + abs(back.q - t1.q)
        rows.append(AlgebraRow("xi_roundtrip", sid, resid, resid == 0.0))
        sid += 1
    return rows


def _barwedge_rows(cfg: RunConfig) -> list[AlgebraRow]:
    grid = TimeGrid(cfg.T, cfg.N)
    gens = [g.rep for g in _monoid_generators(grid)[1:]]
    rng = RngStream(cfg.seed, _ALGEBRA_STREAM + 1)
    rows = []
    for i in range(cfg.algebra["witness_substitutions"]):
        r = rng.substream(i)
        g1 = gens[int(r.integers(0, len(gens)))]
        g2 = gens[int(r.integers(0, len(gens)))]
        H1 = HSeq.of(g1, g2)
        th = float(r.uniform(0.1, 1.4))
        s1 = s_combine_seq(H1)
        H1p = HSeq.of(math.cos(th) * s1, math.sin(th) * s1)  # same class, new witness
        g3 = gens[int(r.integers(0, len(gens)))]
        H2 = HSeq.of(g3)
        H2p = HSeq.of(0.6 * g3, 0.8 * g3)
        q = 2.0
        lhs = barwedge(TransformClass(q, SeqClass.from_seq(H1)), TransformClass(q, SeqClass.from_seq(H2)))
        rhs = barwedge(TransformClass(q, SeqClass.from_seq(H1p)), TransformClass(q, SeqClass.from_seq(H2p)))
        resid = _max_diff(lhs.cls.rep, rhs.cls.rep)
        rows.append(AlgebraRow("barwedge_welldefined", i, resid, resid <= 1e-9, 1e-9))
    return rows


def _random_order_reduce(letters: list[tuple[int, int]], rng: RngStream) -> list[tuple[int, int]]:
    # oracle reducer over (sign, pool_id) letters: cancel a random reducible
    # adjacent pair until none remain
    letters = list(letters)
    while True:
        hits = [i for i in range(len(letters) - 1) if letters[i][0] == -letters[i + 1][0] and letters[i][1] == letters[i + 1][1]]
        if not hits:
            return letters
        i = hits[int(rng.integers(0, len(hits)))]
        del letters[i : i + 2]


def _word_rows(cfg: RunConfig) -> list[AlgebraRow]:
    grid = TimeGrid(cfg.T, cfg.N)
    pool = [SeqClass.from_weight(g.rep) for g in _monoid_generators(grid)[1:4]]
    rows: list[AlgebraRow] = []
    rng = RngStream(cfg.seed, _ALGEBRA_STREAM + 2)
    for i in range(cfg.algebra["reduce_words"]):
        r = rng.substream(i)
        length = int(r.integers(0, 31))
        ids = [(int(s), int(p)) for s, p in zip(r.integers(0, 2, size=length) * 2 - 1, r.integers(0, len(pool), size=length))]
        w = GroupWord(2.0, tuple((s, pool[p]) for s, p in ids))
        red = word_reduce(w)
        again = word_reduce(red)
        resid = float(len(again) != len(red) or any(
            s1 != s2 or not c1.same_class(c2, 0.0) for (s1, c1), (s2, c2) in zip(red.letters, again.letters)
        ))
        rows.append(AlgebraRow("reduce_idempotent", i, resid, resid == 0.0))
        oracle = _random_order_reduce(ids, r)
        resid = float(len(oracle) != len(red) or any(
            s1 != s2 or not pool[p].same_class(c, 0.0) for (s1, c), (s2, p) in zip(red.letters, oracle)
        ))
        rows.append(AlgebraRow("reduce_confluent", i, resid, resid == 0.0))
    return rows


def _word_eval_rows(cfg: RunConfig) -> list[AlgebraRow]:
    grid = TimeGrid(cfg.T, cfg.N)
    fam = OrthogonalFamily((cosine_basis(1, grid),))
    F = CylinderFunctional(fam, ProductGaussPoly((GaussPolyFactor((1.0, 0.3), 1.0, 0.1),)))
    # orthonormal-class letters: unit-scaled high cosines
    letters = []
    for j in range(4, 10):
        e = cosine_basis(j, grid)
        letters.append(SeqClass.from_weight((1.0 / norm_l2(fam.atoms[0] * e)) * e))
    rows: list[AlgebraRow] = []
    rng = RngStream(cfg.seed, _ALGEBRA_STREAM + 3)
    for i in range(cfg.algebra["eval_words"]):
        r = rng.substream(i)
        length = int(r.integers(1, 7))
        ltrs = tuple(
            (int(s), letters[int(p)])
            for s, p in zip(r.integers(0, 2, size=length) * 2 - 1, r.integers(0, len(letters), size=length))
        )
        w = GroupWord(2.0, ltrs)
        out_full = word_eval(w, F)
        out_red = word_eval(word_reduce(w), F)
        resid = max_param_diff(out_full.f, out_red.f)
        rows.append(AlgebraRow("word_eval_reduced", i, resid, resid <= 1e-7, 1e-7))

        # isometry letter by letter
        cur = F
        worst = 0.0
        for sign, cls in reversed(w.letters):
            nxt = gfft(cur, sign * w.q, cls.rep)
            worst = max(worst, abs(a2_norm(nxt) / a2_norm(cur) - 1.0))
            cur = nxt
        rows.append(AlgebraRow("word_norm_letterwise", i, worst, worst <= 1e-7, 1e-7))
    return rows


def run_algebra(cfg: RunConfig, parallel: int = 1) -> tuple[list[AlgebraRow], dict[str, float]]:
    """Group laws, monoid/quotient tables, and free-word checks."""
    timings: dict[str, float] = {}
    rows: list[AlgebraRow] = []
    t0 = time.perf_counter()
    rows.extend(_qgroup_rows(cfg))
    timings["algebra/qgroup"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    rows.extend(_monoid_rows(cfg))
    rows.extend(_barwedge_rows(cfg))
    timings["algebra/monoid"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    rows.extend(_word_rows(cfg))
    rows.extend(_word_eval_rows(cfg))
    timings["algebra/words"] = time.perf_counter() - t0
    return rows, timings
