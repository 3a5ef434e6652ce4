"""Suite orchestration: configuration, deterministic seeding, reports.

Every suite produces a flat list of check records, each carrying a stable
identifier, a human-readable claim string, an input digest, the measured
value, its target, the margin (nonnegative means pass), and a pass flag.
Identical configuration and seed produce byte-identical tabular reports;
a failing check never aborts its siblings.  Worker count is taken from the
``RIESZ_VERIFY_WORKERS`` environment variable (default: serial).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import bellman as bl
from . import embedding as em
from . import normest as ne
from . import spectral as sp
from .orthosys import AxisSystem, FamilyTag, make_axis
from .quadgrid import gauss_rule, tensor_grid

__all__ = [
    "SuiteConfig",
    "CheckRecord",
    "SuiteReport",
    "SUITES",
    "DEFAULT_TOLERANCES",
    "DEFAULT_SYSTEMS",
    "run",
    "emit",
    "load_report",
]

SUITES = ("ortho", "ladder", "assumptions", "form1", "embedding", "bellman",
          "diffineq", "normbound", "constants", "all")

DEFAULT_TOLERANCES = {
    "ortho.orthonormality": 1e-10,
    "ortho.eigen_rel": 1e-6,
    "ortho.r_consistency": 1e-10,
    "ortho.v_consistency": 1e-10,
    "ladder.norm": 1e-8,
    "ladder.consistency": 1e-6,
    "assumptions.a1": 0.0,
    "assumptions.a2_rel": 1e-12,
    "form1.relerr": 1e-8,
    "form1.t_integral": 1e-10,
    "embedding.ratio": 1.0,
    "bellman.hess_margin": -1e-8,
    "bellman.grad_margin": -1e-6,
    "diffineq.identity": 1e-4,
    "diffineq.margin": -1e-6,
    "normbound.contraction": 1e-10,
    "normbound.slack": 1e-9,
    "constants.sup_h": 6.0,
}

# theorem-range default parameters for the seven systems
DEFAULT_SYSTEMS = (
    ("hermite-poly", {}),
    ("laguerre-poly", {"alpha": 0.0}),
    ("jacobi-poly", {"alpha": 0.5, "beta": 0.0}),
    ("hermite-func", {}),
    ("laguerre-func-h", {"alpha": 1.5}),
    ("laguerre-func-conv", {"alpha": 0.5}),
    ("jacobi-func", {"alpha": 1.5, "beta": 1.5}),
)


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "all"
    systems: tuple = DEFAULT_SYSTEMS
    d: int = 2
    N: int = 6
    p_list: tuple = (1.5, 2.0, 3.0, 6.0)
    trials: int = 25
    seed: int = 20230517
    tolerances: tuple = ()     # ((key, value), ...) overrides
    output_dir: str = "reports"

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}")
        if self.d < 1 or self.d > 3:
            raise ValueError("d must lie in 1..3")
        if self.d == 3 and self.N > 16:
            raise ValueError("N must be <= 16 when d = 3 (grid-size guard)")

    def tol(self, key: str) -> float:
        for k, v in self.tolerances:
            if k == key:
                return float(v)
        return DEFAULT_TOLERANCES[key]


@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    anchor: str
    digest: str
    value: float
    target: float
    margin: float
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    records: list
    summary: dict
    config: dict
    wall_time: float
    plotdata: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.records)

    def __eq__(self, other):
        if not isinstance(other, SuiteReport):
            return NotImplemented
        return (self.records == other.records and self.summary == other.summary
                and self.config == other.config
                and self.wall_time == other.wall_time
                and self.plotdata == other.plotdata)


def _digest(**inputs) -> str:
    blob = json.dumps(inputs, sort_keys=True, default=str)
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


def _seed_for(cfg: SuiteConfig, check_id: str) -> int:
    h = hashlib.sha1(f"{cfg.seed}:{check_id}".encode()).digest()
    return int.from_bytes(h[:8], "big") % (2 ** 63)


def _axes_for(tag: str, params: dict, d: int) -> sp.ProductSystem:
    return sp.product_system([make_axis(tag, **params)] * d)


def _rec(check_id, anchor, value, target, margin, passed, detail="", **inputs):
    return CheckRecord(check_id, anchor, _digest(**inputs), float(value),
                       float(target), float(margin), bool(passed), detail)


def _domain_samples(ax: AxisSystem, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample points spread over the axis, including near-edge decades."""
    t = ax.tag
    if t in (FamilyTag.HERMITE_POLY, FamilyTag.HERMITE_FUNC):
        base = rng.uniform(-8.0, 8.0, n)
        if t is FamilyTag.HERMITE_FUNC:
            return base
        return base
    if t in (FamilyTag.LAGUERRE_POLY, FamilyTag.LAGUERRE_FUNC_H,
             FamilyTag.LAGUERRE_FUNC_CONV):
        lo = 10.0 ** rng.uniform(-5, 1.3, n // 2)
        hi = rng.uniform(1e-4, 30.0, n - n // 2)
        return np.concatenate([lo, hi])
    if t is FamilyTag.JACOBI_POLY:
        mid = rng.uniform(-1 + 1e-9, 1 - 1e-9, n - n // 2)
        edge = 1.0 - 10.0 ** rng.uniform(-9, -1, n // 2)
        edge *= rng.choice([-1.0, 1.0], n // 2)
        return np.concatenate([mid, edge])
    mid = rng.uniform(1e-9, math.pi - 1e-9, n - n // 2)
    edge = 10.0 ** rng.uniform(-9, -1, n // 2)
    edge = np.where(rng.random(n // 2) < 0.5, edge, math.pi - edge)
    return np.concatenate([mid, edge])


def _consistency_samples(ax: AxisSystem, n: int, rng: np.random.Generator) -> np.ndarray:
    """Like _domain_samples but approaching endpoints only to ~1e-6."""
    xs = _domain_samples(ax, n, rng)
    lo, hi = ax.domain
    if math.isfinite(lo):
        xs = np.maximum(xs, lo + 1e-6)
    if math.isfinite(hi):
        xs = np.minimum(xs, hi - 1e-6)
    return xs


# -- suites ----------------------------------------------------------------------------


def run_ortho(cfg: SuiteConfig) -> list:
    records = []
    kmax = 20
    for tag, params in cfg.systems:
        ax = make_axis(tag, **params)
        label = f"ortho/{tag}"
        rule = gauss_rule(ax, max(2 * kmax + 8, 48))
        table = ax.eval_phi_table(kmax, rule.nodes)
        gram = (table * rule.weights) @ table.T
        err = float(np.max(np.abs(gram - np.eye(kmax + 1))))
        tol = cfg.tol("ortho.orthonormality")
        records.append(_rec(
            f"{label}/orthonormality", "<phi_j, phi_k> = delta_jk (k,m <= 20)",
            err, tol, tol - err, err <= tol, tag=tag, params=params))

        # eigen-relation by finite differences at interior sample points
        xs = rule.nodes[rule.n // 5: -max(rule.n // 5, 1)]
        worst = 0.0
        for k in (0, 1, 5, 12, 20):
            lam = max(abs(ax.lambda_(k)), 1.0)
            h = 1e-3 / math.sqrt(lam)
            f0 = ax.eval_phi_table(k, xs)[k]
            fp = ax.eval_phi_table(k, xs + h)[k]
            fm = ax.eval_phi_table(k, xs - h)[k]
            lf = (-ax.p(xs) ** 2 * (fp - 2 * f0 + fm) / h ** 2
                  - ax.drift(xs) * (fp - fm) / (2 * h) + ax.r_part(xs) * f0)
            scale = max(float(np.max(np.abs(ax.lambda_(k) * f0))), 1.0)
            worst = max(worst, float(np.max(np.abs(lf - ax.lambda_(k) * f0))) / scale)
        tol = cfg.tol("ortho.eigen_rel")
        records.append(_rec(
            f"{label}/eigen-relation", "L phi_k = lambda_k phi_k (finite differences)",
            worst, tol, tol - worst, worst <= tol, tag=tag, params=params))

        # closed forms of v and r against their defining combinations;
        # moderate edge approach only (both routes amplify roundoff near a
        # singular endpoint, so the comparison is ill-posed beyond ~1e-6)
        xs2 = _consistency_samples(ax, 600, np.random.default_rng(_seed_for(cfg, label)))
        scale_v = 1.0 + np.abs(ax.v(xs2))
        dv = float(np.max(np.abs(ax.v(xs2) - ax.v_from_commutator(xs2)) / scale_v))
        tol = cfg.tol("ortho.v_consistency")
        records.append(_rec(
            f"{label}/v-consistency", "v = p(2q' - (p w'/w)' - p'')",
            dv, tol, tol - dv, dv <= tol, tag=tag, params=params))
        scale_r = 1.0 + np.abs(ax.r_part(xs2))
        dr = float(np.max(np.abs(ax.r_part(xs2) - ax.r_from_definition(xs2)) / scale_r))
        tol = cfg.tol("ortho.r_consistency")
        records.append(_rec(
            f"{label}/r-consistency", "r = a + q^2 - p q' - p' q - p q w'/w",
            dr, tol, tol - dr, dr <= tol, tag=tag, params=params))
    return records


def run_ladder(cfg: SuiteConfig) -> list:
    records = []
    kmax = 20
    for tag, params in cfg.systems:
        ax = make_axis(tag, **params)
        label = f"ladder/{tag}"
        rule = gauss_rule(ax, max(2 * kmax + 8, 48))
        worst = 0.0
        for k in range(kmax + 1):
            lv = ax.ladder_values(k, rule.nodes)
            n2 = float(np.sum(rule.weights * lv * lv))
            gap = ax.lambda_(k) - ax.a
            worst = max(worst, abs(n2 - gap) / max(gap, 1.0))
        tol = cfg.tol("ladder.norm")
        records.append(_rec(
            f"{label}/norm", "||delta phi_k||^2 = lambda_k - a",
            worst, tol, tol - worst, worst <= tol, tag=tag, params=params))

        xs = rule.nodes[rule.n // 5: -max(rule.n // 5, 1)]
        worst = 0.0
        for k in (0, 1, 4, 9, 15):
            lam = max(ax.lambda_(k), 1.0)
            h = 1e-3 / math.sqrt(lam)
            fd = (ax.eval_phi_table(k, xs + h)[k]
                  - ax.eval_phi_table(k, xs - h)[k]) / (2 * h)
            delta_fd = ax.p(xs) * fd + ax.q(xs) * ax.eval_phi_table(k, xs)[k]
            lv = ax.ladder_values(k, xs)
            scale = max(float(np.max(np.abs(lv))), 1.0)
            worst = max(worst, float(np.max(np.abs(delta_fd - lv))) / scale)
        tol = cfg.tol("ladder.consistency")
        records.append(_rec(
            f"{label}/consistency", "ladder formula = p phi_k' + q phi_k pointwise",
            worst, tol, tol - worst, worst <= tol, tag=tag, params=params))
    return records


def run_assumptions(cfg: SuiteConfig) -> list:
    records = []
    n_samples = 10000
    for tag, params in cfg.systems:
        ax = make_axis(tag, **params)
        label = f"assumptions/{tag}"
        rng = np.random.default_rng(_seed_for(cfg, label))
        xs = _domain_samples(ax, n_samples, rng)
        vmin = float(np.min(ax.v(xs)))
        tol = cfg.tol("assumptions.a1")
        in_range = ax.family.in_theorem_range
        ok = vmin >= -abs(tol) - 1e-14
        detail = "" if in_range else "parameters outside the theorem range"
        records.append(_rec(
            f"{label}/A1", "commutator v >= 0 on domain samples",
            vmin, tol, vmin - tol, ok, detail, tag=tag, params=params))

        system = _axes_for(tag, params, cfg.d)
        cols = np.stack([_domain_samples(axi, n_samples, rng)
                         for axi in system.axes], axis=-1)
        K = system.K
        if not math.isfinite(K):
            records.append(_rec(
                f"{label}/A2", "sum q_i^2 <= K r with the per-system K",
                math.inf, 0.0, -math.inf, False,
                "no finite K admissible for these parameters",
                tag=tag, params=params, d=cfg.d))
            continue
        q2 = system.q_sum_squares(cols)
        r = system.r_values(cols)
        rel = (K * r - q2) / (1.0 + np.abs(K * r))
        worst = float(np.min(rel))
        tol = cfg.tol("assumptions.a2_rel")
        records.append(_rec(
            f"{label}/A2", f"sum q_i^2 <= K r, K = {K:.6g}",
            worst, -tol, worst + tol, worst >= -tol, f"K={K!r}",
            tag=tag, params=params, d=cfg.d))
    return records


def run_form1(cfg: SuiteConfig) -> list:
    records = []
    # closed-form t-integral against the numeric rule
    t, w = em.t_rule_weighted(0.5)
    svals = np.linspace(0.5, 50.0, 40)
    terr = max(abs(float(np.sum(w * np.exp(-s * t))) - s ** -2) * s ** 2
               for s in svals)
    tol = cfg.tol("form1.t_integral")
    records.append(_rec(
        "form1/t-integral", "int_0^inf exp(-s t) t dt = s^-2 on s in [0.5, 50]",
        terr, tol, tol - terr, terr <= tol))

    for tag, params in cfg.systems:
        for d in range(1, cfg.d + 1):
            label = f"form1/{tag}/d{d}"
            system = _axes_for(tag, params, d)
            grid = sp.default_grid(system, 6)
            worst_pairs = max(em.form1_pairs(system, i, 6, grid)
                              for i in range(d))
            tol = cfg.tol("form1.relerr")
            records.append(_rec(
                f"{label}/pairs", "<R_i f, g> = -4 int <delta_i P_t f, d_t Q_t g> t dt"
                " on basis pairs |k|,|n| <= 6",
                worst_pairs, tol, tol - worst_pairs, worst_pairs <= tol,
                tag=tag, params=params, d=d))

            rng = np.random.default_rng(_seed_for(cfg, label))
            worst = 0.0
            for _ in range(cfg.trials):
                f = sp.random_coeff(system, 6, rng, pi_range=True)
                i = int(rng.integers(d))
                g = sp.random_frame(system, i, 6, rng)
                _, _, rel = em.form1_check(system, i, f, g, grid)
                worst = max(worst, rel)
            records.append(_rec(
                f"{label}/random", "same identity on random (f, g) pairs",
                worst, tol, tol - worst, worst <= tol,
                tag=tag, params=params, d=d, trials=cfg.trials))
    return records


def run_embedding(cfg: SuiteConfig) -> tuple[list, list]:
    records, plot_rows = [], []
    for tag, params in cfg.systems:
        for d in range(1, cfg.d + 1):
            system = _axes_for(tag, params, d)
            N = min(cfg.N, 8)
            grid = tensor_grid(system.axes, max(2 * N, 40))
            for p in cfg.p_list:
                label = f"embedding/{tag}/d{d}/p{p:g}"
                rng = np.random.default_rng(_seed_for(cfg, label))
                worst = 0.0
                for trial in range(cfg.trials):
                    f = sp.random_coeff(system, N, rng, pi_range=True)
                    g = [sp.random_frame(system, i, N, rng) for i in range(d)]
                    state = em.make_flow_state(system, f, g, p, grid)
                    res = em.embedding_check(state)
                    worst = max(worst, res["ratio"])
                    plot_rows.append({"system": tag, "d": d, "p": p,
                                      "trial": trial, "ratio": res["ratio"],
                                      "lhs": res["lhs"], "bound": res["bound"]})
                tol = cfg.tol("embedding.ratio")
                records.append(_rec(
                    label, "space-time integral <= 6 (p*-1) ||Pi f||_p ||g||_q",
                    worst, tol, tol - worst, worst <= tol,
                    tag=tag, params=params, d=d, p=p, trials=cfg.trials))
    return records, plot_rows


def run_bellman(cfg: SuiteConfig) -> list:
    records = []
    p_values = sorted({max(p, p / (p - 1.0)) for p in cfg.p_list} | {2.0, 3.0, 6.0})
    for p in p_values:
        for m1, m2 in ((1, 1), (1, 2)):
            label = f"bellman/p{p:g}/m{m1}{m2}"
            seed = _seed_for(cfg, label)
            params = bl.BellmanParams(p, m1=m1, m2=m2)
            rng = np.random.default_rng(seed)
            z, e = bl.sample_points(rng, m1, m2, 10000)
            s1 = np.linalg.norm(z, axis=-1)
            s2 = np.linalg.norm(e, axis=-1)
            vals = bl.beta(params, s1, s2)
            size = np.max(vals / ((1.0 + params.gamma)
                                  * (s1 ** params.p + s2 ** params.q)))
            ok = bool(np.all(vals >= 0.0) and size <= 1.0 + 1e-12)
            records.append(_rec(
                f"{label}/size", "0 <= beta <= (1+gamma)(s1^p + s2^q)",
                float(size), 1.0, 1.0 - float(size), ok,
                p=p, m=(m1, m2), seed=seed))

            b1, b2, *_ = bl.beta_derivatives(params, s1, s2)
            gmin = float(min(np.min(b1), np.min(b2)))
            records.append(_rec(
                f"{label}/grad-signs", "d beta / d s_i >= 0",
                gmin, 0.0, gmin, gmin >= -1e-14, p=p, m=(m1, m2), seed=seed))

            rep = bl.check_hess_lower(params, n_points=10000, seed=seed)
            worst = min(rep["worst_exact"], rep["worst_sampled"])
            tol = cfg.tol("bellman.hess_margin")
            records.append(_rec(
                f"{label}/hess-margin", "<Hess B w, w> >= gamma |w1||w2|",
                worst, tol, worst - tol, worst >= tol,
                p=p, m=(m1, m2), seed=seed))

            rep0 = bl.check_grad_radial(params, n_points=10000, seed=seed)
            tol = cfg.tol("bellman.grad_margin")
            records.append(_rec(
                f"{label}/radial-margin", "<grad B(xi), xi> >= gamma |zeta||eta|",
                rep0["worst"], tol, rep0["worst"] - tol, rep0["worst"] >= tol,
                p=p, m=(m1, m2), seed=seed))

            pk = bl.BellmanParams(p, m1=m1, m2=m2, kappa=0.01)
            repk = bl.check_grad_radial(
                pk, n_points=10000, seed=seed,
                rule=bl.ball_rule(pk.m, 16 if pk.m == 3 else 24))
            records.append(_rec(
                f"{label}/radial-margin-mollified",
                "<grad B_k(xi), xi> + kappa E_k >= gamma |zeta||eta| (kappa = 0.01)",
                repk["worst"], tol, repk["worst"] - tol, repk["worst"] >= tol,
                f"E-shape constant {repk['E_shape_constant']:.4g}",
                p=p, m=(m1, m2), seed=seed, kappa=0.01))
    return records


def run_diffineq(cfg: SuiteConfig) -> list:
    records = []
    systems = [(t, prm) for t, prm in cfg.systems
               if t in ("hermite-poly", "hermite-func")]
    for tag, params in systems:
        for d in range(1, min(cfg.d, 2) + 1):
            system = _axes_for(tag, params, d)
            grid = tensor_grid(system.axes, 32)
            for p in (2.0, 3.0, 6.0):
                label = f"diffineq/{tag}/d{d}/p{p:g}"
                rng = np.random.default_rng(_seed_for(cfg, label))
                f = sp.random_coeff(system, 4, rng, pi_range=True)
                g = [sp.random_frame(system, i, 4, rng) for i in range(d)]
                state = em.make_flow_state(system, f, g, p, grid)
                rep = em.diff_ineq_check(state, n_samples=20,
                                         seed=_seed_for(cfg, label + "/pts"))
                tol = cfg.tol("diffineq.identity")
                records.append(_rec(
                    f"{label}/identity",
                    "(d_t^2 - Ltilde) B(u) = chain-rule expansion",
                    rep["identity_relerr"], tol, tol - rep["identity_relerr"],
                    rep["identity_relerr"] <= tol,
                    f"skipped {rep['n_skipped']} of {rep['n_checked'] + rep['n_skipped']}",
                    tag=tag, d=d, p=p))
                tol = cfg.tol("diffineq.margin")
                records.append(_rec(
                    f"{label}/margin",
                    "(d_t^2 - Ltilde) B(u) >= gamma |F|_* |G|_*",
                    rep["worst_margin"], tol, rep["worst_margin"] - tol,
                    rep["worst_margin"] >= tol, tag=tag, d=d, p=p))
    return records


def run_normbound(cfg: SuiteConfig) -> tuple[list, list]:
    records, rows = [], []
    n_for_d = {1: min(cfg.N + 4, 10), 2: min(cfg.N, 6), 3: 4}
    factories = {tag: (lambda d, t=tag, prm=params: _axes_for(t, prm, d))
                 for tag, params in cfg.systems}
    extra = {"hermite-poly": lambda p: 2.0 * (ne.pstar(p) - 1.0)}
    for name, make_system in factories.items():
        # L^2 contraction on random draws
        label = f"normbound/{name}/contraction"
        rng = np.random.default_rng(_seed_for(cfg, label))
        system = make_system(min(cfg.d, 2))
        grid = sp.default_grid(system, 6)
        worst = 0.0
        for _ in range(cfg.trials):
            f = sp.random_coeff(system, 6, rng)
            rv = sp.riesz_vector(f, grid)
            nrm = float(np.sqrt(np.sum(grid.weights
                                       * np.sum(rv.values ** 2, axis=0))))
            worst = max(worst, nrm / f.norm2())
        tol = cfg.tol("normbound.contraction")
        records.append(_rec(
            label, "||R f||_2 <= ||f||_2", worst, 1.0 + tol,
            1.0 + tol - worst, worst <= 1.0 + tol,
            system=name, trials=cfg.trials))

        for d in range(1, cfg.d + 1):
            system = make_system(d)
            N = n_for_d[d]
            grid = ne._cell_grid(system, N, max(cfg.p_list))
            for p in cfg.p_list:
                label = f"normbound/{name}/d{d}/p{p:g}"
                est = ne.pnorm_lower_bound(system, p, N, method="boyd",
                                           seed=_seed_for(cfg, label), grid=grid)
                bound = est.paper_bound
                if name in extra:
                    bound = min(bound, extra[name](p))
                slack = cfg.tol("normbound.slack")
                ok = est.lower_bound <= bound * (1.0 + slack)
                records.append(_rec(
                    label, "lower bound <= 24 (1 + sqrt K)(p*-1) family constant",
                    est.lower_bound, bound, bound - est.lower_bound, ok,
                    f"iters={est.iterations}", system=name, d=d, p=p, N=N))
                rows.append({"system": name, "d": d, "p": p, "N": N,
                             "lower_bound": est.lower_bound,
                             "paper_bound": est.paper_bound,
                             "check_bound": bound,
                             "margin": bound - est.lower_bound})
    return records, rows


def run_constants(cfg: SuiteConfig) -> list:
    rep = ne.constants_report()
    limit = cfg.tol("constants.sup_h")
    records = [
        _rec("constants/H-at-1", "H(1) = 5", rep["H_at_1"], 5.0,
             1e-12 - abs(rep["H_at_1"] - 5.0),
             abs(rep["H_at_1"] - 5.0) < 1e-12),
        _rec("constants/sup-H", "sup_(0,1] (s+4) s^(-s/(s+1)) < 6",
             rep["sup_H"], limit, limit - rep["sup_H"], rep["sup_H"] < limit),
        _rec("constants/argmax-H", "argmax lies in (7/20, 2/5)",
             rep["argmax_H"], 0.4, min(rep["argmax_H"] - 0.35, 0.4 - rep["argmax_H"]),
             rep["argmax_in_bracket"]),
        _rec("constants/chain", "max on [7/20, 2/5] < (22/5)(7/20)^(-2/7) < 6",
             rep["interval_max_below"], rep["chain_bound"],
             rep["chain_bound"] - rep["interval_max_below"],
             rep["interval_max_below"] < rep["chain_bound"] < 6.0),
        _rec("constants/polarization",
             "(1+g)/(2g)((p/q)^(1/p)+(q/p)^(1/q)) <= 6(p*-1) on p in [2, 1e3]",
             rep["polarization_worst_margin"], 0.0,
             rep["polarization_worst_margin"], rep["polarization_ok"]),
        _rec("constants/polarization-identity",
             "closed form equals (8+q(q-1))/2 (q-1)^(1/q-1)(p-1)",
             rep["polarization_identity_relerr"], 1e-10,
             1e-10 - rep["polarization_identity_relerr"],
             rep["polarization_identity_relerr"] <= 1e-10),
    ]
    return records


_SUITE_RUNNERS = {
    "ortho": run_ortho,
    "ladder": run_ladder,
    "assumptions": run_assumptions,
    "form1": run_form1,
    "bellman": run_bellman,
    "diffineq": run_diffineq,
    "constants": run_constants,
}


def run(cfg: SuiteConfig) -> tuple[SuiteReport, int]:
    """Execute the configured suites; exit code 0 pass / 1 violation."""
    t0 = time.time()
    suites = [cfg.suite] if cfg.suite != "all" else [s for s in SUITES if s != "all"]
    records, plotdata = [], {}

    def run_one(name):
        if name == "embedding":
            recs, plot = run_embedding(cfg)
            return name, recs, {"embedding": plot}
        if name == "normbound":
            recs, rows = run_normbound(cfg)
            return name, recs, {"normbound": rows}
        return name, _SUITE_RUNNERS[name](cfg), {}

    workers = int(os.environ.get("RIESZ_VERIFY_WORKERS", "1"))
    results = []
    if workers > 1 and len(suites) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_isolated, run_one, s) for s in suites]
            results = [f.result() for f in futures]
    else:
        results = [_isolated(run_one, s) for s in suites]

    for name, recs, plots in results:
        records.extend(recs)
        plotdata.update(plots)

    records.sort(key=lambda r: r.check_id)
    n_pass = sum(r.passed for r in records)
    report = SuiteReport(
        records=records,
        summary={"n_checks": len(records), "n_passed": n_pass,
                 "n_failed": len(records) - n_pass},
        config=_config_dict(cfg),
        wall_time=time.time() - t0,
        plotdata=plotdata)
    return report, 0 if report.all_passed and records else 1


def _isolated(fn, name):
    try:
        return fn(name)
    except Exception as exc:  # isolation: a failing suite yields a failing record
        rec = CheckRecord(f"{name}/error", "suite execution", _digest(suite=name),
                          math.nan, 0.0, -math.inf, False, f"{type(exc).__name__}: {exc}")
        return name, [rec], {}


def _config_dict(cfg: SuiteConfig) -> dict:
    out = asdict(cfg)
    out["systems"] = [[t, dict(prm)] for t, prm in cfg.systems]
    out["p_list"] = list(cfg.p_list)
    out["tolerances"] = [[k, v] for k, v in cfg.tolerances]
    return out


# -- emission ----------------------------------------------------------------------------


def emit(report: SuiteReport, out_dir: str, formats=("json", "csv")) -> list[str]:
    """Write the structured report, the flat table, and plot-data files."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    try:
        if "json" in formats:
            path = os.path.join(out_dir, "report.json")
            with open(path, "w") as fh:
                json.dump({"records": [asdict(r) for r in report.records],
                           "summary": report.summary,
                           "config": report.config,
                           "wall_time": report.wall_time,
                           "plotdata": report.plotdata}, fh, indent=1)
            written.append(path)
        if "csv" in formats:
            path = os.path.join(out_dir, "report.csv")
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["check_id", "anchor", "digest", "value",
                                 "target", "margin", "passed", "detail"])
                for r in report.records:
                    writer.writerow([r.check_id, r.anchor, r.digest, repr(r.value),
                                     repr(r.target), repr(r.margin),
                                     int(r.passed), r.detail])
            written.append(path)
        for name, rows in report.plotdata.items():
            path = os.path.join(out_dir, f"plotdata_{name}.csv")
            with open(path, "w", newline="") as fh:
                if not rows:
                    fh.write("")
                    written.append(path)
                    continue
                writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
                writer.writeheader()
                for row in rows:
                    writer.writerow({k: repr(v) if isinstance(v, float) else v
                                     for k, v in row.items()})
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report under {out_dir!r}: {exc}") from exc
    return written


def load_report(path: str) -> SuiteReport:
    with open(path) as fh:
        blob = json.load(fh)
    records = [CheckRecord(**r) for r in blob["records"]]
    return SuiteReport(records=records, summary=blob["summary"],
                       config=blob["config"], wall_time=blob["wall_time"],
                       plotdata=blob.get("plotdata", {}))
