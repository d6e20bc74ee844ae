"""Verification suites behind ``mvgeg verify``.

Each suite fans out one work item per (2l, nu) to a bounded thread pool. A
work item only reads the per-parameter caches (weight, family, quadrature) and
returns a list of cases; the report keeps the submission order, so the output
does not depend on scheduling. Randomized checks draw from a generator seeded
by (seed, 2l, nu), never from global state.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import hyper2h1, mvop, operators, racah, weight
from .matpoly import max_coeff_diff, residual_max, MatrixPolynomial
from .params import WeightParams

SUITES = ("weight", "operators", "mvop", "hyper", "racah")

DEFAULT_NUS = {
    "weight": (0.5, 1.0, 2.3, 5.0),
    "operators": (0.5, 1.0, 2.3),
    "mvop": (0.6, 1.0, 2.0),
    "hyper": (0.6, 1.0, 2.3),
    "racah": (0.6, 1.0, 2.3),
}


@dataclass(frozen=True)
class Case:
    identity: str
    params: str
    residual: float
    tol: float
    # "upper": residual <= tol; "lower": residual >= tol (separation margins)
    bound: str = "upper"

    def __post_init__(self):
        object.__setattr__(self, "residual", float(self.residual))

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.residual):
            return False
        if self.bound == "lower":
            return self.residual >= self.tol
        return self.residual <= self.tol

    def to_dict(self) -> dict:
        return {"id": self.identity, "params": self.params, "residual": self.residual,
                "tol": self.tol, "bound": self.bound, "pass": self.passed}


@dataclass
class VerificationReport:
    suite: str
    seed: int
    cases: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def failures(self) -> list:
        return [c for c in self.cases if not c.passed]

    def to_dict(self, timing: bool = False) -> dict:
        out = {"suite": self.suite, "seed": self.seed, "pass": self.passed,
               "n_cases": len(self.cases), "n_failed": len(self.failures),
               "cases": [c.to_dict() for c in self.cases]}
        if timing:
            out["wall_time"] = self.wall_time
        return out


@dataclass(frozen=True)
class SuiteConfig:
    ell_max_twice: int = 3
    n_max: int = 6
    nus: Sequence[float] | None = None
    seed: int = 0
    tol: float | None = None  # overrides every per-case tolerance when set
    workers: int | None = None


def case_rng(seed: int, params: WeightParams) -> np.random.Generator:
    return np.random.default_rng([seed, params.two_ell, int(round(params.nu * 10**6))])


def _rel(a: float, scale: float) -> float:
    return float(a) / max(float(scale), 1e-300)


# -- weight -------------------------------------------------------------------

def weight_cases(p: WeightParams, cfg: SuiteConfig) -> list:
    lab = p.label()
    out = []
    f = weight.ldu_factors(p)
    out.append(Case("ldu_reconstruction", lab,
                    max_coeff_diff(f.reconstruct(), weight.weight_pol(p)), 1e-10 * (p.two_ell + p.nu)))
    xs = np.linspace(-0.95, 0.95, 21)
    det_err = max(abs(weight.det_lu(p, x, "extended") / weight.det_weight(p, x) - 1) for x in xs)
    out.append(Case("determinant", lab, det_err, 1e-9))
    W = weight.weight_pol(p)
    d = p.d
    signs = (-1.0) ** np.subtract.outer(np.arange(d), np.arange(d))
    ends = max(np.max(np.abs(W(1.0) - (p.two_ell + p.nu))),
               np.max(np.abs(W(-1.0) - (p.two_ell + p.nu) * signs)))
    out.append(Case("endpoint_values", lab, _rel(ends, p.two_ell + p.nu), 1e-12))
    out.append(Case("persymmetry", lab, weight.persymmetry_residual(p), 1e-12))
    out.append(Case("reflection", lab, weight.reflection_residual(p), 1e-12))
    out.append(Case("block_split_off_blocks", lab, weight.off_block_max(p), 1e-11))
    pos = weight.positivity_check(p, np.linspace(-0.98, 0.98, 99))
    out.append(Case("positivity_failures", lab, float(len(pos.failures)), 0.0))
    return out


# -- operators ----------------------------------------------------------------

def operator_cases(p: WeightParams, cfg: SuiteConfig) -> list:
    lab = p.label()
    out = []
    for key, res in operators.symmetry_residuals(p).items():
        out.append(Case(f"symmetry_residual_{key}", lab, residual_max(res), 1e-10))
    out.append(Case("boundary_E", lab, operators.boundary_residual(p), 1e-12))
    out.append(Case("pearson", lab, residual_max(operators.pearson_residual(p)), 1e-10))
    out.append(Case("nu_step", lab, operators.nu_step_residual(p).max_abs(), 1e-10))
    out.append(Case("nu_step_derivative", lab,
                    residual_max(operators.nu_step_derivative_residual(p)), 1e-10))
    out.append(Case("darboux", lab, operators.darboux_residual(p), 1e-10))
    jd, je = operators.j_conjugation_residuals(p)
    out.append(Case("J_conjugation_D", lab, jd, 1e-12))
    out.append(Case("J_conjugation_E", lab, je, 1e-12))
    out.append(Case("d_phi_psi_factored", lab,
                    operators.operator_diff(operators.d_phi_psi_combination(p),
                                            operators.d_phi_psi_factored(p)), 1e-10))
    rng = case_rng(cfg.seed, p)
    D, E = operators.build_D(p), operators.build_E(p)
    worst_d = worst_e = worst_c = 0.0
    for _ in range(50):
        P = operators.random_polynomial(rng, p.d, int(rng.integers(0, 4)))
        Q = operators.random_polynomial(rng, p.d, int(rng.integers(0, 4)))
        worst_d = max(worst_d, operators.symmetry_defect(D, P, Q, p) / _pair_scale(D, P, Q, p))
        worst_e = max(worst_e, operators.symmetry_defect(E, P, Q, p) / _pair_scale(E, P, Q, p))
        worst_c = max(worst_c, _rel(operators.commutator_residual(p, P),
                                    max(1.0, operators.apply(D, operators.apply(E, P)).max_abs())))
    out.append(Case("symmetry_D_quadrature", lab, worst_d, 1e-9))
    out.append(Case("symmetry_E_quadrature", lab, worst_e, 1e-9))
    out.append(Case("commutator_DE", lab, worst_c, 1e-12))
    return out


def _pair_scale(op, P, Q, p) -> float:
    from .quadrature import pair

    a = pair(operators.apply(op, P), Q, p)
    return max(1.0, float(np.max(np.abs(a))))


# -- mvop ---------------------------------------------------------------------

def mvop_cases(p: WeightParams, cfg: SuiteConfig) -> list:
    lab = p.label()
    N = cfg.n_max
    out = []
    fam = mvop.monic_family(p, N)
    out.append(Case("orthogonality_vs_closed_norms", lab, mvop.orthogonality_defect(p, N), 1e-9))
    D, E = operators.build_D(p), operators.build_E(p)
    out.append(Case("eigen_D", lab, max(operators.eigen_residual(D, fam[n], operators.eigen_D(p, n))
                                        for n in range(N + 1)), 1e-10))
    out.append(Case("eigen_E", lab, max(operators.eigen_residual(E, fam[n], operators.eigen_E(p, n))
                                        for n in range(N + 1)), 1e-10))
    out.append(Case("lowering", lab, max(mvop.lowering_residual(p, n) for n in range(N + 1)), 1e-10))
    out.append(Case("raising", lab, max(mvop.raising_residual(p, n) for n in range(1, N + 1)), 1e-10))
    rng = case_rng(cfg.seed, p)
    adj = 0.0
    for _ in range(10):
        P = operators.random_polynomial(rng, p.d, int(rng.integers(1, 4)))
        Q = operators.random_polynomial(rng, p.d, int(rng.integers(0, 3)))
        adj = max(adj, operators.adjoint_defect(P, Q, p) / max(1.0, _adjoint_scale(P, Q, p)))
    out.append(Case("adjoint", lab, adj, 1e-9))
    out.append(Case("Y_norm_ratio", lab, max(mvop.y_norm_ratio_defect(p, n) for n in range(1, N + 1)), 1e-12))
    shift = max(max(mvop.nu_shift_residuals(p, n)) for n in range(1, N + 1))
    out.append(Case("nu_shift_expansion", lab, shift, 1e-10))
    out.append(Case("block_family", lab, mvop.block_family_defect(p, min(N, 5)), 1e-10))
    if p.two_ell <= 2:
        rod = max(max_coeff_diff(mvop.rodrigues(p, n), fam[n]) for n in range(min(N, 4) + 1))
        out.append(Case("rodrigues_vs_recurrence", lab, rod, 1e-8))
    return out


def _adjoint_scale(P, Q, p) -> float:
    from .matpoly import mp_diff
    from .quadrature import pair

    return float(np.max(np.abs(pair(mp_diff(P), Q, p.shifted()))))


# -- hyper --------------------------------------------------------------------

def hyper_cases(p: WeightParams, cfg: SuiteConfig) -> list:
    lab = p.label()
    N = min(cfg.n_max, 6)
    a1, a2 = hyper2h1.DEFAULT_ALPHA, 1 / math.pi
    out = []
    out.append(Case("collision_gap", lab, hyper2h1.collision_gap(p, a1, N + 2), 1e-6, "lower"))
    route = alpha = eig = sub = 0.0
    Dop, _ = hyper2h1.build_D_alpha(p, a1)
    for n in range(N + 1):
        P = mvop.monic(p, n)
        H1 = hyper2h1.monic_P_2h1(p, n, a1)
        H2 = hyper2h1.monic_P_2h1(p, n, a2)
        route = max(route, max_coeff_diff(H1, P))
        alpha = max(alpha, max_coeff_diff(H1, H2))
        R = hyper2h1.R_from_P(P, n)
        eig = max(eig, hyper2h1.eigen_residual_u(Dop, R, hyper2h1.eigen_D_alpha(p, a1, n)))
        if n >= 1:
            sub = max(sub, float(np.max(np.abs(R.coeffs[n - 1] - hyper2h1.subleading_coefficient(p, n)))))
    out.append(Case("route_2H1_vs_recurrence", lab, route, 1e-8))
    out.append(Case("alpha_independence", lab, alpha, 1e-9))
    out.append(Case("eigen_D_alpha", lab, eig, 1e-10))
    out.append(Case("subleading_coefficient", lab, sub, 1e-12))
    xsub = max(float(np.max(np.abs(hyper2h1.x_from_subleading(p, n) - mvop.recurrence_coefficients(p, n)[0])))
               for n in range(N + 1))
    out.append(Case("X_from_subleading", lab, xsub, 1e-12))
    dpar = max(hyper2h1.derivative_parameter_defect(p, a1, n, i)
               for n in range(1, N + 1) for i in range(p.d))
    out.append(Case("derivative_parameters", lab, dpar, 1e-12))
    shift = max(hyper2h1.bracket_shift_defect(hyper2h1.row_data(p, a1, n, i), n)
                for n in range(N + 1) for i in range(p.d))
    out.append(Case("bracket_shift", lab, shift, 1e-10))
    return out


# -- racah --------------------------------------------------------------------

def racah_cases(p: WeightParams, cfg: SuiteConfig) -> list:
    lab = p.label()
    N = min(cfg.n_max, 6)
    out = []
    rng = case_rng(cfg.seed, p)
    G = MatrixPolynomial(rng.standard_normal((4, p.d, p.d)), "u")
    gscale = max(1.0, racah.diagonal_action(p, G).max_abs())
    out.append(Case("conjugated_D_diagonal", lab,
                    _rel(max_coeff_diff(racah.conjugated_action(p, G), racah.diagonal_action(p, G)), gscale),
                    1e-9))
    out.append(Case("D0_closed_form", lab,
                    operators.operator_diff(racah.build_D0(p), racah.build_D0_closed(p)), 1e-10))
    calD = racah.diagonal_operator(p).operator()
    calE = racah.calE_operator(p)
    ed = max_coeff_diff(operators.apply(calE, operators.apply(calD, G)),
                        operators.apply(calD, operators.apply(calE, G)))
    out.append(Case("calE_calD_commute", lab, _rel(ed, gscale), 1e-9))
    route = ent = neq = van = mod = 0.0
    sign_ok = 1.0
    for n in range(N + 1):
        P = mvop.monic(p, n)
        route = max(route, max_coeff_diff(racah.monic_P_racah(p, n), P))
        if abs(p.nu - 0.5) > racah.DEGENERATE_GUARD:
            ent = max(ent, max_coeff_diff(racah.monic_P_entries(p, n), P))
        rc = racah.racah_coefficients(p, n)
        lam = racah.eigen_calD(p, n)
        mu = racah.mu_n(p, n)
        for k in range(p.d):
            ck = rc.c[k]
            neq = max(neq, _rel(np.max(np.abs(ck @ racah.N_matrix(p, lam[k]) - mu[k] * ck)), np.max(np.abs(ck))))
            c0 = racah.c_k0_from_recurrence(p, n, k)
            mod = max(mod, abs(c0 * c0 / racah.c_k0_modulus_squared(p, n, k) - 1))
            if np.sign(c0) != (-1) ** n:
                sign_ok = 0.0
            for i in range(k):
                s, size = racah.final_vanishing_sum(p, n, k, i)
                van = max(van, _rel(abs(s), size))
    out.append(Case("route_racah_vs_recurrence", lab, route, 1e-9))
    if abs(p.nu - 0.5) > racah.DEGENERATE_GUARD:
        out.append(Case("route_entries_vs_recurrence", lab, ent, 1e-9))
    out.append(Case("c_k_N_eigen", lab, neq, 1e-9))
    out.append(Case("c_k0_modulus", lab, mod, 1e-12))
    out.append(Case("c_k0_sign", lab, sign_ok, 1.0, "lower"))
    out.append(Case("final_vanishing_sum", lab, van, 1e-10))
    gram = 0.0
    for M in range(N + 1):
        Gm = racah.racah_gram(p, M)
        diag = np.array([racah.racah_norm(p, M - k, k) for k in range(Gm.shape[0])])
        gram = max(gram, _rel(np.max(np.abs(Gm - np.diag(diag))), np.max(np.abs(diag))))
    out.append(Case("racah_orthogonality", lab, gram, 1e-10))
    return out


SUITE_FUNCS: dict = {
    "weight": weight_cases,
    "operators": operator_cases,
    "mvop": mvop_cases,
    "hyper": hyper_cases,
    "racah": racah_cases,
}


def param_grid(suite: str, cfg: SuiteConfig) -> list:
    nus = tuple(cfg.nus) if cfg.nus else DEFAULT_NUS[suite]
    return [WeightParams(L, nu) for L in range(1, cfg.ell_max_twice + 1) for nu in nus]


def _pool_size(cfg: SuiteConfig) -> int:
    return max(1, min(cfg.workers or 4, os.cpu_count() or 1))


def run_suite(suite: str, cfg: SuiteConfig) -> VerificationReport:
    if suite not in SUITE_FUNCS:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)} or all")
    func: Callable = SUITE_FUNCS[suite]
    grid = param_grid(suite, cfg)
    start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=_pool_size(cfg)) as pool:
        futures = [pool.submit(func, p, cfg) for p in grid]
        # assembled in submission order, independent of completion order
        cases = [c for fut in futures for c in fut.result()]
    if cfg.tol is not None:
        cases = [Case(c.identity, c.params, c.residual, cfg.tol, c.bound) if c.bound == "upper" else c
                 for c in cases]
    return VerificationReport(suite, cfg.seed, cases, time.perf_counter() - start)


def run_suites(names: Iterable[str], cfg: SuiteConfig) -> list:
    names = list(names)
    if names == ["all"]:
        names = list(SUITES)
    return [run_suite(s, cfg) for s in names]
