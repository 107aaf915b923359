"""Named invariant checks bundled into a verification report."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dynamics import integrate
from .hs_algebra import Superop
from .models import deutsch as dmod
from .models import landau_zener as lzmod
from .models.harness import default_harness
from .spectral import SpectralPath, TimeGrid, match_branches, spectral_path
from .tqd import (
    adiabatic_transport,
    generalized_tqd_1d,
    generalized_tqd_multiblock_path,
    standard_cd,
    standard_cd_via_similarity,
    theorem1_condition_check,
    time_independence_residual,
)


PASS, FAIL, INFO = "pass", "fail", "info"


@dataclass
class CheckResult:
    name: str
    status: str
    value: float
    tolerance: float
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _result(name, value, tol, detail="", informational=False) -> CheckResult:
    ok = bool(np.isfinite(value) and value < tol)
    status = PASS if ok else (INFO if informational else FAIL)
    return CheckResult(name, status, float(value), float(tol), detail)


def check_biorthonormality(path: SpectralPath, tol: float = 1e-9) -> CheckResult:
    return _result("biorthonormality", path.biorthonormality_error(), tol, "max |E R - 1|")


def check_completeness(path: SpectralPath, tol: float = 1e-9) -> CheckResult:
    return _result("completeness", path.completeness_error(), tol, "max |R E - 1|")


def check_reconstruction(L: Superop, path: SpectralPath, tol: float = 1e-9) -> CheckResult:
    worst = 0.0
    for j, t in enumerate(path.grid.points):
        rec = (path.rights[j] * path.eigenvalues[j]) @ path.lefts[j]
        worst = max(worst, float(np.max(np.abs(rec - L(t)))))
    return _result("spectral_reconstruction", worst, tol, "max |sum lambda D E - L|")


def check_analytic_vs_numeric(numeric: SpectralPath, analytic: SpectralPath, tol: float = 1e-8) -> CheckResult:
    worst = 0.0
    for j in range(len(numeric.grid)):
        perm = match_branches(analytic.eigenvalues[j], numeric.eigenvalues[j])
        worst = max(worst, float(np.max(np.abs(analytic.projectors(j) - numeric.projectors(j)[perm]))))
    return _result("analytic_vs_numeric_projectors", worst, tol)


def check_cd_equivalence(obj, points, tol: float = 1e-8, name="cd_construction_equivalence") -> CheckResult:
    worst = 0.0
    for t in points:
        a = standard_cd(obj, t)
        for route in ("closed_form", "direct"):
            worst = max(worst, float(np.max(np.abs(a - standard_cd_via_similarity(obj, t, route=route)))))
    return _result(name, worst, tol)


def check_theta_lambda_recovery(L: Superop, path: SpectralPath, tol: float = 1e-9) -> CheckResult:
    G = np.einsum("jab,jba->ja", path.lefts, path.rights_dot)
    Lam = path.eigenvalues - G
    worst = 0.0
    for j, t in enumerate(path.grid.points):
        a = generalized_tqd_1d(path, Lam[j], j)
        b = L(t) + standard_cd(path, j)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return _result("theta_equals_lambda_recovery", worst, tol)


def check_parallel_transport(path: SpectralPath, branches, tol: float = 1e-10, informational=False) -> CheckResult:
    G = np.einsum("jab,jba->ja", path.lefts, path.rights_dot)
    return _result("parallel_transport", float(np.max(np.abs(G[:, branches]))), tol,
                   f"max |<<E|dD/dt>>| over branches {list(branches)}", informational)


def check_theorem1(path: SpectralPath, tol: float = 1e-6, informational=False) -> CheckResult:
    rep = theorem1_condition_check(path, tol=tol)
    return _result("constant_overlap_condition", float(np.max(rep.constancy_residual)), tol,
                   f"condition satisfied: {rep.condition}", informational)


def check_time_independence(L: Superop, grid: TimeGrid, rel: float = 1e-8, name="time_independence") -> CheckResult:
    scale = max(np.linalg.norm(L(t), 2) for t in grid.points)
    return _result(name, time_independence_residual(L, grid), rel * scale, "max |dL/dt|")


def check_block_decoupling(L_std: Superop, frame_at, grid: TimeGrid, tol: float = 1e-6) -> CheckResult:
    ts = grid.points
    lefts = np.array([frame_at(t).lefts for t in ts])
    R0 = frame_at(ts[0]).rights
    worst = 0.0
    for b in range(R0.shape[1]):
        traj = integrate(L_std, R0[:, b], grid, monitors=False)
        proj = np.einsum("jad,jd->ja", lefts, traj.states)
        cross = np.delete(proj, b, axis=1)
        worst = max(worst, float(np.max(np.abs(cross))))
    return _result("block_decoupling", worst, tol, "max cross-block projection")


def check_harness(tol_ode: float = 1e-7, tol_rec: float = 1e-8, n_steps: int = 400) -> list[CheckResult]:
    h = default_harness()
    js = h.structure()
    L = h.superop()
    grid = TimeGrid(0.0, 1.0, n_steps)
    tr = adiabatic_transport(js, grid)
    out = [_result("v_ode_residual", tr.ode_residual(), tol_ode)]
    gen = generalized_tqd_multiblock_path(js, tr.coefficients())
    worst = max(float(np.max(np.abs(gen[j] - L(t) - standard_cd(js, t)))) for j, t in enumerate(grid.points))
    out.append(_result("multiblock_recovery", worst, tol_rec))
    out.append(check_cd_equivalence(js, grid.points[::40], name="cd_construction_equivalence_jordan"))
    return out


def check_trace_row(mats, tol: float = 1e-12, name="trace_row_zero") -> CheckResult:
    return _result(name, float(max(np.max(np.abs(m[0])) for m in mats)), tol)


def deutsch_suite(p: dmod.DeutschParams, n_grid: int = 800) -> list[CheckResult]:
    grid = TimeGrid(0.0, p.tau, n_grid)
    L = dmod.deutsch_lindbladian(p)
    numeric = spectral_path(L, grid)
    analytic = dmod.deutsch_analytic_spectrum(p, grid)
    checks = [
        check_biorthonormality(numeric),
        check_completeness(numeric),
        check_reconstruction(L, numeric),
        check_analytic_vs_numeric(numeric, analytic),
        check_cd_equivalence(analytic, range(0, len(grid), 40)),
        check_theta_lambda_recovery(L, analytic),
        check_parallel_transport(analytic, range(4)),
        check_theorem1(analytic),
    ]
    th2 = -2 * p.gamma0
    th3 = dmod.phase3_antisymmetric(p, th2)
    thetas = [0.0, -2 * p.gamma0, th2, th3]
    synth = Superop(4, lambda t: generalized_tqd_1d(dmod.frame(p, t), thetas, t), "L_Gtqd_DA")
    mats = [synth(t) for t in grid.points]
    checks.append(check_time_independence(synth, grid))
    checks.append(_result("time_independent_matrix", max(float(np.max(np.abs(m - dmod.time_independent_matrix(p)))) for m in mats), 1e-9))
    checks.append(check_trace_row(mats))
    v = dmod.deutsch_variants(p)
    checks.append(check_block_decoupling(v.L_standard_tqd, v.frame, TimeGrid(0.0, p.tau, max(4000, int(400 * p.tau * p.omega)))))
    checks.extend(check_harness())
    return checks


def lz_suite(p: lzmod.LZParams, n_grid: int = 800) -> list[CheckResult]:
    grid = TimeGrid(0.0, p.tau, n_grid)
    L = lzmod.lz_lindbladian(p)
    numeric = spectral_path(L, grid)
    analytic = lzmod.lz_analytic_spectrum(p, grid)
    sec = p.gamma_mode == "sec_theta"
    checks = [
        check_biorthonormality(numeric),
        check_completeness(numeric),
        check_reconstruction(L, numeric),
        check_analytic_vs_numeric(numeric, analytic),
        check_cd_equivalence(analytic, range(0, len(grid), 40)),
        check_theta_lambda_recovery(L, analytic),
        check_parallel_transport(analytic, [2, 3], informational=not sec),
        check_theorem1(analytic, informational=True),
    ]
    v = lzmod.lz_variants(p)
    checks.append(check_block_decoupling(v.L_standard_tqd, v.frame, TimeGrid(0.0, p.tau, max(4000, int(400 * p.tau * p.omega0)))))
    if sec:
        mats = [v.L_generalized(t) for t in grid.points]
        checks.append(check_trace_row(mats))
    checks.extend(check_harness())
    return checks


def overall_ok(checks) -> bool:
    return all(c.status != FAIL for c in checks)


def format_report(checks) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{c.name:<{width}}  {c.status.upper():<4}  value={c.value:.3e}  tol={c.tolerance:.1e}  {c.detail}".rstrip()
             for c in checks]
    lines.append("OK" if overall_ok(checks) else "FAILED: " + ", ".join(c.name for c in checks if c.status == FAIL))
    return "\n".join(lines)


def custom_suite(L: Superop, grid: TimeGrid) -> list[CheckResult]:
    numeric = spectral_path(L, grid)
    checks = [
        check_biorthonormality(numeric),
        check_completeness(numeric),
        check_reconstruction(L, numeric),
        check_cd_equivalence(numeric, range(0, len(grid), max(1, len(grid) // 20))),
        check_theta_lambda_recovery(L, numeric),
        check_theorem1(numeric, informational=True),
    ]
    checks.extend(check_harness())
    return checks
