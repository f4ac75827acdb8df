"""Oracle suites comparing every closed form with an independent computation.

Closed forms are looked up as module attributes at call time, so a test can
swap one out and watch the matching suite fail.
"""
from __future__ import annotations

import itertools
import sys

import numpy as np

from . import gaussian, laser, measures
from .laser import LaserParams
from .oracles import (
    OracleReport,
    discord_bruteforce,
    extended_seed_scan,
    measurement_infimum_bruteforce,
    random_physical_cm,
    separability_cross_check,
    symplectic_eigensolver_dense,
)
from .gaussian import StandardFormCM

SEED = 20240601

TOL_SYMPLECTIC = 1e-10
TOL_DISCORD = 1e-5
TOL_STEADY = 1e-6
TOL_ASYMMETRY = 1e-9
TOL_ASYMMETRY_SIGN = 1e-12

STEADY_ETAS = (0.01, 0.25, 0.5, 0.75, 1.0)
STEADY_GAINS = (100.0, 200.0, 1000.0, 20000.0, 50000.0)
STEADY_NTH = (0.0, 5.0, 100.0)


def _at(cm: StandardFormCM, i) -> StandardFormCM:
    return StandardFormCM(*(float(np.asarray(v)[i]) for v in (cm.a, cm.b, cm.c, cm.c_prime)))


def _cm_meta(cm):
    return {"cm": "(%.10g,%.10g,%.10g,%.10g)" % (cm.a, cm.b, cm.c, cm.c_prime)}


def first_branch_states(rng, count, measured="B"):
    """Random general CMs where the optimal measurement is homodyne (|c| != |c'|)."""
    found = []
    while len(found) < count:
        cm = random_physical_cm(rng, 4 * count)
        o = cm if measured == "B" else cm.swapped()
        a, b, c2, cp2 = o.a, o.b, o.c**2, o.c_prime**2
        branch = (a * b**2 * cp2 - c2 * (a + b * cp2)) * (a * b**2 * c2 - cp2 * (a + b * c2))
        found += [_at(cm, i) for i in np.flatnonzero(branch < 0)]
    return found[:count]


def laser_states(nths=np.linspace(0.0, 200.0, 21)):
    p = LaserParams(3.85, 200.0, 0.35, np.asarray(nths, dtype=float))
    cm = laser.build_covariance(p)
    return [_at(cm, i) for i in range(len(nths))]


def verify_symplectic(rng, count):
    cm = random_physical_cm(rng, count)
    lo, hi = gaussian.symplectic_eigenvalues(cm)
    mats = np.zeros((count, 4, 4))
    mats[:, 0, 0] = mats[:, 1, 1] = cm.a
    mats[:, 2, 2] = mats[:, 3, 3] = cm.b
    mats[:, 0, 2] = mats[:, 2, 0] = cm.c
    mats[:, 1, 3] = mats[:, 3, 1] = cm.c_prime
    dlo, dhi = symplectic_eigensolver_dense(mats)
    err = np.maximum(np.abs(lo - dlo), np.abs(hi - dhi))
    i = int(np.argmax(err))
    return OracleReport(
        "symplectic_eigenvalues", float(lo[i]), float(dlo[i]), float(err[i]), TOL_SYMPLECTIC,
        {"states": count, **_cm_meta(_at(cm, i))},
    )


def verify_separability(rng, count):
    cm = random_physical_cm(rng, count, squeezed_thermal=True)
    er, ppt, branch = separability_cross_check(cm, entanglement=measures.entanglement_renyi2)
    bad = ~((er == ppt) & (ppt == branch))
    meta = {"states": count, "entangled": int(ppt.sum())}
    if bad.any():
        meta.update(_cm_meta(_at(cm, int(np.flatnonzero(bad)[0]))))
    return OracleReport(
        "separability_disagreements", float(er.sum()), float(ppt.sum()), float(bad.sum()), 0.0, meta,
    )


def verify_discord(rng, count, first_branch, grid=64):
    states = [_at(random_physical_cm(rng, count), i) for i in range(count)]
    cases = [(cm, m) for cm in states for m in "AB"]
    cases += [(cm, m) for m in "AB" for cm in first_branch_states(rng, first_branch, m)]
    cases += [(cm, m) for cm in laser_states() for m in "AB"]
    worst = (-1.0, None)
    margin = np.inf
    for cm, m in cases:
        cf = measures.discord(cm, m)
        bf = discord_bruteforce(cm, m, grid=grid)
        margin = min(margin, bf - cf)
        if abs(cf - bf) > worst[0]:
            worst = (abs(cf - bf), (cm, m, cf, bf))
    err, (cm, m, cf, bf) = worst
    search = measurement_infimum_bruteforce(cm, m, grid=grid)
    # the grid can only overestimate a true infimum
    if margin < -1e-9:
        err = max(err, -margin)
    return OracleReport(
        "discord", cf, bf, err, TOL_DISCORD,
        {"cases": len(cases), "measured": m, "theta": "%.6g" % search.theta,
         "log_lambda": "%.6g" % search.log_lambda, "min_margin": "%.2e" % margin, **_cm_meta(cm)},
    )


def _cm_vector(m):
    c = np.real(m.m12)
    return np.array([2 * m.n1 + 1, 2 * m.n2 + 1, 2 * c], dtype=float)


def steady_state_grid(dense):
    if dense:
        return list(itertools.product(STEADY_ETAS, STEADY_GAINS, STEADY_NTH))
    return list(itertools.product((0.01, 0.5, 1.0), (100.0, 1000.0, 50000.0), STEADY_NTH))


def steady_state_errors(p: LaserParams):
    """Scaled deviations (closed form vs linear solve vs integration) of (a, b, c)."""
    ref = _cm_vector(laser.steady_state_closed_form(p))
    lin = _cm_vector(laser.steady_state_linear_solve(p))
    ode = _cm_vector(laser.integrate_to_steady_state(p))
    scale = np.max(np.abs(ref))
    return (
        np.max(np.abs(lin - ref)) / scale,
        np.max(np.abs(ode - ref)) / scale,
        np.max(np.abs(ode - lin)) / scale,
    )


def verify_steady_state(dense):
    worst = (-1.0, None)
    grid = steady_state_grid(dense)
    for eta, gain, nth in grid:
        p = LaserParams(3.85, gain, eta, nth)
        err = max(steady_state_errors(p))
        if err > worst[0]:
            worst = (err, p)
    err, p = worst
    ref = laser.steady_state_closed_form(p)
    ode = laser.integrate_to_steady_state(p)
    return OracleReport(
        "steady_state", float(ref.n1), float(ode.n1), err, TOL_STEADY,
        {"points": len(grid), "eta": p.eta, "gain_khz": p.gain, "nth": p.n_th, "metric": "relative"},
    )


def verify_extended_seeds(rng, count):
    states = [_at(random_physical_cm(rng, count), i) for i in range(count)]
    wins = []
    for cm in states:
        for m in "AB":
            _, noisy = extended_seed_scan(cm, m, grid=32)
            wins += [(cm, m, mu) for mu in noisy]
    meta = {"states": count}
    if wins:
        meta.update(_cm_meta(wins[0][0]), measured=wins[0][1], mu=wins[0][2])
    return OracleReport("extended_seed_wins", 0.0, float(len(wins)), float(len(wins)), 0.0, meta)


def _asymmetry_states(points):
    eta, gain = np.meshgrid(np.linspace(0.0, 1.0, points), np.geomspace(100.0, 50000.0, points))
    nth, gain2 = np.meshgrid(np.linspace(0.0, 100.0, points), np.geomspace(100.0, 50000.0, points))
    p = LaserParams(
        3.85,
        np.concatenate([gain.ravel(), gain2.ravel()]),
        np.concatenate([eta.ravel(), np.full(nth.size, 0.35)]),
        np.concatenate([np.full(eta.size, 5.0), nth.ravel()]),
    )
    return laser.build_covariance(p)


def verify_asymmetry(points):
    cm = _asymmetry_states(points)
    diff = measures.discord(cm, "B") - measures.discord(cm, "A")
    closed = measures.discord_asymmetry(cm)
    err = np.abs(diff - closed)
    i = int(np.argmax(err))
    j = int(np.argmin(diff))
    return [
        OracleReport(
            "discord_asymmetry", float(closed[i]), float(diff[i]), float(err[i]), TOL_ASYMMETRY,
            {"states": diff.size, **_cm_meta(_at(cm, i))},
        ),
        OracleReport(
            "discord_asymmetry_sign", float(diff[j]), 0.0, float(max(0.0, -diff[j])), TOL_ASYMMETRY_SIGN,
            {"states": diff.size, **_cm_meta(_at(cm, j))},
        ),
    ]


def run_verify(dense=False, stream=None):
    """Run every suite; returns (exit_code, reports)."""
    stream = sys.stdout if stream is None else stream
    rng = np.random.default_rng(SEED)
    suites = [
        lambda: verify_symplectic(rng, 10000 if dense else 2000),
        lambda: verify_separability(rng, 100000 if dense else 10000),
        lambda: verify_discord(rng, 500 if dense else 150, 100 if dense else 25),
        lambda: verify_steady_state(dense),
        lambda: verify_extended_seeds(rng, 30 if dense else 8),
        lambda: verify_asymmetry(61 if dense else 21),
    ]
    reports = []
    for suite in suites:
        out = suite()
        for rep in out if isinstance(out, list) else [out]:
            reports.append(rep)
            print(rep.line(), file=stream, flush=True)
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} oracle checks passed", file=stream)
    return (1 if failed else 0), reports
