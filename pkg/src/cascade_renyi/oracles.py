"""Independent numerical checks for the closed forms.

Nothing here calls the closed-form measures: the discord oracle minimizes
the conditional determinant over explicit Gaussian measurement seeds, the
symplectic spectrum comes from a dense eigensolver, and the random state
generator only uses the physicality test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MalformedCM
from .gaussian import StandardFormCM, is_physical

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_LOG_LAMBDA = math.log(100.0)
# refinement may leave the coarse box up to here (lambda ~ 2e17, numerically homodyne)
LOG_LAMBDA_EXTENT = 40.0
PPT_MARGIN = 1e-12

# 2-mode symplectic form in (x1, p1, x2, p2) ordering
OMEGA = np.array(
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]
)


def golden_section(f, lo, hi, tol=1e-10, max_iter=200):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = min(lo, hi), max(lo, hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


@dataclass(frozen=True)
class MeasurementSeed:
    """Single-mode Gaussian seed ``mu * R(theta) diag(lam, 1/lam) R(theta)^T``.

    ``log_lambda = -inf`` is the homodyne limit along ``theta``.
    """

    theta: float
    log_lambda: float
    mu: float = 1.0

    def __post_init__(self):
        if self.mu < 1:
            raise ValueError("seed purity parameter mu must be >= 1")
        if math.isnan(self.log_lambda):
            raise ValueError("log_lambda must not be NaN")

    def covariance(self) -> np.ndarray:
        if not math.isfinite(self.log_lambda):
            raise ValueError("homodyne seeds have no finite covariance")
        lam = math.exp(self.log_lambda)
        r = _rotation(self.theta)
        return self.mu * r @ np.diag([lam, 1.0 / lam]) @ r.T


def _rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _blocks(cm: StandardFormCM, measured: str):
    a, b, c, cp = (float(v) for v in (cm.a, cm.b, cm.c, cm.c_prime))
    if measured == "B":
        return np.diag([a, a]), np.diag([b, b]), np.diag([c, cp])
    if measured == "A":
        return np.diag([b, b]), np.diag([a, a]), np.diag([c, cp]).T
    raise ValueError(f"measured must be 'A' or 'B', got {measured!r}")


def conditional_cm(cm: StandardFormCM, seed: MeasurementSeed, measured: str = "B") -> np.ndarray:
    """CM of the unmeasured mode after the Gaussian measurement ``seed``."""
    keep, meas, cross = _blocks(cm, measured)
    if math.isfinite(seed.log_lambda):
        total = meas + seed.covariance()
        if abs(np.linalg.det(total)) < 1e-300:
            raise MalformedCM("V + Gamma is singular")
        return keep - cross @ np.linalg.inv(total) @ cross.T
    # homodyne: infinitely squeezed along theta, pseudo-inverse of the projection
    u = _rotation(seed.theta)[:, 0]
    proj = np.outer(u, u) / float(u @ meas @ u)
    return keep - cross @ proj @ cross.T


def _det_grid(a, b, c, cp, theta, log_lam, mu=1.0):
    """det of A's conditional CM after measuring B (standard form, vectorized)."""
    with np.errstate(over="ignore"):
        d1 = 1.0 / (b + mu * np.exp(log_lam))
        d2 = 1.0 / (b + mu * np.exp(-log_lam))
    cs, sn = np.cos(theta), np.sin(theta)
    m11 = cs * cs * d1 + sn * sn * d2
    m22 = sn * sn * d1 + cs * cs * d2
    m12 = cs * sn * (d1 - d2)
    return (a - c * c * m11) * (a - cp * cp * m22) - (c * cp * m12) ** 2


@dataclass(frozen=True)
class InfimumSearch:
    det_min: float
    theta: float
    log_lambda: float
    evaluations: int
    mu: float = 1.0

    @property
    def homodyne(self) -> bool:
        return not math.isfinite(self.log_lambda)


def measurement_infimum_bruteforce(
    cm: StandardFormCM,
    measured: str = "B",
    grid: int = 64,
    log_lambda_max: float = DEFAULT_LOG_LAMBDA,
    rounds: int = 3,
    mu: float = 1.0,
) -> InfimumSearch:
    """Grid search plus coordinate-wise golden-section refinement.

    The grid covers theta in [0, pi) and log(lambda) in [-L, L] plus the
    homodyne column; the best finite and the best homodyne point are each
    refined and the smaller determinant wins.
    """
    if measured == "A":
        cm = cm.swapped()
    elif measured != "B":
        raise ValueError(f"measured must be 'A' or 'B', got {measured!r}")
    a, b, c, cp = (float(v) for v in (cm.a, cm.b, cm.c, cm.c_prime))
    thetas = np.arange(grid) * (math.pi / grid)
    logs = np.concatenate([[-math.inf], np.linspace(-log_lambda_max, log_lambda_max, grid)])
    dets = _det_grid(a, b, c, cp, thetas[:, None], logs[None, :], mu)
    evals = dets.size
    dtheta = math.pi / grid
    dlog = 2.0 * log_lambda_max / (grid - 1)

    calls = 0

    def det(theta, log_lam):
        nonlocal calls
        calls += 1
        return float(_det_grid(a, b, c, cp, theta, log_lam, mu))

    i = int(np.argmin(dets[:, 0]))
    th_h, best_h = golden_section(
        lambda t: det(t, -math.inf), thetas[i] - dtheta, thetas[i] + dtheta
    )
    candidates = [(best_h, th_h, -math.inf)]

    i, j = np.unravel_index(np.argmin(dets[:, 1:]), dets[:, 1:].shape)
    th, lg = float(thetas[i]), float(logs[j + 1])
    best = float(dets[i, j + 1])
    lo, hi = lg - dlog, lg + dlog
    # an optimum on the box edge may lie beyond it
    if j == 0:
        lo = -LOG_LAMBDA_EXTENT
    if j == grid - 1:
        hi = LOG_LAMBDA_EXTENT
    for _ in range(rounds):
        th, best = golden_section(lambda t: det(t, lg), th - dtheta, th + dtheta)
        lg, best = golden_section(lambda s: det(th, s), lo, hi)
        lo, hi = lg - dlog, lg + dlog
    candidates.append((best, th, lg))

    det_min, th, lg = min(candidates)
    return InfimumSearch(float(det_min), float(th % math.pi), float(lg), evals + calls, mu)


def discord_bruteforce(cm: StandardFormCM, measured: str = "B", **opts) -> float:
    """Discord from the numerically minimized conditional determinant."""
    search = measurement_infimum_bruteforce(cm, measured, **opts)
    other = float(cm.b) if measured == "B" else float(cm.a)
    return 0.5 * math.log(other**2 * search.det_min / float(cm.det))


def extended_seed_scan(cm: StandardFormCM, measured: str = "B", mus=(1.0, 1.5, 2.0, 5.0), **opts):
    """Minimum conditional determinant per seed purity; flags any mu > 1 win."""
    results = {mu: measurement_infimum_bruteforce(cm, measured, mu=mu, **opts) for mu in mus}
    pure = results[min(mus)].det_min
    noisy_wins = [mu for mu, r in results.items() if mu > 1 and r.det_min < pure * (1 - 1e-12)]
    return results, noisy_wins


def symplectic_eigensolver_dense(cm) -> tuple[float, float]:
    """Symplectic eigenvalues of a 4x4 CM from the spectrum of ``i Omega V``."""
    if isinstance(cm, StandardFormCM):
        cm = cm.matrix()
    v = np.asarray(cm, dtype=float)
    if v.shape[-2:] != (4, 4):
        raise MalformedCM("expected a 4x4 covariance matrix")
    if not np.allclose(v, np.swapaxes(v, -1, -2), rtol=0, atol=1e-12 * max(1.0, np.abs(v).max())):
        raise MalformedCM("covariance matrix must be symmetric")
    ev = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ v)), axis=-1)
    # eigenvalues come in +/- nu pairs
    if ev.ndim == 1:
        return float(ev[0]), float(ev[2])
    return ev[..., 0], ev[..., 2]


def random_physical_cm(rng, size, squeezed_thermal=False, a_range=(1.0, 10.0)) -> StandardFormCM:
    """Uniform (a, b) in ``a_range``, couplings uniform inside the physical region.

    With ``squeezed_thermal`` the couplings are tied as ``c' = -c``.
    """
    out = {k: np.empty(0) for k in ("a", "b", "c", "cp")}
    while out["a"].size < size:
        n = 2 * (size - out["a"].size) + 16
        a = rng.uniform(*a_range, n)
        b = rng.uniform(*a_range, n)
        bound = np.sqrt(a * b)
        c = rng.uniform(-bound, bound)
        cp = -c if squeezed_thermal else rng.uniform(-bound, bound)
        keep = is_physical(StandardFormCM(a, b, c, cp))
        for key, val in zip(("a", "b", "c", "cp"), (a, b, c, cp)):
            out[key] = np.concatenate([out[key], val[keep]])
    return StandardFormCM(*(out[k][:size] for k in ("a", "b", "c", "cp")))


@dataclass(frozen=True)
class SeparabilityVerdict:
    entangled_by_measure: bool
    entangled_by_ppt: bool
    entangled_by_branch: bool

    @property
    def consistent(self) -> bool:
        return self.entangled_by_measure == self.entangled_by_ppt == self.entangled_by_branch


def separability_cross_check(cm: StandardFormCM, entanglement=None):
    """Compare E_R > 0, nu_tilde_minus < 1 and the closed-form branch condition.

    ``entanglement`` defaults to the library's Renyi-2 entanglement; the PPT
    verdict uses the dense eigensolver on the partially transposed CM.
    Broadcasts over array-valued ``cm`` (returns arrays of verdicts then).
    """
    if entanglement is None:
        from .measures import entanglement_renyi2 as entanglement
    a, b, c, cp = (np.asarray(v, dtype=float) for v in (cm.a, cm.b, cm.c, cm.c_prime))
    er = np.asarray(entanglement(cm)) > 0
    mats = np.zeros(a.shape + (4, 4))
    mats[..., 0, 0] = mats[..., 1, 1] = a
    mats[..., 2, 2] = mats[..., 3, 3] = b
    mats[..., 0, 2] = mats[..., 2, 0] = c
    # partial transpose flips p2
    mats[..., 1, 3] = mats[..., 3, 1] = -cp
    nu_t, _ = symplectic_eigensolver_dense(mats)
    # boundary states (vacuum) come out a few ulps below 1
    ppt = np.asarray(nu_t) < 1.0 - PPT_MARGIN
    s, d = (a + b) / 2.0, (a - b) / 2.0
    g = np.sqrt((a * b - c**2) * (a * b - cp**2))
    branch = (g < 2.0 * s - 1.0) & (2.0 * np.abs(d) + 1.0 <= g)
    if er.ndim == 0:
        return SeparabilityVerdict(bool(er), bool(ppt), bool(branch))
    return er, ppt, branch


@dataclass
class OracleReport:
    quantity: str
    closed_form: float
    oracle: float
    abs_error: float
    tolerance: float
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.abs_error <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = " ".join(f"{k}={v}" for k, v in self.meta.items())
        return (
            f"{status} {self.quantity}: closed_form={self.closed_form:.12g} "
            f"oracle={self.oracle:.12g} abs_error={self.abs_error:.3e} "
            f"tol={self.tolerance:.1e} {extra}"
        ).rstrip()
