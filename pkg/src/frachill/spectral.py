"""Eigenvalue machinery around the fractional Hill problem.

Four services: Gershgorin localization of the nonlinear eigenvalues,
the grid-scan/refine eigenvalue search itself, classification of LTI
characteristic roots by the principal-power sector, and reconstruction
plus simulation cross-checks of Floquet-form solutions y = e^{lt} p(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from frachill.errors import DomainError
from frachill.hill import assemble, sigma_min_and_nullvector, sigma_min_grid
from frachill.history import FloquetForm
from frachill.integrator import Trajectory, solve_liouville_weyl
from frachill.system import SystemSpec

__all__ = [
    "VALID_FLOQUET",
    "INVALID_NEGATIVE_RE",
    "GershgorinRegion",
    "Eigenpair",
    "LtiEigenvalue",
    "LtiClassification",
    "gershgorin",
    "find_eigenvalues",
    "classify_lti",
    "reconstruct_floquet",
    "floquet_real_combination",
    "verify_floquet",
]

VALID_FLOQUET = "valid-floquet"
INVALID_NEGATIVE_RE = "invalid-negative-re"

# eigenvalues, seeds, and duplicates are told apart at these scales
_DEDUPE_RADIUS = 1e-6
_STRIP_SLACK = 1e-6


@dataclass(frozen=True)
class GershgorinRegion:
    """Union of balls |lam - i k omega| <= radii[k] containing all roots."""

    omega: float
    alpha: float
    centers: np.ndarray
    radii: np.ndarray

    @property
    def re_max(self) -> float:
        """Largest possible real part of any root (centers are imaginary)."""
        return float(np.max(self.radii)) if self.radii.size else 0.0

    def distance(self, lam: complex) -> float:
        """Signed distance to the region; <= 0 means inside some ball."""
        return float(np.min(np.abs(lam - self.centers) - self.radii))

    def covers(self, lam: complex, slack: float = 0.0) -> bool:
        return self.distance(lam) <= slack


def gershgorin(spec: SystemSpec, N: int) -> GershgorinRegion:
    """Localization balls for the truncated problem of order N.

    Block row r carries the shift (lam + i r omega)^alpha on its
    diagonal, so a row-sum bound on the rest of the row gives
    |lam + i r omega|^alpha <= r_row, a ball of radius r_row^(1/alpha)
    centered at -i r omega.  For n > 1 the row sum uses the max-row-sum
    norm of each block, a conservative superset of the scalar bound.
    The J_0 block contributes: only the shift itself is split out.
    """
    if int(N) != N or N < 0:
        raise DomainError(f"truncation order must be an integer >= 0, got {N}")
    N = int(N)
    norms = {}
    for d in range(-spec.coeffs.k_max, spec.coeffs.k_max + 1):
        block = spec.coeffs.coeff(d)
        norms[d] = float(np.max(np.sum(np.abs(block), axis=1)))
    centers = 1j * spec.omega * np.arange(-N, N + 1)
    radii = np.empty(2 * N + 1)
    for k in range(-N, N + 1):
        # center i k omega comes from block row r = -k
        row_sum = sum(
            norms.get(-k - c, 0.0) for c in range(-N, N + 1)
        )
        radii[k + N] = row_sum ** (1.0 / spec.alpha) if row_sum > 0.0 else 0.0
    centers.setflags(write=False)
    radii.setflags(write=False)
    return GershgorinRegion(
        omega=spec.omega, alpha=spec.alpha, centers=centers, radii=radii
    )


@dataclass(frozen=True)
class Eigenpair:
    """A root of det H_N(lam) = 0 with its Fourier null vector.

    p stacks the blocks p_{-N}..p_{N}; it has unit norm and its largest
    entry is real positive.  classification is valid-floquet for
    Re(lam) >= 0 and invalid-negative-re otherwise (the Liouville-Weyl
    derivative of e^{lt} does not exist for decaying exponentials).
    """

    lam: complex
    residual: float
    p: np.ndarray
    N: int
    classification: str

    def __post_init__(self):
        p = np.asarray(self.p, dtype=complex)
        if p.ndim != 1 or abs(np.linalg.norm(p) - 1.0) > 1e-8:
            raise DomainError("eigenpair null vector must be a unit vector")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "lam", complex(self.lam))
        if self.classification not in (VALID_FLOQUET, INVALID_NEGATIVE_RE):
            raise DomainError(
                f"unknown classification {self.classification!r}"
            )


def _local_minima(sig: np.ndarray) -> np.ndarray:
    """Boolean mask of 8-neighborhood local minima, edges included."""
    padded = np.pad(sig, 1, constant_values=np.inf)
    best = np.ones_like(sig, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            shifted = padded[
                1 + di : 1 + di + sig.shape[0],
                1 + dj : 1 + dj + sig.shape[1],
            ]
            best &= sig <= shifted
    return best


def find_eigenvalues(
    spec: SystemSpec,
    N: int,
    strip: Optional[tuple[float, float, float, float]] = None,
    tol: float = 1e-9,
    grid_shape: tuple[int, int] = (101, 101),
) -> list[Eigenpair]:
    """Roots of det H_N(lam) = 0 inside a rectangle of the lam plane.

    The indicator is sigma_min, not the determinant, which over- and
    underflows with N.  A dense grid scan seeds every local minimum
    below a coarse threshold, each seed is polished by Nelder-Mead, and
    survivors below tol are deduplicated.  The default strip is
    Re in [0, Gershgorin re_max], Im in (-omega/2, omega/2], one
    representative per group lam + i k omega.  Every strip treats its
    imaginary interval as half-open, (im0, im1].  An empty list means
    no root was found in the strip, nothing stronger.
    """
    if strip is None:
        region = gershgorin(spec, N)
        re_hi = max(region.re_max, 10.0 * _DEDUPE_RADIUS)
        strip = (0.0, re_hi, -0.5 * spec.omega, 0.5 * spec.omega)
    re0, re1, im0, im1 = map(float, strip)
    if not (re1 > re0 and im1 > im0):
        raise DomainError(f"search strip is empty: {strip}")
    n_re, n_im = grid_shape
    res = np.linspace(re0, re1, n_re)
    ims = np.linspace(im0, im1, n_im)
    lams = res[None, :] + 1j * ims[:, None]
    sig = sigma_min_grid(spec, N, lams.ravel()).reshape(lams.shape)

    coarse = 0.5 * float(np.max(sig))
    seeds = np.argwhere(_local_minima(sig) & (sig <= coarse))
    order = np.argsort(sig[seeds[:, 0], seeds[:, 1]], kind="stable")
    seeds = seeds[order]

    h_re = res[1] - res[0]
    h_im = ims[1] - ims[0]

    def objective(x):
        s, _ = sigma_min_and_nullvector(
            assemble(spec, N, complex(x[0], x[1]))
        )
        return s

    found: list[tuple[complex, float]] = []
    for i, j in seeds:
        x0 = np.array([res[j], ims[i]])
        simplex = np.array(
            [x0, x0 + [0.1 * h_re, 0.0], x0 + [0.0, 0.1 * h_im]]
        )
        result = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": 500,
                "initial_simplex": simplex,
                "xatol": 1e-12,
                "fatol": 1e-15,
            },
        )
        lam = complex(result.x[0], result.x[1])
        if result.fun >= tol:
            continue
        # the imaginary interval is half-open (im0, im1]: a root on the
        # lower edge is the group partner of one on the upper edge and
        # must not be reported twice from a one-period strip
        if not (
            re0 - _STRIP_SLACK <= lam.real <= re1 + _STRIP_SLACK
            and im0 + _STRIP_SLACK < lam.imag <= im1 + _STRIP_SLACK
        ):
            continue
        found.append((lam, float(result.fun)))

    # deterministic order, then collapse duplicates onto the best member
    found.sort(key=lambda item: (item[0].real, item[0].imag))
    accepted: list[tuple[complex, float]] = []
    for lam, fun in found:
        merged = False
        for idx, (lam2, fun2) in enumerate(accepted):
            if abs(lam - lam2) <= _DEDUPE_RADIUS:
                if fun < fun2:
                    accepted[idx] = (lam, fun)
                merged = True
                break
        if not merged:
            accepted.append((lam, fun))

    pairs = []
    for lam, _ in accepted:
        sigma, v = sigma_min_and_nullvector(assemble(spec, N, lam))
        cls = VALID_FLOQUET if lam.real >= 0.0 else INVALID_NEGATIVE_RE
        pairs.append(
            Eigenpair(
                lam=lam, residual=sigma, p=v, N=int(N), classification=cls
            )
        )
    return pairs


@dataclass(frozen=True)
class LtiEigenvalue:
    """One characteristic root mu of the LTI problem and its verdict.

    case a: |arg mu| < alpha pi/2, exponential solution with
    s = mu^(1/alpha), Re s > 0 (instability).  case b: the preimage
    exists but Re s < 0, so the exponential ansatz is invalid.  case c:
    no preimage under the principal power.  boundary: |arg mu| within
    1e-10 of alpha pi/2, the non-hyperbolic case, left unclassified.
    """

    mu: complex
    case: str
    s: Optional[complex]


@dataclass(frozen=True)
class LtiClassification:
    alpha: float
    entries: tuple[LtiEigenvalue, ...]

    @property
    def cases(self) -> tuple[str, ...]:
        return tuple(e.case for e in self.entries)


_BOUNDARY_TOL = 1e-10


def _inverse_principal(mu: complex, alpha: float) -> complex:
    """The unique s with s^alpha = mu, defined for |arg mu| <= alpha pi."""
    return abs(mu) ** (1.0 / alpha) * complex(
        math.cos(np.angle(mu) / alpha), math.sin(np.angle(mu) / alpha)
    )


def classify_lti(A, alpha: float) -> LtiClassification:
    """Sort the eigenvalues of a real matrix A by the sector test.

    The characteristic roots mu of D^a u = A u admit an exponential
    solution e^{st} with s^alpha = mu only when |arg mu| < alpha pi/2;
    the sector alpha pi/2 < |arg mu| <= alpha pi has a preimage with
    negative real part (invalid ansatz) and beyond alpha pi there is no
    preimage at all.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"classify_lti requires alpha in (0, 1), got {alpha}")
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"matrix must be square, got shape {A.shape}")
    entries = []
    for mu in np.linalg.eigvals(A):
        mu = complex(mu)
        theta = abs(np.angle(mu))
        if mu == 0.0 or abs(theta - 0.5 * alpha * math.pi) < _BOUNDARY_TOL:
            entries.append(LtiEigenvalue(mu=mu, case="boundary", s=None))
        elif theta < 0.5 * alpha * math.pi:
            entries.append(
                LtiEigenvalue(mu=mu, case="a", s=_inverse_principal(mu, alpha))
            )
        elif theta <= alpha * math.pi:
            entries.append(
                LtiEigenvalue(mu=mu, case="b", s=_inverse_principal(mu, alpha))
            )
        else:
            entries.append(LtiEigenvalue(mu=mu, case="c", s=None))
    return LtiClassification(alpha=float(alpha), entries=tuple(entries))


def _fourier_blocks(ep: Eigenpair, dim: int) -> np.ndarray:
    """p reshaped to (2N+1, dim): row j holds p_{j-N}."""
    expect = dim * (2 * ep.N + 1)
    if ep.p.shape != (expect,):
        raise DomainError(
            f"null vector has {ep.p.shape} entries, expected ({expect},)"
        )
    return ep.p.reshape(2 * ep.N + 1, dim)


def reconstruct_floquet(
    ep: Eigenpair, spec: SystemSpec, times
) -> Trajectory:
    """The complex trajectory y(t) = e^{lam t} sum_k p_k e^{i k omega t}.

    A single eigenpair yields a complex solution; form 2 Re(y) via
    floquet_real_combination when its conjugate partner is also a root.
    """
    if ep.classification != VALID_FLOQUET:
        raise DomainError(
            "reconstruction requires a valid-floquet eigenpair, got "
            f"{ep.classification}"
        )
    times = np.asarray(times, dtype=float)
    blocks = _fourier_blocks(ep, spec.dim)
    ks = np.arange(-ep.N, ep.N + 1)
    phases = np.exp(
        (ep.lam + 1j * spec.omega * ks)[None, :] * times[:, None]
    )
    values = phases @ blocks
    dt = float(times[1] - times[0]) if times.size > 1 else 0.0
    return Trajectory(
        times=times, values=values, scheme="floquet-form", dt=dt
    )


def floquet_real_combination(
    ep: Eigenpair, spec: SystemSpec, times
) -> Trajectory:
    """2 Re(y), the real solution carried by a conjugate eigenpair."""
    tr = reconstruct_floquet(ep, spec, times)
    return Trajectory(
        times=tr.times,
        values=2.0 * tr.values.real,
        scheme=tr.scheme,
        dt=tr.dt,
    )


def verify_floquet(
    ep: Eigenpair,
    spec: SystemSpec,
    t_end: float,
    dt: float,
    forcing_method: str = "auto",
) -> float:
    """Max relative gap between the Floquet form and a simulated run.

    The reconstructed solution on t <= 0 becomes the history of a
    Liouville-Weyl initial value problem; its trajectory is then
    marched independently and compared against e^{lam t} p(t) on the
    shared grid.  Relative error uses max(1, |y_Hill|) per node.
    """
    if ep.classification != VALID_FLOQUET:
        raise DomainError(
            "verification requires a valid-floquet eigenpair, got "
            f"{ep.classification}"
        )
    blocks = _fourier_blocks(ep, spec.dim)
    coeffs = {
        int(k): blocks[j]
        for j, k in enumerate(range(-ep.N, ep.N + 1))
        if np.any(blocks[j] != 0.0)
    }
    history = FloquetForm(lam=ep.lam, omega=spec.omega, coeffs=coeffs)
    sim = solve_liouville_weyl(
        spec, history, t_end, dt, forcing_method=forcing_method
    )
    hill = reconstruct_floquet(ep, spec, sim.times)
    diff = np.linalg.norm(sim.values - hill.values, axis=1)
    scale = np.maximum(1.0, np.linalg.norm(hill.values, axis=1))
    return float(np.max(diff / scale))
