"""ADMM inner solver for the facially reduced DNN relaxation.

Splitting: min <Lbar_scaled, X> over X in (base set + cuts), X = V R V^T,
R PSD. One iteration updates

    R <- proj_PSD( V^T (X + Z/sigma) V )
    X <- proj_{X_T}( V R V^T - (Lbar_scaled + Z)/sigma )
    Z <- Z + gamma sigma (X - V R V^T)

where proj_{X_T} is the (clustered, warm-started) Dykstra projection.
The stopping criterion combines the primal splitting residual with the
scaled step length; both must drop below cfg.eps.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .cuts import CutClustering, cluster_cuts
from .dykstra import DykstraEngine
from .linalg import project_psd, sym
from .relaxation import Relaxation, project_base_bp, project_base_ep

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "InnerInfo",
    "CONVERGED",
    "TIME_LIMIT",
    "ITERATION_CAP",
    "base_projector",
    "init_state",
    "step_R",
    "step_X",
    "step_Z",
    "update_sigma",
    "run_inner",
]

CONVERGED = "Converged"
TIME_LIMIT = "TimeLimit"
ITERATION_CAP = "IterationCap"

SIGMA_MIN = 1e-5
SIGMA_MAX = 1e3


@dataclass
class AdmmConfig:
    """Inner-solver knobs. eps is the combined-residual tolerance."""

    eps: float = 1e-4
    max_iterations: int = 20000
    eps_proj: float = 1e-4
    max_sweeps: int = 2000
    sigma_min: float = SIGMA_MIN
    sigma_max: float = SIGMA_MAX


@dataclass
class AdmmState:
    """Iterates of the splitting. W caches V R V^T for the current R.

    p counts completed iterations of the current run (run_inner resets
    it on entry; the sigma schedule keys off it).
    """

    R: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    W: np.ndarray
    sigma: float
    gamma: float
    adaptive: bool
    p: int = 0


@dataclass(frozen=True)
class InnerInfo:
    reason: str
    iterations: int
    criterion: float
    primal_residual: float
    projections_converged: bool
    wall_time: float


def base_projector(rel: Relaxation):
    """Exact projector onto the relaxation's base polytope."""
    if rel.problem == "EP":
        return lambda M: project_base_ep(M, rel.base)
    return lambda M: project_base_bp(M, rel.base)


def init_state(rel: Relaxation, sigma0: float | None = None,
               gamma: float | None = None,
               adaptive: bool | None = None) -> AdmmState:
    """Cold start.

    EP: X = (k-1)/k I (the barycenter diagonal), sigma0 = ceil(n/k),
    adaptive sigma, gamma = 1. BP: X = e1 e1^T, sigma0 = ceil((2n/m1)^2),
    fixed sigma, gamma = 1.608. Both within (0, (1+sqrt(5))/2).
    """
    r = rel.V.shape[1]
    R = np.zeros((r, r))
    Z = np.zeros((rel.order, rel.order))
    W = np.zeros((rel.order, rel.order))
    if rel.problem == "EP":
        X = rel.base.diag_value * np.eye(rel.order)
        s0 = float(math.ceil(rel.n / rel.spec.k))
        g = 1.0
        ad = True
    else:
        X = np.zeros((rel.order, rel.order))
        X[0, 0] = 1.0
        s0 = float(math.ceil((2.0 * rel.n / rel.spec.m[0]) ** 2))
        g = 1.608
        ad = False
    if sigma0 is not None:
        s0 = float(sigma0)
    if gamma is not None:
        g = float(gamma)
    if adaptive is not None:
        ad = adaptive
    s0 = min(max(s0, SIGMA_MIN), SIGMA_MAX)
    if not 0.0 < g < (1.0 + math.sqrt(5.0)) / 2.0:
        raise ValueError(f"gamma={g} outside (0, (1+sqrt(5))/2)")
    return AdmmState(R=R, X=X, Z=Z, W=W, sigma=s0, gamma=g, adaptive=ad)


def step_R(s: AdmmState, rel: Relaxation) -> np.ndarray:
    """PSD projection of V^T (X + Z/sigma) V."""
    return project_psd(rel.V.T @ (s.X + s.Z / s.sigma) @ rel.V)


def step_X(s: AdmmState, rel: Relaxation, cuts, clustering=None,
           eps_proj: float = 1e-4, max_sweeps: int = 2000) -> np.ndarray:
    """Dykstra projection of V R V^T - (Lbar_scaled + Z)/sigma.

    Stateless variant (fresh normals); the inner loop uses a persistent
    engine instead.
    """
    if clustering is None:
        k = rel.spec.k if rel.problem == "EP" else None
        clustering = cluster_cuts(cuts, k=k)
    engine = DykstraEngine(base_projector(rel), clustering, rel.order)
    W = sym(rel.V @ s.R @ rel.V.T)
    M = W - (rel.Lbar_scaled + s.Z) / s.sigma
    X, _ = engine.project(M, eps_proj=eps_proj, max_sweeps=max_sweeps)
    return X


def step_Z(s: AdmmState) -> np.ndarray:
    """Dual ascent Z + gamma sigma (X - W); reads the state's current
    X and W = V R V^T."""
    return s.Z + s.gamma * s.sigma * (s.X - s.W)


def update_sigma(s: AdmmState, sigma_min: float = SIGMA_MIN,
                 sigma_max: float = SIGMA_MAX) -> float:
    """Pull sigma toward clamp(||Z||_F / ||X||_F).

    The mixing weight is 2^(-p/100) with p the state's completed-iteration
    count, so the first update replaces sigma outright and later updates
    are increasingly conservative. No update when ||X|| = 0.
    """
    xnorm = float(np.linalg.norm(s.X))
    if xnorm == 0.0:
        return s.sigma
    ratio = float(np.linalg.norm(s.Z)) / xnorm
    ratio = min(max(ratio, sigma_min), sigma_max)
    w = 2.0 ** (-s.p / 100.0)
    return (1.0 - w) * s.sigma + w * ratio


def run_inner(s: AdmmState, rel: Relaxation, cuts, cfg: AdmmConfig,
              clustering: CutClustering | None = None,
              engine: DykstraEngine | None = None,
              deadline: float | None = None) -> InnerInfo:
    """Run ADMM until the combined residual drops below cfg.eps.

    Mutates s in place (warm starts: call again with the same state).
    deadline is an absolute time.monotonic() stamp; hitting it stops the
    loop with reason TimeLimit. Exhausting max_iterations gives
    IterationCap. The returned residuals refer to the last iterate.
    """
    t0 = time.monotonic()
    if engine is None:
        if clustering is None:
            k = rel.spec.k if rel.problem == "EP" else None
            clustering = cluster_cuts(cuts, k=k)
        engine = DykstraEngine(base_projector(rel), clustering, rel.order)
    s.p = 0
    reason = ITERATION_CAP
    crit = math.inf
    resid = math.inf
    proj_ok = True
    done = 0
    while done < cfg.max_iterations:
        if deadline is not None and time.monotonic() >= deadline:
            reason = TIME_LIMIT
            break
        X_prev = s.X
        Z_prev = s.Z
        s.R = step_R(s, rel)
        s.W = sym(rel.V @ s.R @ rel.V.T)
        M = s.W - (rel.Lbar_scaled + s.Z) / s.sigma
        X_new, dinfo = engine.project(M, cfg.eps_proj, cfg.max_sweeps)
        proj_ok = proj_ok and dinfo.converged
        s.X = X_new
        s.Z = step_Z(s)
        resid = float(np.linalg.norm(X_new - s.W)) / (
            1.0 + float(np.linalg.norm(X_new)))
        shift = s.sigma * float(np.linalg.norm(X_new - X_prev)) / (
            1.0 + float(np.linalg.norm(Z_prev)))
        crit = max(resid, shift)
        if s.adaptive:
            s.sigma = update_sigma(s, cfg.sigma_min, cfg.sigma_max)
        s.p += 1
        done += 1
        if crit < cfg.eps:
            reason = CONVERGED
            break
    return InnerInfo(
        reason=reason, iterations=done, criterion=crit,
        primal_residual=resid, projections_converged=proj_ok,
        wall_time=time.monotonic() - t0,
    )
