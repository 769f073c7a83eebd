"""Two-mode second-harmonic generation on a truncated Fock space.

H = chi (a^2 b^dag + a^dag^2 b) with hbar = 1, a the fundamental and b the
second-harmonic mode. The excitation number N = n_a + 2 n_b commutes with H
even after truncation, so its drift along a trajectory measures integrator
error only.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
import scipy.sparse.linalg as spla
from loguru import logger

from gcss.physics.errors import ConfigurationError, IntegratorError, TruncationError
from gcss.physics.fock import (
    HARMONIC,
    FockDensity,
    FockOperator,
    FockVector,
    coherent_fock,
    embed,
    ladder_operators,
    partial_trace,
    tensor_product,
    vacuum,
)
from gcss.physics.states import GcssParams, gcss_state, render_fock

INPUT_KINDS = ("coherent", "gcss")
METHODS = ("expm", "rk4")
MAX_LEAKAGE = 1e-6
MAX_HALVINGS = 12


@dataclass(frozen=True)
class ShgSystem:
    """Cutoffs, coupling and interaction time of the two-mode model."""

    n_max_w: int = 60
    n_max_2w: int = 30
    chi: float = 1e-3
    t_final: float = 1.0

    def __post_init__(self):
        if self.n_max_w < 1 or self.n_max_2w < 1:
            raise ConfigurationError(f"cutoffs must be >= 1, got {self.n_max_w}/{self.n_max_2w}")
        if not self.chi > 0:
            raise ConfigurationError(f"chi must be positive, got {self.chi}")
        if not self.t_final >= 0:
            raise ConfigurationError(f"t_final must be non-negative, got {self.t_final}")

    @property
    def dims(self) -> Tuple[int, int]:
        return (self.n_max_w + 1, self.n_max_2w + 1)

    @property
    def interaction(self) -> float:
        """Dimensionless chi * t_final."""
        return self.chi * self.t_final

    def with_duration(self, t_final: float) -> "ShgSystem":
        return replace(self, t_final=t_final)


@dataclass(frozen=True, eq=False)
class ShgTrajectory:
    times: np.ndarray
    states: Tuple[FockVector, ...]
    conserved: np.ndarray
    energy: np.ndarray
    n_w: np.ndarray
    n_2w: np.ndarray
    leakage: np.ndarray
    method: str = "expm"
    steps: int = 0

    @property
    def final(self) -> FockVector:
        return self.states[-1]

    def conservation_drift(self) -> float:
        reference = max(abs(float(self.conserved[0])), 1.0)
        return float(np.abs(self.conserved - self.conserved[0]).max() / reference)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "steps": self.steps,
            "times": self.times.tolist(),
            "n_w": self.n_w.tolist(),
            "n_2w": self.n_2w.tolist(),
            "conserved": self.conserved.tolist(),
            "energy": self.energy.tolist(),
            "leakage": self.leakage.tolist(),
        }


def _mode_operators(sys: ShgSystem):
    a, a_dag, n_a = ladder_operators(sys.n_max_w)
    b, b_dag, n_b = ladder_operators(sys.n_max_2w)
    return a, a_dag, n_a, b, b_dag, n_b


def build_hamiltonian(sys: ShgSystem) -> FockOperator:
    """chi (a^2 (x) b^dag + a^dag^2 (x) b), sparse."""
    a, a_dag, _, b, b_dag, _ = _mode_operators(sys)
    down = tensor_product(a @ a, b_dag)
    up = tensor_product(a_dag @ a_dag, b)
    return (down + up) * sys.chi


def excitation_operator(sys: ShgSystem) -> FockOperator:
    """n_a + 2 n_b on the two-mode space."""
    _, _, n_a, _, _, n_b = _mode_operators(sys)
    return embed(n_a, 0, sys.dims) + embed(n_b, HARMONIC, sys.dims) * 2.0


def initial_state(kind: str, params: GcssParams, sys: ShgSystem) -> FockVector:
    """Fundamental-mode input (flat envelope, tau = 0, t0 = 0) times the 2w vacuum."""
    if kind not in INPUT_KINDS:
        raise ConfigurationError(f"unknown input kind {kind!r}, expected one of {INPUT_KINDS}")
    p = params.with_tau(0.0).with_pulse(params.pulse.with_envelope("flat"))
    if kind == "coherent":
        fundamental = coherent_fock(p.alpha, sys.n_max_w)
    else:
        fundamental = render_fock(gcss_state(p, 0.0), 0.0, sys.n_max_w)
    return tensor_product(fundamental, vacuum(sys.n_max_2w))


def _observables(psi: np.ndarray, ops, dims):
    h, excitation, n_a, n_b = ops
    values = [float(np.vdot(psi, op.apply(psi)).real) for op in (excitation, h, n_a, n_b)]
    population = np.abs(psi) ** 2
    grid = population.reshape(dims)
    leakage = float(grid[-2:, :].sum() + grid[:, -2:].sum() - grid[-2:, -2:].sum())
    return values + [leakage]


def _rk4_run(h: FockOperator, psi0: np.ndarray, dt: float, steps_per_interval: int, intervals: int):
    generator = h.sparse() * (-1j)
    psi = psi0.copy()
    snapshots = [psi.copy()]
    for _ in range(intervals):
        for _ in range(steps_per_interval):
            k1 = generator @ psi
            k2 = generator @ (psi + 0.5 * dt * k1)
            k3 = generator @ (psi + 0.5 * dt * k2)
            k4 = generator @ (psi + dt * k3)
            psi = psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        snapshots.append(psi.copy())
    return snapshots


def evolve(
    h: FockOperator,
    psi0: FockVector,
    sys: ShgSystem,
    snapshots: int = 21,
    tol: float = 1e-10,
    method: str = "expm",
) -> ShgTrajectory:
    """Propagate ``psi0`` over [0, t_final] and record the conserved quantities.

    Args:
        h: Hamiltonian from build_hamiltonian
        psi0: normalized two-mode input
        sys: the system h was built for
        snapshots: number of recorded instants including both ends
        tol: norm/conservation tolerance; failures are raised above 100 * tol
        method: "expm" (Krylov action of the exponential) or "rk4"

    Returns:
        ShgTrajectory with one entry per snapshot

    Raises:
        IntegratorError: norm or excitation drift above 100 * tol
        TruncationError: boundary population above 1e-6 at any snapshot
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}, expected one of {METHODS}")
    if snapshots < 2:
        raise ConfigurationError("snapshots must be >= 2")
    if tol < 1e-12:
        raise ConfigurationError(f"tol must be >= 1e-12, got {tol}")
    if psi0.dims != sys.dims or h.dims != sys.dims:
        raise ConfigurationError(f"state dims {psi0.dims} / operator dims {h.dims} vs system {sys.dims}")
    if abs(psi0.norm() - 1.0) > tol:
        raise ConfigurationError(f"input norm {psi0.norm():.12f} is not 1")

    n_a = embed(ladder_operators(sys.n_max_w)[2], 0, sys.dims)
    n_b = embed(ladder_operators(sys.n_max_2w)[2], HARMONIC, sys.dims)
    ops = (h, excitation_operator(sys), n_a, n_b)
    n0 = float(np.vdot(psi0.amplitudes, ops[1].apply(psi0.amplitudes)).real)
    if sys.n_max_2w < math.ceil(n0 / 2.0):
        raise ConfigurationError(f"n_max_2w = {sys.n_max_2w} cannot hold N/2 = {n0 / 2.0:.3g} harmonic photons")

    times = np.linspace(0.0, sys.t_final, snapshots)
    psi = np.array(psi0.amplitudes)
    steps = 0
    if sys.t_final == 0.0:
        vectors = [psi.copy() for _ in times]
    elif method == "expm":
        result = spla.expm_multiply(
            h.sparse() * (-1j), psi, start=0.0, stop=sys.t_final, num=snapshots, endpoint=True
        )
        vectors = list(np.asarray(result))
    else:
        intervals = snapshots - 1
        bound = float(spla.norm(h.sparse(), 1))
        per_interval = max(1, math.ceil(bound * sys.t_final / intervals / 0.5))
        for halving in range(MAX_HALVINGS + 1):
            dt = sys.t_final / (intervals * per_interval)
            vectors = _rk4_run(h, psi, dt, per_interval, intervals)
            drift = abs(np.linalg.norm(vectors[-1]) - 1.0)
            if drift < tol:
                break
            logger.debug(f"rk4: norm drift {drift:.3e} with dt={dt:.3e}, halving step ({halving + 1})")
            per_interval *= 2
        else:
            raise IntegratorError(f"rk4 norm drift {drift:.3e} above tol {tol:g} after {MAX_HALVINGS} halvings")
        steps = per_interval * intervals

    records = np.array([_observables(v, ops, sys.dims) for v in vectors])
    norms = np.array([np.linalg.norm(v) for v in vectors])
    conserved, energy, n_w, n_2w, leakage = records.T

    norm_drift = float(np.abs(norms - 1.0).max())
    if norm_drift > 100.0 * tol:
        raise IntegratorError(f"norm drift {norm_drift:.3e} exceeds 100 x tol")
    drift = float(np.abs(conserved - conserved[0]).max() / max(abs(conserved[0]), 1.0))
    if drift > 100.0 * tol:
        raise IntegratorError(f"excitation drift {drift:.3e} exceeds 100 x tol")
    energy_scale = abs(energy[0]) + sys.chi * max(conserved[0], 1.0)
    energy_drift = float(np.abs(energy - energy[0]).max() / energy_scale)
    if energy_drift > 100.0 * tol:
        raise IntegratorError(f"energy drift {energy_drift:.3e} exceeds 100 x tol")
    worst = float(leakage.max())
    if worst > MAX_LEAKAGE:
        raise TruncationError(f"boundary population {worst:.3e} exceeds {MAX_LEAKAGE:g}; raise the cutoffs")

    logger.debug(
        f"evolve[{method}]: chi*t={sys.interaction:.4g}, <n_2w>={n_2w[-1]:.4g}, "
        f"drift={drift:.2e}, leakage={worst:.2e}"
    )
    states = tuple(FockVector(v, sys.dims) for v in vectors)
    return ShgTrajectory(times, states, conserved, energy, n_w, n_2w, leakage, method, steps)


def second_harmonic_state(traj: ShgTrajectory) -> FockDensity:
    """Reduced density of the 2w mode at the end of the trajectory."""
    final = traj.final
    if final.leakage() > MAX_LEAKAGE:
        raise TruncationError(f"final boundary population {final.leakage():.3e} exceeds {MAX_LEAKAGE:g}")
    return partial_trace(final, HARMONIC)


def tune_coupling(
    target_n2w: float,
    psi0: FockVector,
    sys: ShgSystem,
    rel_tol: float = 1e-3,
    max_iter: int = 60,
    h: Optional[FockOperator] = None,
) -> ShgSystem:
    """Bisect t_final (chi fixed) until the final <n_2w> hits ``target_n2w``."""
    if not target_n2w > 0:
        raise ConfigurationError("target <n_2w> must be positive")
    h = build_hamiltonian(sys) if h is None else h

    def final_n2w(t_final: float) -> float:
        return float(evolve(h, psi0, sys.with_duration(t_final), snapshots=2).n_2w[-1])

    low, high = 0.0, sys.t_final if sys.t_final > 0 else 1.0
    for _ in range(max_iter):
        if final_n2w(high) >= target_n2w:
            break
        low, high = high, 2.0 * high
    else:
        raise ConfigurationError(f"<n_2w> = {target_n2w} not reachable by doubling t_final")

    for _ in range(max_iter):
        middle = 0.5 * (low + high)
        value = final_n2w(middle)
        if abs(value - target_n2w) <= rel_tol * target_n2w:
            high = middle
            break
        if value < target_n2w:
            low = middle
        else:
            high = middle
    tuned = sys.with_duration(high)
    logger.info(f"🎯 tuned chi*t = {tuned.interaction:.5g} for <n_2w> ~ {target_n2w:g}")
    return tuned


__all__ = [
    "INPUT_KINDS",
    "ShgSystem",
    "ShgTrajectory",
    "build_hamiltonian",
    "excitation_operator",
    "initial_state",
    "evolve",
    "second_harmonic_state",
    "tune_coupling",
]
