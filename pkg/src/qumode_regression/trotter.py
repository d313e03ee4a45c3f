"""Trotterized construction of the conditional coupling evolution.

The idealized coupling ``exp(1j * eta * rho * p1 * p2)`` consumes the
data operator ``rho`` as a resource: each Trotter step attaches a fresh
copy register prepared in the mixed state ``rho`` (bookkept as its
eigenbranches, never as simultaneous physical copies), an ancilla in
``|+>``, and applies

    C_S  R^x_a(dt * eta * p1 * p2)  C_S

where ``C_S`` is the ancilla-controlled swap between the copy and the
data feature register and ``R^x_a`` the ancilla x-rotation with the
quadratic momentum phase as its angle.  Tracing the ancilla and copy
back out advances the data state by one step of ``dt`` (of the unit
total evolution) with per-step error ``O(dt**2)``.

Tracing produces mixtures, so states live in a :class:`HybridEnsemble`:
a list of unnormalized pure branches whose squared norms sum to the
trace.  A Gram-matrix compression keeps the branch count near the true
mixture rank instead of growing by a factor per step.

The ancilla rotation itself can be synthesized from two-body
interactions alone: with ``H1 = g * p1 * sigma_y`` and
``H2 = g * p2 * sigma_z``, the four-factor group-commutator cycle

    exp(1j H2 dt) exp(1j H1 dt) exp(-1j H2 dt) exp(-1j H1 dt)
        = exp(2j g**2 dt**2 p1 p2 sigma_x) + O(dt**3)

is repeated ``k`` times with ``k * 2 g**2 dt**2`` equal to the target
angle coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuit import (
    MOMENTUM,
    POSITION,
    HomodyneResult,
    HybridState,
)
from .errors import SimulationError
from .grid import QumodeGrid

__all__ = [
    "TrotterPlan",
    "HybridEnsemble",
    "attach_interaction_registers",
    "trotter_exp_swap_step",
    "commutator_gate",
    "ensemble_homodyne_postselect",
]

# Relative mixture weight that compression may drop silently.
_COMPRESS_LOSS_TOL = 1e-8


@dataclass(frozen=True)
class TrotterPlan:
    """Discretization of the coupling evolution into exp-swap steps.

    ``steps * dt`` is the total evolution advanced (1 for the full
    algorithm); ``copies`` is the budget of fresh data-state copies,
    one consumed per step; ``g`` is the two-body coupling used when the
    ancilla rotation is synthesized from commutator cycles.
    """

    dt: float
    steps: int
    copies: int
    g: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt >= 0):
            raise ValueError(f"dt must be >= 0, got {self.dt}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.copies < self.steps:
            raise ValueError(
                f"need one copy per step: copies={self.copies} < steps={self.steps}"
            )
        if not (np.isfinite(self.g) and self.g > 0):
            raise ValueError(f"coupling g must be > 0, got {self.g}")


@dataclass(frozen=True)
class HybridEnsemble:
    """Mixed hybrid state as a stack of unnormalized pure branches.

    ``branches`` has shape ``(count, *qubit_dims, points, points)``; the
    measure-weighted squared norms of the branches sum to the trace
    (1 for a physical state).  ``truncation_loss`` accumulates the
    mixture weight that compression has dropped so far, so a long run
    can report exactly how much of the state its branch cap cost.
    """

    branches: np.ndarray
    grid: QumodeGrid
    basis: tuple[str, str]
    truncation_loss: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.branches, dtype=complex)
        if b.ndim < 4:
            raise ValueError(
                "branches need a branch axis, one or more qubit axes, "
                "and two qumode axes"
            )
        g = self.grid.points
        if b.shape[-2:] != (g, g):
            raise ValueError(
                f"qumode axes have shape {b.shape[-2:]}, grid wants {(g, g)}"
            )
        b.setflags(write=False)
        object.__setattr__(self, "branches", b)
        object.__setattr__(self, "basis", tuple(self.basis))

    @classmethod
    def from_state(cls, state: HybridState) -> "HybridEnsemble":
        return cls(state.amplitudes[None, ...], state.grid, state.basis)

    @property
    def branch_count(self) -> int:
        return self.branches.shape[0]

    @property
    def qubit_dims(self) -> tuple[int, ...]:
        return self.branches.shape[1:-2]

    def _measure(self) -> float:
        steps = {MOMENTUM: self.grid.dp, POSITION: self.grid.dq}
        return steps[self.basis[0]] * steps[self.basis[1]]

    def trace_weight(self) -> float:
        """Total mixture weight (1 for a physical state)."""
        return float(np.sum(np.abs(self.branches) ** 2) * self._measure())

    def branch_state(self, index: int) -> HybridState:
        return HybridState(self.branches[index], self.grid, self.basis)

    def apply(
        self, op: Callable[[HybridState], HybridState]
    ) -> "HybridEnsemble":
        """Map a pure-state operation over every branch."""
        states = [op(self.branch_state(i)) for i in range(self.branch_count)]
        basis = states[0].basis
        if any(s.basis != basis for s in states):
            raise ValueError("operation left branches in inconsistent bases")
        return HybridEnsemble(
            np.stack([s.amplitudes for s in states]),
            states[0].grid,
            basis,
            self.truncation_loss,
        )

    def gram(self) -> np.ndarray:
        """Hermitian matrix of measure-weighted branch inner products."""
        flat = self.branches.reshape(self.branch_count, -1)
        return (flat @ flat.conj().T) * self._measure()

    def purity(self) -> float:
        """``tr(rho**2) / tr(rho)**2`` of the represented mixture."""
        k = self.gram()
        tr = float(np.real(np.trace(k)))
        return float(np.sum(np.abs(k) ** 2) / tr**2)

    def compress(
        self,
        tol: float = 1e-12,
        max_branches: int = 64,
        loss_tol: float = _COMPRESS_LOSS_TOL,
    ) -> "HybridEnsemble":
        """Re-express the mixture over its principal pure components.

        Eigenbranches of the Gram matrix below ``tol`` (relative to the
        largest) are dropped, and at most ``max_branches`` of the
        heaviest remain.  The weight removed must stay below
        ``loss_tol`` relative to the total or a
        :class:`SimulationError` is raised; whatever is removed is
        added to ``truncation_loss``.
        """
        evals, evecs = np.linalg.eigh(self.gram())
        total = float(np.sum(np.clip(evals, 0.0, None)))
        keep = np.flatnonzero(evals > tol * evals[-1])[-max_branches:]
        if keep.size == 0:
            raise SimulationError(
                "ensemble carries no weight to compress", stage="compress"
            )
        kept = float(np.sum(evals[keep]))
        loss = max(total - kept, 0.0)
        if total > 0 and loss > loss_tol * total:
            raise SimulationError(
                f"mixture rank exceeds the {max_branches}-branch cap "
                f"(would drop weight {loss:.3g}, budget "
                f"{loss_tol * total:.3g})",
                stage="compress",
            )
        new = np.einsum("b...,bk->k...", self.branches, evecs[:, keep])
        return HybridEnsemble(
            new[::-1], self.grid, self.basis, self.truncation_loss + loss
        )

    def fidelity_with_pure(self, state: HybridState) -> float:
        """``<psi|rho|psi> / tr(rho)`` against a normalized pure state."""
        self._check_compatible(state)
        meas = self._measure()
        psi = state.amplitudes / state.norm() * np.sqrt(meas)
        flat = self.branches.reshape(self.branch_count, -1)
        amps = flat @ psi.conj().ravel() * np.sqrt(meas)
        return float(np.sum(np.abs(amps) ** 2) / self.trace_weight())

    def trace_distance_to_pure(self, state: HybridState) -> float:
        """Trace distance between the (normalized) mixture and a pure state."""
        self._check_compatible(state)
        meas = np.sqrt(self._measure())
        cols = [self.branches[i].ravel() * meas for i in range(self.branch_count)]
        cols.append(state.amplitudes.ravel() * meas / state.norm())
        y = np.column_stack(cols)
        r = np.linalg.qr(y, mode="r")
        small_rho = r[:, :-1] @ r[:, :-1].conj().T
        small_rho /= np.real(np.trace(small_rho))
        c = r[:, -1]
        proj = np.outer(c, c.conj()) / np.real(np.vdot(c, c))
        evals = np.linalg.eigvalsh(small_rho - proj)
        return float(0.5 * np.sum(np.abs(evals)))

    def _check_compatible(self, state: HybridState):
        if state.amplitudes.shape != self.branches.shape[1:]:
            raise ValueError("state and ensemble have different shapes")
        if state.basis != self.basis or state.grid != self.grid:
            raise ValueError("state and ensemble bases or grids differ")


def _as_ensemble(st: HybridState | HybridEnsemble) -> HybridEnsemble:
    if isinstance(st, HybridState):
        return HybridEnsemble.from_state(st)
    return st


def _mixture_eigenbranches(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Validated eigendecomposition of a trace-1 symmetric mixture."""
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"rho must be square, got shape {rho.shape}")
    if np.linalg.norm(rho - rho.T) > 1e-12 * max(np.linalg.norm(rho), 1.0):
        raise ValueError("rho must be symmetric")
    if abs(np.trace(rho) - 1.0) > 1e-9:
        raise ValueError(
            f"copy-register mixture must have unit trace, got {np.trace(rho)}"
        )
    w, vecs = np.linalg.eigh(rho)
    if w[0] < -1e-12:
        raise ValueError(f"rho has a negative eigenvalue {w[0]:.3g}")
    return np.clip(w, 0.0, None), vecs


def attach_interaction_registers(
    st: HybridState | HybridEnsemble, rho: np.ndarray
) -> HybridEnsemble:
    """Prepend an ancilla in ``|+>`` and a copy register in state ``rho``.

    The copy register matches the data feature register (the last qubit
    axis); the mixture enters as one branch per nonzero eigenvalue of
    ``rho``, scaled by the square root of its weight.
    """
    ens = _as_ensemble(st)
    weights, vecs = _mixture_eigenbranches(rho)
    n = ens.qubit_dims[-1]
    if vecs.shape[0] != n:
        raise ValueError(
            f"rho dimension {vecs.shape[0]} does not match the feature "
            f"register dimension {n}"
        )
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    out = []
    for b in range(ens.branch_count):
        branch = ens.branches[b]
        for e in np.flatnonzero(weights > 1e-14):
            copy = np.sqrt(weights[e]) * vecs[:, e]
            block = np.multiply.outer(np.multiply.outer(plus, copy), branch)
            out.append(block)
    return HybridEnsemble(np.stack(out), ens.grid, ens.basis, ens.truncation_loss)


def _apply_ancilla_pauli_momentum(
    amp: np.ndarray, p: np.ndarray, mode: int, pauli: str, coeff: float
) -> np.ndarray:
    """``exp(1j * coeff * p_mode * sigma_pauli)`` with ancilla on axis 0.

    The rotation angle varies along the chosen qumode momentum axis.
    """
    shape = [1] * amp.ndim
    shape[amp.ndim - 2 + mode] = p.shape[0]
    theta = (coeff * p).reshape(shape[1:])
    a0, a1 = amp[0], amp[1]
    if pauli == "y":
        c, s = np.cos(theta), np.sin(theta)
        return np.stack([c * a0 + s * a1, -s * a0 + c * a1])
    if pauli == "z":
        ph = np.exp(1j * theta)
        return np.stack([ph * a0, a1 / ph])
    raise ValueError(f"unknown pauli axis {pauli!r}")


def _ancilla_x_rotation(amp: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """``exp(1j * theta * sigma_x)`` with ancilla on axis 0 (theta broadcasts)."""
    c, s = np.cos(theta), np.sin(theta)
    a0, a1 = amp[0], amp[1]
    return np.stack([c * a0 + 1j * s * a1, 1j * s * a0 + c * a1])


def _commutator_cycles(
    amp: np.ndarray, p: np.ndarray, g: float, dt: float, k: int, forward: bool
) -> np.ndarray:
    """Apply ``k`` group-commutator cycles (or their exact inverses)."""
    fwd = [(0, "y", -g * dt), (1, "z", -g * dt), (0, "y", g * dt), (1, "z", g * dt)]
    seq = fwd if forward else [(m, ax, -co) for m, ax, co in reversed(fwd)]
    for _ in range(k):
        for mode, pauli, coeff in seq:
            amp = _apply_ancilla_pauli_momentum(amp, p, mode, pauli, coeff)
    return amp


def _cycle_count(plan: TrotterPlan, target_angle: float) -> int:
    """Number of commutator cycles realizing ``target_angle`` exactly."""
    per_cycle = 2.0 * plan.g**2 * plan.dt**2
    if per_cycle <= 0:
        raise ValueError("commutator synthesis needs dt > 0 and g > 0")
    k_real = abs(target_angle) / per_cycle
    k = int(np.round(k_real))
    if k < 1 or abs(k_real - k) > 1e-9 * max(1.0, k_real):
        raise SimulationError(
            f"target angle {target_angle:g} is not an integer number of "
            f"commutator cycles (k={k_real:g}, nearest achievable "
            f"{np.sign(target_angle) * k * per_cycle:g})",
            stage="commutator",
        )
    return k


def commutator_gate(
    st: HybridState, plan: TrotterPlan, target_angle: float
) -> HybridState:
    """Synthesize ``exp(1j * target_angle * p1 * p2 * sigma_x)`` from cycles.

    The ancilla must be the first qubit axis and both qumodes in the
    momentum basis.  ``target_angle / (2 g**2 dt**2)`` must round to a
    positive integer cycle count; otherwise the error reports the
    nearest achievable angle.  ``target_angle = 0`` is the identity.
    """
    if st.basis != (MOMENTUM, MOMENTUM):
        raise SimulationError(
            "commutator synthesis needs both qumodes in the momentum basis",
            stage="commutator",
        )
    if not st.qubit_dims or st.qubit_dims[0] != 2:
        raise SimulationError(
            "commutator synthesis needs the ancilla as the first qubit axis",
            stage="commutator",
        )
    if target_angle == 0.0:
        return st
    k = _cycle_count(plan, target_angle)
    amp = _commutator_cycles(
        st.amplitudes,
        st.grid.momentum_axis(),
        plan.g,
        plan.dt,
        k,
        forward=target_angle > 0,
    )
    return HybridState(amp, st.grid, st.basis)


def _controlled_swap_copy_feature(amp: np.ndarray) -> np.ndarray:
    """Swap copy (axis 1) with the data feature axis when ancilla is 1."""
    out = np.array(amp)
    out[1] = np.swapaxes(out[1], 0, out[1].ndim - 3)
    return out


def trotter_exp_swap_step(
    st: HybridState | HybridEnsemble,
    plan: TrotterPlan,
    eta: float,
    rho: np.ndarray | None = None,
    rotation: str = "exact",
    compress_tol: float = 1e-12,
    max_branches: int = 64,
    compress_loss_tol: float = _COMPRESS_LOSS_TOL,
) -> HybridEnsemble:
    """One exp-swap Trotter step, consuming one copy of the data mixture.

    If ``rho`` is given, the ancilla and copy registers are attached
    internally (one input branch at a time, to bound memory) and traced
    back out afterwards; otherwise the input must already carry them as
    its two leading qubit axes.  ``rotation`` selects how the ancilla
    x-rotation is realized: ``"exact"`` or ``"commutator"`` (cycle
    synthesis with the plan's ``g`` and ``dt``).

    The returned ensemble advances the data state's effective evolution
    by ``dt`` (error per step ``O(dt**2)``) and is compressed to its
    principal branches.
    """
    ens = _as_ensemble(st)
    if ens.basis != (MOMENTUM, MOMENTUM):
        raise SimulationError(
            "exp-swap step needs both qumodes in the momentum basis",
            stage="trotter",
        )
    if not (np.isfinite(eta) and eta > 0):
        raise ValueError(f"coupling strength eta must be > 0, got {eta}")
    if rotation not in ("exact", "commutator"):
        raise ValueError(f"unknown rotation scheme {rotation!r}")

    if rho is not None:
        weights, vecs = _mixture_eigenbranches(rho)
        n = ens.qubit_dims[-1]
        if vecs.shape[0] != n:
            raise ValueError(
                f"rho dimension {vecs.shape[0]} does not match the feature "
                f"register dimension {n}"
            )
        attached_dims = None
    else:
        dims = ens.qubit_dims
        if len(dims) < 3 or dims[0] != 2 or dims[1] != dims[-1]:
            raise SimulationError(
                "no ancilla/copy registers attached: expected qubit axes "
                f"(2, feature_dim, ..., feature_dim), got {dims}",
                stage="trotter",
            )
        attached_dims = dims

    theta = plan.dt * eta
    p = ens.grid.momentum_axis()
    pp = np.multiply.outer(p, p)
    k_cycles = _cycle_count(plan, theta) if (rotation == "commutator" and theta != 0) else 0

    def evolve_attached(block: np.ndarray) -> np.ndarray:
        block = _controlled_swap_copy_feature(block)
        if rotation == "exact":
            block = _ancilla_x_rotation(block, theta * pp)
        elif theta != 0:
            block = _commutator_cycles(block, p, plan.g, plan.dt, k_cycles, True)
        return _controlled_swap_copy_feature(block)

    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    hadamard = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    out = []

    if rho is not None:
        # Attach, evolve, and trace one input branch at a time.  The
        # copy is traced in the mixture eigenbasis (and the ancilla in
        # the +/- basis) so most of the weight lands in few branches.
        for b in range(ens.branch_count):
            branch = ens.branches[b]
            for e in np.flatnonzero(weights > 1e-14):
                copy = np.sqrt(weights[e]) * vecs[:, e]
                block = np.multiply.outer(np.multiply.outer(plus, copy), branch)
                block = evolve_attached(block)
                block = np.einsum("ab,b...->a...", hadamard, block)
                block = np.einsum("ne,an...->ae...", vecs, block)
                out.extend(
                    block[a, k]
                    for a in range(2)
                    for k in range(block.shape[1])
                )
    else:
        n = attached_dims[1]
        for b in range(ens.branch_count):
            block = evolve_attached(ens.branches[b])
            block = np.einsum("ab,b...->a...", hadamard, block)
            out.extend(block[a, k] for a in range(2) for k in range(n))

    stacked = np.stack(out)
    mass = np.sum(np.abs(stacked.reshape(stacked.shape[0], -1)) ** 2, axis=1)
    keep = mass > 1e-30 * max(float(np.max(mass)), 1e-300)
    result = HybridEnsemble(stacked[keep], ens.grid, ens.basis)
    return result.compress(tol=compress_tol, max_branches=max_branches)


def ensemble_homodyne_postselect(
    ens: HybridEnsemble, window_radius: float
) -> HomodyneResult:
    """Post-select both qumode positions near the origin, for mixtures.

    Same contract as the pure-state version: returns the acceptance
    probability, the window-averaged qubit density, and its dominant
    eigenvector phase-fixed against the heaviest window column of the
    heaviest branch.
    """
    if not (np.isfinite(window_radius) and window_radius > 0):
        raise ValueError(f"window radius must be > 0, got {window_radius}")
    if ens.basis != (POSITION, POSITION):
        raise SimulationError(
            "homodyne readout needs both qumodes in the position basis",
            stage="homodyne",
        )
    q = ens.grid.position_axis()
    mask = (q[:, None] ** 2 + q[None, :] ** 2) <= window_radius**2
    ia, ib = np.nonzero(mask)
    if ia.size == 0:
        raise SimulationError(
            "readout window contains no grid points", stage="homodyne"
        )
    dim = int(np.prod(ens.qubit_dims))
    g = ens.grid.points
    total = 0.0
    win = 0.0
    dens = np.zeros((dim, dim), dtype=complex)
    branch_mass = np.zeros(ens.branch_count)
    all_cols = []
    for b in range(ens.branch_count):
        flat = ens.branches[b].reshape(dim, g, g)
        cols = flat[:, ia, ib]
        all_cols.append(cols)
        branch_mass[b] = float(np.sum(np.abs(flat) ** 2))
        total += branch_mass[b]
        win += float(np.sum(np.abs(cols) ** 2))
        dens += cols @ cols.conj().T
    if total <= 0 or win <= 0:
        raise SimulationError(
            "readout window carries no amplitude", stage="homodyne"
        )
    dens /= win
    evals, evecs = np.linalg.eigh(dens)
    top = evecs[:, -1]
    heavy = int(np.argmax(branch_mass))
    col_mass = np.sum(np.abs(all_cols[heavy]) ** 2, axis=0)
    ref = all_cols[heavy][:, int(np.argmax(col_mass))]
    phase = np.vdot(top, ref)
    if np.abs(phase) > 0:
        top = top * (phase / np.abs(phase))
    return HomodyneResult(
        probability=win / total,
        post_state=top,
        reduced_density=dens,
        residual_entanglement=float(max(1.0 - evals[-1], 0.0)),
        qubit_dims=ens.qubit_dims,
        window_points=np.column_stack([q[ia], q[ib]]),
    )
