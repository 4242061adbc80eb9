"""Full-summation losses, their gradients, and Adam.

Gradients use the real decomposition: for every complex parameter ``w`` the
pair ``(dL/dRe w, dL/dIm w)``, packed as the complex number
``dL/dRe w + i dL/dIm w``.  The interleaved float view of that vector is
what :func:`adam_step` consumes.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .basis import SectorBasis
from .ed import GroundStateSolution
from .models import SparseHamiltonian
from .nqs import NetworkParams, backward, forward

__all__ = [
    "AdamConfig",
    "LossValue",
    "NumericalError",
    "Objective",
    "OptimizerState",
    "adam_step",
    "gradient",
    "init_optimizer",
    "overlap_head",
    "overlap_loss",
    "relative_energy_error",
    "voe_loss",
]

IMAG_TOL = 1e-10


class NumericalError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LossValue:
    kind: str
    value: float
    energy: float | None = None
    delta_e: float | None = None


def relative_energy_error(E: float, E_gs: float) -> float:
    """``(E - E_gs) / |E_gs|``; non-negative for variational energies."""
    if E_gs == 0:
        raise ValueError("relative energy error undefined for E_gs = 0")
    return (E - E_gs) / abs(E_gs)


def _amplitudes(logpsi: np.ndarray) -> np.ndarray:
    shift = logpsi.real.max()
    psi = np.exp(logpsi - shift)
    if not np.all(np.isfinite(psi)):
        bad = np.count_nonzero(~np.isfinite(psi))
        raise NumericalError(
            f"{bad} non-finite amplitudes after shift {shift:.6g} "
            f"(log-amplitude real range [{logpsi.real.min():.6g}, {logpsi.real.max():.6g}])"
        )
    return psi


def overlap_head(psi: np.ndarray, target: np.ndarray, with_grad: bool = False):
    """``1 - |<psi|target>| / ||psi||`` and, optionally, ``2 dL/dpsi*``.

    Invariant under ``psi -> c psi`` for any nonzero complex ``c``.
    """
    S = np.vdot(psi, target)
    absS = abs(S)
    norm2 = float(np.vdot(psi, psi).real)
    sq = np.sqrt(norm2)
    value = 1.0 - absS / sq
    if not with_grad:
        return float(value), None
    phase = S.conjugate() / absS if absS > 0 else 0.0
    return float(value), -(phase * target / sq - absS * psi / norm2 ** 1.5)


class Objective:
    """Loss head over the full sector: ``'overlap'`` (supervised) or ``'voe'``.

    ``H`` enables energy monitoring for the overlap loss; ``E_gs`` (taken
    from ``gs`` when given) enables the relative energy error.
    """

    def __init__(self, kind: str, basis: SectorBasis, H: SparseHamiltonian | None = None,
                 gs: GroundStateSolution | None = None, E_gs: float | None = None):
        if kind not in ("overlap", "voe"):
            raise ValueError(f"unknown loss kind {kind!r}")
        if kind == "overlap" and gs is None:
            raise ValueError("overlap loss needs the exact ground state")
        if kind == "voe" and H is None:
            raise ValueError("voe loss needs the Hamiltonian")
        if gs is not None:
            target = np.asarray(gs.vector, dtype=complex)
            if target.shape != (basis.dim,):
                raise ValueError("ground-state vector does not match the basis")
            if abs(np.linalg.norm(target) - 1.0) > 1e-10:
                raise ValueError("ground-state vector must have unit norm")
            E_gs = gs.energy if E_gs is None else E_gs
        else:
            target = None
        if H is not None and H.dim != basis.dim:
            raise ValueError("Hamiltonian does not match the basis")
        self.kind = kind
        self.basis = basis
        self.H = H
        self.target = target
        self.E_gs = E_gs
        self.X = basis.bits()

    def energy(self, psi: np.ndarray, norm2: float, Hpsi: np.ndarray | None = None) -> float:
        if Hpsi is None:
            Hpsi = self.H.matvec(psi)
        q = np.vdot(psi, Hpsi) / norm2
        if abs(q.imag) > IMAG_TOL * max(1.0, abs(q.real)):
            raise NumericalError(f"Rayleigh quotient has imaginary part {q.imag:.3e}")
        return float(q.real)

    def evaluate(self, params: NetworkParams, with_grad: bool = False):
        """Loss value, and optionally the packed complex gradient."""
        logpsi, cache = forward(params, self.X, cache=True)
        psi = _amplitudes(logpsi)
        norm2 = float(np.vdot(psi, psi).real)
        Hpsi = self.H.matvec(psi) if self.H is not None else None
        energy = self.energy(psi, norm2, Hpsi) if Hpsi is not None else None
        delta_e = None
        if energy is not None and self.E_gs is not None:
            delta_e = relative_energy_error(energy, self.E_gs)

        if self.kind == "overlap":
            value, gpsi = overlap_head(psi, self.target, with_grad)
        else:
            value = energy
            gpsi = 2.0 * (Hpsi - energy * psi) / norm2 if with_grad else None
        loss = LossValue(self.kind, float(value), energy, delta_e)
        if not with_grad:
            return loss
        grad = backward(params, logpsi, cache, psi.conj() * gpsi)
        return loss, grad


def overlap_loss(params: NetworkParams, gs: GroundStateSolution, basis: SectorBasis,
                 H: SparseHamiltonian | None = None) -> LossValue:
    """``1 - |<psi|gs>| / ||psi||`` by summation over the whole basis."""
    return Objective("overlap", basis, H=H, gs=gs).evaluate(params)


def voe_loss(params: NetworkParams, H: SparseHamiltonian, basis: SectorBasis,
             E_gs: float | None = None) -> LossValue:
    """Rayleigh quotient ``<psi|H|psi> / <psi|psi>``."""
    return Objective("voe", basis, H=H, E_gs=E_gs).evaluate(params)


def gradient(params: NetworkParams, objective: Objective) -> np.ndarray:
    """Real-decomposed gradient, interleaved as ``(dRe, dIm)`` per parameter."""
    _, g = objective.evaluate(params, with_grad=True)
    return g.view(np.float64)


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    # piecewise-constant schedule: ((first_step, lr), ...) overriding ``lr`` from that step on
    schedule: tuple[tuple[int, float], ...] = ()

    def lr_at(self, t: int) -> float:
        lr = self.lr
        for start, value in sorted(self.schedule):
            if t >= start:
                lr = value
        return lr


@dataclass(frozen=True)
class OptimizerState:
    m: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    t: int = 0
    config: AdamConfig = AdamConfig()


def init_optimizer(params: NetworkParams, config: AdamConfig | None = None) -> OptimizerState:
    n = params.real_vector().size
    return OptimizerState(np.zeros(n), np.zeros(n), 0, config or AdamConfig())


def adam_step(state: OptimizerState, params: NetworkParams, grad: np.ndarray):
    """One bias-corrected Adam update; ``grad`` is the interleaved real gradient."""
    x = params.real_vector()
    if grad.shape != x.shape or state.m.shape != x.shape:
        raise ValueError(f"shape mismatch: params {x.shape}, grad {grad.shape}, moments {state.m.shape}")
    c = state.config
    t = state.t + 1
    lr = c.lr_at(state.t)
    m = c.beta1 * state.m + (1 - c.beta1) * grad
    v = c.beta2 * state.v + (1 - c.beta2) * grad * grad
    m_hat = m / (1 - c.beta1 ** t)
    v_hat = v / (1 - c.beta2 ** t)
    x_new = x - lr * m_hat / (np.sqrt(v_hat) + c.eps)
    return NetworkParams.from_real_vector(params.arch, x_new), replace(state, m=m, v=v, t=t)
