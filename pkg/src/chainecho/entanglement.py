"""Two-qubit purity, negativity, and sudden-death events from the echo.

For the initial state alpha|00> + beta|11>, optionally mixed with the
identity (weight p), the reduced dynamics depends on the chain only through
the echo L(t):

    purity      Tr rho^2 = 1 - 2 |alpha beta|^2 (1 - L)          (p = 0)
    negativity  N = max{0, (1 - p) |alpha beta| sqrt(L) - p/4}

so neither the 4x4 density matrix nor its partial transpose needs to be
materialized.  A brute-force path that does build them is kept as a
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .echo import EchoSeries, TimeGrid

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class SystemState:
    """Initial qubit state alpha|00> + beta|11> mixed with identity.

    ``mixing_p`` in [0, 1] is the identity admixture; the pure amplitudes
    must satisfy |alpha|^2 + |beta|^2 = 1.
    """

    alpha: complex
    beta: complex
    mixing_p: float = 0.0

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise ValueError(
                f"|alpha|^2 + |beta|^2 must be 1 within {NORMALIZATION_TOL}, got {norm!r}"
            )
        if not 0.0 <= self.mixing_p <= 1.0:
            raise ValueError(f"mixing_p must lie in [0, 1], got {self.mixing_p}")

    @property
    def overlap(self) -> float:
        """|alpha * beta|, the entanglement weight of the pure part."""
        return abs(self.alpha) * abs(self.beta)

    @classmethod
    def bell(cls, mixing_p: float = 0.0) -> "SystemState":
        s = 1.0 / math.sqrt(2.0)
        return cls(alpha=s, beta=s, mixing_p=mixing_p)


@dataclass(eq=False)
class EntanglementReport:
    """Purity and negativity over a grid plus death/revival events."""

    grid: TimeGrid
    purity: np.ndarray
    negativity: np.ndarray
    events: list


def purity(echo, state: SystemState):
    """Tr rho^2 = 1 - 2 |alpha beta|^2 (1 - L) for the pure initial state.

    Only defined for ``mixing_p = 0``; accepts a scalar or an array of echo
    values.
    """
    if state.mixing_p != 0.0:
        raise ValueError("purity formula applies to the pure initial state only")
    echo = np.asarray(echo, dtype=float)
    out = 1.0 - 2.0 * state.overlap**2 * (1.0 - echo)
    return float(out) if out.ndim == 0 else out


def signed_negativity(echo, state: SystemState):
    """(1 - p) |alpha beta| sqrt(L) - p/4 before clamping at zero.

    Negative values mean the state is separable; the sign changes locate
    sudden-death and revival events.
    """
    echo = np.asarray(echo, dtype=float)
    out = (1.0 - state.mixing_p) * state.overlap * np.sqrt(echo) - state.mixing_p / 4.0
    return float(out) if out.ndim == 0 else out


def negativity(echo, state: SystemState):
    """max{0, (1 - p) |alpha beta| sqrt(L) - p/4}."""
    out = np.maximum(0.0, signed_negativity(echo, state))
    return float(out) if np.ndim(out) == 0 else out


def sudden_death_threshold(state: SystemState) -> float:
    """Echo value below which the negativity is exactly zero.

    L_lim(p) = [4 |alpha beta| (1/p - 1)]^{-2}.  May exceed 1, meaning the
    state is separable at all times.  Undefined for p = 0 (entanglement
    survives down to L = 0) and for |alpha beta| = 0 (never entangled).
    """
    if state.overlap == 0.0:
        raise ValueError("state is never entangled (|alpha beta| = 0)")
    p = state.mixing_p
    if p == 0.0:
        raise ValueError("no finite threshold for p = 0; negativity vanishes only at L = 0")
    if p == 1.0:
        return float("inf")
    return (4.0 * state.overlap * (1.0 / p - 1.0)) ** -2


def detect_events(series: EchoSeries, state: SystemState) -> list:
    """Times where the negativity crosses zero, as (time, kind) pairs.

    Kinds alternate between "death" and "revival"; the state counts as dead
    at exact zero.  Crossing times are located by linear interpolation of
    the signed negativity between adjacent grid points.  Requires
    0 < mixing_p < 1.
    """
    if not 0.0 < state.mixing_p < 1.0:
        raise ValueError(f"event detection requires 0 < mixing_p < 1, got {state.mixing_p}")
    signed = signed_negativity(series.values, state)
    times = series.times
    events = []
    alive = signed[0] > 0.0
    for i in range(1, len(signed)):
        now_alive = signed[i] > 0.0
        if now_alive == alive:
            continue
        s0, s1 = signed[i - 1], signed[i]
        frac = s0 / (s0 - s1) if s1 != s0 else 0.0
        t_cross = times[i - 1] + frac * (times[i] - times[i - 1])
        events.append((float(t_cross), "death" if alive else "revival"))
        alive = now_alive
    return events


def entanglement_report(series: EchoSeries, state: SystemState) -> EntanglementReport:
    """Purity, negativity, and events for an echo series.

    The purity column always refers to the pure (p = 0) initial state, the
    only case the closed form covers; negativity and events use the full
    mixed state.  Events are reported only when 0 < p < 1.
    """
    pure = SystemState(state.alpha, state.beta, 0.0)
    events = detect_events(series, state) if 0.0 < state.mixing_p < 1.0 else []
    return EntanglementReport(
        grid=series.grid,
        purity=purity(series.values, pure),
        negativity=negativity(series.values, state),
        events=events,
    )


# -- brute-force cross-check path -------------------------------------------

def density_matrix(echo: float, state: SystemState, echo_phase: float = 0.0) -> np.ndarray:
    """Explicit 4x4 reduced density matrix for a given echo value.

    The echo enters the |00><11| coherence as sqrt(L) e^{i phase}; the
    phase is physically irrelevant for purity and negativity and defaults
    to zero.
    """
    if not 0.0 <= echo <= 1.0:
        raise ValueError(f"echo must lie in [0, 1], got {echo}")
    p = state.mixing_p
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = (1.0 - p) * abs(state.alpha) ** 2 + p / 4.0
    rho[1, 1] = rho[2, 2] = p / 4.0
    rho[3, 3] = (1.0 - p) * abs(state.beta) ** 2 + p / 4.0
    coherence = (
        (1.0 - p)
        * state.alpha
        * np.conj(state.beta)
        * math.sqrt(echo)
        * np.exp(1j * echo_phase)
    )
    rho[0, 3] = coherence
    rho[3, 0] = np.conj(coherence)
    return rho


def purity_from_matrix(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Partial transpose over the second qubit of a 4x4 two-qubit matrix."""
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def negativity_from_matrix(rho: np.ndarray) -> float:
    """Absolute sum of the negative eigenvalues of the partial transpose."""
    eigenvalues = np.linalg.eigvalsh(partial_transpose(rho))
    return float(-eigenvalues[eigenvalues < 0.0].sum())
