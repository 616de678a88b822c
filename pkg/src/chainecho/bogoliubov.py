"""Bogoliubov connection between two quasiparticle bases.

Two canonical bases over the same chain are related by

    eta^(from)_j = sum_k g_jk eta^(to)_k + h_jk eta^(to)_k^dag,

and the pair (g, h) inherits the canonical constraints g g^T + h h^T = I,
g h^T + h g^T = 0.  Both g + h and g - h are then orthogonal, which pins
|det(g + h)| = 1 and with it the t = 0 value of the echo.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .chain import CANONICAL_TOL, EigenBasis


@dataclass(eq=False)
class BogoliubovMap:
    """Connection (g, h) from a source basis to a target basis.

    ``energies_target`` holds the target-basis mode energies, i.e. the
    frequencies that drive the echo phases.
    """

    mat_g: np.ndarray
    mat_h: np.ndarray
    energies_target: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.mat_g, dtype=float)
        h = np.asarray(self.mat_h, dtype=float)
        e = np.asarray(self.energies_target, dtype=float)
        n = g.shape[0]
        if g.shape != (n, n) or h.shape != (n, n) or e.shape != (n,):
            raise ValueError("inconsistent shapes for (g, h, energies_target)")
        eye = np.eye(n)
        if np.max(np.abs(g @ g.T + h @ h.T - eye)) > CANONICAL_TOL:
            raise ValueError("g g^T + h h^T deviates from identity")
        if np.max(np.abs(g @ h.T + h @ g.T)) > CANONICAL_TOL:
            raise ValueError("g h^T + h g^T deviates from zero")
        for plus_minus in (g + h, g - h):
            if np.max(np.abs(plus_minus @ plus_minus.T - eye)) > CANONICAL_TOL:
                raise ValueError("g +/- h deviates from orthogonality")
        _, logdet = np.linalg.slogdet(g + h)
        if abs(np.exp(logdet) - 1.0) > CANONICAL_TOL:
            raise ValueError("|det(g + h)| deviates from 1")
        for arr in (g, h, e):
            arr.setflags(write=False)
        self.mat_g = g
        self.mat_h = h
        self.energies_target = e

    @property
    def n(self) -> int:
        return self.energies_target.shape[0]


def connect(basis_from: EigenBasis, basis_to: EigenBasis) -> BogoliubovMap:
    """Map expressing the source quasiparticles in the target basis.

    With eta = U c + V c^dag for each basis, inverting the (orthogonal)
    target block transformation gives

        g = U_from U_to^T + V_from V_to^T,
        h = U_from V_to^T + V_from U_to^T.

    ``connect(b, b)`` returns (I, 0).
    """
    if basis_from.n != basis_to.n:
        raise ValueError(
            f"basis dimensions differ: {basis_from.n} vs {basis_to.n}"
        )
    u0, v0 = basis_from.coeff_u, basis_from.coeff_v
    u1, v1 = basis_to.coeff_u, basis_to.coeff_v
    mat_g = u0 @ u1.T + v0 @ v1.T
    mat_h = u0 @ v1.T + v0 @ u1.T
    return BogoliubovMap(mat_g, mat_h, basis_to.energies.copy())


def compose(first: BogoliubovMap, second: BogoliubovMap) -> BogoliubovMap:
    """Composition rule: the map A->C from maps A->B and B->C.

    g_ac = g_ab g_bc + h_ab h_bc,  h_ac = g_ab h_bc + h_ab g_bc.
    """
    if first.n != second.n:
        raise ValueError(f"map dimensions differ: {first.n} vs {second.n}")
    mat_g = first.mat_g @ second.mat_g + first.mat_h @ second.mat_h
    mat_h = first.mat_g @ second.mat_h + first.mat_h @ second.mat_g
    return BogoliubovMap(mat_g, mat_h, second.energies_target.copy())


def mode_populations(bmap: BogoliubovMap) -> np.ndarray:
    """Occupation of each target mode in the source vacuum: diag(h^T h).

    The total population equals ||h||_F^2.
    """
    return np.einsum("ij,ij->j", bmap.mat_h, bmap.mat_h)
