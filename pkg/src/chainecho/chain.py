"""Quadratic fermion Hamiltonians for an XY chain with local field defects.

The chain Hamiltonian (anisotropy ``gamma``, transverse field ``lam``) is
mapped to a quadratic form in spinless fermions,

    H = sum_jk A_jk c_j^dag c_k + 1/2 sum_jk B_jk (c_j^dag c_k^dag + h.c.) + const,

with A real symmetric and B real antisymmetric.  Coupling a qubit in state
``1`` to a site shifts that site's field by the coupling strength, so every
qubit-label pair ``(a, b)`` selects its own effective Hamiltonian.  The
quadratic form is brought to diagonal quasiparticle form

    H = sum_k energies[k] * eta_k^dag eta_k + const,   eta = U c + V c^dag,

by a Bogoliubov transformation computed from the singular value
decomposition of A - B.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

BOUNDARIES = ("periodic", "open")

# Tolerances used by the canonical-basis construction.
CANONICAL_TOL = 1e-10
ZERO_MODE_TOL = 1e-12


class DiagonalizationError(RuntimeError):
    """Raised when the eigensolver fails; carries the offending parameters."""


@dataclass(frozen=True)
class ChainSpec:
    """Full physical scenario: chain geometry, Hamiltonian, qubit couplings.

    Parameters
    ----------
    n_sites : int
        Number of chain sites N (>= 2).
    gamma : float
        In-plane anisotropy.  ``gamma = 1`` is the transverse-field Ising
        chain.
    lam : float
        Uniform transverse field.
    coupling : float
        Qubit-chain coupling strength g (>= 0).
    site_a, site_b : int
        1-based chain sites the two qubits couple to.
    boundary : str
        ``"periodic"`` (fermion operators treated as cyclic) or ``"open"``.
    """

    n_sites: int
    gamma: float
    lam: float
    coupling: float
    site_a: int = 1
    site_b: int = 1
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be >= 2, got {self.n_sites}")
        if self.coupling < 0:
            raise ValueError(f"coupling must be >= 0, got {self.coupling}")
        for name in ("site_a", "site_b"):
            s = getattr(self, name)
            if not 1 <= s <= self.n_sites:
                raise ValueError(
                    f"{name} must lie in [1, {self.n_sites}], got {s}"
                )
        if self.boundary not in BOUNDARIES:
            raise ValueError(
                f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}"
            )
        for name in ("gamma", "lam", "coupling"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def distance(self) -> int:
        """Site separation d; for periodic chains the shorter arc."""
        d = abs(self.site_b - self.site_a)
        if self.boundary == "periodic":
            d = min(d, self.n_sites - d)
        return d


@dataclass(frozen=True)
class QubitLabels:
    """Computational-basis labels (a, b) of the two qubits, each 0 or 1."""

    a: int
    b: int

    def __post_init__(self):
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got ({self.a}, {self.b})")


@dataclass(eq=False)
class QuadraticForm:
    """Coefficients of a quadratic fermion Hamiltonian.

    ``mat_a`` is the hopping/field block (exactly symmetric), ``mat_b`` the
    pairing block (exactly antisymmetric).  The scalar offset of the chain
    construction is not stored; it equals ``-trace(mat_a) / 2``.
    """

    mat_a: np.ndarray
    mat_b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.mat_a, dtype=float)
        b = np.asarray(self.mat_b, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
            raise ValueError(f"expected square matrices of equal shape, got {a.shape} and {b.shape}")
        if not np.isfinite(a).all() or not np.isfinite(b).all():
            raise ValueError("matrix entries must be finite")
        if not np.array_equal(a, a.T):
            raise ValueError("mat_a must be exactly symmetric")
        if not np.array_equal(b, -b.T):
            raise ValueError("mat_b must be exactly antisymmetric")
        a.setflags(write=False)
        b.setflags(write=False)
        self.mat_a = a
        self.mat_b = b

    @property
    def n(self) -> int:
        return self.mat_a.shape[0]


@dataclass(eq=False)
class EigenBasis:
    """Canonical quasiparticle basis: eta = U c + V c^dag, energies >= 0.

    Rows index modes, sorted by ascending energy.  The pair (U, V) satisfies
    U U^T + V V^T = I and U V^T + V U^T = 0 within ``CANONICAL_TOL``.
    """

    coeff_u: np.ndarray
    coeff_v: np.ndarray
    energies: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.coeff_u, dtype=float)
        v = np.asarray(self.coeff_v, dtype=float)
        e = np.asarray(self.energies, dtype=float)
        n = u.shape[0]
        if u.shape != (n, n) or v.shape != (n, n) or e.shape != (n,):
            raise ValueError("inconsistent shapes for (U, V, energies)")
        if np.any(e < -ZERO_MODE_TOL):
            raise ValueError("energies must be non-negative")
        eye = np.eye(n)
        if np.max(np.abs(u @ u.T + v @ v.T - eye)) > CANONICAL_TOL:
            raise ValueError("U U^T + V V^T deviates from identity")
        if np.max(np.abs(u @ v.T + v @ u.T)) > CANONICAL_TOL:
            raise ValueError("U V^T + V U^T deviates from zero")
        for arr in (u, v, e):
            arr.setflags(write=False)
        self.coeff_u = u
        self.coeff_v = v
        self.energies = e

    @property
    def n(self) -> int:
        return self.energies.shape[0]


def build_effective_fields(spec: ChainSpec, labels: QubitLabels) -> np.ndarray:
    """Site-resolved transverse field lam + g * (a at site_a, b at site_b).

    When both qubits sit on the same site with labels (1, 1) the site carries
    lam + 2g.
    """
    fields = np.full(spec.n_sites, float(spec.lam))
    fields[spec.site_a - 1] += spec.coupling * labels.a
    fields[spec.site_b - 1] += spec.coupling * labels.b
    return fields


def build_quadratic_form(spec: ChainSpec, labels: QubitLabels) -> QuadraticForm:
    """Quadratic form of the effective Hamiltonian for one label pair.

    Nearest-neighbour hopping of magnitude 1, pairing of magnitude
    ``gamma``, diagonal ``-2 * field``.  For periodic boundaries the fermion
    operators are treated as cyclic (the parity-dependent boundary
    correction of the spin picture is dropped); for open boundaries the
    mapping from the spin chain is exact.
    """
    n = spec.n_sites
    fields = build_effective_fields(spec, labels)
    mat_a = np.zeros((n, n))
    mat_b = np.zeros((n, n))
    mat_a[np.arange(n), np.arange(n)] = -2.0 * fields
    n_bonds = n if spec.boundary == "periodic" else n - 1
    for j in range(n_bonds):
        k = (j + 1) % n
        mat_a[j, k] += -1.0
        mat_a[k, j] += -1.0
        mat_b[j, k] += -spec.gamma
        mat_b[k, j] += +spec.gamma
    return QuadraticForm(mat_a, mat_b)


def diagonalize(form: QuadraticForm) -> EigenBasis:
    """Canonical quasiparticle basis of a quadratic form.

    Writing phi = U + V and psi = U - V (rows per mode), the mode equations
    read phi (A - B) = E psi and psi (A + B) = E phi, so the singular value
    decomposition A - B = phi^T E psi delivers a complete canonical basis
    with all energies non-negative.

    Deterministic conventions: energies ascending; inside a degenerate block
    modes are ordered by the column of their largest |U| entry; each mode is
    oriented so its leading U (or V) coefficient is positive; zero-energy
    modes are clamped to zero and oriented to be empty in the vacuum (the
    U row dominant), matching the limit from the ordered phase.
    """
    m = form.mat_a - form.mat_b
    try:
        left, sing, right = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:
        raise DiagonalizationError(
            f"SVD failed for {form.n}x{form.n} quadratic form "
            f"(|A|_max={np.abs(form.mat_a).max():.3g}, "
            f"|B|_max={np.abs(form.mat_b).max():.3g}): {exc}"
        ) from exc
    # ascending energies
    phi = left.T[::-1].copy()
    psi = right[::-1].copy()
    energies = sing[::-1].copy()

    zero = energies < ZERO_MODE_TOL
    energies[zero] = 0.0
    for k in np.nonzero(zero)[0]:
        # relative sign is free at zero energy; choose the mode empty
        if np.linalg.norm(phi[k] + psi[k]) < np.linalg.norm(phi[k] - psi[k]):
            psi[k] = -psi[k]

    coeff_u = 0.5 * (phi + psi)
    coeff_v = 0.5 * (phi - psi)

    order = _degenerate_block_order(energies, coeff_u)
    coeff_u = coeff_u[order]
    coeff_v = coeff_v[order]
    energies = energies[order]

    _orient_modes(coeff_u, coeff_v)
    return EigenBasis(coeff_u, coeff_v, energies)


def _degenerate_block_order(energies: np.ndarray, coeff_u: np.ndarray) -> np.ndarray:
    """Stable mode order: ascending energy, ties broken by argmax |U| column."""
    n = len(energies)
    tol = 1e-10 * max(1.0, energies[-1] if n else 1.0)
    order = np.arange(n)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and energies[stop] - energies[start] <= tol:
            stop += 1
        if stop - start > 1:
            block = order[start:stop]
            keys = [int(np.argmax(np.abs(coeff_u[k]))) for k in block]
            order[start:stop] = block[np.argsort(keys, kind="stable")]
        start = stop
    return order


def _orient_modes(coeff_u: np.ndarray, coeff_v: np.ndarray) -> None:
    """Flip joint row signs so the leading significant coefficient is positive.

    Prefers the diagonal U entry, falls back to the first significant entry
    of the U row, then of the V row.  In-place.
    """
    n = coeff_u.shape[0]
    for k in range(n):
        lead = coeff_u[k, k]
        if abs(lead) <= ZERO_MODE_TOL:
            row = coeff_u[k]
            idx = np.nonzero(np.abs(row) > ZERO_MODE_TOL)[0]
            if idx.size == 0:
                row = coeff_v[k]
                idx = np.nonzero(np.abs(row) > ZERO_MODE_TOL)[0]
                if idx.size == 0:
                    continue
            lead = row[idx[0]]
        if lead < 0:
            coeff_u[k] = -coeff_u[k]
            coeff_v[k] = -coeff_v[k]


def analytic_spectrum(n_sites: int, lam: float) -> np.ndarray:
    """Closed-form quasiparticle energies of the unperturbed Ising chain.

    E_k = 2 sqrt(1 + lam^2 + 2 lam cos(2 pi k / N)), k = 0 .. N-1, sorted
    ascending.  Valid reference for gamma = 1, zero coupling, periodic
    boundary; all values lie between 2|1 - lam| and 2|1 + lam|.
    """
    if n_sites < 2:
        raise ValueError(f"n_sites must be >= 2, got {n_sites}")
    k = np.arange(n_sites)
    arg = 1.0 + lam * lam + 2.0 * lam * np.cos(2.0 * np.pi * k / n_sites)
    energies = 2.0 * np.sqrt(np.maximum(arg, 0.0))
    return np.sort(energies)
