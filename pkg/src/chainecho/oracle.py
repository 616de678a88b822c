"""Brute-force validators on the full Fock / spin Hilbert space.

Everything here scales exponentially in the chain length and exists to
certify the polynomial pipeline at small sizes: exact anticommuting fermion
operators built with string factors, the dense many-body Hamiltonian of a
quadratic form, echoes by full eigendecomposition (including the two-sided
case the determinant formula cannot reach), and the spin-picture echo for
open chains, where the fermion mapping is exact.
"""

from __future__ import annotations

import threading
import warnings
from functools import lru_cache

import numpy as np
import scipy.sparse as sparse

from .chain import ChainSpec, QuadraticForm, QubitLabels, build_effective_fields, build_quadratic_form, diagonalize
from .echo import EchoSeries, TimeGrid, fingerprint

MAX_SITES_HAMILTONIAN = 12
MAX_SITES_ECHO = 10
DEGENERACY_TOL = 1e-10

_job_lock = threading.BoundedSemaphore(1)


class OracleSizeError(ValueError):
    """Requested system size exceeds the brute-force budget."""


class GroundDegeneracyWarning(UserWarning):
    """Ground space of the unperturbed Hamiltonian is (nearly) degenerate."""


def set_max_concurrent_jobs(count: int) -> None:
    """Cap simultaneous oracle jobs (each holds dense 2^N matrices)."""
    global _job_lock
    if count < 1:
        raise ValueError("need at least one concurrent job")
    _job_lock = threading.BoundedSemaphore(count)


def estimated_bytes(n_sites: int) -> int:
    """Rough peak memory of one echo job: a few dense complex 2^N matrices."""
    dim = 2**n_sites
    return 6 * dim * dim * 16


@lru_cache(maxsize=8)
def annihilation_operators(n_sites: int) -> tuple:
    """Sparse annihilators c_1 .. c_N with string factors, basis |occupations>.

    c_j = Z x .. x Z x a x I x .. x I with a = [[0, 1], [0, 0]] at slot j.
    The algebra {c_j, c_k^dag} = delta_jk, {c_j, c_k} = 0 is verified exactly
    on all pairs for N <= 6 and spot-checked on random pairs above that.
    """
    if n_sites > MAX_SITES_HAMILTONIAN:
        raise OracleSizeError(
            f"refusing {n_sites} sites; the brute-force budget ends at "
            f"{MAX_SITES_HAMILTONIAN}"
        )
    lower = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    string = sparse.csr_matrix(np.diag([1.0, -1.0]))
    eye2 = sparse.identity(2, format="csr")
    ops = []
    for j in range(n_sites):
        factors = [string] * j + [lower] + [eye2] * (n_sites - j - 1)
        mat = factors[0]
        for f in factors[1:]:
            mat = sparse.kron(mat, f, format="csr")
        ops.append(mat)
    _verify_algebra(ops, exhaustive=n_sites <= 6)
    return tuple(ops)


def _verify_algebra(ops, exhaustive: bool) -> None:
    n = len(ops)
    dim = ops[0].shape[0]
    eye = sparse.identity(dim, format="csr")
    if exhaustive:
        pairs = [(j, k) for j in range(n) for k in range(n)]
    else:
        rng = np.random.default_rng(2024)
        pairs = [tuple(rng.integers(0, n, 2)) for _ in range(2 * n)]
    for j, k in pairs:
        anti = ops[j] @ ops[k].T + ops[k].T @ ops[j]
        residual = anti - eye if j == k else anti
        if residual.nnz and np.abs(residual.data).max() != 0.0:
            raise AssertionError(f"{{c_{j}, c_{k}^dag}} violated")
        both = ops[j] @ ops[k] + ops[k] @ ops[j]
        if both.nnz and np.abs(both.data).max() != 0.0:
            raise AssertionError(f"{{c_{j}, c_{k}}} violated")


def fock_hamiltonian(form: QuadraticForm) -> np.ndarray:
    """Dense many-body matrix of a quadratic form, with the chain offset.

    H = sum A_jk c_j^dag c_k + 1/2 sum B_jk (c_j^dag c_k^dag + h.c.)
        - trace(A)/2,

    the scalar matching the chain construction (the sum of the site
    fields).  Real symmetric by construction.
    """
    n = form.n
    if n > MAX_SITES_HAMILTONIAN:
        raise OracleSizeError(
            f"refusing {n} sites; the brute-force budget ends at {MAX_SITES_HAMILTONIAN}"
        )
    ops = annihilation_operators(n)
    dim = 2**n
    ham = sparse.identity(dim, format="csr") * (-0.5 * np.trace(form.mat_a))
    for j, k in zip(*np.nonzero(form.mat_a)):
        ham = ham + form.mat_a[j, k] * (ops[j].T @ ops[k])
    for j, k in zip(*np.nonzero(form.mat_b)):
        pair = ops[j].T @ ops[k].T
        ham = ham + 0.5 * form.mat_b[j, k] * (pair + pair.T)
    dense = ham.toarray()
    assert np.abs(dense - dense.T).max() < 1e-12
    return dense


def _phase_fix(vec: np.ndarray) -> np.ndarray:
    lead = np.argmax(np.abs(vec))
    scale = vec[lead]
    return vec * (np.conj(scale) / abs(scale))


def chain_ground_state(spec: ChainSpec):
    """Many-body ground state of the unperturbed chain, deterministically.

    Returns (state, energy).  When the ground space is degenerate (gap
    below 1e-10, e.g. exactly at criticality) a GroundDegeneracyWarning is
    issued and the quasiparticle vacuum is selected inside the degenerate
    subspace by minimizing the total quasiparticle number, matching the
    initial state the determinant formula presumes.
    """
    form = build_quadratic_form(spec, QubitLabels(0, 0))
    ham = fock_hamiltonian(form)
    energies, vectors = np.linalg.eigh(ham)
    degenerate = energies <= energies[0] + DEGENERACY_TOL
    count = int(degenerate.sum())
    if count == 1:
        return _phase_fix(vectors[:, 0]), float(energies[0])
    warnings.warn(
        f"ground space of H_00 is {count}-fold degenerate "
        f"(gap {energies[count - 1] - energies[0]:.2e}); selecting the "
        "quasiparticle vacuum",
        GroundDegeneracyWarning,
        stacklevel=2,
    )
    subspace = vectors[:, :count]
    number_op = _quasiparticle_number_in_subspace(spec, form, subspace)
    _, mix = np.linalg.eigh(number_op)
    state = subspace @ mix[:, 0]
    return _phase_fix(state), float(energies[0])


def _quasiparticle_number_in_subspace(
    spec: ChainSpec, form: QuadraticForm, subspace: np.ndarray
) -> np.ndarray:
    """Projection of sum_k eta_k^dag eta_k onto the candidate ground space."""
    basis = diagonalize(form)
    ops = annihilation_operators(spec.n_sites)
    lowered = np.stack([op @ subspace for op in ops])      # c_j |s>
    raised = np.stack([op.T @ subspace for op in ops])     # c_j^dag |s>
    eta = np.einsum("kj,jdm->kdm", basis.coeff_u, lowered)
    eta += np.einsum("kj,jdm->kdm", basis.coeff_v, raised)
    number = np.zeros((subspace.shape[1], subspace.shape[1]))
    for k in range(spec.n_sites):
        number += np.real(eta[k].conj().T @ eta[k])
    return number


def _overlap_series(
    ham_fwd: np.ndarray,
    ham_bwd: np.ndarray,
    state: np.ndarray,
    grid: TimeGrid,
) -> np.ndarray:
    """|<state| e^{i H_bwd t} e^{-i H_fwd t} |state>|^2 over the grid.

    Both Hamiltonians are eigendecomposed once and reused for every time
    point.
    """
    w_fwd, p_fwd = np.linalg.eigh(ham_fwd)
    w_bwd, p_bwd = np.linalg.eigh(ham_bwd)
    amp_fwd = p_fwd.conj().T @ state
    amp_bwd = p_bwd.conj().T @ state
    cross = p_bwd.conj().T @ p_fwd
    values = np.empty(grid.n_points)
    for i, t in enumerate(grid.times):
        evolved = cross @ (np.exp(-1j * w_fwd * t) * amp_fwd)
        overlap = np.vdot(np.exp(-1j * w_bwd * t) * amp_bwd, evolved)
        values[i] = min(abs(overlap) ** 2, 1.0)
    return values


def fock_echo(
    spec: ChainSpec,
    labels_fwd: QubitLabels,
    labels_bwd: QubitLabels,
    grid: TimeGrid,
) -> EchoSeries:
    """General two-sided echo L_{ab,cd} by dense Fock-space propagation.

    Covers label pairs the determinant formula cannot (both sides nonzero),
    at exponential cost; the chain starts in the ground state of the
    unperturbed Hamiltonian.
    """
    if spec.n_sites > MAX_SITES_ECHO:
        raise OracleSizeError(
            f"refusing {spec.n_sites} sites; dense propagation ends at {MAX_SITES_ECHO}"
        )
    with _job_lock:
        state, _ = chain_ground_state(spec)
        ham_fwd = fock_hamiltonian(build_quadratic_form(spec, labels_fwd))
        ham_bwd = fock_hamiltonian(build_quadratic_form(spec, labels_bwd))
        values = _overlap_series(ham_fwd, ham_bwd, state, grid)
        max_energy = float(diagonalize(build_quadratic_form(spec, labels_fwd)).energies[-1])
    tag = f"fock:{labels_fwd.a}{labels_fwd.b}->{labels_bwd.a}{labels_bwd.b}"
    return EchoSeries(
        grid=grid,
        values=values,
        spec_fingerprint=fingerprint(spec, labels_fwd, tag=tag),
        max_energy=max_energy,
    )


# -- spin picture ------------------------------------------------------------

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def _site_operator(local: np.ndarray, site: int, n_sites: int) -> sparse.csr_matrix:
    mat = sparse.identity(1, format="csr", dtype=complex)
    for j in range(n_sites):
        block = local if j == site else np.eye(2)
        mat = sparse.kron(mat, sparse.csr_matrix(block.astype(complex)), format="csr")
    return mat


def spin_hamiltonian(spec: ChainSpec, labels: QubitLabels) -> np.ndarray:
    """Dense spin-picture effective Hamiltonian (any boundary).

    H = -sum_bonds [(1+gamma)/2 XX + (1-gamma)/2 YY] - sum_j field_j Z_j,
    with the qubit couplings folded into the site fields.  For periodic
    boundaries this is the exact spin chain, including the boundary term the
    fermion picture drops.
    """
    n = spec.n_sites
    if n > MAX_SITES_ECHO:
        raise OracleSizeError(
            f"refusing {n} sites; dense propagation ends at {MAX_SITES_ECHO}"
        )
    dim = 2**n
    fields = build_effective_fields(spec, labels)
    ham = sparse.csr_matrix((dim, dim), dtype=complex)
    n_bonds = n if spec.boundary == "periodic" else n - 1
    for j in range(n_bonds):
        k = (j + 1) % n
        xx = _site_operator(_PAULI_X, j, n) @ _site_operator(_PAULI_X, k, n)
        yy = _site_operator(_PAULI_Y, j, n) @ _site_operator(_PAULI_Y, k, n)
        ham = ham - 0.5 * (1.0 + spec.gamma) * xx - 0.5 * (1.0 - spec.gamma) * yy
    for j in range(n):
        ham = ham - fields[j] * _site_operator(_PAULI_Z, j, n)
    dense = ham.toarray()
    assert np.abs(dense.imag).max() < 1e-12
    return dense.real


def spin_echo(spec: ChainSpec, labels: QubitLabels, grid: TimeGrid) -> EchoSeries:
    """Echo computed entirely in the spin picture (any boundary).

    The chain starts in the spin ground state of the unperturbed
    Hamiltonian; for degenerate ground spaces the lowest eigenvector as
    returned by the symmetric eigensolver is used (deterministically) and a
    warning is recorded.
    """
    with _job_lock:
        ham0 = spin_hamiltonian(spec, QubitLabels(0, 0))
        energies, vectors = np.linalg.eigh(ham0)
        if energies[1] - energies[0] < DEGENERACY_TOL:
            warnings.warn(
                f"spin ground space is (nearly) degenerate "
                f"(gap {energies[1] - energies[0]:.2e}); using the eigensolver's "
                "first column",
                GroundDegeneracyWarning,
                stacklevel=2,
            )
        state = _phase_fix(vectors[:, 0].astype(complex))
        ham_fwd = spin_hamiltonian(spec, labels)
        values = _overlap_series(ham_fwd, ham0, state, grid)
    tag = f"spin:{labels.a}{labels.b}:{spec.boundary}"
    return EchoSeries(
        grid=grid,
        values=values,
        spec_fingerprint=fingerprint(spec, labels, tag=tag),
        max_energy=0.0,
    )


def spin_echo_open(spec: ChainSpec, labels: QubitLabels, grid: TimeGrid) -> EchoSeries:
    """Spin-picture echo for open boundaries, where the fermion map is exact.

    Must agree with ``fock_echo`` on the open-boundary quadratic form within
    brute-force accuracy; the periodic case is available through
    ``spin_echo`` for measuring the dropped boundary term.
    """
    if spec.boundary != "open":
        raise ValueError("spin_echo_open requires boundary='open'")
    return spin_echo(spec, labels, grid)
