"""Optimal 1 -> M symmetric-cloning target states.

The cloner maps a single unknown qubit onto an entangled register of
``2M - 1`` qubits: ``M`` approximate clones followed by ``M - 1`` anticlones.
Statevectors are dense complex arrays indexed so that the leftmost ket label
is the most significant bit; the clone block occupies the ``M`` leftmost
(most significant) qubits.

The output state is assembled as ``alpha * GM(|0>) + beta * GM(|1>)``, the
linear extension of the two computational-basis outputs.  Each basis output
is an explicit superposition of symmetrized blocks::

    GM(|0>) = sum_j  a_j  |(M-j) x |0>, j x |1>)_sym  (x)  ((M-j-1) x |1>, j x |0>)_sym
    GM(|1>) = sum_j  a_j  |(M-j) x |1>, j x |0>)_sym  (x)  ((M-j-1) x |0>, j x |1>)_sym

with weights ``a_j = sqrt(2(M-j) / (M(M+1)))``.  The two basis outputs are
orthogonal (their basis terms carry different total parity), so linearity
preserves normalization exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class PureQubit:
    """Single-qubit pure state ``alpha |0> + beta |1>``, normalized."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        norm_sq = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm_sq - 1.0) > _NORM_TOL:
            raise ValueError(f"qubit amplitudes not normalized: |psi|^2 = {norm_sq!r}")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=np.complex128)


KET_ZERO = PureQubit(1.0, 0.0)
KET_ONE = PureQubit(0.0, 1.0)
KET_PLUS = PureQubit(1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))


@dataclass(frozen=True)
class GMSpec:
    """Request for the output of the 1 -> ``clones`` symmetric cloner."""

    clones: int
    input: PureQubit = field(default=KET_PLUS)

    def __post_init__(self):
        if self.clones < 1:
            raise ValueError(f"clone count must be >= 1, got {self.clones}")

    @property
    def qubits(self) -> int:
        """Register width: M clones plus M - 1 anticlones."""
        return 2 * self.clones - 1


def gm_coefficients(m: int) -> np.ndarray:
    """Superposition weights ``sqrt(2(M-j)/(M(M+1)))`` for ``j = 0..M-1``.

    Strictly decreasing with ``j``; their squares sum to one.
    """
    if m < 1:
        raise ValueError(f"clone count must be >= 1, got {m}")
    j = np.arange(m)
    return np.sqrt(2.0 * (m - j) / (m * (m + 1.0)))


def symmetric_state(
    count_a: int, state_a: PureQubit, count_b: int, state_b: PureQubit
) -> np.ndarray:
    """Normalized equal-weight superposition of all distinct arrangements of
    ``count_a`` qubits in ``state_a`` and ``count_b`` qubits in ``state_b``.

    The two states must be orthogonal, which makes the arrangements mutually
    orthogonal and the normalization exact.
    """
    if count_a < 0 or count_b < 0:
        raise ValueError("copy counts must be non-negative")
    n = count_a + count_b
    if n < 1:
        raise ValueError("need at least one qubit")
    ip = np.vdot(state_a.vector, state_b.vector)
    if abs(ip) > _NORM_TOL:
        raise ValueError(f"states must be orthogonal, got |<a|b>| = {abs(ip):.3e}")
    va, vb = state_a.vector, state_b.vector
    amps = np.zeros(2**n, dtype=np.complex128)
    for b_positions in itertools.combinations(range(n), count_b):
        marked = set(b_positions)
        factors = [vb if q in marked else va for q in range(n)]
        amps += reduce(np.kron, factors)
    return amps / np.linalg.norm(amps)


def _gm_basis_output(m: int, bit: int) -> np.ndarray:
    """Cloner output for computational-basis input ``|bit>``."""
    coeffs = gm_coefficients(m)
    kept, flipped = (KET_ZERO, KET_ONE) if bit == 0 else (KET_ONE, KET_ZERO)
    amps = np.zeros(2 ** (2 * m - 1), dtype=np.complex128)
    for j in range(m):
        clones = symmetric_state(m - j, kept, j, flipped)
        if m > 1:
            anticlones = symmetric_state(m - j - 1, flipped, j, kept)
        else:
            anticlones = np.ones(1, dtype=np.complex128)
        amps += coeffs[j] * np.kron(clones, anticlones)
    return amps


def gm_state(spec: GMSpec) -> np.ndarray:
    """Dense ``2M - 1`` qubit output state of the optimal symmetric cloner.

    Linear in the input amplitudes; reduces to the pure basis outputs for
    ``|0>`` and ``|1>`` inputs.  For ``M = 1`` the output is the input qubit
    itself.
    """
    return (
        spec.input.alpha * _gm_basis_output(spec.clones, 0)
        + spec.input.beta * _gm_basis_output(spec.clones, 1)
    )


def reduced_qubit_density(state: np.ndarray, qubit_axis: int, n: int) -> np.ndarray:
    """2x2 reduced density matrix of one qubit of an ``n``-qubit pure state.

    ``qubit_axis`` counts from the left (most significant) ket label.
    """
    tensor = np.asarray(state, dtype=np.complex128).reshape((2,) * n)
    rest = np.moveaxis(tensor, qubit_axis, 0).reshape(2, -1)
    return rest @ rest.conj().T


def clone_fidelity_oracle(spec: GMSpec, clone_index: int) -> float:
    """Clone quality ``<psi| rho_clone |psi>`` from a brute-force partial trace.

    ``clone_index`` runs from 1 to ``M`` over the clone block; symmetry makes
    the value independent of the index.  This densely traces out all other
    qubits of the full cloner output, so it is independent of any tensor
    representation used elsewhere.
    """
    m = spec.clones
    if not 1 <= clone_index <= m:
        raise ValueError(f"clone index must be in [1, {m}], got {clone_index}")
    state = gm_state(spec)
    rho = reduced_qubit_density(state, clone_index - 1, spec.qubits)
    psi = spec.input.vector
    return float(np.real(np.vdot(psi, rho @ psi)))
