"""Exact simulation of the quantum operations the Bell-state protocols need.

A QuantumRegister tracks entanglement components: each component is a small
dense complex state vector over the qubits that are entangled with each other.
In these protocols components never exceed four qubits, so exact amplitudes
stay cheap while remaining directly inspectable in tests.

Index convention: within a component of k qubits, the qubit at list position
j owns bit (k - 1 - j) of the amplitude index (first qubit is the most
significant bit).
"""

from __future__ import annotations

from enum import Enum
from math import sqrt
from random import Random

NORM_ATOL = 1e-9

_INV_SQRT2 = 2 ** -0.5


class Pauli(Enum):
    X = "X"
    Z = "Z"
    IY = "iY"


class BellState(Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


# Amplitude conventions: Phi+- = (|00> +- |11>)/sqrt(2), Psi+- = (|01> +- |10>)/sqrt(2).
BELL_AMPLITUDES = {
    BellState.PHI_PLUS: (_INV_SQRT2, 0.0, 0.0, _INV_SQRT2),
    BellState.PHI_MINUS: (_INV_SQRT2, 0.0, 0.0, -_INV_SQRT2),
    BellState.PSI_PLUS: (0.0, _INV_SQRT2, _INV_SQRT2, 0.0),
    BellState.PSI_MINUS: (0.0, _INV_SQRT2, -_INV_SQRT2, 0.0),
}

# Fixed sampling order for inverse-CDF draws; shared with any external oracle
# so that identical random streams produce identical outcomes.
BELL_ORDER = (
    BellState.PHI_PLUS,
    BellState.PHI_MINUS,
    BellState.PSI_PLUS,
    BellState.PSI_MINUS,
)

# Column-convention 2x2 matrices: (m00, m01, m10, m11).
_PAULI_MATRIX = {
    Pauli.X: (0.0, 1.0, 1.0, 0.0),
    Pauli.Z: (1.0, 0.0, 0.0, -1.0),
    Pauli.IY: (0.0, 1.0, -1.0, 0.0),  # |0> -> -|1>, |1> -> |0>
}


class _Component:
    __slots__ = ("qubits", "amps")

    def __init__(self, qubits, amps):
        self.qubits = qubits  # list of qubit ids, order fixes bit positions
        self.amps = amps      # list of 2**len(qubits) complex amplitudes


def _reorder(qubits, amps, new_order):
    """Permute the qubit order of an amplitude vector."""
    k = len(qubits)
    pos = {q: i for i, q in enumerate(qubits)}
    shifts = [k - 1 - pos[q] for q in new_order]
    out = [0j] * len(amps)
    for i, a in enumerate(amps):
        if a == 0:
            continue
        j = 0
        for s in shifts:
            j = (j << 1) | ((i >> s) & 1)
        out[j] = a
    return out


class QuantumRegister:
    """Collection of qubits partitioned into entanglement components.

    All measurement randomness flows through the seeded `rng`, so a register
    replays identically for a given seed and operation script.
    """

    def __init__(self, seed=None, rng: Random | None = None):
        self.rng = rng if rng is not None else Random(seed)
        self._next_id = 0
        self._comp_of: dict[int, _Component] = {}

    # -- allocation ------------------------------------------------------

    def alloc_qubit(self, bit: int) -> int:
        """Allocate a fresh qubit in the basis state |bit>."""
        if bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {bit!r}")
        q = self._new_id()
        amps = [1 + 0j, 0j] if bit == 0 else [0j, 1 + 0j]
        self._comp_of[q] = _Component([q], amps)
        return q

    def prepare_bell(self, bs: BellState) -> tuple[int, int]:
        """Allocate a fresh pair of qubits in the given Bell state."""
        qa = self._new_id()
        qb = self._new_id()
        amps = [complex(a) for a in BELL_AMPLITUDES[bs]]
        comp = _Component([qa, qb], amps)
        self._comp_of[qa] = comp
        self._comp_of[qb] = comp
        return qa, qb

    # -- measurement -----------------------------------------------------

    def z_probabilities(self, q: int) -> tuple[float, float]:
        """Outcome probabilities of a Z-basis measurement, without measuring."""
        comp = self._component(q)
        k = len(comp.qubits)
        shift = k - 1 - comp.qubits.index(q)
        p0 = 0.0
        for i, a in enumerate(comp.amps):
            if not (i >> shift) & 1:
                p0 += (a.real * a.real + a.imag * a.imag)
        return p0, 1.0 - p0

    def measure_z(self, q: int) -> int:
        """Measure one qubit in the computational basis with Born-rule collapse.

        The measured qubit splits into its own single-qubit component; any
        remaining entangled partners are renormalized.
        """
        comp = self._component(q)
        k = len(comp.qubits)
        pos = comp.qubits.index(q)
        shift = k - 1 - pos
        p0 = 0.0
        for i, a in enumerate(comp.amps):
            if not (i >> shift) & 1:
                p0 += (a.real * a.real + a.imag * a.imag)
        outcome = 0 if self.rng.random() < p0 else 1

        basis = [1 + 0j, 0j] if outcome == 0 else [0j, 1 + 0j]
        if k == 1:
            comp.amps = basis
            return outcome

        # Project the remaining qubits and renormalize.
        prob = p0 if outcome == 0 else 1.0 - p0
        norm = sqrt(prob)
        low_mask = (1 << shift) - 1
        rest = [0j] * (1 << (k - 1))
        for i, a in enumerate(comp.amps):
            if ((i >> shift) & 1) == outcome:
                rest[((i >> (shift + 1)) << shift) | (i & low_mask)] = a / norm
        rest_qubits = [x for x in comp.qubits if x != q]
        self._install(_Component(rest_qubits, rest))
        self._install(_Component([q], basis))
        return outcome

    def bell_probabilities(self, qa: int, qb: int) -> dict[BellState, float]:
        """Outcome probabilities of a joint Bell measurement, without measuring."""
        _, _, branches = self._pair_branches(qa, qb)
        return {bs: p for bs, p, _ in branches}

    def bell_measure(self, qa: int, qb: int) -> BellState:
        """Jointly measure two qubits in the Bell basis with collapse.

        Qubits from different components are first merged by tensor product
        in (qa, qb, spectators) order, spectators sorted by qubit id. The
        measured pair becomes its own two-qubit component.
        """
        order, spectators, branches = self._pair_branches(qa, qb)
        u = self.rng.random()
        acc = 0.0
        outcome, vec = branches[-1][0], branches[-1][2]
        for bs, p, v in branches:
            acc += p
            if u < acc:
                outcome, vec = bs, v
                break

        pair = _Component([qa, qb], [complex(a) for a in BELL_AMPLITUDES[outcome]])
        self._install(pair)
        if spectators:
            prob = sum(v.real * v.real + v.imag * v.imag for v in vec)
            norm = sqrt(prob)
            self._install(_Component(spectators, [v / norm for v in vec]))
        return outcome

    # -- unitaries -------------------------------------------------------

    def apply_pauli(self, q: int, op: Pauli) -> None:
        """Apply a single-qubit Pauli-type unitary in place."""
        m00, m01, m10, m11 = _PAULI_MATRIX[op]
        comp = self._component(q)
        k = len(comp.qubits)
        shift = k - 1 - comp.qubits.index(q)
        bit = 1 << shift
        amps = comp.amps
        for i0 in range(len(amps)):
            if i0 & bit:
                continue
            i1 = i0 | bit
            a0, a1 = amps[i0], amps[i1]
            amps[i0] = m00 * a0 + m01 * a1
            amps[i1] = m10 * a0 + m11 * a1

    # -- introspection ---------------------------------------------------

    def component_snapshot(self, q: int) -> tuple[tuple[int, ...], tuple[complex, ...]]:
        """Read-only copy of the component containing q."""
        comp = self._component(q)
        return tuple(comp.qubits), tuple(comp.amps)

    def live_qubits(self) -> list[int]:
        return sorted(self._comp_of)

    # -- internals -------------------------------------------------------

    def _new_id(self) -> int:
        q = self._next_id
        self._next_id += 1
        return q

    def _component(self, q: int) -> _Component:
        try:
            return self._comp_of[q]
        except KeyError:
            raise ValueError(f"unknown qubit id {q!r}") from None

    def _install(self, comp: _Component) -> None:
        total = sum(a.real * a.real + a.imag * a.imag for a in comp.amps)
        if abs(total - 1.0) > NORM_ATOL:
            raise AssertionError(f"component norm drifted: {total!r}")
        for q in comp.qubits:
            self._comp_of[q] = comp

    def _pair_branches(self, qa: int, qb: int):
        if qa == qb:
            raise ValueError("bell measurement needs two distinct qubits")
        ca = self._component(qa)
        cb = self._component(qb)
        if ca is cb:
            qubits = list(ca.qubits)
            amps = list(ca.amps)
        else:
            qubits = list(ca.qubits) + list(cb.qubits)
            amps = [x * y for x in ca.amps for y in cb.amps]
        spectators = sorted(q for q in qubits if q != qa and q != qb)
        order = [qa, qb] + spectators
        amps = _reorder(qubits, amps, order)
        ns = 1 << (len(order) - 2)
        branches = []
        for bs in BELL_ORDER:
            t = BELL_AMPLITUDES[bs]
            vec = [
                t[0] * amps[s]
                + t[1] * amps[ns + s]
                + t[2] * amps[2 * ns + s]
                + t[3] * amps[3 * ns + s]
                for s in range(ns)
            ]
            p = sum(v.real * v.real + v.imag * v.imag for v in vec)
            branches.append((bs, p, vec))
        return order, spectators, branches


def states_equal(a, b, atol: float = NORM_ATOL) -> bool:
    """Amplitude-vector equality up to a global phase."""
    if len(a) != len(b):
        return False
    pivot = max(range(len(a)), key=lambda i: abs(a[i]))
    if abs(a[pivot]) < atol and max(abs(x) for x in b) < atol:
        return True
    if abs(b[pivot]) < atol:
        return False
    phase = a[pivot] / b[pivot]
    if abs(abs(phase) - 1.0) > 1e-6:
        return False
    return all(abs(x - phase * y) <= atol * 10 for x, y in zip(a, b))
