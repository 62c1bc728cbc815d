"""Pluggable attack strategies as tamper hooks on the qubit channels.

A strategy sees only the register and the qubit sequences in flight; it has
no access to key material or to either party's private records. Strategies
that set `bypasses_bob` capture the forward sequence and answer Alice
directly, so Bob never runs.
"""

from __future__ import annotations

from random import Random

from .keys import interleave
from .qsim import BellState, Pauli, QuantumRegister


class AttackStrategy:
    """Identity tamper hooks; base class and the honest-channel baseline."""

    name = "no_attack"
    bypasses_bob = False

    def tamper_forward(self, register: QuantumRegister, qubits):
        return qubits

    def tamper_backward(self, register: QuantumRegister, qubits):
        return qubits

    def params(self) -> dict:
        return {}


def no_attack() -> AttackStrategy:
    return AttackStrategy()


class ImpersonateAlice(AttackStrategy):
    """Eve discards the transmitted sequence and substitutes her own forgery.

    Her strongest keyless mimicry of the sender: fresh Bell pairs drawn from
    the protocol alphabet, interleaved by a random balanced string.
    """

    name = "impersonate_alice"

    def __init__(self, rng: Random):
        self.rng = rng

    def tamper_forward(self, register, qubits):
        n = len(qubits)
        fake_s = []
        for _ in range(n // 4):
            state = BellState.PHI_PLUS if self.rng.random() < 0.5 else BellState.PSI_MINUS
            q1, q2 = register.prepare_bell(state)
            fake_s.extend((q1, q2))
        fake_cb = []
        for _ in range(n // 2):
            state = BellState.PHI_PLUS if self.rng.random() < 0.5 else BellState.PSI_MINUS
            q1, _ = register.prepare_bell(state)  # Eve keeps the partner
            fake_cb.append(q1)
        guess = [0] * (n // 2) + [1] * (n // 2)
        self.rng.shuffle(guess)
        return interleave(fake_s, fake_cb, guess)


class ImpersonateBobIdealized(AttackStrategy):
    """Idealized receiver impersonation with per-slot pass probability 5/8.

    Each returned position independently keeps the genuine qubit with
    probability 1/2; otherwise Eve substitutes a fresh qubit of her own in a
    random basis state. A substituted qubit is uncorrelated with the retained
    partner, so the verifier's Bell outcome is uniform and matches with
    probability exactly 1/4, giving 1/2 + 1/2 * 1/4 = 5/8 per slot.
    """

    name = "impersonate_bob"

    def __init__(self, rng: Random):
        self.rng = rng

    def tamper_backward(self, register, qubits):
        out = []
        for q in qubits:
            if self.rng.random() < 0.5:
                out.append(q)
            else:
                out.append(register.alloc_qubit(self.rng.randrange(2)))
        return out

    def params(self):
        return {"mode": "idealized"}


class ImpersonateBobConcrete(AttackStrategy):
    """Receiver impersonation by blind guessing: Eve captures the whole
    forward sequence and answers with a uniformly random half-size subset in
    uniformly random order."""

    name = "impersonate_bob"
    bypasses_bob = True

    def __init__(self, rng: Random):
        self.rng = rng
        self._captured = []

    def tamper_forward(self, register, qubits):
        self._captured = list(qubits)
        return qubits

    def tamper_backward(self, register, qubits):
        return self.rng.sample(self._captured, len(self._captured) // 2)

    def params(self):
        return {"mode": "concrete"}


class InterceptResend(AttackStrategy):
    """Eve Z-measures every forward qubit and forwards fresh qubits prepared
    in the observed basis states."""

    name = "intercept_resend"

    def __init__(self):
        self.observed: list[int] = []

    def tamper_forward(self, register, qubits):
        self.observed = [register.measure_z(q) for q in qubits]
        return [register.alloc_qubit(b) for b in self.observed]


class ModifySingleQubit(AttackStrategy):
    """Apply the sign-flipping unitary (|0> -> -|1>, |1> -> |0>) to exactly
    one forward qubit, swapping Phi+ and Psi- on the pair it belongs to."""

    name = "modify_single"

    def __init__(self, target: int):
        if target < 0:
            raise ValueError("target index must be non-negative")
        self.target = target

    def tamper_forward(self, register, qubits):
        if self.target >= len(qubits):
            raise ValueError(f"target {self.target} out of range for {len(qubits)} qubits")
        register.apply_pauli(qubits[self.target], Pauli.IY)
        return qubits

    def params(self):
        return {"target": self.target}


class ReflectAll(AttackStrategy):
    """Eve captures the forward sequence, bypasses Bob, and returns every
    qubit untouched in transmitted order (measure-resend variant only)."""

    name = "reflect_all"
    bypasses_bob = True

    def __init__(self):
        self._captured = []

    def tamper_forward(self, register, qubits):
        self._captured = list(qubits)
        return qubits

    def tamper_backward(self, register, qubits):
        return list(self._captured)


def impersonate_alice(rng: Random) -> ImpersonateAlice:
    return ImpersonateAlice(rng)


def impersonate_bob(mode: str, rng: Random) -> AttackStrategy:
    if mode == "idealized":
        return ImpersonateBobIdealized(rng)
    if mode == "concrete":
        return ImpersonateBobConcrete(rng)
    raise ValueError(f"unknown impersonate_bob mode {mode!r}")


def intercept_resend() -> InterceptResend:
    return InterceptResend()


def modify_single(target: int) -> ModifySingleQubit:
    return ModifySingleQubit(target)


def reflect_all() -> ReflectAll:
    return ReflectAll()
