"""Descriptor evolution: per-qubit Heisenberg triples under a gate network.

Each qubit i carries a triple ``q_{i,x}, q_{i,y}, q_{i,z}`` of Pauli
sums; at time t these equal ``U(t)^dag sigma U(t)`` with
``U(t) = g_t ... g_2 g_1`` (circuit order).  The update rule follows
from the homomorphism property of conjugation:

    q_{j,m}(t+1) = sum_Q  w_Q * (product of time-t components named by Q)

where ``g^dag sigma_m g = sum_Q w_Q Q`` is the *bare* rewrite of the
arriving gate over local strings Q on the gate's support.  Only the
gate's own qubits' descriptors change; components of every other qubit
are reused untouched, which is what makes a descriptor depend solely on
its past interaction cone.

Two interchangeable backends:

* ``pauli`` (default): the rewrite tables above, exact for Clifford
  gates (single signed strings stay single signed strings).
* ``dense``: folds embedded gate unitaries into a full matrix U and
  reads descriptors as ``decompose(U^dag sigma U)``; ground truth for
  small n.

The dense backend shares no rewrite logic with the pauli backend, and
neither shares gate-application code with the state-vector simulator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .circuit import BoundCircuit, BoundGate, is_unitary
from .config import DENSE_QUBITS, MAX_NETWORK_QUBITS
from .errors import BudgetError, InvariantError
from .pauli import (
    SIGMA,
    PauliString,
    PauliSum,
    commutator,
    decompose,
    sum_add,
    sum_mul,
    sum_scale,
)

_SNAP_TARGETS = (0.0, 1.0, -1.0, 0.5, -0.5, math.sqrt(0.5), -math.sqrt(0.5))
_SNAP_EPS = 1e-12
_TABLE_ATOL = 1e-12


@dataclass(frozen=True)
class Descriptor:
    """The Heisenberg triple attached to one qubit."""

    qubit: int
    x: PauliSum
    y: PauliSum
    z: PauliSum

    def component(self, m: int) -> PauliSum:
        if m == 1:
            return self.x
        if m == 2:
            return self.y
        if m == 3:
            return self.z
        raise ValueError(f"component index must be 1..3, got {m}")

    @property
    def components(self) -> tuple[PauliSum, PauliSum, PauliSum]:
        return (self.x, self.y, self.z)

    def to_json(self) -> dict:
        return {
            "qubit": self.qubit,
            "x": self.x.to_json(),
            "y": self.y.to_json(),
            "z": self.z.to_json(),
        }


@dataclass(frozen=True)
class NetworkState:
    """All n descriptor triples after `step` gates."""

    n: int
    step: int
    descriptors: tuple[Descriptor, ...]
    history: tuple[BoundGate, ...] = ()

    def descriptor(self, qubit: int) -> Descriptor:
        if not 1 <= qubit <= self.n:
            raise ValueError(f"qubit {qubit} outside 1..{self.n}")
        return self.descriptors[qubit - 1]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "step": self.step,
            "history": [
                {"kind": g.kind, "qubits": list(g.qubits)} for g in self.history
            ],
            "descriptors": [d.to_json() for d in self.descriptors],
        }


def single_string_sum(n: int, qubit: int, m: int) -> PauliSum:
    letters = [0] * n
    letters[qubit - 1] = m
    return PauliSum.from_string(PauliString.from_letters(letters))


def init_network(n: int, *, max_qubits: Optional[int] = None) -> NetworkState:
    """Fresh network: each component is one unnormalized string of weight 1."""
    limit = MAX_NETWORK_QUBITS if max_qubits is None else max_qubits
    if n < 1:
        raise ValueError("need at least one qubit")
    if n > limit:
        raise BudgetError(f"network of {n} qubits exceeds the maximum of {limit}")
    descriptors = tuple(
        Descriptor(
            q,
            single_string_sum(n, q, 1),
            single_string_sum(n, q, 2),
            single_string_sum(n, q, 3),
        )
        for q in range(1, n + 1)
    )
    return NetworkState(n, 0, descriptors)


# -- rewrite tables ------------------------------------------------------------


@dataclass(frozen=True)
class RewriteTable:
    """Images of bare local strings under V^dag (.) V for one gate.

    `entries` maps a local letter tuple (length 1 or 2, letters 0..3,
    not all identity) to a tuple of ``(real weight, local letters)``
    terms.  Images are traceless and carry real weights because the
    conjugate of a Hermitian traceless operator is Hermitian traceless.
    """

    arity: int
    entries: dict

    def image(self, letters: tuple[int, ...]):
        return self.entries[letters]


def _snap(value: float) -> float:
    for target in _SNAP_TARGETS:
        if abs(value - target) < _SNAP_EPS:
            return target
    return value


def _local_letter_tuples(arity: int):
    if arity == 1:
        return [(m,) for m in range(4)]
    return [(a, b) for a in range(4) for b in range(4)]


def _local_dense(letters: tuple[int, ...]) -> np.ndarray:
    out = SIGMA[letters[0]]
    for m in letters[1:]:
        out = np.kron(out, SIGMA[m])
    return out


def build_rewrite_table(gate_or_matrix, qubits: Optional[Sequence[int]] = None) -> RewriteTable:
    """Tabulate V^dag P V over the local string basis, then snap weights.

    Accepts a `BoundGate` or a raw unitary plus its qubit list.  Raises
    if the matrix is not unitary or if the tabulated map fails to
    reproduce dense conjugation to 1e-12.
    """
    if isinstance(gate_or_matrix, BoundGate):
        matrix = np.asarray(gate_or_matrix.matrix)
        arity = len(gate_or_matrix.qubits)
    else:
        matrix = np.asarray(gate_or_matrix, dtype=complex)
        arity = len(tuple(qubits))
    if matrix.shape != (2**arity, 2**arity) or not is_unitary(matrix, 1e-10):
        raise ValueError("gate matrix is not unitary")
    dim = 2**arity
    entries = {}
    for letters in _local_letter_tuples(arity):
        if all(m == 0 for m in letters):
            continue
        image = matrix.conj().T @ _local_dense(letters) @ matrix
        raw = []
        for out_letters in _local_letter_tuples(arity):
            coeff = np.trace(image @ _local_dense(out_letters)) / dim
            if abs(coeff.imag) > _TABLE_ATOL:
                raise InvariantError("non-real weight in a conjugation table")
            raw.append((float(coeff.real), out_letters))
        # Verify the exact (unsnapped) expansion reproduces the dense
        # conjugation; only then snap the stored weights, which moves
        # each by less than the snap window by construction.
        rebuilt = sum(w * _local_dense(ls) for w, ls in raw)
        if np.max(np.abs(rebuilt - image)) > _TABLE_ATOL:
            raise InvariantError("tabulated conjugation does not match the dense image")
        terms = []
        for value, out_letters in raw:
            weight = _snap(value)
            if weight == 0.0:
                continue
            if all(m == 0 for m in out_letters):
                raise InvariantError("conjugation image acquired an identity part")
            terms.append((weight, out_letters))
        entries[letters] = tuple(terms)
    return RewriteTable(arity, entries)


_TABLE_CACHE: dict = {}


def _cached_table(gate: BoundGate) -> RewriteTable:
    key = (len(gate.qubits), gate.matrix.tobytes())
    table = _TABLE_CACHE.get(key)
    if table is None:
        table = build_rewrite_table(gate.matrix, gate.qubits)
        if len(_TABLE_CACHE) > 4096:
            _TABLE_CACHE.clear()
        _TABLE_CACHE[key] = table
    return table


# -- gate application (pauli backend) -------------------------------------------


def apply_gate(state: NetworkState, gate: BoundGate) -> NetworkState:
    """Advance the network by one gate.

    Only the descriptors of the gate's own qubits are recomputed; every
    other triple is carried over unchanged (contiguity).
    """
    for q in gate.qubits:
        if not 1 <= q <= state.n:
            raise ValueError(f"gate qubit {q} outside 1..{state.n}")
    table = _cached_table(gate)
    descriptors = list(state.descriptors)
    if len(gate.qubits) == 1:
        (j,) = gate.qubits
        old = state.descriptor(j)
        new = [PauliSum.zero(state.n)] * 3
        for m in (1, 2, 3):
            acc = PauliSum.zero(state.n)
            for weight, (a,) in table.image((m,)):
                acc = sum_add(acc, sum_scale(old.component(a), weight))
            new[m - 1] = acc
        descriptors[j - 1] = Descriptor(j, *new)
    else:
        j, k = gate.qubits
        dj, dk = state.descriptor(j), state.descriptor(k)
        products: dict = {}

        def evolved_local(a: int, b: int) -> PauliSum:
            got = products.get((a, b))
            if got is None:
                if a == 0 and b == 0:
                    got = PauliSum.identity(state.n)
                elif b == 0:
                    got = dj.component(a)
                elif a == 0:
                    got = dk.component(b)
                else:
                    got = sum_mul(dj.component(a), dk.component(b))
                products[(a, b)] = got
            return got

        def rebuild(local: tuple[int, int]) -> PauliSum:
            acc = PauliSum.zero(state.n)
            for weight, (c, d) in table.image(local):
                acc = sum_add(acc, sum_scale(evolved_local(c, d), weight))
            return acc

        descriptors[j - 1] = Descriptor(j, *(rebuild((m, 0)) for m in (1, 2, 3)))
        descriptors[k - 1] = Descriptor(k, *(rebuild((0, m)) for m in (1, 2, 3)))
    return NetworkState(
        state.n, state.step + 1, tuple(descriptors), state.history + (gate,)
    )


# -- outer conjugation of arbitrary sums ------------------------------------------


def conjugate_sum(s: PauliSum, gate_or_matrix, qubits: Optional[Sequence[int]] = None) -> PauliSum:
    """Return V^dag s V for a gate acting on the given qubits.

    Rewrites the support letters of every term through the gate's
    table; terms that are identity on the support pass through.
    """
    if isinstance(gate_or_matrix, BoundGate):
        table = _cached_table(gate_or_matrix)
        support = gate_or_matrix.qubits
    else:
        support = tuple(qubits)
        table = build_rewrite_table(gate_or_matrix, support)
    keys, coeffs = [], []
    for label, coeff in s.terms().items():
        string = PauliString.from_label(label)
        local = tuple(string.letter(q) for q in support)
        if all(m == 0 for m in local):
            keys.append(string.key)
            coeffs.append(coeff)
            continue
        base_letters = list(string.letters)
        for weight, out_letters in table.image(local):
            letters = base_letters.copy()
            for q, m in zip(support, out_letters):
                letters[q - 1] = m
            keys.append(PauliString.from_letters(letters).key)
            coeffs.append(weight * coeff)
    return PauliSum(s.n, keys, coeffs)


def evolve_observable(
    bc: BoundCircuit, observable: PauliSum, upto: Union[int, str, None] = None
) -> PauliSum:
    """Heisenberg image U(t)^dag A U(t) of an arbitrary Pauli sum.

    The innermost conjugation belongs to the last gate, so the fold
    runs over the prefix in reverse order.
    """
    if observable.n != bc.n:
        raise ValueError("observable size does not match circuit")
    out = observable
    for gate in reversed(bc.prefix(upto)):
        out = conjugate_sum(out, gate)
    return out


# -- dense backend -----------------------------------------------------------------


def embed_unitary(u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Kron the gate with identity, then permute tensor axes into place.

    The first listed gate qubit is the most significant local bit; the
    global basis is little-endian in the qubit index.
    """
    qubits = tuple(qubits)
    k = len(qubits)
    rest = [q for q in range(n, 0, -1) if q not in qubits]
    full = np.kron(np.asarray(u, dtype=complex), np.eye(2 ** (n - k)))
    # Row axes of `full`, most significant first: gate qubits in listed
    # order, then the remaining qubits descending.
    source_order = list(qubits) + rest
    target_order = list(range(n, 0, -1))
    perm = [source_order.index(q) for q in target_order]
    tensor = full.reshape([2] * (2 * n))
    tensor = tensor.transpose(perm + [p + n for p in perm])
    return tensor.reshape(2**n, 2**n)


def fold_unitary(bc: BoundCircuit, upto: Union[int, str, None] = None) -> np.ndarray:
    """Product of embedded gate unitaries in circuit order: U = g_t ... g_1."""
    if bc.n > DENSE_QUBITS:
        raise BudgetError(
            f"dense evolution of {bc.n} qubits exceeds the budget of {DENSE_QUBITS}"
        )
    u = np.eye(2**bc.n, dtype=complex)
    for gate in bc.prefix(upto):
        u = embed_unitary(gate.matrix, gate.qubits, bc.n) @ u
    return u


def _dense_network(bc: BoundCircuit, upto) -> NetworkState:
    gates = bc.prefix(upto)
    u = fold_unitary(bc, upto)
    udag = u.conj().T
    n = bc.n
    descriptors = []
    for q in range(1, n + 1):
        comps = []
        for m in (1, 2, 3):
            bare = _string_dense_embedded(n, q, m)
            comps.append(decompose(udag @ bare @ u))
        descriptors.append(Descriptor(q, *comps))
    return NetworkState(n, len(gates), tuple(descriptors), tuple(gates))


def _string_dense_embedded(n: int, qubit: int, m: int) -> np.ndarray:
    return embed_unitary(SIGMA[m], (qubit,), n) if m != 0 else np.eye(2**n)


BACKENDS = ("pauli", "dense")


def evolve(
    bc: BoundCircuit,
    backend: str = "pauli",
    upto: Union[int, str, None] = None,
    *,
    max_qubits: Optional[int] = None,
) -> NetworkState:
    """Fold the circuit's gates over a fresh network."""
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "dense":
        return _dense_network(bc, upto)
    state = init_network(bc.n, max_qubits=max_qubits)
    for gate in bc.prefix(upto):
        state = apply_gate(state, gate)
    return state


# -- products of components ------------------------------------------------------


def gamma_product(state: NetworkState, selection: Sequence[int]) -> PauliSum:
    """Ordered product of selected components scaled by 2**(-n/2).

    ``selection[i]`` chooses the component of qubit i+1 (0 means the
    identity factor).  At step 0 this reproduces the orthonormal basis
    operators; after evolution it is their Heisenberg image.
    """
    if len(selection) != state.n:
        raise ValueError(f"selection needs {state.n} entries")
    acc = PauliSum.identity(state.n)
    for qubit, m in enumerate(selection, start=1):
        if m == 0:
            continue
        if m not in (1, 2, 3):
            raise ValueError(f"selection entries must be 0..3, got {m}")
        acc = sum_mul(acc, state.descriptor(qubit).component(m))
    return sum_scale(acc, 2 ** (-state.n / 2))


def component_product(state: NetworkState, selection: dict) -> PauliSum:
    """Product over ``{qubit: m}`` entries (m in 1..3), unscaled."""
    acc = PauliSum.identity(state.n)
    for qubit in sorted(selection):
        m = selection[qubit]
        if m == 0:
            continue
        acc = sum_mul(acc, state.descriptor(qubit).component(m))
    return acc


# -- consistency checks -----------------------------------------------------------


def algebra_deviation(state: NetworkState) -> dict[str, float]:
    """Largest violation of the per-qubit Pauli algebra and cross-qubit
    commutation, measured in the coefficient 2-norm."""
    worst = {"triple": 0.0, "square": 0.0, "cross": 0.0, "identity": 0.0}
    identity = PauliSum.identity(state.n)
    for d in state.descriptors:
        for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
            lhs = sum_mul(d.component(a), d.component(b))
            rhs = sum_scale(d.component(c), 1j)
            worst["triple"] = max(worst["triple"], (lhs - rhs).coeff_norm())
        for m in (1, 2, 3):
            sq = sum_mul(d.component(m), d.component(m))
            worst["square"] = max(worst["square"], (sq - identity).coeff_norm())
            worst["identity"] = max(
                worst["identity"], abs(d.component(m).identity_coeff())
            )
    for i in range(len(state.descriptors)):
        for j in range(i + 1, len(state.descriptors)):
            for a in (1, 2, 3):
                for b in (1, 2, 3):
                    comm = commutator(
                        state.descriptors[i].component(a),
                        state.descriptors[j].component(b),
                    )
                    worst["cross"] = max(worst["cross"], comm.coeff_norm())
    return worst
