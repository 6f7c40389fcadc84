"""Shared test utilities: an independent unitary-embedding oracle and a
deterministic random-circuit generator for cross-validation corpora."""
import numpy as np

from dhsim.circuit import Circuit, Gate, ParamRef

CORPUS_GATESET = ("H", "S", "X", "Y", "Z", "CNOT", "CZ", "RY", "RZ", "PHASE")


def embed(u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Embed a gate unitary into the full space by explicit index loops.

    Little-endian qubit order; the first listed qubit is the high local
    bit.  Intentionally naive and independent of any package helper.
    """
    dim = 2**n
    k = len(qubits)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        loc = 0
        for q in qubits:
            loc = (loc << 1) | ((col >> (q - 1)) & 1)
        for loc_out in range(2**k):
            row = col
            for j, q in enumerate(qubits):
                bit = (loc_out >> (k - 1 - j)) & 1
                row = (row & ~(1 << (q - 1))) | (bit << (q - 1))
            full[row, col] += u[loc_out, loc]
    return full


def circuit_unitary(bound_circuit, upto=None) -> np.ndarray:
    """Full unitary of a bound circuit via the naive embedding above."""
    n = bound_circuit.n
    u = np.eye(2**n, dtype=complex)
    for gate in bound_circuit.prefix(upto):
        u = embed(gate.matrix, gate.qubits, n) @ u
    return u


def random_circuit(
    rng,
    n=None,
    depth=None,
    *,
    two_qubit_prob=0.35,
    symbol_prob=0.2,
    clifford_only=False,
):
    """A random circuit over the standard gate set, plus a full binding.

    Rotation angles are mostly inlined constants; with `symbol_prob`
    a rotation instead declares a fresh symbol (bound in the returned
    mapping), so dependence audits have something to scan.
    """
    n = int(rng.integers(2, 6)) if n is None else n
    depth = int(rng.integers(8, 26)) if depth is None else depth
    gates, params, binding = [], [], {}
    cliffords_1q = ["H", "S", "X", "Y", "Z"]
    rotations = ["RY", "RZ", "PHASE"]
    for _ in range(depth):
        if n >= 2 and rng.random() < two_qubit_prob:
            kind = "CNOT" if rng.random() < 0.5 else "CZ"
            qa, qb = rng.choice(np.arange(1, n + 1), size=2, replace=False)
            gates.append(Gate(kind, (int(qa), int(qb))))
            continue
        q = int(rng.integers(1, n + 1))
        if clifford_only or rng.random() < 0.5:
            gates.append(Gate(cliffords_1q[rng.integers(len(cliffords_1q))], (q,)))
        else:
            kind = rotations[rng.integers(len(rotations))]
            if rng.random() < symbol_prob:
                sym = f"th{len(params)}"
                params.append(sym)
                binding[sym] = float(rng.uniform(0.0, 2.0 * np.pi))
                gates.append(Gate(kind, (q,), param=ParamRef(sym)))
            else:
                gates.append(Gate(kind, (q,), param=float(rng.uniform(0.0, 2.0 * np.pi))))
    return Circuit(n, tuple(gates), tuple(params)), binding
