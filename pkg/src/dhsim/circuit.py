"""Gate networks with symbolic parameters, plus the ``.dh`` text format.

Conventions, stated once:

* Qubits are numbered 1..n, as in circuit diagrams.
* One gate per time step; sequence position is temporal order.
* ``PHASE(a) = diag(1, exp(ia))``; ``RX/RY/RZ(t) = exp(-i t sigma / 2)``.
* For two-qubit gates the first listed qubit is the more significant bit
  of the 4x4 matrix index (CNOT's control is its first qubit).
* A parameter reference in a gate is ``scale * symbol``; the text forms
  are ``theta``, ``-theta`` and ``2*theta``.  A numeric literal such as
  ``RY(0.5)`` is a constant angle and involves no symbol.

The text grammar is one statement per line, ``#`` starts a comment:

    qubits <n>
    param <symbol>
    <GATE> <q> [<q2>]
    <GATE>(<angle-or-symbol>) <q>
    U1(<4 complex entries>) <q>
    U2(<16 complex entries>) <q> <q2>

Builders for the protocol circuits live here as well; they attach named
checkpoints (gate counts) used by staged analyses.  Checkpoints are
annotations only: they are not serialized and do not affect equality.
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import BindingError, ParseError

SQRT1_2 = 1.0 / math.sqrt(2.0)

FIXED_1Q = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}
FIXED_2Q = {
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}
PARAMETRIC = {"PHASE", "RX", "RY", "RZ"}
MATRIX_KINDS = {"U1": 1, "U2": 2}

for _m in (*FIXED_1Q.values(), *FIXED_2Q.values()):
    _m.setflags(write=False)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.diag([cmath.exp(-0.5j * angle), cmath.exp(0.5j * angle)])
    if kind == "PHASE":
        return np.diag([1.0, cmath.exp(1j * angle)])
    raise ValueError(f"not a rotation kind: {kind}")


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


@dataclass(frozen=True)
class ParamRef:
    """A reference ``scale * symbol`` to a declared parameter."""

    name: str
    scale: float = 1.0

    def resolve(self, binding: Mapping[str, float]) -> float:
        if self.name not in binding:
            raise BindingError(f"no value bound for symbol {self.name!r}")
        return self.scale * float(binding[self.name])

    def render(self) -> str:
        if self.scale == 1.0:
            return self.name
        if self.scale == -1.0:
            return f"-{self.name}"
        return f"{self.scale!r}*{self.name}"


ParamLike = Union[ParamRef, float, None]


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate application: kind, target qubits, optional angle or matrix."""

    kind: str
    qubits: tuple[int, ...]
    param: ParamLike = None
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind in FIXED_1Q:
            arity, wants_param, wants_matrix = 1, False, False
        elif self.kind in FIXED_2Q:
            arity, wants_param, wants_matrix = 2, False, False
        elif self.kind in PARAMETRIC:
            arity, wants_param, wants_matrix = 1, True, False
        elif self.kind in MATRIX_KINDS:
            arity, wants_param, wants_matrix = MATRIX_KINDS[self.kind], False, True
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"duplicate qubit in {self.kind} {self.qubits}")
        if any(q < 1 for q in self.qubits):
            raise ValueError("qubit indices are 1-based")
        if wants_param:
            if not isinstance(self.param, (ParamRef, float, int)):
                raise ValueError(f"{self.kind} needs an angle or symbol reference")
            if isinstance(self.param, (float, int)):
                object.__setattr__(self, "param", float(self.param))
        elif self.param is not None:
            raise ValueError(f"{self.kind} takes no parameter")
        if wants_matrix:
            m = np.array(self.matrix, dtype=complex)
            if m.shape != (2**arity, 2**arity) or not is_unitary(m):
                raise ValueError(f"{self.kind} needs a unitary {2**arity}x{2**arity} matrix")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} takes no matrix")

    @property
    def symbol(self) -> Optional[str]:
        return self.param.name if isinstance(self.param, ParamRef) else None

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.kind, self.qubits, self.param) != (other.kind, other.qubits, other.param):
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is None and other.matrix is None
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.kind, self.qubits, self.param))

    def __repr__(self):
        extra = ""
        if isinstance(self.param, ParamRef):
            extra = f"({self.param.render()})"
        elif isinstance(self.param, float):
            extra = f"({self.param:g})"
        return f"{self.kind}{extra} {' '.join(map(str, self.qubits))}"


@dataclass(frozen=True, eq=False)
class Circuit:
    """An ordered gate sequence on n qubits with declared symbols."""

    n: int
    gates: tuple[Gate, ...] = ()
    params: tuple[str, ...] = ()
    checkpoints: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "params", tuple(self.params))
        if self.n < 1:
            raise ValueError("need at least one qubit")
        declared = set(self.params)
        if len(declared) != len(self.params):
            raise ValueError("duplicate parameter declaration")
        for g in self.gates:
            if max(g.qubits) > self.n:
                raise ValueError(f"gate {g!r} addresses qubit > n={self.n}")
            if g.symbol is not None and g.symbol not in declared:
                raise ValueError(f"undeclared symbol {g.symbol!r} in {g!r}")
        for name, step in self.checkpoints.items():
            if not 0 <= step <= len(self.gates):
                raise ValueError(f"checkpoint {name!r} out of range")

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.n == other.n
            and self.gates == other.gates
            and self.params == other.params
        )

    def __hash__(self):
        return hash((self.n, self.gates, self.params))

    @property
    def depth(self) -> int:
        return len(self.gates)

    def resolve_step(self, at: Union[int, str, None]) -> int:
        """Map a checkpoint name / step index / None (= final) to a gate count."""
        if at is None or at == "final":
            return len(self.gates)
        if isinstance(at, str):
            if at in self.checkpoints:
                return self.checkpoints[at]
            raise KeyError(f"unknown checkpoint {at!r}")
        step = int(at)
        if not 0 <= step <= len(self.gates):
            raise ValueError(f"step {step} outside 0..{len(self.gates)}")
        return step


@dataclass(frozen=True)
class BoundGate:
    """A gate with its unitary fully resolved."""

    kind: str
    qubits: tuple[int, ...]
    matrix: np.ndarray
    symbol: Optional[str] = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.flags.writeable:
            m = m.copy()
            m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class BoundCircuit:
    """A circuit plus a complete parameter binding."""

    circuit: Circuit
    binding: dict
    gates: tuple[BoundGate, ...]

    @property
    def n(self) -> int:
        return self.circuit.n

    def prefix(self, upto: Union[int, str, None]) -> tuple[BoundGate, ...]:
        return self.gates[: self.circuit.resolve_step(upto)]


def gate_unitary(g: Gate, binding: Mapping[str, float]) -> np.ndarray:
    if g.kind in FIXED_1Q:
        return FIXED_1Q[g.kind]
    if g.kind in FIXED_2Q:
        return FIXED_2Q[g.kind]
    if g.kind in PARAMETRIC:
        angle = g.param.resolve(binding) if isinstance(g.param, ParamRef) else g.param
        return rotation_matrix(g.kind, angle)
    return g.matrix


def bind(c: Circuit, binding: Optional[Mapping[str, float]] = None) -> BoundCircuit:
    """Resolve every parametric gate to a concrete unitary."""
    binding = dict(binding or {})
    missing = [s for s in c.params if s not in binding]
    if missing:
        raise BindingError(f"missing binding for symbol(s): {', '.join(missing)}")
    for name, value in binding.items():
        if not math.isfinite(float(value)):
            raise BindingError(f"non-finite value for symbol {name!r}: {value}")
    bound = tuple(
        BoundGate(g.kind, g.qubits, gate_unitary(g, binding), g.symbol) for g in c.gates
    )
    return BoundCircuit(c, binding, bound)


# -- text format -------------------------------------------------------------


def _parse_complex(tok: str, lineno: int, col: int) -> complex:
    try:
        return complex(tok)
    except ValueError:
        raise ParseError(f"bad complex literal {tok!r}", lineno, col) from None


def _parse_param_arg(arg: str, params: set, lineno: int, col: int) -> ParamLike:
    arg = arg.strip()
    if "*" in arg:
        scale_str, _, name = arg.partition("*")
        name = name.strip()
        if not _IDENT.match(name):
            raise ParseError(f"bad symbol name {name!r}", lineno, col)
        try:
            scale = float(scale_str)
        except ValueError:
            raise ParseError(f"bad scale factor {scale_str!r}", lineno, col) from None
        if name not in params:
            raise ParseError(f"undeclared symbol {name}", lineno, col)
        return ParamRef(name, scale)
    if _IDENT.match(arg):
        if arg not in params:
            raise ParseError(f"undeclared symbol {arg}", lineno, col)
        return ParamRef(arg)
    if arg.startswith("-") and _IDENT.match(arg[1:]):
        name = arg[1:]
        if name not in params:
            raise ParseError(f"undeclared symbol {name}", lineno, col)
        return ParamRef(name, -1.0)
    try:
        return float(arg)
    except ValueError:
        raise ParseError(f"bad angle or symbol {arg!r}", lineno, col) from None


def _parse_qubits(tokens: Sequence[str], n: int, arity: int, lineno: int, cols) -> tuple:
    if len(tokens) != arity:
        raise ParseError(
            f"expected {arity} qubit index(es), got {len(tokens)}", lineno, cols[0]
        )
    out = []
    for tok, col in zip(tokens, cols):
        try:
            q = int(tok)
        except ValueError:
            raise ParseError(f"bad qubit index {tok!r}", lineno, col) from None
        if not 1 <= q <= n:
            raise ParseError(f"qubit {q} out of range 1..{n}", lineno, col)
        out.append(q)
    if len(set(out)) != len(out):
        raise ParseError(f"duplicate qubit in gate: {out}", lineno, cols[0])
    return tuple(out)


def parse(text: str) -> Circuit:
    """Parse the line-based circuit format; raises `ParseError` with location."""
    n = None
    params: list[str] = []
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        tokens = line.split()
        cols = []
        pos = 0
        for tok in tokens:
            pos = line.index(tok, pos)
            cols.append(pos + 1)
            pos += len(tok)
        head = tokens[0]
        if head == "qubits":
            if n is not None:
                raise ParseError("duplicate qubits declaration", lineno, cols[0])
            if len(tokens) != 2:
                raise ParseError("usage: qubits <n>", lineno, cols[0])
            try:
                n = int(tokens[1])
            except ValueError:
                raise ParseError(f"bad qubit count {tokens[1]!r}", lineno, cols[1]) from None
            if n < 1:
                raise ParseError("qubit count must be positive", lineno, cols[1])
            continue
        if n is None:
            raise ParseError("first statement must be 'qubits <n>'", lineno, cols[0])
        if head == "param":
            if len(tokens) != 2 or not _IDENT.match(tokens[1]):
                raise ParseError("usage: param <symbol>", lineno, cols[0])
            if tokens[1] in params:
                raise ParseError(f"duplicate param {tokens[1]}", lineno, cols[1])
            params.append(tokens[1])
            continue
        # gate statement
        m = re.match(r"([A-Za-z][A-Za-z0-9]*)(?:\((.*)\))?\Z", head)
        if not m:
            raise ParseError(f"bad gate token {head!r}", lineno, cols[0])
        kind, arg = m.group(1).upper(), m.group(2)
        qubit_tokens, qubit_cols = tokens[1:], cols[1:]
        if kind in FIXED_1Q or kind in FIXED_2Q:
            if arg is not None:
                raise ParseError(f"{kind} takes no argument", lineno, cols[0])
            arity = 1 if kind in FIXED_1Q else 2
            qubits = _parse_qubits(qubit_tokens, n, arity, lineno, qubit_cols or [cols[0]])
            gates.append(Gate(kind, qubits))
        elif kind in PARAMETRIC:
            if arg is None:
                raise ParseError(f"{kind} needs an angle or symbol", lineno, cols[0])
            param = _parse_param_arg(arg, set(params), lineno, cols[0])
            qubits = _parse_qubits(qubit_tokens, n, 1, lineno, qubit_cols or [cols[0]])
            gates.append(Gate(kind, qubits, param=param))
        elif kind in MATRIX_KINDS:
            arity = MATRIX_KINDS[kind]
            dim = 2**arity
            if arg is None:
                raise ParseError(f"{kind} needs {dim*dim} matrix entries", lineno, cols[0])
            entries = [
                _parse_complex(tok, lineno, cols[0]) for tok in arg.split(",")
            ]
            if len(entries) != dim * dim:
                raise ParseError(
                    f"{kind} needs {dim*dim} entries, got {len(entries)}", lineno, cols[0]
                )
            matrix = np.array(entries, dtype=complex).reshape(dim, dim)
            if not is_unitary(matrix):
                raise ParseError(f"{kind} matrix is not unitary", lineno, cols[0])
            qubits = _parse_qubits(qubit_tokens, n, arity, lineno, qubit_cols or [cols[0]])
            gates.append(Gate(kind, qubits, matrix=matrix))
        else:
            raise ParseError(f"unknown gate {head!r}", lineno, cols[0])
    if n is None:
        raise ParseError("missing 'qubits <n>' declaration", 1, 1)
    return Circuit(n, tuple(gates), tuple(params))


def _format_complex(c: complex) -> str:
    return repr(complex(c)).strip("()")


def serialize(c: Circuit) -> str:
    """Render a circuit so that ``parse(serialize(c)) == c``."""
    lines = [f"qubits {c.n}"]
    lines.extend(f"param {s}" for s in c.params)
    for g in c.gates:
        qubits = " ".join(str(q) for q in g.qubits)
        if g.kind in PARAMETRIC:
            arg = g.param.render() if isinstance(g.param, ParamRef) else repr(g.param)
            lines.append(f"{g.kind}({arg}) {qubits}")
        elif g.kind in MATRIX_KINDS:
            entries = ",".join(_format_complex(v) for v in g.matrix.ravel())
            lines.append(f"{g.kind}({entries}) {qubits}")
        else:
            lines.append(f"{g.kind} {qubits}")
    return "\n".join(lines) + "\n"


def circuit_to_json(c: Circuit) -> dict:
    gates = []
    for g in c.gates:
        entry: dict = {"kind": g.kind, "qubits": list(g.qubits)}
        if isinstance(g.param, ParamRef):
            entry["param"] = {"name": g.param.name, "scale": g.param.scale}
        elif isinstance(g.param, float):
            entry["param"] = g.param
        if g.matrix is not None:
            entry["matrix"] = [[float(v.real), float(v.imag)] for v in g.matrix.ravel()]
        gates.append(entry)
    return {"qubits": c.n, "params": list(c.params), "gates": gates}


def circuit_from_json(obj: dict) -> Circuit:
    gates = []
    for entry in obj["gates"]:
        param = entry.get("param")
        if isinstance(param, dict):
            param = ParamRef(param["name"], float(param["scale"]))
        matrix = entry.get("matrix")
        if matrix is not None:
            flat = np.array([complex(re_, im_) for re_, im_ in matrix])
            dim = int(math.isqrt(len(flat)))
            matrix = flat.reshape(dim, dim)
        gates.append(Gate(entry["kind"], tuple(entry["qubits"]), param, matrix))
    return Circuit(int(obj["qubits"]), tuple(gates), tuple(obj["params"]))


# -- protocol builders --------------------------------------------------------


def measurement_gadget(target: int, record: int, angle: ParamRef) -> list[Gate]:
    """Unitary, collapse-free record of the spin component at an angle in
    the x-z plane: rotate the axis onto z, copy the bit, rotate back."""
    back = ParamRef(angle.name, -angle.scale)
    return [
        Gate("RY", (target,), param=back),
        Gate("CNOT", (target, record)),
        Gate("RY", (target,), param=angle),
    ]


def build_bell_experiment() -> Circuit:
    """Entangled pair on (2, 3); records at angles theta, phi land on 1 and 4."""
    gates = [Gate("H", (2,)), Gate("CNOT", (2, 3))]
    gates += measurement_gadget(2, 1, ParamRef("theta"))
    gates += measurement_gadget(3, 4, ParamRef("phi"))
    return Circuit(
        4,
        tuple(gates),
        ("theta", "phi"),
        checkpoints={"prep": 2, "theta-recorded": 5, "final": 8},
    )


_SUPERDENSE_ENCODING = {(0, 0): None, (0, 1): "X", (1, 0): "Z", (1, 1): "Y"}


def build_superdense(b1: int, b2: int) -> Circuit:
    """Two classical bits through one qubit: encode on the shared pair,
    decode with CNOT then H; the outcome string equals (b1, b2)."""
    if b1 not in (0, 1) or b2 not in (0, 1):
        raise ValueError("bits must be 0 or 1")
    gates = [Gate("H", (1,)), Gate("CNOT", (1, 2))]
    encoding = _SUPERDENSE_ENCODING[(b1, b2)]
    if encoding is not None:
        gates.append(Gate(encoding, (1,)))
    gates += [Gate("CNOT", (1, 2)), Gate("H", (1,))]
    return Circuit(2, tuple(gates))


def _teleport_gates(resource_prep: list[Gate]) -> list[Gate]:
    return [
        Gate("RY", (1,), param=ParamRef("theta")),  # message state
        *resource_prep,                             # pair on (4, 5)
        Gate("CNOT", (1, 4)),                       # Bell measurement of (1, 4) ...
        Gate("H", (1,)),
        Gate("CNOT", (1, 2)),                       # ... recorded into (2, 3)
        Gate("CNOT", (4, 3)),
        Gate("CZ", (2, 5)),                         # corrections on 5
        Gate("CNOT", (3, 5)),
    ]


def build_teleportation() -> Circuit:
    """Five-qubit teleportation of RY(theta)|0> from qubit 1 to qubit 5.

    Record qubit 2 holds the phase bit (H side) and controls CZ; record
    qubit 3 holds the parity bit and controls CNOT.
    """
    gates = _teleport_gates([Gate("H", (4,)), Gate("CNOT", (4, 5))])
    return Circuit(
        5,
        tuple(gates),
        ("theta",),
        checkpoints={"prep": 3, "after-bell": 7, "final": 9},
    )


def build_partial_teleportation() -> Circuit:
    """Teleportation with a tunable resource cos(a)|00> + sin(a)|11>.

    At alpha = pi/4 this is `build_teleportation`; elsewhere the output
    fidelity drops below one for generic theta.
    """
    gates = _teleport_gates(
        [Gate("RY", (4,), param=ParamRef("alpha", 2.0)), Gate("CNOT", (4, 5))]
    )
    return Circuit(
        5,
        tuple(gates),
        ("theta", "alpha"),
        checkpoints={"prep": 3, "after-bell": 7, "final": 9},
    )


BUILTIN_CIRCUITS = {
    "bell": build_bell_experiment,
    "teleport": build_teleportation,
    "partial-teleport": build_partial_teleportation,
}
