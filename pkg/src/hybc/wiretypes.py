"""Wire type system and inference.

A single forward pass of constraint propagation assigns each wire one of
{qubit, qudit(d), qumode}.  The first determination wins; a later
conflicting constraint raises WireTypeError with diagnostics.  No
backtracking or fixpoint iteration: each instruction contributes its
signature once, resolving recursively through gate decompositions when a
gate carries no declared signature.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .ir import CondZ, Ctrl, GateInstruction, QuantumTape, WireLabel


@dataclass(frozen=True)
class WireType:
    kind: str  # "bottom" | "qubit" | "qudit" | "qumode"
    dim: int | None = None

    def __str__(self):
        if self.kind == "qudit":
            return f"qudit({self.dim})"
        if self.kind == "bottom":
            return "unresolved"
        return self.kind


BOTTOM = WireType("bottom")
QUBIT = WireType("qubit")
QUMODE = WireType("qumode")


def qudit(d: int) -> WireType:
    if d < 3:
        raise ValueError(f"qudit dimension must be >= 3, got {d}")
    return WireType("qudit", d)


# (position, type) constraints; positions index into the instruction's wires
TypeSignature = tuple


def all_of(t: WireType, n: int) -> TypeSignature:
    return tuple((i, t) for i in range(n))


class WireTypeError(TypeError):
    """Constraint conflict: a wire already has a different concrete type."""

    def __init__(self, wire, existing: WireType, required: WireType, index: int, gate: str = ""):
        self.wire = wire
        self.existing = existing
        self.required = required
        self.index = index
        self.gate = gate
        super().__init__(
            f"wire {wire}: expected {existing}, found {required} at op #{index}"
            + (f" ({gate})" if gate else "")
        )


class SignatureError(ValueError):
    """Gate has neither a declared signature nor a decomposition to recurse into."""


@dataclass
class TypeEnv:
    bindings: dict = field(default_factory=dict)

    def get(self, wire) -> WireType:
        return self.bindings.get(wire, BOTTOM)

    def items(self):
        return self.bindings.items()

    def __eq__(self, other):
        return isinstance(other, TypeEnv) and self.bindings == other.bindings

    def copy(self) -> "TypeEnv":
        return TypeEnv(dict(self.bindings))


@dataclass(frozen=True)
class TypeConflict:
    wire: WireLabel
    existing: WireType
    required: WireType
    index: int
    gate: str = ""

    def render(self) -> str:
        tail = f" ({self.gate})" if self.gate else ""
        return (
            f"wire {self.wire}: expected {self.existing}, found {self.required}"
            f" at op #{self.index}{tail}"
        )


@dataclass(frozen=True)
class UnresolvedWire:
    wire: WireLabel

    def render(self) -> str:
        return f"wire {self.wire}: type unresolved"


_SIGNATURE_CACHE: dict[str, TypeSignature] = {}


def _derived_signature(gate_name: str, path: tuple = ()) -> TypeSignature:
    """Resolve a gate signature by recursing into its decomposition."""
    from . import gates, rewrite

    if gate_name in path:
        raise SignatureError(f"cyclic signature recursion through {' -> '.join(path)}")
    gdef = gates.lookup(gate_name)
    if gdef.signature is not None:
        return gdef.signature
    if gate_name in _SIGNATURE_CACHE:
        return _SIGNATURE_CACHE[gate_name]
    produced = rewrite.placeholder_expansion(gate_name)
    if produced is None:
        raise SignatureError(
            f"gate {gate_name!r} has neither a declared signature nor a decomposition"
        )
    constraints: dict[int, WireType] = {}
    for sub in produced:
        for wire, wtype in _instruction_constraints(sub, path + (gate_name,)):
            if not isinstance(wire, int) or wire < 0:
                continue  # ancilla introduced by the decomposition
            prev = constraints.get(wire)
            if prev is not None and prev != wtype:
                raise SignatureError(
                    f"decomposition of {gate_name!r} constrains position {wire} "
                    f"to both {prev} and {wtype}"
                )
            constraints.setdefault(wire, wtype)
    sig = tuple(sorted(constraints.items()))
    _SIGNATURE_CACHE[gate_name] = sig
    return sig


def _instruction_constraints(instr: GateInstruction, path: tuple = ()):
    """(wire, type) pairs contributed by one gate instruction."""
    base = _derived_signature(instr.gate, path)
    ncond = instr.n_conditions
    out = []
    for i, m in enumerate(instr.modifiers):
        if isinstance(m, (CondZ, Ctrl)):
            out.append((m.q, QUBIT))
    for pos, wtype in base:
        out.append((instr.wires[ncond + pos], wtype))
    return out


def signature_of(item) -> TypeSignature:
    """Position-indexed type constraints of a gate instruction or measurement.

    Gate resolution order: declared signature, then recursive descent into
    the decomposition until gates with known signatures are reached.
    Condition modifiers prepend qubit constraints.  Measurements constrain
    through their observables; Position-basis sampling forces qumode while
    Discrete-basis sampling constrains nothing.
    """
    from . import measurements as ms

    if isinstance(item, GateInstruction):
        pairs = _instruction_constraints(item)
        index = {w: i for i, w in enumerate(item.wires)}
        return tuple(sorted((index[w], t) for w, t in pairs))
    if isinstance(item, ms.MeasurementSpec):
        wires = item.wires
        index = {w: i for i, w in enumerate(wires)}
        return tuple(sorted((index[w], t) for w, t in item.type_constraints()))
    raise TypeError(f"cannot derive a signature for {item!r}")


def _constraint_stream(tape: QuantumTape):
    for idx, op in enumerate(tape.ops):
        yield idx, op.gate, _instruction_constraints(op)
    base = len(tape.ops)
    for j, m in enumerate(tape.measurements):
        yield base + j, type(m).__name__.lower(), m.type_constraints()


def infer_types(tape: QuantumTape) -> TypeEnv:
    """Single forward pass; Gamma(w) := tau when Gamma(w) is unresolved."""
    env = TypeEnv()
    for w in tape.wires:
        env.bindings.setdefault(w, BOTTOM)
    for index, gate_name, constraints in _constraint_stream(tape):
        for wire, wtype in constraints:
            current = env.get(wire)
            if current == BOTTOM:
                env.bindings[wire] = wtype
            elif current != wtype:
                raise WireTypeError(wire, current, wtype, index, gate_name)
    return env


def validate(tape: QuantumTape, env: TypeEnv, strict: bool = False) -> list:
    """Diagnostics instead of exceptions; empty iff every constraint holds."""
    diags = []
    for index, gate_name, constraints in _constraint_stream(tape):
        for wire, wtype in constraints:
            current = env.get(wire)
            if current != BOTTOM and current != wtype:
                diags.append(TypeConflict(wire, current, wtype, index, gate_name))
    if strict:
        for wire, wtype in env.items():
            if wtype == BOTTOM:
                diags.append(UnresolvedWire(wire))
    return diags
