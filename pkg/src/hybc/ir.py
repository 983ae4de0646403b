"""Circuit IR: wire labels, parameters, gate instructions, modifiers, tapes.

Wire labels are opaque hashable tokens compared exactly (the integer 0
and the string "0" are distinct wires).  Instructions and tapes are
immutable; every transform returns new values.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

WireLabel = Hashable
# scalar angle/amplitude, or an angle vector (SNAP/SQR)
ParamValue = "float | tuple[float, ...]"


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Adjoint:
    def __str__(self):
        return "adj"


@dataclass(frozen=True)
class Pow:
    k: Fraction

    def __post_init__(self):
        object.__setattr__(self, "k", Fraction(self.k))

    def __str__(self):
        return f"pow({self.k})"


@dataclass(frozen=True)
class CondZ:
    """Promotes U = exp(-i G) to exp(-i Z_q (x) G) on a fresh qubit q."""

    q: WireLabel

    def __str__(self):
        return f"condz({self.q})"


@dataclass(frozen=True)
class Ctrl:
    """Ordinary control: |0><0| I + |1><1| U on qubit q."""

    q: WireLabel

    def __str__(self):
        return f"ctrl({self.q})"


Modifier = "Adjoint | Pow | CondZ | Ctrl"

IDENTITY = "Identity"


def _freeze_param(p) -> "float | tuple[float, ...]":
    if isinstance(p, (list, tuple)):
        return tuple(float(v) for v in p)
    return float(p)


@dataclass(frozen=True)
class GateInstruction:
    gate: str
    params: tuple = ()
    wires: tuple = ()
    modifiers: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(_freeze_param(p) for p in self.params))
        object.__setattr__(self, "wires", tuple(self.wires))
        object.__setattr__(self, "modifiers", tuple(self.modifiers))

    @property
    def n_conditions(self) -> int:
        return sum(1 for m in self.modifiers if isinstance(m, (CondZ, Ctrl)))

    @property
    def base_wires(self) -> tuple:
        """Wires of the underlying gate, excluding prepended condition qubits."""
        return self.wires[self.n_conditions:]

    def replace(self, **kw) -> "GateInstruction":
        return replace(self, **kw)

    def __str__(self):
        mods = "".join(f" {m}" for m in self.modifiers)
        params = ", ".join(
            "[" + ", ".join(f"{v:g}" for v in p) + "]" if isinstance(p, tuple) else f"{p:g}"
            for p in self.params
        )
        return f"{self.gate}({params}) @ {list(self.wires)}{mods}"


@dataclass(frozen=True)
class BasisPrep:
    """Computational-basis state preparation: wire starts in |level>."""

    wire: WireLabel
    level: int = 0


@dataclass(frozen=True)
class QuantumTape:
    """Ordered gate instructions plus terminal measurements.

    Instruction order is execution order (earliest first).  shots=None
    selects analytic mode.
    """

    prep: tuple = ()
    ops: tuple = ()
    measurements: tuple = ()
    shots: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "prep", tuple(self.prep))
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "measurements", tuple(self.measurements))
        if self.shots is not None and self.shots < 1:
            raise CircuitError(f"shots must be positive, got {self.shots}")

    @property
    def wires(self) -> tuple:
        """All wires in order of first appearance (prep, ops, measurements)."""
        seen: dict = {}
        for p in self.prep:
            seen.setdefault(p.wire, None)
        for op in self.ops:
            for w in op.wires:
                seen.setdefault(w, None)
        for m in self.measurements:
            for w in m.wires:
                seen.setdefault(w, None)
        return tuple(seen)

    def replace(self, **kw) -> "QuantumTape":
        return replace(self, **kw)


def normalize_modifiers(mods: Sequence) -> "tuple | None":
    """Apply the cancellation rules until a fixed point.

    Adjacent Adjoint pairs cancel, adjacent Pows multiply, Pow(1) is
    dropped.  Adjoint/Pow commute inward past CondZ/Ctrl (conditioning is
    block-diagonal, so adjoints and powers act block-wise), which sinks
    all scalar modifiers to the innermost position.  Returns None when a
    Pow(0) collapses the instruction to an identity marker.  The rules
    are confluent, so any application order yields the same normal form.
    """
    out = list(mods)
    changed = True
    while changed:
        changed = False
        for i in range(len(out) - 1):
            m1, m2 = out[i], out[i + 1]
            if isinstance(m1, Adjoint) and isinstance(m2, Adjoint):
                del out[i:i + 2]
                changed = True
                break
            if isinstance(m1, Pow) and isinstance(m2, Pow):
                out[i:i + 2] = [Pow(m1.k * m2.k)]
                changed = True
                break
            if isinstance(m1, (CondZ, Ctrl)) and isinstance(m2, (Adjoint, Pow)):
                out[i], out[i + 1] = m2, m1
                changed = True
                break
        else:
            for i, m in enumerate(out):
                if isinstance(m, Pow) and m.k == 1:
                    del out[i]
                    changed = True
                    break
    for m in out:
        if isinstance(m, Pow) and m.k == 0:
            return None
    return tuple(out)


def _fold_scale(instr: GateInstruction) -> GateInstruction:
    """Fold Adjoint/Pow into parameter rescaling for exponential-form gates.

    Only leading (innermost) Adjoint/Pow runs are folded; modifiers after
    a CondZ/Ctrl stay symbolic.  Involutions drop a leading Adjoint.
    """
    from . import gates  # late import: registry depends on this module

    gdef = gates.GATES.get(instr.gate)
    if gdef is None or not instr.modifiers:
        return instr
    mods = list(instr.modifiers)
    params = list(instr.params)
    name = instr.gate
    while mods:
        m = mods[0]
        if isinstance(m, Adjoint):
            if gdef.involution:
                mods.pop(0)
                continue
            if gdef.adjoint_gate is not None:
                name = gdef.adjoint_gate
                gdef = gates.GATES[name]
                mods.pop(0)
                continue
            if gdef.scale_param is not None:
                p = params[gdef.scale_param]
                params[gdef.scale_param] = (
                    tuple(-v for v in p) if isinstance(p, tuple) else -p
                )
                mods.pop(0)
                continue
        if isinstance(m, Pow) and gdef.scale_param is not None and gdef.exponential:
            k = float(m.k)
            p = params[gdef.scale_param]
            params[gdef.scale_param] = (
                tuple(k * v for v in p) if isinstance(p, tuple) else k * p
            )
            mods.pop(0)
            continue
        break
    return instr.replace(gate=name, params=tuple(params), modifiers=tuple(mods))


def normalize_instruction(instr: GateInstruction) -> GateInstruction:
    mods = normalize_modifiers(instr.modifiers)
    if mods is None:
        return GateInstruction(IDENTITY, (), instr.wires)
    return _fold_scale(instr.replace(modifiers=mods))


def build_tape(
    prep: Iterable = (),
    ops: Iterable[GateInstruction] = (),
    measurements: Iterable = (),
    shots: int | None = None,
) -> QuantumTape:
    """Construct a normalized tape, validating wire counts against gate arity."""
    from . import gates

    norm_ops = []
    for idx, op in enumerate(ops):
        op = normalize_instruction(op)
        gdef = gates.GATES.get(op.gate)
        if gdef is None:
            raise CircuitError(f"op #{idx}: unknown gate {op.gate!r}")
        if gdef.arity is not None:
            expected = gdef.arity + op.n_conditions
            if len(op.wires) != expected:
                raise CircuitError(
                    f"op #{idx} ({op.gate}): expected {expected} wires "
                    f"(arity {gdef.arity} + {op.n_conditions} condition), got {len(op.wires)}"
                )
        if len(set(op.wires)) != len(op.wires):
            raise CircuitError(f"op #{idx} ({op.gate}): duplicate wire in {op.wires}")
        norm_ops.append(op)
    return QuantumTape(tuple(prep), tuple(norm_ops), tuple(measurements), shots)


def condition_on_qubit(instr: GateInstruction, q: WireLabel) -> GateInstruction:
    """Promote exp(-i G) to exp(-i Z_q (x) G); q is prepended to the wires."""
    if q in instr.wires:
        raise CircuitError(f"condition qubit {q!r} collides with wires {instr.wires}")
    return normalize_instruction(
        instr.replace(wires=(q,) + instr.wires, modifiers=instr.modifiers + (CondZ(q),))
    )


def control_on_qubit(instr: GateInstruction, q: WireLabel) -> GateInstruction:
    """Ordinary controlled version: apply the gate only on |1>_q."""
    if q in instr.wires:
        raise CircuitError(f"control qubit {q!r} collides with wires {instr.wires}")
    return normalize_instruction(
        instr.replace(wires=(q,) + instr.wires, modifiers=instr.modifiers + (Ctrl(q),))
    )


def adjoint(instr: GateInstruction) -> GateInstruction:
    return normalize_instruction(instr.replace(modifiers=instr.modifiers + (Adjoint(),)))


def power(instr: GateInstruction, k) -> GateInstruction:
    return normalize_instruction(instr.replace(modifiers=instr.modifiers + (Pow(Fraction(k)),)))
