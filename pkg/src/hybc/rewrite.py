"""Decomposition engine: typed rewrite rules lowering tapes to a target gate set.

The engine eliminates modifiers first (folding, control synthesis, CNOT
ladders for multi-qubit conditioning), then lowers plain gates through
registered decompositions until every instruction's gate is in the
target set.  Rule selection is deterministic: device rules first, then
the numbered rule with the lowest id, then fewest ancillae, then fewest
output gates.  All rewrites preserve the unitary up to global phase;
the Fock simulator is the oracle for that claim.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from . import gates
from .ir import (
    Adjoint,
    CondZ,
    Ctrl,
    GateInstruction,
    IDENTITY,
    Pow,
    QuantumTape,
    condition_on_qubit,
    normalize_instruction,
)

ANCILLA_PREFIX = "_anc"


class NoRouteError(ValueError):
    def __init__(self, gate: str, target):
        self.gate = gate
        super().__init__(f"no decomposition route from {gate!r} into {sorted(target)}")


class DepthExceededError(ValueError):
    pass


@dataclass(frozen=True)
class RewriteRule:
    """Pattern -> replacement pair; produce receives a fresh-qubit factory."""

    id: str
    description: str
    matches: Callable[[GateInstruction], bool]
    produce: Callable[[GateInstruction, Callable[[], object]], list]
    ancilla_qubits: int = 0


@dataclass(frozen=True)
class ResourceCount:
    gates: dict
    ancillae: dict

    def as_dict(self) -> dict:
        return {"gates": dict(self.gates), "ancillae": dict(self.ancillae)}


# conditioned-gate fusion table: CondZ(base) <-> named hybrid gate
_FUSE = {"D": "CD", "R": "CR", "F": "CP", "S": "CS", "BS": "CBS", "TMS": "CTMS", "SUM": "CSUM"}
_UNFUSE = {v: k for k, v in _FUSE.items()}
# displacement-form gates admitting the parity-conjugation identity (rule 11):
# the conjugated mode is the first mode slot, the amplitude phase shifts by pi/2
_RULE11 = {"D", "BS", "TMS"}


def _plain(instr: GateInstruction) -> bool:
    return not instr.modifiers


def _is_name(name):
    return lambda instr: instr.gate == name and _plain(instr)


def _produce_f(instr, fresh):
    return [gates.R(math.pi / 2, instr.wires[0])]


def _produce_modeswap(instr, fresh):
    i, j = instr.wires
    return [
        gates.BS(math.pi, 0.0, (i, j)),
        gates.R(-math.pi / 2, i),
        gates.R(-math.pi / 2, j),
    ]


def _produce_condz_form(base_name, param_map=None):
    def produce(instr, fresh):
        q, rest = instr.wires[0], instr.wires[1:]
        params = param_map(instr.params) if param_map else instr.params
        return [condition_on_qubit(GateInstruction(base_name, params, rest), q)]

    return produce


def _produce_cp(instr, fresh):
    return [gates.CR(math.pi, instr.wires)]


def _produce_snap(instr, fresh):
    (phis,) = instr.params
    anc = fresh()
    m = instr.wires[0]
    pis = tuple(math.pi for _ in phis)
    zeros = tuple(0.0 for _ in phis)
    return [
        gates.SQR(pis, zeros, (anc, m)),
        gates.SQR(tuple(-p for p in pis), phis, (anc, m)),
    ]


def _rule11_matches(instr: GateInstruction) -> bool:
    # matches the qubit-conditioned form of a displacement-type gate
    if instr.gate in _UNFUSE and _UNFUSE[instr.gate] in _RULE11 and _plain(instr):
        return True
    return (
        len(instr.modifiers) == 1
        and isinstance(instr.modifiers[0], CondZ)
        and instr.gate in _RULE11
    )


def _rule11_produce(instr, fresh):
    if _plain(instr):  # named form: unfuse first
        base_name = _UNFUSE[instr.gate]
        q, rest = instr.wires[0], instr.wires[1:]
        params = instr.params
    else:
        base_name = instr.gate
        q, rest = instr.wires[0], instr.base_wires
        params = instr.params
    # shift the amplitude phase by pi/2 (the parity conjugation rotates a by -i)
    if base_name == "BS":
        theta, phi = params
        inner = gates.BS(theta, phi + math.pi / 2, rest)
    elif base_name == "TMS":
        r, phi = params
        inner = gates.TMS(r, phi + math.pi / 2, rest)
    else:
        r, phi = params
        inner = gates.D(r, phi + math.pi / 2, rest[0])
    pair = (q, rest[0])
    return [gates.CR(-math.pi, pair), inner, gates.CR(math.pi, pair)]


def _multi_condz(instr: GateInstruction) -> bool:
    return sum(1 for m in instr.modifiers if isinstance(m, CondZ)) >= 2 and all(
        isinstance(m, CondZ) for m in instr.modifiers
    )


def _rule12_produce(instr, fresh):
    qs = [m.q for m in instr.modifiers]  # innermost first
    base = instr.replace(wires=instr.base_wires, modifiers=())
    ladder = [gates.CNOT((qs[i], qs[i + 1])) for i in range(len(qs) - 1)]
    mid = condition_on_qubit(base, qs[-1])
    return ladder + [mid] + list(reversed(ladder))


def _rule13_applicable(instr: GateInstruction) -> bool:
    # outermost Ctrl over an (optionally qubit-conditioned) exponential gate
    mods = instr.modifiers
    if not mods or not isinstance(mods[-1], Ctrl):
        return False
    if any(not isinstance(m, CondZ) for m in mods[:-1]):
        return False
    gdef = gates.GATES.get(instr.gate)
    return gdef is not None and gdef.exponential and gdef.scale_param is not None


def _scaled(instr: GateInstruction, factor) -> tuple:
    gdef = gates.lookup(instr.gate)
    params = list(instr.params)
    p = params[gdef.scale_param]
    params[gdef.scale_param] = (
        tuple(factor * v for v in p) if isinstance(p, tuple) else factor * p
    )
    return tuple(params)


def _rule13_produce(instr, fresh):
    """ctrl(U) = sqrt(U) * sqrt(condz(U))^dag for exponential-form U."""
    q = instr.modifiers[-1].q
    inner_mods = instr.modifiers[:-1]
    inner_wires = instr.wires[1:]  # the ctrl qubit was prepended last
    half = GateInstruction(instr.gate, _scaled(instr, 0.5), inner_wires, inner_mods)
    neg_half = GateInstruction(instr.gate, _scaled(instr, -0.5), inner_wires, inner_mods)
    return [half, condition_on_qubit(neg_half, q)]


_TABLE_RULES: list[RewriteRule] = [
    RewriteRule("1", "F = R(pi/2)", _is_name("F"), _produce_f),
    RewriteRule("2", "ModeSwap = R(-pi/2) R(-pi/2) BS(pi, 0)",
                _is_name("ModeSwap"), _produce_modeswap),
    RewriteRule("3", "CD = condz(D)", _is_name("CD"), _produce_condz_form("D")),
    RewriteRule("4", "CR(theta) = condz(R(theta/2))", _is_name("CR"),
                _produce_condz_form("R", lambda p: (p[0] / 2,))),
    RewriteRule("5", "CP = CR(pi)", _is_name("CP"), _produce_cp),
    RewriteRule("6", "CS = condz(S)", _is_name("CS"), _produce_condz_form("S")),
    RewriteRule("7", "CBS = condz(BS)", _is_name("CBS"), _produce_condz_form("BS")),
    RewriteRule("8", "CTMS = condz(TMS)", _is_name("CTMS"), _produce_condz_form("TMS")),
    RewriteRule("9", "CSUM = condz(SUM)", _is_name("CSUM"), _produce_condz_form("SUM")),
    RewriteRule("10", "SNAP(phis) = SQR(-pi, phis) SQR(pi, 0) with qubit ancilla",
                _is_name("SNAP"), _produce_snap, ancilla_qubits=1),
    RewriteRule("11", "condz of a displacement-form gate = CP (gate, phase+pi/2) CP^dag",
                _rule11_matches, _rule11_produce),
    RewriteRule("12", "n-fold condz = CNOT ladder around a single condz",
                _multi_condz, _rule12_produce),
    RewriteRule("13", "ctrl(U) = sqrt(U) sqrt(condz(U))^dag",
                _rule13_applicable, _rule13_produce),
]


def rules() -> list[RewriteRule]:
    """The shipped rule set, in id order."""
    return list(_TABLE_RULES)


# ---------------------------------------------------------------------------
# gate decomposition registry (rules keyed by gate name, plus user gates)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateDecomposition:
    rule_id: str
    produce: Callable
    commuting: bool = False  # factors have mutually commuting generators
    ancilla_qubits: int = 0
    resources: dict | None = None


_GATE_DECOMPS: dict[str, list[GateDecomposition]] = {}


def register_gate_decomposition(
    gate_name: str,
    produce: Callable,
    rule_id: str | None = None,
    commuting: bool = False,
    ancilla_qubits: int = 0,
):
    _GATE_DECOMPS.setdefault(gate_name, []).append(
        GateDecomposition(rule_id or f"user:{gate_name}", produce, commuting, ancilla_qubits)
    )


def _builtin_decomps(gate_name: str) -> list[GateDecomposition]:
    out = []
    for rule in _TABLE_RULES:
        if rule.id in ("11", "12", "13"):
            continue
        probe = GateInstruction(gate_name, _dummy_params(gate_name), _dummy_wires(gate_name))
        if rule.matches(probe):
            # rules 3-9 produce a single conditioned instruction, a trivially
            # commuting product; 1 likewise
            commuting = rule.id in {"1", "3", "4", "5", "6", "7", "8", "9"}
            out.append(GateDecomposition(rule.id, rule.produce, commuting, rule.ancilla_qubits))
    return out


def gate_decompositions(gate_name: str) -> list[GateDecomposition]:
    decs = _builtin_decomps(gate_name) + _GATE_DECOMPS.get(gate_name, [])
    return sorted(decs, key=lambda d: (_rule_sort_key(d.rule_id), d.ancilla_qubits))


def _rule_sort_key(rule_id: str):
    return (0, int(rule_id)) if rule_id.isdigit() else (1, rule_id)


def _dummy_params(gate_name: str) -> tuple:
    gdef = gates.lookup(gate_name)
    out = []
    for _, kind in gdef.param_spec:
        out.append((0.5, 0.25, 0.125) if kind == gates.VECTOR else 0.5)
    return tuple(out)


def _dummy_wires(gate_name: str) -> tuple:
    gdef = gates.lookup(gate_name)
    return tuple(range(gdef.arity or 1))


def placeholder_expansion(gate_name: str) -> "list | None":
    """Expand a gate on placeholder wires 0..arity-1, for signature recursion."""
    decs = gate_decompositions(gate_name)
    if not decs:
        return None
    probe = GateInstruction(gate_name, _dummy_params(gate_name), _dummy_wires(gate_name))
    counter = iter(range(10 ** 6))
    fresh = lambda: f"_sig_anc{next(counter)}"
    return decs[0].produce(probe, fresh)


# ---------------------------------------------------------------------------
# the lowering engine
# ---------------------------------------------------------------------------

class _Lowerer:
    def __init__(self, target: frozenset, max_depth: int, device_rules: tuple = ()):
        self.target = target
        self.max_depth = max_depth
        self.device_rules = device_rules
        self._anc_counter = 0

    def fresh_qubit(self):
        label = f"{ANCILLA_PREFIX}{self._anc_counter}"
        self._anc_counter += 1
        return label

    def lower(self, instr: GateInstruction, depth: int = 0) -> list:
        if depth > self.max_depth:
            raise DepthExceededError(
                f"decomposition of {instr.gate!r} exceeded depth {self.max_depth}"
            )
        instr = normalize_instruction(instr)
        if instr.gate == IDENTITY:
            return []
        if not instr.modifiers and instr.gate in self.target:
            return [instr]
        produced = self._step(instr)
        if produced is None:
            raise NoRouteError(instr.gate, self.target)
        out = []
        for sub in produced:
            out.extend(self.lower(sub, depth + 1))
        return out

    def _step(self, instr: GateInstruction) -> "list | None":
        for rule in self.device_rules:
            if rule.matches(instr):
                return rule.produce(instr, self.fresh_qubit)
        if instr.modifiers:
            return self._eliminate_modifiers(instr)
        decs = gate_decompositions(instr.gate)
        if decs:
            return decs[0].produce(instr, self.fresh_qubit)
        return None

    def _eliminate_modifiers(self, instr: GateInstruction) -> "list | None":
        mods = instr.modifiers
        inner = mods[0]
        gdef = gates.GATES.get(instr.gate)

        if isinstance(inner, Adjoint):
            return self._push_through_decomposition(instr, adjoint=True)

        if isinstance(inner, Pow):
            k = inner.k
            if k.denominator != 1:
                return None  # fractional power of a non-exponential gate
            n = int(k)
            base = instr.replace(modifiers=mods[1:])
            if n < 0:
                base = normalize_instruction(
                    base.replace(modifiers=(Adjoint(),) + base.modifiers)
                )
                n = -n
            return [base] * n

        if _rule13_applicable(instr):
            return _rule13_produce(instr, self.fresh_qubit)

        if isinstance(mods[-1], Ctrl) and all(isinstance(m, CondZ) for m in mods[:-1]):
            return self._push_through_decomposition(instr)

        # CondZ chain
        if all(isinstance(m, CondZ) for m in mods):
            if len(mods) >= 2:
                return _rule12_produce(instr, self.fresh_qubit)
            return self._resolve_single_condz(instr)
        return None

    def _resolve_single_condz(self, instr: GateInstruction) -> "list | None":
        q = instr.modifiers[0].q
        base_name = instr.gate
        fused = _FUSE.get(base_name)
        if fused and fused in self.target:
            params = instr.params
            if base_name == "R":  # CR(theta) = condz(R(theta/2))
                params = (2 * params[0],)
            if base_name == "F":
                params = ()
            return [GateInstruction(fused, params, instr.wires)]
        decs = [d for d in gate_decompositions(base_name) if d.commuting]
        options = []
        if base_name in _RULE11:
            options.append(("11", lambda: _rule11_produce(instr, self.fresh_qubit)))
        for dec in decs:
            options.append(
                (dec.rule_id, lambda dec=dec: self._distribute_condz(instr, dec, q))
            )
        if base_name == "RZ":
            c, t = instr.wires
            options.append(
                ("zz", lambda: [
                    gates.CNOT((c, t)),
                    gates.RZ(instr.params[0], t),
                    gates.CNOT((c, t)),
                ])
            )
        if not options:
            return None
        options.sort(key=lambda o: _rule_sort_key(o[0]))
        return options[0][1]()

    def _distribute_condz(self, instr, dec, q):
        base = instr.replace(wires=instr.base_wires, modifiers=())
        produced = dec.produce(base, self.fresh_qubit)
        return [condition_on_qubit(sub, q) for sub in produced]

    def _push_through_decomposition(self, instr, adjoint=False):
        """Expand the base gate's decomposition, reapplying outer modifiers.

        Adjoint distributes as the reversed adjointed sequence.  Remaining
        condition/control modifiers require a single-instruction expansion.
        """
        n = instr.n_conditions
        cond_wires = instr.wires[:n]
        outer = instr.modifiers[1:] if adjoint else instr.modifiers
        base = instr.replace(wires=instr.wires[n:], modifiers=())
        decs = gate_decompositions(instr.gate)
        if not decs:
            return None
        produced = decs[0].produce(base, self.fresh_qubit)
        if adjoint:
            produced = [
                normalize_instruction(p.replace(modifiers=p.modifiers + (Adjoint(),)))
                for p in reversed(produced)
            ]
        if not outer:
            return produced
        if len(produced) != 1:
            return None
        p = produced[0]
        return [
            normalize_instruction(
                p.replace(wires=cond_wires + p.wires, modifiers=p.modifiers + tuple(outer))
            )
        ]


def _as_names(target) -> frozenset:
    names = set()
    for t in target:
        names.add(t.name if isinstance(t, gates.GateDef) else t)
    for n in names:
        gates.lookup(n)
    return frozenset(names)


def decompose_to_gateset(
    tape: QuantumTape,
    target: Iterable,
    max_depth: int = 16,
    device_rules: tuple = (),
) -> QuantumTape:
    """Lower every instruction into the target set, modifiers fully expanded.

    Ancillae get fresh labels in the reserved `_anc` namespace; replacement
    sequences are spliced in place, preserving measurement order.
    """
    names = _as_names(target)
    if not names:
        raise ValueError("target gate set is empty")
    low = _Lowerer(names, max_depth, tuple(device_rules))
    new_ops = []
    for op in tape.ops:
        new_ops.extend(low.lower(op))
    return tape.replace(ops=tuple(new_ops))


def resource_count(tape: QuantumTape, target: Iterable) -> ResourceCount:
    """Gate-count multiset of the decomposed tape, plus ancilla demand by type."""
    from . import wiretypes

    lowered = decompose_to_gateset(tape, target)
    counts = Counter(op.gate for op in lowered.ops)
    env = wiretypes.infer_types(lowered)
    anc: Counter = Counter()
    for w, t in env.items():
        if isinstance(w, str) and w.startswith(ANCILLA_PREFIX):
            anc[str(t)] += 1
    return ResourceCount(dict(sorted(counts.items())), dict(sorted(anc.items())))
