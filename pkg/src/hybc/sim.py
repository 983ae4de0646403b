"""Truncated Fock-space statevector simulator.

Semantics are truncate-then-exponentiate: generators are built at the
configured cutoff and exponentiated by Hermitian eigendecomposition, so
every gate matrix is unitary to machine precision.  Displacement-type
gates are therefore inexact near the cutoff; keep state support below
cutoff/2 for reliable results.  Cutoffs need not be powers of two.

Doubles as the verification oracle for rewrite rules: full-space
unitaries (small cutoffs, deliberately dense) can be formed for any
instruction sequence and compared up to global phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gates
from . import generators as g
from . import measurements as ms
from .ir import Adjoint, BasisPrep, CondZ, Ctrl, GateInstruction, Pow, QuantumTape
from .wiretypes import BOTTOM, QUBIT, TypeEnv, WireType, infer_types


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class CutoffConfig:
    default: int = 8
    overrides: tuple = ()  # (wire, cutoff) pairs

    def __post_init__(self):
        object.__setattr__(self, "overrides", tuple(dict(self.overrides).items()))
        for c in (self.default, *(c for _, c in self.overrides)):
            if c < 2:
                raise SimulationError(f"cutoff must be >= 2, got {c}")

    def cutoff(self, wire) -> int:
        for w, c in self.overrides:
            if w == wire:
                return c
        return self.default

    def dim(self, wire, wtype: WireType) -> int:
        if wtype.kind == "qubit":
            return 2
        if wtype.kind == "qudit":
            return wtype.dim
        if wtype.kind == "qumode":
            return self.cutoff(wire)
        raise SimulationError(f"wire {wire!r} has unresolved type")

    def as_dict(self) -> dict:
        return {"default": self.default, "overrides": {str(w): c for w, c in self.overrides}}


@dataclass
class StateVector:
    amps: np.ndarray  # dense, flattened; wire k is the k-th factor, most significant first
    wire_order: tuple
    dims: tuple
    wire_types: tuple

    @property
    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def axis(self, wire) -> int:
        return self.wire_order.index(wire)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy(), self.wire_order, self.dims, self.wire_types)


def expm_hermitian(h: np.ndarray) -> np.ndarray:
    """exp(-i h) for Hermitian h, exactly unitary via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w)) @ v.conj().T


def operator_matrix(kind: str, cutoff: int) -> np.ndarray:
    """Fock-basis matrix of a generator primitive at the given dimension."""
    return g.prim_matrix(g.Prim(kind, 0), cutoff)


_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def gate_matrix(instr: GateInstruction, dims: tuple) -> np.ndarray:
    """Unitary of an instruction on the tensor product of its wire spaces.

    Exponential gates track a Hermitian generator through all modifiers
    (Adjoint negates, Pow scales, CondZ tensors Z in, Ctrl tensors the
    |1><1| projector in) and exponentiate once at the end.  Explicit
    gates apply modifiers at the matrix level; fractional powers are only
    defined for exponential-form gates.
    """
    gdef = gates.lookup(instr.gate)
    ncond = instr.n_conditions
    base_dims = tuple(dims[ncond:]) if ncond else tuple(dims)
    if gdef.arity is not None and len(base_dims) != gdef.arity:
        raise SimulationError(
            f"{instr.gate} expects {gdef.arity} wires, got dims {base_dims}"
        )

    if gdef.exponential:
        h = g.to_matrix(gdef.generator(instr.params), base_dims)
        for m in instr.modifiers:
            if isinstance(m, Adjoint):
                h = -h
            elif isinstance(m, Pow):
                h = float(m.k) * h
            elif isinstance(m, CondZ):
                h = np.kron(_PAULI_Z, h)
            elif isinstance(m, Ctrl):
                h = np.kron(np.diag([0.0, 1.0]).astype(complex), h)
        return expm_hermitian(h)

    u = gdef.explicit(instr.params, base_dims)
    for m in instr.modifiers:
        if isinstance(m, Adjoint):
            u = u.conj().T
        elif isinstance(m, Pow):
            if m.k.denominator == 1:
                u = np.linalg.matrix_power(u, int(m.k))
            elif np.allclose(u, u.conj().T, atol=1e-12):
                w, v = np.linalg.eigh(u)
                u = (v * (w.astype(complex) ** float(m.k))) @ v.conj().T
            else:
                raise SimulationError(
                    f"fractional power of non-exponential gate {instr.gate!r} is undefined"
                )
        elif isinstance(m, CondZ):
            d = u.shape[0]
            blk = np.zeros((2 * d, 2 * d), dtype=complex)
            blk[:d, :d] = u
            blk[d:, d:] = u.conj().T
            u = blk
        elif isinstance(m, Ctrl):
            d = u.shape[0]
            blk = np.eye(2 * d, dtype=complex)
            blk[d:, d:] = u
            u = blk
    return u


def _apply_matrix(tensor: np.ndarray, mat: np.ndarray, axes: list) -> np.ndarray:
    """Apply a (possibly non-unitary) operator on the given tensor axes."""
    k = len(axes)
    dims = [tensor.shape[a] for a in axes]
    moved = np.tensordot(mat.reshape(dims + dims), tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(moved, range(k), axes)


def resolve_env(env: TypeEnv, default: WireType = QUBIT) -> tuple:
    """Lenient resolution: unresolved wires default to qubit, with a warning list."""
    resolved = env.copy()
    warnings = []
    for w, t in env.items():
        if t == BOTTOM:
            resolved.bindings[w] = default
            warnings.append(f"wire {w}: type unresolved, defaulting to {default}")
    return resolved, warnings


def _initial_state(tape: QuantumTape, env: TypeEnv, cutoffs: CutoffConfig) -> StateVector:
    wires = tape.wires
    types = tuple(env.get(w) for w in wires)
    dims = tuple(cutoffs.dim(w, t) for w, t in zip(wires, types))
    levels = {p.wire: p.level for p in tape.prep}
    for p in tape.prep:
        d = dims[wires.index(p.wire)]
        if not (0 <= p.level < d):
            raise SimulationError(
                f"prep level {p.level} out of range for wire {p.wire!r} (dim {d})"
            )
    amps = np.zeros(int(np.prod(dims)), dtype=complex)
    idx = 0
    for w, d in zip(wires, dims):
        idx = idx * d + levels.get(w, 0)
    amps[idx] = 1.0
    return StateVector(amps, wires, dims, types)


def simulate(tape: QuantumTape, cutoffs: CutoffConfig | None = None,
             env: TypeEnv | None = None) -> StateVector:
    """Execute prep and the flattened gate list; measurements are ignored here."""
    cutoffs = cutoffs or CutoffConfig()
    if env is None:
        env, _ = resolve_env(infer_types(tape))
    state = _initial_state(tape, env, cutoffs)
    tensor = state.tensor
    for op in tape.ops:
        axes = [state.wire_order.index(w) for w in op.wires]
        mat = gate_matrix(op, tuple(state.dims[a] for a in axes))
        tensor = _apply_matrix(tensor, mat, axes)
        nrm = np.linalg.norm(tensor)
        if abs(nrm - 1.0) > 1e-10:
            raise SimulationError(f"norm drifted to {nrm} after {op.gate}")
    state.amps = tensor.reshape(-1)
    return state


_FACTOR_KIND = {"N": "n", "Xquad": "x", "PauliZ": "Z", "PauliX": "X", "PauliY": "Y"}


def _factor_matrix(factor: ms.Factor, dim: int) -> np.ndarray:
    return g.prim_matrix(g.Prim(_FACTOR_KIND[factor.kind], 0), dim)


def _apply_observable(state: StateVector, obs: ms.SpectralObservable) -> np.ndarray:
    tensor = state.tensor.copy()
    for f in obs.factors:
        ax = state.axis(f.wire)
        tensor = _apply_matrix(tensor, _factor_matrix(f, state.dims[ax]), [ax])
    return obs.coeff * tensor


def expval(state: StateVector, obs: ms.SpectralObservable) -> float:
    """<psi| O |psi> assembled from primitive factor matrices."""
    val = np.vdot(state.tensor, _apply_observable(state, obs))
    if abs(val.imag) > 1e-9:
        raise SimulationError(f"expectation of {obs} came out complex: {val}")
    return float(val.real)


def var(state: StateVector, obs: ms.SpectralObservable) -> float:
    otensor = _apply_observable(state, obs)
    e1 = np.vdot(state.tensor, otensor).real
    e2 = np.vdot(otensor, otensor).real  # O hermitian: <O^2> = |O psi|^2
    return float(e2 - e1 * e1)


_XNODE_CACHE: dict[int, tuple] = {}


def position_nodes(dim: int) -> tuple:
    """Eigendecomposition of truncated x: (nodes, eigenvector matrix)."""
    if dim not in _XNODE_CACHE:
        nodes, vecs = np.linalg.eigh(g.prim_matrix(g.Prim("x", 0), dim))
        _XNODE_CACHE[dim] = (nodes, vecs)
    return _XNODE_CACHE[dim]


def sample(state: StateVector, schema: ms.BasisSchema, shots: int,
           seed: int | None = None) -> list:
    """Joint basis-state samples over the schema's wires; PCG64 seeded RNG.

    Discrete wires sample their Fock/bit index; Position wires sample the
    eigenvalues of the truncated x operator (the exact outcome set of the
    truncated model).
    """
    if shots < 1:
        raise SimulationError(f"shots must be >= 1, got {shots}")
    tensor = state.tensor
    node_values: dict = {}
    for wire, basis in schema.bases:
        ax = state.axis(wire)
        if basis == ms.ComputationalBasis.POSITION:
            if state.wire_types[ax].kind != "qumode":
                raise SimulationError(
                    f"position sampling requested on {state.wire_types[ax]} wire {wire!r}"
                )
            nodes, vecs = position_nodes(state.dims[ax])
            tensor = _apply_matrix(tensor, vecs.conj().T, [ax])
            node_values[wire] = nodes
    axes = [state.axis(w) for w in schema.wires]
    probs = np.abs(tensor) ** 2
    keep = tuple(a for a in range(tensor.ndim) if a not in axes)
    if keep:
        probs = probs.sum(axis=keep)
    # probs axes are the measured axes in increasing axis order; reorder to schema order
    order = np.argsort(axes, kind="stable")
    inv = np.empty_like(order)
    inv[order] = np.arange(len(axes))
    probs = np.transpose(probs, inv)
    flat = probs.reshape(-1)
    flat = flat / flat.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.choice(flat.size, size=shots, p=flat)
    shape = probs.shape
    out = []
    for d in draws:
        idx = np.unravel_index(int(d), shape)
        outcome = []
        for wire, i in zip(schema.wires, idx):
            if wire in node_values:
                outcome.append(float(node_values[wire][i]))
            else:
                outcome.append(int(i))
        out.append(tuple(outcome))
    return out


def postselect(state: StateVector, wire, level: int) -> tuple:
    """Project a wire onto |level> and renormalize; returns (state, keep_prob)."""
    ax = state.axis(wire)
    tensor = state.tensor.copy()
    idx = [slice(None)] * tensor.ndim
    for lv in range(state.dims[ax]):
        if lv != level:
            idx[ax] = lv
            tensor[tuple(idx)] = 0.0
    keep = float(np.linalg.norm(tensor) ** 2)
    if keep > 0:
        tensor = tensor / math.sqrt(keep)
    return StateVector(tensor.reshape(-1), state.wire_order, state.dims, state.wire_types), keep


# ---------------------------------------------------------------------------
# oracle mode: full-space unitaries for equivalence checks
# ---------------------------------------------------------------------------

def sequence_unitary(instrs, wire_order: tuple, dims: tuple) -> np.ndarray:
    """Dense unitary of an instruction sequence on an explicit wire ordering."""
    total = int(np.prod(dims))
    u = np.eye(total, dtype=complex).reshape(*dims, total)
    for op in instrs:
        axes = [wire_order.index(w) for w in op.wires]
        mat = gate_matrix(op, tuple(dims[a] for a in axes))
        u = _apply_matrix(u, mat, axes)
    return u.reshape(total, total)


def phase_aligned_distance(u1: np.ndarray, u2: np.ndarray) -> float:
    """max |u1 - e^{i gamma} u2| with gamma fixed by the largest element of u2."""
    idx = np.unravel_index(np.argmax(np.abs(u2)), u2.shape)
    ratio = u1[idx] / u2[idx]
    mag = abs(ratio)
    phase = ratio / mag if mag > 0 else 1.0
    return float(np.max(np.abs(u1 - phase * u2)))


def low_energy_columns(dims: tuple, fock_limit: int) -> np.ndarray:
    """Flat indices of basis states whose mode levels are all below fock_limit."""
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    mask = np.ones(tuple(dims), dtype=bool)
    for grid, d in zip(grids, dims):
        if d > 2:  # qumode axis
            mask &= grid < fock_limit
    return np.nonzero(mask.reshape(-1))[0]


# ---------------------------------------------------------------------------
# tape execution with measurements
# ---------------------------------------------------------------------------

def run_tape(tape: QuantumTape, cutoffs: CutoffConfig | None = None,
             seed: int | None = None) -> dict:
    """Execute a tape and evaluate its measurements.

    Analytic mode (shots=None): expectation values and variances from the
    statevector; sampling requires shots.  Finite-shot mode: observables
    are diagonalized into their computational bases, one joint sample is
    drawn per shot, and spectrum functions post-process the outcomes.
    """
    cutoffs = cutoffs or CutoffConfig()
    env, warnings = resolve_env(infer_types(tape))
    results = []
    if tape.shots is None:
        state = simulate(tape, cutoffs, env)
        for m in tape.measurements:
            if isinstance(m, ms.Expval):
                results.append({"expval": expval(state, m.obs)})
            elif isinstance(m, ms.Var):
                results.append({"var": var(state, m.obs)})
            else:
                raise SimulationError("sampling requires finite shots; set shots on the tape")
        return {"results": results, "warnings": warnings}

    schema = ms.infer_basis_schema(tape.measurements)
    diag_ops, seen = [], set()
    for m in tape.measurements:
        if isinstance(m, (ms.Expval, ms.Var)):
            for f in m.obs.factors:
                key = (f.wire, f.kind)
                conflicting = [k for k in seen if k[0] == f.wire and k[1] != f.kind]
                if conflicting:
                    raise ms.BasisConflict(
                        f"wire {f.wire}: cannot jointly sample {f.kind} and {conflicting[0][1]}"
                    )
                if key not in seen:
                    seen.add(key)
                    diag_ops.extend(ms.diagonalizing_gates(ms.SpectralObservable((f,))))
    run = tape.replace(ops=tape.ops + tuple(diag_ops), shots=None)
    state = simulate(run, cutoffs, env)
    outcomes = sample(state, schema, tape.shots, seed)
    col = {w: i for i, w in enumerate(schema.wires)}
    for m in tape.measurements:
        if isinstance(m, ms.Sample):
            rows = [tuple(o[col[w]] for w in m.wires) for o in outcomes]
            results.append({"samples": rows})
        else:
            vals = [
                ms.eigenvalue_of(m.obs, tuple(o[col[w]] for w in m.obs.wires))
                for o in outcomes
            ]
            mean = float(np.mean(vals))
            if isinstance(m, ms.Expval):
                results.append({"expval": mean})
            else:
                results.append({"var": float(np.mean([v * v for v in vals]) - mean * mean)})
    return {"results": results, "warnings": warnings}
