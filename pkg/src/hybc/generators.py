"""Symbolic operator algebra for gate generators.

A generator is kept as a flat sum of weighted operator products
(normal form), where each factor is a primitive acting on a wire
*slot* (the position index within a gate's wire list).  The algebra
is closed under addition, scalar multiplication, operator product and
hermitian conjugation, and evaluates to a dense matrix once slot
dimensions are known.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# primitive kinds: ladder/number/quadrature on a mode slot, paulis and
# raising/lowering on a qubit slot, fock projector, equatorial qubit rotation
_KINDS = {
    "a", "adag", "n", "x",
    "Z", "X", "Y", "sm", "sp",
    "proj", "qrot",
}


@dataclass(frozen=True)
class Prim:
    kind: str
    slot: int
    args: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown primitive kind {self.kind!r}")

    def dag(self) -> "Prim":
        flip = {"a": "adag", "adag": "a", "sm": "sp", "sp": "sm"}
        if self.kind in flip:
            return Prim(flip[self.kind], self.slot, self.args)
        if self.kind == "qrot":
            theta, phi = self.args
            return Prim("qrot", self.slot, (-theta, phi))
        return self  # n, x, Z, X, Y, proj are hermitian


@dataclass(frozen=True)
class OpSum:
    """Sum of (coefficient, product-of-primitives) terms.

    The product tuple is ordered left-to-right as a matrix product:
    (p0, p1) evaluates to M(p0) @ M(p1).
    """

    terms: tuple[tuple[complex, tuple[Prim, ...]], ...] = field(default=())

    def __add__(self, other: "OpSum") -> "OpSum":
        return OpSum(self.terms + other.terms)

    def __sub__(self, other: "OpSum") -> "OpSum":
        return self + (-1.0) * other

    def __rmul__(self, c: complex) -> "OpSum":
        return OpSum(tuple((complex(c) * w, p) for w, p in self.terms))

    def __mul__(self, other: "OpSum") -> "OpSum":
        out = []
        for w1, p1 in self.terms:
            for w2, p2 in other.terms:
                out.append((w1 * w2, p1 + p2))
        return OpSum(tuple(out))

    def dag(self) -> "OpSum":
        out = []
        for w, prims in self.terms:
            out.append((np.conjugate(w), tuple(p.dag() for p in reversed(prims))))
        return OpSum(tuple(out))

    @property
    def max_slot(self) -> int:
        return max((p.slot for _, prims in self.terms for p in prims), default=-1)


def prim(kind: str, slot: int, *args: float) -> OpSum:
    return OpSum(((1.0 + 0.0j, (Prim(kind, slot, tuple(args)),)),))


def a(slot: int) -> OpSum:
    return prim("a", slot)


def adag(slot: int) -> OpSum:
    return prim("adag", slot)


def num(slot: int) -> OpSum:
    return prim("n", slot)


def xquad(slot: int) -> OpSum:
    """x = (a + a^dag)/sqrt(2), so [x, p] = i."""
    return prim("x", slot)


def pauli(kind: str, slot: int) -> OpSum:
    return prim(kind, slot)


def sigma_minus(slot: int) -> OpSum:
    """|0><1| with |0> the +1 eigenstate of Z."""
    return prim("sm", slot)


def sigma_plus(slot: int) -> OpSum:
    return prim("sp", slot)


def fock_proj(slot: int, k: int) -> OpSum:
    return prim("proj", slot, float(k))


def qubit_rot(slot: int, theta: float, phi: float) -> OpSum:
    """Equatorial rotation exp[-i(theta/2)(cos(phi) X + sin(phi) Y)]."""
    return prim("qrot", slot, theta, phi)


_PAULI = {
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "sm": np.array([[0, 1], [0, 0]], dtype=complex),
    "sp": np.array([[0, 0], [1, 0]], dtype=complex),
}


def prim_matrix(p: Prim, dim: int) -> np.ndarray:
    """Dense matrix of a primitive at the given wire dimension."""
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")
    if p.kind in _PAULI:
        if dim != 2:
            raise ValueError(f"{p.kind} requires a 2-dimensional wire, got {dim}")
        return _PAULI[p.kind].copy()
    if p.kind == "qrot":
        if dim != 2:
            raise ValueError(f"qrot requires a 2-dimensional wire, got {dim}")
        theta, phi = p.args
        axis = math.cos(phi) * _PAULI["X"] + math.sin(phi) * _PAULI["Y"]
        return math.cos(theta / 2) * np.eye(2, dtype=complex) - 1j * math.sin(theta / 2) * axis
    if p.kind == "a":
        return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    if p.kind == "adag":
        return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=-1).astype(complex)
    if p.kind == "n":
        return np.diag(np.arange(dim, dtype=float)).astype(complex)
    if p.kind == "x":
        lad = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)
        return ((lad + lad.T) / math.sqrt(2)).astype(complex)
    if p.kind == "proj":
        k = int(p.args[0])
        m = np.zeros((dim, dim), dtype=complex)
        if k < dim:
            m[k, k] = 1.0
        return m
    raise ValueError(f"unknown primitive {p.kind!r}")


def to_matrix(op: OpSum, dims: tuple[int, ...]) -> np.ndarray:
    """Evaluate the expression on the tensor product of the slot spaces.

    Slot 0 is the most significant tensor factor.
    """
    nslots = len(dims)
    if op.max_slot >= nslots:
        raise ValueError(f"expression uses slot {op.max_slot} but only {nslots} dims given")
    total = int(np.prod(dims))
    out = np.zeros((total, total), dtype=complex)
    for w, prims in op.terms:
        per_slot: list[np.ndarray | None] = [None] * nslots
        for p in prims:
            m = prim_matrix(p, dims[p.slot])
            per_slot[p.slot] = m if per_slot[p.slot] is None else per_slot[p.slot] @ m
        term = np.array([[1.0 + 0.0j]])
        for s in range(nslots):
            factor = per_slot[s] if per_slot[s] is not None else np.eye(dims[s], dtype=complex)
            term = np.kron(term, factor)
        out += w * term
    return out


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) < tol)
