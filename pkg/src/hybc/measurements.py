"""Measurement model: spectral observables, basis schemas, measurement specs.

Observables with unbounded spectra (photon number, position quadrature)
carry a spectrum *function* from basis outcomes to eigenvalues instead of
a finite eigenvalue list, so memory use is independent of the spectrum
size.  A BasisSchema records the computational basis per measured wire:
Discrete (bits / Fock counts) or Position (homodyne, real-valued).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .ir import GateInstruction, WireLabel
from .wiretypes import QUBIT, QUMODE


class ComputationalBasis(enum.Enum):
    DISCRETE = "discrete"
    POSITION = "position"


class BasisConflict(ValueError):
    pass


class UnsupportedObservable(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BasisSchema:
    bases: tuple  # ((wire, basis), ...) in wire order

    def __init__(self, mapping):
        if isinstance(mapping, BasisSchema):
            pairs = mapping.bases
        elif isinstance(mapping, dict):
            pairs = tuple(mapping.items())
        else:
            pairs = tuple(mapping)
        object.__setattr__(self, "bases", pairs)

    def __eq__(self, other):
        return isinstance(other, BasisSchema) and dict(self.bases) == dict(other.bases)

    @property
    def wires(self) -> tuple:
        return tuple(w for w, _ in self.bases)

    def basis_of(self, wire) -> ComputationalBasis:
        for w, b in self.bases:
            if w == wire:
                return b
        raise KeyError(wire)

    def as_dict(self) -> dict:
        return dict(self.bases)


# factor kinds, their basis preference, type constraint and spectrum
_FACTORS = {
    "N": (ComputationalBasis.DISCRETE, QUMODE),
    "Xquad": (ComputationalBasis.POSITION, QUMODE),
    "PauliZ": (ComputationalBasis.DISCRETE, QUBIT),
    "PauliX": (ComputationalBasis.DISCRETE, QUBIT),
    "PauliY": (ComputationalBasis.DISCRETE, QUBIT),
}


@dataclass(frozen=True)
class Factor:
    kind: str
    wire: WireLabel

    def __post_init__(self):
        if self.kind not in _FACTORS:
            raise UnsupportedObservable(f"unsupported observable factor {self.kind!r}")

    @property
    def preferred_basis(self) -> ComputationalBasis:
        return _FACTORS[self.kind][0]

    def spectrum(self, outcome) -> float:
        if self.kind == "N":
            n = int(outcome)
            if n < 0 or n != outcome:
                raise ValueError(f"photon count outcome must be a nonnegative integer, got {outcome}")
            return float(n)
        if self.kind == "Xquad":
            return float(outcome)
        # Pauli outcomes are bits after diagonalization; |1> is the -1 eigenstate
        b = int(outcome)
        if b not in (0, 1):
            raise ValueError(f"qubit outcome must be a bit, got {outcome}")
        return 1.0 - 2.0 * b


@dataclass(frozen=True)
class SpectralObservable:
    """Scalar multiple of a product of single-wire factors.

    The eigenspectrum is the function outcome-tuple -> coeff * product of
    factor spectra, with outcomes ordered by wire appearance in the
    observable (not tape order).
    """

    factors: tuple
    coeff: float = 1.0

    @property
    def wires(self) -> tuple:
        return tuple(f.wire for f in self.factors)

    def __mul__(self, other):
        if isinstance(other, SpectralObservable):
            overlap = set(self.wires) & set(other.wires)
            if overlap:
                raise UnsupportedObservable(
                    f"product factors must act on distinct wires; {sorted(map(str, overlap))} repeated"
                )
            return SpectralObservable(self.factors + other.factors, self.coeff * other.coeff)
        return SpectralObservable(self.factors, self.coeff * float(other))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return self * other

    def spectrum(self, outcomes) -> float:
        return eigenvalue_of(self, outcomes)

    def preferred_bases(self):
        return tuple((f.wire, f.preferred_basis) for f in self.factors)


def N(wire) -> SpectralObservable:
    """Photon number; spectrum n -> n over Fock outcomes."""
    return SpectralObservable((Factor("N", wire),))


def Xquad(wire) -> SpectralObservable:
    """Position quadrature x = (a + a^dag)/sqrt(2); real-valued spectrum."""
    return SpectralObservable((Factor("Xquad", wire),))


def PauliZ(wire) -> SpectralObservable:
    return SpectralObservable((Factor("PauliZ", wire),))


def PauliX(wire) -> SpectralObservable:
    return SpectralObservable((Factor("PauliX", wire),))


def PauliY(wire) -> SpectralObservable:
    return SpectralObservable((Factor("PauliY", wire),))


def eigenvalue_of(obs: SpectralObservable, outcomes) -> float:
    """Evaluate the spectrum function at one basis outcome tuple."""
    outcomes = tuple(outcomes) if isinstance(outcomes, (tuple, list)) else (outcomes,)
    if len(outcomes) != len(obs.factors):
        raise ValueError(
            f"outcome tuple has {len(outcomes)} entries, observable has {len(obs.factors)} factors"
        )
    value = obs.coeff
    for f, o in zip(obs.factors, outcomes):
        value *= f.spectrum(o)
    return value


def diagonalizing_gates(obs: SpectralObservable) -> list:
    """Rotations taking each factor to its sampling basis (Z / Fock / position)."""
    from . import gates

    out: list[GateInstruction] = []
    for f in obs.factors:
        if f.kind == "PauliX":
            out.append(gates.H(f.wire))
        elif f.kind == "PauliY":
            out.append(gates.SdgGate(f.wire))
            out.append(gates.H(f.wire))
        # PauliZ, N, Xquad are measured natively
    return out


class MeasurementSpec:
    pass


@dataclass(frozen=True)
class Expval(MeasurementSpec):
    obs: SpectralObservable

    @property
    def wires(self) -> tuple:
        return self.obs.wires

    def type_constraints(self):
        return [(f.wire, _FACTORS[f.kind][1]) for f in self.obs.factors]


@dataclass(frozen=True)
class Var(MeasurementSpec):
    obs: SpectralObservable

    @property
    def wires(self) -> tuple:
        return self.obs.wires

    def type_constraints(self):
        return [(f.wire, _FACTORS[f.kind][1]) for f in self.obs.factors]


@dataclass(frozen=True)
class Sample(MeasurementSpec):
    """Sample a particular computational basis per wire."""

    schema: BasisSchema

    def __init__(self, schema):
        object.__setattr__(self, "schema", BasisSchema(schema))

    @property
    def wires(self) -> tuple:
        return self.schema.wires

    def type_constraints(self):
        # Position sampling uniquely identifies qumodes; Discrete sampling is
        # degenerate with qubit readout and constrains nothing.
        return [
            (w, QUMODE)
            for w, b in self.schema.bases
            if b == ComputationalBasis.POSITION
        ]


def expval(obs) -> Expval:
    return Expval(obs)


def var(obs) -> Var:
    return Var(obs)


def sample(schema) -> Sample:
    return Sample(schema)


def infer_basis_schema(measurements) -> BasisSchema:
    """Assign a basis per measured wire from observables and explicit schemas.

    Deterministic and order-insensitive; two measurements demanding
    different bases on one wire raise BasisConflict.
    """
    assigned: dict = {}

    def put(wire, basis, origin):
        prev = assigned.get(wire)
        if prev is not None and prev[0] != basis:
            raise BasisConflict(
                f"wire {wire}: {origin} requires {basis.value} but "
                f"{prev[1]} already requires {prev[0].value}"
            )
        assigned.setdefault(wire, (basis, origin))

    for m in measurements:
        if isinstance(m, (Expval, Var)):
            for wire, basis in m.obs.preferred_bases():
                put(wire, basis, "observable")
        elif isinstance(m, Sample):
            for wire, basis in m.schema.bases:
                put(wire, basis, "sample schema")
        else:
            raise UnsupportedObservable(f"unsupported measurement {m!r}")
    return BasisSchema({w: b for w, (b, _) in assigned.items()})
