"""Gate library: symbolic definitions for CV, hybrid and DV gates.

Every gate is either Exponential (defined by a Hermitian generator H so
the unitary is exp(-i H)) or Explicit (defined by a direct Fock-basis
construction).  No matrices are stored; they are built on demand by the
simulator at a given cutoff.

Conventions:
  - |0> is the +1 eigenstate of Z.
  - x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2), so [x, p] = i.
  - Complex amplitudes (displacement, squeeze) are polar pairs (r, phi)
    with alpha = r * exp(i phi).
"""
from __future__ import annotations

import cmath
import difflib
import json
import math
from dataclasses import dataclass, field

from . import generators as g
from .ir import GateInstruction, IDENTITY
from .wiretypes import QUBIT, QUMODE, TypeSignature, all_of

ANGLE = "angle"
REAL = "real"
VECTOR = "angle_vector"


class UnknownGateError(KeyError):
    def __init__(self, name: str, candidates):
        self.name = name
        self.near = difflib.get_close_matches(name, candidates, n=3)
        hint = f" (did you mean {', '.join(self.near)}?)" if self.near else ""
        super().__init__(f"unknown gate {name!r}{hint}")


@dataclass(frozen=True)
class GateDef:
    name: str
    arity: int | None  # None: any wire count (Identity)
    param_spec: tuple = ()  # (name, kind) pairs
    generator: "callable | None" = None  # params -> OpSum, for Exponential form
    explicit: "callable | None" = None  # (params, dims) -> matrix, for Explicit form
    signature: "TypeSignature | None" = None
    decomposition_refs: tuple = ()  # rewrite rule ids
    scale_param: int | None = None  # param folded by Adjoint (negate) / Pow (scale)
    involution: bool = False
    adjoint_gate: str | None = None  # named adjoint (S <-> Sdg)
    qasm_name: str | None = None
    cv_class: bool = False  # qumode-only gate

    @property
    def exponential(self) -> bool:
        return self.generator is not None


GATES: dict[str, GateDef] = {}


def register(gdef: GateDef) -> GateDef:
    if gdef.name in GATES:
        raise ValueError(f"gate {gdef.name!r} already registered")
    GATES[gdef.name] = gdef
    return gdef


def lookup(name: str) -> GateDef:
    try:
        return GATES[name]
    except KeyError:
        raise UnknownGateError(name, GATES.keys()) from None


def _polar(r: float, phi: float) -> complex:
    return r * cmath.exp(1j * phi)


# ---------------------------------------------------------------------------
# CV gates (single and two mode)
# ---------------------------------------------------------------------------

def _gen_d(params):
    """D(alpha) = exp[alpha a^dag - alpha* a]  ->  H = i alpha a^dag - i alpha* a"""
    alpha = _polar(*params)
    return (1j * alpha) * g.adag(0) + (-1j * alpha.conjugate()) * g.a(0)


def _gen_r(params):
    """R(theta) = exp[-i theta n]"""
    return params[0] * g.num(0)


def _gen_f(params):
    return (math.pi / 2) * g.num(0)


def _gen_s(params):
    """S(zeta) = exp[(zeta* a^2 - zeta a^dag^2)/2]"""
    zeta = _polar(*params)
    return (0.5j * zeta.conjugate()) * (g.a(0) * g.a(0)) + (
        -0.5j * zeta
    ) * (g.adag(0) * g.adag(0))


def _gen_k(params):
    """K(kappa) = exp[-i kappa n^2]"""
    return params[0] * (g.num(0) * g.num(0))


def _gen_cubic(params):
    """C(r) = exp[-i r x^3]"""
    return params[0] * (g.xquad(0) * g.xquad(0) * g.xquad(0))


def _gen_bs(params):
    """BS(theta, phi) = exp[-i (theta/2)(e^{i phi} a^dag b + h.c.)]"""
    theta, phi = params
    w = cmath.exp(1j * phi)
    return (theta / 2) * (w * (g.adag(0) * g.a(1)) + w.conjugate() * (g.a(0) * g.adag(1)))


def _gen_tms(params):
    """TMS(xi) = exp[xi a^dag b^dag - xi* a b]"""
    xi = _polar(*params)
    return (1j * xi) * (g.adag(0) * g.adag(1)) + (-1j * xi.conjugate()) * (g.a(0) * g.a(1))


def _gen_sum(params):
    """SUM(lam) = exp[(lam/2)(a + a^dag)(b^dag - b)]"""
    lam = params[0]
    return (1j * lam / 2) * ((g.a(0) + g.adag(0)) * (g.adag(1) - g.a(1)))


def _explicit_modeswap(params, dims):
    if dims[0] != dims[1]:
        raise ValueError(f"ModeSwap requires equal cutoffs, got {dims}")
    d = dims[0]
    m = __import__("numpy").zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for k in range(d):
            m[k * d + j, j * d + k] = 1.0
    return m


def _explicit_snap(params, dims):
    """SNAP(phis): diagonal phases e^{-i phi_n}, identity beyond len(phis)."""
    import numpy as np

    (phis,) = params
    d = dims[0]
    diag = np.ones(d, dtype=complex)
    for n, phi in enumerate(phis):
        if n < d:
            diag[n] = np.exp(-1j * phi)
    return np.diag(diag)


def _explicit_sqr(params, dims):
    """SQR(thetas, phis) = sum_n R_{phi_n}(theta_n) (x) |n><n| on (qubit, mode)."""
    import numpy as np

    thetas, phis = params
    d = dims[1]
    m = np.zeros((2 * d, 2 * d), dtype=complex)
    for n in range(d):
        if n < len(thetas):
            th = thetas[n]
            ph = phis[n] if n < len(phis) else 0.0
            blk = g.prim_matrix(g.Prim("qrot", 0, (th, ph)), 2)
        else:
            blk = np.eye(2, dtype=complex)
        for r in range(2):
            for c in range(2):
                m[r * d + n, c * d + n] = blk[r, c]
    return m


# ---------------------------------------------------------------------------
# Hybrid gates (qubit slot 0, mode slots after)
# ---------------------------------------------------------------------------

def _gen_cr(params):
    """CR(theta) = exp[-i (theta/2) Z n]"""
    return (params[0] / 2) * (g.pauli("Z", 0) * g.num(1))


def _gen_cp(params):
    return (math.pi / 2) * (g.pauli("Z", 0) * g.num(1))


def _gen_cd(params):
    """CD(alpha) = exp[Z (alpha a^dag - alpha* a)]"""
    alpha = _polar(*params)
    return g.pauli("Z", 0) * (
        (1j * alpha) * g.adag(1) + (-1j * alpha.conjugate()) * g.a(1)
    )


def _gen_cs(params):
    zeta = _polar(*params)
    return g.pauli("Z", 0) * (
        (0.5j * zeta.conjugate()) * (g.a(1) * g.a(1))
        + (-0.5j * zeta) * (g.adag(1) * g.adag(1))
    )


def _gen_jc(params):
    """JC(theta, phi) = exp[-i theta (e^{i phi} sigma- a^dag + h.c.)]"""
    theta, phi = params
    w = cmath.exp(1j * phi)
    return theta * (
        w * (g.sigma_minus(0) * g.adag(1)) + w.conjugate() * (g.sigma_plus(0) * g.a(1))
    )


def _gen_ajc(params):
    theta, phi = params
    w = cmath.exp(1j * phi)
    return theta * (
        w * (g.sigma_plus(0) * g.adag(1)) + w.conjugate() * (g.sigma_minus(0) * g.a(1))
    )


def _gen_rb(params):
    """RB(theta) = exp[-i X (theta a^dag + theta* a)], complex theta as polar."""
    theta = _polar(*params)
    return g.pauli("X", 0) * (theta * g.adag(1) + theta.conjugate() * g.a(1))


def _gen_xcd(params):
    """xCD(alpha) = exp[X (alpha a^dag - alpha* a)]: X-conditioned displacement."""
    alpha = _polar(*params)
    return g.pauli("X", 0) * (
        (1j * alpha) * g.adag(1) + (-1j * alpha.conjugate()) * g.a(1)
    )


def _gen_cbs(params):
    theta, phi = params
    w = cmath.exp(1j * phi)
    return (theta / 2) * (
        g.pauli("Z", 0) * (w * (g.adag(1) * g.a(2)) + w.conjugate() * (g.a(1) * g.adag(2)))
    )


def _gen_ctms(params):
    xi = _polar(*params)
    return g.pauli("Z", 0) * (
        (1j * xi) * (g.adag(1) * g.adag(2)) + (-1j * xi.conjugate()) * (g.a(1) * g.a(2))
    )


def _gen_csum(params):
    lam = params[0]
    return (1j * lam / 2) * (
        g.pauli("Z", 0) * ((g.a(1) + g.adag(1)) * (g.adag(2) - g.a(2)))
    )


# ---------------------------------------------------------------------------
# DV gates
# ---------------------------------------------------------------------------

def _const_matrix(values):
    import numpy as np

    arr = np.array(values, dtype=complex)
    return lambda params, dims: arr.copy()


_SQ2 = 1 / math.sqrt(2)
_H_MAT = [[_SQ2, _SQ2], [_SQ2, -_SQ2]]
_CNOT_MAT = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]


def _gen_rx(params):
    return (params[0] / 2) * g.pauli("X", 0)


def _gen_ry(params):
    return (params[0] / 2) * g.pauli("Y", 0)


def _gen_rz(params):
    return (params[0] / 2) * g.pauli("Z", 0)


def _explicit_identity(params, dims):
    import numpy as np

    return np.eye(int(np.prod(dims)) if dims else 1, dtype=complex)


_M = all_of  # signature helper: all_of(QUMODE, n) etc.


def _sig(*types) -> TypeSignature:
    return tuple(enumerate(types))


def _register_all():
    # CV gates
    register(GateDef("D", 1, (("r", REAL), ("phi", ANGLE)), generator=_gen_d,
                     signature=_sig(QUMODE), scale_param=0, qasm_name="cv_d", cv_class=True))
    register(GateDef("R", 1, (("theta", ANGLE),), generator=_gen_r,
                     signature=_sig(QUMODE), scale_param=0, qasm_name="cv_r", cv_class=True))
    register(GateDef("F", 1, (), generator=_gen_f, signature=None,
                     decomposition_refs=("1",), qasm_name="cv_f", cv_class=True))
    register(GateDef("S", 1, (("r", REAL), ("phi", ANGLE)), generator=_gen_s,
                     signature=_sig(QUMODE), scale_param=0, qasm_name="cv_s", cv_class=True))
    register(GateDef("K", 1, (("kappa", ANGLE),), generator=_gen_k,
                     signature=_sig(QUMODE), scale_param=0, qasm_name="cv_k", cv_class=True))
    register(GateDef("CubicPhase", 1, (("r", REAL),), generator=_gen_cubic,
                     signature=_sig(QUMODE), scale_param=0, qasm_name="cv_cubic", cv_class=True))
    register(GateDef("SNAP", 1, (("phis", VECTOR),), explicit=_explicit_snap,
                     signature=None, decomposition_refs=("10",), scale_param=0,
                     qasm_name="cv_snap", cv_class=True))
    register(GateDef("BS", 2, (("theta", ANGLE), ("phi", ANGLE)), generator=_gen_bs,
                     signature=_sig(QUMODE, QUMODE), scale_param=0, qasm_name="cv_bs",
                     cv_class=True))
    register(GateDef("ModeSwap", 2, (), explicit=_explicit_modeswap, signature=None,
                     decomposition_refs=("2",), involution=True, qasm_name="cv_modeswap",
                     cv_class=True))
    register(GateDef("TMS", 2, (("r", REAL), ("phi", ANGLE)), generator=_gen_tms,
                     signature=_sig(QUMODE, QUMODE), scale_param=0, qasm_name="cv_tms",
                     cv_class=True))
    register(GateDef("SUM", 2, (("lam", REAL),), generator=_gen_sum,
                     signature=_sig(QUMODE, QUMODE), scale_param=0, qasm_name="cv_sum",
                     cv_class=True))

    # hybrid gates
    register(GateDef("CR", 2, (("theta", ANGLE),), generator=_gen_cr,
                     signature=None, decomposition_refs=("4",), scale_param=0,
                     qasm_name="cv_cr"))
    register(GateDef("CP", 2, (), generator=_gen_cp,
                     signature=None, decomposition_refs=("5",), qasm_name="cv_cp"))
    register(GateDef("CD", 2, (("r", REAL), ("phi", ANGLE)), generator=_gen_cd,
                     signature=None, decomposition_refs=("3", "11"), scale_param=0,
                     qasm_name="cv_cd"))
    register(GateDef("CS", 2, (("r", REAL), ("phi", ANGLE)), generator=_gen_cs,
                     signature=None, decomposition_refs=("6",), scale_param=0,
                     qasm_name="cv_cs"))
    register(GateDef("SQR", 2, (("thetas", VECTOR), ("phis", VECTOR)), explicit=_explicit_sqr,
                     signature=_sig(QUBIT, QUMODE), scale_param=0, qasm_name="cv_sqr"))
    register(GateDef("JC", 2, (("theta", ANGLE), ("phi", ANGLE)), generator=_gen_jc,
                     signature=_sig(QUBIT, QUMODE), scale_param=0, qasm_name="cv_jc"))
    register(GateDef("AJC", 2, (("theta", ANGLE), ("phi", ANGLE)), generator=_gen_ajc,
                     signature=_sig(QUBIT, QUMODE), scale_param=0, qasm_name="cv_ajc"))
    register(GateDef("RB", 2, (("r", REAL), ("phi", ANGLE)), generator=_gen_rb,
                     signature=_sig(QUBIT, QUMODE), scale_param=0, qasm_name="cv_rb"))
    register(GateDef("xCD", 2, (("r", REAL), ("phi", ANGLE)), generator=_gen_xcd,
                     signature=_sig(QUBIT, QUMODE), scale_param=0, qasm_name="cv_xcd"))
    register(GateDef("CBS", 3, (("theta", ANGLE), ("phi", ANGLE)), generator=_gen_cbs,
                     signature=None, decomposition_refs=("7", "11"), scale_param=0,
                     qasm_name="cv_cbs"))
    register(GateDef("CTMS", 3, (("r", REAL), ("phi", ANGLE)), generator=_gen_ctms,
                     signature=None, decomposition_refs=("8", "11"), scale_param=0,
                     qasm_name="cv_ctms"))
    register(GateDef("CSUM", 3, (("lam", REAL),), generator=_gen_csum,
                     signature=None, decomposition_refs=("9",), scale_param=0,
                     qasm_name="cv_csum"))

    # DV gates needed by the decompositions
    register(GateDef("H", 1, (), explicit=_const_matrix(_H_MAT),
                     signature=_sig(QUBIT), involution=True, qasm_name="h"))
    register(GateDef("X", 1, (), explicit=_const_matrix([[0, 1], [1, 0]]),
                     signature=_sig(QUBIT), involution=True, qasm_name="x"))
    register(GateDef("Y", 1, (), explicit=_const_matrix([[0, -1j], [1j, 0]]),
                     signature=_sig(QUBIT), involution=True, qasm_name="y"))
    register(GateDef("Z", 1, (), explicit=_const_matrix([[1, 0], [0, -1]]),
                     signature=_sig(QUBIT), involution=True, qasm_name="z"))
    register(GateDef("SGate", 1, (), explicit=_const_matrix([[1, 0], [0, 1j]]),
                     signature=_sig(QUBIT), adjoint_gate="SdgGate", qasm_name="s"))
    register(GateDef("SdgGate", 1, (), explicit=_const_matrix([[1, 0], [0, -1j]]),
                     signature=_sig(QUBIT), adjoint_gate="SGate", qasm_name="sdg"))
    register(GateDef("RX", 1, (("theta", ANGLE),), generator=_gen_rx,
                     signature=_sig(QUBIT), scale_param=0, qasm_name="rx"))
    register(GateDef("RY", 1, (("theta", ANGLE),), generator=_gen_ry,
                     signature=_sig(QUBIT), scale_param=0, qasm_name="ry"))
    register(GateDef("RZ", 1, (("theta", ANGLE),), generator=_gen_rz,
                     signature=_sig(QUBIT), scale_param=0, qasm_name="rz"))
    register(GateDef("CNOT", 2, (), explicit=_const_matrix(_CNOT_MAT),
                     signature=_sig(QUBIT, QUBIT), involution=True, qasm_name="cx"))

    register(GateDef(IDENTITY, None, (), explicit=_explicit_identity, signature=_sig()))


_register_all()

_SIM_NATIVE = tuple(
    n for n, d in GATES.items()
    if n != IDENTITY and (d.generator is not None or d.explicit is not None)
)
_QSCOUT_NATIVE = ("RZ", "RY", "RX", "CNOT", "xCD")


def enumerate_gateset(name: str) -> frozenset[str]:
    """Named target gate sets, or a JSON file {"name": ..., "gates": [...]}."""
    if name == "sim-native":
        return frozenset(_SIM_NATIVE)
    if name == "qscout-native":
        return frozenset(_QSCOUT_NATIVE)
    if name == "full":
        return frozenset(n for n in GATES if n != IDENTITY)
    if name.endswith(".json"):
        with open(name) as fh:
            doc = json.load(fh)
        missing = [t for t in doc["gates"] if t not in GATES]
        if missing:
            raise UnknownGateError(missing[0], GATES.keys())
        return frozenset(doc["gates"])
    raise ValueError(
        f"unknown gate set {name!r}; expected full, sim-native, qscout-native or a .json path"
    )


# ---------------------------------------------------------------------------
# instruction builders
# ---------------------------------------------------------------------------

def _instr(name, params, wires):
    ws = tuple(wires) if isinstance(wires, (list, tuple)) else (wires,)
    return GateInstruction(name, tuple(params), ws)


def D(r, phi, wire):
    return _instr("D", (r, phi), wire)


def R(theta, wire):
    return _instr("R", (theta,), wire)


def F(wire):
    return _instr("F", (), wire)


def S(r, phi, wire):
    return _instr("S", (r, phi), wire)


def K(kappa, wire):
    return _instr("K", (kappa,), wire)


def CubicPhase(r, wire):
    return _instr("CubicPhase", (r,), wire)


def SNAP(phis, wire):
    return _instr("SNAP", (tuple(phis),), wire)


def BS(theta, phi, wires):
    return _instr("BS", (theta, phi), wires)


def ModeSwap(wires):
    return _instr("ModeSwap", (), wires)


def TMS(r, phi, wires):
    return _instr("TMS", (r, phi), wires)


def SUM(lam, wires):
    return _instr("SUM", (lam,), wires)


def CR(theta, wires):
    return _instr("CR", (theta,), wires)


def CP(wires):
    return _instr("CP", (), wires)


def CD(r, phi, wires):
    return _instr("CD", (r, phi), wires)


def CS(r, phi, wires):
    return _instr("CS", (r, phi), wires)


def SQR(thetas, phis, wires):
    return _instr("SQR", (tuple(thetas), tuple(phis)), wires)


def JC(theta, phi, wires):
    return _instr("JC", (theta, phi), wires)


def AJC(theta, phi, wires):
    return _instr("AJC", (theta, phi), wires)


def RB(r, phi, wires):
    return _instr("RB", (r, phi), wires)


def xCD(r, phi, wires):
    return _instr("xCD", (r, phi), wires)


def CBS(theta, phi, wires):
    return _instr("CBS", (theta, phi), wires)


def CTMS(r, phi, wires):
    return _instr("CTMS", (r, phi), wires)


def CSUM(lam, wires):
    return _instr("CSUM", (lam,), wires)


def H(wire):
    return _instr("H", (), wire)


def X(wire):
    return _instr("X", (), wire)


def Y(wire):
    return _instr("Y", (), wire)


def Z(wire):
    return _instr("Z", (), wire)


def SGate(wire):
    return _instr("SGate", (), wire)


def SdgGate(wire):
    return _instr("SdgGate", (), wire)


def RX(theta, wire):
    return _instr("RX", (theta,), wire)


def RY(theta, wire):
    return _instr("RY", (theta,), wire)


def RZ(theta, wire):
    return _instr("RZ", (theta,), wire)


def CNOT(wires):
    return _instr("CNOT", (), wires)
