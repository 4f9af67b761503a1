"""Small dense complex-matrix engine with named subsystems.

Everything here is desk scale (total dimension up to ~128): pure states and
density matrices carry an ordered list of subsystem labels so partial traces
are requested by name rather than by position.  On top of the generic pieces
sit the joint-state constructors for the two backward-line protocol variants
that carry the encrypted message on the quantum channel -- variant 2c
(measure, then re-prepare in the same basis) and variant 2d (skip the
measurement and apply a message-controlled Pauli pair) -- plus the numerical
certificate that their marginals coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ATOL_BUILD",
    "ATOL_EQUIV",
    "PureState",
    "DensityMatrix",
    "BasisDecomposition",
    "pauli",
    "basis_ket",
    "projector",
    "tensor",
    "partial_trace",
    "decompose",
    "build_2c_state",
    "build_2d_state",
    "verify_2c_2d",
    "random_pure_state",
]

ATOL_BUILD = 1e-12
ATOL_EQUIV = 1e-10

_SQRT_HALF = 1.0 / math.sqrt(2.0)

_PAULI = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PAULI["Y"] = 1j * _PAULI["X"] @ _PAULI["Z"]

_KETS = {
    ("z", 0): np.array([1, 0], dtype=complex),
    ("z", 1): np.array([0, 1], dtype=complex),
    ("x", 0): np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex),
    ("x", 1): np.array([_SQRT_HALF, -_SQRT_HALF], dtype=complex),
    ("y", 0): np.array([_SQRT_HALF, 1j * _SQRT_HALF], dtype=complex),
    ("y", 1): np.array([_SQRT_HALF, -1j * _SQRT_HALF], dtype=complex),
}


def pauli(name: str) -> np.ndarray:
    """The 2x2 Pauli matrix I, X, Y, or Z."""
    try:
        return _PAULI[name].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli {name!r}") from None


def basis_ket(bit: int, basis: str) -> np.ndarray:
    """Eigenstate |bit_basis> for basis in {x, y, z}."""
    try:
        return _KETS[(basis, bit)].copy()
    except KeyError:
        raise ValueError(f"unknown basis state ({bit}, {basis!r})") from None


@dataclass(frozen=True)
class PureState:
    """Normalized state vector over ordered, named subsystems."""

    amps: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=complex)
        object.__setattr__(self, "amps", amps)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a vector")
        if math.prod(self.dims) != amps.shape[0]:
            raise ValueError("product of dims does not match vector length")
        if len(self.dims) != len(self.labels):
            raise ValueError("dims and labels must align")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate subsystem labels")
        if abs(np.linalg.norm(amps) - 1.0) > ATOL_BUILD:
            raise ValueError("state is not normalized")

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @classmethod
    def from_amplitudes(cls, amps, dims, labels) -> "PureState":
        return cls(np.asarray(amps, dtype=complex), tuple(dims), tuple(labels))

    @classmethod
    def qubit(cls, bit: int, basis: str, label: str = "A") -> "PureState":
        return cls(basis_ket(bit, basis), (2,), (label,))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator with labels."""

    mat: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", mat)
        d = math.prod(self.dims)
        if mat.shape != (d, d):
            raise ValueError("matrix shape does not match dims")
        if len(self.dims) != len(self.labels):
            raise ValueError("dims and labels must align")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate subsystem labels")
        if np.abs(mat - mat.conj().T).max() > ATOL_BUILD:
            raise ValueError("matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > ATOL_BUILD or abs(np.trace(mat).imag) > ATOL_BUILD:
            raise ValueError("trace is not 1")
        if np.linalg.eigvalsh(mat).min() < -1e-10:
            raise ValueError("matrix is not positive semidefinite")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def projector(phi: PureState) -> DensityMatrix:
    """Rank-1 projector |phi><phi|."""
    mat = np.outer(phi.amps, phi.amps.conj())
    return DensityMatrix(mat, phi.dims, phi.labels)


def tensor(parts):
    """Tensor product of pure states or of density matrices (not mixed)."""
    parts = list(parts)
    if not parts:
        raise ValueError("tensor needs at least one factor")
    if all(isinstance(p, PureState) for p in parts):
        amps = parts[0].amps
        for p in parts[1:]:
            amps = np.kron(amps, p.amps)
        dims = tuple(d for p in parts for d in p.dims)
        labels = tuple(l for p in parts for l in p.labels)
        return PureState(amps, dims, labels)
    if all(isinstance(p, DensityMatrix) for p in parts):
        mat = parts[0].mat
        for p in parts[1:]:
            mat = np.kron(mat, p.mat)
        dims = tuple(d for p in parts for d in p.dims)
        labels = tuple(l for p in parts for l in p.labels)
        return DensityMatrix(mat, dims, labels)
    raise ValueError("cannot mix pure states and density matrices in tensor")


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every subsystem whose label is not in ``keep``.

    Kept subsystems stay in their original relative order.
    """
    keep = set([keep] if isinstance(keep, str) else keep)
    unknown = keep - set(rho.labels)
    if unknown:
        raise ValueError(f"unknown labels {sorted(unknown)}")
    k = len(rho.dims)
    kept_idx = [i for i, lbl in enumerate(rho.labels) if lbl in keep]
    t = rho.mat.reshape(rho.dims + rho.dims)
    sub = list(range(k)) + [k + i if i in kept_idx else i for i in range(k)]
    out = [i for i in kept_idx] + [k + i for i in kept_idx]
    reduced = np.einsum(t, sub, out)
    d = math.prod(rho.dims[i] for i in kept_idx)
    return DensityMatrix(
        reduced.reshape(d, d),
        tuple(rho.dims[i] for i in kept_idx),
        tuple(rho.labels[i] for i in kept_idx),
    )


def _leading_qubit_components(psi: PureState, basis: str):
    """Unnormalized remainder vectors <a_basis| psi for a = 0, 1.

    The first subsystem must be a qubit; the remainder keeps its own
    dims/labels.
    """
    if len(psi.dims) < 2:
        raise ValueError("state must have a remainder subsystem")
    if psi.dims[0] != 2:
        raise ValueError("leading subsystem must be a qubit")
    rest_dim = psi.dim // 2
    block = psi.amps.reshape(2, rest_dim)
    return [basis_ket(a, basis).conj() @ block for a in (0, 1)]


def decompose(psi: PureState, basis: str) -> "BasisDecomposition":
    """Split |psi> = sum_a lambda_a |a_basis> |e_a> over the leading qubit.

    The companions |e_a> are normalized (but generally not orthogonal); the
    weights are returned real and nonnegative with any phase absorbed into
    the companion.
    """
    comps = _leading_qubit_components(psi, basis)
    rest_dims = psi.dims[1:]
    rest_labels = psi.labels[1:]
    lambdas = []
    companions = []
    for vec in comps:
        lam = float(np.linalg.norm(vec))
        if lam > 0:
            companions.append(PureState(vec / lam, rest_dims, rest_labels))
        else:
            fallback = np.zeros(vec.shape[0], dtype=complex)
            fallback[0] = 1.0
            companions.append(PureState(fallback, rest_dims, rest_labels))
        lambdas.append(complex(lam))
    total = sum(abs(l) ** 2 for l in lambdas)
    if abs(total - 1.0) > ATOL_BUILD:
        raise ValueError("weights do not sum to 1")
    return BasisDecomposition(
        basis=basis,
        lambdas=(lambdas[0], lambdas[1]),
        companions=(companions[0], companions[1]),
    )


@dataclass(frozen=True)
class BasisDecomposition:
    basis: str
    lambdas: tuple[complex, complex]
    companions: tuple[PureState, PureState]

    def reassemble(self) -> PureState:
        parts = []
        for a in (0, 1):
            parts.append(
                self.lambdas[a]
                * np.kron(basis_ket(a, self.basis), self.companions[a].amps)
            )
        amps = parts[0] + parts[1]
        dims = (2,) + self.companions[0].dims
        labels = ("A",) + self.companions[0].labels
        return PureState(amps, dims, labels)


def build_2c_state(psi: PureState, basis: str) -> DensityMatrix:
    """Joint state of message register, carried qubit, and remainder for the
    measure-and-reprepare variant (2c).

    The leading qubit of ``psi`` is measured in ``basis`` (outcome a), a
    uniform message bit m is XORed on, and |(m^a)_basis> is re-prepared:

        rho = 1/2 sum_{a,m} P( |m>  |(m^a)_basis>  <a_basis|psi> )

    The remainder components are left unnormalized; their squared norms sum
    to one, so the result has unit trace.
    """
    comps = _leading_qubit_components(psi, basis)
    rest_dim = psi.dim // 2
    dim = 2 * 2 * rest_dim
    acc = np.zeros((dim, dim), dtype=complex)
    for a in (0, 1):
        for m in (0, 1):
            vec = np.kron(
                basis_ket(m, "z"),
                np.kron(basis_ket(m ^ a, basis), comps[a]),
            )
            acc += 0.5 * np.outer(vec, vec.conj())
    return DensityMatrix(acc, (2,) + psi.dims, ("M",) + psi.labels)


def build_2d_state(psi: PureState, op_order: str = "xz") -> DensityMatrix:
    """Joint state for the no-measurement variant (2d).

    Two uniform message bits (m1, m2) control a Pauli pair on the leading
    qubit; tracing nothing out this is

        rho = 1/4 sum_{m1,m2} P(|m1 m2>) (x) U |psi><psi| U+

    with U = X^m1 Z^m2 (``op_order="xz"``) or Z^m2 X^m1 (``"zx"``); the two
    orders give the same mixture because swapping contributes -1 twice.
    """
    if op_order not in ("xz", "zx"):
        raise ValueError("op_order must be 'xz' or 'zx'")
    rest_dim = psi.dim // 2
    if psi.dims[0] != 2:
        raise ValueError("leading subsystem must be a qubit")
    if len(psi.dims) < 2:
        raise ValueError("state must have a remainder subsystem")
    block = psi.amps.reshape(2, rest_dim)
    dim = 4 * psi.dim
    acc = np.zeros((dim, dim), dtype=complex)
    x, z = _PAULI["X"], _PAULI["Z"]
    for m1 in (0, 1):
        for m2 in (0, 1):
            if op_order == "xz":
                u = np.linalg.matrix_power(x, m1) @ np.linalg.matrix_power(z, m2)
            else:
                u = np.linalg.matrix_power(z, m2) @ np.linalg.matrix_power(x, m1)
            encoded = (u @ block).reshape(psi.dim)
            vec = np.kron(basis_ket(m1, "z"), np.kron(basis_ket(m2, "z"), encoded))
            acc += 0.25 * np.outer(vec, vec.conj())
    return DensityMatrix(acc, (2, 2) + psi.dims, ("M1", "M2") + psi.labels)


def verify_2c_2d(psi: PureState) -> tuple[float, float]:
    """Frobenius distances certifying that the 2d marginals match 2c.

    delta_z compares the M2-traced 2d state against the 2c state built in
    basis z (message register M1 standing in for M); delta_x does the same
    with M1 traced and basis x.  Both should vanish for every input state,
    independent of any preparation basis.
    """
    rho_2d = build_2d_state(psi)
    keep_rest = list(psi.labels)
    rho_m1 = partial_trace(rho_2d, ["M1"] + keep_rest)
    rho_m2 = partial_trace(rho_2d, ["M2"] + keep_rest)
    delta_z = float(np.linalg.norm(rho_m1.mat - build_2c_state(psi, "z").mat))
    delta_x = float(np.linalg.norm(rho_m2.mat - build_2c_state(psi, "x").mat))
    return delta_z, delta_x


def random_pure_state(dims, labels, rng: np.random.Generator) -> PureState:
    """Haar-ish random state: normalized complex Gaussian amplitudes."""
    d = math.prod(dims)
    amps = rng.normal(size=d) + 1j * rng.normal(size=d)
    amps /= np.linalg.norm(amps)
    return PureState(amps, tuple(dims), tuple(labels))
