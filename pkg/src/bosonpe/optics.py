"""Passive linear unitaries lifted to Fock sectors, and SSR measurements.

Convention, fixed once: a mode unitary u acts on states by the substitution

    a_i†  ->  sum_j u_ji a_j†

so the lift to the one-particle sector is the matrix u itself, and a
coherent spin state along psi maps to one along u @ psi.  For real u this
is the same as reading u as the Heisenberg action u_ij on creation
operators row by row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import (
    UNCAPPED,
    BlockDiagonalState,
    DeskCaps,
    DESK,
    ModePartition,
    PureSectorState,
    ValidationError,
    enumerate_basis,
    split_occupation,
)

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class ModeUnitary:
    """m x m unitary acting on the mode creation operators."""

    matrix: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValidationError(f"mode unitary must be square, got {u.shape}")
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > UNITARITY_TOL:
            raise ValidationError("matrix is not unitary within 1e-10")
        u.flags.writeable = False
        object.__setattr__(self, "matrix", u)

    @property
    def modes(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.matrix.conj().T)

    def __matmul__(self, other: "ModeUnitary") -> "ModeUnitary":
        return ModeUnitary(self.matrix @ other.matrix)


def identity_unitary(m: int) -> ModeUnitary:
    return ModeUnitary(np.eye(m))


def mode_unitary_to_json(u: ModeUnitary) -> str:
    import json
    return json.dumps({
        "modes": u.modes,
        "matrix": [[[float(x.real), float(x.imag)] for x in row] for row in u.matrix],
    })


def mode_unitary_from_json(text: str) -> ModeUnitary:
    import json
    try:
        doc = json.loads(text)
        mat = np.array([[complex(re, im) for re, im in row] for row in doc["matrix"]])
        if mat.shape != (int(doc["modes"]),) * 2:
            raise ValidationError("matrix shape disagrees with the mode count")
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed unitary JSON: {exc}") from exc
    return ModeUnitary(mat)


def block_direct_sum(*parts: ModeUnitary) -> ModeUnitary:
    mats = [p.matrix for p in parts]
    total = sum(m.shape[0] for m in mats)
    out = np.zeros((total, total), dtype=complex)
    at = 0
    for m in mats:
        d = m.shape[0]
        out[at:at + d, at:at + d] = m
        at += d
    return ModeUnitary(out)


@dataclass(frozen=True)
class BeamSplitterArray:
    """Parallel beam splitters with reflectivities r_i, t_i = sqrt(1 - r_i^2)."""

    reflectivities: tuple[float, ...]

    def __post_init__(self):
        r = tuple(float(x) for x in self.reflectivities)
        if any(x < 0 or x > 1 for x in r):
            raise ValidationError("reflectivities must lie in [0, 1]")
        object.__setattr__(self, "reflectivities", r)

    @property
    def transmissivities(self) -> tuple[float, ...]:
        return tuple(math.sqrt(1.0 - r * r) for r in self.reflectivities)

    def __len__(self) -> int:
        return len(self.reflectivities)


def balanced_array(m: int) -> BeamSplitterArray:
    return BeamSplitterArray((1.0 / math.sqrt(2.0),) * m)


def beam_splitter_unitary(bs: BeamSplitterArray) -> ModeUnitary:
    """2m-mode unitary coupling mode i of A with mode i of B.

    On states: a_i† -> r_i a_i† - t_i b_i†,  b_i† -> t_i a_i† + r_i b_i†,
    i.e. creation operators carry the blocks [[r, t], [-t, r]] in the
    Heisenberg row reading.  r=1 is the identity, r=0 swaps A and B up to sign.
    """
    m = len(bs)
    u = np.zeros((2 * m, 2 * m), dtype=complex)
    for i, (r, t) in enumerate(zip(bs.reflectivities, bs.transmissivities)):
        u[i, i] = r
        u[i, m + i] = t
        u[m + i, i] = -t
        u[m + i, m + i] = r
    return ModeUnitary(u)


def lift_unitary(u: ModeUnitary, N: int, caps: DeskCaps = DESK) -> np.ndarray:
    """Unitary on the (m, N) sector induced by the mode substitution.

    Column for input occupation n is the expansion of
    prod_i (sum_j u_ji a_j†)^{n_i} |0> / sqrt(prod_i n_i!).
    """
    if N < 0:
        raise ValidationError("sector index must be nonnegative")
    m = u.modes
    basis = enumerate_basis(m, N, caps)
    index = basis.index
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    mat = u.matrix
    sqrt_fact = [math.sqrt(math.factorial(k)) for k in range(N + 1)]
    for col, occ in enumerate(basis.states):
        # polynomial in the a_j†, keyed by occupation vector
        poly = {(0,) * m: 1.0 + 0j}
        for i, n_i in enumerate(occ):
            for _ in range(n_i):
                nxt: dict[tuple, complex] = {}
                for key, c in poly.items():
                    for j in range(m):
                        cj = mat[j, i]
                        if cj == 0:
                            continue
                        k2 = list(key)
                        k2[j] += 1
                        k2 = tuple(k2)
                        nxt[k2] = nxt.get(k2, 0.0) + c * cj
                poly = nxt
        norm_in = 1.0
        for n_i in occ:
            norm_in *= sqrt_fact[n_i]
        for key, c in poly.items():
            w = c / norm_in
            for q in key:
                w *= sqrt_fact[q]
            out[index(key), col] = w
    return out


def apply_mode_unitary(state: BlockDiagonalState, u: ModeUnitary,
                       caps: DeskCaps = DESK) -> BlockDiagonalState:
    """Apply the sector lift of u to every block; weights are unchanged."""
    if u.modes != state.modes:
        raise ValidationError(f"unitary on {u.modes} modes, state on {state.modes}")
    blocks = {}
    for N, (p, mat) in state.blocks.items():
        U = lift_unitary(u, N, caps=UNCAPPED)
        blocks[N] = (p, U @ mat @ U.conj().T)
    return BlockDiagonalState(state.modes, blocks, caps=UNCAPPED)


def apply_to_pure(s: PureSectorState, u: ModeUnitary) -> PureSectorState:
    if u.modes != s.modes:
        raise ValidationError("mode count mismatch")
    U = lift_unitary(u, s.particles, caps=UNCAPPED)
    amps = U @ s.amplitudes
    amps = amps / np.linalg.norm(amps)
    return PureSectorState(s.basis, amps)


def append_vacuum(state: BlockDiagonalState, k: int,
                  caps: DeskCaps = DESK) -> BlockDiagonalState:
    """Append k modes in the vacuum; blocks change only by re-indexing."""
    if k < 1:
        raise ValidationError("must append at least one mode")
    m = state.modes
    pad = (0,) * k
    blocks = {}
    for N, (p, mat) in state.blocks.items():
        old = enumerate_basis(m, N, UNCAPPED)
        new = enumerate_basis(m + k, N, caps)
        idx = [new.index(occ + pad) for occ in old.states]
        big = np.zeros((new.dim, new.dim), dtype=complex)
        big[np.ix_(idx, idx)] = mat
        blocks[N] = (p, big)
    return BlockDiagonalState(m + k, blocks, caps=caps)


def measure_total_number(state: BlockDiagonalState) -> dict:
    """Projective number measurement: N -> (p_N, conditional state)."""
    return {
        N: (p, BlockDiagonalState(state.modes, {N: (1.0, mat)}, caps=UNCAPPED))
        for N, (p, mat) in state.blocks.items()
    }


@dataclass(frozen=True)
class TruncatedFockSpace:
    """All occupations of m modes with total particle number <= n_max,
    ordered by sector then canonically within each sector."""

    modes: int
    n_max: int

    @property
    def states(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for N in range(self.n_max + 1):
            out.extend(enumerate_basis(self.modes, N, UNCAPPED).states)
        return tuple(out)

    @property
    def dim(self) -> int:
        return len(self.states)

    def sector_slices(self) -> dict[int, slice]:
        out = {}
        at = 0
        for N in range(self.n_max + 1):
            d = enumerate_basis(self.modes, N, UNCAPPED).dim
            out[N] = slice(at, at + d)
            at += d
        return out


def validate_ssr_povm(space: TruncatedFockSpace, elements, tol: float = 1e-10):
    """Check POVM elements are PSD, complete, and commute with the number
    operator (no coherences between sectors)."""
    dim = space.dim
    slices = space.sector_slices()
    total = np.zeros((dim, dim), dtype=complex)
    for k, E in enumerate(elements):
        E = np.asarray(E, dtype=complex)
        if E.shape != (dim, dim):
            raise ValidationError(f"POVM element {k} has shape {E.shape}, expected {(dim, dim)}")
        if np.max(np.abs(E - E.conj().T)) > tol:
            raise ValidationError(f"POVM element {k} not Hermitian")
        if np.linalg.eigvalsh((E + E.conj().T) / 2).min() < -tol:
            raise ValidationError(f"POVM element {k} not PSD")
        off = E.copy()
        for sl in slices.values():
            off[sl, sl] = 0.0
        if np.max(np.abs(off)) > tol:
            raise ValidationError(
                f"POVM element {k} has coherences between particle-number sectors"
            )
        total += E
    if np.max(np.abs(total - np.eye(dim))) > 1e-8:
        raise ValidationError("POVM elements do not sum to the identity")


def measure_destructive(state: BlockDiagonalState, partition: ModePartition,
                        povm_elements, tol: float = 1e-10) -> dict:
    """Destructively measure the B modes with an SSR-respecting POVM.

    Elements act on the truncated B Fock space (total number up to the
    state's maximum).  Returns outcome -> (probability, post-state on the A
    modes); post-states are Tr_B[(1 ⊗ E_k) rho] / p_k.
    """
    partition.check_covers(state.modes)
    ma, mb = len(partition.a_modes), len(partition.b_modes)
    if mb == 0:
        raise ValidationError("destructive measurement needs at least one measured mode")
    n_max = state.max_particles
    space = TruncatedFockSpace(mb, n_max)
    validate_ssr_povm(space, povm_elements, tol=tol)
    b_index = {occ: i for i, occ in enumerate(space.states)}

    outcomes = {}
    for k, E in enumerate(povm_elements):
        E = np.asarray(E, dtype=complex)
        acc: dict[int, np.ndarray] = {}
        for N, (p, mat) in state.blocks.items():
            basis = enumerate_basis(state.modes, N, UNCAPPED)
            split = [split_occupation(occ, partition) for occ in basis.states]
            for i, (na_i, nb_i) in enumerate(split):
                for j, (na_j, nb_j) in enumerate(split):
                    if sum(na_i) != sum(na_j):
                        continue
                    w = E[b_index[nb_j], b_index[nb_i]]
                    if w == 0:
                        continue
                    ba = enumerate_basis(max(ma, 1), sum(na_i), UNCAPPED)
                    out = acc.setdefault(sum(na_i), np.zeros((ba.dim, ba.dim), dtype=complex))
                    out[ba.index(na_i if ma else (0,)), ba.index(na_j if ma else (0,))] += \
                        p * mat[i, j] * w
        prob = sum(np.trace(mat).real for mat in acc.values())
        if prob < 1e-14:
            continue
        blocks = {}
        for na, mat in acc.items():
            w = np.trace(mat).real
            if w > 1e-14:
                blocks[na] = (w / prob, mat / w)
        outcomes[k] = (prob, BlockDiagonalState(max(ma, 1), blocks, caps=UNCAPPED))
    return outcomes


def random_ssr_povm(modes: int, n_max: int, n_outcomes: int, seed) -> list[np.ndarray]:
    """Random SSR-respecting POVM built from Haar rank-1 projectors per sector,
    assigned to outcomes at random."""
    rng = np.random.default_rng(seed)
    space = TruncatedFockSpace(modes, n_max)
    elements = [np.zeros((space.dim, space.dim), dtype=complex) for _ in range(n_outcomes)]
    for N, sl in space.sector_slices().items():
        d = sl.stop - sl.start
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        q, _ = np.linalg.qr(z)
        owners = rng.integers(0, n_outcomes, size=d)
        for col, owner in enumerate(owners):
            v = q[:, col]
            elements[owner][sl, sl] += np.outer(v, v.conj())
    return elements
