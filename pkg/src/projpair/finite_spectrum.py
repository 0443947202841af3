"""Diagonals of self-adjoint operators with finite spectrum.

For z = sum a_j p_j with spectrum containing 0 and 1 (the normalized
endpoints) and a diagonal whose a, b sums are finite, the quantity
a - b - sum_{a_j != 1} a_j tr(p_j) is an integer: the essential codimension
of the eigenprojection at 1 against the super-half diagonal projection.
This module validates finite-spectrum operators in the tailed model,
evaluates that integer by both routes, and carries the positive-contraction
corner calculus used to prove the middle multiplicities finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .canonical import (
    Cardinal,
    DecayTail,
    IdealClass,
    ideal_pow,
    s_in_ideal,
    SSpectrum,
)
from .errors import ValidationError
from .operators import TailPattern, TailedProjection, essential_codimension
from .spectral import hermitian_eigen
from .tolerances import INT_SNAP_TOL, RANK_TOL

_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class FiniteSpectrumOp:
    """Self-adjoint operator with finitely many eigenvalues in the tailed model.

    ``eigenvalues`` must contain 0 and 1 (the normalization endpoints);
    eigenprojections are mutually orthogonal tailed projections resolving
    the identity exactly on the block and on the tail.
    """

    eigenvalues: Tuple[float, ...]
    projections: Tuple[TailedProjection, ...]

    def __post_init__(self):
        eigenvalues = tuple(float(a) for a in self.eigenvalues)
        object.__setattr__(self, "eigenvalues", eigenvalues)
        projections = tuple(self.projections)
        object.__setattr__(self, "projections", projections)
        if len(eigenvalues) != len(projections):
            raise ValidationError("one projection per eigenvalue required")
        if len(set(eigenvalues)) != len(eigenvalues):
            raise ValidationError("eigenvalues must be distinct")
        if 0.0 not in eigenvalues or 1.0 not in eigenvalues:
            raise ValidationError("spectrum must contain the normalized endpoints 0 and 1")
        self._validate_resolution()

    def _validate_resolution(self):
        w = self.window()
        if w > 0:
            total = np.zeros((w, w), dtype=np.complex128)
            mats = [p.to_matrix(w) for p in self.projections]
            for i, mi in enumerate(mats):
                total += mi
                for mj in mats[i + 1:]:
                    if np.linalg.norm(mi @ mj, 2) > _ORTHO_TOL:
                        raise ValidationError("eigenprojections are not mutually orthogonal")
            if np.linalg.norm(total - np.eye(w), 2) > _ORTHO_TOL:
                raise ValidationError("eigenprojections do not resolve the identity on the block")
        span = 1
        for p in self.projections:
            span = span * len(p.tail.period) // math.gcd(span, len(p.tail.period))
        for i in range(span):
            n = w + i
            bits = [p.tail.bit(n) for p in self.projections]
            if sum(bits) != 1:
                raise ValidationError(f"tail index {n} is not assigned to exactly one eigenvalue")

    def window(self) -> int:
        return max(max(p.window, p.tail.settle()) for p in self.projections)

    def index_of_one(self) -> int:
        return self.eigenvalues.index(1.0)

    def index_of_zero(self) -> int:
        return self.eigenvalues.index(0.0)

    def to_matrix(self, n: int) -> np.ndarray:
        out = np.zeros((n, n), dtype=np.complex128)
        for a, p in zip(self.eigenvalues, self.projections):
            out += a * p.to_matrix(n)
        return out

    def tail_value_index(self, n: int) -> int:
        """Which eigenvalue occupies tail coordinate ``n``."""
        for j, p in enumerate(self.projections):
            if n >= p.tail.start and p.tail.bit(n):
                return j
        raise ValidationError(f"tail index {n} unassigned")

    def block_diagonal(self) -> np.ndarray:
        w = self.window()
        return np.real(np.diagonal(self.to_matrix(w))).copy()


@dataclass(frozen=True)
class BJReport:
    """Finiteness and integrality report for a finite-spectrum diagonal."""

    a: float
    b: float
    middle_mults: Tuple[Cardinal, ...]
    integer: Optional[int]
    esscodim: Optional[int]
    consistent: bool
    applicable: bool
    note: str = ""

    def to_json(self):
        enc = lambda v: "inf" if v == math.inf else v
        return {
            "a": enc(self.a),
            "b": enc(self.b),
            "middle_mults": [m.to_json() for m in self.middle_mults],
            "integer": self.integer,
            "esscodim": self.esscodim,
            "consistent": self.consistent,
            "applicable": self.applicable,
            "note": self.note,
        }


def _diagonal_sums(z: FiniteSpectrumOp) -> Tuple[float, float, bool]:
    """a, b sums of the diagonal of z; third value False when a + b diverges
    (some periodic tail slot carries an eigenvalue other than 0 or 1)."""
    i0, i1 = z.index_of_zero(), z.index_of_one()
    w = z.window()
    span = 1
    for p in z.projections:
        span = span * len(p.tail.period) // math.gcd(span, len(p.tail.period))
    for i in range(span):
        j = z.tail_value_index(w + i)
        if j not in (i0, i1):
            return math.inf, math.inf, False
    a = b = 0.0
    for v in z.block_diagonal():
        if v <= 0.5:
            a += float(v)
        else:
            b += 1.0 - float(v)
    return a, b, True


def super_half_projection(z: FiniteSpectrumOp) -> TailedProjection:
    """Diagonal projection onto the coordinates where diag(z) exceeds 1/2.

    Beyond the unified window the diagonal takes eigenvalue values, and once
    a + b is finite a value exceeds 1/2 exactly on the eigenvalue-1 pattern.
    """
    w = z.window()
    bits = [1 if v > 0.5 else 0 for v in z.block_diagonal()]
    tail = z.projections[z.index_of_one()].tail.rebased(w)
    return TailedProjection.diagonal(tail, prefix_bits=bits)


def bj_analyze(z: FiniteSpectrumOp, rank_tol: float = RANK_TOL) -> BJReport:
    """Evaluate the finite-spectrum integer and its index identification.

    Middle multiplicities (eigenvalues strictly between 0 and 1) must come
    out finite whenever a + b is finite; the integer
    a - b - sum_{a_j != 1} a_j tr(p_j) must equal the essential codimension
    of (p_1, q).  The convention 0 * inf = 0 applies to the eigenvalue-0 term.
    """
    a, b, finite = _diagonal_sums(z)
    middle_mults = tuple(z.projections[j].trace()
                         for j in range(len(z.eigenvalues))
                         if 0.0 < z.eigenvalues[j] < 1.0)
    if not finite:
        return BJReport(a=a, b=b, middle_mults=middle_mults, integer=None,
                        esscodim=None, consistent=False, applicable=False,
                        note="a + b is infinite; the integrality statement does not apply")

    i1 = z.index_of_one()
    correction = 0.0
    for j, (val, proj) in enumerate(zip(z.eigenvalues, z.projections)):
        if j == i1 or val == 0.0:
            continue  # 0 * tr(p_0) = 0 by convention, even for infinite trace
        tr = proj.trace()
        if not tr.finite:
            return BJReport(a=a, b=b, middle_mults=middle_mults, integer=None,
                            esscodim=None, consistent=False, applicable=False,
                            note=f"eigenvalue {val} has infinite multiplicity")
        correction += val * int(tr)

    raw = a - b - correction
    nearest = int(round(raw))
    q = super_half_projection(z)
    idx = essential_codimension(z.projections[i1], q, rank_tol)
    integral = abs(raw - nearest) <= INT_SNAP_TOL
    consistent = integral and nearest == idx and all(m.finite for m in middle_mults)
    note = "" if consistent else (
        f"raw integer {raw} vs essential codimension {idx}"
        if integral else f"{raw} is not an integer")
    return BJReport(a=a, b=b, middle_mults=middle_mults,
                    integer=nearest if integral else None,
                    esscodim=idx, consistent=consistent, applicable=True, note=note)


def finite_rank_part_traces(z: FiniteSpectrumOp) -> Tuple[float, float]:
    """(sum_{a_j != 1} a_j tr(p_j),  tr(q y q) + tr(q' y q')) for
    y = z - p_1: the two sides of the finite-rank bookkeeping identity."""
    i1 = z.index_of_one()
    symbolic = 0.0
    for j, (val, proj) in enumerate(zip(z.eigenvalues, z.projections)):
        if j == i1 or val == 0.0:
            continue
        symbolic += val * int(proj.trace())
    w = z.window()
    span = 1
    for p in z.projections:
        span = span * len(p.tail.period) // math.gcd(span, len(p.tail.period))
    n = w + span + 4
    y = z.to_matrix(n) - z.projections[i1].to_matrix(n)
    qm = super_half_projection(z).to_matrix(n)
    qp = np.eye(n) - qm
    numeric = float(np.real(np.trace(qm @ y @ qm) + np.trace(qp @ y @ qp)))
    return symbolic, numeric


# ---------------------------------------------------------------------------
# Positive-contraction corner calculus

def spectral_cutoff(x, epsilon: float) -> np.ndarray:
    """x restricted to its spectrum in [0, epsilon]: eigendecompose, keep
    eigenvalues <= epsilon, zero the rest."""
    if not 0.0 < epsilon < 1.0:
        raise ValidationError("cutoff level must lie in (0, 1)")
    m = np.asarray(x, dtype=np.complex128)
    es = hermitian_eigen(m)
    if es.values.size and (es.values.min() < -RANK_TOL or es.values.max() > 1.0 + RANK_TOL):
        raise ValidationError("input is not a positive contraction")
    kept = np.where(es.values <= epsilon, np.clip(es.values, 0.0, None), 0.0)
    return (es.vectors * kept) @ es.vectors.conj().T


@dataclass(frozen=True)
class DiagonalModel:
    """Commuting diagonal pair: a positive contraction x and a projection q
    diagonal in the same basis.

    ``one_gap`` describes 1 - x along the pattern-1 coordinates, ``zero_mass``
    describes x along the pattern-0 coordinates (decay families as in the
    s-spectrum); None means the values match 0/1 exactly from some point on.
    """

    pattern: TailPattern
    prefix: Tuple[float, ...] = ()
    one_gap: DecayTail = None
    zero_mass: DecayTail = None

    def __post_init__(self):
        if self.pattern.start != len(self.prefix):
            raise ValidationError("prefix must reach exactly to the pattern start")
        for v in self.prefix:
            if not 0.0 <= float(v) <= 1.0:
                raise ValidationError("contraction values must lie in [0, 1]")


@dataclass(frozen=True)
class CornerVerdict:
    """Memberships and implications for the positive-contraction corner lemma."""

    hyp_q_corner: bool          # q - q x q in J
    hyp_perp_corner: bool       # q' x q' in J
    concl_sqrt: bool            # x - q in J^(1/2)
    concl_cutoff: bool          # x chi_[0, eps](x) in J
    forward_holds: bool         # hypotheses imply both conclusions
    converse_applicable: bool   # x a projection or J idempotent in the chain
    converse_holds: Optional[bool]


def _gap_in(tail: DecayTail, ideal: IdealClass) -> bool:
    return s_in_ideal(SSpectrum(head=(), tail=tail), ideal)


def contraction_corner_check(dm: DiagonalModel, ideal: IdealClass) -> CornerVerdict:
    """Decide the corner-membership hypotheses and conclusions for a
    commuting diagonal model.

    In the diagonal picture, q - q x q has values 1 - x_k on pattern-1
    coordinates and q' x q' has values x_k on pattern-0 coordinates, so
    each membership is a sequence-decay statement decided exactly.
    """
    hyp1 = _gap_in(dm.one_gap, ideal)
    hyp2 = _gap_in(dm.zero_mass, ideal)
    half = ideal_pow(ideal, 0.5)
    concl_sqrt = _gap_in(dm.one_gap, half) and _gap_in(dm.zero_mass, half)
    # cutoff at 1/2: pattern-1 values 1 - gap fall below 1/2 only finitely
    # often, so the cutoff sequence is the zero-mass part plus finite noise
    concl_cutoff = _gap_in(dm.zero_mass, ideal)
    forward = (not (hyp1 and hyp2)) or (concl_sqrt and concl_cutoff)
    is_projection = dm.one_gap is None and dm.zero_mass is None and \
        all(v in (0.0, 1.0) for v in dm.prefix)
    idempotent = ideal.kind in ("finite_rank", "compact")
    applicable = is_projection or idempotent
    converse = None
    if applicable:
        converse = (not (concl_sqrt and concl_cutoff)) or (hyp1 and hyp2)
    return CornerVerdict(
        hyp_q_corner=hyp1,
        hyp_perp_corner=hyp2,
        concl_sqrt=concl_sqrt,
        concl_cutoff=concl_cutoff,
        forward_holds=forward,
        converse_applicable=applicable,
        converse_holds=converse,
    )
