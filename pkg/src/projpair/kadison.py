"""Diagonals of projections.

A candidate diagonal splits into the mass a of its sub-half entries and
the deficit b of its super-half entries; the sequence is the diagonal of
a projection iff a + b is infinite or a - b is an integer.  This module
decides that, constructs a witnessing projection for admissible
finite-deviation sequences by a Schur-Horn rotation chain, and identifies
the integer a - b with the essential codimension of the pair (p, q) where
q is the diagonal projection onto the coordinates above one half --
including the frame-transform route through the index of w* restricted
to ran(q) for an isometry w onto ran(p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .errors import (
    ConsistencyError,
    IndexObstruction,
    NotApplicableError,
    UnsupportedTailError,
    ValidationError,
)
from .operators import (
    TailPattern,
    TailedOperator,
    TailedProjection,
    essential_codimension,
    restricted_index,
)
from .spectral import hermitian_eigen
from .tolerances import ADMISSIBILITY_TOL, INT_SNAP_TOL, RANK_TOL

TAIL_ZEROS = "zeros"
TAIL_ONES = "ones"
TAIL_HALF = "half"


@dataclass(frozen=True)
class Declared:
    """Symbolic tail that only declares whether its a- and b-contributions
    are finite; declared-finite mass beyond the prefix is taken as zero."""

    a_finite: bool
    b_finite: bool


Tail = Union[str, Declared]


@dataclass(frozen=True)
class DiagonalSequence:
    """Finite prefix of values in [0, 1] plus a symbolic tail."""

    prefix: Tuple[float, ...]
    tail: Tail = TAIL_ZEROS

    def __post_init__(self):
        prefix = tuple(float(v) for v in self.prefix)
        object.__setattr__(self, "prefix", prefix)
        for v in prefix:
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"diagonal entries must lie in [0, 1], got {v}")
        if isinstance(self.tail, str) and self.tail not in (TAIL_ZEROS, TAIL_ONES, TAIL_HALF):
            raise ValidationError(f"unknown tail {self.tail!r}")

    def to_json(self):
        if not isinstance(self.tail, str):
            raise ValidationError("declared tails have no file representation")
        return {"prefix": list(self.prefix), "tail": self.tail}

    @staticmethod
    def from_json(obj) -> "DiagonalSequence":
        return DiagonalSequence(tuple(obj["prefix"]), obj["tail"])


@dataclass(frozen=True)
class KadisonReport:
    """Admissibility verdict for a candidate diagonal.

    ``integer`` is the snapped value of a - b when both sums are finite;
    ``defect`` is the distance of a - b to the nearest integer on rejection.
    """

    a: float
    b: float
    verdict: str                 # "admissible" | "rejected"
    defect: Optional[float] = None
    integer: Optional[int] = None

    @property
    def admissible(self) -> bool:
        return self.verdict == "admissible"

    def to_json(self):
        enc = lambda v: "inf" if v == math.inf else v
        out = {"a": enc(self.a), "b": enc(self.b), "verdict": self.verdict}
        if self.defect is not None:
            out["defect"] = self.defect
        if self.integer is not None:
            out["integer"] = self.integer
        return out


def ab_sums(d: DiagonalSequence) -> Tuple[float, float]:
    """a = sum of entries <= 1/2, b = sum of (1 - entry) over entries > 1/2.

    The boundary value 1/2 belongs to the a-sum.  Zeros tails add nothing
    to a, ones tails nothing to b; an all-half tail is reported as (inf, inf),
    the infinite branch.
    """
    a = sum(v for v in d.prefix if v <= 0.5)
    b = sum(1.0 - v for v in d.prefix if v > 0.5)
    if d.tail == TAIL_HALF:
        return math.inf, math.inf
    if isinstance(d.tail, Declared):
        if not d.tail.a_finite:
            a = math.inf
        if not d.tail.b_finite:
            b = math.inf
    return a, b


def check_diagonal(d: DiagonalSequence, tol: float = ADMISSIBILITY_TOL) -> KadisonReport:
    """Admissible iff a + b is infinite or a - b is an integer within tol."""
    a, b = ab_sums(d)
    if math.isinf(a) or math.isinf(b):
        return KadisonReport(a=a, b=b, verdict="admissible")
    diff = a - b
    nearest = round(diff)
    defect = abs(diff - nearest)
    if defect <= tol:
        return KadisonReport(a=a, b=b, verdict="admissible", integer=int(nearest))
    return KadisonReport(a=a, b=b, verdict="rejected", defect=defect)


# ---------------------------------------------------------------------------
# Schur-Horn constructor

def _rotate_sym(a: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    """Conjugate a real symmetric matrix in place by the (i, j) rotation
    with first row (c, s)."""
    ri = c * a[i, :] + s * a[j, :]
    rj = -s * a[i, :] + c * a[j, :]
    a[i, :], a[j, :] = ri, rj
    ci = c * a[:, i] + s * a[:, j]
    cj = -s * a[:, i] + c * a[:, j]
    a[:, i], a[:, j] = ci, cj


def _swap_sym(a: np.ndarray, i: int, j: int) -> None:
    a[[i, j], :] = a[[j, i], :]
    a[:, [i, j]] = a[:, [j, i]]


def prescribed_diagonal_block(targets) -> np.ndarray:
    """Real symmetric projection with the given diagonal.

    Requires entries in [0, 1] with an integer sum: the classical finite
    Schur-Horn setting for a 0/1 spectrum.  Starting from a 0/1 diagonal
    seed of the same trace, one plane rotation per coordinate pins each
    target value exactly; O(n^2) arithmetic total.
    """
    targets = np.asarray(targets, dtype=float)
    n = len(targets)
    if n == 0:
        return np.zeros((0, 0))
    total = float(np.sum(targets))
    rank = int(round(total))
    if abs(total - rank) > 1e-6:
        raise ValidationError(f"target diagonal sums to {total}, not an integer")
    if not 0 <= rank <= n:
        raise ValidationError("integer trace outside [0, n]")

    order = np.argsort(-targets, kind="stable")
    goals = targets[order]
    a = np.zeros((n, n))
    for i in range(rank):
        a[i, i] = 1.0
    # slots < k are finished; unfinished slots stay mutually diagonal
    for k in range(n):
        t = goals[k]
        pool = np.real(np.diagonal(a)[k:])
        exact = np.where(np.abs(pool - t) <= 1e-12)[0]
        if exact.size:
            j = k + int(exact[0])
            if j != k:
                _swap_sym(a, k, j)
            a[k, k] = t
            continue
        above = [(v, i) for i, v in enumerate(pool) if v > t]
        below = [(v, i) for i, v in enumerate(pool) if v < t]
        if not above or not below:
            raise ValidationError("majorization invariant violated; "
                                  "target diagonal is not realizable")
        v_hi, i_hi = min(above)
        v_lo, i_lo = max(below)
        j_hi, j_lo = k + i_hi, k + i_lo
        if j_hi != k:
            if j_lo == k:
                _swap_sym(a, k, j_hi)
                j_lo = j_hi
            else:
                _swap_sym(a, k, j_hi)
        c = math.sqrt((t - v_lo) / (v_hi - v_lo))
        s = math.sqrt(1.0 - c * c)
        _rotate_sym(a, k, j_lo, c, s)
        a[k, k] = t

    # undo the sorting permutation
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[order[i], order[j]] = a[i, j]
    return out


def construct_projection(d: DiagonalSequence,
                         tol: float = ADMISSIBILITY_TOL) -> TailedProjection:
    """Projection whose diagonal is ``d``, for admissible finite-deviation
    sequences (zeros or ones tails).

    Raises IndexObstruction with the defect when the sequence is rejected,
    UnsupportedTail for half/declared tails (the infinite branch is decidable
    but not finitely representable).
    """
    if d.tail not in (TAIL_ZEROS, TAIL_ONES):
        raise UnsupportedTailError(f"cannot construct a projection for tail {d.tail!r}")
    report = check_diagonal(d, tol)
    if not report.admissible:
        raise IndexObstruction(report.defect,
                               f"a - b = {report.a - report.b} is not an integer "
                               f"(defect {report.defect:.6g})")
    block = prescribed_diagonal_block(np.array(d.prefix))
    bit = 1 if d.tail == TAIL_ONES else 0
    return TailedProjection(block.astype(np.complex128),
                            TailPattern.constant(bit, len(d.prefix)))


# ---------------------------------------------------------------------------
# a - b as an essential codimension

def projection_ab(p: TailedProjection) -> Tuple[float, float]:
    """The a, b sums of the diagonal of a tailed projection.

    Tail bits contribute nothing (0 to a, 0 to b), so both sums are finite
    exact block/exception sums.
    """
    a = b = 0.0
    for v in p.block_diagonal():
        if v <= 0.5:
            a += float(v)
        else:
            b += 1.0 - float(v)
    # exceptional tail bits are exactly 0 or 1: no contribution either way
    return a, b


def threshold_projection(p: TailedProjection) -> TailedProjection:
    """Diagonal projection onto the coordinates where diag(p) exceeds 1/2."""
    bits = [1 if v > 0.5 else 0 for v in p.block_diagonal()]
    return TailedProjection.diagonal(p.tail, prefix_bits=bits)


def ess_codim_from_diagonal(p: TailedProjection,
                            rank_tol: float = RANK_TOL) -> Tuple[int, KadisonReport]:
    """Index of (p, q) for q the super-half diagonal projection, checked
    against a - b.

    For tailed projections the tail diagonal is exactly 0/1, so a + b is
    always finite and the identification a - b = [p : q] applies.
    """
    a, b = projection_ab(p)
    if math.isinf(a + b):
        raise NotApplicableError("a + b is infinite; no integer to read off")
    q = threshold_projection(p)
    index = essential_codimension(p, q, rank_tol)
    diff = a - b
    if abs(diff - index) > INT_SNAP_TOL:
        raise ConsistencyError(f"a - b = {diff} does not match [p:q] = {index}")
    report = KadisonReport(a=a, b=b, verdict="admissible", integer=index)
    return index, report


def range_isometry(p: TailedProjection, rank_tol: float = RANK_TOL) -> TailedOperator:
    """Tailed isometry w with w w* = p, for p with an eventually all-ones
    pattern: block eigenvectors at eigenvalue 1 first, then the tail
    coordinates reached by an eventual shift."""
    if not all(p.tail.period):
        raise NotApplicableError("range enumeration of this pattern is not an eventual shift")
    w = max(p.window, p.tail.settle())
    pe = p.enlarged(w)
    es = hermitian_eigen(pe.block)
    tol = rank_tol * 2.0
    ones = np.abs(es.values - 1.0) <= tol
    zeros = np.abs(es.values) <= tol
    if int(ones.sum() + zeros.sum()) != w:
        raise ValidationError("block is not numerically a projection")
    rank = int(ones.sum())
    block = es.vectors[:, ones]          # (w, rank)
    return TailedOperator(block, w - rank, TailPattern.constant(1, rank))


def frame_index(p: TailedProjection, rank_tol: float = RANK_TOL) -> int:
    """a - b through the frame route: -idx(w*|_(q H)) for an isometry w onto
    ran(p) and q the super-half diagonal projection.

    Finite-rank p is handled through the complementary pair (the class only
    realizes shift-type isometries, so w must target a cofinite range);
    genuinely periodic patterns admit neither route and raise NotApplicable.
    """
    a, b = projection_ab(p)
    if math.isinf(a + b):
        raise NotApplicableError("a + b is infinite")
    q = threshold_projection(p)
    identity = TailedProjection.identity()
    if all(p.tail.period):
        w = range_isometry(p, rank_tol)
        return -restricted_index(w.adjoint(), q, identity)
    if not any(p.tail.period):
        w = range_isometry(p.complement(), rank_tol)
        return restricted_index(w.adjoint(), q.complement(), identity)
    raise NotApplicableError("range of p is not an eventual shift image; "
                             "no tailed isometry exists")
