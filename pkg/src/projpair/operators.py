"""Concrete operator layer: dense and tailed models of projections, partial
isometries, and contractions on l2(N).

A tailed operator is a finite complex block glued to an exact structured
tail: column n >= window maps e_n to bit(n) * e_(n+shift), where the bits
form a periodic 0/1 pattern with finitely many exceptions.  The class is
closed under adjoints and composition, and every kernel/cokernel dimension
is computed exactly on a truncation because beyond the window the operator
is an exact isometric shift or zero.  That is what turns the essential
codimension of a projection pair into finite arithmetic.

Dense projections are plain Hermitian idempotent numpy arrays; tailed
projections are the shift-zero, idempotent-block special case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .canonical import Cardinal, CanonicalPair, INFINITY, SSpectrum
from .errors import (
    DefectPlacementError,
    IndexObstruction,
    NotFredholmError,
    NotTraceClassError,
    ValidationError,
)
from .spectral import eig_multiplicity, hermitian_eigen
from .tolerances import PROJECTION_TOL, RANK_TOL

_MARGIN = 8  # truncation margin beyond windows, exceptions and shifts


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


# ---------------------------------------------------------------------------
# Tail patterns

@dataclass(frozen=True)
class TailPattern:
    """Periodic 0/1 diagonal pattern with finitely many exceptions.

    ``bit(n)`` for n >= start is ``period[(n - start) % len(period)]``
    unless n is an exception index.  A single-entry period is the
    eventually-constant case; longer periods realize infinite, co-infinite
    patterns such as (1, 0).
    """

    start: int
    period: Tuple[int, ...]
    exceptions: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.start < 0:
            raise ValidationError("pattern start must be nonnegative")
        if not self.period or any(b not in (0, 1) for b in self.period):
            raise ValidationError("pattern period must be a nonempty bit tuple")
        seen = {}
        for n, b in self.exceptions:
            if n < self.start:
                raise ValidationError(f"exception index {n} below pattern start {self.start}")
            if b not in (0, 1):
                raise ValidationError("exception bits must be 0 or 1")
            if n in seen:
                raise ValidationError(f"duplicate exception index {n}")
            seen[n] = b
        # normalize: drop exceptions that agree with the period, sort
        kept = tuple(sorted((n, b) for n, b in self.exceptions if b != self.period_bit(n)))
        object.__setattr__(self, "exceptions", kept)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def constant(bit: int, start: int = 0, exceptions: Optional[Dict[int, int]] = None) -> "TailPattern":
        return TailPattern(start, (bit,), tuple((exceptions or {}).items()))

    @staticmethod
    def periodic(period: Sequence[int], start: int = 0,
                 exceptions: Optional[Dict[int, int]] = None) -> "TailPattern":
        return TailPattern(start, tuple(period), tuple((exceptions or {}).items()))

    # -- queries ------------------------------------------------------------

    def period_bit(self, n: int) -> int:
        return self.period[(n - self.start) % len(self.period)]

    def bit(self, n: int) -> int:
        if n < self.start:
            raise ValidationError(f"pattern undefined below start ({n} < {self.start})")
        for idx, b in self.exceptions:
            if idx == n:
                return b
        return self.period_bit(n)

    def settle(self) -> int:
        """First index beyond which the pattern is purely periodic."""
        if not self.exceptions:
            return self.start
        return max(n for n, _ in self.exceptions) + 1

    def ones(self) -> Cardinal:
        if any(self.period):
            return INFINITY
        return Cardinal(sum(b for _, b in self.exceptions))

    def zeros(self) -> Cardinal:
        if not all(self.period):
            return INFINITY
        return Cardinal(sum(1 - b for _, b in self.exceptions))

    def is_zero(self) -> bool:
        return self.ones() == Cardinal(0)

    # -- transforms ----------------------------------------------------------

    def flipped(self) -> "TailPattern":
        return TailPattern(self.start, tuple(1 - b for b in self.period),
                           tuple((n, 1 - b) for n, b in self.exceptions))

    def translated(self, delta: int) -> "TailPattern":
        """Pattern with bit'(n) = bit(n - delta)."""
        if self.start + delta < 0:
            raise ValidationError("translation would move the pattern below index 0")
        return TailPattern(self.start + delta, self.period,
                           tuple((n + delta, b) for n, b in self.exceptions))

    def rebased(self, new_start: int) -> "TailPattern":
        """Same bits from ``new_start`` on (entries below are dropped)."""
        if new_start <= self.start:
            return self
        rot = (new_start - self.start) % len(self.period)
        period = self.period[rot:] + self.period[:rot]
        exceptions = tuple((n, b) for n, b in self.exceptions if n >= new_start)
        return TailPattern(new_start, period, exceptions)

    def eventually_equal(self, other: "TailPattern") -> bool:
        start = max(self.settle(), other.settle())
        span = _lcm(len(self.period), len(other.period))
        return all(self.period_bit_from(start, i) == other.period_bit_from(start, i)
                   for i in range(span))

    def period_bit_from(self, start: int, offset: int) -> int:
        return self.period_bit(start + offset)

    def to_json(self):
        exc = {str(n): b for n, b in self.exceptions}
        if len(self.period) == 1:
            return {"constant": self.period[0], "exceptions": exc}
        return {"period": list(self.period), "exceptions": exc}

    @staticmethod
    def from_json(obj, start: int) -> "TailPattern":
        exc = {int(k): int(v) for k, v in obj.get("exceptions", {}).items()}
        if "period" in obj:
            return TailPattern.periodic([int(b) for b in obj["period"]], start, exc)
        return TailPattern.constant(int(obj["constant"]), start, exc)


def combine_patterns(func, a: TailPattern, b: TailPattern) -> TailPattern:
    """Pointwise combination f(a.bit(n), b.bit(n)) for n >= max(starts)."""
    start = max(a.start, b.start)
    span = _lcm(len(a.period), len(b.period))
    period = tuple(int(func(a.period_bit(start + i), b.period_bit(start + i)))
                   for i in range(span))
    indices = {n for n, _ in a.exceptions if n >= start}
    indices |= {n for n, _ in b.exceptions if n >= start}
    exceptions = {n: int(func(a.bit(n), b.bit(n))) for n in indices}
    return TailPattern(start, period, tuple(exceptions.items()))


# ---------------------------------------------------------------------------
# Tailed operators

class TailedOperator:
    """Finite block plus exact tail action e_n -> bit(n) * e_(n+shift).

    Values are immutable after construction; the block array is frozen.
    The constructor normalizes to: ``tail.start == window`` and
    ``block.shape == (window + max(shift, 0), window)``.
    """

    __slots__ = ("block", "window", "shift", "tail")

    def __init__(self, block, shift: int, tail: TailPattern):
        block = np.array(block, dtype=np.complex128)
        if block.size == 0:
            block = block.reshape(0, 0)
        if block.ndim != 2:
            raise ValidationError("block must be a 2-D array")
        rows, cols = block.shape
        if tail.start < cols:
            raise ValidationError(f"tail start {tail.start} overlaps block columns ({cols})")

        window = max(cols, tail.start, rows - max(shift, 0), 0)
        if shift < 0:
            window = max(window, -shift)

        # absorb pattern columns in [tail.start, window) into the block
        absorbed = []
        for n in range(tail.start, window):
            if tail.bit(n):
                absorbed.append((n + shift, n))
        tail = tail.rebased(window)

        full_rows = window + max(shift, 0)
        full = np.zeros((full_rows, window), dtype=np.complex128)
        full[:rows, :cols] = block
        for i, j in absorbed:
            if not (0 <= i < full_rows):
                raise ValidationError("absorbed tail entry falls outside the block")
            full[i, j] += 1.0

        full.flags.writeable = False
        object.__setattr__(self, "block", full)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "tail", tail)

    def __setattr__(self, name, value):
        raise AttributeError("TailedOperator values are immutable")

    # -- basics --------------------------------------------------------------

    @staticmethod
    def identity() -> "TailedOperator":
        return TailedOperator(np.zeros((0, 0)), 0, TailPattern.constant(1, 0))

    @staticmethod
    def zero() -> "TailedOperator":
        return TailedOperator(np.zeros((0, 0)), 0, TailPattern.constant(0, 0))

    @staticmethod
    def from_dense(matrix) -> "TailedOperator":
        m = np.asarray(matrix, dtype=np.complex128)
        return TailedOperator(m, 0, TailPattern.constant(0, m.shape[1]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TailedOperator):
            return NotImplemented
        return (self.window == other.window and self.shift == other.shift
                and self.tail == other.tail and np.array_equal(self.block, other.block))

    def __hash__(self):
        return hash((self.window, self.shift, self.tail))

    def __repr__(self):
        return (f"TailedOperator(window={self.window}, shift={self.shift}, "
                f"tail={self.tail.period}+{len(self.tail.exceptions)}exc)")

    # -- matrix views ---------------------------------------------------------

    def to_rect(self, rows: int, cols: int) -> np.ndarray:
        """Exact upper-left rows x cols corner of the infinite matrix."""
        out = np.zeros((rows, cols), dtype=np.complex128)
        br, bc = self.block.shape
        out[:min(br, rows), :min(bc, cols)] = self.block[:min(br, rows), :min(bc, cols)]
        for n in range(self.window, cols):
            j = n + self.shift
            if 0 <= j < rows and self.tail.bit(n):
                out[j, n] = 1.0
        return out

    def to_matrix(self, n: int) -> np.ndarray:
        return self.to_rect(n, n)

    def col_support(self, cols: int) -> int:
        """Upper bound on the row support of the first ``cols`` columns."""
        bound = self.block.shape[0]
        if cols > self.window:
            bound = max(bound, cols + self.shift)
        return max(bound, 0)

    # -- algebra ---------------------------------------------------------------

    def adjoint(self) -> "TailedOperator":
        w, k = self.window, self.shift
        new_cols = w + abs(k)                     # columns of the adjoint covered densely
        rows_needed = max(w, new_cols - k)        # rows of self feeding those columns
        rect = self.to_rect(new_cols, rows_needed)
        tail = TailPattern(
            new_cols,
            _rotated(self.tail.period, (new_cols - k - self.tail.start) % len(self.tail.period)),
            tuple((n + k, b) for n, b in self.tail.exceptions if n + k >= new_cols),
        )
        return TailedOperator(rect.conj().T, -k, tail)

    def __matmul__(self, other: "TailedOperator") -> "TailedOperator":
        if not isinstance(other, TailedOperator):
            return NotImplemented
        k = self.shift + other.shift
        cut = max(other.window, self.window - other.shift, -other.shift, 0)
        mid = max(other.col_support(cut), self.window)
        top = self.col_support(mid)
        rect = self.to_rect(top, mid) @ other.to_rect(mid, cut)
        # tail of the product: bit(n) = other.bit(n) & self.bit(n + other.shift)
        span = _lcm(len(self.tail.period), len(other.tail.period))
        period = tuple(other.tail.period_bit(cut + i)
                       & self.tail.period_bit(cut + i + other.shift)
                       for i in range(span))
        indices = {n for n, _ in other.tail.exceptions if n >= cut}
        indices |= {n - other.shift for n, _ in self.tail.exceptions if n - other.shift >= cut}
        exceptions = {n: other.tail.bit(n) & self.tail.bit(n + other.shift) for n in indices}
        tail = TailPattern(cut, period, tuple(exceptions.items()))
        return TailedOperator(rect, k, tail)

    def plus_finite(self, matrix) -> "TailedOperator":
        """Add a finitely supported matrix (absorbed into the block)."""
        m = np.asarray(matrix, dtype=np.complex128)
        if m.size == 0:
            return self
        rows, cols = m.shape
        w = max(self.window, cols, rows - max(self.shift, 0))
        if self.shift < 0:
            w = max(w, -self.shift)
        base = TailedOperator(self.to_rect(w + max(self.shift, 0), w), self.shift,
                              self.tail.rebased(w))
        total = np.array(base.block)
        total[:rows, :cols] += m
        return TailedOperator(total, self.shift, base.tail)

    def add_tailed(self, other: "TailedOperator") -> "TailedOperator":
        """Sum, defined when one tail is zero or both share a shift and have
        pointwise disjoint tail bits (then the patterns simply merge)."""
        if other.tail.is_zero():
            return self.plus_finite(other.block)
        if self.tail.is_zero():
            return other.plus_finite(self.block)
        if self.shift != other.shift:
            raise ValidationError("sum of tailed operators with different shifts "
                                  "leaves the class")
        start = max(self.tail.start, other.tail.start)
        both = combine_patterns(lambda a, b: a & b,
                                self.tail.rebased(start), other.tail.rebased(start))
        if not both.is_zero():
            raise ValidationError("sum of overlapping tails leaves the class")
        merged = combine_patterns(lambda a, b: a | b,
                                  self.tail.rebased(start), other.tail.rebased(start))
        rows = max(self.col_support(start), other.col_support(start),
                   start + max(self.shift, 0))
        rect = self.to_rect(rows, start) + other.to_rect(rows, start)
        return TailedOperator(rect, self.shift, merged)

    def scaled(self, factor: complex) -> "TailedOperator":
        """Scalar multiple; only defined when the tail is zero or factor is 1."""
        if factor == 1:
            return self
        if not self.tail.is_zero():
            raise ValidationError("scaling a nonzero tail leaves the class")
        return TailedOperator(self.block * factor, self.shift, self.tail)

    def norm(self) -> float:
        """Exact operator norm via the shift-zero square ``x* x``."""
        gram = self.adjoint() @ self
        block_norm = 0.0
        if gram.block.size:
            block_norm = float(np.max(np.abs(np.linalg.eigvalsh(
                (gram.block + gram.block.conj().T) / 2.0))))
        tail_norm = 0.0 if gram.tail.is_zero() else 1.0
        return math.sqrt(max(block_norm, tail_norm, 0.0))


def _rotated(period: Tuple[int, ...], rot: int) -> Tuple[int, ...]:
    rot %= len(period)
    return period[rot:] + period[:rot]


# ---------------------------------------------------------------------------
# Tailed projections

class TailedProjection:
    """Hermitian idempotent block on the first ``window`` coordinates plus an
    exact 0/1 diagonal tail pattern."""

    __slots__ = ("block", "window", "tail")

    def __init__(self, block, tail: TailPattern, tol: float = PROJECTION_TOL):
        block = np.array(block, dtype=np.complex128)
        if block.size == 0:
            block = block.reshape(0, 0)
        if block.ndim != 2 or block.shape[0] != block.shape[1]:
            raise ValidationError("projection block must be square")
        n = block.shape[0]
        if tail.start < n:
            raise ValidationError(f"tail start {tail.start} overlaps block of size {n}")
        if tail.start != n:
            raise ValidationError(f"tail start {tail.start} must equal the block size {n}")
        if block.size:
            herm = float(np.linalg.norm(block - block.conj().T, 2))
            idem = float(np.linalg.norm(block @ block - block, 2))
            if herm > tol or idem > tol:
                raise ValidationError(
                    f"block is not a projection: ||p*-p||={herm:.2e}, ||p^2-p||={idem:.2e}")
        block.flags.writeable = False
        object.__setattr__(self, "block", block)
        object.__setattr__(self, "window", n)
        object.__setattr__(self, "tail", tail)

    def __setattr__(self, name, value):
        raise AttributeError("TailedProjection values are immutable")

    # -- constructors -----------------------------------------------------------

    @staticmethod
    def diagonal(tail: TailPattern, prefix_bits: Sequence[int] = ()) -> "TailedProjection":
        """Diagonal projection: explicit 0/1 bits below the pattern start,
        the pattern from there on."""
        if tail.start != len(prefix_bits):
            raise ValidationError("prefix bits must reach exactly to the pattern start")
        block = np.diag(np.array(prefix_bits, dtype=np.complex128)) \
            if prefix_bits else np.zeros((0, 0))
        return TailedProjection(block, tail)

    @staticmethod
    def identity() -> "TailedProjection":
        return TailedProjection(np.zeros((0, 0)), TailPattern.constant(1, 0))

    @staticmethod
    def zero() -> "TailedProjection":
        return TailedProjection(np.zeros((0, 0)), TailPattern.constant(0, 0))

    @staticmethod
    def from_dense(matrix) -> "TailedProjection":
        m = np.asarray(matrix, dtype=np.complex128)
        return TailedProjection(m, TailPattern.constant(0, m.shape[0]))

    # -- views --------------------------------------------------------------------

    def enlarged(self, window: int) -> "TailedProjection":
        """Equivalent projection with a window of at least ``window``."""
        if window <= self.window:
            return self
        block = np.zeros((window, window), dtype=np.complex128)
        block[:self.window, :self.window] = self.block
        for n in range(self.window, window):
            block[n, n] = self.tail.bit(n)
        return TailedProjection(block, self.tail.rebased(window))

    def to_matrix(self, n: int) -> np.ndarray:
        return self.as_operator().to_matrix(n)

    def as_operator(self) -> TailedOperator:
        return TailedOperator(self.block, 0, self.tail)

    def complement(self) -> "TailedProjection":
        eye = np.eye(self.window, dtype=np.complex128)
        return TailedProjection(eye - self.block, self.tail.flipped())

    def trace(self) -> Cardinal:
        block_rank = int(round(float(np.real(np.trace(self.block))))) if self.block.size else 0
        return Cardinal(block_rank) + self.tail.ones()

    def block_diagonal(self) -> np.ndarray:
        return np.real(np.diagonal(self.block)).copy()

    def __eq__(self, other) -> bool:
        if not isinstance(other, TailedProjection):
            return NotImplemented
        return (self.window == other.window and self.tail == other.tail
                and np.array_equal(self.block, other.block))

    def __hash__(self):
        return hash((self.window, self.tail))

    def __repr__(self):
        return f"TailedProjection(window={self.window}, tail={self.tail.period})"


def as_projection(op: TailedOperator, tol: float = PROJECTION_TOL) -> TailedProjection:
    """Cast a shift-zero tailed operator to a projection, validating it."""
    if op.shift != 0:
        raise ValidationError("a projection cannot carry a nonzero shift")
    return TailedProjection(op.block, op.tail, tol=tol)


ProjectionLike = Union[np.ndarray, TailedProjection]


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class ValidationReport:
    hermitian_defect: float
    idempotent_defect: float
    passed: bool


def validate_projection(p: ProjectionLike, tol: float = PROJECTION_TOL) -> ValidationReport:
    """Report ||p* - p|| and ||p^2 - p||; passes iff both are within tol.

    Tailed inputs contribute only their block: the 0/1 tail is exact.
    """
    if isinstance(p, TailedProjection):
        m = p.block
    elif isinstance(p, TailedOperator):
        if p.shift != 0:
            return ValidationReport(math.inf, math.inf, False)
        m = p.block
    else:
        m = np.asarray(p, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("dense projection must be a square matrix")
    if m.size == 0:
        return ValidationReport(0.0, 0.0, True)
    herm = float(np.linalg.norm(m - m.conj().T, 2))
    idem = float(np.linalg.norm(m @ m - m, 2))
    return ValidationReport(herm, idem, herm <= tol and idem <= tol)


# ---------------------------------------------------------------------------
# Intersection dimensions and the Halmos decomposition

@dataclass(frozen=True)
class IntersectionDims:
    n11: Cardinal
    n10: Cardinal
    n01: Cardinal
    n00: Cardinal

    def astuple(self):
        return (self.n11, self.n10, self.n01, self.n00)


def _unified_window(p: TailedProjection, q: TailedProjection) -> int:
    return max(p.window, q.window, p.tail.settle(), q.tail.settle())


def _tail_sector_cardinals(p: TailedProjection, q: TailedProjection, start: int):
    """Cardinals contributed by the (purely periodic) joint tail beyond ``start``."""
    pp, qp = p.tail, q.tail
    span = _lcm(len(pp.period), len(qp.period))
    counts = {(1, 1): 0, (1, 0): 0, (0, 1): 0, (0, 0): 0}
    for i in range(span):
        counts[(pp.period_bit(start + i), qp.period_bit(start + i))] += 1
    return {sector: (INFINITY if c else Cardinal(0)) for sector, c in counts.items()}


def _dense_sector_counts(pm: np.ndarray, qm: np.ndarray, rank_tol: float):
    """Block-level intersection dimensions from two eigensolves."""
    n = pm.shape[0]
    if n == 0:
        return 0, 0, 0, 0, np.zeros(0)
    sum_eigs = hermitian_eigen(pm + qm).values
    diff_eigs = np.linalg.eigvalsh((pm - qm + (pm - qm).conj().T) / 2.0)
    b11 = eig_multiplicity(sum_eigs, 2.0, rank_tol)
    b00 = eig_multiplicity(sum_eigs, 0.0, rank_tol)
    b10 = eig_multiplicity(diff_eigs, 1.0, rank_tol)
    b01 = eig_multiplicity(diff_eigs, -1.0, rank_tol)
    svals = diff_eigs[(diff_eigs > rank_tol) & (diff_eigs < 1.0 - rank_tol)]
    return b11, b10, b01, b00, np.sort(svals)[::-1]


def intersection_dims(p: ProjectionLike, q: ProjectionLike,
                      rank_tol: float = RANK_TOL) -> IntersectionDims:
    """The four intersection dimensions dim(p^q), dim(p^q'), dim(p'^q),
    dim(p'^q') as cardinals.

    Dense pairs use eigenvalue-2 multiplicities of p+q and its variants
    (equivalently, the +-1 multiplicities of p-q); tailed pairs add exact
    periodic tail counts, which may be infinite.
    """
    if isinstance(p, TailedProjection) and isinstance(q, TailedProjection):
        w = _unified_window(p, q)
        pm, qm = p.to_matrix(w), q.to_matrix(w)
        tol = rank_tol * 2.0
        b11, b10, b01, b00, _ = _dense_sector_counts(pm, qm, tol)
        tails = _tail_sector_cardinals(p, q, w)
        return IntersectionDims(
            n11=Cardinal(b11) + tails[(1, 1)],
            n10=Cardinal(b10) + tails[(1, 0)],
            n01=Cardinal(b01) + tails[(0, 1)],
            n00=Cardinal(b00) + tails[(0, 0)],
        )
    pm = np.asarray(p, dtype=np.complex128)
    qm = np.asarray(q, dtype=np.complex128)
    if pm.shape != qm.shape:
        raise ValidationError("projections act on different spaces")
    tol = rank_tol * 2.0
    b11, b10, b01, b00, _ = _dense_sector_counts(pm, qm, tol)
    return IntersectionDims(Cardinal(b11), Cardinal(b10), Cardinal(b01), Cardinal(b00))


@dataclass(frozen=True)
class HalmosForm:
    """Canonical invariants plus the change of basis that exhibits them.

    Conjugating the input pair by ``basis`` (columns are the new basis,
    ordered [p^q | p^q' | p'^q | p'^q' | generic q-side | generic q'-side])
    produces the block forms q = diag(1, 0), p = [[c^2, cs], [cs, s^2]]
    on the generic part.
    """

    cp: CanonicalPair
    basis: Union[np.ndarray, TailedOperator]
    svals: np.ndarray
    block_dims: Tuple[int, int, int, int]
    canonical_p: ProjectionLike
    canonical_q: ProjectionLike

    def reconstruct(self):
        """Rebuild (p, q) from the canonical data; matches inputs within 1e-8."""
        if isinstance(self.basis, TailedOperator):
            u = self.basis
            p = u @ self.canonical_p.as_operator() @ u.adjoint()
            q = u @ self.canonical_q.as_operator() @ u.adjoint()
            return as_projection(p), as_projection(q)
        u = self.basis
        return (u @ self.canonical_p @ u.conj().T,
                u @ self.canonical_q @ u.conj().T)


def _dense_halmos_parts(pm: np.ndarray, qm: np.ndarray, rank_tol: float):
    """Sector bases and generic-part data for a dense pair.

    Returns dict with keys b11, b10, b01, b00 (column blocks), xi, eta
    (generic q-side / q'-side bases), svals (descending) and cos2 values.
    """
    n = pm.shape[0]
    tol = rank_tol * 2.0
    q_eigs = hermitian_eigen(qm)
    ones = np.abs(q_eigs.values - 1.0) <= tol
    zeros = np.abs(q_eigs.values) <= tol
    if int(ones.sum() + zeros.sum()) != n:
        raise ValidationError("q is not numerically a projection")
    uq = q_eigs.vectors[:, ones]
    uq_perp = q_eigs.vectors[:, zeros]

    def compress(basis):
        if basis.shape[1] == 0:
            return np.zeros(0), np.zeros((basis.shape[0], 0))
        small = basis.conj().T @ pm @ basis
        es = hermitian_eigen((small + small.conj().T) / 2.0)
        return es.values, basis @ es.vectors

    mu_q, vec_q = compress(uq)          # p compressed to ran q
    mu_perp, vec_perp = compress(uq_perp)

    sel_11 = np.abs(mu_q - 1.0) <= tol
    sel_01 = np.abs(mu_q) <= tol
    sel_gen = ~(sel_11 | sel_01)
    sel_10 = np.abs(mu_perp - 1.0) <= tol
    sel_00 = np.abs(mu_perp) <= tol

    b11 = vec_q[:, sel_11]
    b01 = vec_q[:, sel_01]
    b10 = vec_perp[:, sel_10]
    b00 = vec_perp[:, sel_00]

    order = np.argsort(-mu_q[sel_gen])   # descending c^2 ==> ascending s
    xi = vec_q[:, sel_gen][:, order]
    cos2 = mu_q[sel_gen][order]
    cs = np.sqrt(cos2 * (1.0 - cos2))
    eta = np.zeros_like(xi)
    for k in range(xi.shape[1]):
        eta[:, k] = (pm @ xi[:, k] - cos2[k] * xi[:, k]) / cs[k]
    svals = np.sqrt(1.0 - cos2)
    order_s = np.argsort(-svals)
    return {
        "b11": b11, "b10": b10, "b01": b01, "b00": b00,
        "xi": xi, "eta": eta, "cos2": cos2,
        "svals": svals, "svals_desc": svals[order_s],
    }


def _canonical_matrices(dims, svals_c2):
    """Canonical block matrices for layout [11 | 10 | 01 | 00 | xi | eta]."""
    b11, b10, b01, b00 = dims
    g = len(svals_c2)
    n = b11 + b10 + b01 + b00 + 2 * g
    p = np.zeros((n, n), dtype=np.complex128)
    q = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for i in range(b11):
        p[pos, pos] = 1.0
        q[pos, pos] = 1.0
        pos += 1
    for i in range(b10):
        p[pos, pos] = 1.0
        pos += 1
    for i in range(b01):
        q[pos, pos] = 1.0
        pos += 1
    pos += b00
    gx, ge = pos, pos + g
    for i, c2 in enumerate(svals_c2):
        s2 = 1.0 - c2
        cs = math.sqrt(c2 * s2)
        q[gx + i, gx + i] = 1.0
        p[gx + i, gx + i] = c2
        p[ge + i, ge + i] = s2
        p[gx + i, ge + i] = cs
        p[ge + i, gx + i] = cs
    return p, q


def _head_sspectrum(svals_desc: np.ndarray) -> SSpectrum:
    clipped = np.clip(svals_desc, 1e-15, 1.0 - 1e-15)
    return SSpectrum(head=tuple(float(v) for v in clipped), tail=None)


def halmos_decompose(p: ProjectionLike, q: ProjectionLike,
                     rank_tol: float = RANK_TOL) -> HalmosForm:
    """Decompose a pair of projections into Halmos canonical form.

    The returned basis is unitary; conjugating the canonical pair by it
    reconstructs the inputs within 1e-8.  The s-values are the square roots
    of the spectrum of q p' q on the generic block, all in (0, 1), and
    ``max(svals)`` equals ||p_0 - q_0|| for the generic parts.
    """
    if isinstance(p, TailedProjection) and isinstance(q, TailedProjection):
        w = _unified_window(p, q)
        pw, qw = p.enlarged(w), q.enlarged(w)
        parts = _dense_halmos_parts(pw.block, qw.block, rank_tol)
        dims = (parts["b11"].shape[1], parts["b10"].shape[1],
                parts["b01"].shape[1], parts["b00"].shape[1])
        basis_w = np.hstack([parts["b11"], parts["b10"], parts["b01"], parts["b00"],
                             parts["xi"], parts["eta"]])
        tails = _tail_sector_cardinals(p, q, w)
        cp = CanonicalPair(
            n11=Cardinal(dims[0]) + tails[(1, 1)],
            n10=Cardinal(dims[1]) + tails[(1, 0)],
            n01=Cardinal(dims[2]) + tails[(0, 1)],
            n00=Cardinal(dims[3]) + tails[(0, 0)],
            s=_head_sspectrum(parts["svals_desc"]),
        )
        pc, qc = _canonical_matrices(dims, parts["cos2"])
        basis = TailedOperator(basis_w, 0, TailPattern.constant(1, w))
        return HalmosForm(
            cp=cp, basis=basis, svals=parts["svals_desc"], block_dims=dims,
            canonical_p=TailedProjection(pc, pw.tail),
            canonical_q=TailedProjection(qc, qw.tail),
        )

    pm = np.asarray(p, dtype=np.complex128)
    qm = np.asarray(q, dtype=np.complex128)
    if pm.shape != qm.shape:
        raise ValidationError("projections act on different spaces")
    parts = _dense_halmos_parts(pm, qm, rank_tol)
    dims = (parts["b11"].shape[1], parts["b10"].shape[1],
            parts["b01"].shape[1], parts["b00"].shape[1])
    basis = np.hstack([parts["b11"], parts["b10"], parts["b01"], parts["b00"],
                       parts["xi"], parts["eta"]])
    cp = CanonicalPair(Cardinal(dims[0]), Cardinal(dims[1]), Cardinal(dims[2]),
                       Cardinal(dims[3]), _head_sspectrum(parts["svals_desc"]))
    pc, qc = _canonical_matrices(dims, parts["cos2"])
    return HalmosForm(cp=cp, basis=basis, svals=parts["svals_desc"],
                      block_dims=dims, canonical_p=pc, canonical_q=qc)


# ---------------------------------------------------------------------------
# Essential codimension and its siblings

def essential_codimension(p: TailedProjection, q: TailedProjection,
                          rank_tol: float = RANK_TOL) -> int:
    """dim(p ^ q') - dim(p' ^ q) for a Fredholm tailed pair.

    Fredholm here means the tail patterns are eventually equal (otherwise a
    cross intersection is infinite).  Agrees with the finite-trace branch
    tr(p) - tr(q) whenever both traces are finite.
    """
    dims = intersection_dims(p, q, rank_tol)
    if not (dims.n10.finite and dims.n01.finite):
        raise NotFredholmError(
            "tail patterns differ eventually: "
            f"dim(p^q')={dims.n10.to_json()}, dim(p'^q)={dims.n01.to_json()}")
    return dims.n10 - dims.n01


def arveson_corner_trace(p: TailedProjection, q: TailedProjection) -> float:
    """tr(q(p-q)q + q'(p-q)q') as an exact finite sum.

    Requires p - q Hilbert-Schmidt, which for tailed pairs means the tail
    patterns agree eventually (the difference is then finite rank).
    """
    if not p.tail.eventually_equal(q.tail):
        raise NotTraceClassError("tail patterns differ eventually; corner traces diverge")
    w = _unified_window(p, q)
    d = p.to_matrix(w) - q.to_matrix(w)
    qm = q.to_matrix(w)
    qp = np.eye(w, dtype=np.complex128) - qm
    return float(np.real(np.trace(qm @ d @ qm) + np.trace(qp @ d @ qp)))


def difference_eigs(p: ProjectionLike, q: ProjectionLike) -> np.ndarray:
    """Eigenvalues of p - q (ascending).

    Multiplicity of +1 is dim(p ^ q'), of -1 is dim(p' ^ q); the nonzero
    interior eigenvalues occur in +-pairs of equal multiplicity.  Tailed
    pairs must have a finite-rank difference; the (infinitely many) exact
    zeros beyond the unified window are omitted.
    """
    if isinstance(p, TailedProjection) and isinstance(q, TailedProjection):
        if not p.tail.eventually_equal(q.tail):
            raise NotTraceClassError("difference is not finite rank")
        w = _unified_window(p, q)
        d = p.to_matrix(w) - q.to_matrix(w)
    else:
        d = np.asarray(p, dtype=np.complex128) - np.asarray(q, dtype=np.complex128)
    if d.size == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh((d + d.conj().T) / 2.0)


def power_trace(p: TailedProjection, q: TailedProjection, power: int) -> float:
    """tr((p - q)^power) for a finite-rank difference."""
    eigs = difference_eigs(p, q)
    return float(np.sum(eigs ** power))


def build_conjugator(p: TailedProjection, q: TailedProjection,
                     rank_tol: float = RANK_TOL) -> TailedOperator:
    """Unitary u with u q u* = p and u - 1 of finite rank (window supported).

    Composed of a finite swap matching p^q' with p'^q, the rotation
    [[c, -s], [s, c]] on the generic block, and the identity elsewhere.
    Raises IndexObstruction when the pair index is nonzero, NotFredholmError
    when no index exists.
    """
    index = essential_codimension(p, q, rank_tol)
    if index != 0:
        raise IndexObstruction(index, f"pair index {index} != 0: no unitary in 1 + finite rank")
    w = _unified_window(p, q)
    pw, qw = p.enlarged(w), q.enlarged(w)
    parts = _dense_halmos_parts(pw.block, qw.block, rank_tol)
    b11, b10 = parts["b11"].shape[1], parts["b10"].shape[1]
    b01, b00 = parts["b01"].shape[1], parts["b00"].shape[1]
    if b10 != b01:
        raise IndexObstruction(b10 - b01, "window sector mismatch")
    g = parts["xi"].shape[1]
    basis = np.hstack([parts["b11"], parts["b10"], parts["b01"], parts["b00"],
                       parts["xi"], parts["eta"]])
    u_canon = np.eye(w, dtype=np.complex128)
    # swap the p^q' and p'^q sectors
    o10, o01 = b11, b11 + b10
    for i in range(b10):
        u_canon[o10 + i, o10 + i] = 0.0
        u_canon[o01 + i, o01 + i] = 0.0
        u_canon[o10 + i, o01 + i] = 1.0
        u_canon[o01 + i, o10 + i] = 1.0
    # rotation on the generic block
    gx = b11 + b10 + b01 + b00
    ge = gx + g
    for i, c2 in enumerate(parts["cos2"]):
        c, s = math.sqrt(c2), math.sqrt(1.0 - c2)
        u_canon[gx + i, gx + i] = c
        u_canon[ge + i, ge + i] = c
        u_canon[gx + i, ge + i] = -s
        u_canon[ge + i, gx + i] = s
    u_block = basis @ u_canon @ basis.conj().T
    return TailedOperator(u_block, 0, TailPattern.constant(1, w))


# ---------------------------------------------------------------------------
# Exact restricted index engine

def _basis_columns(proj: TailedProjection, cut: int, rank_tol: float) -> np.ndarray:
    """Orthonormal basis of ran(proj) restricted below ``cut``: block
    eigenvectors at eigenvalue 1 plus tail coordinates with bit 1."""
    cols = []
    w = proj.window
    if w > 0:
        es = hermitian_eigen(proj.block)
        tol = rank_tol * 2.0
        ones = np.abs(es.values - 1.0) <= tol
        zeros = np.abs(es.values) <= tol
        if int(ones.sum() + zeros.sum()) != w:
            raise ValidationError("block is not numerically a projection")
        lifted = np.zeros((cut, int(ones.sum())), dtype=np.complex128)
        lifted[:w, :] = es.vectors[:, ones]
        cols.append(lifted)
    for n in range(w, cut):
        if proj.tail.bit(n):
            e = np.zeros((cut, 1), dtype=np.complex128)
            e[n, 0] = 1.0
            cols.append(e)
    if not cols:
        return np.zeros((cut, 0), dtype=np.complex128)
    return np.hstack(cols)


@dataclass(frozen=True)
class RestrictedDims:
    kernel: int
    cokernel: int

    @property
    def index(self) -> int:
        return self.kernel - self.cokernel


def _alignment_cut(x: TailedOperator, dom: TailedProjection, cod: TailedProjection) -> int:
    k = x.shift
    cut = max(x.window, dom.window, dom.tail.settle(), x.tail.settle(),
              cod.window - min(k, 0), cod.tail.settle() - min(k, 0),
              x.block.shape[0] - min(k, 0)) + _MARGIN
    return max(cut, -k + 1, 1)


def _check_alignment(x: TailedOperator, dom: TailedProjection, cod: TailedProjection,
                     cut: int) -> None:
    """Beyond ``cut`` the restricted operator must be an exact bijective
    shift from the domain tail onto the codomain tail; otherwise the kernel
    or cokernel is infinite and no index exists."""
    k = x.shift
    span = _lcm(_lcm(len(x.tail.period), len(dom.tail.period)), len(cod.tail.period))
    for i in range(span):
        n = cut + i
        if dom.tail.period_bit(n) and not (x.tail.period_bit(n) and cod.tail.period_bit(n + k)):
            raise NotFredholmError(
                "restricted operator annihilates an infinite piece of the domain")
        j = cut + k + i
        if cod.tail.period_bit(j) and not (dom.tail.period_bit(j - k) and x.tail.period_bit(j - k)):
            raise NotFredholmError(
                "restricted operator misses an infinite piece of the codomain")


def restricted_dims(x: TailedOperator, dom: TailedProjection, cod: TailedProjection,
                    rank_tol: float = RANK_TOL) -> RestrictedDims:
    """Exact kernel and cokernel dimensions of ``cod x|_(dom H)`` viewed as an
    operator ran(dom) -> ran(cod)."""
    cut = _alignment_cut(x, dom, cod)
    _check_alignment(x, dom, cod, cut)
    k = x.shift
    vd = _basis_columns(dom, cut, rank_tol)
    vc = _basis_columns(cod, cut + k, rank_tol)
    a = vc.conj().T @ x.to_rect(cut + k, cut) @ vd
    if a.size == 0:
        rank = 0
    else:
        svals = np.linalg.svd(a, compute_uv=False)
        rank = int(np.count_nonzero(svals > rank_tol * max(1.0, float(svals[0]))))
    return RestrictedDims(kernel=vd.shape[1] - rank, cokernel=vc.shape[1] - rank)


def restricted_index(x: TailedOperator, dom: TailedProjection, cod: TailedProjection) -> int:
    """Exact Fredholm index of ``cod x|_(dom H)``: once the tails align
    bijectively beyond the truncation, the index is the difference of the
    truncated basis counts, a pure integer."""
    cut = _alignment_cut(x, dom, cod)
    _check_alignment(x, dom, cod, cut)
    k = x.shift
    dom_count = _range_count(dom, cut)
    cod_count = _range_count(cod, cut + k)
    return dom_count - cod_count


def _range_count(proj: TailedProjection, cut: int) -> int:
    block_rank = int(round(float(np.real(np.trace(proj.block))))) if proj.block.size else 0
    tail_ones = sum(proj.tail.bit(n) for n in range(proj.window, cut))
    return block_rank + tail_ones


# ---------------------------------------------------------------------------
# Isometry completion

def _sqrt_psd(m: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Positive square root; eigenvalues at or below ``floor`` are treated as
    exact zeros so numerical dust does not inflate the support."""
    if m.size == 0:
        return m
    es = hermitian_eigen((m + m.conj().T) / 2.0)
    vals = np.where(es.values > floor, es.values, 0.0)
    return (es.vectors * np.sqrt(vals)) @ es.vectors.conj().T


def defect_operator(x: TailedOperator, rank_tol: float = RANK_TOL) -> TailedOperator:
    """(1 - x* x)^(1/2); shift-zero with exact 0/1 tail bits."""
    gram = x.adjoint() @ x
    w = gram.window
    block = np.eye(w, dtype=np.complex128) - gram.block[:w, :w]
    tail = gram.tail.flipped()
    return TailedOperator(_sqrt_psd((block + block.conj().T) / 2.0, floor=rank_tol * 2.0),
                          0, tail)


def _free_slots(q: TailedProjection, cut: int, rank_tol: float,
                blocked: set) -> list:
    """Vectors spanning q' below ``cut`` that avoid ``blocked`` tail indices:
    block eigenvectors at eigenvalue 0, then exact tail coordinates with
    q-bit 0."""
    slots = []
    w = q.window
    if w > 0:
        es = hermitian_eigen(q.block)
        zeros = np.abs(es.values) <= rank_tol * 2.0
        for col in range(q.block.shape[0]):
            if zeros[col]:
                v = np.zeros(cut, dtype=np.complex128)
                v[:w] = es.vectors[:, col]
                slots.append(v)
    for n in range(w, cut):
        if not q.tail.bit(n) and n not in blocked:
            v = np.zeros(cut, dtype=np.complex128)
            v[n] = 1.0
            slots.append(v)
    return slots


def complete_to_isometry(x: TailedOperator, q: TailedProjection,
                         rank_tol: float = RANK_TOL) -> TailedOperator:
    """Complete a contraction x into ran(q) to an isometry w = x + v d.

    d = (1 - x* x)^(1/2) is the defect, and v is a partial isometry carrying
    ran(d) into ran(q') -- built within the shift class, which requires the
    defect to fit under q'.  When it cannot be placed (for instance q has a
    cofinite pattern but the defect is infinite dimensional) a
    DefectPlacementError is raised.
    """
    if x.norm() > 1.0 + 1e-10:
        raise ValidationError(f"not a contraction: ||x|| = {x.norm():.6f} > 1")
    qx = q.as_operator() @ x
    if operator_distance(qx, x) > 1e-8:
        raise ValidationError("x does not map into ran(q)")

    d = defect_operator(x, rank_tol)
    # pull tail exceptions of the defect into its block so every finite
    # defect direction is a block eigenvector
    settle = max(d.window, d.tail.settle())
    d = TailedOperator(d.to_matrix(settle), 0, d.tail.rebased(settle))
    infinite_defect = any(d.tail.period)

    # finite defect directions: block eigenvectors with positive eigenvalue
    # (the defect floor guarantees a gap between them and numerical zeros)
    wd = d.window
    finite_dirs = np.zeros((wd, 0), dtype=np.complex128)
    if wd > 0:
        es = hermitian_eigen(d.block)
        keep = es.values > math.sqrt(rank_tol)
        finite_dirs = es.vectors[:, keep]

    needed = finite_dirs.shape[1]
    base = max(wd, q.window, d.tail.settle(), q.tail.settle())

    if infinite_defect:
        if x.tail.is_zero():
            candidates = _compatible_shifts(d.tail, q.tail, needed)
        elif x.shift >= 0:
            # defect bits are disjoint from x's tail bits, so x + v d stays in
            # the class exactly when v shares x's shift
            candidates = (k for k in _compatible_shifts(d.tail, q.tail, needed)
                          if k == x.shift)
        else:
            candidates = iter(())
        placement = None
        for k in candidates:
            cut = base + k + _MARGIN
            blocked = {n + k for n in range(d.tail.start, cut)
                       if d.tail.bit(n) and n + k < cut}
            slots = _free_slots(q, cut, rank_tol, blocked)
            if len(slots) >= needed:
                placement = (k, cut, slots)
                break
        if placement is None:
            raise DefectPlacementError(
                "defect partial isometry cannot be placed under q-perp: "
                "no shift leaves enough free directions")
        shift_k, cut, slots = placement
    else:
        shift_k = 0
        cut = base + _MARGIN
        slots = _free_slots(q, cut, rank_tol, set())
        if len(slots) < needed:
            raise DefectPlacementError(
                "defect partial isometry cannot be placed under q-perp: "
                f"needs {needed} directions, found {len(slots)}")

    v_block = np.zeros((cut, wd), dtype=np.complex128)
    for i in range(needed):
        v_block += np.outer(slots[i], finite_dirs[:, i].conj())
    if infinite_defect:
        v = TailedOperator(v_block, shift_k, d.tail)
    else:
        v = TailedOperator(v_block, 0, TailPattern.constant(0, wd))

    vd = v @ d
    return x.add_tailed(vd)


def _compatible_shifts(defect_tail: TailPattern, q_tail: TailPattern, needed: int):
    """Shifts k >= 0 that map every defect-tail one onto a q-bit-0 slot."""
    span = _lcm(len(defect_tail.period), len(q_tail.period))
    base = max(defect_tail.settle(), q_tail.settle())
    for k in range(0, 2 * span + needed + 2 * _MARGIN + 1):
        ok = all(
            not defect_tail.period_bit(base + i) or not q_tail.period_bit(base + i + k)
            for i in range(span)
        )
        if not ok:
            continue
        ok = all(
            not defect_tail.bit(n)
            or (n + k >= q_tail.start and not q_tail.bit(n + k))
            for n in range(defect_tail.start, base + span)
        )
        if ok:
            yield k


def operator_distance(a: TailedOperator, b: TailedOperator, size: Optional[int] = None) -> float:
    """Norm distance on a truncation large enough to include both structures.

    Infinite if the tails differ structurally: different shifts with
    infinitely many tail ones on either side, or eventually different
    patterns under matching shifts.
    """
    a_inf = any(a.tail.period)
    b_inf = any(b.tail.period)
    if a_inf != b_inf:
        return math.inf
    w = max(a.tail.settle(), b.tail.settle())
    span = _lcm(len(a.tail.period), len(b.tail.period))
    if a_inf:
        if a.shift != b.shift:
            return math.inf
        if any(a.tail.period_bit(w + i) != b.tail.period_bit(w + i) for i in range(span)):
            return math.inf
    n = size or (max(a.window + abs(a.shift), b.window + abs(b.shift), w + span) + _MARGIN)
    return float(np.linalg.norm(a.to_matrix(n) - b.to_matrix(n), 2))
