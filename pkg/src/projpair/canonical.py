"""Exact symbolic layer: Halmos invariants of a projection pair and the
Schatten-ideal calculus.

A pair of projections is described up to unitary equivalence by four
intersection cardinals plus the spectrum of the generic-part sine
operator.  On that data every ideal-membership and index statement
becomes a decidable formula: power-decay tails decide Schatten membership
through the p-series criterion, geometric tails lie in every Schatten
class, and a finite head never obstructs anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import NotFredholmError, PreconditionFailed, ValidationError


# ---------------------------------------------------------------------------
# Cardinals

@dataclass(frozen=True, order=False)
class Cardinal:
    """Nonnegative integer or the distinguished infinite cardinal.

    ``value is None`` encodes infinity.  Addition saturates; subtraction is
    only defined for finite operands, mirroring the finiteness hypotheses
    that guard every index formula.
    """

    value: Optional[int]

    def __post_init__(self):
        if self.value is not None:
            if not isinstance(self.value, int) or self.value < 0:
                raise ValidationError(f"cardinal must be a nonnegative integer or None, got {self.value!r}")

    @property
    def finite(self) -> bool:
        return self.value is not None

    def __add__(self, other: "Cardinal") -> "Cardinal":
        other = _as_cardinal(other)
        if self.finite and other.finite:
            return Cardinal(self.value + other.value)
        return INFINITY

    __radd__ = __add__

    def __sub__(self, other: "Cardinal") -> int:
        other = _as_cardinal(other)
        if not (self.finite and other.finite):
            raise NotFredholmError("cardinal subtraction requires finite operands; "
                                   "check pair_is_fredholm first")
        return self.value - other.value

    def __int__(self) -> int:
        if not self.finite:
            raise NotFredholmError("infinite cardinal has no integer value")
        return self.value

    def __repr__(self) -> str:
        return "Cardinal(inf)" if not self.finite else f"Cardinal({self.value})"

    def to_json(self):
        return "inf" if not self.finite else self.value

    @staticmethod
    def from_json(obj) -> "Cardinal":
        if obj == "inf":
            return INFINITY
        if isinstance(obj, int) and not isinstance(obj, bool):
            return Cardinal(obj)
        raise ValidationError(f"cannot parse cardinal from {obj!r}")


INFINITY = Cardinal(None)


def _as_cardinal(x) -> Cardinal:
    if isinstance(x, Cardinal):
        return x
    if isinstance(x, int):
        return Cardinal(x)
    raise ValidationError(f"expected Cardinal or int, got {type(x).__name__}")


# ---------------------------------------------------------------------------
# s-spectrum descriptors

@dataclass(frozen=True)
class PowerDecay:
    """Tail s_k = k^(-alpha), alpha > 0."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValidationError("power decay exponent must be positive")


@dataclass(frozen=True)
class Geometric:
    """Tail s_k = r^k with 0 < r < 1."""

    ratio: float

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise ValidationError("geometric ratio must lie in (0, 1)")


DecayTail = Union[PowerDecay, Geometric, None]


@dataclass(frozen=True)
class SSpectrum:
    """Singular values of the generic part: a finite non-increasing head of
    values in (0, 1) plus an optional decaying tail family."""

    head: tuple = ()
    tail: DecayTail = None

    def __post_init__(self):
        head = tuple(float(v) for v in self.head)
        object.__setattr__(self, "head", head)
        for v in head:
            if not 0.0 < v < 1.0:
                raise ValidationError(f"s-spectrum head values must lie in (0,1), got {v}")
        for a, b in zip(head, head[1:]):
            if b > a:
                raise ValidationError("s-spectrum head must be non-increasing")

    def values(self, count: int) -> list:
        """First ``count`` values of the full (head + materialized tail) sequence."""
        out = list(self.head[:count])
        k = 1
        while len(out) < count and self.tail is not None:
            if isinstance(self.tail, PowerDecay):
                out.append(k ** (-self.tail.alpha))
            else:
                out.append(self.tail.ratio ** k)
            k += 1
        while len(out) < count:
            out.append(0.0)
        return out

    def to_json(self):
        if self.tail is None:
            tail = None
        elif isinstance(self.tail, PowerDecay):
            tail = {"kind": "power", "param": self.tail.alpha}
        else:
            tail = {"kind": "geometric", "param": self.tail.ratio}
        return {"head": list(self.head), "tail": tail}

    @staticmethod
    def from_json(obj) -> "SSpectrum":
        tail = obj.get("tail")
        if tail is None:
            parsed = None
        elif tail.get("kind") == "power":
            parsed = PowerDecay(float(tail["param"]))
        elif tail.get("kind") == "geometric":
            parsed = Geometric(float(tail["param"]))
        else:
            raise ValidationError(f"unknown s-spectrum tail kind {tail!r}")
        return SSpectrum(head=tuple(obj.get("head", ())), tail=parsed)


# ---------------------------------------------------------------------------
# Operator ideals: the FiniteRank < Schatten(p) < Compact chain

@dataclass(frozen=True)
class IdealClass:
    """Element of the ideal lattice {FiniteRank, Schatten(p), Compact}."""

    kind: str                      # "finite_rank" | "schatten" | "compact"
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("finite_rank", "schatten", "compact"):
            raise ValidationError(f"unknown ideal kind {self.kind!r}")
        if self.kind == "schatten":
            if self.p is None or not self.p > 0:
                raise ValidationError("Schatten class needs a positive exponent")
        elif self.p is not None:
            raise ValidationError(f"{self.kind} takes no exponent")

    def __le__(self, other: "IdealClass") -> bool:
        """Lattice order: FiniteRank < Schatten(p) < Schatten(p') < Compact for p < p'."""
        if self.kind == "finite_rank":
            return True
        if other.kind == "compact":
            return True
        if self.kind == "schatten" and other.kind == "schatten":
            return self.p <= other.p
        return self == other

    def __str__(self) -> str:
        if self.kind == "schatten":
            return f"Schatten({self.p:g})"
        return {"finite_rank": "FiniteRank", "compact": "Compact"}[self.kind]


FINITE_RANK = IdealClass("finite_rank")
COMPACT = IdealClass("compact")


def schatten(p: float) -> IdealClass:
    return IdealClass("schatten", float(p))


def ideal_pow(ideal: IdealClass, exponent: float) -> IdealClass:
    """Power of an ideal: Schatten(p) -> Schatten(p/exponent); the finite-rank
    and compact ideals are fixed points.

    With this convention ``x in Schatten(p)`` implies
    ``x**exponent in ideal_pow(Schatten(p), exponent)``.
    """
    if not exponent > 0:
        raise ValidationError("ideal exponent must be positive")
    if ideal.kind == "schatten":
        return schatten(ideal.p / exponent)
    return ideal


def _tail_in_ideal(tail: DecayTail, ideal: IdealClass) -> bool:
    """Does the materialized tail sequence belong to the ideal?"""
    if tail is None:
        return True                       # finitely many values: every ideal
    if ideal.kind == "finite_rank":
        return False
    if ideal.kind == "compact":
        return True                       # stored tails decay to zero
    if isinstance(tail, Geometric):
        return True                       # geometric series converge for every p
    return tail.alpha * ideal.p > 1.0     # p-series criterion, strict


def s_in_ideal(s: SSpectrum, ideal: IdealClass) -> bool:
    """Membership of the s-spectrum in an ideal (head is always harmless)."""
    if ideal.kind == "finite_rank":
        return s.tail is None
    return _tail_in_ideal(s.tail, ideal)


# ---------------------------------------------------------------------------
# Canonical pairs

@dataclass(frozen=True)
class CanonicalPair:
    """Halmos invariants: four intersection cardinals and the s-spectrum.

    n11 = dim(p ^ q), n10 = dim(p ^ q'), n01 = dim(p' ^ q), n00 = dim(p' ^ q').
    """

    n11: Cardinal
    n10: Cardinal
    n01: Cardinal
    n00: Cardinal
    s: SSpectrum = SSpectrum()

    def swapped(self) -> "CanonicalPair":
        """Invariants of the pair (q, p)."""
        return CanonicalPair(self.n11, self.n01, self.n10, self.n00, self.s)

    def to_json(self):
        return {
            "n11": self.n11.to_json(),
            "n10": self.n10.to_json(),
            "n01": self.n01.to_json(),
            "n00": self.n00.to_json(),
            "s": self.s.to_json(),
        }

    @staticmethod
    def from_json(obj) -> "CanonicalPair":
        return CanonicalPair(
            n11=Cardinal.from_json(obj["n11"]),
            n10=Cardinal.from_json(obj["n10"]),
            n01=Cardinal.from_json(obj["n01"]),
            n00=Cardinal.from_json(obj["n00"]),
            s=SSpectrum.from_json(obj.get("s", {"head": [], "tail": None})),
        )


def pair_is_fredholm(cp: CanonicalPair) -> bool:
    """A pair with decaying s-spectrum is Fredholm iff both cross
    intersections are finite (the generic part has essential norm 0 here)."""
    return cp.n10.finite and cp.n01.finite


def pair_index(cp: CanonicalPair) -> int:
    """Index of a Fredholm pair: tr(p ^ q') - tr(p' ^ q); the generic part
    contributes zero."""
    if not pair_is_fredholm(cp):
        raise NotFredholmError("pair has an infinite cross intersection")
    return cp.n10 - cp.n01


def diff_in_ideal(cp: CanonicalPair, ideal: IdealClass) -> bool:
    """Is p - q in the ideal?  True iff both cross intersections are finite
    and the s-spectrum belongs to the ideal."""
    if not (cp.n10.finite and cp.n01.finite):
        return False
    return s_in_ideal(cp.s, ideal)


@dataclass(frozen=True)
class Undefined:
    """Value returned when a formula's hypothesis fails; names the failure."""

    reason: str


def corner_trace(cp: CanonicalPair) -> Union[int, Undefined]:
    """tr(q(p-q)q + q'(p-q)q') when p - q is Hilbert-Schmidt: the +-s^2
    contributions cancel and the trace equals the pair index."""
    if not (cp.n10.finite and cp.n01.finite):
        which = "n10" if not cp.n10.finite else "n01"
        return Undefined(f"{which} is infinite")
    if not s_in_ideal(cp.s, schatten(2)):
        return Undefined("s-spectrum is not Hilbert-Schmidt (s not in L^2)")
    return cp.n10 - cp.n01


def conjugator_exists(cp: CanonicalPair, ideal: IdealClass) -> bool:
    """Is there a unitary u in 1 + ideal with u q u* = p?  Exactly when the
    difference lies in the ideal and the index vanishes."""
    return diff_in_ideal(cp, ideal) and pair_index(cp) == 0


def majorizes(xi, eta) -> bool:
    """Is ``xi`` majorized by ``eta``?  Partial sums of the non-increasing
    rearrangements are compared on equal-length prefixes."""
    xs = sorted((float(v) for v in xi), reverse=True)
    ys = sorted((float(v) for v in eta), reverse=True)
    if len(xs) != len(ys):
        raise ValidationError(f"prefix lengths differ: {len(xs)} vs {len(ys)}")
    if xs and (xs[-1] < 0 or ys[-1] < 0):
        raise ValidationError("majorization requires nonnegative entries")
    run_x = run_y = 0.0
    for x, y in zip(xs, ys):
        run_x += x
        run_y += y
        if run_x > run_y + 1e-12:
            return False
    return True


@dataclass(frozen=True)
class SameDiagonalWitness:
    """Invariants of a projection with the same diagonal but index one higher.

    ``diagonal_match_certified`` stays False: the diagonal-equality half rests
    on a compact Schur-Horn existence result with no known construction, so it
    is recorded as a dependency rather than verified.
    """

    pair: CanonicalPair
    diagonal_match_certified: bool
    note: str


def same_diagonal_witness(cp: CanonicalPair) -> SameDiagonalWitness:
    """Given invariants with p - q compact but not Hilbert-Schmidt, produce
    the invariants of a perturbed projection whose index is one higher.

    The construction moves one dimension from the complement into p ^ q',
    so the index rises by exactly 1 while (by the cited existence theorem)
    some unitary conjugate of it keeps the original diagonal.
    """
    if not diff_in_ideal(cp, COMPACT):
        raise PreconditionFailed("p - q is not compact (a cross intersection is infinite)")
    if diff_in_ideal(cp, schatten(2)):
        raise PreconditionFailed("p - q is Hilbert-Schmidt; the hypothesis needs "
                                 "compact-but-not-L^2")
    shifted = CanonicalPair(cp.n11, cp.n10 + Cardinal(1), cp.n01, cp.n00, cp.s)
    return SameDiagonalWitness(
        pair=shifted,
        diagonal_match_certified=False,
        note="diagonal equality relies on the compact Schur-Horn existence "
             "theorem; no construction is attempted",
    )
