"""Seeded random instance generators for the property suites.

Instances are generated with planted structure (sector dimensions, tail
patterns, expected indices) so suites can check computed invariants against
construction-time truth, not just internal consistency.
"""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np

from .finite_spectrum import FiniteSpectrumOp
from .kadison import DiagonalSequence, TAIL_ONES, TAIL_ZEROS
from .operators import TailPattern, TailedProjection
from .rng import SplitMix64

PERIODS = [(1,), (0,), (1, 0), (0, 1), (1, 1, 0), (1, 0, 0)]


def random_dense_projection(rng: SplitMix64, n: int, rank: Optional[int] = None) -> np.ndarray:
    if rank is None:
        rank = rng.randint(0, n)
    u = rng.unitary(n)
    d = np.zeros(n)
    d[:rank] = 1.0
    m = (u * d) @ u.conj().T
    return (m + m.conj().T) / 2.0


def planted_dense_pair(rng: SplitMix64, n: int,
                       dims: Optional[Tuple[int, int, int, int]] = None,
                       generic: Optional[int] = None):
    """Dense pair with known sector dimensions and generic angles.

    Returns (p, q, (b11, b10, b01, b00), svals ascending).
    """
    if dims is None:
        remaining = n
        parts = []
        for _ in range(3):
            take = rng.randint(0, max(remaining // 2, 0))
            parts.append(take)
            remaining -= take
        parts.append(rng.randint(0, remaining))
        remaining -= parts[-1]
        g = remaining // 2
        leftover = remaining - 2 * g
        parts[0] += leftover
        b11, b10, b01, b00 = parts
    else:
        b11, b10, b01, b00 = dims
        g = generic or 0
    size = b11 + b10 + b01 + b00 + 2 * g
    if size != n:
        raise ValueError("sector dimensions do not fill the space")
    p0 = np.zeros((n, n), dtype=np.complex128)
    q0 = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for _ in range(b11):
        p0[pos, pos] = 1.0
        q0[pos, pos] = 1.0
        pos += 1
    for _ in range(b10):
        p0[pos, pos] = 1.0
        pos += 1
    for _ in range(b01):
        q0[pos, pos] = 1.0
        pos += 1
    pos += b00
    svals = sorted(rng.uniform(0.15, 0.85) for _ in range(g))
    for s in svals:
        c2 = 1.0 - s * s
        cs = math.sqrt(c2) * s
        q0[pos, pos] = 1.0
        p0[pos, pos] = c2
        p0[pos + 1, pos + 1] = s * s
        p0[pos, pos + 1] = cs
        p0[pos + 1, pos] = cs
        pos += 2
    u = rng.unitary(n)
    p = u @ p0 @ u.conj().T
    q = u @ q0 @ u.conj().T
    return ((p + p.conj().T) / 2.0, (q + q.conj().T) / 2.0,
            (b11, b10, b01, b00), np.array(svals))


def random_tailed_pair(rng: SplitMix64, max_window: int = 64,
                       force_index: Optional[int] = None):
    """Fredholm tailed pair with planted index.

    Both projections share an eventual period; exceptions flip individual
    bits and shift the index by known sector contributions.  Returns
    (p, q, planted_index).
    """
    w = rng.randint(2, max_window)
    if force_index is not None:
        b01 = rng.randint(0, 2)
        b10 = b01 + force_index
        if b10 < 0:
            b01 -= b10
            b10 = 0
    else:
        b10 = rng.randint(0, 3)
        b01 = rng.randint(0, 3)
    body = max(w - b10 - b01, 0)
    b11 = rng.randint(0, body)
    rest = body - b11
    g = rng.randint(0, rest // 2)
    b00 = rest - 2 * g
    n = b11 + b10 + b01 + b00 + 2 * g
    p, q, dims, _ = planted_dense_pair(rng, n, (b11, b10, b01, b00), g)
    period = rng.choice(PERIODS)
    p_exc, q_exc = {}, {}
    extra10 = extra01 = 0
    if force_index is None and rng.uniform() < 0.5:
        used = set()
        for _ in range(rng.randint(1, 3)):
            idx = n + rng.randint(0, 5)
            if idx in used:
                continue
            used.add(idx)
            base = period[(idx - n) % len(period)]
            flip_p = rng.uniform() < 0.7
            flip_q = not flip_p if rng.uniform() < 0.8 else flip_p
            pb = 1 - base if flip_p else base
            qb = 1 - base if flip_q else base
            if flip_p:
                p_exc[idx] = pb
            if flip_q:
                q_exc[idx] = qb
            if pb == 1 and qb == 0:
                extra10 += 1
            if pb == 0 and qb == 1:
                extra01 += 1
    tp = TailedProjection(p, TailPattern.periodic(period, n, p_exc))
    tq = TailedProjection(q, TailPattern.periodic(period, n, q_exc))
    planted = (dims[1] + extra10) - (dims[2] + extra01)
    return tp, tq, planted


def random_index_zero_pair(rng: SplitMix64, max_window: int = 64):
    p, q, planted = random_tailed_pair(rng, max_window, force_index=0)
    if planted != 0:
        raise AssertionError("generator planted a nonzero index")
    return p, q


def random_diagonal_sequence(rng: SplitMix64, admissible: bool,
                             max_len: int = 24) -> DiagonalSequence:
    length = rng.randint(1, max_len)
    values: List[float] = []
    for _ in range(length):
        roll = rng.uniform()
        if roll < 0.1:
            values.append(0.0)
        elif roll < 0.2:
            values.append(1.0)
        elif roll < 0.3:
            values.append(0.5)
        else:
            values.append(rng.uniform(0.0, 1.0))
    tail = TAIL_ZEROS if rng.uniform() < 0.5 else TAIL_ONES
    if admissible:
        a = sum(v for v in values if v <= 0.5)
        b = sum(1.0 - v for v in values if v > 0.5)
        frac = (a - b) - math.floor(a - b)
        if frac > 1e-12:
            # appending 1 - frac lands in whichever sum restores integrality:
            # below 1/2 it raises a by 1 - frac, above 1/2 it raises b by frac
            values.append(1.0 - frac)
    return DiagonalSequence(tuple(values), tail)


def random_fredholm_contraction(rng: SplitMix64, max_window: int = 32):
    """(x, q, expected_index) with x a Fredholm contraction into ran(q) that
    admits an isometric completion with defect under q-perp.

    x = q w for an isometry w onto a random cofinite projection p0, so
    idx(x) = [p0 : q]; optionally one existing defect direction is damped
    (damping a non-defect direction would push the defect rank past
    dim(q-perp) and make completion impossible for a cofinite q).
    """
    from .kadison import range_isometry
    from .operators import TailedOperator, defect_operator, essential_codimension
    from .spectral import hermitian_eigen

    w_size = rng.randint(2, max_window)
    q_zero_count = rng.randint(0, 3)
    q_bits = [1] * w_size
    for _ in range(q_zero_count):
        q_bits[rng.randint(0, w_size - 1)] = 0
    uq = rng.unitary(w_size)
    q_block = (uq * np.array(q_bits, dtype=float)) @ uq.conj().T
    q = TailedProjection((q_block + q_block.conj().T) / 2.0,
                         TailPattern.constant(1, w_size))

    p_zero_count = rng.randint(0, 3)
    p_bits = [1] * w_size
    for _ in range(p_zero_count):
        p_bits[rng.randint(0, w_size - 1)] = 0
    up = rng.unitary(w_size)
    p_block = (up * np.array(p_bits, dtype=float)) @ up.conj().T
    p0 = TailedProjection((p_block + p_block.conj().T) / 2.0,
                          TailPattern.constant(1, w_size))

    x = q.as_operator() @ range_isometry(p0)
    if rng.uniform() < 0.6:
        d = defect_operator(x)
        if d.window and d.block.size:
            es = hermitian_eigen(d.block)
            support = [i for i, v in enumerate(es.values) if v > 1e-4]
            if support:
                v = es.vectors[:, rng.choice(support)]
                c = rng.uniform(0.3, 0.95)
                damp_block = np.eye(d.window, dtype=np.complex128) - (1.0 - c) * np.outer(v, v.conj())
                damp = TailedOperator(damp_block, 0, TailPattern.constant(1, d.window))
                x = x @ damp
    expected = essential_codimension(p0, q)
    return x, q, expected


def random_finite_spectrum(rng: SplitMix64, max_middle: int = 3):
    """Finite-spectrum instance with periodic 0/1 tails and finite middles."""
    n_mid = rng.randint(1, max_middle)
    middles = []
    while len(middles) < n_mid:
        v = round(rng.uniform(0.08, 0.92), 3)
        if all(abs(v - m) > 0.02 for m in middles) and abs(v - 0.5) > 0.01:
            middles.append(v)
    mults = [rng.randint(1, 3) for _ in middles]
    extra0 = rng.randint(0, 2)
    extra1 = rng.randint(0, 2)
    labels = []
    eigenvalues = [0.0, 1.0] + middles
    for j, m in enumerate(mults):
        labels += [2 + j] * m
    labels += [0] * extra0 + [1] * extra1
    rng.shuffle(labels)
    w = len(labels)

    period = rng.choice([(1, 0), (0, 1), (1,), (0,), (1, 1, 0)])
    exceptions = {}
    if rng.uniform() < 0.6:
        for _ in range(rng.randint(1, 2)):
            exceptions[w + rng.randint(0, 4)] = rng.randint(0, len(eigenvalues) - 1)

    u = rng.unitary(w)
    projections = []
    for j in range(len(eigenvalues)):
        d = np.array([1.0 if lab == j else 0.0 for lab in labels])
        block = (u * d) @ u.conj().T
        block = (block + block.conj().T) / 2.0
        if j in (0, 1):
            pp = tuple(1 if b == j else 0 for b in period)
        else:
            pp = tuple(0 for _ in period)
        exc = {}
        for idx, owner in exceptions.items():
            period_owner = 1 if period[(idx - w) % len(period)] == 1 else 0
            if owner == j and period_owner != j:
                exc[idx] = 1
            elif owner != j and period_owner == j:
                exc[idx] = 0
        projections.append(TailedProjection(block, TailPattern(w, pp, tuple(exc.items()))))
    return FiniteSpectrumOp(tuple(eigenvalues), tuple(projections))
