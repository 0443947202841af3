import math

import numpy as np
import pytest

from projpair.canonical import Cardinal, INFINITY, pair_index
from projpair.errors import (
    DefectPlacementError,
    IndexObstruction,
    NotFredholmError,
    NotTraceClassError,
    ValidationError,
)
from projpair.gen import planted_dense_pair, random_fredholm_contraction, random_tailed_pair
from projpair.operators import (
    TailPattern,
    TailedOperator,
    TailedProjection,
    arveson_corner_trace,
    as_projection,
    build_conjugator,
    complete_to_isometry,
    defect_operator,
    difference_eigs,
    essential_codimension,
    halmos_decompose,
    intersection_dims,
    operator_distance,
    power_trace,
    restricted_dims,
    restricted_index,
    validate_projection,
)
from projpair.rng import SplitMix64

SQRT_HALF = math.sqrt(0.5)

GENERIC_P = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
DIAG_Q = np.diag([1.0, 0.0]).astype(complex)


def shift_op(k=1):
    if k >= 0:
        return TailedOperator(np.zeros((0, 0)), k, TailPattern.constant(1, 0))
    return TailedOperator(np.zeros((-k, -k)), k, TailPattern.constant(1, -k))


def ones_projection(missing=()):
    exc = {n: 0 for n in missing}
    start = max(missing, default=-1) + 1
    bits = [0 if n in missing else 1 for n in range(start)]
    return TailedProjection.diagonal(TailPattern.constant(1, start, {n: b for n, b in exc.items() if n >= start}),
                                     prefix_bits=bits)


class TestTailPattern:
    def test_bits_and_counts(self):
        pat = TailPattern.periodic([1, 0], 0, {5: 1})
        assert [pat.bit(n) for n in range(6)] == [1, 0, 1, 0, 1, 1]
        assert pat.ones() == INFINITY
        assert pat.zeros() == INFINITY
        const = TailPattern.constant(0, 2, {5: 1})
        assert const.ones() == Cardinal(1)
        assert const.zeros() == INFINITY

    def test_normalizes_redundant_exceptions(self):
        pat = TailPattern.constant(1, 0, {3: 1, 5: 0})
        assert pat.exceptions == ((5, 0),)

    def test_rebase_preserves_bits(self):
        pat = TailPattern.periodic([1, 1, 0], 2, {7: 0})
        re = pat.rebased(5)
        for n in range(5, 15):
            assert re.bit(n) == pat.bit(n)

    def test_eventually_equal(self):
        a = TailPattern.periodic([1, 0], 0, {2: 0})
        b = TailPattern.periodic([1, 0], 4)
        assert a.eventually_equal(b)
        assert not a.eventually_equal(TailPattern.periodic([0, 1], 0))


class TestTailedOperatorAlgebra:
    def test_adjoint_matches_matrix_adjoint(self):
        rng = SplitMix64(31)
        for _ in range(30):
            w = rng.randint(0, 5)
            k = rng.randint(-3, 3)
            rows = w + max(k, 0) + rng.randint(0, 2)
            block = rng.complex_matrix(rows, w) if w else np.zeros((0, 0))
            period = rng.choice([(1,), (0,), (1, 0), (1, 1, 0)])
            start = max(w, -k, 0)
            exc = {start + rng.randint(0, 4): rng.randint(0, 1)} if rng.uniform() < 0.5 else {}
            try:
                op = TailedOperator(block, k, TailPattern.periodic(period, start, exc))
            except ValidationError:
                continue
            n = op.window + abs(k) + 10
            assert np.allclose(op.adjoint().to_matrix(n), op.to_matrix(n).conj().T,
                               atol=1e-12)
            # adjoint is an involution
            assert operator_distance(op.adjoint().adjoint(), op) <= 1e-12

    def test_compose_matches_matrix_product(self):
        rng = SplitMix64(77)
        for _ in range(30):
            ops = []
            for _ in range(2):
                w = rng.randint(0, 4)
                k = rng.randint(-2, 2)
                rows = w + max(k, 0)
                block = rng.complex_matrix(rows, w) if w else np.zeros((0, 0))
                period = rng.choice([(1,), (0,), (1, 0)])
                start = max(w, -k, 0)
                try:
                    ops.append(TailedOperator(block, k, TailPattern.periodic(period, start)))
                except ValidationError:
                    break
            if len(ops) < 2:
                continue
            x, y = ops
            z = x @ y
            n = 24
            prod = x.to_rect(n, n + 8) @ y.to_rect(n + 8, n)
            assert np.allclose(z.to_matrix(n), prod, atol=1e-12)

    def test_shift_indices(self):
        ident = TailedProjection.identity()
        assert restricted_index(shift_op(1), ident, ident) == -1
        assert restricted_index(shift_op(-1), ident, ident) == 1
        assert restricted_index(shift_op(1) @ shift_op(1) @ shift_op(1), ident, ident) == -3
        dims = restricted_dims(shift_op(1), ident, ident)
        assert (dims.kernel, dims.cokernel) == (0, 1)

    def test_norm(self):
        assert abs(shift_op(1).norm() - 1.0) <= 1e-12
        half = TailedOperator(0.5 * np.eye(2), 0, TailPattern.constant(0, 2))
        assert abs(half.norm() - 0.5) <= 1e-12


class TestValidateProjection:
    def test_examples(self):
        assert validate_projection(np.diag([1.0, 0.0])).passed
        assert validate_projection(GENERIC_P).passed
        report = validate_projection(np.diag([0.5, 0.0]))
        assert not report.passed
        assert report.idempotent_defect > 1e-3

    def test_tailed(self):
        p = TailedProjection(GENERIC_P, TailPattern.constant(1, 2))
        assert validate_projection(p).passed


class TestIntersectionDims:
    def test_equal_projections(self):
        d = intersection_dims(DIAG_Q, DIAG_Q)
        assert d.astuple() == (Cardinal(1), Cardinal(0), Cardinal(0), Cardinal(1))

    def test_generic_pair(self):
        d = intersection_dims(GENERIC_P, DIAG_Q)
        assert d.astuple() == (Cardinal(0),) * 4

    def test_tailed_rank_one_defect(self):
        q = ones_projection()
        p = ones_projection(missing=(0,))
        d = intersection_dims(p, q)
        assert d.n01 == Cardinal(1)
        assert d.n11 == INFINITY
        assert d.n10 == Cardinal(0)

    def test_planted_dense(self):
        rng = SplitMix64(4)
        for _ in range(25):
            n = rng.randint(2, 20)
            p, q, dims, _ = planted_dense_pair(rng, n)
            got = intersection_dims(p, q)
            assert got.astuple() == tuple(Cardinal(v) for v in
                                          (dims[0], dims[1], dims[2], dims[3]))


class TestHalmos:
    def test_equal_pair_has_no_generic_part(self):
        form = halmos_decompose(DIAG_Q, DIAG_Q)
        assert form.svals.size == 0
        assert form.block_dims == (1, 0, 0, 1)

    def test_generic_pair_sval(self):
        form = halmos_decompose(GENERIC_P, DIAG_Q)
        assert np.allclose(form.svals, [SQRT_HALF], atol=1e-10)

    def test_orthogonal_ranges(self):
        form = halmos_decompose(np.diag([0.0, 1.0]).astype(complex), DIAG_Q)
        assert form.block_dims == (0, 1, 1, 0)
        assert form.svals.size == 0

    def test_reconstruction_and_unitarity_dense(self):
        rng = SplitMix64(14)
        for _ in range(20):
            n = rng.randint(2, 18)
            p, q, _, svals = planted_dense_pair(rng, n)
            form = halmos_decompose(p, q)
            u = form.basis
            assert np.linalg.norm(u.conj().T @ u - np.eye(n), 2) <= 1e-10
            pr, qr = form.reconstruct()
            assert np.linalg.norm(pr - p, 2) <= 1e-8
            assert np.linalg.norm(qr - q, 2) <= 1e-8
            assert np.allclose(np.sort(form.svals), np.sort(svals), atol=1e-8)
            # canonical block forms: conjugating back gives diag(1,0) pattern
            qc = u.conj().T @ q @ u
            assert np.linalg.norm(qc - form.canonical_q, 2) <= 1e-8

    def test_reconstruction_tailed(self):
        rng = SplitMix64(15)
        for _ in range(15):
            p, q, _ = random_tailed_pair(rng, max_window=20)
            form = halmos_decompose(p, q)
            pr, qr = form.reconstruct()
            assert operator_distance(pr.as_operator(), p.as_operator()) <= 1e-8
            assert operator_distance(qr.as_operator(), q.as_operator()) <= 1e-8

    def test_norm_of_difference_is_max_sval(self):
        rng = SplitMix64(16)
        for _ in range(15):
            n = rng.randint(2, 16)
            p, q, dims, svals = planted_dense_pair(rng, n)
            if dims[1] or dims[2] or not len(svals):
                continue
            form = halmos_decompose(p, q)
            assert abs(np.linalg.norm(p - q, 2) - max(form.svals)) <= 1e-8


class TestEssentialCodimension:
    def test_equal(self):
        q = ones_projection()
        assert essential_codimension(q, q) == 0

    def test_rank_one_defect(self):
        q = ones_projection()
        p = ones_projection(missing=(0,))
        assert essential_codimension(p, q) == -1

    def test_finite_trace_branch(self):
        p = TailedProjection(np.diag([1.0, 1.0]).astype(complex), TailPattern.constant(0, 2))
        q = TailedProjection(np.diag([1.0, 0.0]).astype(complex), TailPattern.constant(0, 2))
        assert essential_codimension(p, q) == 1
        assert int(p.trace()) - int(q.trace()) == 1

    def test_not_fredholm(self):
        p = TailedProjection.diagonal(TailPattern.constant(1, 0))
        q = TailedProjection.diagonal(TailPattern.constant(0, 0))
        with pytest.raises(NotFredholmError):
            essential_codimension(p, q)

    def test_antisymmetry_and_unitary_invariance(self):
        rng = SplitMix64(62)
        for _ in range(25):
            p, q, planted = random_tailed_pair(rng, max_window=24)
            assert essential_codimension(p, q) == planted
            assert essential_codimension(q, p) == -planted
            w = max(p.window, q.window)
            u_block = rng.unitary(w)
            u = TailedOperator(u_block, 0, TailPattern.constant(1, w))
            up = as_projection(u @ p.as_operator() @ u.adjoint(), tol=1e-8)
            uq = as_projection(u @ q.as_operator() @ u.adjoint(), tol=1e-8)
            assert essential_codimension(up, uq) == planted


class TestArvesonCornerTrace:
    def test_equal(self):
        q = ones_projection()
        assert arveson_corner_trace(q, q) == 0.0

    def test_rank_one_defect(self):
        q = ones_projection()
        p = ones_projection(missing=(0,))
        assert abs(arveson_corner_trace(p, q) - (-1.0)) <= 1e-12

    def test_generic_corners_cancel(self):
        p = TailedProjection(GENERIC_P, TailPattern.constant(0, 2))
        q = TailedProjection(DIAG_Q, TailPattern.constant(0, 2))
        # hand computation: corner traces are -1/2 and +1/2
        assert abs(arveson_corner_trace(p, q)) <= 1e-12

    def test_diverging_tails_rejected(self):
        p = TailedProjection.diagonal(TailPattern.constant(1, 0))
        q = TailedProjection.diagonal(TailPattern.constant(0, 0))
        with pytest.raises(NotTraceClassError):
            arveson_corner_trace(p, q)


class TestDifferenceEigs:
    def test_equal(self):
        assert np.allclose(difference_eigs(DIAG_Q, DIAG_Q), 0.0)

    def test_generic(self):
        assert np.allclose(difference_eigs(GENERIC_P, DIAG_Q),
                           [-SQRT_HALF, SQRT_HALF], atol=1e-12)

    def test_orthogonal(self):
        assert np.allclose(difference_eigs(np.diag([0.0, 1.0]), np.diag([1.0, 0.0])),
                           [-1.0, 1.0])

    def test_symmetry_on_planted_pairs(self):
        rng = SplitMix64(9)
        for _ in range(25):
            n = rng.randint(2, 24)
            p, q, dims, _ = planted_dense_pair(rng, n)
            eigs = difference_eigs(p, q)
            tol = 1e-8
            assert int(np.count_nonzero(np.abs(eigs - 1) <= tol)) == dims[1]
            assert int(np.count_nonzero(np.abs(eigs + 1) <= tol)) == dims[2]
            interior = eigs[(np.abs(eigs) > tol) & (np.abs(np.abs(eigs) - 1) > tol)]
            assert np.allclose(np.sort(interior), -np.sort(-interior)[::-1], atol=tol)


class TestOddPowerTraces:
    def test_identity_on_random_pairs(self):
        rng = SplitMix64(23)
        for _ in range(20):
            p, q, planted = random_tailed_pair(rng, max_window=20)
            for m in range(4):
                assert abs(power_trace(p, q, 2 * m + 1) - planted) <= 1e-6


class TestBuildConjugator:
    def test_equal_pair_gives_identity(self):
        q = ones_projection(missing=(1,))
        u = build_conjugator(q, q)
        assert operator_distance(u, TailedOperator.identity()) <= 1e-10

    def test_generic_two_by_two(self):
        p = TailedProjection(GENERIC_P, TailPattern.constant(1, 2))
        q = TailedProjection(DIAG_Q, TailPattern.constant(1, 2))
        u = build_conjugator(p, q)
        c = s = SQRT_HALF
        assert np.allclose(u.block, [[c, -s], [s, c]], atol=1e-10)

    def test_swap(self):
        p = TailedProjection(np.diag([0.0, 1.0]).astype(complex), TailPattern.constant(0, 2))
        q = TailedProjection(DIAG_Q, TailPattern.constant(0, 2))
        u = build_conjugator(p, q)
        assert np.allclose(u.block, [[0, 1], [1, 0]], atol=1e-10)
        moved = u @ q.as_operator() @ u.adjoint()
        assert operator_distance(moved, p.as_operator()) <= 1e-12

    def test_index_obstruction_carries_integer(self):
        q = ones_projection()
        p = ones_projection(missing=(0,))
        with pytest.raises(IndexObstruction) as info:
            build_conjugator(p, q)
        assert info.value.obstruction == -1


class TestCompleteToIsometry:
    def test_projection_as_contraction_into_itself(self):
        # x = q on an infinite, co-infinite pattern completes (to the identity)
        q = TailedProjection.diagonal(TailPattern.periodic([1, 0], 0))
        w = complete_to_isometry(q.as_operator(), q)
        gram = (w.adjoint() @ w).to_matrix(16)
        assert np.linalg.norm(gram - np.eye(16), 2) <= 1e-10
        assert operator_distance(q.as_operator() @ w, q.as_operator()) <= 1e-10

    def test_shift_into_cofinite_q(self):
        q = ones_projection(missing=(0,))
        x = q.as_operator() @ shift_op(1)
        w = complete_to_isometry(x, q)
        p = as_projection(w @ w.adjoint(), tol=1e-8)
        assert essential_codimension(p, q) == 0
        assert restricted_index(x, TailedProjection.identity(), q) == 0

    def test_half_q_defect(self):
        q = TailedProjection(DIAG_Q, TailPattern.constant(0, 2))
        x = TailedOperator(0.5 * np.array(DIAG_Q), 0, TailPattern.constant(0, 2))
        w = complete_to_isometry(x, q)
        n = w.window + abs(w.shift) + 8
        assert np.linalg.norm((w.adjoint() @ w).to_matrix(n) - np.eye(n), 2) <= 1e-10
        assert operator_distance(q.as_operator() @ w, x) <= 1e-10
        # the defect direction carries sqrt(1 - 1/4)
        d = defect_operator(x)
        assert abs(np.linalg.eigvalsh(d.block)[-1] - 1.0) <= 1e-10
        assert abs(sorted(np.linalg.eigvalsh(d.block))[-2] - math.sqrt(0.75)) <= 1e-10

    def test_norm_violation_rejected(self):
        q = ones_projection()
        x = TailedOperator(np.diag([1.5]).astype(complex), 0, TailPattern.constant(1, 1))
        with pytest.raises(ValidationError):
            complete_to_isometry(x, q)

    def test_unplaceable_defect(self):
        # zero operator into an infinite, co-infinite q: the defect is the
        # identity and cannot shift into a half-density complement
        q = TailedProjection.diagonal(TailPattern.periodic([1, 0], 0))
        x = TailedOperator(np.zeros((2, 2)), 0, TailPattern.constant(0, 2))
        with pytest.raises(DefectPlacementError):
            complete_to_isometry(x, q)

    def test_random_contract_completions(self):
        rng = SplitMix64(55)
        for _ in range(15):
            x, q, expected = random_fredholm_contraction(rng, max_window=16)
            idx = restricted_index(x, TailedProjection.identity(), q)
            assert idx == expected
            w = complete_to_isometry(x, q)
            p = as_projection(w @ w.adjoint(), tol=1e-8)
            assert essential_codimension(p, q) == idx


class TestInvertibilityEquivalences:
    def test_dense_generic_pairs(self):
        # restricted invertibility <=> ||p - q|| < 1 <=> min c > 0, index 0
        rng = SplitMix64(70)
        for _ in range(20):
            g = rng.randint(1, 8)
            n = 2 * g
            p, q, dims, svals = planted_dense_pair(rng, n, (0, 0, 0, 0), g)
            form = halmos_decompose(p, q)
            norm_diff = np.linalg.norm(p - q, 2)
            assert norm_diff < 1.0
            min_c = math.sqrt(1.0 - max(form.svals) ** 2)
            assert min_c > 0.0
            # the compression q -> p has trivial kernel and cokernel
            sv = np.linalg.svd(p @ q, compute_uv=False)[:g]
            assert np.min(sv) > 1e-10
            assert pair_index(form.cp) == 0
