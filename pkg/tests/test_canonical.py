import pytest

from projpair.canonical import (
    COMPACT,
    Cardinal,
    CanonicalPair,
    FINITE_RANK,
    Geometric,
    INFINITY,
    PowerDecay,
    SSpectrum,
    Undefined,
    conjugator_exists,
    corner_trace,
    diff_in_ideal,
    ideal_pow,
    majorizes,
    pair_index,
    pair_is_fredholm,
    same_diagonal_witness,
    schatten,
)
from projpair.errors import NotFredholmError, PreconditionFailed, ValidationError
from projpair.rng import SplitMix64


def cp(n11=0, n10=0, n01=0, n00=0, s=SSpectrum()):
    wrap = lambda v: v if isinstance(v, Cardinal) else Cardinal(v)
    return CanonicalPair(wrap(n11), wrap(n10), wrap(n01), wrap(n00), s)


GEO = SSpectrum(head=(0.9,), tail=Geometric(0.5))
SLOW = SSpectrum(head=(), tail=PowerDecay(0.4))
HARMONIC = SSpectrum(head=(), tail=PowerDecay(1.0))


class TestCardinal:
    def test_arithmetic(self):
        assert Cardinal(2) + Cardinal(3) == Cardinal(5)
        assert Cardinal(2) + INFINITY == INFINITY
        assert INFINITY + INFINITY == INFINITY
        assert Cardinal(5) - Cardinal(2) == 3

    def test_infinite_subtraction_guarded(self):
        with pytest.raises(NotFredholmError):
            INFINITY - INFINITY
        with pytest.raises(NotFredholmError):
            Cardinal(1) - INFINITY

    def test_validation(self):
        with pytest.raises(ValidationError):
            Cardinal(-1)

    def test_json(self):
        assert INFINITY.to_json() == "inf"
        assert Cardinal.from_json("inf") == INFINITY
        assert Cardinal.from_json(4) == Cardinal(4)


class TestFredholmAndIndex:
    def test_examples(self):
        assert pair_is_fredholm(cp(n10=2, n01=0, s=GEO))
        assert not pair_is_fredholm(cp(n01=INFINITY))
        assert pair_is_fredholm(cp(n10=3, n01=1))

    def test_index_examples(self):
        assert pair_index(cp(n10=3, n01=1)) == 2
        assert pair_index(cp()) == 0
        assert pair_index(cp(n10=0, n01=1)) == -1

    def test_index_requires_fredholm(self):
        with pytest.raises(NotFredholmError):
            pair_index(cp(n10=INFINITY))

    def test_antisymmetry_under_swap(self):
        rng = SplitMix64(3)
        for _ in range(100):
            pair = cp(rng.randint(0, 5), rng.randint(0, 5), rng.randint(0, 5))
            assert pair_index(pair) == -pair_index(pair.swapped())


class TestIdealMembership:
    def test_examples(self):
        assert diff_in_ideal(cp(s=HARMONIC), schatten(2))       # sum k^-2 converges
        assert not diff_in_ideal(cp(s=HARMONIC), schatten(1))   # harmonic diverges
        assert not diff_in_ideal(cp(n10=INFINITY, s=GEO), COMPACT)

    def test_finite_rank_membership(self):
        assert diff_in_ideal(cp(s=SSpectrum(head=(0.5, 0.3))), FINITE_RANK)
        assert not diff_in_ideal(cp(s=GEO), FINITE_RANK)

    def test_lattice_monotone(self):
        chain = [FINITE_RANK, schatten(0.5), schatten(1), schatten(2), COMPACT]
        rng = SplitMix64(10)
        spectra = [SSpectrum(), GEO, SLOW, HARMONIC,
                   SSpectrum(head=(), tail=PowerDecay(2.3))]
        for _ in range(60):
            pair = cp(rng.randint(0, 2), rng.randint(0, 2), rng.randint(0, 2),
                      s=rng.choice(spectra))
            verdicts = [diff_in_ideal(pair, j) for j in chain]
            # once true, stays true up the chain
            assert verdicts == sorted(verdicts)

    def test_lattice_order(self):
        assert FINITE_RANK <= schatten(1) <= schatten(2) <= COMPACT
        assert not schatten(2) <= schatten(1)


class TestCornerTrace:
    def test_examples(self):
        assert corner_trace(cp(n10=1, n01=0, s=GEO)) == 1
        assert corner_trace(cp()) == 0
        out = corner_trace(cp(s=SLOW))
        assert isinstance(out, Undefined)
        assert "L^2" in out.reason

    def test_undefined_names_infinite_cardinal(self):
        out = corner_trace(cp(n10=INFINITY))
        assert isinstance(out, Undefined)
        assert "n10" in out.reason

    def test_matches_pair_index_when_defined(self):
        rng = SplitMix64(8)
        for _ in range(100):
            pair = cp(rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 3),
                      s=rng.choice([SSpectrum(), GEO]))
            assert corner_trace(pair) == pair_index(pair)


class TestConjugator:
    def test_examples(self):
        assert conjugator_exists(cp(n10=1, n01=1, s=GEO), COMPACT)
        assert not conjugator_exists(cp(n10=1, n01=0, s=GEO), COMPACT)
        assert not conjugator_exists(cp(s=HARMONIC), schatten(1))

    def test_exact_iff(self):
        rng = SplitMix64(21)
        ideals = [FINITE_RANK, schatten(1), schatten(2), COMPACT]
        spectra = [SSpectrum(), GEO, SLOW, HARMONIC]
        for _ in range(200):
            pair = cp(0, rng.randint(0, 2), rng.randint(0, 2), s=rng.choice(spectra))
            ideal = rng.choice(ideals)
            expected = diff_in_ideal(pair, ideal) and pair_index(pair) == 0
            assert conjugator_exists(pair, ideal) == expected


class TestIdealPow:
    def test_examples(self):
        assert ideal_pow(schatten(2), 2) == schatten(1)
        assert ideal_pow(schatten(1), 0.5) == schatten(2)
        assert ideal_pow(FINITE_RANK, 2) == FINITE_RANK
        assert ideal_pow(COMPACT, 0.25) == COMPACT

    def test_composition_law(self):
        rng = SplitMix64(5)
        for _ in range(100):
            p = rng.uniform(0.2, 4.0)
            a = rng.uniform(0.25, 3.0)
            b = rng.uniform(0.25, 3.0)
            lhs = ideal_pow(ideal_pow(schatten(p), a), b)
            rhs = ideal_pow(schatten(p), a * b)
            assert abs(lhs.p - rhs.p) < 1e-12

    def test_rejects_nonpositive_exponent(self):
        with pytest.raises(ValidationError):
            ideal_pow(schatten(1), 0.0)


class TestMajorizes:
    def test_examples(self):
        assert majorizes((1, 0), (1, 0))
        assert majorizes((0.5, 0.5), (1, 0))
        assert not majorizes((0.9, 0.6), (1, 0.4))

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            majorizes((1,), (1, 0))

    def test_reflexive_and_transitive(self):
        rng = SplitMix64(17)
        for _ in range(50):
            n = rng.randint(1, 8)
            seqs = [[rng.uniform(0, 1) for _ in range(n)] for _ in range(3)]
            for s in seqs:
                assert majorizes(s, s)
            x, y, z = seqs
            if majorizes(x, y) and majorizes(y, z):
                assert majorizes(x, z)


class TestSameDiagonalWitness:
    def test_raises_index_by_one(self):
        witness = same_diagonal_witness(cp(s=SLOW))
        assert pair_index(witness.pair) == 1
        assert not witness.diagonal_match_certified

    def test_geometric_tail_rejected(self):
        # geometric decay is Hilbert-Schmidt, so the hypothesis fails
        with pytest.raises(PreconditionFailed):
            same_diagonal_witness(cp(s=GEO))

    def test_infinite_cardinal_rejected(self):
        with pytest.raises(PreconditionFailed):
            same_diagonal_witness(cp(n10=INFINITY, s=SLOW))

    def test_shift_from_any_start(self):
        witness = same_diagonal_witness(cp(n10=2, n01=2, s=SSpectrum(head=(), tail=PowerDecay(0.3))))
        assert pair_index(witness.pair) == 1


class TestSerialization:
    def test_round_trip(self):
        pair = cp(n11=INFINITY, n10=2, n01=0, n00=1, s=GEO)
        doc = pair.to_json()
        assert doc["n11"] == "inf"
        assert CanonicalPair.from_json(doc) == pair

    def test_power_tail_round_trip(self):
        pair = cp(s=SSpectrum(head=(0.5, 0.25), tail=PowerDecay(1.5)))
        assert CanonicalPair.from_json(pair.to_json()) == pair


class TestSSpectrum:
    def test_head_validation(self):
        with pytest.raises(ValidationError):
            SSpectrum(head=(1.5,))
        with pytest.raises(ValidationError):
            SSpectrum(head=(0.2, 0.4))  # increasing

    def test_values_materialization(self):
        s = SSpectrum(head=(0.5,), tail=PowerDecay(1.0))
        assert s.values(3) == [0.5, 1.0, 2.0 ** -1.0]
        assert SSpectrum().values(2) == [0.0, 0.0]
