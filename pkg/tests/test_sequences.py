import threading
from fractions import Fraction

import numpy as np
import pytest

from qukit.errors import BaseMismatchError, NonBasisError, SequenceSpecError
from qukit.fock import make_state
from qukit.gauge import GaugeField, random_field
from qukit.numeral import arith_equal, decode_rational, format_numeral, parse_numeral
from qukit.sequences import (
    Classification,
    SeqOp,
    StateSequence,
    alternating,
    as_operator,
    asymptotic_compare,
    build_lattice,
    cauchy_report,
    cluster,
    constant,
    mixture_sequence,
    nearest_basis_sequence,
    p_nml,
    psiex1,
    q_value,
    elementwise_equality,
    seq_arith,
    seq_from_spec,
    shifted,
    table,
    transform_sequence,
    triangle_bounds,
    truncations,
)

N = parse_numeral


def texts(state):
    return sorted(format_numeral(k[0]) for k, _ in state.items())


class TestSpecs:
    def test_constant(self):
        seq = seq_from_spec("const:10:5+")
        assert all(texts(seq(n)) == ["10:5+"] for n in (0, 1, 7))

    def test_psiex1_element(self):
        psi = seq_from_spec("psiex1:s=3,k=10")(2)
        assert len(psi) == 10
        assert all(abs(c) == pytest.approx(10**-0.5) for _, c in psi.items())
        assert texts(psi)[0] == "10:3+30" and texts(psi)[-1] == "10:3+39"

    def test_psiex1_pattern_reads_from_site_zero(self):
        psi = psiex1("314", 10)(3)
        assert {format_numeral(k[0])[:7] for k, _ in psi.items()} == {"10:3+14"}

    def test_alternating(self):
        seq = seq_from_spec("alt:10:0+|10:1+")
        assert [texts(seq(n))[0] for n in range(4)] == ["10:0+", "10:1+", "10:0+", "10:1+"]

    def test_trunc(self):
        seq = seq_from_spec("trunc:value=1/3,k=10")
        assert texts(seq(4)) == ["10:0+3333"]

    def test_stream(self):
        seq = seq_from_spec("stream:k=10,digits=142857,int=3,sign=-")
        assert texts(seq(3)) == ["10:3-142"]

    def test_table_repeats_last(self):
        seq = seq_from_spec("table:10:1+|10:1+4|10:1+41")
        assert texts(seq(10)) == ["10:1+41"]

    def test_dict_form(self):
        seq = seq_from_spec({"kind": "psiex1", "s": "7", "k": 10})
        assert len(seq(1)) == 10

    def test_dict_table_with_state(self):
        state = {"terms": [{"tuple": ["10:1+"], "re": 1}, {"tuple": ["10:2+"], "re": 1}]}
        seq = seq_from_spec({"kind": "table", "states": [state, "10:3+"]})
        assert texts(seq(0)) == ["10:1+", "10:2+"]

    @pytest.mark.parametrize(
        "bad", ["nope:1", "psiex1:s=3", "alt:10:0+", "trunc:value=x,k=10", "psiex1:s=9,k=2", "const", 42]
    )
    def test_malformed(self, bad):
        with pytest.raises(SequenceSpecError):
            seq = seq_from_spec(bad)
            seq(3)

    def test_memoized_and_fresh_labels(self):
        seq = psiex1("3", 10)
        assert seq(4) is seq(4)
        assert seq(4).labels != seq(5).labels

    def test_concurrent_first_access(self):
        seq = psiex1("3", 10)
        got = []
        threads = [threading.Thread(target=lambda: got.append(seq(6))) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(s is got[0] for s in got)


class TestPnml:
    def test_equal_constants(self):
        a, b = constant("10:5+"), constant("10:05+0")
        assert all(p_nml("eq", a, b, n, m, l) == 1 for n in (1, 3) for m in (2, 5) for l in (0, 4))

    def test_psiex1_window(self):
        seq = psiex1("3", 10)
        for n, m, l in [(3, 4, 2), (5, 5, 4), (9, 6, 5)]:
            assert p_nml("self_cauchy", seq, None, n, m, l) == pytest.approx(1)

    def test_psiex1_below_window(self):
        assert p_nml("self_cauchy", psiex1("3", 10), None, 2, 2, 2) < 1

    def test_less(self):
        third, four = truncations(Fraction(1, 3), 10), constant("10:0+4")
        assert p_nml("lt", third, four, 20, 25, 2) == 1
        assert p_nml("lt", four, third, 20, 25, 2) == 0

    def test_base_mismatch(self):
        with pytest.raises(BaseMismatchError):
            p_nml("eq", constant("10:1+"), constant("2:1+"), 1, 1, 1)


def random_superposition_sequence(rng, k=3):
    value = Fraction(int(rng.integers(-20, 20)), int(rng.integers(1, 9)))
    size = int(rng.integers(1, 4))
    offsets = [int(x) for x in rng.integers(-2, 3, size)]
    amps = [complex(*rng.standard_normal(2)) for _ in range(size)]
    return cluster(value, k, offsets, amps, decay=float(rng.uniform(0, 0.5)))


class TestLattice:
    def test_fast_lattice_matches_direct(self):
        rng = np.random.default_rng(0)
        for _ in range(4):
            a, b = random_superposition_sequence(rng), random_superposition_sequence(rng)
            for rel, second in (("self_cauchy", None), ("eq", b), ("lt", b)):
                lat = build_lattice(rel, a, second, 5, 3)
                for n in range(1, 6):
                    for m in range(1, 6):
                        for l in range(4):
                            assert lat.cell(n, m, l) == pytest.approx(p_nml(rel, a, second, n, m, l), abs=1e-12)

    def test_csv(self):
        lat = build_lattice("self_cauchy", constant("10:1+"), None, 2, 1)
        lines = lat.to_csv().splitlines()
        assert lines[0] == "n,m,l,P" and len(lines) == 1 + 2 * 2 * 2
        assert lines[1] == "1,1,0,1"


class TestCauchy:
    def test_constant(self):
        r = cauchy_report(constant("10:5+"), 6, 3)
        assert r.classification is Classification.CAUCHY_AT_HORIZON
        assert np.all(r.p_pl == 1) and r.witness_p == [0, 0, 0, 0]

    def test_psiex1(self):
        r = cauchy_report(psiex1("3", 10), 16, 8, 1e-9)
        assert r.is_cauchy and r.witness_p == list(range(9))

    def test_alternating_refuted(self):
        r = cauchy_report(alternating("10:0+", "10:1+"), 8, 1)
        assert r.classification is Classification.REFUTED_AT_HORIZON

    def test_json(self):
        data = cauchy_report(psiex1("1", 2), 4, 2).to_json()
        assert set(data) >= {"classification", "epsilon", "N", "L", "P_p_l", "witness_p"}
        assert len(data["P_p_l"]) == 3 and len(data["P_p_l"][0]) == 3

    def test_default_epsilon(self):
        assert cauchy_report(constant("10:1+"), 4, 2).epsilon == 1e-9
        assert cauchy_report(psiex1("1", 2), 4, 2).epsilon == 1e-3

    def test_horizon_validation(self):
        with pytest.raises(ValueError):
            cauchy_report(constant("10:1+"), 1, 2)

    def test_late_outlier_still_cauchy(self):
        seq = table(["10:0+"] * 5 + ["10:1+"] + ["10:0+"] * 10)
        r = cauchy_report(seq, 8, 2)
        assert r.is_cauchy and r.witness_p == [0, 5, 5]

    def test_monotone_on_generated(self):
        rng = np.random.default_rng(1)
        for _ in range(6):
            assert not cauchy_report(random_superposition_sequence(rng), 8, 4).defects

    def test_indeterminate(self):
        # an even split between 0 and 1 never settles: P stays at 1/2
        seq = table([make_state([("10:0+", 1), ("10:1+", 1)])])
        r = cauchy_report(seq, 8, 2)
        assert r.p_pl[-1][1] == pytest.approx(0.5)
        assert r.classification is Classification.INDETERMINATE


class TestCompare:
    def test_same_constant(self):
        r = asymptotic_compare(constant("10:5+"), constant("10:5+"), 6, 3)
        assert (r.eq, r.lt, r.gt, r.verdict) == (1, 0, 0, "EQ")

    def test_third_below_four_tenths(self):
        r = asymptotic_compare(truncations(Fraction(1, 3), 10), constant("10:0+4"), 10, 4)
        assert r.lt == 1 and r.verdict == "LT"

    def test_psiex1_shifted(self):
        seq = psiex1("3", 10)
        r = asymptotic_compare(seq, shifted(seq, 3), 12, 6)
        assert r.eq == pytest.approx(1)

    def test_not_cauchy(self):
        r = asymptotic_compare(alternating("10:0+", "10:1+"), constant("10:1+"), 6, 2)
        assert r.verdict == "UNDETERMINED"

    def test_equivalence_relation(self):
        fam = [truncations(Fraction(2, 7), 10), truncations(Fraction(2, 7), 10, rate=2), truncations(Fraction(2, 7), 10, offset=3)]
        for a in fam:
            assert asymptotic_compare(a, a, 10, 5).eq == 1
            for b in fam:
                assert asymptotic_compare(a, b, 10, 5).eq == asymptotic_compare(b, a, 10, 5).eq == 1

    def test_elementwise_equality_too_strong(self):
        seq = psiex1("3", 10)
        assert elementwise_equality(seq, seq, 5) == pytest.approx(0.1)
        assert asymptotic_compare(seq, seq, 12, 6).eq == pytest.approx(1)


class TestNearest:
    def test_basis_sequence_is_fixed(self):
        seq = truncations(Fraction(1, 7), 10)
        proj = nearest_basis_sequence(seq, 6)
        for n in range(1, 6):
            assert texts(proj(n)) == texts(seq(n))

    def test_psiex1_tie_break(self):
        proj = nearest_basis_sequence(psiex1("3", 10), 8)
        assert texts(proj(3)) == ["10:3+33"]

    def test_projection_cauchy_and_equal(self):
        seq = psiex1("3", 10)
        proj = nearest_basis_sequence(seq, 8)
        assert cauchy_report(proj, 12, 6).is_cauchy
        assert asymptotic_compare(seq, proj, 12, 6, check_cauchy=False).eq == pytest.approx(1)

    def test_bounds_on_random(self):
        rng = np.random.default_rng(2)
        for _ in range(3):
            seq = random_superposition_sequence(rng)
            proj = nearest_basis_sequence(seq, 4)
            lat = build_lattice("self_cauchy", seq, None, 5, 3)
            for n in range(1, 6):
                for l in range(4):
                    q, _ = q_value(seq, n, l)
                    assert all(q >= lat.cell(n, m, l) - 1e-12 for m in range(1, 6))
                    for m in range(1, 6):
                        w, x = triangle_bounds(seq, proj, n, m, l)
                        assert w <= x + 1e-12


class TestArith:
    def test_product_of_constants(self):
        seq = seq_arith(SeqOp.MUL, constant("10:2+"), constant("10:3+"))
        assert texts(seq(4)) == ["10:6+"]

    def test_sum_of_thirds(self):
        third = truncations(Fraction(1, 3), 10)
        total = seq_arith(SeqOp.ADD, third, third)
        assert cauchy_report(total, 10, 5).is_cauchy
        assert asymptotic_compare(total, truncations(Fraction(2, 3), 10), 10, 5).eq == 1

    def test_diagonal_division(self):
        seq = seq_arith(SeqOp.DIV_DIAG, constant("10:1+"), constant("10:3+"))
        assert texts(seq(4)) == ["10:0+3333"]

    def test_representatives_do_not_matter(self):
        a1, a2 = truncations(Fraction(1, 3), 10), truncations(Fraction(1, 3), 10, rate=2)
        b = truncations(Fraction(5, 7), 10)
        for op in (SeqOp.ADD, SeqOp.SUB, SeqOp.MUL):
            r = asymptotic_compare(seq_arith(op, a1, b), seq_arith(op, a2, b), 10, 5)
            assert r.eq == 1

    def test_superposition_rejected(self):
        seq = seq_arith(SeqOp.ADD, psiex1("3", 10), constant("10:1+"))
        with pytest.raises(NonBasisError):
            seq(2)

    def test_mixture_route(self):
        mix = mixture_sequence(SeqOp.ADD, psiex1("3", 10), constant("10:1+"))(1)
        assert len(mix.outcomes) == 10
        assert sum(p for _, p in mix.outcomes) == pytest.approx(1)


class TestTransform:
    def test_identity_gauge(self):
        seq = psiex1("3", 2 + 8)
        out = transform_sequence(seq, gauge=GaugeField.identity(10))
        assert texts(out(3)) == texts(seq(3))

    def test_gauge_keeps_classification(self):
        rng = np.random.default_rng(3)
        for seq in (psiex1("1", 2), alternating("2:0+", "2:1+"), truncations(Fraction(1, 3), 2)):
            U = random_field(2, [(j, None) for j in range(-5, 2)], rng)
            a = cauchy_report(seq, 6, 4)
            b = cauchy_report(transform_sequence(seq, gauge=U), 6, 4)
            assert a.classification is b.classification

    def test_gauge_requires_conjugation(self):
        H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        seq = alternating("2:0+", "2:1+")
        U = GaugeField(2, "H", {(0, None): H})
        moved = transform_sequence(seq, gauge=U)
        assert len(moved(1)) == 2
        assert cauchy_report(moved, 6, 2).classification is Classification.REFUTED_AT_HORIZON

    def test_base(self):
        seq = transform_sequence(truncations(Fraction(1, 2), 10), base=2)
        assert seq.base == 2 and texts(seq(3)) == ["2:0+1"]
        assert asymptotic_compare(seq, constant("2:0+1"), 8, 4).eq == 1

    def test_base_inexact(self):
        seq = transform_sequence(truncations(Fraction(1, 3), 10), base=2)
        assert asymptotic_compare(seq, truncations(Fraction(1, 3), 2), 12, 6).eq == 1

    def test_exactly_one_mode(self):
        with pytest.raises(ValueError):
            transform_sequence(constant("10:1+"))


class TestOperator:
    def test_apply(self):
        seq = psiex1("3", 10)
        assert as_operator(seq)("10:7+") is seq(7)

    @pytest.mark.parametrize("bad", ["10:07+", "10:7-", "10:7+5", "2:1+"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            as_operator(psiex1("3", 10))(bad)
