from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qukit.base_change import (
    DomainKind,
    convert_approx,
    convert_exact,
    convert_state,
    convert_with_gauges,
    in_exact_domain,
    induced_block_gauge,
    pf_domain_class,
    primorial,
    regroup_digits,
    regroup_state,
    smallest_same_pf,
)
from qukit.errors import OutOfDomainError
from qukit.fock import basis_state, inner_product, make_state
from qukit.gauge import GaugeField, apply_gauge, random_field
from qukit.numeral import _raw, arith_less, canonicalize, decode_rational, format_numeral, parse_numeral

N = parse_numeral


def terminates(v: Fraction, k: int, digits: int = 64) -> bool:
    rem = abs(v.numerator) % v.denominator
    for _ in range(digits):
        if rem == 0:
            return True
        rem = rem * k % v.denominator
    return rem == 0


@st.composite
def numerals(draw, k):
    digits = draw(st.lists(st.integers(0, k - 1), min_size=1, max_size=10))
    return _raw(k, draw(st.sampled_from((1, -1))), tuple(digits), draw(st.integers(-len(digits) + 1, 2)))


class TestDomain:
    @pytest.mark.parametrize(
        "k, k2, kind",
        [
            (10, 3, DomainKind.DISJOINT),
            (6, 12, DomainKind.EQUAL),
            (2, 10, DomainKind.SUBSET),
            (10, 2, DomainKind.SUPERSET),
            (6, 10, DomainKind.OVERLAP),
        ],
    )
    def test_classes(self, k, k2, kind):
        assert pf_domain_class(k, k2).kind is kind

    def test_supports(self):
        dc = pf_domain_class(10, 3)
        assert dc.pf_source == {2, 5} and dc.pf_target == {3}

    @pytest.mark.parametrize("k, k2", [(10, 3), (2, 10), (10, 2), (6, 10), (6, 12), (3, 10), (12, 18)])
    @given(data=st.data())
    def test_rule_matches_brute_force(self, k, k2, data):
        a = data.draw(numerals(k))
        v = decode_rational(a)
        expect = terminates(v, k2)
        assert in_exact_domain(v, k2) == expect
        if expect:
            assert decode_rational(convert_exact(a, k2)) == v
        else:
            with pytest.raises(OutOfDomainError):
                convert_exact(a, k2)

    def test_disjoint_keeps_integers_only(self):
        assert format_numeral(convert_exact(N("10:7+"), 3)) == "3:21+"
        with pytest.raises(OutOfDomainError):
            convert_exact(N("10:0+5"), 3)


class TestExact:
    def test_half_to_binary(self):
        assert format_numeral(convert_exact(N("10:0+5"), 2)) == "2:0+1"

    def test_third_out_of_domain(self):
        with pytest.raises(OutOfDomainError):
            convert_exact(N("3:0+1"), 10)

    def test_keeps_label(self):
        a = N("10:0+5")
        assert convert_exact(a, 2).h == a.h

    @given(numerals(6))
    def test_equal_class_round_trip(self, a):
        there = convert_exact(a, 12)
        assert convert_exact(there, 6) == canonicalize(a)

    @given(numerals(2), numerals(2))
    def test_order_preserved(self, a, b):
        assert arith_less(a, b) == arith_less(convert_exact(a, 10), convert_exact(b, 10))


class TestApprox:
    def test_third(self):
        assert format_numeral(convert_approx(N("3:0+1"), 10, 3)) == "10:0+333"

    @pytest.mark.parametrize("ell", [0, 1, 5])
    def test_integer_exact(self, ell):
        assert format_numeral(convert_approx(N("10:7+"), 2, ell)) == "2:111+"

    def test_accuracy_zero_truncates(self):
        assert format_numeral(convert_approx(N("10:2-75"), 3, 0)) == "3:2-"

    @given(numerals(3), st.integers(0, 8))
    def test_error_bound(self, a, ell):
        err = abs(decode_rational(a) - decode_rational(convert_approx(a, 10, ell)))
        assert err < Fraction(1, 10**ell)


class TestSmallBases:
    @pytest.mark.parametrize("k, r", [(12, 6), (30, 30), (18, 6)])
    def test_radical(self, k, r):
        assert smallest_same_pf(k) == r

    @pytest.mark.parametrize("n, p", [(3, 30), (1, 2), (4, 210)])
    def test_primorial(self, n, p):
        assert primorial(n) == p

    def test_primorial_zero(self):
        with pytest.raises(ValueError):
            primorial(0)


class TestStates:
    def test_identity_gauges_is_convert_exact(self):
        psi = basis_state("10:0+5")
        out = convert_with_gauges(GaugeField.identity(2), psi, GaugeField.identity(10))
        (key, c), = out.items()
        assert format_numeral(key[0]) == "2:0+1" and abs(c) == pytest.approx(1)

    def test_gauge_chain(self):
        rng = np.random.default_rng(0)
        U = random_field(10, [(0, None), (-1, None)], rng)
        V = random_field(2, [(j, None) for j in range(-3, 2)], rng)
        psi = make_state([("10:0+5", 1), ("10:1+25", 1j)])
        got = convert_with_gauges(V, apply_gauge(U, psi), U)
        want = apply_gauge(V, convert_state(psi, 2))
        assert abs(inner_product(want, got.relabel(want.labels))) == pytest.approx(1, abs=1e-10)

    def test_out_of_domain_component(self):
        psi = make_state([("3:1+", 1), ("3:0+1", 1)])
        with pytest.raises(OutOfDomainError):
            convert_state(psi, 10)

    def test_padding_variants_collide(self):
        psi = make_state([("10:5+", 1), ("10:05+", 1)])
        out = convert_state(psi, 2)
        assert out.is_basis and out.norm_squared() == pytest.approx(1)


class TestPowerBase:
    def test_regroup_value_and_padding(self):
        a = N("2:0110+1")
        b = regroup_digits(a, 2)
        assert b.base == 4 and decode_rational(b) == decode_rational(a)
        assert format_numeral(b) == "4:12+2"

    def test_block_gauge_commutes(self):
        rng = np.random.default_rng(3)
        U = random_field(2, [(j, None) for j in range(-2, 4)], rng)
        psi = make_state([("2:1011+10", 1), ("2:0010-01", 1j), ("2:11+00", 0.5)])
        a = regroup_state(apply_gauge(U, psi), 2)
        b = apply_gauge(induced_block_gauge(U, 2), regroup_state(psi, 2))
        assert abs(inner_product(a, b.relabel(a.labels))) == pytest.approx(1, abs=1e-10)
