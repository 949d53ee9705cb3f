"""Exact cancellation of the renormalization coefficients."""

from fractions import Fraction

import pytest

from sinegordon.tree_core import (DecoratedTree, ModelParams, XI_PLUS,
                                  XI_MINUS, dipole, monomial, opp,
                                  tree_product, integrate)
from sinegordon.rule_engine import enumerate_trees
from sinegordon.counterterm import UpsilonValue, upsilon, cancellation_report


class TestUpsilon:
    def test_dipole_value(self):
        # the negative-root orientation evaluates to i*beta/4
        assert upsilon(dipole("-")) == UpsilonValue(Fraction(1, 4), 1, 1)
        assert upsilon(dipole("+")) == UpsilonValue(Fraction(-1, 4), 1, 1)

    def test_flip_pair_cancels(self):
        tau = dipole("-")
        total = upsilon(tau) + upsilon(opp(tau))
        assert total.is_zero

    def test_rejects_charged_trees(self):
        with pytest.raises(ValueError):
            upsilon(tree_product(XI_PLUS, integrate(XI_PLUS)))

    def test_rejects_decorated_and_materials(self):
        deco = DecoratedTree("-", (0, 1, 0), (integrate(XI_PLUS),))
        with pytest.raises(ValueError):
            upsilon(deco)
        with pytest.raises(ValueError):
            upsilon(monomial((0, 0, 0)))

    def test_addition_requires_matching_degree(self):
        with pytest.raises(ValueError):
            UpsilonValue(Fraction(1), 1, 1) + UpsilonValue(Fraction(1), 3, 1)


class TestCancellationLedger:
    @pytest.mark.parametrize("bb", [Fraction(6, 5), Fraction(5, 4),
                                    Fraction(13, 10), Fraction(7, 5),
                                    Fraction(29, 20)])
    def test_everything_cancels(self, bb):
        cat = enumerate_trees(ModelParams.from_beta_bar(bb))
        ledger = cancellation_report(cat)
        assert ledger.ok
        assert ledger.verdict == "counterterm vanishes"
        assert ledger.covered == len(cat.negative_neutral)

    def test_dipole_pair_recorded(self):
        cat = enumerate_trees(ModelParams.from_beta_bar(Fraction(6, 5)))
        ledger = cancellation_report(cat)
        assert len(ledger.pairs) == 1
        pair = ledger.pairs[0]
        assert {pair["key"], pair["key_opp"]} == {
            "(-;0,0,0;(+;0,0,0;))", "(+;0,0,0;(-;0,0,0;))"}
        assert pair["sym_factor"] == 1
