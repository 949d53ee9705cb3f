"""Counterterm coefficients and the exact cancellation certificate.

Each undecorated neutral divergent tree carries an exact coefficient of the
form c * beta^k * i^m.  Coefficients of charge-flipped partners cancel
exactly, and decorated divergent trees contribute nothing by a parity
argument; together these certify that the renormalized equation carries no
counterterm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .rule_engine import TreeCatalog
from .tree_core import DecoratedTree, deco_weight, opp


@dataclass(frozen=True)
class UpsilonValue:
    """Exact scalar c * beta^k * i^m with rational c and m in {0, 1}."""

    c: Fraction
    k: int
    m: int

    def __post_init__(self):
        if self.m not in (0, 1):
            raise ValueError("i-exponent must be reduced to 0 or 1")

    def __add__(self, other: "UpsilonValue") -> "UpsilonValue":
        if self.c == 0:
            return other
        if other.c == 0:
            return UpsilonValue(Fraction(0), self.k, self.m)
        if (self.k, self.m) != (other.k, other.m):
            raise ValueError("cannot add values of different symbolic degree")
        return UpsilonValue(self.c + other.c, self.k, self.m)

    def __neg__(self) -> "UpsilonValue":
        return UpsilonValue(-self.c, self.k, self.m)

    @property
    def is_zero(self) -> bool:
        return self.c == 0

    def as_dict(self) -> dict:
        return {"c": str(self.c), "k": self.k, "m": self.m}


def upsilon(tau: DecoratedTree) -> UpsilonValue:
    """Coefficient attached to an undecorated neutral divergent tree.

    The value is (i*beta)^{-1} times a product over the nodes of
    beta * q(u)^{d(u)} / 2, with d(u) the number of branches at u.
    """
    if tau.charge != 0:
        raise ValueError("coefficient defined only for neutral trees")
    nodes = list(tau.iter_nodes())
    if any(deco_weight(n.deco) > 0 for n in nodes):
        raise ValueError("coefficient defined only for undecorated trees")
    if any(n.label == "0" for n in nodes):
        raise ValueError("coefficient defined only for all-noise trees")
    n_nodes = len(nodes)
    if (n_nodes - 1) % 2 == 0:
        # a neutral all-noise tree has evenly many nodes
        raise ValueError("neutral all-noise tree must have an even node count")
    sign = 1
    for node in nodes:
        q = 1 if node.label == "+" else -1
        sign *= q ** len(node.children)
    # (i*beta)^{-1} = -i/beta folds into c the extra factor i^2 = -1
    c = Fraction(sign, 2**n_nodes)
    return UpsilonValue(-c, n_nodes - 1, 1)


@dataclass
class CancellationLedger:
    """Pairing of divergent trees with their charge-flipped partners."""

    pairs: list[dict] = field(default_factory=list)
    parity_killed: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    covered: int = 0

    @property
    def verdict(self) -> str:
        return "counterterm vanishes" if not self.failures else "cancellation FAILED"

    @property
    def ok(self) -> bool:
        return not self.failures

    def export(self) -> dict:
        return {
            "verdict": self.verdict,
            "pairs": self.pairs,
            "parity_killed": self.parity_killed,
            "failures": self.failures,
        }


def cancellation_report(cat: TreeCatalog) -> CancellationLedger:
    """Certify, tree by tree, that all counterterm contributions vanish.

    Undecorated neutral divergent trees are matched with their charge
    flips and their coefficients must sum to zero exactly (the shared
    scalar weight of a flip pair is identical in distribution, so exact
    coefficient cancellation kills the pair).  Decorated neutral divergent
    trees are parity-killed: their scalar weight vanishes because the
    integrand is odd in the single spatial direction singled out by the
    unit decoration.
    """
    from .tree_core import symmetry_factor

    ledger = CancellationLedger()
    seen: set[str] = set()
    for key in sorted(cat.negative_neutral):
        if key in seen:
            continue
        tau = cat.negative_neutral[key]
        if not tau.deco_is_zero:
            decos = [n.deco for n in tau.iter_nodes() if deco_weight(n.deco) > 0]
            if len(decos) == 1 and decos[0] in ((0, 1, 0), (0, 0, 1)):
                ledger.parity_killed.append({"key": key, "deco": list(decos[0])})
                seen.add(key)
                ledger.covered += 1
            else:
                ledger.failures.append(
                    {"key": key, "reason": "decorated tree outside the parity pattern"}
                )
                seen.add(key)
            continue
        tau_opp = opp(tau)
        key_opp = tau_opp.key
        if key_opp not in cat.negative_neutral:
            ledger.failures.append({"key": key, "reason": "charge-flip partner missing"})
            seen.add(key)
            continue
        u = upsilon(tau)
        u_opp = upsilon(tau_opp)
        total = u + u_opp
        entry = {
            "key": key,
            "key_opp": key_opp,
            "upsilon": u.as_dict(),
            "upsilon_opp": u_opp.as_dict(),
            "sym_factor": symmetry_factor(tau),
        }
        if not total.is_zero:
            ledger.failures.append({**entry, "reason": "pair sum nonzero"})
        else:
            ledger.pairs.append(entry)
            ledger.covered += 2 if key_opp != key else 1
        seen.add(key)
        seen.add(key_opp)
    return ledger
