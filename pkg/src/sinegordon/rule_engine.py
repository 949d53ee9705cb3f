"""Enumeration of admissible trees below the homogeneity cutoff.

A tree is admissible when every node is of one of the allowed shapes: a
(possibly decorated) 0-node with any number of kernel-edge branches, or a
charged node with any number of kernel-edge branches.  The enumerator
returns the full finite catalog below the cutoff ``mu`` and classifies the
divergent (negative-homogeneity) and neutral-divergent trees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .tree_core import (
    DecoratedTree,
    Homogeneity,
    ModelParams,
    deco_weight,
    opp,
    s_homogeneity,
    sg_homogeneity,
)

#: decorations allowed on a single node during enumeration; anything of
#: scaled weight > 2 cannot occur below a cutoff mu < 2.
MAX_NODE_DECO_WEIGHT = 2

_DECOS = tuple(
    (k0, k1, k2)
    for k0 in range(2)
    for k1 in range(3)
    for k2 in range(3)
    if deco_weight((k0, k1, k2)) <= MAX_NODE_DECO_WEIGHT
)


@dataclass(frozen=True)
class RuleSG:
    """Node grammar data plus the subcriticality witness values.

    The witness registers ``reg_kernel = 7(2-beta_bar)/8`` for the kernel
    edge type and ``reg_noise = -(2+7*beta_bar)/8`` for the charged node
    types; admissibility of the grammar is reflected in the exact relations
    checked by :meth:`witness_ok`.
    """

    params: ModelParams

    @property
    def reg_kernel(self) -> Fraction:
        return Fraction(7, 8) * (2 - self.params.beta_bar)

    @property
    def reg_noise(self) -> Fraction:
        return -(2 + 7 * self.params.beta_bar) / 8

    def witness_ok(self) -> bool:
        bb = self.params.beta_bar
        # the assigned regularities sit strictly below the true homogeneities
        # and saturate the budget of one kernel integration exactly
        return (
            self.reg_noise < -bb
            and self.reg_kernel == 2 + self.reg_noise
            and 0 < 2 - bb
        )


@dataclass
class TreeCatalog:
    """Complete catalog of admissible trees below the cutoff."""

    params: ModelParams
    all: dict[str, DecoratedTree]
    negative: dict[str, DecoratedTree] = field(default_factory=dict)
    negative_neutral: dict[str, DecoratedTree] = field(default_factory=dict)

    def entry(self, key: str) -> dict:
        tau = self.all[key]
        sh = s_homogeneity(tau)
        gh = sg_homogeneity(tau)
        return {
            "key": key,
            "s_hom": {"a": str(sh.const), "b": str(sh.bcoeff)},
            "sg_hom": {"a": str(gh.const), "b": str(gh.bcoeff)},
            "charge": tau.charge,
            "n_noises": tau.n_noises,
            "n_edges": tau.n_edges,
            "negative": key in self.negative,
            "neutral": tau.charge == 0,
            "renormalizable": key in self.negative_neutral,
        }

    def export(self) -> list[dict]:
        return [self.entry(k) for k in sorted(self.all)]


@dataclass
class AuditReport:
    ok: bool
    checked: int
    violations: list[dict]


def enumerate_trees(params: ModelParams) -> TreeCatalog:
    """All admissible trees with homogeneity strictly below ``params.mu``.

    Fixpoint generation: every admissible tree consists of a root node
    (label, decoration) together with a multiset of admissible branch
    subtrees, each branch costing ``2 + |branch|_s > 2 - beta_bar > 0``.
    Every branch of a catalog tree is itself a catalog tree, so iterating
    node construction over the current catalog until nothing new appears
    yields exactly the catalog.
    """
    bb = params.beta_bar
    mu = params.mu
    if bb >= 2:
        raise ValueError("enumeration requires beta_bar < 2")

    found: dict[str, DecoratedTree] = {}

    def hom_at(tau: DecoratedTree) -> Fraction:
        return s_homogeneity(tau).at(bb)

    # single-node seeds
    frontier: list[DecoratedTree] = []
    for label in ("+", "-", "0"):
        for deco in _DECOS:
            root_cost = Fraction(deco_weight(deco)) - (bb if label != "0" else 0)
            if root_cost < mu:
                t = DecoratedTree(label, deco)
                found[t.key] = t
                frontier.append(t)

    while frontier:
        # branch candidates sorted by cost; cost of using tau as a branch
        # is 2 + |tau|_s
        cand = sorted(found.values(), key=lambda t: (hom_at(t), t.key))
        costs = [2 + hom_at(t) for t in cand]
        new: dict[str, DecoratedTree] = {}

        def extend(idx: int, budget: Fraction, chosen: list[DecoratedTree],
                   root_label: str, root_deco: tuple[int, int, int]):
            if chosen:
                t = DecoratedTree(root_label, root_deco, tuple(chosen))
                if t.key not in found and t.key not in new:
                    new[t.key] = t
            for i in range(idx, len(cand)):
                if costs[i] >= budget:
                    break
                chosen.append(cand[i])
                extend(i, budget - costs[i], chosen, root_label, root_deco)
                chosen.pop()

        for label in ("+", "-", "0"):
            for deco in _DECOS:
                root_cost = Fraction(deco_weight(deco)) - (bb if label != "0" else 0)
                extend(0, mu - root_cost, [], label, deco)

        found.update(new)
        frontier = list(new.values())

    cat = TreeCatalog(params, found)
    classify_trees(cat)
    return cat


def classify_trees(cat: TreeCatalog):
    """Partition the catalog into divergent and neutral-divergent trees."""
    bb = cat.params.beta_bar
    neg: dict[str, DecoratedTree] = {}
    neg_neut: dict[str, DecoratedTree] = {}
    for key, tau in cat.all.items():
        if s_homogeneity(tau).at(bb) < 0:
            neg[key] = tau
            if tau.charge == 0:
                neg_neut[key] = tau
    cat.negative = neg
    cat.negative_neutral = neg_neut
    return neg, neg_neut


def structural_audit(cat: TreeCatalog, extra: dict[str, DecoratedTree] | None = None
                     ) -> AuditReport:
    """Check the structural constraints every divergent tree must satisfy.

    For each divergent tree: every node carries a charge (no 0-labeled
    nodes), and the decoration either vanishes identically or is supported
    on a single node with value (0,1,0) or (0,0,1).  Additionally every
    catalog tree other than the bare noises has homogeneity > -beta_bar.
    """
    bb = cat.params.beta_bar
    violations: list[dict] = []
    negatives = dict(cat.negative)
    if extra:
        negatives.update(extra)
    checked = 0
    for key, tau in negatives.items():
        checked += 1
        labels = [node.label for node in tau.iter_nodes()]
        if any(l == "0" for l in labels):
            violations.append({"key": key, "reason": "0-labeled node in divergent tree"})
            continue
        decos = [node.deco for node in tau.iter_nodes() if deco_weight(node.deco) > 0]
        if decos and (len(decos) > 1 or decos[0] not in ((0, 1, 0), (0, 0, 1))):
            violations.append({"key": key, "reason": "decoration not a single unit space index"})
    for key, tau in cat.all.items():
        checked += 1
        if tau.n_nodes == 1 and tau.label != "0" and tau.total_deco_weight == 0:
            continue  # the bare noises saturate the bound
        if s_homogeneity(tau).at(bb) <= -bb:
            violations.append({"key": key, "reason": "homogeneity at or below -beta_bar"})
    return AuditReport(ok=not violations, checked=checked, violations=violations)


def opp_closure_ok(cat: TreeCatalog) -> bool:
    """The catalog and both divergent subsets are stable under charge flip."""
    return (
        all(opp(t).key in cat.all for t in cat.all.values())
        and all(opp(t).key in cat.negative for t in cat.negative.values())
        and all(opp(t).key in cat.negative_neutral for t in cat.negative_neutral.values())
    )
