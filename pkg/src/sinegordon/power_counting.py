"""Coalescence trees, cluster homogeneities, subdivergence audits, and
summability probes.

A coalescence tree organizes a set of integration variables hierarchically
by the dyadic scale at which they cluster together.  A total homogeneity is
a formal linear combination of cluster markers; evaluated on a coalescence
tree it assigns an exact rational weight to every internal node.  The
audits in this module check, exhaustively over all coalescence trees on a
small vertex set, the sign conditions that make the scale-by-scale volume
bounds summable, and the probes measure that summability numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .moment_diagrams import BASE_POINT, MomentDiagram, derived_edge_sets
from .tree_core import SCALING_DIM, deco_weight

UP = "up"
UPUP = "upup"

#: default combinatorial constant in the annular-window condition
ANNULUS_CONSTANT = 2

#: hard cap on exhaustive coalescence-tree enumeration
MAX_EXHAUSTIVE_VERTICES = 8


# --- coalescence trees ---------------------------------------------------------


@dataclass(frozen=True)
class CoalescenceTree:
    """Rooted cluster hierarchy over a vertex set.

    Internal nodes are identified with their vertex subsets (clusters);
    every internal node has at least two children which partition it, and
    singleton children are leaves.  Optional integer labels record the
    coalescence scale of each cluster and must strictly increase away from
    the root.
    """

    vertices: frozenset
    children: tuple  # tuple of (cluster, tuple-of-child-clusters) pairs
    labels: tuple | None = None  # tuple of (cluster, int) pairs

    def __post_init__(self):
        cmap = dict(self.children)
        root = frozenset(self.vertices)
        if root not in cmap:
            raise ValueError("children map must contain the full vertex set")
        for a, kids in cmap.items():
            if len(kids) < 2:
                raise ValueError("internal cluster with fewer than two children")
            u = frozenset().union(*kids)
            if u != a or sum(len(k) for k in kids) != len(a):
                raise ValueError("children must partition their cluster")
        if self.labels is not None:
            lmap = dict(self.labels)
            for a, kids in cmap.items():
                for k in kids:
                    if k in cmap and lmap[k] <= lmap[a]:
                        raise ValueError("labels must strictly increase away from root")

    @property
    def root(self) -> frozenset:
        return frozenset(self.vertices)

    @property
    def internal(self) -> list[frozenset]:
        return [a for a, _ in self.children]

    def kids(self, a: frozenset):
        return dict(self.children)[a]

    def n_children(self, a: frozenset) -> int:
        return len(self.kids(a))

    def label(self, a: frozenset) -> int:
        return dict(self.labels)[a]

    def up(self, marker: frozenset) -> frozenset:
        """Smallest internal cluster containing every vertex of the marker."""
        best = None
        for a in self.internal:
            if marker <= a and (best is None or len(a) < len(best)):
                best = a
        if best is None:
            raise ValueError(f"marker {sorted(marker)} not within the vertex set")
        return best

    def upup(self, marker: frozenset) -> frozenset:
        """Parent cluster of ``up(marker)``; the root maps to itself."""
        a = self.up(marker)
        if a == self.root:
            return a
        best = None
        for b in self.internal:
            if a < b and (best is None or len(b) < len(best)):
                best = b
        return best

    def subtree(self, a: frozenset) -> list[frozenset]:
        """Internal clusters contained in ``a`` (including ``a``)."""
        return [b for b in self.internal if b <= a]

    def co_subtree(self, a: frozenset) -> list[frozenset]:
        """Internal clusters not contained in ``a``."""
        return [b for b in self.internal if not (b <= a)]


def _set_partitions(seq: list):
    """All partitions of ``seq`` into nonempty blocks."""
    if len(seq) == 1:
        yield [[seq[0]]]
        return
    first, rest = seq[0], seq[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


_TREE_CACHE: dict[frozenset, list] = {}


def _children_maps(vs: frozenset) -> list[tuple]:
    """All cluster hierarchies on ``vs``; each is a tuple of
    (cluster, children) pairs rooted at ``vs``."""
    if vs in _TREE_CACHE:
        return _TREE_CACHE[vs]
    out = []
    for blocks in _set_partitions(sorted(vs)):
        if len(blocks) < 2:
            continue
        options = []
        for b in blocks:
            if len(b) == 1:
                options.append([()])
            else:
                options.append(_children_maps(frozenset(b)))
        for combo in product(*options):
            entry = [(vs, tuple(frozenset(b) for b in blocks))]
            for sub in combo:
                entry.extend(sub)
            out.append(tuple(entry))
    _TREE_CACHE[vs] = out
    return out


def all_coalescence_trees(vertices) -> list[CoalescenceTree]:
    """Exhaustive enumeration of cluster hierarchies on a small vertex set."""
    vs = frozenset(vertices)
    if len(vs) < 2:
        raise ValueError("need at least two vertices")
    if len(vs) > MAX_EXHAUSTIVE_VERTICES:
        raise ValueError(
            f"refusing exhaustive enumeration beyond {MAX_EXHAUSTIVE_VERTICES} vertices"
        )
    return [CoalescenceTree(vs, cm) for cm in _children_maps(vs)]


def coalesce(vertices, edges) -> CoalescenceTree:
    """Cluster hierarchy determined by dyadic edge scales.

    ``edges`` is an iterable of (u, v, scale) triples (a multigraph; repeats
    allowed).  Clusters at level r are the connected components of the graph
    using edges of scale >= r; each multi-vertex component is recorded with
    the largest level at which it survives.  The full vertex set must be a
    single component at level 0.
    """
    vs = sorted(frozenset(vertices))
    edges = list(edges)
    max_scale = max((s for _, _, s in edges), default=0)

    def components(r: int) -> list[frozenset]:
        par = {v: v for v in vs}

        def find(x):
            while par[x] != x:
                par[x] = par[par[x]]
                x = par[x]
            return x

        for u, v, s in edges:
            if s >= r:
                ru, rv = find(u), find(v)
                if ru != rv:
                    par[ru] = rv
        groups: dict = {}
        for v in vs:
            groups.setdefault(find(v), []).append(v)
        return [frozenset(g) for g in groups.values()]

    clusters: dict[frozenset, int] = {}
    for r in range(max_scale + 2):
        comps = components(r)
        if r == 0 and len(comps) != 1:
            raise ValueError("graph must be connected at scale zero")
        for c in comps:
            if len(c) >= 2:
                clusters[c] = r

    children = []
    for a in clusters:
        inner = [b for b in clusters if b < a]
        maximal = [b for b in inner if not any(b < c for c in inner)]
        covered = frozenset().union(*maximal) if maximal else frozenset()
        kids = tuple(maximal) + tuple(frozenset([v]) for v in a - covered)
        children.append((a, kids))
    labels = tuple(clusters.items())
    return CoalescenceTree(frozenset(vs), tuple(children), labels)


# --- total homogeneities --------------------------------------------------------


@dataclass(frozen=True)
class TotalHomogeneity:
    """Formal combination of cluster markers with exact coefficients.

    Each term is (coefficient, kind, marker): the coefficient lands on the
    smallest cluster containing the marker ("up") or on that cluster's
    parent ("upup").
    """

    terms: tuple  # of (Fraction, str, frozenset)

    def evaluate(self, tree: CoalescenceTree) -> dict[frozenset, Fraction]:
        vals = {a: Fraction(0) for a in tree.internal}
        for coeff, kind, marker in self.terms:
            target = tree.up(marker) if kind == UP else tree.upup(marker)
            vals[target] += coeff
        return vals

    def order(self, tree: CoalescenceTree) -> Fraction:
        vals = self.evaluate(tree)
        return sum(vals.values()) - (len(tree.vertices) - 1) * SCALING_DIM

    def coefficient_sum(self) -> Fraction:
        return sum((c for c, _, _ in self.terms), Fraction(0))


@dataclass
class HomogeneitySetup:
    """A total homogeneity together with its vertex set and bookkeeping."""

    sigma: TotalHomogeneity
    vertices: frozenset
    qhat: dict            # diagram node (or base point) -> quotient vertex
    members: list         # contracted subtrees (maximal forest members)
    pinned: frozenset     # vertices that stay at macroscopic separation


def _quotient(d: MomentDiagram, members) -> dict:
    qhat = {BASE_POINT: BASE_POINT}
    for u in d.nodes:
        qhat[u] = u
    for T in members:
        rho = d.subtree_root(T)
        for u in T:
            qhat[u] = rho
    return qhat


def set_s_hom(d: MomentDiagram, M) -> Fraction:
    """Scaled size of a node set: decoration weight minus one coupling unit
    per noise."""
    bb = d.params.beta_bar
    total = Fraction(0)
    for u in M:
        if u == BASE_POINT:
            continue
        total += deco_weight(d.deco[u])
        if d.label[u] != "0":
            total -= bb
    return total


def set_sg_hom(d: MomentDiagram, M) -> Fraction:
    """Charge-corrected scaled size of a node set."""
    bb = d.params.beta_bar
    noises = [u for u in M if u != BASE_POINT and d.label[u] != "0"]
    q = d.charge(noises)
    return set_s_hom(d, M) + bb * q * q


def sg_total_homogeneity(d: MomentDiagram, forest, s_cut=(), d_cut=()
                         ) -> HomogeneitySetup:
    """Total homogeneity of the full moment integrand for one
    (forest, cut) configuration.

    Contracted forest members become single vertices; the combination
    collects the decoration, contracted-member, kernel-edge, noise-pair and
    recentered-edge groups.  ``s_cut`` are cut edges entering a contracted
    member, ``d_cut`` the remaining cut edges.
    """
    bb = d.params.beta_bar
    top = derived_edge_sets(d, forest, None)
    members = top.C
    qhat = _quotient(d, members)
    removed = frozenset().union(*[d.N_tilde(T) for T in members]) if members else frozenset()
    vertices = frozenset([BASE_POINT]) | (frozenset(d.nodes) - removed)
    s_cut = frozenset(s_cut)
    d_cut = frozenset(d_cut)

    terms = []
    for u in d.nodes:
        w = deco_weight(d.deco[u])
        if w:
            terms.append((Fraction(-w), UP, frozenset([qhat[u], BASE_POINT])))
    for T in members:
        hom = d.bare_s_hom(T)
        terms.append((-hom, UP, frozenset([qhat[d.subtree_root(T)]])))
    for e in sorted((top.K_F | top.K_down) - s_cut):
        terms.append((Fraction(2), UP,
                      frozenset([qhat[d.parent[e]], qhat[e]])))
    for a, b in list(top.pairs_F) + list(top.pairs_partial):
        sgn = d.pair_sign((a, b))
        terms.append((Fraction(-2 * sgn) * bb, UP, frozenset([qhat[a], qhat[b]])))
    for e in sorted(d_cut):
        g = d.gamma(e)
        terms.append((Fraction(g), UP, frozenset([qhat[d.parent[e]], qhat[e]])))
        terms.append((Fraction(-g), UP, frozenset([BASE_POINT, qhat[d.parent[e]]])))
    for e in sorted(s_cut):
        g = d.gamma(e)
        terms.append((Fraction(g - 1), UP, frozenset([e, BASE_POINT])))
        terms.append((Fraction(-(g - 1)), UP, frozenset([BASE_POINT, qhat[d.parent[e]]])))
        terms.append((Fraction(2), UP, frozenset([e, BASE_POINT])))
    pinned = frozenset([BASE_POINT]) | frozenset(qhat[r] for r in d.roots)
    return HomogeneitySetup(TotalHomogeneity(tuple(terms)), vertices, qhat,
                            list(members), pinned)


def collapse_order(d: MomentDiagram, S, in_d_cut: bool = False) -> int:
    """Number of collapse-operator subtractions bought by the member ``S``."""
    from math import floor

    return floor(-d.bare_sg_hom(S)) + (1 if in_d_cut else 0)


def inner_total_homogeneity(d: MomentDiagram, S, forest, in_d_cut: bool = False
                            ) -> HomogeneitySetup:
    """Total homogeneity of the integrand localized to one forest member.

    Vertices are the nodes of ``S`` with nested members contracted to their
    roots; the root of ``S`` is the pinned vertex.
    """
    bb = d.params.beta_bar
    b = derived_edge_sets(d, forest, S)
    members = b.C
    qhat = _quotient(d, members)
    vertices = frozenset(qhat[u] for u in S)
    rho = d.subtree_root(S)

    terms = [(Fraction(-collapse_order(d, S, in_d_cut)), UP, vertices)]
    for T in members:
        hom = d.bare_s_hom(T)
        terms.append((-hom, UP, frozenset([qhat[d.subtree_root(T)]])))
    for e in sorted(b.K_F):
        terms.append((Fraction(2), UP, frozenset([qhat[d.parent[e]], qhat[e]])))
    for a_, b_ in list(b.pairs_F) + list(b.pairs_partial):
        sgn = d.pair_sign((a_, b_))
        terms.append((Fraction(-2 * sgn) * bb, UP, frozenset([qhat[a_], qhat[b_]])))
    return HomogeneitySetup(TotalHomogeneity(tuple(terms)), vertices, qhat,
                            list(members), frozenset([rho]))


def reexpanded(setup: HomogeneitySetup, cluster: frozenset, d: MomentDiagram
               ) -> frozenset:
    """Replace every contracted-member root in the cluster by the member's
    full node set."""
    out = set(cluster)
    for T in setup.members:
        if d.subtree_root(T) in cluster:
            out |= T
    return frozenset(out)


# --- cluster-sum evaluators ------------------------------------------------------


def inner_sigma_tilde(d: MomentDiagram, S, M) -> Fraction:
    """Cluster-sum weight of a node set inside one member: kernel gain minus
    charge-corrected size minus integration volume."""
    K_in = sum(1 for e in d.K(S) if e in M and d.parent[e] in M)
    return (2 * K_in - set_sg_hom(d, M)
            - (len(M) - 1) * SCALING_DIM)


def big_graph_sigma_tilde(d: MomentDiagram, s_cut, d_cut, M) -> Fraction:
    """Cluster-sum weight of a node set of the full diagram (the set may
    contain the base point)."""
    s_cut = frozenset(s_cut)
    d_cut = frozenset(d_cut)
    M = frozenset(M)
    nodes = M - {BASE_POINT}
    K_in = sum(1 for e in d.kernel_edges
               if e not in s_cut and e in M and d.parent[e] in M)
    bb = d.params.beta_bar
    noises = [u for u in nodes if d.label[u] != "0"]
    q = d.charge(noises)
    sg = -bb * len(noises) + bb * q * q
    val = (-(len(M) - 1) * SCALING_DIM + 2 * K_in - sg)
    if BASE_POINT in M:
        deco = sum(deco_weight(d.deco[u]) for u in nodes)
        val -= deco
        for e in d_cut:
            if e not in M and d.parent[e] in M:
                val -= d.gamma(e)
        for e in s_cut:
            if e in M:
                val += 2 + (d.gamma(e) - 1) * (0 if d.parent[e] in M else 1)
    return val


def large_scale_sigma_tilde(d: MomentDiagram, s_cut, d_cut, M) -> Fraction:
    """Decay weight of a node set left outside the macroscopic cluster."""
    s_cut = frozenset(s_cut)
    d_cut = frozenset(d_cut)
    M = frozenset(M)
    bb = d.params.beta_bar
    K_touch = sum(1 for e in d.kernel_edges
                  if e not in s_cut and (e in M or d.parent[e] in M))
    noises = [u for u in M if d.label[u] != "0"]
    val = Fraction(2 * K_touch) + bb * len(noises)
    for e in d_cut:
        if e in M and d.parent[e] not in M:
            val += d.gamma(e)
    for e in s_cut:
        if e in M:
            val += 2
        if d.parent[e] in M and e not in M:
            val -= d.gamma(e) - 1
    val -= sum(deco_weight(d.deco[u]) for u in M)
    val -= len(M) * SCALING_DIM
    return val


# --- audits ----------------------------------------------------------------------


@dataclass
class ClusterAuditReport:
    ok: bool
    context: str
    checked: int
    violations: list = field(default_factory=list)
    min_margin: Fraction | None = None
    argmin: list | None = None

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "context": self.context,
            "checked": self.checked,
            "violations": self.violations,
            "min_margin": None if self.min_margin is None else str(self.min_margin),
            "argmin": self.argmin,
        }


def divergent_cluster_exclusions(d: MomentDiagram, forest, qhat) -> frozenset:
    """Quotient images of divergent subtrees not contracted by the forest.

    A cluster consisting of exactly the nodes of an uncontracted divergent
    subtree corresponds to scale assignments outside the configuration's
    scale set (the subtree would have been contracted there), so audits
    skip it.
    """
    forest = set(forest)
    out = []
    for T in d.divergent_subtrees():
        if T not in forest:
            out.append(frozenset(qhat[u] for u in T))
    return frozenset(out)


def subdivergence_audit(sigma: TotalHomogeneity, vertices, region=None,
                        excluded=(), trees=None) -> ClusterAuditReport:
    """Check that no cluster of vertices accumulates enough weight to beat
    its integration volume.

    For every cluster hierarchy and every non-root internal cluster inside
    the region, the weights of the cluster and everything nested in it must
    sum to strictly less than (size - 1) times the scaling dimension.
    """
    vertices = frozenset(vertices)
    region = vertices if region is None else frozenset(region)
    excluded = frozenset(frozenset(m) for m in excluded)
    if trees is None:
        trees = all_coalescence_trees(vertices)
    report = ClusterAuditReport(True, "subdivergence", 0)
    for tree in trees:
        vals = sigma.evaluate(tree)
        for a in tree.internal:
            if a == tree.root or not (a <= region) or a in excluded:
                continue
            total = sum(vals[b] for b in tree.subtree(a))
            bound = (len(a) - 1) * SCALING_DIM
            margin = bound - total
            report.checked += 1
            if report.min_margin is None or margin < report.min_margin:
                report.min_margin = margin
                report.argmin = sorted(a)
            if margin <= 0:
                report.ok = False
                report.violations.append(
                    {"cluster": sorted(a), "total": str(total), "bound": bound}
                )
    return report


def order_audit(sigma: TotalHomogeneity, vertices, trees=None
                ) -> tuple[bool, Fraction]:
    """The order must not depend on the cluster hierarchy."""
    if trees is None:
        trees = all_coalescence_trees(vertices)
    orders = {sigma.order(t) for t in trees}
    value = next(iter(orders))
    return len(orders) == 1, value


def _cluster_family(setup: HomogeneitySetup, d: MomentDiagram, trees=None):
    """Distinct re-expanded non-root clusters over all hierarchies."""
    if trees is None:
        trees = all_coalescence_trees(setup.vertices)
    fam = {}
    for tree in trees:
        for a in tree.internal:
            if a == tree.root:
                continue
            fam.setdefault(a, reexpanded(setup, a, d))
    return fam


def sign_audit_inner(d: MomentDiagram, S, forest, trees=None) -> ClusterAuditReport:
    setup = inner_total_homogeneity(d, S, forest)
    fam = _cluster_family(setup, d, trees)
    excluded = {frozenset(T) for T in d.divergent_subtrees()
                if T not in set(forest)}
    report = ClusterAuditReport(True, "inner", 0)
    for cluster, M in sorted(fam.items(), key=lambda kv: sorted(kv[0])):
        if M in excluded:
            continue
        val = inner_sigma_tilde(d, S, M)
        _tally(report, M, val, want_negative=True)
    return report


def sign_audit_big_graph(d: MomentDiagram, forest, s_cut=(), d_cut=(),
                         trees=None) -> ClusterAuditReport:
    setup = sg_total_homogeneity(d, forest, s_cut, d_cut)
    fam = _cluster_family(setup, d, trees)
    excluded = {frozenset(T) for T in d.divergent_subtrees()
                if T not in set(forest)}
    report = ClusterAuditReport(True, "big-graph", 0)
    for cluster, M in sorted(fam.items(), key=lambda kv: sorted(kv[0])):
        if M in excluded:
            continue
        val = big_graph_sigma_tilde(d, s_cut, d_cut, M)
        _tally(report, M, val, want_negative=True)
    return report


def _k_components(d: MomentDiagram, M: frozenset) -> list[frozenset]:
    M = frozenset(M) - {BASE_POINT}
    par = {u: u for u in M}

    def find(x):
        while par[x] != x:
            par[x] = par[par[x]]
            x = par[x]
        return x

    for e in d.kernel_edges:
        if e in M and d.parent[e] in M:
            ru, rv = find(e), find(d.parent[e])
            if ru != rv:
                par[ru] = rv
    groups: dict = {}
    for u in M:
        groups.setdefault(find(u), []).append(u)
    return [frozenset(g) for g in groups.values()]


def sign_audit_large_scale(d: MomentDiagram, forest, s_cut=(), d_cut=(),
                           trees=None) -> ClusterAuditReport:
    """Everything left outside the cluster of the pinned vertices must carry
    strictly positive decay."""
    setup = sg_total_homogeneity(d, forest, s_cut, d_cut)
    if trees is None:
        trees = all_coalescence_trees(setup.vertices)
    all_nodes = frozenset([BASE_POINT]) | frozenset(d.nodes)
    fam = set()
    for tree in trees:
        for a in tree.internal:
            if a == tree.root or not (setup.pinned <= a):
                continue
            M = all_nodes - reexpanded(setup, a, d)
            for comp in _k_components(d, M):
                fam.add(comp)
    report = ClusterAuditReport(True, "large-scale", 0)
    for M in sorted(fam, key=sorted):
        val = large_scale_sigma_tilde(d, s_cut, d_cut, M)
        _tally(report, M, val, want_negative=False)
    return report


def _tally(report: ClusterAuditReport, M, val: Fraction, want_negative: bool):
    margin = -val if want_negative else val
    report.checked += 1
    if report.min_margin is None or margin < report.min_margin:
        report.min_margin = margin
        report.argmin = sorted(M)
    if margin <= 0:
        report.ok = False
        report.violations.append({"set": sorted(M), "value": str(val)})


def identity_audit(d: MomentDiagram, S, forest, trees=None) -> ClusterAuditReport:
    """The nested cluster-weight sum must equal the re-expanded set weight,
    exactly, for every non-root cluster of every hierarchy."""
    setup = inner_total_homogeneity(d, S, forest)
    if trees is None:
        trees = all_coalescence_trees(setup.vertices)
    report = ClusterAuditReport(True, "identity", 0)
    for tree in trees:
        vals = setup.sigma.evaluate(tree)
        for a in tree.internal:
            if a == tree.root:
                continue
            lhs = sum(vals[b] for b in tree.subtree(a)) \
                - (len(a) - 1) * SCALING_DIM
            rhs = inner_sigma_tilde(d, S, reexpanded(setup, a, d))
            report.checked += 1
            if lhs != rhs:
                report.ok = False
                report.violations.append(
                    {"cluster": sorted(a), "lhs": str(lhs), "rhs": str(rhs)}
                )
    return report


def sigma_tilde_audit(d: MomentDiagram, context: str, forest=(), s_cut=(),
                      d_cut=(), S=None) -> ClusterAuditReport:
    """Dispatch the applicable cluster-sum sign audit."""
    if context == "inner":
        if S is None:
            raise ValueError("inner audit needs the member S")
        return sign_audit_inner(d, S, forest)
    if context == "big-graph":
        return sign_audit_big_graph(d, forest, s_cut, d_cut)
    if context == "large-scale":
        return sign_audit_large_scale(d, forest, s_cut, d_cut)
    raise ValueError(f"unknown audit context {context!r}")


# --- summability probes -----------------------------------------------------------


@dataclass
class SummabilityReport:
    alpha: Fraction
    values: dict          # (r, cap) -> raw sum
    normalized: dict      # (r, cap) -> raw * 2^(-alpha*r)
    spread: float         # (max - min) / max over the final-cap column
    converged: bool

    def as_dict(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "values": {f"r={r},cap={c}": v for (r, c), v in self.values.items()},
            "normalized": {f"r={r},cap={c}": v
                           for (r, c), v in self.normalized.items()},
            "spread": self.spread,
            "converged": self.converged,
        }


def _tree_sum(sigma: TotalHomogeneity, tree: CoalescenceTree,
              lo: int, hi: int, root_hi: int | None = None) -> float:
    """Sum over strictly-increasing labelings of the per-scale volume-weighted
    cluster factors, root label in [lo, root_hi], all labels <= hi."""
    vals = sigma.evaluate(tree)
    weights = {a: float(vals[a]) - SCALING_DIM * (tree.n_children(a) - 1)
               for a in tree.internal}
    cmap = dict(tree.children)

    from functools import lru_cache

    @lru_cache(maxsize=None)
    def g(a: frozenset, lmin: int) -> float:
        total = 0.0
        for l in range(lmin, hi + 1):
            prod = 2.0 ** (weights[a] * l)
            for b in cmap[a]:
                if b in weights:
                    prod *= g(b, l + 1)
            total += prod
        return total

    top = root_hi if root_hi is not None else hi
    total = 0.0
    for l in range(lo, min(top, hi) + 1):
        prod = 2.0 ** (weights[tree.root] * l)
        for b in cmap[tree.root]:
            if b in weights:
                prod *= g(b, l + 1)
        total += prod
    return total


def summability_probe(sigma: TotalHomogeneity, vertices, alpha: Fraction,
                      r_values, caps, tol: float = 0.05) -> SummabilityReport:
    """Numerically verify the geometric decay of the scale sums.

    For negative order the sum runs over labelings whose coarsest scale
    exceeds r; for positive order over those whose coarsest scale is at
    most r.  Each raw sum, rescaled by 2^(-alpha*r), must be stable in r
    and in the label cap.
    """
    trees = all_coalescence_trees(vertices)
    alpha_f = float(alpha)
    values: dict = {}
    normalized: dict = {}
    for r in r_values:
        for cap in caps:
            if alpha < 0:
                total = sum(_tree_sum(sigma, t, r + 1, cap) for t in trees)
            else:
                total = sum(_tree_sum(sigma, t, 0, cap, root_hi=r) for t in trees)
            values[(r, cap)] = total
            normalized[(r, cap)] = total * 2.0 ** (-alpha_f * r)
    final = [normalized[(r, max(caps))] for r in r_values] + \
        [normalized[(min(r_values), c)] for c in caps]
    spread = (max(final) - min(final)) / max(final) if max(final) > 0 else 0.0
    return SummabilityReport(Fraction(alpha), values, normalized, spread,
                             spread <= tol)


# --- bounded-cardinality cells ----------------------------------------------------


def triangle_cell_count(vertices, edges, tree: CoalescenceTree,
                        c_const: int = ANNULUS_CONSTANT) -> int:
    """Count scale assignments reproducing a given labeled hierarchy within
    the annular window around each edge's cluster label."""
    if tree.labels is None:
        raise ValueError("labeled hierarchy required")
    n_v = len(frozenset(vertices))
    width = 2 * c_const * n_v
    ranges = []
    for u, v, _ in edges:
        s = tree.label(tree.up(frozenset([u, v])))
        ranges.append(range(max(0, s - width + 1), s + width))
    count = 0
    for combo in product(*ranges):
        n_edges = [(u, v, s) for (u, v, _), s in zip(edges, combo)]
        try:
            t2 = coalesce(vertices, n_edges)
        except ValueError:
            continue
        if dict(t2.children) == dict(tree.children) and \
                dict(t2.labels) == dict(tree.labels):
            count += 1
    return count
