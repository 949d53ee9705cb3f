"""Decorated rooted trees with exact-rational homogeneity bookkeeping.

Trees carry a charge label in {+, 0, -} and a polynomial decoration in N^3
at every node.  All homogeneity arithmetic is done exactly as linear
expressions a + b*beta_bar with rational coefficients, so that sign and
threshold comparisons never touch floating point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Iterable

LABELS = ("+", "0", "-")

#: parabolic scaling of one time and two space directions
SCALING = (2, 1, 1)
SCALING_DIM = sum(SCALING)


def deco_weight(k: tuple[int, int, int]) -> int:
    """Scaled size 2*k0 + k1 + k2 of a decoration multi-index."""
    return 2 * k[0] + k[1] + k[2]


@dataclass(frozen=True)
class Homogeneity:
    """Exact value a + b*beta_bar with rational a, b."""

    const: Fraction
    bcoeff: Fraction

    def __add__(self, other: "Homogeneity") -> "Homogeneity":
        return Homogeneity(self.const + other.const, self.bcoeff + other.bcoeff)

    def __sub__(self, other: "Homogeneity") -> "Homogeneity":
        return Homogeneity(self.const - other.const, self.bcoeff - other.bcoeff)

    def scaled(self, c) -> "Homogeneity":
        c = Fraction(c)
        return Homogeneity(self.const * c, self.bcoeff * c)

    def at(self, beta_bar: Fraction) -> Fraction:
        """Evaluate at a rational beta_bar; the result is an exact rational."""
        return self.const + self.bcoeff * Fraction(beta_bar)

    @staticmethod
    def of(const, bcoeff=0) -> "Homogeneity":
        return Homogeneity(Fraction(const), Fraction(bcoeff))

    def __str__(self) -> str:  # pragma: no cover - debugging aid
        return f"{self.const}{self.bcoeff:+}*bb"


@dataclass(frozen=True)
class ModelParams:
    """Exact model parameters.

    ``beta_sq`` is the squared coupling in units of pi (so a coupling of
    5*pi is stored as the rational 5).  ``beta_prime`` is beta^2/(4*pi),
    ``beta_bar`` an exact rational in (beta_prime, 2) controlling all
    homogeneity bookkeeping, and ``mu`` the enumeration cutoff in
    (beta_bar, 2).
    """

    beta_sq: Fraction
    beta_bar: Fraction
    mu: Fraction
    scaling: tuple[int, int, int] = SCALING

    @property
    def beta_prime(self) -> Fraction:
        return self.beta_sq / 4

    def __post_init__(self):
        object.__setattr__(self, "beta_sq", Fraction(self.beta_sq))
        object.__setattr__(self, "beta_bar", Fraction(self.beta_bar))
        object.__setattr__(self, "mu", Fraction(self.mu))
        if not (0 < self.beta_sq < 8):
            raise SupercriticalError(
                f"beta^2/pi = {self.beta_sq} outside the subcritical range (0, 8)"
            )
        if not (self.beta_prime < self.beta_bar < 2):
            raise ValueError(
                f"beta_bar = {self.beta_bar} not in (beta', 2) = "
                f"({self.beta_prime}, 2)"
            )
        if not (self.beta_bar < self.mu < 2):
            raise ValueError(f"mu = {self.mu} not in (beta_bar, 2)")

    @staticmethod
    def make(beta_sq, beta_bar=None, mu=None) -> "ModelParams":
        """Build params, defaulting beta_bar and mu to interval midpoints."""
        beta_sq = Fraction(beta_sq)
        if not (0 < beta_sq < 8):
            raise SupercriticalError(
                f"beta^2/pi = {beta_sq} outside the subcritical range (0, 8)"
            )
        beta_prime = beta_sq / 4
        if beta_bar is None:
            beta_bar = (beta_prime + 2) / 2
        beta_bar = Fraction(beta_bar)
        if mu is None:
            mu = (beta_bar + 2) / 2
        return ModelParams(beta_sq, beta_bar, Fraction(mu))

    @staticmethod
    def from_beta_bar(beta_bar, mu=None) -> "ModelParams":
        """Params specified directly by beta_bar (beta^2 chosen compatibly)."""
        beta_bar = Fraction(beta_bar)
        # any beta' < beta_bar works for combinatorics; take beta' = beta_bar/2
        # when that is positive, i.e. beta_sq = 2*beta_bar.
        return ModelParams.make(2 * beta_bar, beta_bar=beta_bar, mu=mu)


class SupercriticalError(ValueError):
    """Raised for couplings at or beyond beta^2 = 8*pi."""


@dataclass(frozen=True)
class DecoratedTree:
    """Immutable decorated rooted tree.

    ``children`` are kept sorted by canonical key, so structural equality
    coincides with equality of isomorphism classes.
    """

    label: str
    deco: tuple[int, int, int]
    children: tuple["DecoratedTree", ...] = ()

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"bad label {self.label!r}")
        if len(self.deco) != 3 or any(k < 0 for k in self.deco):
            raise ValueError(f"bad decoration {self.deco!r}")
        object.__setattr__(self, "deco", tuple(int(k) for k in self.deco))
        kids = tuple(sorted(self.children, key=lambda t: t.key))
        object.__setattr__(self, "children", kids)

    @cached_property
    def key(self) -> str:
        inner = "".join(c.key for c in self.children)
        return f"({self.label};{self.deco[0]},{self.deco[1]},{self.deco[2]};{inner})"

    @cached_property
    def n_nodes(self) -> int:
        return 1 + sum(c.n_nodes for c in self.children)

    @property
    def n_edges(self) -> int:
        return self.n_nodes - 1

    @cached_property
    def n_noises(self) -> int:
        own = 1 if self.label != "0" else 0
        return own + sum(c.n_noises for c in self.children)

    @cached_property
    def charge(self) -> int:
        own = {"+": 1, "0": 0, "-": -1}[self.label]
        return own + sum(c.charge for c in self.children)

    @cached_property
    def total_deco_weight(self) -> int:
        return deco_weight(self.deco) + sum(c.total_deco_weight for c in self.children)

    @cached_property
    def deco_is_zero(self) -> bool:
        return self.total_deco_weight == 0 and all(
            k == 0 for k in self.deco
        ) and all(c.deco_is_zero for c in self.children)

    def iter_nodes(self):
        """Yield all subtrees (as node stand-ins), root first."""
        yield self
        for c in self.children:
            yield from c.iter_nodes()

    def __repr__(self) -> str:
        return f"DecoratedTree({self.key!r})"


# --- elementary trees -------------------------------------------------------

XI_PLUS = DecoratedTree("+", (0, 0, 0))
XI_MINUS = DecoratedTree("-", (0, 0, 0))
ONE = DecoratedTree("0", (0, 0, 0))


def noise(sign: str) -> DecoratedTree:
    return XI_PLUS if sign == "+" else XI_MINUS


def monomial(k: tuple[int, int, int]) -> DecoratedTree:
    """Single 0-labeled node carrying the decoration ``k``."""
    return DecoratedTree("0", tuple(k))


def dipole(root_sign: str = "-") -> DecoratedTree:
    """Two-noise tree: a ``root_sign`` noise times the kernel of the other."""
    other = "+" if root_sign == "-" else "-"
    return tree_product(noise(root_sign), integrate(noise(other)))


# --- grammar operations -----------------------------------------------------

def integrate(tau: DecoratedTree) -> DecoratedTree:
    """Graft ``tau`` below a fresh undecorated 0-labeled root."""
    return DecoratedTree("0", (0, 0, 0), (tau,))


def tree_product(t1: DecoratedTree, t2: DecoratedTree) -> DecoratedTree:
    """Merge two trees at their roots.

    At most one of the two root labels may be a charge; the merged root
    carries that charge and the sum of the root decorations.
    """
    if t1.label != "0" and t2.label != "0":
        raise ValueError(
            f"cannot merge roots with labels {t1.label!r} and {t2.label!r}"
        )
    label = t1.label if t1.label != "0" else t2.label
    deco = tuple(a + b for a, b in zip(t1.deco, t2.deco))
    return DecoratedTree(label, deco, t1.children + t2.children)


# --- homogeneity and charge -------------------------------------------------

def s_homogeneity(tau: DecoratedTree) -> Homogeneity:
    """Parabolic homogeneity 2|K| - beta_bar*|L| + total decoration weight."""
    return Homogeneity(
        Fraction(2 * tau.n_edges + tau.total_deco_weight), Fraction(-tau.n_noises)
    )


def sg_homogeneity(tau: DecoratedTree) -> Homogeneity:
    """Charge-corrected homogeneity |tau|_s + beta_bar * charge^2."""
    h = s_homogeneity(tau)
    return Homogeneity(h.const, h.bcoeff + tau.charge**2)


def set_s_homogeneity(labels: Iterable[str], decos=None) -> Homogeneity:
    """Homogeneity -beta_bar*#charges + decoration weight of a label set."""
    labels = list(labels)
    n_ch = sum(1 for l in labels if l != "0")
    w = 0 if decos is None else sum(deco_weight(k) for k in decos)
    return Homogeneity(Fraction(w), Fraction(-n_ch))


def set_sg_homogeneity(labels: Iterable[str]) -> Homogeneity:
    """Charge-corrected homogeneity -beta_bar*|A| + beta_bar*q(A)^2 of a set."""
    labels = list(labels)
    q = charge_of(labels)
    n_ch = sum(1 for l in labels if l != "0")
    return Homogeneity(Fraction(0), Fraction(q * q - n_ch))


def charge_of(labels: Iterable[str]) -> int:
    """Total charge of a collection of node labels."""
    return sum({"+": 1, "0": 0, "-": -1}[l] for l in labels)


def pair_sign(label_a: str, label_b: str) -> int:
    """Product of the two unit charges of a noise pair."""
    qa = {"+": 1, "-": -1}[label_a]
    qb = {"+": 1, "-": -1}[label_b]
    return qa * qb


def is_neutral(tau: DecoratedTree) -> bool:
    return tau.charge == 0


# --- canonical form, symmetry, conjugation ----------------------------------

def canonical_key(tau: DecoratedTree) -> str:
    return tau.key


_NODE_RE = re.compile(r"\((\+|-|0);(\d+),(\d+),(\d+);")


def parse_key(key: str) -> DecoratedTree:
    """Inverse of :func:`canonical_key`."""
    pos = 0

    def parse_node() -> DecoratedTree:
        nonlocal pos
        m = _NODE_RE.match(key, pos)
        if not m:
            raise ValueError(f"bad tree key at position {pos}: {key!r}")
        pos = m.end()
        children = []
        while pos < len(key) and key[pos] == "(":
            children.append(parse_node())
        if pos >= len(key) or key[pos] != ")":
            raise ValueError(f"unbalanced tree key at position {pos}: {key!r}")
        pos += 1
        return DecoratedTree(
            m.group(1), (int(m.group(2)), int(m.group(3)), int(m.group(4))), tuple(children)
        )

    tree = parse_node()
    if pos != len(key):
        raise ValueError(f"trailing characters in tree key: {key!r}")
    return tree


def symmetry_factor(tau: DecoratedTree) -> int:
    """Order of the automorphism group of the decorated rooted tree."""
    result = 1
    groups: dict[str, int] = {}
    for c in tau.children:
        groups[c.key] = groups.get(c.key, 0) + 1
        result *= symmetry_factor(c)
    for mult in groups.values():
        result *= factorial(mult)
    return result


def opp(tau: DecoratedTree) -> DecoratedTree:
    """Flip every + label to - and vice versa; 0 labels are unchanged."""
    flip = {"+": "-", "-": "+", "0": "0"}
    return DecoratedTree(
        flip[tau.label], tau.deco, tuple(opp(c) for c in tau.children)
    )
