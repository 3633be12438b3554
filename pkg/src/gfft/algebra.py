"""Algebra of the transforms: weight monoid, class quotient, free-group words.

Composing two transforms at a common q combines their weights through
s(h1, h2), so weights form a commutative monoid under the nonnegative-root
combination with the zero weight as identity.  Since the transform only
sees a weight through the squares a_j^2 h^2, sequences are quotiented by
s-equivalence; a class is represented canonically by the nonnegative root
of the witness's sum of squares.  Pairing a class with a parameter q gives
a transform class; barwedge composes them at fixed q, and Xi is the
(tautological on representatives, content-bearing on laws) isomorphism
between transform classes at fixed q and weight classes.

Words over letters (sign, class) model the free product structure: sign
+1 applies the transform at +q, sign -1 at -q, and adjacent letters with
opposite signs and s-equivalent classes annihilate (the inverse law).
word_reduce performs free reduction with a stack, which reaches the unique
reduced word in one pass; word_eval folds the letters through the
closed-form transform right-to-left.

The parameter group itself lives in reciprocal coordinates (QElem), where
composition is addition; laws are exact in floating point whenever the
r-sums are representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cylinder import CylinderFunctional
from .grid_core import GridFunction, HSeq, TimeGrid, s_combine, s_combine_seq, wedge
from .transform import QElem, gfft, q_compose

__all__ = [
    "MonoidElem",
    "monoid_op",
    "SeqClass",
    "TransformClass",
    "barwedge",
    "xi",
    "xi_inv",
    "GroupWord",
    "word_reduce",
    "word_eval",
    "q_group_laws",
    "LawRow",
]

#: nodewise tolerance for class-representative equality
CLASS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MonoidElem:
    """Weight with a canonical nonnegative representative."""

    rep: GridFunction

    def __post_init__(self) -> None:
        if np.any(self.rep.values < 0):
            raise ValueError("monoid representatives are nonnegative; build via from_weight")

    @classmethod
    def from_weight(cls, h: GridFunction) -> "MonoidElem":
        return cls(h.abs())

    @classmethod
    def identity(cls, grid: TimeGrid) -> "MonoidElem":
        return cls(GridFunction.zero(grid))

    @property
    def is_identity(self) -> bool:
        return self.rep.is_zero()

    def same(self, other: "MonoidElem", tol: float = CLASS_TOL) -> bool:
        return self.rep.allclose(other.rep, tol)


def monoid_op(x: MonoidElem, y: MonoidElem) -> MonoidElem:
    return MonoidElem(s_combine(x.rep, y.rep))


@dataclass(frozen=True, eq=False)
class SeqClass:
    """s-equivalence class of weight sequences, canonical nonnegative rep."""

    rep: GridFunction
    witness: HSeq

    @classmethod
    def from_seq(cls, H: HSeq) -> "SeqClass":
        return cls(s_combine_seq(H), H)

    @classmethod
    def from_weight(cls, h: GridFunction) -> "SeqClass":
        return cls.from_seq(HSeq.of(h))

    def same_class(self, other: "SeqClass", tol: float = CLASS_TOL) -> bool:
        return self.rep.allclose(other.rep, tol)

    @property
    def grid(self) -> TimeGrid:
        return self.rep.grid


@dataclass(frozen=True, eq=False)
class TransformClass:
    """Transform label (q, weight class) at a fixed parameter q."""

    q: float
    cls: SeqClass

    def __post_init__(self) -> None:
        if not (isinstance(self.q, (int, float)) and self.q != 0 and math.isfinite(self.q)):
            raise ValueError(f"q must be a nonzero finite real, got {self.q!r}")


def barwedge(t1: TransformClass, t2: TransformClass) -> TransformClass:
    """Compose transform classes at a common q by wedging the witnesses."""
    if t1.q != t2.q:
        raise ValueError(f"barwedge needs a common q, got {t1.q} and {t2.q}")
    return TransformClass(t1.q, SeqClass.from_seq(wedge(t1.cls.witness, t2.cls.witness)))


def xi(t: TransformClass) -> SeqClass:
    """Forget the parameter: the weight class of a transform class."""
    return t.cls


def xi_inv(c: SeqClass, q: float) -> TransformClass:
    """Attach a parameter q to a weight class."""
    return TransformClass(q, c)


@dataclass(frozen=True, eq=False)
class GroupWord:
    """Word over letters (sign, class) at a fixed |q| > 0."""

    q: float
    letters: tuple[tuple[int, SeqClass], ...] = ()

    def __post_init__(self) -> None:
        if not (isinstance(self.q, (int, float)) and self.q > 0 and math.isfinite(self.q)):
            raise ValueError(f"|q| must be a positive finite real, got {self.q!r}")
        object.__setattr__(self, "letters", tuple(self.letters))
        for sign, cls in self.letters:
            if sign not in (1, -1):
                raise ValueError(f"letter signs are +1/-1, got {sign}")
            if not isinstance(cls, SeqClass):
                raise ValueError("letter classes must be SeqClass")

    def __len__(self) -> int:
        return len(self.letters)


def word_reduce(w: GroupWord, tol: float = CLASS_TOL) -> GroupWord:
    """Free reduction: delete adjacent inverse pairs until none remain.

    One stack pass reaches the fixed point: a new adjacency can only form
    between the new stack top and the next incoming letter, which the pass
    still examines, so the result is the (confluence-unique) reduced word.
    """
    stack: list[tuple[int, SeqClass]] = []
    for sign, cls in w.letters:
        if stack and stack[-1][0] == -sign and stack[-1][1].same_class(cls, tol):
            stack.pop()
        else:
            stack.append((sign, cls))
    return GroupWord(w.q, tuple(stack))


def word_eval(w: GroupWord, F: CylinderFunctional) -> CylinderFunctional:
    """Apply the word to F, rightmost letter first.

    A letter (sign, c) acts as the transform at sign*q with the class
    representative as weight; membership of the representative in O_inf of
    F's family is enforced by the transform itself.
    """
    out = F
    for sign, cls in reversed(w.letters):
        out = gfft(out, sign * w.q, cls.rep)
    return out


@dataclass(frozen=True)
class LawRow:
    """One algebra-law check on one sample point."""

    law: str
    sample_id: int
    residual: float
    passed: bool


def q_group_laws(sample: Sequence[QElem]) -> list[LawRow]:
    """Exact group laws in reciprocal coordinates over the sample.

    Sample points are cycled into pairs/triples for the binary laws; all
    residuals compare reciprocal coordinates and must be exactly zero for
    representable sums (arrange the sample on a dyadic lattice to make
    every sum representable).
    """
    pts = list(sample)
    if len(pts) < 3:
        raise ValueError("need at least 3 sample points")
    ident = QElem.identity()
    rows: list[LawRow] = []
    m = len(pts)
    for i, x in enumerate(pts):
        y = pts[(i + 1) % m]
        z = pts[(i + 2) % m]
        checks = (
            ("identity", abs(q_compose(x, ident).r - x.r)),
            ("inverse", abs(q_compose(x, x.inverse()).r)),
            ("commutativity", abs(q_compose(x, y).r - q_compose(y, x).r)),
            ("associativity", abs(q_compose(q_compose(x, y), z).r - q_compose(x, q_compose(y, z)).r)),
        )
        for law, resid in checks:
            rows.append(LawRow(law, i, resid, resid == 0.0))
    return rows
