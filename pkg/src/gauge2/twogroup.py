"""Crossed modules and exact 2-group arithmetic.

A crossed module (G, H, t, alpha) packages a strict 2-group: 2-cells are
pairs (g, h) in the semidirect product with source g and target t(h)*g,
multiplied by (g,h)(g',h') = (gg', h alpha_g(h')) and composed by
(t(h)g, h') o (g, h) = (g, h'h).  Both finite-table and matrix backends
are supported through the same interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ComposabilityError, DomainError, StructureError
from .groups import FiniteGroup

__all__ = [
    "CrossedModule", "TwoGroupElement", "AxiomReport",
    "two_group_multiply", "two_group_compose", "whisker_scalar",
    "check_crossed_module", "interchange_defect",
]

MATRIX_MATCH_TOL = 1e-9


@dataclass
class CrossedModule:
    """Crossed module (G, H, t, alpha).

    ``t`` maps H to G; ``alpha(g, h)`` is the G-action on H.  Matrix-backed
    instances additionally carry samplers and a kernel description, supplied
    by the family registry, so that axiom checks can draw random elements
    and test centrality of ker t.
    """

    G: object
    H: object
    t: object
    alpha: object
    name: str = "crossed-module"
    sample_G: object = None        # rng -> G element
    sample_H: object = None        # rng -> H element
    ker_t_elements: object = None  # () -> iterable of H elements, or None
    match_tol: float = MATRIX_MATCH_TOL

    @property
    def is_finite(self) -> bool:
        return isinstance(self.G, FiniteGroup)

    # -- element constructors -------------------------------------------------

    def element(self, g, h) -> "TwoGroupElement":
        return TwoGroupElement(self, g, h)

    def identity2(self, g=None) -> "TwoGroupElement":
        """Identity 2-cell on g (defaults to the group identity)."""
        if g is None:
            g = self.G.identity
        return TwoGroupElement(self, g, self.H.identity)

    # -- finite helpers --------------------------------------------------------

    def all_elements(self):
        """All (g, h) cells; finite backend only."""
        if not self.is_finite:
            raise DomainError("exhaustive enumeration needs a finite backend")
        return [self.element(g, h)
                for g in self.G.elements() for h in self.H.elements()]

    def ker_t(self):
        """Elements of ker t (finite: exact; matrix: family-supplied)."""
        if self.is_finite:
            e = self.G.identity
            return [h for h in self.H.elements() if self.t(h) == e]
        if self.ker_t_elements is None:
            return []
        return list(self.ker_t_elements())


@dataclass(frozen=True)
class TwoGroupElement:
    """2-cell (g, h) of the 2-group G semidirect H over a crossed module."""

    cm: CrossedModule
    g: object
    h: object

    @property
    def source(self):
        return self.g

    @property
    def target(self):
        return self.cm.G.mul(self.cm.t(self.h), self.g)

    def __mul__(self, other: "TwoGroupElement") -> "TwoGroupElement":
        return two_group_multiply(self, other)

    def inverse(self) -> "TwoGroupElement":
        """Inverse for multiplication: (g,h)^-1 = (g^-1, alpha_{g^-1}(h^-1))."""
        cm = self.cm
        ginv = cm.G.inv(self.g)
        return TwoGroupElement(cm, ginv, cm.alpha(ginv, cm.H.inv(self.h)))

    def vertical_inverse(self) -> "TwoGroupElement":
        """Inverse for composition: (t(h)g, h^-1), so x^-1 o x = id."""
        cm = self.cm
        return TwoGroupElement(cm, self.target, cm.H.inv(self.h))

    def compose(self, other: "TwoGroupElement") -> "TwoGroupElement":
        """self o other (other applied first)."""
        return two_group_compose(self, other)

    def defect(self, other: "TwoGroupElement") -> float:
        return max(self.cm.G.defect(self.g, other.g),
                   self.cm.H.defect(self.h, other.h))


def _require_same_module(x: TwoGroupElement, y: TwoGroupElement):
    if x.cm is not y.cm:
        raise DomainError(
            f"elements belong to different crossed modules "
            f"({x.cm.name!r} vs {y.cm.name!r})")


def two_group_multiply(x: TwoGroupElement, y: TwoGroupElement) -> TwoGroupElement:
    """(g,h)(g',h') = (gg', h alpha_g(h'))."""
    _require_same_module(x, y)
    cm = x.cm
    return TwoGroupElement(cm, cm.G.mul(x.g, y.g),
                           cm.H.mul(x.h, cm.alpha(x.g, y.h)))


def two_group_compose(y: TwoGroupElement, x: TwoGroupElement) -> TwoGroupElement:
    """Vertical composition y o x, defined when source(y) = target(x)."""
    _require_same_module(x, y)
    cm = x.cm
    mismatch = cm.G.defect(y.source, x.target)
    tol = 0.0 if cm.is_finite else cm.match_tol
    if mismatch > tol:
        raise ComposabilityError(
            f"cells are not composable: source/target mismatch {mismatch:.3e}",
            mismatch=mismatch)
    return TwoGroupElement(cm, x.g, cm.H.mul(y.h, x.h))


def whisker_scalar(cm: CrossedModule, h, h_prime):
    """The composition/multiplication bridge 1_{t(h)} h' o h = h' h in H."""
    return cm.H.mul(h_prime, h)


# --- axiom checking ----------------------------------------------------------

@dataclass
class AxiomReport:
    """Max defects of the crossed-module axioms over a sample plan."""

    equivariance: float
    peiffer: float
    t_homomorphism: float
    centrality: float
    tolerance: float
    samples: int
    witnesses: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return max(self.equivariance, self.peiffer,
                   self.t_homomorphism, self.centrality) <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "equivariance": self.equivariance,
            "peiffer": self.peiffer,
            "t_homomorphism": self.t_homomorphism,
            "centrality": self.centrality,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "pass": self.passed,
            "witnesses": {k: str(v) for k, v in self.witnesses.items()},
        }


def _axiom_pairs(cm: CrossedModule, samples: int, rng):
    """Yield (g, h, h') triples: exhaustive for finite, sampled for matrix."""
    if cm.is_finite:
        for g in cm.G.elements():
            for h in cm.H.elements():
                for hp in cm.H.elements():
                    yield g, h, hp
    else:
        if cm.sample_G is None or cm.sample_H is None:
            raise StructureError(f"{cm.name!r} has no samplers configured")
        for _ in range(samples):
            yield cm.sample_G(rng), cm.sample_H(rng), cm.sample_H(rng)


def check_crossed_module(cm: CrossedModule, samples: int = 200,
                         rng=None, tolerance=None) -> AxiomReport:
    """Evaluate both crossed-module axioms plus homomorphy of t and
    centrality of ker t; exact (tolerance 0) for finite backends."""
    if rng is None:
        rng = np.random.default_rng(0)
    if tolerance is None:
        tolerance = 0.0 if cm.is_finite else MATRIX_MATCH_TOL
    G, H, t, alpha = cm.G, cm.H, cm.t, cm.alpha

    d_eq = d_pf = d_hom = d_ctr = 0.0
    witnesses = {}
    count = 0
    for g, h, hp in _axiom_pairs(cm, samples, rng):
        count += 1
        # t(alpha_g h) = g t(h) g^-1
        d = G.defect(t(alpha(g, h)), G.mul(G.mul(g, t(h)), G.inv(g)))
        if d > d_eq:
            d_eq = d
            witnesses["equivariance"] = (g, h)
        # alpha_{t(h)} h' = h h' h^-1
        d = H.defect(alpha(t(h), hp), H.mul(H.mul(h, hp), H.inv(h)))
        if d > d_pf:
            d_pf = d
            witnesses["peiffer"] = (h, hp)
        # t(h h') = t(h) t(h')
        d = G.defect(t(H.mul(h, hp)), G.mul(t(h), t(hp)))
        if d > d_hom:
            d_hom = d
            witnesses["t_homomorphism"] = (h, hp)

    kernel = cm.ker_t()
    if cm.is_finite:
        others = list(cm.H.elements())
    else:
        others = [cm.sample_H(rng) for _ in range(min(samples, 50))]
    for k in kernel:
        for hp in others:
            d = H.defect(H.mul(k, hp), H.mul(hp, k))
            if d > d_ctr:
                d_ctr = d
                witnesses["centrality"] = (k, hp)

    return AxiomReport(equivariance=d_eq, peiffer=d_pf, t_homomorphism=d_hom,
                       centrality=d_ctr, tolerance=tolerance,
                       samples=count, witnesses=witnesses)


def interchange_defect(cm: CrossedModule, samples: int = 1000, rng=None) -> float:
    """Max defect of (y o x)(y' o x') = (y y') o (x x') over composable
    quadruples: exhaustive for finite backends, sampled for matrix ones."""
    if rng is None:
        rng = np.random.default_rng(0)

    def quadruples():
        if cm.is_finite:
            cells = cm.all_elements()
            for x in cells:
                for hy in cm.H.elements():
                    y = cm.element(x.target, hy)
                    for xp in cells:
                        for hyp in cm.H.elements():
                            yield x, y, xp, cm.element(xp.target, hyp)
        else:
            for _ in range(samples):
                x = cm.element(cm.sample_G(rng), cm.sample_H(rng))
                xp = cm.element(cm.sample_G(rng), cm.sample_H(rng))
                y = cm.element(x.target, cm.sample_H(rng))
                yp = cm.element(xp.target, cm.sample_H(rng))
                yield x, y, xp, yp

    worst = 0.0
    for x, y, xp, yp in quadruples():
        lhs = two_group_compose(y, x) * two_group_compose(yp, xp)
        rhs = two_group_compose(y * yp, x * xp)
        worst = max(worst, lhs.defect(rhs))
    return worst
