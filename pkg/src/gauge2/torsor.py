"""2-torsor calculus over a crossed module.

Torsors are represented concretely as labelled copies of the 2-group
acting on itself by right multiplication (the regular model).  Every
2-torsor over a point is isomorphic to this model, which turns division
into a closed-form solve while the label keeps distinct fibers apart.

The module implements division, the unique extension of equivariant
point maps to functors, the H-valued presentation of 2-morphisms and its
composition laws, and an exhaustive self-test of all of these for finite
crossed modules.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, EquivarianceError
from .twogroup import CrossedModule, TwoGroupElement, two_group_compose

__all__ = [
    "Torsor2", "TorsorObject", "TorsorArrow", "TorsorMorphism", "EtaH",
    "torsor_divide", "extend_functor", "eta_to_etaH", "etaH_to_eta",
    "vertical_compose_etaH", "horizontal_compose_etaH",
    "all_equivariant_functors", "all_two_morphisms", "selftest",
]


class Torsor2:
    """Labelled regular model of a 2-torsor for the given crossed module."""

    def __init__(self, cm: CrossedModule, label: str):
        self.cm = cm
        self.label = label

    def object(self, g) -> "TorsorObject":
        return TorsorObject(self, g)

    def arrow(self, g, h) -> "TorsorArrow":
        return TorsorArrow(self, self.cm.element(g, h))

    def identity_arrow(self, obj: "TorsorObject") -> "TorsorArrow":
        return TorsorArrow(self, self.cm.identity2(obj.g))

    def basepoint(self) -> "TorsorObject":
        return self.object(self.cm.G.identity)

    def objects(self):
        return [self.object(g) for g in self.cm.G.elements()]

    def arrows(self):
        return [TorsorArrow(self, cell) for cell in self.cm.all_elements()]

    def __repr__(self):
        return f"Torsor2({self.label!r}, {self.cm.name})"


@dataclass(frozen=True)
class TorsorObject:
    torsor: Torsor2
    g: object

    def act(self, g) -> "TorsorObject":
        return TorsorObject(self.torsor, self.torsor.cm.G.mul(self.g, g))

    def defect(self, other) -> float:
        return self.torsor.cm.G.defect(self.g, other.g)

    def __eq__(self, other):
        return (isinstance(other, TorsorObject)
                and self.torsor is other.torsor and self.defect(other) == 0.0)

    def __hash__(self):
        return hash((id(self.torsor), str(self.g)))


@dataclass(frozen=True)
class TorsorArrow:
    torsor: Torsor2
    cell: TwoGroupElement

    @property
    def source(self) -> TorsorObject:
        return TorsorObject(self.torsor, self.cell.source)

    @property
    def target(self) -> TorsorObject:
        return TorsorObject(self.torsor, self.cell.target)

    def act(self, q: TwoGroupElement) -> "TorsorArrow":
        return TorsorArrow(self.torsor, self.cell * q)

    def compose(self, other: "TorsorArrow") -> "TorsorArrow":
        """self o other (other applied first)."""
        if self.torsor is not other.torsor:
            raise DomainError("cannot compose arrows of different torsors")
        return TorsorArrow(self.torsor, two_group_compose(self.cell, other.cell))

    def defect(self, other) -> float:
        return self.cell.defect(other.cell)


def torsor_divide(x, y):
    """The unique q with x . q = y, written y : x.

    Objects divide to a G element, arrows to a 2-group element; mixing
    torsors or levels is a domain error.  Exact in the regular model.
    """
    if isinstance(x, TorsorObject) and isinstance(y, TorsorObject):
        if x.torsor is not y.torsor:
            raise DomainError(
                f"objects of different torsors "
                f"({x.torsor.label!r} vs {y.torsor.label!r})")
        G = x.torsor.cm.G
        return G.mul(G.inv(x.g), y.g)
    if isinstance(x, TorsorArrow) and isinstance(y, TorsorArrow):
        if x.torsor is not y.torsor:
            raise DomainError(
                f"arrows of different torsors "
                f"({x.torsor.label!r} vs {y.torsor.label!r})")
        return x.cell.inverse() * y.cell
    raise DomainError("division needs two objects or two arrows of one torsor")


# --- morphisms ----------------------------------------------------------------


class TorsorMorphism:
    """Equivariant functor between torsors, extended from its point map.

    The arrow map is forced by equivariance: F(X: p -> q) is the identity
    arrow at F0(p) acted on by the division X : id_p.
    """

    def __init__(self, source: Torsor2, target: Torsor2, point_map):
        if source.cm is not target.cm:
            raise DomainError("torsors live over different crossed modules")
        self.source = source
        self.target = target
        self._point_map = point_map

    def __call__(self, p: TorsorObject) -> TorsorObject:
        return self._point_map(p)

    def on_arrow(self, x: TorsorArrow) -> TorsorArrow:
        idp = x.torsor.identity_arrow(x.source)
        q = torsor_divide(idp, x)
        return self.target.identity_arrow(self(x.source)).act(q)

    def check_equivariance(self, tol=0.0):
        cm = self.source.cm
        for p in self.source.objects():
            for g in cm.G.elements():
                d = self(p.act(g)).defect(self(p).act(g))
                if d > tol:
                    raise EquivarianceError(
                        f"point map is not equivariant at ({p.g}, {g})",
                        witness=(p.g, g))
        return self

    def functoriality_defect(self) -> float:
        """Max defect of F(Y o X) = F(Y) o F(X) over composable arrow pairs."""
        worst = 0.0
        for x in self.source.arrows():
            for hy in self.source.cm.H.elements():
                y = self.source.arrow(x.cell.target, hy)
                lhs = self.on_arrow(y.compose(x))
                rhs = self.on_arrow(y).compose(self.on_arrow(x))
                worst = max(worst, lhs.defect(rhs))
        return worst


def extend_functor(source: Torsor2, target: Torsor2, point_map,
                   check=True) -> TorsorMorphism:
    """Extend an equivariant point map to the unique torsor functor."""
    morphism = TorsorMorphism(source, target, point_map)
    if check and source.cm.is_finite:
        morphism.check_equivariance()
    return morphism


def translation_functor(source: Torsor2, target: Torsor2, g0) -> TorsorMorphism:
    """The functor sending the basepoint to (target, g0); in the regular
    model every equivariant functor is of this form."""
    cm = source.cm

    def point_map(p):
        return target.object(cm.G.mul(g0, p.g))

    return extend_functor(source, target, point_map, check=False)


def all_equivariant_functors(source: Torsor2, target: Torsor2):
    """All equivariant functors between finite regular torsors."""
    return [translation_functor(source, target, g0)
            for g0 in source.cm.G.elements()]


# --- 2-morphisms in H-valued form ----------------------------------------------


@dataclass
class EtaH:
    """2-morphism F => F_prime presented as a map eta_H: objects -> H."""

    F: TorsorMorphism
    F_prime: TorsorMorphism
    mapping: object  # TorsorObject -> H element

    def __call__(self, p: TorsorObject):
        return self.mapping(p)

    def check_laws(self, tol=0.0):
        """t(eta_H(p)) = F'(p) : F(p) and eta_H(p.g) = alpha_{g^-1} eta_H(p)."""
        cm = self.F.source.cm
        for p in self.F.source.objects():
            d = cm.G.defect(cm.t(self(p)), torsor_divide(self.F(p), self.F_prime(p)))
            if d > tol:
                raise EquivarianceError(
                    f"t(eta_H) does not match the functor division at {p.g}",
                    witness=p.g)
            for g in cm.G.elements():
                d = cm.H.defect(self(p.act(g)), cm.alpha(cm.G.inv(g), self(p)))
                if d > tol:
                    raise EquivarianceError(
                        f"eta_H equivariance fails at ({p.g}, {g})",
                        witness=(p.g, g))
        return self


def eta_to_etaH(eta, F: TorsorMorphism, F_prime: TorsorMorphism,
                check=True) -> EtaH:
    """Convert a natural transformation (objects -> arrows) to eta_H form.

    ``eta(p)`` must be an arrow F(p) -> F'(p) satisfying
    eta(p.g) = eta(p).id_g; violations raise with a witness.
    """
    cm = F.source.cm
    tol = 0.0 if cm.is_finite else cm.match_tol

    if check and cm.is_finite:
        for p in F.source.objects():
            arrow = eta(p)
            if arrow.source.defect(F(p)) > tol or arrow.target.defect(F_prime(p)) > tol:
                raise EquivarianceError(
                    f"eta({p.g}) is not an arrow F(p) -> F'(p)", witness=p.g)
            for g in cm.G.elements():
                expected = arrow.act(cm.identity2(g))
                if eta(p.act(g)).defect(expected) > tol:
                    raise EquivarianceError(
                        f"eta violates eta(p.g) = eta(p).id_g at ({p.g}, {g})",
                        witness=(p.g, g))

    def mapping(p):
        q = torsor_divide(F.target.identity_arrow(F(p)), eta(p))
        if cm.G.defect(q.g, cm.G.identity) > tol:
            raise DomainError("division by the identity arrow left a G part")
        return q.h

    return EtaH(F, F_prime, mapping)


def etaH_to_eta(eta_h: EtaH):
    """Inverse presentation: eta(p) = id_{F(p)} . (e, eta_H(p))."""
    F = eta_h.F
    cm = F.source.cm

    def eta(p):
        cell = cm.element(cm.G.identity, eta_h(p))
        return F.target.identity_arrow(F(p)).act(cell)

    return eta


def vertical_compose_etaH(eta_h: EtaH, eta_h_prime: EtaH) -> EtaH:
    """(eta' after eta)_H(p) = eta_H(p) . eta'_H(p)."""
    cm = eta_h.F.source.cm
    return EtaH(eta_h.F, eta_h_prime.F_prime,
                lambda p: cm.H.mul(eta_h(p), eta_h_prime(p)))


def horizontal_compose_etaH(eta1_h: EtaH, eta2_h: EtaH,
                            check_alternative=False):
    """Horizontal composite of eta1: F1 => F1' and eta2: F2 => F2'.

    Returns (eta2 o eta1)_H(p) = eta1_H(p) . eta2_H(F1'(p)); when
    ``check_alternative`` is set, also returns the max defect against
    the equivalent formula eta2_H(F1(p)) . eta1_H(p).
    """
    cm = eta1_h.F.source.cm
    F1, F1p = eta1_h.F, eta1_h.F_prime
    composite = EtaH(
        _compose_functors(eta2_h.F, F1),
        _compose_functors(eta2_h.F_prime, F1p),
        lambda p: cm.H.mul(eta1_h(p), eta2_h(F1p(p))))
    if not check_alternative:
        return composite
    worst = 0.0
    for p in F1.source.objects():
        alt = cm.H.mul(eta2_h(F1(p)), eta1_h(p))
        worst = max(worst, cm.H.defect(composite(p), alt))
    return composite, worst


def _compose_functors(outer: TorsorMorphism, inner: TorsorMorphism):
    return TorsorMorphism(inner.source, outer.target,
                          lambda p: outer(inner(p)))


def all_two_morphisms(F: TorsorMorphism, F_prime: TorsorMorphism):
    """All 2-morphisms F => F' of finite regular torsors.

    eta_H is pinned by its basepoint value h0, which ranges over the
    t-preimage of F'(p0) : F(p0); the rest follows by equivariance.
    """
    cm = F.source.cm
    p0 = F.source.basepoint()
    needed = torsor_divide(F(p0), F_prime(p0))
    out = []
    for h0 in cm.H.elements():
        if cm.G.defect(cm.t(h0), needed) != 0.0:
            continue

        def mapping(p, h0=h0):
            return cm.alpha(cm.G.inv(p.g), h0)

        out.append(EtaH(F, F_prime, mapping))
    return out


# --- exhaustive self-test -------------------------------------------------------


def selftest(cm: CrossedModule) -> dict:
    """Exhaustive verification of the torsor laws for a finite crossed module.

    Returns a law -> max-defect table (all values must be exactly 0.0).
    """
    if not cm.is_finite:
        raise DomainError("selftest is exhaustive and needs a finite backend")
    t1 = Torsor2(cm, "X")
    t2 = Torsor2(cm, "Y")
    t3 = Torsor2(cm, "Z")
    report: dict[str, float] = {}

    # division solves and is unique, at both levels
    worst = 0.0
    unique = True
    for x in t1.objects():
        for y in t1.objects():
            q = torsor_divide(x, y)
            worst = max(worst, x.act(q).defect(y))
            unique &= sum(1 for g in cm.G.elements()
                          if x.act(g).defect(y) == 0.0) == 1
    for x in t1.arrows():
        for y in t1.arrows():
            q = torsor_divide(x, y)
            worst = max(worst, x.act(q).defect(y))
            unique &= sum(1 for cell in cm.all_elements()
                          if x.act(cell).defect(y) == 0.0) == 1
    report["division_solves"] = worst
    report["division_unique"] = 0.0 if unique else 1.0

    def composable_pairs():
        for x in t1.arrows():
            for hy in cm.H.elements():
                yield x, t1.arrow(x.cell.target, hy)

    # (Y:Y') o (X:X') = (Y o X) : (Y' o X')
    worst = 0.0
    pairs = list(composable_pairs())
    for x, y in pairs:
        for xp, yp in pairs:
            lhs = two_group_compose(torsor_divide(yp, y), torsor_divide(xp, x))
            rhs = torsor_divide(yp.compose(xp), y.compose(x))
            worst = max(worst, lhs.defect(rhs))
    report["division_functorial"] = worst

    # (X.g) o (Y.h) = (X o Y).(g o h)
    worst = 0.0
    for y, x in pairs:   # x o y defined
        for h in cm.all_elements():
            for hg in cm.H.elements():
                g = cm.element(h.target, hg)   # g o h defined
                lhs = x.act(g).compose(y.act(h))
                rhs = x.compose(y).act(two_group_compose(g, h))
                worst = max(worst, lhs.defect(rhs))
    report["action_composition_equivariance"] = worst

    # functor extension: equivariance and functoriality for every point map
    worst = 0.0
    functors12 = all_equivariant_functors(t1, t2)
    for F in functors12:
        F.check_equivariance()
        worst = max(worst, F.functoriality_defect())
        for x in t1.arrows():
            for q in cm.all_elements():
                worst = max(worst, F.on_arrow(x.act(q)).defect(F.on_arrow(x).act(q)))
    report["functor_extension"] = worst

    # eta_H laws, round trip, vertical/horizontal composition, interchange
    worst_laws = worst_round = worst_vert = worst_horiz = worst_inter = 0.0
    functors23 = all_equivariant_functors(t2, t3)
    for F in functors12:
        for Fp in functors12:
            for eta_h in all_two_morphisms(F, Fp):
                eta_h.check_laws()
                back = eta_to_etaH(etaH_to_eta(eta_h), F, Fp)
                for p in t1.objects():
                    worst_round = max(worst_round,
                                      cm.H.defect(back(p), eta_h(p)))

    for F in functors12:
        for Fp in functors12:
            for Fpp in functors12:
                for e1 in all_two_morphisms(F, Fp):
                    for e2 in all_two_morphisms(Fp, Fpp):
                        ver = vertical_compose_etaH(e1, e2)
                        honest = eta_to_etaH(
                            lambda p: etaH_to_eta(e2)(p).compose(
                                etaH_to_eta(e1)(p)),
                            F, Fpp, check=False)
                        for p in t1.objects():
                            worst_vert = max(worst_vert,
                                             cm.H.defect(ver(p), honest(p)))

    for F1 in functors12:
        for F1p in functors12:
            for F2 in functors23:
                for F2p in functors23:
                    for e1 in all_two_morphisms(F1, F1p):
                        for e2 in all_two_morphisms(F2, F2p):
                            hor, alt = horizontal_compose_etaH(
                                e1, e2, check_alternative=True)
                            worst_horiz = max(worst_horiz, alt)
                            honest = eta_to_etaH(
                                lambda p: F2p.on_arrow(etaH_to_eta(e1)(p)).compose(
                                    etaH_to_eta(e2)(F1(p))),
                                _compose_functors(F2, F1),
                                _compose_functors(F2p, F1p), check=False)
                            for p in t1.objects():
                                worst_horiz = max(
                                    worst_horiz, cm.H.defect(hor(p), honest(p)))
    report["etaH_laws"] = worst_laws
    report["etaH_round_trip"] = worst_round
    report["vertical_composition"] = worst_vert
    report["horizontal_composition"] = worst_horiz

    # interchange: (e2' . e2) o (e1' . e1) = (e2' o e1') . (e2 o e1)
    for F1 in functors12:
        for F1p in functors12:
            for F1pp in functors12:
                for F2 in functors23:
                    for F2p in functors23:
                        for F2pp in functors23:
                            combos = [
                                (e1, e1p, e2, e2p)
                                for e1 in all_two_morphisms(F1, F1p)
                                for e1p in all_two_morphisms(F1p, F1pp)
                                for e2 in all_two_morphisms(F2, F2p)
                                for e2p in all_two_morphisms(F2p, F2pp)]
                            for e1, e1p, e2, e2p in combos:
                                lhs = horizontal_compose_etaH(
                                    vertical_compose_etaH(e1, e1p),
                                    vertical_compose_etaH(e2, e2p))
                                rhs = vertical_compose_etaH(
                                    horizontal_compose_etaH(e1, e2),
                                    horizontal_compose_etaH(e1p, e2p))
                                for p in t1.objects():
                                    worst_inter = max(
                                        worst_inter,
                                        cm.H.defect(lhs(p), rhs(p)))
    report["interchange"] = worst_inter
    return report
