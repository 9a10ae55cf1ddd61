"""Named varieties and maps used by tests, examples and the CLI."""

from __future__ import annotations

from .geometry import (Morphism, MuRectifiedVariety, RectifiedVariety, Subvariety,
                       affine_space, graph_chart, principal_open)
from .polyalg import MultiPoly, RationalMap


def _x(n: int, ell: int, i: int) -> MultiPoly:
    return MultiPoly.var(n, ell, i)


def affine(d: int, ell: int) -> RectifiedVariety:
    return RectifiedVariety((affine_space(d, ell),), name=f"A{d}")


def gm(ell: int) -> RectifiedVariety:
    """The multiplicative group (A^1)_x embedded by x -> (x, 1/x)."""
    return RectifiedVariety((principal_open(1, _x(1, ell, 0), "Gm"),), name="Gm")


def gm_times_a1(ell: int) -> RectifiedVariety:
    return RectifiedVariety((principal_open(2, _x(2, ell, 0), "Gm x A1"),), name="GmxA1")


def a2_minus_axis(ell: int) -> RectifiedVariety:
    """(A^2)_{x0}: the plane with the line x0 = 0 removed."""
    return RectifiedVariety((principal_open(2, _x(2, ell, 0), "(A2)_x"),), name="A2x")


def mu(X: RectifiedVariety) -> MuRectifiedVariety:
    """The variety with density 1 (omega = dx_1 ^ ... ^ dx_d) on every chart."""
    return MuRectifiedVariety(X)


def point_subvariety(X: RectifiedVariety, coords: tuple[int, ...]) -> Subvariety:
    """A single F_ell-rational point of chart 0, as a zero-dimensional subvariety."""
    ell = X.ell
    pt = RectifiedVariety((graph_chart(X.dim, (), [MultiPoly.const(0, ell, c) for c in coords],
                                       label="point") if X.dim else affine_space(0, ell),),
                          name="point")
    return Subvariety(pt, ((0, RationalMap(tuple(MultiPoly.const(0, ell, c) for c in coords),
                                           MultiPoly.const(0, ell, 1), 0)),))


def coordinate_hyperplane(X: RectifiedVariety, i: int) -> Subvariety:
    """The subvariety {x_i = 0} of an affine chart, parametrized by the other coordinates."""
    d, ell = X.dim, X.ell
    free = tuple(j for j in range(d) if j != i)
    Z = RectifiedVariety((graph_chart(d, free, [MultiPoly.zero(d - 1, ell)], label=f"x{i}=0"),),
                         name=f"x{i}=0")
    comps = []
    k = 0
    for j in range(d):
        if j == i:
            comps.append(MultiPoly.zero(d - 1, ell))
        else:
            comps.append(MultiPoly.var(d - 1, ell, k))
            k += 1
    return Subvariety(Z, ((0, RationalMap.polynomial(comps)),))


def poly_map(source: RectifiedVariety, target: RectifiedVariety, comps, name: str = ""
             ) -> Morphism:
    ell = source.ell
    polys = [c if isinstance(c, MultiPoly) else MultiPoly.parse(c, source.dim, ell) for c in comps]
    g = RationalMap.polynomial(polys)
    return Morphism(source, target, tuple((0, g) for _ in source.charts), name=name)


def identity(X: RectifiedVariety) -> Morphism:
    g = RationalMap.identity(X.dim, X.ell)
    return Morphism(X, X, tuple((i, g) for i in range(len(X.charts))), name="identity")


def monomial(ell: int, d: int) -> Morphism:
    A1 = affine(1, ell)
    return poly_map(A1, A1, [f"x0^{d}"], name=f"x^{d}")


def cube(ell: int) -> Morphism:
    return monomial(ell, 3)


def translate(ell: int, c: int = 1) -> Morphism:
    A1 = affine(1, ell)
    return poly_map(A1, A1, [f"x0 + {c}"], name=f"x+{c}")


def projection(ell: int) -> Morphism:
    """(x, y) -> x from A^2 to A^1."""
    return poly_map(affine(2, ell), affine(1, ell), ["x0"], name="projection")


def gm_projection(ell: int) -> Morphism:
    """Gm x A1 -> Gm, (x, y) -> x."""
    return poly_map(gm_times_a1(ell), gm(ell), ["x0"], name="Gm projection")


def unit_square(ell: int, target: RectifiedVariety | None = None) -> Morphism:
    """x -> x^2 on Gm, landing in A^1 unless another target is given."""
    return poly_map(gm(ell), target or affine(1, ell), ["x0^2"], name="unit squaring")


def square(ell: int) -> Morphism:
    A1 = affine(1, ell)
    return poly_map(A1, A1, ["x0^2"], name="square")


def open_embedding_gm(ell: int) -> Morphism:
    return poly_map(gm(ell), affine(1, ell), ["x0"], name="Gm in A1")


def shear(ell: int) -> Morphism:
    """(x, y) -> (x, x*y) from (A^2)_x to A^2."""
    return poly_map(a2_minus_axis(ell), affine(2, ell), ["x0", "x0*x1"], name="(x, xy)")


def shear_plus(ell: int) -> Morphism:
    """(x, y, z) -> (x, x*y + z) from A^3 to A^2; onto on points with sections on strata."""
    return poly_map(affine(3, ell), affine(2, ell), ["x0", "x0*x1 + x2"], name="(x, xy+z)")


def unipotent(ell: int) -> Morphism:
    A2 = affine(2, ell)
    return poly_map(A2, A2, ["x0 + x1^2", "x1"], name="(x+y^2, y)")


def reembedded_a1(ell: int, extra: str = "x0^2") -> RectifiedVariety:
    from .geometry import embedded_chart
    return RectifiedVariety((embedded_chart(1, ell, [MultiPoly.parse(extra, 1, ell)],
                                            label=f"A1 via {extra}"),), name="A1'")


def reembedded_gm(ell: int) -> RectifiedVariety:
    """Gm embedded by x -> (x, x^2, 1/x)."""
    from .geometry import embedded_chart
    return RectifiedVariety((embedded_chart(1, ell, [MultiPoly.parse("x0^2", 1, ell)],
                                            [_x(1, ell, 0)], label="Gm via (x, x^2, 1/x)"),),
                            name="Gm'")


def bridge(X1: RectifiedVariety, X2: RectifiedVariety) -> Morphism:
    """The identity of a common underlying variety between two chart systems."""
    g = RationalMap.identity(X1.dim, X1.ell)
    return Morphism(X1, X2, tuple((0, g) for _ in X1.charts), name="bridge")


VARIETIES = {
    "A1": lambda ell: affine(1, ell),
    "A2": lambda ell: affine(2, ell),
    "A3": lambda ell: affine(3, ell),
    "Gm": gm,
    "GmxA1": gm_times_a1,
    "A2x": a2_minus_axis,
}

MAPS = {
    "identity": lambda ell: identity(affine(1, ell)),
    "cube": cube,
    "square": square,
    "translate": translate,
    "projection": projection,
    "gm-projection": gm_projection,
    "unit-square": unit_square,
    "gm-embedding": open_embedding_gm,
    "shear": shear,
    "shear-plus": shear_plus,
    "unipotent": unipotent,
}


# -- gluing data --------------------------------------------------------------------------------

def _glue(gamma, Z, U, to_U, gamma_Z, incl_Z, gamma_U, incl_U, sigma_Z, sigma_U, retract, free,
          u_eq):
    from .surjectivity import GlueData
    return GlueData(gamma, Z, U, to_U, gamma_Z, incl_Z, gamma_U, incl_U, sigma_Z, sigma_U,
                    retract, tuple(free), u_eq)


def _const_map(ell: int, values) -> RationalMap:
    return RationalMap.polynomial([MultiPoly.const(0, ell, v) for v in values])


def glue_projection(ell: int):
    """(x, y) -> x split over Z = {0} and U = Gm with sections y -> (0, 0) and a -> (a, 0)."""
    from .surjectivity import SectionWitness
    gamma = projection(ell)
    A1, A2, G = affine(1, ell), affine(2, ell), gm(ell)
    Z = point_subvariety(A1, (0,))
    incl_Z = poly_map(A1, A2, ["0", "x0"], name="{0} x A1 in A2")
    gamma_U = gm_projection(ell)
    incl_U = poly_map(gamma_U.source, A2, ["x0", "x1"], name="Gm x A1 in A2")
    sigma_Z = SectionWitness(_const_map(ell, (0,)), "y = 0")
    sigma_U = SectionWitness(RationalMap.polynomial([_x(1, ell, 0), MultiPoly.zero(1, ell)]),
                             "a -> (a, 0)", nonvanishing=_x(1, ell, 0))
    return _glue(gamma, Z, G, bridge(A1, G), None, incl_Z, gamma_U, incl_U, sigma_Z, sigma_U,
                 None, (0,), _x(1, ell, 0))


def glue_shear_plus(ell: int):
    """(x, y, z) -> (x, xy + z) over Z = {x = 0} and U = (A^2)_x.

    Sections: (0, b) -> (0, 0, b) on Z and (a, b) -> (a, b/a, 0) on U.
    """
    from .surjectivity import SectionWitness
    gamma = shear_plus(ell)
    A2, A3 = affine(2, ell), affine(3, ell)
    Z = coordinate_hyperplane(A2, 0)
    pre_Z = A2
    gamma_Z = poly_map(pre_Z, Z.variety, ["x1"], name="(y, z) -> z")
    incl_Z = poly_map(pre_Z, A3, ["0", "x0", "x1"], name="x = 0 in A3")
    U = a2_minus_axis(ell)
    pre_U = RectifiedVariety((principal_open(3, _x(3, ell, 0), "(A3)_x"),), name="A3x")
    gamma_U = poly_map(pre_U, U, ["x0", "x0*x1 + x2"], name="(x, xy+z) on x != 0")
    incl_U = poly_map(pre_U, A3, ["x0", "x1", "x2"], name="(A3)_x in A3")
    a, b = _x(2, ell, 0), _x(2, ell, 1)
    sigma_Z = SectionWitness(RationalMap.polynomial([MultiPoly.zero(1, ell), _x(1, ell, 0)]),
                             "b -> (0, b)")
    sigma_U = SectionWitness(RationalMap((a * a, b, MultiPoly.zero(2, ell)), a, 1),
                             "(a, b) -> (a, b/a, 0)", nonvanishing=a)
    retract = RationalMap.polynomial([b])
    return _glue(gamma, Z, U, bridge(A2, U), gamma_Z, incl_Z, gamma_U, incl_U, sigma_Z,
                 sigma_U, retract, (0, 2), a)


def glue_square_fabricated(ell: int):
    """x -> x^2 over Z = {0} and U = Gm with the false section y -> y on U (negative control)."""
    from .surjectivity import SectionWitness
    A1, G = affine(1, ell), gm(ell)
    gamma = square(ell)
    Z = point_subvariety(A1, (0,))
    pre_Z = Z.variety
    incl_Z = Morphism(pre_Z, A1, ((0, _const_map(ell, (0,))),), name="{0} in A1")
    gamma_U = unit_square(ell, G)
    incl_U = poly_map(G, A1, ["x0"], name="Gm in A1")
    sigma_Z = SectionWitness(None, "0 -> 0")
    sigma_U = SectionWitness(RationalMap.identity(1, ell), "y -> y", nonvanishing=_x(1, ell, 0))
    return _glue(gamma, Z, G, bridge(A1, G), None, incl_Z, gamma_U, incl_U, sigma_Z, sigma_U,
                 None, (0,), _x(1, ell, 0))


GLUE = {
    "projection": glue_projection,
    "shear-plus": glue_shear_plus,
    "square-fabricated": glue_square_fabricated,
}
