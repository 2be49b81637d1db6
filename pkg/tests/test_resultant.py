import numpy as np
import pytest
import sympy

from amoeba_lab.laurent import LaurentPoly, evaluate, parse
from amoeba_lab.resultant import DegenerateResultantError, cluster, solve_system


X, Y = sympy.symbols("x y")


def to_poly(text: str) -> LaurentPoly:
    expr = sympy.Poly(sympy.sympify(text.replace("^", "**")), X, Y)
    return LaurentPoly.from_terms(((i, j, float(c)) for (i, j), c in expr.terms()), check=False)


def sympy_solutions(f_text: str, h_text: str):
    """Exact resultant in sympy, high-precision roots, then back-substitution."""
    f = sympy.sympify(f_text.replace("^", "**"))
    h = sympy.sympify(h_text.replace("^", "**"))
    res = sympy.Poly(sympy.resultant(f, h, Y), X)
    out = []
    for xr in res.nroots(n=30):
        if abs(complex(xr)) < 1e-12:
            continue
        for yr in sympy.Poly(f.subs(X, xr), Y).nroots(n=30):
            if abs(complex(yr)) > 1e-12 and abs(complex(h.subs({X: xr, Y: yr}))) < 1e-15:
                out.append((complex(xr), complex(yr)))
    return out


def match(ours, reference, tol=1e-8):
    assert len(ours) == len(reference)
    left = list(reference)
    for z in ours:
        k = min(range(len(left)), key=lambda i: np.abs(np.array(left[i]) - z).max())
        assert np.abs(np.array(left[k]) - z).max() < tol
        left.pop(k)


@pytest.mark.parametrize(
    "f, h",
    [
        ("x^2+y^2-4", "x-y"),
        ("x^2+y^2-1", "x^2-y-0.5"),
        ("1+x+y", "2*x-y+3"),
        ("x*y-2", "x+y-3"),
        ("x^3-y+1", "y^2-x-2"),
    ],
)
def test_against_sympy(f, h):
    sol = solve_system(to_poly(f), to_poly(h))
    match(list(sol.points), sympy_solutions(f, h))


def test_points_satisfy_both_equations():
    f = parse("1+x^3+y^3+5*x+5*y+5*x^2+5*y^2+5*x^2*y+5*x*y^2-40*x*y")
    h = parse("0.3*x^2 + x*y - 2*y + 1")
    sol = solve_system(f, h)
    assert len(sol.points) > 0
    for a, b in sol.points:
        assert abs(evaluate(f, a, b)) <= 1e-8 * f.magnitude(a, b)
        assert abs(evaluate(h, a, b)) <= 1e-8 * h.magnitude(a, b)


def test_elimination_direction_does_not_matter():
    f, h = parse("x^2+y^2-1"), parse("x^2-y-0.5")
    a = solve_system(f, h, eliminate="x").points
    b = solve_system(f, h, eliminate="y").points
    match(list(a), [tuple(z) for z in b])


def test_solutions_on_axes_are_excluded():
    # x*y = 0 only on the axes; the other common zeros are off the torus
    sol = solve_system(parse("x+y+x*y"), parse("x-y+x*y"))
    assert all(np.all(np.abs(z) > 1e-9) for z in sol.points)


def test_common_factor_is_degenerate():
    f = LaurentPoly.from_terms([(1, 0, 1.0), (0, 1, 1.0), (0, 0, 1.0)])
    h = LaurentPoly.from_terms([(2, 0, 1.0), (1, 1, 1.0), (1, 0, 2.0), (0, 1, 1.0), (0, 0, 1.0)])  # (1+x+y)(1+x)
    with pytest.raises(DegenerateResultantError):
        solve_system(f, h)


def test_cluster_merges_close_points():
    pts = np.array([[1.0], [1.0 + 1e-9], [2.0]])
    assert len(cluster(pts, 1e-6)) == 2
