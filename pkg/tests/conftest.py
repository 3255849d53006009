import pytest

from outagebf.model import CnfFormula, SisoInstance, WeightedGraph


@pytest.fixture
def path_graph():
    """Three-vertex unit-weight path 1-2-3; max cut is {2} with weight 2."""
    return WeightedGraph(V=3, edges=((1, 2, 1.0), (2, 3, 1.0)))


@pytest.fixture
def single_edge_graph():
    return WeightedGraph(V=2, edges=((1, 2, 1.0),))


@pytest.fixture
def small_cnf():
    """(x1 | x2 | x3) & (x2 | !x3 | !x4): satisfiable, 22 gadget users."""
    return CnfFormula(N=4, clauses=((1, 2, 3), (2, -3, -4)))


@pytest.fixture
def unsat_cnf():
    """All eight sign patterns over {1,2,3}: unsatisfiable."""
    clauses = tuple(
        (s1 * 1, s2 * 2, s3 * 3)
        for s1 in (1, -1)
        for s2 in (1, -1)
        for s3 in (1, -1)
    )
    return CnfFormula(N=3, clauses=clauses)


@pytest.fixture
def two_user_instance():
    return SisoInstance(
        Q=[[1.0, 0.2], [0.1, 0.9]],
        sigma2=[0.5, 0.6],
        rho=[0.9, 0.85],
        P=[1.0, 1.0],
        alpha=[1.0, 1.0],
    )


@pytest.fixture
def three_user_instance():
    return SisoInstance(
        Q=[[1.2, 0.15, 0.3], [0.25, 0.8, 0.1], [0.05, 0.2, 1.0]],
        sigma2=[0.7, 1.1, 0.9],
        rho=[0.9, 0.8, 0.92],
        P=[1.0, 0.8, 1.2],
        alpha=[1.0, 1.5, 0.7],
    )
