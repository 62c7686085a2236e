import pytest

from hpade import MultiIndex, SeriesSystem, hp_approximant, parse_series


def sweep(exprs, m, n_lo, n_hi, prec, normalization="monic", method="auto"):
    comps = [parse_series(e) for e in exprs]
    system = SeriesSystem(comps, MultiIndex(m))
    run = [hp_approximant(system, n, prec, normalization, method)
           for n in range(n_lo, n_hi + 1)]
    return system, run


@pytest.fixture(scope="session")
def paper_system_run():
    """f1 = 1/(z-1)+e^z, f2 = log(z-1), m=(1,1), n in [2,60], 512 bits."""
    return sweep(["1/(z-1) + exp(z)", "log(z-1)"], [1, 1], 2, 60, 512)


@pytest.fixture(scope="session")
def paper_system_run_long():
    """Same system swept to n=120 for the attraction-index examples."""
    return sweep(["1/(z-1) + exp(z)", "log(z-1)"], [1, 1], 2, 120, 512)


@pytest.fixture(scope="session")
def gonchar_run():
    """f = 1/(z-1) + 1/(z-2), m=1, n in [10,80], 512 bits."""
    return sweep(["1/(z-1) + 1/(z-2)"], [1], 10, 80, 512)


@pytest.fixture(scope="session")
def rational_exact_run():
    """f = 1/((z-1)(z-2)), Pade (n,2), n in [4,20], exact path."""
    return sweep(["1/((z-1)*(z-2))"], [2], 4, 20, 512)


@pytest.fixture(scope="session")
def sqrt_run():
    """f = 1/(z-1) + sqrt(1-z/2), Pade m=2, n in [10,80], 768 bits."""
    return sweep(["1/(z-1) + sqrt(1 - z/2)"], [2], 10, 80, 768)
