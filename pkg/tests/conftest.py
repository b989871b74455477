import numpy as np
import pytest

from symwave.inverse_sl import InverseProblem, reconstruct_potential, target_spectrum
from symwave.linear_wavefield import build_wave_field, recover_current
from symwave.sturm_liouville import RobinBC, eigenfunction


@pytest.fixture(scope="session")
def n2_construction():
    """The N = 2 pipeline at default settings, shared by several test modules."""
    bc = RobinBC(1.0, 1.0)
    target = target_spectrum(2, 6)
    problem = InverseProblem(target, bc, basis_size=12, match_count=6)
    result = reconstruct_potential(problem)
    pot = result.potential
    current = recover_current(pot, 0.0, bc)
    pairs = [eigenfunction(pot, bc, target[2 - k], index=2 - k) for k in (1, 2)]
    field = build_wave_field(pairs, [(1.0, 1.0), (1.0, 1.0)])
    return {"bc": bc, "target": target, "problem": problem, "result": result,
            "potential": pot, "current": current, "pairs": pairs, "field": field}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

