"""symwave: reflection symmetry and traveling waves, symbolically and numerically.

Submodules
----------
pde_parity
    Parse ``P(d/dx) u_t = F(u)`` and check the x-parity hypotheses.
sturm_liouville
    Robin eigenvalue problems on ``[0, 1]`` by Prufer shooting.
inverse_sl
    Potentials from finitely many prescribed eigenvalues.
linear_wavefield
    Background currents and asymmetric linear wave fields built from them.
evolution_lab
    Pseudo-spectral KdV/CH evolution, symmetry tracking, steady profiles.
harness
    Config-driven experiments and the ``symwave`` command line.
"""
__version__ = "0.1.0"

from .errors import SymwaveError  # noqa: E402

__all__ = ["SymwaveError", "__version__"]
