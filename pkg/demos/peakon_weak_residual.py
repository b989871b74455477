"""
The peakon as a weak steady solution
====================================

The Camassa-Holm peakon ``c exp(-|x|)`` has a kink at its crest, so it only
solves the steady equation in the weak sense. We test it against a bank of
smooth compactly supported bumps and refine the quadrature.
"""

from symwave.evolution_lab import ch_traveling_profile, periodic_grid, weak_steady_residual

x = periodic_grid(40.0, 4096)
peakon = ch_traveling_profile(1.0, 0.0, 0.0, 0.0, x, peakon=True)

# %%
# At its own speed the residual is quadrature error only, and shrinks by
# about four with each halving of the cell width.
for refine in (1, 2, 4, 8):
    print(f"refine {refine}: {weak_steady_residual(peakon, 50, refine=refine):.3e}")

# %%
# The same shape at the wrong speed is not a steady solution.
print("speed 1.1:", weak_steady_residual(peakon.with_speed(1.1), 50))

# %%
# A smooth solitary profile built by quadrature behaves the same way.
smooth = ch_traveling_profile(2.0, 0.5, 0.0, 0.0, periodic_grid(80.0, 512))
print("solitary, refine 16:", weak_steady_residual(smooth, 50, refine=16))
