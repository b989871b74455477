"""
Parity hypotheses of evolution equations
========================================

Write an equation as ``P(d/dx) u_t = F(u)`` and ask whether ``P`` and
``F`` have opposite parity under ``x -> -x``. The parser works with exact
rational coefficients, so cancellations are exact.
"""

from symwave.pde_parity import BUILTIN_CORPUS, BUILTIN_PARAMS, check_equation, parse_pde

# %%
# The four model equations shipped with the package all qualify.
for name, source in BUILTIN_CORPUS.items():
    rep = check_equation(source, BUILTIN_PARAMS)
    print(f"{name:4s} P {rep.p_parity:5s} F {rep.f_parity:5s} met={rep.hypotheses_met}")

# %%
# KP only involves ``u_t`` through ``(2 u_t)_x``, so its operator is ``2 d/dx``
# and the right-hand side must be even.
kp = parse_pde(BUILTIN_CORPUS["KP"], BUILTIN_PARAMS)
print("KP:", kp.p_text(), "* u_t =", kp.f_text())

# %%
# The heat equation has an even operator and an even right-hand side. The
# report names the offending monomial.
print(check_equation("u_t = u_xx").to_json())

# %%
# Mixing orders in ``F`` also breaks the hypotheses; the witness is the first
# monomial, in canonical order, with the wrong parity.
print(check_equation("u_t = u_x + u*u_xx").to_json())
