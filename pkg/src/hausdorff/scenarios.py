"""Built-in scenarios, stored as config text so they go through the same parser."""
from __future__ import annotations

from fractions import Fraction

from .kernel import ext_real, fmt_ext

__all__ = ["SCENARIOS", "scenario_text", "list_scenarios"]


def _cesaro(p="2"):
    p = ext_real(p)
    if p == float("inf") or p <= 1:
        raise ValueError("the cesaro scenario needs 1 < p < inf")
    ps = fmt_ext(p)
    families = []
    blocks = []
    for eps in ("0.2", "0.1", "0.05", "0.02"):
        top = float(1 / p - Fraction(eps))
        families.append(f"eps-{eps}")
        blocks.append(f"""[witness.eps-{eps}]
kind = truncated-power
alpha = 0.0, {top!r}
support = 1e-60, 1.0
""")
    return f"""# Cesaro / Hardy averaging operator (Cf)(x) = int_0^1 f(ux) du on L^p(0, inf)
[scenario]
schema_version = 1
name = cesaro
description = Cesaro operator at p = q = {ps}; sharp constant p/(p-1)

[omega]
kind = interval
lo = 0
hi = 1

[source]
kind = interval
lo = 0
hi = inf

[target]
same_as = source

[family]
kind = scalar-dilation

[kernel]
expr = 1
nonnegative = true

[exponents]
p = {ps}
q = {ps}

[quadrature]
truncation = 1e-60, 1e12

[estimator]
families = {", ".join(families)}
budget = 8
seed = 0

""" + "\n".join(blocks)


def _discrete_hausdorff(p="2"):
    ps = fmt_ext(ext_real(p))
    cuts = ", ".join(repr(2.0 ** j) for j in range(-8, 9))
    return f"""# sum_k phi(k) f(2^k x) on R^2 with phi(k) = 2^-|k|, k = -3..3
[scenario]
schema_version = 1
name = discrete-hausdorff
description = discrete Hausdorff operator on R^2 with A_k = 2^k I and m(k) = |det A_k|

[omega]
kind = index
indices = -3, -2, -1, 0, 1, 2, 3

[source]
kind = box
lo = -inf, -inf
hi = inf, inf

[target]
same_as = source

[family]
kind = matrix-dilation
diagonal = 2^k
dim = 2

[kernel]
expr = 2^-abs(u)
nonnegative = true

[exponents]
p = {ps}
q = {ps}

[estimator]
method = families
families = dyadic-cells

[witness.dyadic-cells]
kind = step-function
dim = 2
breakpoints = {cuts}
"""


def _cyclic_group(p="2"):
    ps = fmt_ext(ext_real(p))
    return f"""# automorphisms x -> kx of Z_5 under normalized Haar measure
[scenario]
schema_version = 1
name = cyclic-group
description = Z_5 with multipliers 1, 2 and weights 0.3, 0.7; norm equals the L^1 mass of the weights

[omega]
kind = index
indices = 1, 2

[source]
kind = group
order = 5
measure = haar

[target]
same_as = source

[family]
kind = cyclic-automorphism

[kernel]
weights = 0.3, 0.7
nonnegative = true

[exponents]
p = {ps}
q = {ps}

[estimator]
method = matrix
restarts = 16
seed = 0
"""


def _two_variable(p="2"):
    return """# two-variable kernel Phi(u, x) = u^(-1/4) (1 + x) on (0, 1), L^4 -> L^2
[scenario]
schema_version = 1
name = two-variable-demo
description = dilation on (0, 1) with a two-variable kernel, regime q > p

[omega]
kind = interval
lo = 0
hi = 1

[source]
kind = interval
lo = 0
hi = 1

[target]
same_as = source

[family]
kind = scalar-dilation

[kernel]
expr = u^(-0.25) * (1 + x)
nonnegative = true

[exponents]
p = 2
q = 4

[estimator]
families = power, bump
budget = 16
seed = 0

[witness.power]
kind = truncated-power
alpha = 0.0, 0.24
support = 1e-60, 1.0

[witness.bump]
kind = gaussian-bump
center = 0.05, 0.95
width = 0.02, 0.5
carrier = 0.0, 1.0
"""


def _divergence(p="2"):
    return """# Cesaro operator on (0, 1) applied to t^-1.25, which lies in L^(1/2) but not in L^1
[scenario]
schema_version = 1
name = p-lt-1-divergence
description = truncated values of (C f)(1) for f(t) = t^-1.25 grow without bound

[omega]
kind = interval
lo = 0
hi = 1

[source]
kind = interval
lo = 0
hi = 1

[target]
same_as = source

[family]
kind = scalar-dilation

[kernel]
expr = 1
nonnegative = true

[exponents]
p = 1
q = 1

[probe]
f = t^-1.25
x = 1.0
eps = 0.01, 0.0001, 1e-06
witness_p = 0.5
"""


SCENARIOS = {
    "cesaro": ("Cesaro operator on L^p(0, inf): bound p/(p-1) vs truncated-power witnesses",
               _cesaro),
    "discrete-hausdorff": ("sum_k 2^-|k| f(2^k x) on R^2: determinant-weighted bound vs dyadic "
                           "step functions", _discrete_hausdorff),
    "cyclic-group": ("automorphisms of Z_5 under Haar measure: bound equals the exact norm",
                     _cyclic_group),
    "two-variable-demo": ("two-variable kernel on (0, 1), L^4 -> L^2", _two_variable),
    "p-lt-1-divergence": ("Cesaro operator at f(t) = t^-1.25: truncated values diverge",
                          _divergence),
}


def scenario_text(name: str, p=None) -> str:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; try one of {', '.join(SCENARIOS)}")
    builder = SCENARIOS[name][1]
    return builder() if p is None else builder(p)


def list_scenarios():
    return [(name, desc) for name, (desc, _) in SCENARIOS.items()]
