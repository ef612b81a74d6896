"""The four correlation kernels and their Cauchy transforms.

The kernels are finite sums over the biorthogonal family; moving an
argument off the real axis replaces polynomials and transforms by their
Cauchy transforms and adds an explicit rational (or double-integral)
subtraction.  The summation formulas are verified here against the
defining integrals - the identity that makes the ratio formulas work.
"""
from twomatrix import (
    KernelContext,
    ModelSpec,
    TransformEvaluator,
    build_system,
    k11,
    k11_tilde,
    k12,
    k21_tilde,
    k22_tilde,
)
from twomatrix.kernels import (
    k11_tilde_integral,
    k21_tilde_integral,
    k22_tilde_integral,
)

model = ModelSpec((0.0, 0.0, 0.5), (0.0, 0.0, 0.5), 0.5)
system = build_system(model, 8)
tev = TransformEvaluator(model, system, memoize=True)
ctx = KernelContext(model, system, tev, n=3)

print("plain kernels at real points:")
print("  K11(0.5, -0.2) =", k11(ctx, 0.5, -0.2))
print("  K12(0.5, -0.2) =", k12(ctx, 0.5, -0.2))

print("\nweighted transforms and their Cauchy transforms:")
print("  Q_0(0)      =", tev.Q(0, 0.0), " (= sqrt(2 pi))")
print("  Q~_2(2i)    =", tev.Q_tilde(2, 2j))
print("  P~_2(1+1i)  =", tev.P_tilde(2, 1 + 1j))

print("\nsummation formula vs defining integral (relative differences):")
x, y = 0.7, -0.4
v, w = 0.3 + 0.9j, -0.5 - 1.2j
pairs = [
    ("K~11", k11_tilde(ctx, x, v), k11_tilde_integral(ctx, x, v)),
    ("K~21", k21_tilde(ctx, w, v), k21_tilde_integral(ctx, w, v)),
    ("K~22", k22_tilde(ctx, w, y), k22_tilde_integral(ctx, w, y)),
]
for name, s, i in pairs:
    print(f"  {name}: sum {s:.10g}   integral {i:.10g}   rel {abs(s - i) / abs(s):.2e}")

print("\nlarge-argument decay of Q~_n(v) ~ h_n^2 / v^(n+1):")
for radius in (50.0, 100.0, 200.0):
    val = tev.Q_tilde(2, 1j * radius) * (1j * radius) ** 3 / system.h_sq[2]
    print(f"  radius {radius:>5}: ratio to leading term = {val:.6f}")
