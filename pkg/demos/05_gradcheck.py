"""
Numerical self-test.

Checks the surrogate gradient against finite differences, the minorizer's
tangency and lower bound, and the Takagi factorization. The same report is
printed by ``bdris gradcheck``.
"""

from bdris.diagnostics import gradcheck

report = gradcheck(seed=0, sizes=(2, 4, 8))
print(report.text())

# a sign error in the gradient is caught
bad = gradcheck(seed=0, sizes=(2,), corrupt_gradient=True)
print("corrupted gradient passes:", bad.passed)
