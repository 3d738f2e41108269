"""
bregqn - V-Bregman quasi-Newton methods

Hessian update formulae derived from Bregman divergences on the
positive-definite cone, a small optimization driver, influence-function
probes for inexact line search and the experiment harness built on them.
"""
__version__ = "0.1.0"
