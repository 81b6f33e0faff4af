"""Exact invariants of real quadratic fields whose 2-class group is (2,2).

The package computes, from a fundamental discriminant with four prime
discriminant factors, the data controlling the narrow 2-class field tower:
form class groups, fundamental units and their square-root decompositions,
unit indices of multiquadratic fields, conic and quaternionic norm equations,
class number formula instances, and the classification into labelled cases
with a tower-length verdict.
"""

__version__ = "0.1.0"
