"""Chart-level curvature engine for almost Hermitian manifolds.

Computes the curvature apparatus of a metric/almost-complex-structure pair
(Riemann tensor, Ricci and *-Ricci traces, the structure tensor F, the
Nijenhuis tensor, nabla R) with exact jet derivatives, and checks the tensor
characterization of pointwise constant antiholomorphic sectional curvature
together with its consequences on concrete example manifolds.
"""

__version__ = "0.1.0"
