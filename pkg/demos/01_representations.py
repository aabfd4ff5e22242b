"""A tour of the SU(2) representation layer.

Everything downstream — cylindrical functions, flux, area, volume — reduces
to Wigner matrices, angular momentum generators and recoupling data, so this
is the natural place to start.  Run it with::

    python3 demos/01_representations.py
"""

import math
from fractions import Fraction

import numpy as np

from spinnet import (
    GroupElement,
    HalfInt,
    angular_momentum,
    casimir_eigenvalue,
    clebsch_gordan,
    intertwiner_basis,
    wigner,
)

half = HalfInt.of(Fraction(1, 2))
print("spins are exact half-integers:", half, half + 1, half + half)

# The j = 1/2 Wigner matrix is the defining representation itself.
g = GroupElement.exp([0.4, -0.2, 0.9])
print("\nj=1/2 Wigner matrix == group element:",
      np.allclose(wigner(half, g).entries, g.matrix))

# Higher spins: unitary (2j+1)-dimensional matrices, multiplicative in g.
u, v = GroupElement.exp([0.1, 0.7, -0.3]), GroupElement.exp([-0.5, 0.2, 0.2])
j32 = Fraction(3, 2)
print("multiplicativity at j=3/2:",
      np.allclose(wigner(j32, u @ v).entries,
                  wigner(j32, u).entries @ wigner(j32, v).entries))

# Characters only depend on the rotation angle: sin((2j+1)t/2)/sin(t/2).
theta = 1.1
gt = GroupElement.exp([0.0, 0.0, theta])
for tj in range(1, 5):
    j = HalfInt(tj)
    chi = wigner(j, gt).trace().real
    closed = math.sin((tj + 1) * theta / 2) / math.sin(theta / 2)
    print(f"character j={j}: trace={chi:+.6f}  closed-form={closed:+.6f}")

# Angular momentum generators satisfy [J1, J2] = i J3 and sum to the Casimir.
print()
for j in (half, HalfInt(2), Fraction(5, 2)):
    J1, J2, J3 = angular_momentum(j)
    comm_ok = np.allclose(J1 @ J2 - J2 @ J1, 1j * J3)
    print(f"j={HalfInt.of(j)}: algebra {comm_ok}, Casimir j(j+1) = {casimir_eigenvalue(j)}")

# Recoupling: 3/2 x 1 decomposes into j = 1/2, 3/2, 5/2.
blocks = clebsch_gordan(Fraction(3, 2), 1)
print("\n3/2 x 1 ->", [str(b.j) for b in blocks])

# Intertwiners: how many singlets live in a tensor product of spins.
for spins in ([half, half], [half, half, 1], [1, 1, 1, 1], [half] * 3):
    d = intertwiner_basis(spins).dimension
    print("singlets in", " x ".join(str(HalfInt.of(s)) for s in spins), "=", d)
