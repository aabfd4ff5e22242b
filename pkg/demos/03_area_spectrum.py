"""The area operator: punctures, eigenvalue ladder, and physical units.

A surface patch acquires area only where graph edges puncture it.  Each
transverse puncture of spin j contributes 2*sqrt(j(j+1)) in operator units;
the physical value carries a factor 4*pi*gamma (and the Planck area).
"""

import math

import numpy as np

from spinnet import EmbeddedGraph, Surface, area_spectrum, punctures

V = np.array


def patch(z):
    corners = V([[-2.0, -2.0, z], [2.0, -2.0, z], [2.0, 2.0, z], [-2.0, 2.0, z]])
    return Surface(V([0.0, 0.0, z]), V([0.0, 0.0, 1.0]), corners)


# One straight edge crossing the z = 0 plane.
line = EmbeddedGraph.build(V([[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]]), [(0, 1)])
report = punctures(line, patch(0.0))
for p in report.punctures:
    tags = [(he.edge, he.direction, he.kappa) for he in p.half_edges]
    print("puncture at", np.round(p.point, 6), "half-edges:", tags)

# Eigenvalue ladder up to j = 3 (operator units).
spec = area_spectrum(line, patch(0.0), max_spin=3)
print("\n  value        multiplicity  labels")
for entry in spec.entries:
    print(f"  {entry.value:<12.8f} {entry.multiplicity:<13d} {entry.labels}")

gamma = 0.2375
smallest = min(v for v in spec.values if v > 0)
print(f"\nsmallest physical quantum at gamma={gamma}:",
      f"{4 * math.pi * gamma * smallest:.6f} (Planck areas)")
print("which equals 8*pi*gamma*sqrt(3)/2:",
      math.isclose(4 * math.pi * gamma * smallest,
                   8 * math.pi * gamma * math.sqrt(3) / 2, rel_tol=1e-14))

# Area is additive: two parallel strands, both crossing the patch.
pair = EmbeddedGraph.build(
    V([[0.5, 0.0, -1.0], [0.5, 0.0, 1.0], [-0.5, 0.0, -1.0], [-0.5, 0.0, 1.0]]),
    [(0, 1), (2, 3)],
)
spec2 = area_spectrum(pair, patch(0.0), max_spin=1)
print("\ntwo strands, j up to 1 — largest eigenvalue:", max(spec2.values))
print("expected 2*sqrt(2) + 2*sqrt(2):", 4 * math.sqrt(2))
