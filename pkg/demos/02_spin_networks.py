"""Cylindrical functions on an embedded graph and their Hilbert space.

Builds the two-vertex, three-edge "theta" graph, plays with normalized
matrix-element states, verifies orthonormality both exactly and by Monte
Carlo, and ends with a gauge-invariant spin network state.
"""

from fractions import Fraction

import numpy as np

from spinnet import (
    EmbeddedGraph,
    GroupElement,
    evaluate,
    haar_sample,
    inner_product,
    mc_inner_product,
    monomial,
    spin_network_basis,
    states_for_spins,
    transform_at_vertices,
)

V = np.array
half = Fraction(1, 2)

# Two vertices joined by three arcs — in-between bulges keep the arcs apart.
theta = EmbeddedGraph.build(
    V([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
    [
        (0, 1),
        (0, 1, V([[0.0, 0.0, 0.0], [0.5, 0.7, 0.0], [1.0, 0.0, 0.0]])),
        (0, 1, V([[0.0, 0.0, 0.0], [0.5, 0.0, 0.7], [1.0, 0.0, 0.0]])),
    ],
)
print("theta graph:", theta.n_vertices, "vertices,", theta.n_edges, "edges")

# Normalized matrix elements sqrt(2j+1) D^j_{mn}(h_e), one label per edge.
f = monomial(theta, [(half, half, half), (0, 0, 0), (1, 0, 1)])
g = monomial(theta, [(half, half, -half), (0, 0, 0), (1, 0, 1)])

print("self inner product  <f|f> =", inner_product(f, f))
print("cross inner product <f|g> =", inner_product(f, g))

# The same numbers by Monte Carlo over Haar-random edge holonomies.
est, err = mc_inner_product(f, f, 200_000, seed=4)
print(f"MC estimate of <f|f>: {est:.4f} +- {err:.4f}")

# Cylindrical functions are just functions: evaluate one on group elements.
rng = np.random.default_rng(11)
hs = [haar_sample(rng) for _ in range(3)]
print("f(h1,h2,h3) =", evaluate(f, hs))

# A monomial is not gauge invariant; the projected spin-network states are.
# Gauge acts on holonomies by h_e -> g(target) h_e g(source)^{-1}; an
# invariant state takes the same value before and after.
spins = [half, half, 1]
states = states_for_spins(theta, spins)
psi = states[0].fun
gauge = [GroupElement.exp([0.3, -0.8, 0.1]), GroupElement.exp([-0.2, 0.5, 0.9])]
moved = transform_at_vertices(theta, hs, gauge)
print("\ngauge-invariant state count for spins (1/2,1/2,1):", len(states))
print("monomial moves under gauge:",
      abs(evaluate(f, hs) - evaluate(f, moved)) > 1e-3)
print("spin network state does not:",
      abs(evaluate(psi, hs) - evaluate(psi, moved)) < 1e-12)

# Enumerate the whole basis up to a spin cutoff.
basis = spin_network_basis(theta, max_spin=1)
print("gauge-invariant basis up to j=1:", len(basis), "states")
for s in basis[:4]:
    labels = [tuple(str(x) for x in lab) for lab in s.vertex_labels]
    print("  spins", tuple(str(j) for j in s.spins), " intertwiners", labels)
