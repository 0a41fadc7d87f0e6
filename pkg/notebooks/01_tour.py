"""
A short tour of almostlie
=========================

Build a few almost Lie algebroids, look at their Jacobiators and
compute the cohomology of the small complexes that are finite.
Run with ``python3 notebooks/01_tour.py``.
"""

# %%
from almostlie import gallery
from almostlie.algebroid import check_axioms, jacobiator_tensor
from almostlie.cochain import check_dj_zero, q_coordinate_check
from almostlie.cohomology import betti_table
from almostlie.specfile import dumps

# %% [markdown]
# The tangent model of the plane, written in the text format the CLI reads.

# %%
plane = gallery.build_tangent_model(2)
print(dumps(plane))
print("betti", betti_table(plane, 3).betti)

# %% [markdown]
# A three-dimensional bracket whose Jacobiator is nonzero.  Nothing is
# anchored, so the whole space is kernel and J may be anything.

# %%
triple = gallery.build_almost_lie_algebra(gallery.named_algebra("triple"))
print("axioms hold:", check_axioms(triple).passed)
J = jacobiator_tensor(triple)
print("J(e1, e2, e3) =", J[0][1][2])
print(check_dj_zero(triple))
print("betti", betti_table(triple, 5).betti)

# %% [markdown]
# Twisted Poisson structures.  With an invertible bivector the anchor is
# injective, so the Jacobiator vanishes even when the form is not closed.
# A rank-deficient bivector with a kernel frame can carry a genuine J.

# %%
omega = gallery.FormField(4, 2, {(0, 1): 1, (2, 3): 1, (0, 2): "x2"})
Pi, H = gallery.twisted_poisson_from_form(omega)
nonclosed = gallery.build_twisted_poisson(Pi, H)
print("H =", H)
print("J zero:", not any(v for b in jacobiator_tensor(nonclosed) for r in b for w in r for v in w))

Pi5 = gallery.BivectorField.from_entries(5, {(0, 1): 1, (2, 3): 1})
H5 = gallery.FormField(5, 3, {(1, 3, 4): "x1"})
degenerate = gallery.build_twisted_poisson(
    Pi5, H5,
    kernel_frame=[[0], [0], [0], [0], [1]],
    kernel_projection=[[0, 0, 0, 0, 1]],
)
print("J(e1, e2, e3) =", jacobiator_tensor(degenerate)[0][1][2])
print(check_dj_zero(degenerate))

# %% [markdown]
# The coordinate vector field agrees with d on generators and low monomials.

# %%
for name, spec in [("plane", plane), ("triple", triple), ("degenerate", degenerate)]:
    print(name, q_coordinate_check(spec, 3))
