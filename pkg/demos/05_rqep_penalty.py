# coding: utf-8

# # What q-swaps cost when SCPs are random
#
# On a double-bond honeycomb, 3-swaps on one sublattice produce a triangular
# lattice. Each new bond carries the minimum of the two consumed SCPs, so its mean
# drops from mu to mu - Delta/2.

# In[1]:

from randperc import distributions as D
from randperc.lattice import build_lattice
from randperc.percolation import rqep_penalty_experiment


# In[2]:

lat = build_lattice("honeycomb", 16, double_bonds=True)
for dist in (D.Uniform(0, 1), D.Haar(), D.Bernoulli(0.7), D.PointMass(0.7)):
    rep = rqep_penalty_experiment(lat, dist, trials=200, seed=3, spanning_trials=500)
    print(f"{rep.distribution:28s} post-swap {rep.post_swap_mean:.4f} +- {rep.post_swap_stderr:.4f}"
          f"  E[min] {rep.expected_min:.4f}  RCEP {rep.rcep.spanning_probability:.3f}"
          f"  RQEP {rep.rqep.spanning_probability:.3f}")
