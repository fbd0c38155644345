# coding: utf-8

# # Only the mean SCP matters for classical percolation
#
# When every edge converts independently with its own random SCP, an edge is open
# with probability `E[X] = mu`. The spanning probability should therefore be the
# same for every SCP law with the same mean.

# In[1]:

from randperc import distributions as D
from randperc.lattice import build_lattice
from randperc.percolation import spanning_probability


# In[2]:

lat = build_lattice("square", 32)
mu = 0.5
sources = {"fixed": mu, "bernoulli": D.Bernoulli(mu), "uniform": D.Uniform(0.3, 0.7),
           "beta": D.Beta(5, 5), "bimodal": D.SymmetricBimodal(mu, 0.4)}
for k, (name, src) in enumerate(sources.items()):
    est = spanning_probability(lat, src, trials=4000, seed=k)
    print(f"{name:10s} {est.spanning_probability:.4f} +- {est.stderr:.4f}")
