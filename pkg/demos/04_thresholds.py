# coding: utf-8

# # Bond thresholds by bisection
#
# Bisect p until the spanning probability crosses 1/2. The exact bond thresholds
# are 1/2 (square), 2 sin(pi/18) (triangular) and 1 - 2 sin(pi/18) (honeycomb).
# Small lattices and few trials keep this quick, so finite-size shifts of a few
# thousandths show up (the honeycomb most); the acceptance suite uses L=128.

# In[1]:

import math

from randperc.percolation import threshold_estimate


# In[2]:

s = 2 * math.sin(math.pi / 18)
for kind, exact in [("square", 0.5), ("triangular", s), ("honeycomb", 1 - s)]:
    est = threshold_estimate(kind, 48, trials_per_point=2000, seed=1, tol=0.005)
    print(f"{kind:10s} {est.mu_c:.4f}  ci=({est.ci[0]:.3f}, {est.ci[1]:.3f})  exact {exact:.4f}")
