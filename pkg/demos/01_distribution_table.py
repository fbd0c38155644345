# coding: utf-8

# # Expected minimum of two SCPs
#
# The bond left behind by a q-swap carries the smaller of two singlet-conversion
# probabilities. Its mean is `E[min] = mu - Delta/2`, where `Delta = E|X1 - X2|`.
# For location-scale families this is `mu - C*sigma` with a shape constant `C`.

# In[1]:

import math

import numpy as np

from randperc import distributions as D
from randperc.rng import stream


# Closed forms next to the quadrature values.

# In[2]:

rows = [
    ("uniform", D.Uniform.from_mean_std(0.5, 0.1), 1 / math.sqrt(3)),
    ("gaussian", D.TruncatedGaussian(0.5, 0.05), 1 / math.sqrt(math.pi)),
    ("bimodal", D.SymmetricBimodal(0.5, 0.2), 0.5),
    ("haar", D.Haar(), math.sqrt(15) / 7),
]
for name, dist, c in rows:
    s = D.stats(dist)
    print(f"{name:10s} mu={s.mean:.4f} sigma={s.std:.4f} E[min]={s.expected_min:.6f} C={s.shape_constant:.6f} (closed {c:.6f})")


# Bernoulli laws are not location-scale, but the minimum is 1 only when both bonds are:

# In[3]:

for mu in (0.2, 0.5, 0.8):
    print(mu, D.Bernoulli(mu).expected_min(), mu ** 2)


# A quick Monte Carlo check on the Haar law, which is Beta(1, 3).

# In[4]:

rng = stream(0)
x1, x2 = D.Haar().sample(rng, 10 ** 6), D.Haar().sample(rng, 10 ** 6)
m = np.minimum(x1, x2)
print(m.mean(), "+-", m.std() / 1000, "vs", 1 / 7)
