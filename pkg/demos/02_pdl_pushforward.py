# coding: utf-8

# # From polarization-dependent loss to SCPs
#
# A link with PDL `P` dB leaves a pair whose SCP is `2 / (1 + 10**(P/10))`.
# Here we push three PDL models through this map and compare their mean SCPs.

# In[1]:

import numpy as np
from scipy import stats

from randperc import pdl


# In[2]:

P = np.array([0.0, 1.0, 2.35, 10.0])
print(pdl.scp_from_pdl(P))
print(pdl.pdl_from_scp(pdl.scp_from_pdl(P)))


# Maxwellian PDL with mean 2.35 dB: analytic density, so the SCP density is exact.

# In[3]:

mx = pdl.MaxwellianPdl(2.35)
x = np.linspace(0.5, 1.0, 6)
print(pdl.induced_scp_density(mx, x))
print("mean SCP", pdl.mean_scp(mx))


# The sampled SCPs follow the pushforward law.

# In[4]:

xs = pdl.scp_from_pdl(pdl.sample_pdl(mx, 200_000, 1))
print("KS distance", stats.kstest(xs, pdl.PdlInduced(mx).cdf).statistic)


# Sampler-only models: a chain of 200 weak elements calibrated to the same mean,
# and a fixed five-element link with random couplings.

# In[5]:

chain = pdl.weak_element_chain(2.35, 200, seed=0)
link = pdl.ConcatenatedLink(pdl.LIN_JIANG_ELEMENTS_DB)
for name, model in [("chain", chain), ("five-element", link)]:
    print(name, model.describe(), pdl.mean_scp(model, samples=200_000))


# For small PDL the mean SCP is linear in the mean PDL.

# In[6]:

for m in (0.05, 0.1, 0.5, 2.35):
    print(m, pdl.mean_scp(pdl.MaxwellianPdl(m))[0], pdl.weak_pdl_mean_approx(m))
