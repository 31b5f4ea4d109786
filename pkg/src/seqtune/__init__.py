"""seqtune: Bayesian optimisation of logic-synthesis operation sequences.

A Gaussian-process surrogate over categorical sequences (subsequence string
kernel) drives expected-improvement search inside an adaptive Hamming-ball
trust region, benchmarked against standard BO, a genetic algorithm, random
search and a greedy constructor on a bundled AIG synthesis environment.
"""

__version__ = "0.1.0"
