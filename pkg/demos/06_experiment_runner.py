"""
Config-driven sweeps
====================

The same runner sits behind the ``kloostlab`` command.  A sweep is a list of
experiments; rows come back in grid order whatever the thread count.
"""

from kloostlab.experiments import ExperimentConfig, emit, plotdata, run

cfg = ExperimentConfig.from_toml("""
kind = "sweep"
seed = 7

[[experiments]]
kind = "long-sum"
primes = [101, 1009, 10007, 100003]
N = [5000]
psi = "random:3:7"
kappa = 0.8

[[experiments]]
kind = "constants"
epsilon = 0.1
kappa = 0.8
""")

rows = run(cfg, threads=4)
print(emit(rows[-1:], "csv"))

# |S|/N against p, ready for a log-log plot elsewhere
for p, ratio in plotdata(rows[:-1], "p", "ratio"):
    print(f"{p:7d}  {ratio:.4f}")
