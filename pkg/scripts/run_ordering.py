"""Top-N under each method ordering used before division, with the simulated model."""
from faultloc.agents import ORDERINGS
from sweep import run

if __name__ == "__main__":
    run(ORDERINGS, __doc__)
