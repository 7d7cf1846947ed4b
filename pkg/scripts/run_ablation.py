"""Top-N for the full pipeline and each single-component ablation, with the simulated model."""
from faultloc.agents import ABLATIONS
from sweep import run

if __name__ == "__main__":
    run(ABLATIONS, __doc__)
