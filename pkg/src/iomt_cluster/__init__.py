"""Energy-aware cluster-head selection for body-area / IoMT sensor networks."""

from .kernels import BACKEND
from .config import SimulationConfig, load_config, preset
from .network import NetworkConfig, RadioEnergyModel, deploy
from .objectives import FitnessWeights, evaluate_pool
from .cso import SwarmConfig, optimize
from .baselines import PsoConfig, pso_optimize
from .simulation import run, run_round

__version__ = "0.1.0"
