"""FLOPs-aware multi-objective architecture search for hybrid quantum-classical networks."""

__version__ = "0.1.0"

from .search_space import (Embedding, Entangler, Genome, Rotation, Topology, enumerate_space,
                           pointwise_mutate, sample_genome, uniform_crossover)
from .qsim import CircuitSpec, circuit_gradients, run_circuit
from .flops import FlopsReport, measure
from .hybrid import HybridModel, TrainConfig, build_model, forward, train_and_evaluate
from .evolution import (Individual, ObjectiveVector, SearchConfig, SearchResult, compromise_point,
                        crowding_distance, dominates, fast_non_dominated_sort, run_search)
from .datasets import DatasetSplit, load, stratified_split
