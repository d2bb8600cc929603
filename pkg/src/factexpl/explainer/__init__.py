from .inputs import InputSequence, build_input
from .model import GenerationConfig, TrainedExplainer, generate, load_explainer, train

__all__ = [
    "InputSequence",
    "build_input",
    "GenerationConfig",
    "TrainedExplainer",
    "generate",
    "load_explainer",
    "train",
]
