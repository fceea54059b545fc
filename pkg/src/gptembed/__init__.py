"""Generalized probabilistic theories: embeddings, simulations and nonembeddability bounds."""
from .errors import GptError
from .gpt import Gpt

__version__ = "0.1.0"

__all__ = ["Gpt", "GptError", "__version__"]
