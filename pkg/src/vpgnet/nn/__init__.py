from .layers import Conv2D, Dense, Dropout, Flatten, MaxPool2D, Model, build_layer
from .optim import Adam, AdamConfig
from .gradcheck import gradient_check
from .checkpoint import load_model, save_model
from .kernels import BACKEND

__all__ = [
    "Adam",
    "AdamConfig",
    "BACKEND",
    "Conv2D",
    "Dense",
    "Dropout",
    "Flatten",
    "MaxPool2D",
    "Model",
    "build_layer",
    "gradient_check",
    "load_model",
    "save_model",
]
