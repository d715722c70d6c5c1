from .layers import (Conv2D, Deconv2D, MaxPool2x2, ReLU, concat_channels,
                     softmax, softmax_xent)
from .network import (Network, NetworkConfig, TrainConfig, build_network,
                      load_model, save_model)
from .train import patches_to_arrays, train, write_cost_history

__all__ = [
    "Conv2D", "Deconv2D", "MaxPool2x2", "ReLU", "concat_channels",
    "softmax", "softmax_xent",
    "Network", "NetworkConfig", "TrainConfig", "build_network",
    "load_model", "save_model",
    "patches_to_arrays", "train", "write_cost_history",
]
