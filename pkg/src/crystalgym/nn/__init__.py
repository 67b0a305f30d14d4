from . import autograd
from .autograd import Tensor, no_grad
from .checkpoint import load_checkpoint, require_config, save_checkpoint
from .megnet import (GraphBatch, MegnetConfig, copy_params, forward,
                     init_params, zero_grads)
from .optim import Adam

__all__ = ["autograd", "Tensor", "no_grad", "Adam", "GraphBatch", "MegnetConfig",
           "copy_params", "forward", "init_params", "zero_grads",
           "save_checkpoint", "load_checkpoint", "require_config"]
