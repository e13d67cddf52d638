"""Learned cross-view adapter: conditional-GAN trainer and bridge server."""

from .dataset import PairedViewDataset, build_dataset
from .train import TrainConfig, TrainResult, adapt_patch, load_checkpoint, save_checkpoint, train

__version__ = "0.1.0"
