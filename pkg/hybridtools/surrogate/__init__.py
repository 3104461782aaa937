from .features import (NormStats, build_pairs, build_stencil_features, derivative_targets,
                       fit_norm_stats, stencil_offsets, stencil_size, variable_names)
from .networks import (DENSE, SPECTRAL, MODEL_KINDS, DenseSubNetwork, FourierLayer, SpectralConv1d,
                       SpectralSubNetwork, SurrogateModel, build_subnetwork, dense_forward,
                       predict_next_state, spectral_forward)
from .trainer import TrainResult, adam_step, combined_loss, loss_and_grads, make_optimizer, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    'NormStats', 'build_pairs', 'build_stencil_features', 'derivative_targets', 'fit_norm_stats',
    'stencil_offsets', 'stencil_size', 'variable_names',
    'DENSE', 'SPECTRAL', 'MODEL_KINDS', 'DenseSubNetwork', 'FourierLayer', 'SpectralConv1d',
    'SpectralSubNetwork', 'SurrogateModel', 'build_subnetwork', 'dense_forward',
    'predict_next_state', 'spectral_forward',
    'TrainResult', 'adam_step', 'combined_loss', 'loss_and_grads', 'make_optimizer', 'train',
    'load_checkpoint', 'save_checkpoint',
]
