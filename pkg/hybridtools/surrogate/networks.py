'''
@File    :  networks.py
@Desc    :  Per-variable sub-networks of the surrogate (dense FVMN and spectral FVFNO)
            and the SurrogateModel that bundles one sub-network per variable with its
            normalization bounds.
'''

import numpy as np
import torch
import torch.nn as nn

from ..exceptions import SurrogateDivergenceError
from ..fvm import face_flux
from ..mesh import BoundarySpec, FieldState, StructuredGrid
from .features import NormStats, build_stencil_features, stencil_size, variable_names

DENSE, SPECTRAL = 'FVMN', 'FVFNO'
MODEL_KINDS = (DENSE, SPECTRAL)

ACTIVATIONS = {
    'relu': nn.ReLU,
    'gelu': nn.GELU,
    'tanh': nn.Tanh,
    'identity': nn.Identity,
}


class DenseSubNetwork(nn.Module):
    """ Fully connected sub-network: (affine, batch norm, ReLU) per hidden layer,
    dropout after the last hidden layer and a scalar affine output.

    Args:
        in_features (int): Length of the stencil feature vector.
        hidden (int): Hidden width.
        n_hidden (int): Number of hidden layers.
        dropout (float): Dropout rate after the last hidden layer.
        batch_norm (bool): Insert batch norm after each hidden affine map.
    """

    def __init__(self, in_features, hidden=398, n_hidden=3, dropout=0.2, batch_norm=True):
        super().__init__()
        layers = []
        width = in_features
        for _ in range(n_hidden):
            layers.append(nn.Linear(width, hidden))
            if batch_norm:
                layers.append(nn.BatchNorm1d(hidden, momentum=0.1))
            layers.append(nn.ReLU())
            width = hidden
        layers.append(nn.Dropout(dropout))
        self.body = nn.Sequential(*layers)
        self.head = nn.Linear(width, 1)

    @property
    def first_layer(self) -> nn.Module:
        return self.body[0]

    def forward(self, x):
        return self.head(self.body(x)).squeeze(-1)


class SpectralConv1d(nn.Module):
    """ Fourier layer kernel along the feature axis.

    The lowest `modes` coefficients of the real DFT are mixed across channels by
    a complex weight, every higher mode is zeroed.

    Args:
        width (int): Channel count (in = out).
        modes (int): Retained modes, at most n // 2 + 1.
    """

    def __init__(self, width, modes):
        super().__init__()
        self.width = width
        self.modes = modes
        scale = 1.0 / (width * width)
        self.weight = nn.Parameter(scale * torch.rand(width, width, modes, 2))

    def forward(self, h):
        n = h.shape[-1]
        h_ft = torch.fft.rfft(h, dim=-1)
        out_ft = torch.zeros(h.shape[0], self.width, n // 2 + 1, dtype=h_ft.dtype, device=h.device)
        m = self.modes
        out_ft[..., :m] = torch.einsum('bim,iom->bom', h_ft[..., :m], torch.view_as_complex(self.weight))
        return torch.fft.irfft(out_ft, n=n, dim=-1)


class FourierLayer(nn.Module):
    """ sigma(K h + W h), optionally followed by batch norm. """

    def __init__(self, width, modes, activation='relu', batch_norm=True):
        super().__init__()
        self.spectral = SpectralConv1d(width, modes)
        self.pointwise = nn.Conv1d(width, width, 1)
        self.activation = ACTIVATIONS[activation]()
        self.norm = nn.BatchNorm1d(width, momentum=0.1) if batch_norm else nn.Identity()

    def forward(self, h):
        return self.norm(self.activation(self.spectral(h) + self.pointwise(h)))


class SpectralSubNetwork(nn.Module):
    """ Fourier neural operator over the stencil feature axis.

    Each scalar feature is lifted to `width` channels, passed through the Fourier
    layers, flattened and projected to one scalar.

    Args:
        in_features (int): Length of the stencil feature vector.
        width (int): Lifted channel count.
        modes (int): Retained Fourier modes per layer (clamped to in_features // 2 + 1).
        n_layers (int): Number of Fourier layers.
        activation (str): One of `ACTIVATIONS`.
        dropout (float): Dropout rate before the projection.
        batch_norm (bool): Batch norm after every Fourier layer.
    """

    def __init__(self, in_features, width=64, modes=12, n_layers=3, activation='relu',
                 dropout=0.2, batch_norm=True):
        super().__init__()
        self.in_features = in_features
        self.width = width
        self.modes = min(modes, in_features // 2 + 1)
        self.lift = nn.Linear(1, width)
        self.layers = nn.ModuleList(
            [FourierLayer(width, self.modes, activation, batch_norm) for _ in range(n_layers)])
        self.dropout = nn.Dropout(dropout)
        self.project = nn.Linear(width * in_features, 1)

    @property
    def first_layer(self) -> nn.Module:
        return self.lift

    def forward(self, x):
        h = self.lift(x.unsqueeze(-1)).transpose(1, 2)      # (b, w, i)
        for layer in self.layers:
            h = layer(h)
        return self.project(self.dropout(h.flatten(1))).squeeze(-1)


def build_subnetwork(kind, in_features, **options) -> nn.Module:
    if kind == DENSE:
        return DenseSubNetwork(in_features, **options)
    if kind == SPECTRAL:
        return SpectralSubNetwork(in_features, **options)
    raise NotImplementedError(f"model kind '{kind}' is not supported, expected one of {MODEL_KINDS}")


class SurrogateModel(nn.Module):
    """ One sub-network per transported variable plus the normalization bounds.

    Args:
        kind (str): 'FVMN' or 'FVFNO'.
        ndim (int): Number of physical axes.
        stats (NormStats): Normalization bounds fitted on the initial snapshots.
        seed (int): Seed of the parameter initialization.
        **options: Forwarded to the sub-network constructor.
    """

    def __init__(self, kind, ndim, stats: NormStats, seed=0, **options):
        super().__init__()
        assert kind in MODEL_KINDS, f"unknown model kind '{kind}'"
        self.kind = kind
        self.ndim = ndim
        self.names = variable_names(ndim)
        assert tuple(stats.names) == self.names, f'norm stats {stats.names} do not match {self.names}'
        self.stats = stats
        self.options = dict(options)
        self.in_features = len(self.names) * stencil_size(ndim)
        torch.manual_seed(seed)
        self.subnets = nn.ModuleDict(
            {name: build_subnetwork(kind, self.in_features, **options) for name in self.names})
        self.double()

    def forward(self, features):
        return torch.stack([self.subnets[name](features) for name in self.names], dim=1)

    def first_layers(self) -> list:
        return [net.first_layer for net in self.subnets.values()]

    def freeze_first(self, frozen=True):
        """ Freeze (or release) the first affine map of every sub-network. """
        for layer in self.first_layers():
            for p in layer.parameters():
                p.requires_grad_(not frozen)


def dense_forward(net: DenseSubNetwork, features, train_mode=False):
    """ Evaluate a dense sub-network; inference uses running statistics and no dropout. """
    net.train(train_mode)
    with torch.set_grad_enabled(train_mode):
        return net(torch.as_tensor(features, dtype=torch.float64))


def spectral_forward(net: SpectralSubNetwork, features, train_mode=False):
    net.train(train_mode)
    with torch.set_grad_enabled(train_mode):
        return net(torch.as_tensor(features, dtype=torch.float64))


def predict_next_state(model: SurrogateModel, state: FieldState, grid: StructuredGrid,
                       boundary: BoundarySpec) -> FieldState:
    """ Advance a state by one surrogate step, Z(t+1) = Z(t) + dZ.

    Pressure and density are carried over unchanged; the face flux is the
    interpolation of the predicted velocity.

    Raises:
        SurrogateDivergenceError: The network returned a non-finite value.
    """
    features = build_stencil_features(state, boundary, model.stats)
    model.eval()
    with torch.no_grad():
        delta = model(torch.from_numpy(features)).numpy()
    if not np.all(np.isfinite(delta)):
        raise SurrogateDivergenceError(f'non-finite surrogate output at step {state.step + 1}')

    nxt = state.copy()
    for v, name in enumerate(model.names):
        change = delta[:, v].reshape(grid.shape) * model.stats.scale[v]
        if name == 'T':
            nxt.T = state.T + change
        else:
            nxt.u[v] = state.u[v] + change
    nxt.phi = face_flux(grid, nxt.u)
    nxt.time = state.time + state.dt
    nxt.step = state.step + 1
    return nxt
