'''
@File    :  trainer.py
@Desc    :  Loss, gradients, Adam updates and the (transfer-)training loop of the surrogate.
'''

import copy
import time
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from .._logging import get_logger
from ..mesh import BoundarySpec
from .features import build_pairs
from .networks import SurrogateModel

logger = get_logger(__name__)

LEARNING_RATE = 1e-3
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


@dataclass
class TrainResult:
    """ Outcome of one `train` call.

    `best_state` is the state dict with the lowest validation loss, already
    loaded into the model when `train` returns.
    """
    epochs: int
    n_pairs: int
    best_epoch: int
    best_val_loss: float
    elapsed: float
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_state: dict = None


def combined_loss(pred, target):
    """ Sum of per-variable mean squared errors, equal weights. """
    return sum(F.mse_loss(pred[:, v], target[:, v]) for v in range(target.shape[1]))


def _as_batch(batch):
    features, targets = batch
    return torch.as_tensor(features, dtype=torch.float64), torch.as_tensor(targets, dtype=torch.float64)


def loss_and_grads(model: SurrogateModel, batch, train_mode=True):
    """ Loss of a batch and its gradient with respect to every parameter.

    Args:
        model (SurrogateModel): Model to differentiate.
        batch (tuple): (features (n, V*S), normalized derivative targets (n, V)).
        train_mode (bool): Use batch statistics and dropout.

    Returns:
        loss (float): Combined loss.
        grads (dict[str, torch.Tensor]): Gradient per named parameter; frozen
                                         parameters report exact zeros.
    """
    features, targets = _as_batch(batch)
    model.train(train_mode)
    model.zero_grad(set_to_none=True)
    loss = combined_loss(model(features), targets)
    loss.backward()
    grads = {}
    for name, p in model.named_parameters():
        grads[name] = p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p)
    return float(loss.detach()), grads


def make_optimizer(model: SurrogateModel, lr=LEARNING_RATE) -> torch.optim.Adam:
    """ Adam over the trainable parameters of the model. """
    params = [p for p in model.parameters() if p.requires_grad]
    return torch.optim.Adam(params, lr=lr, betas=ADAM_BETAS, eps=ADAM_EPS)


def adam_step(optimizer: torch.optim.Optimizer, model: SurrogateModel, grads) -> None:
    """ Apply one Adam update with externally computed gradients. """
    for name, p in model.named_parameters():
        if p.requires_grad:
            p.grad = grads[name].clone()
    optimizer.step()


def _evaluate(model, features, targets) -> float:
    model.eval()
    with torch.no_grad():
        return float(combined_loss(model(features), targets))


def train(model: SurrogateModel, snapshots, boundary: BoundarySpec, epochs, freeze_first=False,
          lr=LEARNING_RATE, batch_size=None, seed=0) -> TrainResult:
    """ Fit the model to consecutive snapshot pairs and keep the best validation state.

    Pairs (k -> k+1) are built from the snapshots; the last pair is also the
    validation set. Epochs are full-batch unless `batch_size` is set.

    Args:
        model (SurrogateModel): Model to train in place.
        snapshots (list[FieldState]): At least two states with consecutive times.
        boundary (BoundarySpec): Wall conditions for the stencil padding.
        epochs (int): Number of passes; 0 leaves the model unchanged.
        freeze_first (bool): Keep the first affine map of every sub-network fixed.
        lr (float): Adam learning rate.
        batch_size (int, optional): Mini-batch size in cells.
        seed (int): Seed of the mini-batch shuffling.

    Returns:
        TrainResult: Loss history, best epoch and wall time.
    """
    assert len(snapshots) >= 2, f'training needs at least 2 snapshots, got {len(snapshots)}'
    assert epochs >= 0, f'epochs must be nonnegative, got {epochs}'
    tic = time.perf_counter()

    pairs = build_pairs(snapshots, boundary, model.stats)
    features = torch.from_numpy(np.concatenate([f for f, _ in pairs]))
    targets = torch.from_numpy(np.concatenate([t for _, t in pairs]))
    val_features, val_targets = (torch.from_numpy(a) for a in pairs[-1])

    model.freeze_first(freeze_first)
    optimizer = make_optimizer(model, lr) if epochs > 0 else None
    generator = torch.Generator().manual_seed(seed)

    result = TrainResult(epochs=epochs, n_pairs=len(pairs), best_epoch=0,
                         best_val_loss=_evaluate(model, val_features, val_targets), elapsed=0.0)
    best_state = copy.deepcopy(model.state_dict())

    for epoch in range(1, epochs + 1):
        model.train()
        if batch_size is None:
            batches = [torch.arange(features.shape[0])]
        else:
            order = torch.randperm(features.shape[0], generator=generator)
            batches = [b for b in torch.split(order, batch_size) if b.numel() > 1]
        running = 0.0
        for idx in batches:
            optimizer.zero_grad(set_to_none=True)
            loss = combined_loss(model(features[idx]), targets[idx])
            loss.backward()
            optimizer.step()
            running += float(loss.detach()) * idx.numel()
        result.train_loss.append(running / features.shape[0])

        val = _evaluate(model, val_features, val_targets)
        result.val_loss.append(val)
        if val < result.best_val_loss:
            result.best_val_loss = val
            result.best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
        logger.debug(f'epoch {epoch}/{epochs}: train {result.train_loss[-1]:.4e}, val {val:.4e}')

    model.load_state_dict(best_state)
    model.freeze_first(False)
    model.eval()
    result.best_state = best_state
    result.elapsed = time.perf_counter() - tic
    logger.info(f'trained {epochs} epochs on {len(pairs)} pairs in {result.elapsed:.2f} s, '
                f'best val loss {result.best_val_loss:.4e} (epoch {result.best_epoch})')
    return result
