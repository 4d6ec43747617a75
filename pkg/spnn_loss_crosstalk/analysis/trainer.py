# coding=utf-8
# Copyright 2026 The spnn_loss_crosstalk Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Desk-scale reference trainer for complex-valued photonic networks.

The ideal model is M square complex layers y = W·x with the activation

  f(z) = z · max(0, 1 − b / |z|)

between layers (phase preserving, magnitude thresholded). The readout is the
optical power |y_k|^2 of the first `n_classes` output ports and the loss is
the cross entropy of log-powers. Training runs in float64 with Adam.
"""

from __future__ import absolute_import
from __future__ import division

import collections
import time

from absl import logging
import gin
import numpy as np
import torch
from torch.nn import functional as F
from torch.utils.tensorboard import SummaryWriter

from spnn_loss_crosstalk import numerics


ACTIVATIONS = ('threshold', 'identity')

_EPS = 1e-12

TrainedModel = collections.namedtuple(
    'TrainedModel', ['weights', 'biases', 'activation', 'n_classes',
                     'loss_curve'])


class TrainingError(RuntimeError):
  """Raised when training diverges; carries the loss curve so far."""

  def __init__(self, message, loss_curve):
    super(TrainingError, self).__init__(message)
    self.loss_curve = list(loss_curve)


#-------------------------------------------------------------------------------
# Ideal numpy model
#-------------------------------------------------------------------------------


def activate(z, bias, activation='threshold'):
  """Applies the layer nonlinearity elementwise to complex fields."""
  if activation == 'identity':
    return z
  elif activation != 'threshold':
    raise ValueError('Expected valid activation, got {}'.format(activation))
  mag = np.abs(z)
  with np.errstate(divide='ignore', invalid='ignore'):
    scale = np.where(mag > 0.0, np.maximum(0.0, 1.0 - bias / mag), 0.0)
  return z * scale


def ideal_forward(model, features):
  """Lossless, crosstalk-free output fields.

  Args:
    model: `TrainedModel`.
    features: complex array (S, N).

  Returns:
    complex array (S, N).
  """
  y = np.asarray(features, dtype=np.complex128)
  last = len(model.weights) - 1
  for m, w in enumerate(model.weights):
    y = y @ np.asarray(w).T
    if m < last:
      y = activate(y, model.biases[m], model.activation)
  return y


def readout(model, outputs):
  """Class predictions from output fields of shape (S, N)."""
  return np.argmax(np.abs(outputs[:, :model.n_classes])**2, axis=1)


def accuracy_pct(correct, total):
  """Percentage of `correct` predictions out of `total`."""
  return 100.0 * int(correct) / int(total)


def ideal_accuracy(model, features, labels):
  """Accuracy in percent of the ideal model."""
  labels = np.asarray(labels)
  predictions = readout(model, ideal_forward(model, features))
  return accuracy_pct(np.sum(predictions == labels), labels.size)


def save_model(model, path):
  """Writes a `TrainedModel` to an .npz archive (weights as w0, w1, ...)."""
  arrays = {'w{}'.format(i): np.asarray(w, dtype=np.complex128)
            for i, w in enumerate(model.weights)}
  np.savez(path, biases=np.asarray(model.biases, dtype=np.float64),
           activation=np.array(model.activation),
           n_classes=np.array(model.n_classes),
           loss_curve=np.asarray(model.loss_curve, dtype=np.float64), **arrays)
  return path


def load_model(path):
  """Reads a model written by `save_model`."""
  with np.load(path, allow_pickle=False) as data:
    count = len([k for k in data.files if k.startswith('w')])
    if not count:
      raise ValueError('Expected weight arrays w0, w1, ... in {}'.format(path))
    weights = [data['w{}'.format(i)] for i in range(count)]
    return TrainedModel(weights, data['biases'], str(data['activation']),
                        int(data['n_classes']), list(data['loss_curve']))


#-------------------------------------------------------------------------------
# Torch model
#-------------------------------------------------------------------------------


class ReferenceNetwork(torch.nn.Module):
  """Complex network with real and imaginary parts stored separately."""

  def __init__(self, n, m, n_classes, bias=0.1, trainable_bias=False,
               activation='threshold', generator=None):
    """Initializes the weights with complex Gaussians of variance 1/N.

    Args:
      n: int, port count of every layer.
      m: int, number of layers.
      n_classes: int, ports read out for classification.
      bias: float, initial activation threshold b.
      trainable_bias: bool, learn b per layer.
      activation: str, one of `ACTIVATIONS`.
      generator: optional `torch.Generator` for the initialization.
    """
    super(ReferenceNetwork, self).__init__()
    if activation not in ACTIVATIONS:
      raise ValueError('Expected valid activation, got {}'.format(activation))
    if not 1 <= n_classes <= n:
      raise ValueError('Expected 1 <= n_classes <= {}, got {}'.format(
          n, n_classes))
    self.n = n
    self.n_classes = n_classes
    self.activation = activation
    scale = 1.0 / np.sqrt(2.0 * n)
    self.w_real = torch.nn.ParameterList()
    self.w_imag = torch.nn.ParameterList()
    for _ in range(m):
      self.w_real.append(torch.nn.Parameter(scale * torch.randn(
          n, n, generator=generator, dtype=torch.float64)))
      self.w_imag.append(torch.nn.Parameter(scale * torch.randn(
          n, n, generator=generator, dtype=torch.float64)))
    self.bias = torch.nn.Parameter(
        torch.full((max(m - 1, 0),), float(bias), dtype=torch.float64),
        requires_grad=trainable_bias)

  def forward(self, x_real, x_imag):
    last = len(self.w_real) - 1
    for m, (wr, wi) in enumerate(zip(self.w_real, self.w_imag)):
      y_real = x_real @ wr.t() - x_imag @ wi.t()
      y_imag = x_real @ wi.t() + x_imag @ wr.t()
      if m < last and self.activation == 'threshold':
        mag = torch.sqrt(y_real**2 + y_imag**2 + _EPS)
        scale = F.relu(1.0 - self.bias[m] / mag)
        y_real, y_imag = y_real * scale, y_imag * scale
      x_real, x_imag = y_real, y_imag
    return x_real, x_imag

  def logits(self, x_real, x_imag):
    y_real, y_imag = self(x_real, x_imag)
    power = y_real**2 + y_imag**2
    return torch.log(power[:, :self.n_classes] + _EPS)

  def export(self, loss_curve=()):
    weights = [(wr.detach().numpy() + 1j * wi.detach().numpy()).astype(
        np.complex128) for wr, wi in zip(self.w_real, self.w_imag)]
    return TrainedModel(weights, self.bias.detach().numpy().copy(),
                        self.activation, self.n_classes, list(loss_curve))


def _as_tensors(features, labels):
  features = np.asarray(features, dtype=np.complex128)
  return (torch.from_numpy(features.real.copy()),
          torch.from_numpy(features.imag.copy()),
          torch.from_numpy(np.asarray(labels, dtype=np.int64)))


def _loss(network, x_real, x_imag, y):
  return F.cross_entropy(network.logits(x_real, x_imag), y)


@gin.configurable
def train_reference(features,
                    labels,
                    m=2,
                    epochs=100,
                    seed=0,
                    n_classes=None,
                    learning_rate=0.01,
                    weight_decay=0.0,
                    batch_size=64,
                    bias=0.1,
                    trainable_bias=False,
                    activation='threshold',
                    log_every_n=10,
                    summary_dir=None):
  """Trains the ideal model with Adam.

  Args:
    features: complex array (S, N) of unit-norm feature vectors.
    labels: int array (S,) of class indices.
    m: int, number of layers.
    epochs: int, passes over the data; 0 returns the initialization.
    seed: int, seeds initialization and shuffling.
    n_classes: optional int, defaults to max(labels) + 1.
    learning_rate: float, Adam step size.
    weight_decay: float, Adam weight decay.
    batch_size: int, minibatch size.
    bias: float, activation threshold.
    trainable_bias: bool, learn the threshold per layer.
    activation: str, one of `ACTIVATIONS`.
    log_every_n: int, epochs between loss log lines.
    summary_dir: optional str, TensorBoard log directory for the loss curve.

  Returns:
    A `TrainedModel` whose weights are ready for `mesh.compile_layer`.

  Raises:
    TrainingError: if the loss becomes non-finite.
  """
  x_real, x_imag, y = _as_tensors(features, labels)
  n = x_real.shape[1]
  if n_classes is None:
    n_classes = int(y.max().item()) + 1
  generator = torch.Generator().manual_seed(int(seed))
  network = ReferenceNetwork(n, m, n_classes, bias=bias,
                             trainable_bias=trainable_bias,
                             activation=activation, generator=generator)
  optimizer = torch.optim.Adam(
      [p for p in network.parameters() if p.requires_grad],
      lr=learning_rate, weight_decay=weight_decay)
  logging.info('Training reference network: N=%d, M=%d, classes=%d, '
               'samples=%d, epochs=%d', n, m, n_classes, x_real.shape[0],
               epochs)

  writer = SummaryWriter(log_dir=summary_dir) if summary_dir else None
  loss_curve = []
  start_time = time.time()
  for epoch in range(epochs):
    order = torch.randperm(x_real.shape[0], generator=generator)
    total = 0.0
    for start in range(0, x_real.shape[0], batch_size):
      idx = order[start:start + batch_size]
      optimizer.zero_grad()
      loss = _loss(network, x_real[idx], x_imag[idx], y[idx])
      loss.backward()
      optimizer.step()
      total += loss.item() * idx.shape[0]
    epoch_loss = total / x_real.shape[0]
    loss_curve.append(epoch_loss)
    if not np.isfinite(epoch_loss):
      raise TrainingError('Training diverged at epoch {}'.format(epoch),
                          loss_curve)
    if writer is not None:
      writer.add_scalar('train/loss', epoch_loss, epoch)
    if log_every_n and epoch % log_every_n == 0:
      logging.info('Epoch %d: loss %.5f', epoch, epoch_loss)
  if writer is not None:
    writer.close()
  if len(loss_curve) > 1 and loss_curve[-1] >= loss_curve[0]:
    logging.warning('Training did not converge: loss %.5f -> %.5f',
                    loss_curve[0], loss_curve[-1])
  logging.info('Training took %d seconds', time.time() - start_time)
  return network.export(loss_curve)


def check_gradients(network, features, labels, n_coords=100, eps=1e-6,
                    rng=None):
  """Compares autograd with central finite differences.

  Args:
    network: `ReferenceNetwork`.
    features: complex array (S, N).
    labels: int array (S,).
    n_coords: int, number of random parameter coordinates to check.
    eps: float, finite-difference step.
    rng: optional `np.random.Generator` choosing the coordinates.

  Returns:
    The largest relative error over the checked coordinates.
  """
  rng = rng if rng is not None else numerics.make_rng(0)
  x_real, x_imag, y = _as_tensors(features, labels)
  params = [p for p in network.parameters() if p.requires_grad]
  network.zero_grad()
  _loss(network, x_real, x_imag, y).backward()
  analytic = torch.cat([p.grad.reshape(-1) for p in params]).numpy().copy()
  sizes = np.cumsum([0] + [p.numel() for p in params])
  coords = rng.choice(sizes[-1], size=min(n_coords, sizes[-1]), replace=False)

  worst = 0.0
  with torch.no_grad():
    for coord in coords:
      k = int(np.searchsorted(sizes, coord, side='right') - 1)
      flat = params[k].view(-1)
      offset = int(coord - sizes[k])
      original = flat[offset].item()
      flat[offset] = original + eps
      plus = _loss(network, x_real, x_imag, y).item()
      flat[offset] = original - eps
      minus = _loss(network, x_real, x_imag, y).item()
      flat[offset] = original
      numeric = (plus - minus) / (2.0 * eps)
      scale = max(abs(analytic[coord]), abs(numeric), 1e-5)
      worst = max(worst, abs(analytic[coord] - numeric) / scale)
  return worst
