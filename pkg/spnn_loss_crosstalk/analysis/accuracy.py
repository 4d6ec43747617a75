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
"""Inference accuracy of compiled networks under loss and crosstalk."""

from __future__ import absolute_import
from __future__ import division

import collections
import time

from absl import logging
import numpy as np

from spnn_loss_crosstalk import mesh
from spnn_loss_crosstalk import numerics
from spnn_loss_crosstalk import propagation
from spnn_loss_crosstalk.analysis import trainer


# (minimum, maximum) expected loss per MZI element, in dB.
EXPECTED_RANGES = collections.OrderedDict([
    ('alpha_l_db', (0.1, 0.4)),
    ('alpha_m_db', (0.1, 0.3)),
    ('alpha_p_l_db', (0.03, 0.12)),
])

SWEEP_AXES = collections.OrderedDict([
    ('alpha_L', 'alpha_l_db'),
    ('alpha_m', 'alpha_m_db'),
    ('alpha_prop', 'alpha_p_l_db'),
])

ALPHA_MODES = ('zero', 'minimum', 'average', 'worst')
LOC_MODES = ('minimum', 'zero')

AccuracyResult = collections.namedtuple(
    'AccuracyResult', ['accuracy_pct', 'config', 'n_samples'])

JointLossSample = collections.namedtuple(
    'JointLossSample', ['alpha_l_db', 'alpha_m_db', 'alpha_p_l_db',
                        'accuracy_pct'])

ToleranceResult = collections.namedtuple(
    'ToleranceResult', ['nominal_pct', 'axis_limits', 'frontier'])


def with_alphas(params, alpha_l_db=0.0, alpha_m_db=0.0, alpha_p_l_db=0.0):
  """Copy of `params` with the three loss terms replaced.

  `alpha_p_l_db` is the propagation loss of one MZI, alpha_p · l_MZI.
  """
  return params._replace(
      alpha_l_db=float(alpha_l_db),
      alpha_m_db=float(alpha_m_db)).with_propagation_loss_db(
          float(alpha_p_l_db)).validate()


def pinned_alphas(alpha_mode):
  """The three loss terms for a named operating point, as a dict."""
  if alpha_mode == 'zero':
    return {key: 0.0 for key in EXPECTED_RANGES}
  elif alpha_mode == 'minimum':
    return {key: lo for key, (lo, _) in EXPECTED_RANGES.items()}
  elif alpha_mode == 'average':
    return {key: 0.5 * (lo + hi) for key, (lo, hi) in EXPECTED_RANGES.items()}
  elif alpha_mode == 'worst':
    return {key: hi for key, (_, hi) in EXPECTED_RANGES.items()}
  else:
    raise ValueError('Expected alpha_mode in {}, got {}'.format(
        ALPHA_MODES, alpha_mode))


def _snapshot(params, crosstalk):
  config = params._asdict()
  config['alpha_p_l_db'] = params.propagation_loss_db
  config['crosstalk'] = bool(crosstalk)
  return config


class PhotonicClassifier(object):
  """A trained model compiled onto Clements layers.

  Every layer gets an OGU gain equal to its s_max, so that the lossless
  photonic forward pass reproduces W·x exactly; NAU loss is not applied. The
  crosstalk phases are resolved at every NAU, where the activation acts on
  the detected field.
  """

  def __init__(self, model, svd_method='lapack'):
    """Compiles every weight matrix of `model`.

    Args:
      model: `trainer.TrainedModel`.
      svd_method: str, see `numerics.svd`.
    """
    self._model = model
    self._layers = []
    for w in model.weights:
      layout = mesh.compile_layer(w, gain_db=0.0, nau_loss_db=0.0,
                                  svd_method=svd_method)
      self._layers.append(layout._replace(
          gain_db=float(20.0 * np.log10(layout.s_max))))
    logging.info('Compiled %d layers of %d ports', len(self._layers),
                 self._layers[0].n)

  @property
  def model(self):
    return self._model

  @property
  def layers(self):
    return list(self._layers)

  def ideal_accuracy(self, features, labels):
    return trainer.ideal_accuracy(self._model, features, labels)

  def evaluate(self, features, labels, params, crosstalk=False, rng=None,
               resample='frozen', crosstalk_model=None, chunk_size=500):
    """Accuracy of the photonic forward pass.

    Args:
      features: complex array (S, N).
      labels: int array (S,).
      params: `device.MziParams`.
      crosstalk: bool, inject first-order crosstalk.
      rng: `np.random.Generator`, required when `crosstalk` is True.
      resample: 'frozen' draws the crosstalk coefficients once per call,
        'per_call' redraws them for every chunk.
      crosstalk_model: optional `propagation.CrosstalkModel`.
      chunk_size: int, samples propagated together.

    Returns:
      An `AccuracyResult`.
    """
    features = np.asarray(features, dtype=np.complex128)
    labels = np.asarray(labels)
    if features.shape[0] == 0:
      raise ValueError('Expected a non-empty dataset.')
    if crosstalk and rng is None:
      raise ValueError('Crosstalk evaluation needs an rng.')
    if resample not in propagation.RESAMPLE_MODES:
      raise ValueError('Expected resample in {}, got {}'.format(
          propagation.RESAMPLE_MODES, resample))

    frozen = None
    if crosstalk and resample == 'frozen':
      frozen = [propagation.draw_crosstalk(layout, params, rng)
                for layout in self._layers]
    correct = 0
    for start in range(0, features.shape[0], chunk_size):
      x = features[start:start + chunk_size].T
      if not crosstalk:
        draws = [np.full(layout.mzi_count, -np.inf) for layout in self._layers]
      elif frozen is not None:
        draws = frozen
      else:
        draws = [propagation.draw_crosstalk(layout, params, rng)
                 for layout in self._layers]
      y = self._forward(x, params, draws, rng, crosstalk_model)
      predictions = trainer.readout(self._model, y.T)
      correct += int(np.sum(predictions == labels[start:start + chunk_size]))
    return AccuracyResult(trainer.accuracy_pct(correct, features.shape[0]),
                          _snapshot(params, crosstalk), features.shape[0])

  def _forward(self, x, params, draws, rng, crosstalk_model):
    last = len(self._layers) - 1
    for m, layout in enumerate(self._layers):
      result = propagation.layer_metrics(
          layout, params, x, resample='frozen', x_db=draws[m],
          model=crosstalk_model, layer_index=m)
      x = result.signal
      if result.crosstalk.count:
        x = propagation.resolve_interference(x, result.crosstalk, rng)
      if m < last:
        x = trainer.activate(x, self._model.biases[m], self._model.activation)
    return x


def accuracy_eval(classifier, features, labels, params, crosstalk=False,
                  rng=None, resample='frozen', crosstalk_model=None):
  """Accuracy of `classifier` on a dataset; see `PhotonicClassifier`."""
  return classifier.evaluate(features, labels, params, crosstalk, rng,
                             resample, crosstalk_model)


def loss_sweep(classifier, features, labels, which, grid, base_params):
  """Accuracy along one loss axis with the others pinned at 0 dB.

  Args:
    classifier: `PhotonicClassifier`.
    features: complex array (S, N).
    labels: int array (S,).
    which: one of `SWEEP_AXES` ('alpha_L', 'alpha_m', 'alpha_prop').
    grid: iterable of loss values in dB (alpha_prop is per MZI).
    base_params: `device.MziParams` providing couplers and geometry.

  Returns:
    A list of `AccuracyResult`, one per grid value, crosstalk off.
  """
  if which not in SWEEP_AXES:
    raise ValueError('Expected which in {}, got {}'.format(
        list(SWEEP_AXES), which))
  results = []
  for value in grid:
    alphas = pinned_alphas('zero')
    alphas[SWEEP_AXES[which]] = value
    params = with_alphas(base_params, **alphas)
    results.append(classifier.evaluate(features, labels, params))
    logging.info('%s = %.4g dB: accuracy %.2f%%', which, value,
                 results[-1].accuracy_pct)
  return results


def _half_normal_alphas(rng, loc_mode, sigma_scale=1.0):
  if loc_mode not in LOC_MODES:
    raise ValueError('Expected loc_mode in {}, got {}'.format(LOC_MODES,
                                                              loc_mode))
  alphas = {}
  for key, (lo, hi) in EXPECTED_RANGES.items():
    loc = lo if loc_mode == 'minimum' else 0.0
    alphas[key] = float(numerics.sample(rng, numerics.HalfNormal(
        loc, sigma_scale * hi / 3.0)))
  return alphas


def joint_loss_sample(classifier, features, labels, n_instances, rng,
                      base_params, loc_mode='minimum', sigma_scale=1.0):
  """Accuracy over jointly sampled loss instances.

  Each instance draws the three losses from half-normals located at their
  minimum expected value (or at zero) with 3·sigma equal to the maximum
  expected value.

  Args:
    classifier: `PhotonicClassifier`.
    features: complex array (S, N).
    labels: int array (S,).
    n_instances: int >= 1.
    rng: `np.random.Generator`.
    base_params: `device.MziParams`.
    loc_mode: 'minimum' or 'zero'.
    sigma_scale: float, multiplies every sigma; 0 makes all instances equal.

  Returns:
    A list of `JointLossSample`.
  """
  if n_instances < 1:
    raise ValueError('Expected n_instances >= 1, got {}'.format(n_instances))
  samples = []
  start_time = time.time()
  for _ in range(n_instances):
    alphas = _half_normal_alphas(rng, loc_mode, sigma_scale)
    result = classifier.evaluate(features, labels,
                                 with_alphas(base_params, **alphas))
    samples.append(JointLossSample(alphas['alpha_l_db'], alphas['alpha_m_db'],
                                   alphas['alpha_p_l_db'],
                                   result.accuracy_pct))
  logging.info('Evaluated %d joint loss instances in %d seconds', n_instances,
               time.time() - start_time)
  return samples


def _dominates(a, b):
  return (a.alpha_l_db >= b.alpha_l_db and a.alpha_m_db >= b.alpha_m_db and
          a.alpha_p_l_db >= b.alpha_p_l_db and a != b)


def pareto_frontier(samples):
  """Samples not dominated on all three loss axes by another sample."""
  return [s for s in samples if not any(_dominates(o, s) for o in samples)]


def tolerance_search(classifier, features, labels, max_drop_pct, rng,
                     base_params, box=None, iterations=12,
                     joint_instances=200, loc_mode='zero'):
  """Largest losses that keep the accuracy drop within `max_drop_pct`.

  Each axis is bisected up to its box maximum with the other losses at 0 dB.
  Jointly sampled instances (half-normal, see `joint_loss_sample`) that
  stay within the bound form the frontier.

  Args:
    classifier: `PhotonicClassifier`.
    features: complex array (S, N).
    labels: int array (S,).
    max_drop_pct: float >= 0, allowed drop in percentage points.
    rng: `np.random.Generator` for the joint samples.
    base_params: `device.MziParams`.
    box: optional dict of per-axis maxima, defaults to the expected maxima.
    iterations: int, bisection steps per axis.
    joint_instances: int, joint samples filtered for the frontier.
    loc_mode: 'zero' or 'minimum' for the joint samples.

  Returns:
    A `ToleranceResult`; `axis_limits` maps each axis to its tolerable
    maximum, `frontier` holds the Pareto-maximal passing joint samples.
  """
  if max_drop_pct < 0:
    raise ValueError('Expected max_drop_pct >= 0, got {}'.format(max_drop_pct))
  box = box or {key: hi for key, (_, hi) in EXPECTED_RANGES.items()}
  nominal = classifier.evaluate(
      features, labels, with_alphas(base_params)).accuracy_pct
  floor = nominal - max_drop_pct

  def passes(alphas):
    accuracy = classifier.evaluate(
        features, labels, with_alphas(base_params, **alphas)).accuracy_pct
    return accuracy >= floor, accuracy

  limits = collections.OrderedDict()
  for key in EXPECTED_RANGES:
    hi = float(box[key])
    if passes({key: hi})[0]:
      limits[key] = hi
      continue
    lo = 0.0
    for _ in range(iterations):
      mid = 0.5 * (lo + hi)
      if passes({key: mid})[0]:
        lo = mid
      else:
        hi = mid
    limits[key] = lo
    logging.info('Tolerable %s: %.4g dB', key, lo)

  passing = []
  for _ in range(joint_instances):
    alphas = _half_normal_alphas(rng, loc_mode)
    alphas = {key: min(value, float(box[key])) for key, value in alphas.items()}
    ok, accuracy = passes(alphas)
    if ok:
      passing.append(JointLossSample(alphas['alpha_l_db'],
                                     alphas['alpha_m_db'],
                                     alphas['alpha_p_l_db'], accuracy))
  return ToleranceResult(nominal, limits, pareto_frontier(passing))


def crosstalk_grid(classifier, features, labels, xb_grid, xc_grid, rng,
                   base_params, alpha_mode='minimum', resample='frozen'):
  """Accuracy over a grid of bar/cross crosstalk coefficients.

  Args:
    classifier: `PhotonicClassifier`.
    features: complex array (S, N).
    labels: int array (S,).
    xb_grid: iterable of X_B values in dB (rows).
    xc_grid: iterable of X_C values in dB (columns).
    rng: `np.random.Generator`; every cell runs on its own spawned stream.
    base_params: `device.MziParams`.
    alpha_mode: one of `ALPHA_MODES`, the losses pinned during the grid.
    resample: 'frozen' or 'per_call'.

  Returns:
    float64 array (len(xb_grid), len(xc_grid)); cells with X_B > X_C are NaN.
  """
  xb_grid = [float(v) for v in xb_grid]
  xc_grid = [float(v) for v in xc_grid]
  params = with_alphas(base_params, **pinned_alphas(alpha_mode))
  streams = numerics.spawn_rngs(numerics.derive_seed(rng),
                                len(xb_grid) * len(xc_grid))
  grid = np.full((len(xb_grid), len(xc_grid)), np.nan)
  for i, xb in enumerate(xb_grid):
    for j, xc in enumerate(xc_grid):
      if xb > xc or xc > 0.0:
        continue
      cell = params._replace(xb_db=xb, xc_db=xc).validate()
      grid[i, j] = classifier.evaluate(
          features, labels, cell, crosstalk=True,
          rng=streams[i * len(xc_grid) + j], resample=resample).accuracy_pct
      logging.info('X_B=%.1f dB, X_C=%.1f dB: accuracy %.2f%%', xb, xc,
                   grid[i, j])
  return grid
