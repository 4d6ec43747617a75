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
"""Field propagation through compiled layers and cascaded networks.

Fields are complex amplitudes in sqrt(mW): |x_i|^2 is the power on waveguide
i in mW. Batched fields have shape (N, B), one column per input vector.

Crosstalk is tracked to first order. Every MZI splits its routed field into a
signal part that continues through the mesh and a leak part (rows swapped)
that is carried to the layer outputs by the remaining lossy mesh without
leaking again. Leaks are stored as `CrosstalkComponents`: one output field
pattern per source MZI, whose phase relative to the signal is unresolved
until an interference model assigns one.
"""

from __future__ import absolute_import
from __future__ import division

import collections

from absl import logging
import gin
import numpy as np

from spnn_loss_crosstalk import device
from spnn_loss_crosstalk import mesh
from spnn_loss_crosstalk import numerics


# Leaked fields never leak again.
CROSSTALK_ORDER = 1

RESAMPLE_MODES = ('per_call', 'frozen')
LEAK_REFERENCES = ('local', 'launch')
PERCENTILES = (5.0, 25.0, 50.0, 75.0, 95.0)

# Ports with less ideal power than this fraction of the port mean are dark.
DARK_PORT_FRACTION = 1e-12

# Upper bound on complex entries materialized per Monte-Carlo chunk.
_MC_CHUNK_ELEMENTS = 1 << 21


class CrosstalkModel(collections.namedtuple(
    'CrosstalkModel', ['amplitude_model', 'leak_reference',
                       'suppress_diagonal_crosstalk'])):
  """Knobs of the crosstalk injection, see `make_crosstalk_model`."""

  __slots__ = ()

  def validate(self):
    if self.amplitude_model not in device.AMPLITUDE_MODELS:
      raise ValueError('Expected amplitude_model in {}, got {}'.format(
          device.AMPLITUDE_MODELS, self.amplitude_model))
    if self.leak_reference not in LEAK_REFERENCES:
      raise ValueError('Expected leak_reference in {}, got {}'.format(
          LEAK_REFERENCES, self.leak_reference))
    return self


@gin.configurable
def make_crosstalk_model(amplitude_model='power',
                         leak_reference='local',
                         suppress_diagonal_crosstalk=True):
  """Creates the crosstalk injection model.

  Args:
    amplitude_model: str, 'power' splits fields by sqrt(1 - X) and sqrt(X);
      'literal' by (1 - X) and X.
    leak_reference: str, 'local' seeds each leak from the lossy field that
      actually reaches the MZI; 'launch' seeds it from the lossless field, so
      only the loss downstream of the MZI applies to the leak.
    suppress_diagonal_crosstalk: bool, the attenuators of the Σ stage have one
      port terminated and do not leak when True.

  Returns:
    A `CrosstalkModel`.
  """
  return CrosstalkModel(amplitude_model, leak_reference,
                        bool(suppress_diagonal_crosstalk)).validate()


CrosstalkComponent = collections.namedtuple(
    'CrosstalkComponent', ['source', 'amplitude', 'port', 'rho'])


class CrosstalkComponents(collections.namedtuple(
    'CrosstalkComponents', ['sources', 'fields'])):
  """Leaked fields at a measurement point.

  Attributes:
    sources: int array (K, 2) of (layer index, placement index in the layer).
    fields: complex array (K, N, B), the field each source delivers to every
      output port for every input of the batch.
  """

  __slots__ = ()

  @classmethod
  def empty(cls, n, batch):
    return cls(np.zeros((0, 2), dtype=np.int64),
               np.zeros((0, n, batch), dtype=np.complex128))

  @property
  def count(self):
    return self.fields.shape[0]

  def incoherent_power(self):
    """Phase-averaged crosstalk power per port, shape (N, B), in mW."""
    return np.sum(np.abs(self.fields)**2, axis=0)

  def scaled(self, factor):
    return CrosstalkComponents(self.sources, self.fields * factor)

  def transformed(self, matrix):
    """Carries every component through an N x N transfer matrix."""
    return CrosstalkComponents(
        self.sources, np.einsum('nm,kmb->knb', matrix, self.fields))

  def concatenate(self, other):
    return CrosstalkComponents(
        np.concatenate([self.sources, other.sources], axis=0),
        np.concatenate([self.fields, other.fields], axis=0))

  def sample(self, b=0):
    """Amplitude matrix (K, N) of batch entry `b`."""
    return self.fields[:, :, b]

  def to_list(self, b=0):
    """One `CrosstalkComponent` per (source, reachable port) of entry `b`."""
    out = []
    amplitudes = np.abs(self.fields[:, :, b])
    for k, port in zip(*np.nonzero(amplitudes)):
      out.append(CrosstalkComponent((int(self.sources[k, 0]),
                                     int(self.sources[k, 1])),
                                    float(amplitudes[k, port]), int(port),
                                    float('nan')))
    return out


PropagationResult = collections.namedtuple(
    'PropagationResult', ['signal', 'crosstalk', 'per_port_il_db',
                          'per_port_xp_dbm', 'sigma_deficit_db'])


class NetworkSpec(collections.namedtuple(
    'NetworkSpec', ['layers', 'params', 'input_power_dbm',
                    'photodetector_sensitivity_dbm'])):
  """An M-layer network sharing one device model."""

  __slots__ = ()

  def validate(self):
    if not self.layers:
      raise ValueError('Expected at least one layer.')
    n = self.layers[0].n
    for m, layout in enumerate(self.layers):
      if layout.n != n:
        raise ValueError('Expected all layers to have {} ports, layer {} has '
                         '{}'.format(n, m, layout.n))
    return self

  @property
  def n(self):
    return self.layers[0].n

  @property
  def m(self):
    return len(self.layers)


def _as_batch(x, n):
  x = np.asarray(x, dtype=np.complex128)
  if x.ndim not in (1, 2) or x.shape[0] != n:
    raise ValueError('Dimension mismatch: layout has {} ports, x is {}'.format(
        n, x.shape))
  return x.reshape(n, -1), x.ndim == 1


def _restore(y, was_vector):
  return y[:, 0] if was_vector else y


def layer_gain_factor(layout):
  """Field factor of the OGU gain and NAU loss at a layer output."""
  return float(numerics.db_to_field(layout.nau_loss_db - layout.gain_db))


#-------------------------------------------------------------------------------
# Single-layer transfer model
#-------------------------------------------------------------------------------


_Column = collections.namedtuple(
    '_Column', ['matrix', 'pairs', 'pair_rows', 'diags', 'diag_rows'])


class _LayerModel(object):
  """Column-by-column transfer data of a layout for fixed crosstalk draws."""

  def __init__(self, layout, params, x_db=None, model=None):
    """Builds the effective column matrices.

    Args:
      layout: `mesh.LayerLayout`.
      params: `device.MziParams`.
      x_db: optional float array aligned with `layout.placements`; None
        disables crosstalk.
      model: optional `CrosstalkModel`.
    """
    model = model or make_crosstalk_model()
    placements = layout.placements
    mesh.group_by_column(placements)
    self._n = layout.n
    self._screen = np.exp(1j * np.asarray(layout.phase_screen,
                                          dtype=np.float64))
    count = len(placements)
    self.blocks = device.mzi_transfer_batch(
        params, [pl.phases.theta for pl in placements],
        [pl.phases.phi for pl in placements])
    if x_db is None:
      x_db = np.full(count, -np.inf)
    x_db = np.asarray(x_db, dtype=np.float64)
    if x_db.shape != (count,):
      raise ValueError('Expected {} crosstalk draws, got {}'.format(
          count, x_db.shape))
    signal_f, leak_f = device.split_factors(x_db, model.amplitude_model)
    signal_f = np.array(signal_f, dtype=np.float64)
    leak_f = np.array(leak_f, dtype=np.float64)
    is_diag = np.array([pl.role == mesh.ROLE_DIAGONAL for pl in placements],
                       dtype=bool)
    if model.suppress_diagonal_crosstalk:
      signal_f[is_diag] = 1.0
      leak_f[is_diag] = 0.0
    self.leak_factors = leak_f

    columns = np.array([pl.column for pl in placements], dtype=np.int64)
    self._columns = []
    for column in np.unique(columns):
      members = np.nonzero(columns == column)[0]
      matrix = np.eye(self._n, dtype=np.complex128)
      pairs, pair_rows, diags, diag_rows = [], [], [], []
      for idx in members:
        r = placements[idx].top_row
        if is_diag[idx]:
          matrix[r, r] = signal_f[idx] * self.blocks[idx, 0, 0]
          if leak_f[idx] > 0.0:
            diags.append(idx)
            diag_rows.append(r)
        else:
          matrix[r:r + 2, r:r + 2] = signal_f[idx] * self.blocks[idx]
          if leak_f[idx] > 0.0:
            pairs.append(idx)
            pair_rows.append((r, r + 1))
      self._columns.append(_Column(
          matrix, np.array(pairs, dtype=np.int64),
          np.array(pair_rows, dtype=np.int64).reshape(-1, 2),
          np.array(diags, dtype=np.int64), np.array(diag_rows,
                                                    dtype=np.int64)))

    # suffix[c] maps the output of column c to the layer output.
    self._suffix = [None] * len(self._columns)
    acc = np.diag(self._screen)
    for c in range(len(self._columns) - 1, -1, -1):
      self._suffix[c] = acc
      acc = acc @ self._columns[c].matrix
    self.transfer = acc

  def forward(self, x):
    """Column input fields [z_0, ..., z_C] for a batch x of shape (N, B)."""
    zs = [x]
    for column in self._columns:
      zs.append(column.matrix @ zs[-1])
    return zs

  def output(self, zs):
    return self._screen[:, None] * zs[-1]

  def leaks(self, zs, seed_zs=None, seed_blocks=None):
    """Leaked fields at the layer output.

    Args:
      zs: column inputs from `forward`.
      seed_zs: optional column inputs the leaks are seeded from.
      seed_blocks: optional (P, 2, 2) transfer blocks used for seeding.

    Returns:
      (placement indices (K,), fields (K, N, B)).
    """
    seed_zs = zs if seed_zs is None else seed_zs
    seed_blocks = self.blocks if seed_blocks is None else seed_blocks
    batch = zs[0].shape[1]
    indices, fields = [], []
    for c, column in enumerate(self._columns):
      if column.pairs.size:
        z_in = seed_zs[c][column.pair_rows]
        routed = np.einsum('jab,jbk->jak', seed_blocks[column.pairs], z_in)
        leak = self.leak_factors[column.pairs][:, None, None] * routed[:, ::-1]
        fields.append(np.einsum('njb,jbk->jnk',
                                self._suffix[c][:, column.pair_rows], leak))
        indices.append(column.pairs)
      if column.diags.size:
        z_in = seed_zs[c][column.diag_rows]
        leak = (self.leak_factors[column.diags] *
                seed_blocks[column.diags, 1, 0])[:, None] * z_in
        fields.append(np.einsum('nj,jk->jnk',
                                self._suffix[c][:, column.diag_rows], leak))
        indices.append(column.diags)
    if not fields:
      return (np.zeros(0, dtype=np.int64),
              np.zeros((0, self._n, batch), dtype=np.complex128))
    return np.concatenate(indices), np.concatenate(fields, axis=0)


def _design_params(params):
  """The lossless 50:50 device the phases were compiled for."""
  return params.lossless()._replace(kappa1=0.5, kappa2=0.5)


def _bar_sigma(layout):
  """Layout copy with every attenuator fully transmissive."""
  bar = mesh.attenuator_phases(1.0)
  return layout._replace(sigma_stage=[pl._replace(phases=bar)
                                      for pl in layout.sigma_stage])


def layer_transfer(layout, params, mode='lossy'):
  """N x N field transfer of a layer's OIU without crosstalk or gain.

  Args:
    layout: `mesh.LayerLayout`.
    params: `device.MziParams`.
    mode: 'ideal' (lossless design device) or 'lossy'.
  """
  if mode == 'ideal':
    params = _design_params(params)
  elif mode != 'lossy':
    raise ValueError('Expected mode in (ideal, lossy), got {}'.format(mode))
  return _LayerModel(layout, params).transfer


def _row_loss_db(matrix):
  return numerics.power_to_loss_db(np.sum(np.abs(matrix)**2, axis=1))


def _uniform_launch(n, x):
  if x is None:
    return np.ones((n, 1), dtype=np.complex128)
  return _as_batch(x, n)[0]


def _signal_loss_db(ideal, received, fallback):
  """Per-port loss of received against ideal fields, averaged over the batch.

  Ports the ideal weights leave dark (below `DARK_PORT_FRACTION` of the mean
  port power) have no signal to measure; they take the loss from `fallback`,
  a callable returning the incoherent per-port loss.
  """
  ideal_mw = np.mean(np.abs(ideal)**2, axis=1)
  received_mw = np.mean(np.abs(received)**2, axis=1)
  dark = ideal_mw <= DARK_PORT_FRACTION * np.mean(ideal_mw)
  il = numerics.power_to_loss_db(received_mw / np.where(dark, 1.0, ideal_mw))
  if np.any(dark):
    il = np.where(dark, fallback(), il)
  return il


def layer_insertion_loss(layout, params, x=None, include_gain=False):
  """Per-output-port insertion loss of one layer in dB.

  The loss of port k is the power the lossy OIU delivers there relative to
  what the lossless design delivers, both driven by the launch `x` through
  the compiled Σ attenuators. The Σ scaling is common to both and is reported
  apart as `LayerLayout.sigma_deficit_db`. Interference between paths makes
  the loss port and weight dependent; a port never shows less than 0 dB.

  Args:
    layout: `mesh.LayerLayout`.
    params: `device.MziParams`.
    x: optional launch (N,) or (N, B); None launches every port uniformly.
    include_gain: bool, subtract the OGU gain and add the NAU loss.

  Returns:
    float64 vector of N losses; >= 0 without gain.
  """
  batch = _uniform_launch(layout.n, x)
  il = _signal_loss_db(
      layer_transfer(layout, params, 'ideal') @ batch,
      layer_transfer(layout, params, 'lossy') @ batch,
      lambda: _row_loss_db(_LayerModel(_bar_sigma(layout), params).transfer))
  il = np.maximum(il, 0.0)
  if include_gain:
    il = il - layout.gain_db + layout.nau_loss_db
  return il


def network_insertion_loss(spec, x=None):
  """Per-port insertion loss of the cascade, OGU gain and NAU loss included.

  Measured like `layer_insertion_loss` on the cascaded transfers, with the
  OIU part floored at 0 dB before the net gain is applied.
  """
  spec.validate()
  batch = _uniform_launch(spec.n, x)
  ideal, received = batch, batch
  net_gain_db = 0.0
  for layout in spec.layers:
    ideal = layer_transfer(layout, spec.params, 'ideal') @ ideal
    received = layer_transfer(layout, spec.params, 'lossy') @ received
    net_gain_db += layout.gain_db - layout.nau_loss_db

  def incoherent():
    total = np.eye(spec.n, dtype=np.complex128)
    for layout in spec.layers:
      total = _LayerModel(_bar_sigma(layout), spec.params).transfer @ total
    return _row_loss_db(total)

  return np.maximum(_signal_loss_db(ideal, received, incoherent),
                    0.0) - net_gain_db


#-------------------------------------------------------------------------------
# Propagation
#-------------------------------------------------------------------------------


def draw_crosstalk(layout, params, rng=None):
  """Crosstalk coefficients in dB for every placement of a layout.

  Without `rng` the deterministic mean mu(theta) is used. Freezing the result
  and passing it back as `x_db` gives the 'frozen' resampling mode.
  """
  thetas = np.array([pl.phases.theta for pl in layout.placements],
                    dtype=np.float64)
  return np.atleast_1d(device.crosstalk_coefficient(params, thetas, rng))


def propagate_signal(layout, params, x, mode='lossy'):
  """Propagates fields through a layer's OIU, without crosstalk or gain.

  Args:
    layout: `mesh.LayerLayout`.
    params: `device.MziParams`.
    x: complex array (N,) or (N, B).
    mode: 'ideal' uses the lossless design device; 'lossy' applies the full
      device model of every placement.

  Returns:
    Output fields with the shape of `x`.
  """
  batch, was_vector = _as_batch(x, layout.n)
  return _restore(layer_transfer(layout, params, mode) @ batch, was_vector)


def _resolve_draws(layout, params, rng, resample, x_db):
  if resample not in RESAMPLE_MODES:
    raise ValueError('Expected resample in {}, got {}'.format(
        RESAMPLE_MODES, resample))
  if x_db is not None:
    return np.asarray(x_db, dtype=np.float64)
  if resample == 'frozen':
    raise ValueError('Frozen resampling needs x_db from draw_crosstalk.')
  return draw_crosstalk(layout, params, rng)


def _simulate_layer(layout, params, batch, x_db, model):
  """Returns (output signal, source indices, leak fields, transfer)."""
  model = model or make_crosstalk_model()
  lossy = _LayerModel(layout, params, x_db, model)
  zs = lossy.forward(batch)
  if model.leak_reference == 'launch':
    ideal = _LayerModel(layout, _design_params(params))
    indices, fields = lossy.leaks(zs, ideal.forward(batch), ideal.blocks)
  else:
    indices, fields = lossy.leaks(zs)
  return lossy.output(zs), indices, fields, lossy.transfer


def _crosstalk_dbm(components):
  power = components.incoherent_power()
  return numerics.mw_to_dbm(np.mean(power, axis=1))


def propagate_with_crosstalk(layout, params, x, rng=None, resample='per_call',
                             x_db=None, model=None, layer_index=0):
  """Propagates fields through a layer's OIU with first-order crosstalk.

  Args:
    layout: `mesh.LayerLayout`.
    params: `device.MziParams`.
    x: complex array (N,) or (N, B) in sqrt(mW).
    rng: optional generator for the per-call crosstalk draws; None uses the
      deterministic mean coefficients.
    resample: 'per_call' draws new coefficients each call; 'frozen' uses
      `x_db`.
    x_db: optional coefficients from `draw_crosstalk`; -inf disables an MZI.
    model: optional `CrosstalkModel`.
    layer_index: int, stamped into the component sources.

  Returns:
    A `PropagationResult`. `per_port_il_db` is measured on the launch `x`;
    `per_port_xp_dbm` is the phase-averaged crosstalk power, averaged over
    the batch.
  """
  batch, was_vector = _as_batch(x, layout.n)
  draws = _resolve_draws(layout, params, rng, resample, x_db)
  signal, indices, fields, _ = _simulate_layer(layout, params, batch, draws,
                                               model)
  sources = np.stack([np.full(indices.shape, layer_index, dtype=np.int64),
                      indices], axis=1)
  components = CrosstalkComponents(sources, fields)
  return PropagationResult(_restore(signal, was_vector), components,
                           layer_insertion_loss(layout, params, batch),
                           _crosstalk_dbm(components),
                           layout.sigma_deficit_db)


def layer_metrics(layout, params, x, rng=None, resample='per_call', x_db=None,
                  model=None, layer_index=0):
  """`propagate_with_crosstalk` followed by the layer's OGU gain and NAU loss.

  Gain and NAU loss scale the signal and every crosstalk component alike.
  """
  result = propagate_with_crosstalk(layout, params, x, rng, resample, x_db,
                                    model, layer_index)
  g = layer_gain_factor(layout)
  components = result.crosstalk.scaled(g)
  return PropagationResult(
      result.signal * g, components,
      result.per_port_il_db - layout.gain_db + layout.nau_loss_db,
      _crosstalk_dbm(components), result.sigma_deficit_db)


def network_cascade(spec, x, rng=None, resample='per_call', x_dbs=None,
                    model=None):
  """Propagates a launch pattern through every layer of a network.

  Components born in layer m are carried by the effective (lossy, crosstalk
  depleted) transfer of layers m+1..M and pick up every traversed layer's
  gain; they never spawn further leaks.

  Args:
    spec: `NetworkSpec`.
    x: complex array (N,) or (N, B); |x_i| = 1 launches
      `spec.input_power_dbm` on port i.
    rng: optional generator for per-call crosstalk draws.
    resample: 'per_call' or 'frozen'.
    x_dbs: optional list of per-layer coefficient arrays.
    model: optional `CrosstalkModel`.

  Returns:
    A `PropagationResult` at the network outputs.
  """
  spec.validate()
  batch, was_vector = _as_batch(x, spec.n)
  signal = batch * np.sqrt(numerics.dbm_to_mw(spec.input_power_dbm))
  components = CrosstalkComponents.empty(spec.n, batch.shape[1])
  for m, layout in enumerate(spec.layers):
    draws = _resolve_draws(layout, spec.params, rng, resample,
                           None if x_dbs is None else x_dbs[m])
    signal, indices, fields, transfer = _simulate_layer(
        layout, spec.params, signal, draws, model)
    g = layer_gain_factor(layout)
    signal = g * signal
    sources = np.stack([np.full(indices.shape, m, dtype=np.int64), indices],
                       axis=1)
    components = components.transformed(g * transfer).concatenate(
        CrosstalkComponents(sources, g * fields))
    logging.debug('Layer %d: %d crosstalk components', m, components.count)
  return PropagationResult(
      _restore(signal, was_vector), components,
      network_insertion_loss(spec, batch), _crosstalk_dbm(components),
      float(sum(layout.sigma_deficit_db for layout in spec.layers)))


#-------------------------------------------------------------------------------
# Coherent interference
#-------------------------------------------------------------------------------


InterferenceStats = collections.namedtuple(
    'InterferenceStats', ['mean_received_mw', 'mean_crosstalk_mw',
                          'max_crosstalk_mw', 'min_received_mw',
                          'received_percentiles_mw',
                          'crosstalk_percentiles_mw', 'trials'])

InterferenceBounds = collections.namedtuple(
    'InterferenceBounds', ['mean_received_mw', 'mean_crosstalk_mw',
                           'constructive_crosstalk_mw',
                           'destructive_received_mw'])


def _component_matrix(components):
  if isinstance(components, CrosstalkComponents):
    return components.sample(0)
  a = np.asarray(components, dtype=np.complex128)
  if a.ndim == 1:
    a = a[:, None]
  elif a.ndim > 2:
    a = a.reshape(a.shape[0], -1)
  return a


def interference_bounds(components, signal):
  """Analytic statistics of received power under uniform random phases.

  Args:
    components: `CrosstalkComponents` (first batch entry) or array (K, N).
    signal: complex array (N,) of signal fields.

  Returns:
    `InterferenceBounds`, each a float64 vector over ports.
  """
  a = _component_matrix(components)
  s = np.abs(np.asarray(signal, dtype=np.complex128)).reshape(-1)
  mag = np.abs(a)
  xt_mean = np.sum(mag**2, axis=0) if mag.size else np.zeros_like(s)
  xt_sum = np.sum(mag, axis=0) if mag.size else np.zeros_like(s)
  return InterferenceBounds(s**2 + xt_mean, xt_mean, xt_sum**2,
                            np.maximum(0.0, s - xt_sum)**2)


@gin.configurable
def monte_carlo_interference(components, signal, rng, trials=10000):
  """Received-power distribution with a random phase on every component.

  Each trial draws rho ~ U[0, 2pi) independently for every (component, port)
  and records |A_s + sum_k A_k e^{j rho_k}|^2 and |sum_k A_k e^{j rho_k}|^2.
  Trials run in chunks on independent streams spawned from `rng`.

  Args:
    components: `CrosstalkComponents` (first batch entry) or array (K, N).
    signal: complex array (N,) of signal fields.
    rng: `np.random.Generator`.
    trials: int >= 1.

  Returns:
    `InterferenceStats`, per-port vectors in mW.
  """
  if trials < 1:
    raise ValueError('Expected trials >= 1, got {}'.format(trials))
  a = _component_matrix(components)
  s = np.asarray(signal, dtype=np.complex128).reshape(-1)
  if a.shape[0] and a.shape[1] != s.shape[0]:
    raise ValueError('Dimension mismatch: {} components, {} signal'.format(
        a.shape, s.shape))
  live = np.any(np.abs(a) > 0.0, axis=1)
  a = a[live]
  k, n = a.shape[0], s.shape[0]
  chunk = max(1, min(trials, _MC_CHUNK_ELEMENTS // max(1, k * n)))
  n_chunks = -(-trials // chunk)
  streams = numerics.spawn_rngs(numerics.derive_seed(rng), n_chunks)
  received = np.empty((trials, n))
  crosstalk = np.empty((trials, n))
  for c, stream in enumerate(streams):
    lo = c * chunk
    hi = min(trials, lo + chunk)
    if k:
      rho = numerics.sample(stream, numerics.Uniform(0.0, 2.0 * np.pi),
                            size=(hi - lo, k, n))
      xt = np.einsum('tkn,kn->tn', np.exp(1j * rho), a)
    else:
      xt = np.zeros((hi - lo, n), dtype=np.complex128)
    crosstalk[lo:hi] = np.abs(xt)**2
    received[lo:hi] = np.abs(s[None, :] + xt)**2
  return InterferenceStats(
      np.mean(received, axis=0), np.mean(crosstalk, axis=0),
      np.max(crosstalk, axis=0), np.min(received, axis=0),
      np.percentile(received, PERCENTILES, axis=0),
      np.percentile(crosstalk, PERCENTILES, axis=0), trials)


def resolve_interference(signal, components, rng):
  """One random-phase realization of the received fields.

  Args:
    signal: complex array (N, B).
    components: `CrosstalkComponents` with fields (K, N, B).
    rng: `np.random.Generator`.

  Returns:
    complex array (N, B), signal plus every component with its own phase.
  """
  if not components.count:
    return signal
  rho = numerics.sample(rng, numerics.Uniform(0.0, 2.0 * np.pi),
                        size=components.fields.shape)
  return signal + np.sum(components.fields * np.exp(1j * rho), axis=0)
