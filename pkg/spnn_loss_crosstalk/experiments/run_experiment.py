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
"""Run methods for the device, layer, network and accuracy experiments.

Methods in this module are usually referenced by |run.py|. Every experiment
takes a resolved `ExperimentConfig` and the run's random streams and returns
an ordered mapping of table name to `pd.DataFrame`; `run_experiment` writes
the tables next to the resolved config.
"""

from __future__ import absolute_import
from __future__ import division

import collections
import os
import time

from absl import logging
import gin
import numpy as np
import pandas as pd

from spnn_loss_crosstalk import device
from spnn_loss_crosstalk import mesh
from spnn_loss_crosstalk import numerics
from spnn_loss_crosstalk import propagation
from spnn_loss_crosstalk.analysis import accuracy
from spnn_loss_crosstalk.analysis import penalty
from spnn_loss_crosstalk.analysis import trainer
from spnn_loss_crosstalk.experiments import config
from spnn_loss_crosstalk.experiments import dataset
from spnn_loss_crosstalk.experiments import results


Streams = collections.namedtuple(
    'Streams', ['data', 'weights', 'crosstalk', 'sampling'])


def load_gin_configs(gin_files, gin_bindings):
  """Loads gin configuration files.

  Args:
    gin_files: A list of paths to the gin configuration files for this
      experiment.
    gin_bindings: List of gin parameter bindings to override the values in the
      config files.
  """
  gin.parse_config_files_and_bindings(gin_files,
                                      bindings=gin_bindings,
                                      skip_unknown=False)


def create_streams(seed):
  """Independent generators per role; each depends only on the seed."""
  return Streams(*numerics.spawn_rngs(seed, len(Streams._fields)))


def _launch(n):
  """Unit field on every input; scaled to the launch power downstream."""
  return np.ones(n, dtype=np.complex128)


#-------------------------------------------------------------------------------
# Device, layer and network statistics
#-------------------------------------------------------------------------------


def device_sweep(cfg, streams):
  """Insertion loss and crosstalk power of one MZI over theta in [0, pi].

  il_oK_db is the loss on output K with unit power on both inputs. xp_oK_dbm
  is the mean leak power on output K over `trials` crosstalk draws, leaked
  from the launch power routed to the other output.
  """
  params = cfg.mzi_params()
  model = propagation.make_crosstalk_model()
  design = params.lossless()
  p_mw = numerics.dbm_to_mw(cfg.launch_power_dbm)
  rows = []
  for theta in np.linspace(0.0, np.pi, cfg.sweep_points):
    phases = device.PhasePair(theta, 0.0)
    il_o1, il_o2 = device.output_insertion_loss(params, phases)
    routed = np.sum(np.abs(device.mzi_transfer(design, phases))**2, axis=1)
    xp = []
    for victim in (0, 1):
      x_db = device.crosstalk_coefficient(
          params, np.full(cfg.trials, theta), streams.crosstalk)
      _, leak = device.split_factors(x_db, model.amplitude_model)
      xp.append(float(numerics.mw_to_dbm(
          np.mean(np.abs(leak)**2) * routed[1 - victim] * p_mw)))
    rows.append(collections.OrderedDict([
        ('theta', float(theta)), ('il_o1_db', il_o1), ('il_o2_db', il_o2),
        ('xp_o1_dbm', xp[0]), ('xp_o2_dbm', xp[1])]))
  return collections.OrderedDict([('', results.as_frame(rows))])


def _compile_random(cfg, n, rng, gain_db=None, nau_loss_db=None):
  w = mesh.random_weight_matrix(n, rng, cfg.matrix_kind)
  return mesh.compile_layer(
      w, cfg.gain_db if gain_db is None else gain_db,
      cfg.nau_loss_db if nau_loss_db is None else nau_loss_db,
      svd_method=cfg.svd_method)


def layer_stats(cfg, streams):
  """Per-port loss and crosstalk of single OIUs over random weight matrices.

  Loss and crosstalk are taken at the OIU output, without OGU gain or NAU
  loss. Crosstalk statistics come from `trials` random-phase realizations.
  """
  params = cfg.mzi_params()
  model = propagation.make_crosstalk_model()
  x = _launch(cfg.n) * np.sqrt(numerics.dbm_to_mw(cfg.launch_power_dbm))
  per_port = []
  start_time = time.time()
  for index in range(cfg.n_matrices):
    layout = _compile_random(cfg, cfg.n, streams.weights)
    result = propagation.propagate_with_crosstalk(
        layout, params, x, streams.crosstalk, model=model)
    stats = propagation.monte_carlo_interference(
        result.crosstalk, result.signal, streams.sampling, trials=cfg.trials)
    xp_mean = numerics.mw_to_dbm(stats.mean_crosstalk_mw)
    xp_max = numerics.mw_to_dbm(stats.max_crosstalk_mw)
    for port in range(cfg.n):
      per_port.append(collections.OrderedDict([
          ('matrix', index), ('port', port),
          ('il_db', float(result.per_port_il_db[port])),
          ('xp_mean_dbm', float(xp_mean[port])),
          ('xp_max_dbm', float(xp_max[port]))]))
  logging.info('Layer statistics over %d matrices took %d seconds',
               cfg.n_matrices, time.time() - start_time)

  ports = results.as_frame(per_port)
  boxes = []
  for quantity in ('il_db', 'xp_mean_dbm', 'xp_max_dbm'):
    for port, group in ports.groupby('port', sort=True):
      row = collections.OrderedDict([('quantity', quantity), ('port', port)])
      row.update(results.boxplot_stats(group[quantity].values))
      boxes.append(row)
  avg_il, worst_il = penalty.port_statistics(ports['il_db'].values, 'loss')
  avg_xp, _ = penalty.port_statistics(ports['xp_mean_dbm'].values, 'power')
  _, worst_xp = penalty.port_statistics(ports['xp_max_dbm'].values, 'power')
  summary = results.as_frame([collections.OrderedDict([
      ('n', cfg.n), ('matrices', cfg.n_matrices), ('avg_il_db', avg_il),
      ('worst_il_db', worst_il), ('avg_xp_dbm', avg_xp),
      ('worst_xp_dbm', worst_xp)])])
  return collections.OrderedDict([('ports', ports),
                                  ('boxplot', results.as_frame(boxes)),
                                  ('summary', summary)])


def _grid_cells(cfg, streams):
  """(n, m, rng) per network configuration, one spawned stream per cell."""
  grid = [(n, m) for n in cfg.n_grid for m in cfg.m_grid]
  rngs = numerics.spawn_rngs(numerics.derive_seed(streams.weights), len(grid))
  return [(n, m, rng) for (n, m), rng in zip(grid, rngs)]


def _network(cfg, n, m, rng):
  layers = [_compile_random(cfg, n, rng) for _ in range(m)]
  return propagation.NetworkSpec(layers, cfg.mzi_params(),
                                 cfg.launch_power_dbm,
                                 cfg.sensitivity_dbm).validate()


def network_stats(cfg, streams):
  """Average and worst per-port loss and crosstalk over an (N, M) grid."""
  model = propagation.make_crosstalk_model()
  rows = []
  for n, m, rng in _grid_cells(cfg, streams):
    start_time = time.time()
    spec = _network(cfg, n, m, rng)
    result = propagation.network_cascade(spec, _launch(n), rng, model=model)
    stats = propagation.monte_carlo_interference(
        result.crosstalk, result.signal, rng, trials=cfg.trials)
    avg_il, worst_il = penalty.port_statistics(result.per_port_il_db, 'loss')
    avg_xp, _ = penalty.port_statistics(
        numerics.mw_to_dbm(stats.mean_crosstalk_mw), 'power')
    _, worst_xp = penalty.port_statistics(
        numerics.mw_to_dbm(stats.max_crosstalk_mw), 'power')
    rows.append(collections.OrderedDict([
        ('n', n), ('m', m), ('mzis', mesh.count_network_mzis(n, m)),
        ('tunable_phases', mesh.count_tunable_phases(n, m)),
        ('avg_il_db', avg_il), ('worst_il_db', worst_il),
        ('avg_xp_dbm', avg_xp), ('worst_xp_dbm', worst_xp),
        ('sigma_deficit_db', result.sigma_deficit_db)]))
    logging.info('N=%d, M=%d took %d seconds', n, m, time.time() - start_time)
  return collections.OrderedDict([('', results.as_frame(rows))])


def power_penalty(cfg, streams):
  """Laser power needed on average and on the worst port over an (N, M) grid."""
  model = propagation.make_crosstalk_model()
  rows = []
  for n, m, rng in _grid_cells(cfg, streams):
    spec = _network(cfg, n, m, rng)
    result = propagation.network_cascade(spec, _launch(n), rng, model=model)
    row = collections.OrderedDict([('n', n), ('m', m),
                                   ('avg_penalty_dbm', np.nan),
                                   ('worst_penalty_dbm', np.nan)])
    infeasible = 0
    if cfg.penalty_mode in ('average', 'both'):
      stats = propagation.monte_carlo_interference(
          result.crosstalk, result.signal, rng, trials=cfg.trials)
      report = penalty.power_penalty(spec, result, 'average', stats)
      row['avg_penalty_dbm'] = report.avg_dbm
      infeasible = max(infeasible, int(np.sum(~report.feasible)))
    if cfg.penalty_mode in ('worst', 'both'):
      report = penalty.power_penalty(spec, result, 'worst')
      row['worst_penalty_dbm'] = report.worst_dbm
      infeasible = max(infeasible, int(np.sum(~report.feasible)))
    row['infeasible_ports'] = infeasible
    rows.append(row)
    logging.info('N=%d, M=%d: average %.2f dBm, worst %.2f dBm', n, m,
                 row['avg_penalty_dbm'], row['worst_penalty_dbm'])
  return collections.OrderedDict([('', results.as_frame(rows))])


#-------------------------------------------------------------------------------
# Compilation and training
#-------------------------------------------------------------------------------


def _weight_matrices(cfg, streams):
  if cfg.weights == 'random':
    return [mesh.random_weight_matrix(cfg.n, streams.weights, cfg.matrix_kind)
            for _ in range(cfg.m)]
  return trainer.load_model(cfg.weights).weights


def compile_weights(cfg, streams):
  """Compiles every weight matrix and writes layout_<i>.json files."""
  params = cfg.mzi_params()
  rows = []
  for index, w in enumerate(_weight_matrices(cfg, streams)):
    layout = mesh.compile_layer(w, cfg.gain_db, cfg.nau_loss_db,
                                svd_method=cfg.svd_method)
    path = os.path.join(cfg.output_dir, 'layout_{}.json'.format(index))
    mesh.save_layout(layout, path)
    ideal = propagation.layer_transfer(layout, params, 'ideal')
    residual = np.max(np.abs(ideal * layout.s_max - np.asarray(w)))
    rows.append(collections.OrderedDict([
        ('layer', index), ('n', layout.n), ('mzis', layout.mzi_count),
        ('columns', len(layout.columns)), ('s_max', layout.s_max),
        ('sigma_deficit_db', layout.sigma_deficit_db),
        ('residual', float(residual)), ('layout', os.path.basename(path))]))
  return collections.OrderedDict([('', results.as_frame(rows))])


def _data(cfg, streams):
  data = dataset.load_dataset(cfg, streams.data)
  return dataset.train_test_split(data, cfg.test_fraction, streams.data)


def _train(cfg, train_set):
  return trainer.train_reference(
      train_set.features, train_set.labels, m=cfg.m, epochs=cfg.epochs,
      seed=cfg.seed % (2**63), n_classes=train_set.n_classes)


def train(cfg, streams):
  """Trains the reference model and writes weights.npz."""
  train_set, test_set = _data(cfg, streams)
  model = _train(cfg, train_set)
  trainer.save_model(model, os.path.join(cfg.output_dir, 'weights.npz'))
  curve = results.as_frame(
      [(epoch, loss) for epoch, loss in enumerate(model.loss_curve)],
      columns=['epoch', 'loss'])
  summary = results.as_frame([collections.OrderedDict([
      ('n_train', train_set.size), ('n_test', test_set.size),
      ('train_accuracy_pct', trainer.ideal_accuracy(
          model, train_set.features, train_set.labels)),
      ('test_accuracy_pct', trainer.ideal_accuracy(
          model, test_set.features, test_set.labels)),
      ('degenerate', int(np.sum(train_set.degenerate) +
                         np.sum(test_set.degenerate))),
      ('featurizer', train_set.provenance['featurizer'])])])
  return collections.OrderedDict([('loss', curve), ('summary', summary)])


#-------------------------------------------------------------------------------
# Accuracy
#-------------------------------------------------------------------------------


def _classifier(cfg, streams):
  """(classifier, test set); weights='random' trains a model with the seed."""
  train_set, test_set = _data(cfg, streams)
  if cfg.weights == 'random':
    model = _train(cfg, train_set)
  else:
    model = trainer.load_model(cfg.weights)
  return accuracy.PhotonicClassifier(model, cfg.svd_method), test_set


def accuracy_eval(cfg, streams):
  """Ideal, lossless, lossy and (optionally) crosstalk accuracy."""
  classifier, test = _classifier(cfg, streams)
  params = cfg.mzi_params()
  rows = [('ideal', classifier.ideal_accuracy(test.features, test.labels))]
  for mode, p, xt in (('lossless', params.lossless(), False),
                      ('lossy', params, False),
                      ('lossy_crosstalk', params, True)):
    if xt and not cfg.crosstalk:
      continue
    result = accuracy.accuracy_eval(classifier, test.features, test.labels, p,
                                    crosstalk=xt, rng=streams.sampling,
                                    resample=cfg.resample)
    rows.append((mode, result.accuracy_pct))
  frame = results.as_frame(rows, columns=['mode', 'accuracy_pct'])
  frame['n_samples'] = test.size
  return collections.OrderedDict([('', frame)])


def loss_sweep(cfg, streams):
  classifier, test = _classifier(cfg, streams)
  sweep = accuracy.loss_sweep(classifier, test.features, test.labels,
                              cfg.sweep_axis, cfg.sweep_grid,
                              cfg.mzi_params())
  frame = results.as_frame(
      [(cfg.sweep_axis, value, r.accuracy_pct)
       for value, r in zip(cfg.sweep_grid, sweep)],
      columns=['axis', 'alpha_db', 'accuracy_pct'])
  return collections.OrderedDict([('', frame)])


def joint_sample(cfg, streams):
  classifier, test = _classifier(cfg, streams)
  samples = accuracy.joint_loss_sample(
      classifier, test.features, test.labels, cfg.joint_instances,
      streams.sampling, cfg.mzi_params(), loc_mode=cfg.loc_mode)
  frame = results.as_frame([s._asdict() for s in samples])
  return collections.OrderedDict([('', frame)])


def tolerance(cfg, streams):
  """Tolerable losses; the joint filter samples half-normals located at 0."""
  classifier, test = _classifier(cfg, streams)
  found = accuracy.tolerance_search(
      classifier, test.features, test.labels, cfg.max_drop_pct,
      streams.sampling, cfg.mzi_params(),
      iterations=cfg.tolerance_iterations,
      joint_instances=cfg.joint_instances, loc_mode='zero')
  limits = results.as_frame(
      [(axis, limit, found.nominal_pct)
       for axis, limit in found.axis_limits.items()],
      columns=['axis', 'limit_db', 'nominal_pct'])
  frontier = results.as_frame([s._asdict() for s in found.frontier],
                              columns=list(accuracy.JointLossSample._fields))
  return collections.OrderedDict([('limits', limits),
                                  ('frontier', frontier)])


def xtalk_grid(cfg, streams):
  classifier, test = _classifier(cfg, streams)
  grid = accuracy.crosstalk_grid(
      classifier, test.features, test.labels, cfg.xb_grid, cfg.xc_grid,
      streams.sampling, cfg.mzi_params(), alpha_mode=cfg.alpha_mode,
      resample=cfg.resample)
  rows = []
  for i, xb in enumerate(cfg.xb_grid):
    for j, xc in enumerate(cfg.xc_grid):
      rows.append((xb, xc, grid[i, j]))
  frame = results.as_frame(rows, columns=['xb_db', 'xc_db', 'accuracy_pct'])
  return collections.OrderedDict([('', frame)])


EXPERIMENT_FNS = collections.OrderedDict([
    ('device-sweep', device_sweep),
    ('layer-stats', layer_stats),
    ('network-stats', network_stats),
    ('power-penalty', power_penalty),
    ('compile', compile_weights),
    ('train', train),
    ('accuracy', accuracy_eval),
    ('loss-sweep', loss_sweep),
    ('joint-sample', joint_sample),
    ('tolerance', tolerance),
    ('xtalk-grid', xtalk_grid),
])


def run_experiment(cfg):
  """Runs the experiment named by `cfg.experiment` and writes its tables.

  Args:
    cfg: a resolved `ExperimentConfig`.

  Returns:
    List of written CSV paths.

  Raises:
    ValueError: if the experiment is unknown; module errors propagate.
  """
  if cfg.experiment not in EXPERIMENT_FNS:
    raise ValueError('Expected experiment in {}, got {}'.format(
        list(EXPERIMENT_FNS), cfg.experiment))
  logging.info('Running %s (config %s, seed %d) into %s', cfg.experiment,
               cfg.digest, cfg.seed, cfg.output_dir)
  config.write_resolved(cfg)
  start_time = time.time()
  tables = EXPERIMENT_FNS[cfg.experiment](cfg, create_streams(cfg.seed))
  paths = []
  for name, frame in tables.items():
    assert isinstance(frame, pd.DataFrame)
    paths.append(results.emit_csv(
        frame, os.path.join(cfg.output_dir, results.result_name(cfg, name))))
  logging.info('Experiment %s took %d seconds', cfg.experiment,
               time.time() - start_time)
  return paths
