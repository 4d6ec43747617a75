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
"""Statistical reproductions of the reference loss and crosstalk figures.

`ReducedFiguresTest` checks the same statistics at a reduced scale and runs in
the default suite. The full-scale classes take minutes each and run only with
SPNN_RUN_LONG_CHECKS=1.
"""

from __future__ import absolute_import
from __future__ import division

import os

from absl.testing import absltest
import numpy as np

from spnn_loss_crosstalk import numerics
from spnn_loss_crosstalk.analysis import accuracy
from spnn_loss_crosstalk.analysis import trainer
from spnn_loss_crosstalk.experiments import config
from spnn_loss_crosstalk.experiments import dataset
from spnn_loss_crosstalk.experiments import run_experiment

_ENABLED = os.environ.get('SPNN_RUN_LONG_CHECKS') == '1'


def _config(**updates):
  return config.default_config()._replace(**updates)


def _layer_summary(n_matrices, trials):
  cfg = _config(experiment='layer-stats', n=8, n_matrices=n_matrices,
                trials=trials)
  tables = run_experiment.layer_stats(cfg, run_experiment.create_streams(0))
  return tables['summary'].iloc[0]


def _network_frame(n_grid, m_grid, trials, **updates):
  cfg = _config(experiment='network-stats', n_grid=n_grid, m_grid=m_grid,
                trials=trials, **updates)
  return run_experiment.network_stats(cfg, run_experiment.create_streams(0))['']


def _penalty_frame(n_grid, m_grid, trials):
  cfg = _config(experiment='power-penalty', n_grid=n_grid, m_grid=m_grid,
                trials=trials)
  return run_experiment.power_penalty(cfg, run_experiment.create_streams(0))['']


class ReducedFiguresTest(absltest.TestCase):

  def test_single_layer_statistics(self):
    summary = _layer_summary(n_matrices=20, trials=500)
    self.assertAlmostEqual(summary['avg_il_db'], 6.5, delta=1.0)
    # Interference between paths leaves a tail well above the average port.
    self.assertBetween(summary['worst_il_db'] - summary['avg_il_db'], 2.5,
                       25.0)
    self.assertAlmostEqual(summary['avg_xp_dbm'], -20.5, delta=2.0)
    self.assertBetween(summary['worst_xp_dbm'] - summary['avg_xp_dbm'], 8.0,
                       16.0)

  def test_network_loss_grows_with_size_and_depth(self):
    frame = _network_frame((8, 16, 32), (1, 2), trials=200, gain_db=0.0,
                           nau_loss_db=0.0)
    table = frame.set_index(['n', 'm'])['avg_il_db']
    for m in (1, 2):
      self.assertLess(table[(8, m)], table[(16, m)])
      self.assertLess(table[(16, m)], table[(32, m)])
    for n in (8, 16, 32):
      self.assertLess(table[(n, 1)], table[(n, 2)])
    self.assertTrue((frame['worst_il_db'] >= frame['avg_il_db']).all())
    self.assertTrue((frame['worst_xp_dbm'] >= frame['avg_xp_dbm']).all())

  def test_large_single_layer_network(self):
    row = _network_frame((64,), (1,), trials=200).iloc[0]
    self.assertAlmostEqual(row['avg_il_db'], 40.5, delta=2.5)
    self.assertGreater(row['worst_il_db'] - row['avg_il_db'], 5.0)
    self.assertAlmostEqual(row['avg_xp_dbm'], -51.5, delta=3.0)
    self.assertBetween(row['worst_xp_dbm'] - row['avg_xp_dbm'], 6.0, 20.0)

  def test_power_penalty_of_large_network(self):
    frame = _penalty_frame((64,), (1,), trials=200)
    self.assertGreater(frame['avg_penalty_dbm'].iloc[0], 30.0)

  def test_lossless_classifier_matches_ideal_model(self):
    cfg = _config(n=4, m=2, n_samples=60, epochs=3)
    streams = run_experiment.create_streams(0)
    data = dataset.load_dataset(cfg, streams.data)
    model = trainer.train_reference(data.features, data.labels, m=cfg.m,
                                    epochs=cfg.epochs, seed=0,
                                    n_classes=data.n_classes)
    classifier = accuracy.PhotonicClassifier(model)
    lossless = classifier.evaluate(data.features, data.labels,
                                   cfg.mzi_params().lossless()).accuracy_pct
    self.assertEqual(lossless,
                     classifier.ideal_accuracy(data.features, data.labels))


@absltest.skipUnless(_ENABLED, 'set SPNN_RUN_LONG_CHECKS=1 to run')
class LossAndCrosstalkFiguresTest(absltest.TestCase):

  def test_single_layer_statistics(self):
    summary = _layer_summary(n_matrices=100, trials=10000)
    self.assertAlmostEqual(summary['avg_il_db'], 6.5, delta=1.0)
    self.assertAlmostEqual(summary['worst_il_db'], 20.0, delta=6.0)
    self.assertAlmostEqual(summary['avg_xp_dbm'], -20.0, delta=2.0)
    self.assertAlmostEqual(summary['worst_xp_dbm'], -7.5, delta=2.0)

  def test_large_network_statistics(self):
    row = _network_frame((64,), (1,), trials=10000).iloc[0]
    self.assertAlmostEqual(row['avg_il_db'], 40.5, delta=2.5)
    self.assertAlmostEqual(row['worst_il_db'], 58.0, delta=9.0)
    self.assertAlmostEqual(row['avg_xp_dbm'], -51.5, delta=3.0)
    self.assertAlmostEqual(row['worst_xp_dbm'], -37.5, delta=4.0)

  def test_power_penalty_of_large_networks(self):
    frame = _penalty_frame((64,), (1, 2, 3), trials=1000)
    self.assertTrue((frame['avg_penalty_dbm'] > 30.0).all())


@absltest.skipUnless(_ENABLED, 'set SPNN_RUN_LONG_CHECKS=1 to run')
class AccuracyDegradationTest(absltest.TestCase):

  def _classifier(self, seed):
    cfg = _config(n=8, m=2, seed=seed)
    streams = run_experiment.create_streams(seed)
    data = dataset.load_dataset(cfg, streams.data)
    train, test = dataset.train_test_split(data, cfg.test_fraction,
                                           streams.data)
    model = trainer.train_reference(train.features, train.labels, m=cfg.m,
                                    epochs=cfg.epochs, seed=seed,
                                    n_classes=train.n_classes)
    return accuracy.PhotonicClassifier(model), test, cfg.mzi_params()

  def test_degradation_pattern(self):
    chance = 100.0 / 8
    sweeps = {axis: [] for axis in accuracy.SWEEP_AXES}
    grid = np.linspace(0.0, 0.4, 5)
    for seed in range(3):
      classifier, test, params = self._classifier(seed)
      lossless = classifier.evaluate(test.features, test.labels,
                                     params.lossless()).accuracy_pct
      self.assertEqual(lossless,
                       classifier.ideal_accuracy(test.features, test.labels))
      for axis in accuracy.SWEEP_AXES:
        sweep = accuracy.loss_sweep(classifier, test.features, test.labels,
                                    axis, grid, params)
        sweeps[axis].append([r.accuracy_pct for r in sweep])

      heavy = accuracy.with_alphas(params, 0.4, 0.1, 0.03)
      self.assertLessEqual(
          classifier.evaluate(test.features, test.labels,
                              heavy).accuracy_pct, 2.0 * chance)
      crosstalk = classifier.evaluate(
          test.features, test.labels, params, crosstalk=True,
          rng=numerics.make_rng(seed)).accuracy_pct
      self.assertLessEqual(abs(crosstalk - chance), 5.0)

    for axis, runs in sweeps.items():
      median = np.median(np.array(runs), axis=0)
      self.assertTrue(np.all(np.diff(median) <= 0.0), axis)


if __name__ == '__main__':
  absltest.main()
