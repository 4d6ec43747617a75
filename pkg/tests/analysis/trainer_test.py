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
"""Tests for spnn_loss_crosstalk.analysis.trainer."""

from __future__ import absolute_import
from __future__ import division

import os

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np
import torch

from spnn_loss_crosstalk import numerics
from spnn_loss_crosstalk.analysis import trainer


def _unit_rows(rng, s, n):
  x = rng.standard_normal((s, n)) + 1j * rng.standard_normal((s, n))
  return x / np.linalg.norm(x, axis=1, keepdims=True)


def _separable(rng, s=200, n=4, noise=0.05):
  """Two classes concentrated on ports 0 and 1."""
  labels = rng.integers(0, 2, size=s)
  x = noise * (rng.standard_normal((s, n)) + 1j * rng.standard_normal((s, n)))
  x[np.arange(s), labels] += 1.0
  return x / np.linalg.norm(x, axis=1, keepdims=True), labels


class ActivationTest(parameterized.TestCase):

  def test_threshold(self):
    z = np.array([3.0 + 4.0j, 0.5, 0.0])
    np.testing.assert_allclose(trainer.activate(z, 1.0),
                               [0.8 * (3.0 + 4.0j), 0.0, 0.0])

  def test_identity(self):
    z = np.array([0.1j, 2.0])
    np.testing.assert_array_equal(trainer.activate(z, 1.0, 'identity'), z)

  def test_unknown(self):
    with self.assertRaises(ValueError):
      trainer.activate(np.ones(2), 0.1, 'relu')


class IdealModelTest(absltest.TestCase):

  def test_identity_weights(self):
    model = trainer.TrainedModel([np.eye(3), np.eye(3)], np.array([0.0]),
                                 'threshold', 3, [])
    x = np.array([[0.1, 0.9j, 0.2]])
    np.testing.assert_allclose(trainer.ideal_forward(model, x), x)
    self.assertEqual(list(trainer.readout(model, x)), [1])
    self.assertEqual(trainer.ideal_accuracy(model, x, [1]), 100.0)
    self.assertEqual(trainer.ideal_accuracy(model, x, [0]), 0.0)

  def test_accuracy_pct_is_exact(self):
    model = trainer.TrainedModel([np.eye(3)], np.zeros(0), 'identity', 3, [])
    x = np.tile([[0.1, 0.9, 0.2]], (250, 1))
    labels = np.ones(250, dtype=np.int64)
    labels[:18] = 0
    self.assertEqual(trainer.ideal_accuracy(model, x, labels), 92.8)
    self.assertEqual(trainer.accuracy_pct(232, 250), 92.8)

  def test_readout_uses_class_ports_only(self):
    model = trainer.TrainedModel([np.eye(4)], np.zeros(0), 'threshold', 2, [])
    y = np.array([[0.1, 0.2, 5.0, 0.0]])
    self.assertEqual(list(trainer.readout(model, y)), [1])

  def test_save_and_load(self):
    rng = numerics.make_rng(0)
    weights = [_unit_rows(rng, 3, 3), _unit_rows(rng, 3, 3)]
    model = trainer.TrainedModel(weights, np.array([0.2]), 'threshold', 2,
                                 [1.0, 0.5])
    path = os.path.join(self.create_tempdir().full_path, 'weights.npz')
    trainer.save_model(model, path)
    loaded = trainer.load_model(path)
    self.assertLen(loaded.weights, 2)
    np.testing.assert_array_equal(loaded.weights[1], weights[1])
    np.testing.assert_array_equal(loaded.biases, [0.2])
    self.assertEqual(loaded.activation, 'threshold')
    self.assertEqual(loaded.n_classes, 2)
    self.assertEqual(loaded.loss_curve, [1.0, 0.5])

  def test_load_without_weights(self):
    path = os.path.join(self.create_tempdir().full_path, 'empty.npz')
    np.savez(path, biases=np.zeros(1))
    with self.assertRaisesRegex(ValueError, 'weight arrays'):
      trainer.load_model(path)


class ReferenceNetworkTest(absltest.TestCase):

  def test_invalid_arguments(self):
    with self.assertRaises(ValueError):
      trainer.ReferenceNetwork(4, 1, 2, activation='relu')
    with self.assertRaises(ValueError):
      trainer.ReferenceNetwork(4, 1, 5)

  def test_export_matches_forward(self):
    network = trainer.ReferenceNetwork(
        4, 2, 3, bias=0.05, generator=torch.Generator().manual_seed(0))
    model = network.export()
    x = _unit_rows(numerics.make_rng(1), 6, 4)
    y_real, y_imag = network(torch.from_numpy(x.real.copy()),
                             torch.from_numpy(x.imag.copy()))
    y = y_real.detach().numpy() + 1j * y_imag.detach().numpy()
    np.testing.assert_allclose(trainer.ideal_forward(model, x), y, atol=1e-5)

  def test_gradients_match_finite_differences(self):
    rng = numerics.make_rng(2)
    network = trainer.ReferenceNetwork(
        4, 2, 3, activation='identity',
        generator=torch.Generator().manual_seed(1))
    x = _unit_rows(rng, 16, 4)
    labels = rng.integers(0, 3, size=16)
    self.assertLess(trainer.check_gradients(network, x, labels, rng=rng),
                    1e-4)


class TrainReferenceTest(absltest.TestCase):

  def test_separable_task(self):
    x, labels = _separable(numerics.make_rng(3))
    model = trainer.train_reference(x, labels, m=1, epochs=60, seed=0,
                                    learning_rate=0.05, log_every_n=0)
    self.assertEqual(model.n_classes, 2)
    self.assertLen(model.loss_curve, 60)
    self.assertLess(model.loss_curve[-1], model.loss_curve[0])
    self.assertGreaterEqual(trainer.ideal_accuracy(model, x, labels), 99.0)

  def test_seeded_training_is_reproducible(self):
    x, labels = _separable(numerics.make_rng(4), s=40)
    a = trainer.train_reference(x, labels, m=2, epochs=2, seed=5)
    b = trainer.train_reference(x, labels, m=2, epochs=2, seed=5)
    for wa, wb in zip(a.weights, b.weights):
      np.testing.assert_array_equal(wa, wb)
    self.assertEqual(a.loss_curve, b.loss_curve)

  def test_zero_epochs_returns_initialization(self):
    x, labels = _separable(numerics.make_rng(5), s=10)
    model = trainer.train_reference(x, labels, m=2, epochs=0)
    self.assertEqual(model.loss_curve, [])
    self.assertLen(model.weights, 2)
    self.assertEqual(model.weights[0].shape, (4, 4))

  def test_summary_dir(self):
    x, labels = _separable(numerics.make_rng(6), s=10)
    summary_dir = self.create_tempdir().full_path
    trainer.train_reference(x, labels, m=1, epochs=2,
                            summary_dir=summary_dir)
    self.assertNotEmpty(os.listdir(summary_dir))


if __name__ == '__main__':
  absltest.main()
