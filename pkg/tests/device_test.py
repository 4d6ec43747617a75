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
"""Tests for spnn_loss_crosstalk.device."""

from __future__ import absolute_import
from __future__ import division

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from spnn_loss_crosstalk import device
from spnn_loss_crosstalk import mesh
from spnn_loss_crosstalk import numerics


class MziParamsTest(parameterized.TestCase):

  def test_reference_defaults(self):
    params = device.make_mzi_params()
    self.assertEqual(params.kappa1, 0.5)
    self.assertEqual(params.xb_db, -25.0)
    self.assertEqual(params.xc_db, -18.0)
    self.assertAlmostEqual(params.propagation_loss_db, 0.06)

  @parameterized.named_parameters(
      ('kappa', dict(kappa1=1.5)),
      ('negative_loss', dict(alpha_m_db=-0.1)),
      ('bar_above_cross', dict(xb_db=-10.0, xc_db=-18.0)),
      ('positive_cross', dict(xb_db=-25.0, xc_db=1.0)),
      ('negative_sigma', dict(xtalk_sigma_frac=-0.1)))
  def test_invalid(self, kwargs):
    with self.assertRaises(ValueError):
      device.make_mzi_params(**kwargs)

  def test_with_propagation_loss(self):
    params = device.make_mzi_params().with_propagation_loss_db(0.12)
    self.assertAlmostEqual(params.alpha_p_db_per_cm, 4.0)
    with self.assertRaises(ValueError):
      device.make_mzi_params(l_mzi_um=0.0).with_propagation_loss_db(0.1)

  def test_disabled_crosstalk(self):
    params = device.make_mzi_params(xb_db=-np.inf, xc_db=-np.inf)
    self.assertTrue(params.crosstalk_disabled)
    self.assertFalse(device.make_mzi_params().crosstalk_disabled)


class TransferTest(parameterized.TestCase):

  @parameterized.parameters((0.0, 0.0), (np.pi, 1.0), (1.1, 4.0), (2.5, 6.2))
  def test_lossless_matches_ideal_mzi(self, theta, phi):
    params = device.make_mzi_params().lossless()
    t = device.mzi_transfer(params, device.PhasePair(theta, phi))
    np.testing.assert_allclose(t, mesh.ideal_mzi(theta, phi), atol=1e-12)
    self.assertTrue(numerics.is_unitary(t, tol=1e-12))

  def test_lossless_power_split_conservation(self):
    params = device.make_mzi_params(kappa1=0.3, kappa2=0.7).lossless()
    rng = numerics.make_rng(0)
    for _ in range(20):
      phases = device.PhasePair(rng.uniform(0, np.pi),
                                rng.uniform(0, 2 * np.pi))
      x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
      y = device.mzi_transfer(params, phases) @ x
      self.assertAlmostEqual(np.sum(np.abs(y)**2), np.sum(np.abs(x)**2),
                             delta=1e-12 * np.sum(np.abs(x)**2))

  def test_losses_never_add_power(self):
    params = device.make_mzi_params(alpha_l_db=0.4, alpha_m_db=0.3)
    for theta in np.linspace(0.0, np.pi, 7):
      t = device.mzi_transfer(params, device.PhasePair(theta, 0.3))
      self.assertLess(np.linalg.norm(t, 2), 1.0)

  def test_batch_matches_single(self):
    params = device.make_mzi_params()
    thetas = np.array([0.0, 0.7, np.pi])
    phis = np.array([0.1, 3.0, 6.0])
    batch = device.mzi_transfer_batch(params, thetas, phis)
    for k in range(3):
      np.testing.assert_allclose(
          batch[k], device.mzi_transfer(params,
                                        device.PhasePair(thetas[k], phis[k])))

  def test_invalid_phases(self):
    with self.assertRaises(ValueError):
      device.mzi_transfer(device.make_mzi_params(), device.PhasePair(4.0, 0.0))


class InsertionLossTest(parameterized.TestCase):

  def test_cross_and_bar_routing(self):
    params = device.make_mzi_params().lossless()
    il_o1, il_o2 = device.port_insertion_loss(
        params, device.PhasePair(0.0, 0.0), 1)
    self.assertEqual(il_o1, np.inf)
    self.assertAlmostEqual(il_o2, 0.0, places=9)
    il_o1, il_o2 = device.port_insertion_loss(
        params, device.PhasePair(np.pi, 0.0), 1)
    self.assertAlmostEqual(il_o1, 0.0, places=9)
    self.assertEqual(il_o2, np.inf)

  @parameterized.parameters((0.0, 1, 0), (0.0, 2, 1), (np.pi, 1, 1),
                            (np.pi, 2, 0))
  def test_blocked_output_reports_infinite_loss(self, theta, in_port, blocked):
    for phi in np.linspace(0.0, 6.0, 7):
      il = device.port_insertion_loss(device.make_mzi_params().lossless(),
                                      device.PhasePair(theta, phi), in_port)
      self.assertEqual(il[blocked], np.inf)
      self.assertAlmostEqual(il[1 - blocked], 0.0, places=9)

  def test_lossy_bar_state_has_finite_extinction(self):
    il_o1, il_o2 = device.port_insertion_loss(
        device.make_mzi_params(), device.PhasePair(np.pi, 0.0), 2)
    self.assertBetween(il_o1, 35.0, 45.0)
    self.assertBetween(il_o2, 0.2, 0.8)

  def test_bad_input_port(self):
    with self.assertRaises(ValueError):
      device.port_insertion_loss(device.make_mzi_params(),
                                 device.PhasePair(0.0, 0.0), 3)

  def test_output_loss_envelope(self):
    params = device.make_mzi_params()
    for theta in np.linspace(0.0, np.pi, 101):
      for il in device.output_insertion_loss(params,
                                             device.PhasePair(theta, 0.0)):
        self.assertBetween(il, 0.25, 0.85)

  def test_output_loss_of_lossless_device_is_zero(self):
    params = device.make_mzi_params().lossless()
    il = device.output_insertion_loss(params, device.PhasePair(1.3, 2.0))
    np.testing.assert_allclose(il, [0.0, 0.0], atol=1e-12)


class CrosstalkTest(parameterized.TestCase):

  def test_mean_interpolates(self):
    params = device.make_mzi_params()
    self.assertAlmostEqual(device.crosstalk_mean_db(params, 0.0), -18.0)
    self.assertAlmostEqual(device.crosstalk_mean_db(params, np.pi), -25.0)
    self.assertAlmostEqual(device.crosstalk_mean_db(params, np.pi / 2), -21.5)

  def test_coefficient_without_rng_is_mean(self):
    params = device.make_mzi_params()
    self.assertAlmostEqual(device.crosstalk_coefficient(params, np.pi), -25.0)

  def test_sampled_coefficient_statistics(self):
    params = device.make_mzi_params()
    x = device.crosstalk_coefficient(params, np.full(20000, np.pi),
                                     numerics.make_rng(1))
    self.assertAlmostEqual(np.mean(x), -25.0, delta=0.05)
    self.assertAlmostEqual(np.std(x), 1.25, delta=0.05)
    self.assertTrue(np.all(x <= 0.0))

  def test_bar_state_without_leak(self):
    params = device.make_mzi_params(xb_db=-np.inf)
    x = device.crosstalk_coefficient(params, np.array([0.0, 1.0, np.pi]),
                                     numerics.make_rng(2))
    self.assertTrue(np.isfinite(x[0]))
    self.assertEqual(x[1], -np.inf)
    self.assertEqual(x[2], -np.inf)

  def test_theta_out_of_range(self):
    with self.assertRaises(ValueError):
      device.crosstalk_coefficient(device.make_mzi_params(), -0.5)

  def test_split_factors(self):
    signal, leak = device.split_factors(-20.0)
    self.assertAlmostEqual(signal**2 + leak**2, 1.0)
    self.assertAlmostEqual(leak**2, 0.01)
    signal, leak = device.split_factors(-20.0, 'literal')
    self.assertAlmostEqual(signal, 0.99)
    self.assertAlmostEqual(leak, 0.01)
    signal, leak = device.split_factors(-np.inf)
    self.assertEqual((float(signal), float(leak)), (1.0, 0.0))
    with self.assertRaises(ValueError):
      device.split_factors(-20.0, 'field')

  def test_leak_swaps_rows_and_conserves_power(self):
    params = device.make_mzi_params().lossless()
    phases = device.PhasePair(0.8, 1.2)
    inputs = np.array([1.0, 0.5j])
    signal, leak = device.mzi_with_crosstalk(params, phases, inputs,
                                             x_db=-20.0)
    routed = device.mzi_transfer(params, phases) @ inputs
    np.testing.assert_allclose(np.abs(leak)**2, 0.01 * np.abs(routed[::-1])**2)
    np.testing.assert_allclose(np.abs(signal)**2 + np.abs(leak[::-1])**2,
                               np.abs(routed)**2, atol=1e-12)

  def test_bad_input_shape(self):
    with self.assertRaises(ValueError):
      device.mzi_with_crosstalk(device.make_mzi_params(),
                                device.PhasePair(0.0, 0.0), np.ones(3))


if __name__ == '__main__':
  absltest.main()
