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
"""Compact model of the 2x2 Mach-Zehnder interferometer.

The transfer matrix is the product DC2 · T_theta · DC1 · T_phi, where every
loss is applied as a field-amplitude factor derived from its dB value:

  DC(kappa)  = a_L · [[sqrt(1-kappa), j·sqrt(kappa)], [j·sqrt(kappa), sqrt(1-kappa)]]
  T_theta    = diag(a_p · a_m · e^{j·theta}, a_p)
  T_phi      = diag(a_m · e^{j·phi}, 1)

Input I1 (index 0) therefore crosses the phi shifter and pays an extra a_m.
Crosstalk is a Gaussian coefficient in dB whose mean moves linearly from the
cross-state value X_C at theta=0 to the bar-state value X_B at theta=pi.
"""

from __future__ import absolute_import
from __future__ import division

import collections

import gin
import numpy as np

from spnn_loss_crosstalk import numerics


_MZI_FIELDS = ['kappa1', 'kappa2', 'alpha_l_db', 'alpha_m_db',
               'alpha_p_db_per_cm', 'l_mzi_um', 'xb_db', 'xc_db',
               'xtalk_sigma_frac']

# Expected ranges of the loss parameters, (minimum, maximum).
EXPECTED_ALPHA_L_DB = (0.1, 0.4)
EXPECTED_ALPHA_M_DB = (0.1, 0.3)
EXPECTED_ALPHA_P_DB_PER_CM = (1.0, 4.0)

AMPLITUDE_MODELS = ('power', 'literal')

# Delivered power below this fraction of the injected power counts as none.
EXTINCTION_FLOOR = 1e-30


class MziParams(collections.namedtuple('MziParams', _MZI_FIELDS)):
  """Device-level loss and crosstalk parameters, all losses in dB."""

  __slots__ = ()

  def validate(self):
    """Checks the parameter invariants.

    Returns:
      self, so that construction can be chained.

    Raises:
      ValueError: if any invariant is violated.
    """
    for name in ('kappa1', 'kappa2'):
      value = getattr(self, name)
      if not 0.0 <= value <= 1.0:
        raise ValueError('Expected 0 <= {} <= 1, got {}'.format(name, value))
    for name in ('alpha_l_db', 'alpha_m_db', 'alpha_p_db_per_cm', 'l_mzi_um'):
      value = getattr(self, name)
      if not value >= 0.0 or np.isnan(value):
        raise ValueError('Expected {} >= 0, got {}'.format(name, value))
    if not self.xb_db <= self.xc_db <= 0.0:
      raise ValueError('Expected xb_db <= xc_db <= 0, got xb_db={}, '
                       'xc_db={}'.format(self.xb_db, self.xc_db))
    if not self.xtalk_sigma_frac >= 0.0:
      raise ValueError('Expected xtalk_sigma_frac >= 0, got {}'.format(
          self.xtalk_sigma_frac))
    return self

  @property
  def propagation_loss_db(self):
    """alpha_p · l_MZI, the per-MZI propagation loss in dB."""
    return self.alpha_p_db_per_cm * self.l_mzi_um * 1e-4

  def with_propagation_loss_db(self, loss_db):
    """Returns a copy whose alpha_p realizes `loss_db` per MZI."""
    if self.l_mzi_um <= 0:
      raise ValueError('Cannot set a propagation loss on a zero-length MZI.')
    return self._replace(alpha_p_db_per_cm=loss_db / (self.l_mzi_um * 1e-4))

  def lossless(self):
    """Copy with every loss set to 0 dB."""
    return self._replace(alpha_l_db=0.0, alpha_m_db=0.0, alpha_p_db_per_cm=0.0)

  @property
  def crosstalk_disabled(self):
    return self.xc_db == -np.inf


@gin.configurable
def make_mzi_params(kappa1=0.5,
                    kappa2=0.5,
                    alpha_l_db=0.1,
                    alpha_m_db=0.2,
                    alpha_p_db_per_cm=2.0,
                    l_mzi_um=300.0,
                    xb_db=-25.0,
                    xc_db=-18.0,
                    xtalk_sigma_frac=0.05):
  """Builds validated `MziParams`; the defaults are the reference table."""
  return MziParams(float(kappa1), float(kappa2), float(alpha_l_db),
                   float(alpha_m_db), float(alpha_p_db_per_cm),
                   float(l_mzi_um), float(xb_db), float(xc_db),
                   float(xtalk_sigma_frac)).validate()


class PhasePair(collections.namedtuple('PhasePair', ['theta', 'phi'])):
  """Phase settings of one MZI, theta in [0, pi] and phi in [0, 2pi]."""

  __slots__ = ()

  def validate(self):
    if not -1e-12 <= self.theta <= np.pi + 1e-12:
      raise ValueError('Expected 0 <= theta <= pi, got {}'.format(self.theta))
    if not -1e-12 <= self.phi <= 2 * np.pi + 1e-12:
      raise ValueError('Expected 0 <= phi <= 2pi, got {}'.format(self.phi))
    return self


def _coupler(kappa, a_l):
  t = np.sqrt(1.0 - kappa)
  k = 1j * np.sqrt(kappa)
  return a_l * np.array([[t, k], [k, t]], dtype=np.complex128)


def mzi_transfer_batch(params, thetas, phis):
  """Vectorized transfer matrices for many MZIs sharing `params`.

  Args:
    params: `MziParams`.
    thetas: array of shape (K,), radians.
    phis: array of shape (K,), radians.

  Returns:
    complex128 array of shape (K, 2, 2).
  """
  thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
  phis = np.atleast_1d(np.asarray(phis, dtype=np.float64))
  a_l = numerics.db_to_field(params.alpha_l_db)
  a_m = numerics.db_to_field(params.alpha_m_db)
  a_p = numerics.db_to_field(params.propagation_loss_db)
  dc1 = _coupler(params.kappa1, a_l)
  dc2 = _coupler(params.kappa2, a_l)

  k = thetas.shape[0]
  t_theta = np.empty((k, 2), dtype=np.complex128)
  t_theta[:, 0] = a_p * a_m * np.exp(1j * thetas)
  t_theta[:, 1] = a_p
  t_phi = np.empty((k, 2), dtype=np.complex128)
  t_phi[:, 0] = a_m * np.exp(1j * phis)
  t_phi[:, 1] = 1.0
  # M · diag(v) scales the columns of M.
  left = dc2[None, :, :] * t_theta[:, None, :]
  right = dc1[None, :, :] * t_phi[:, None, :]
  return left @ right


def mzi_transfer(params, phases):
  """2x2 loss-aware MZI transfer matrix.

  Args:
    params: `MziParams`.
    phases: `PhasePair`.

  Returns:
    complex128 array of shape (2, 2).
  """
  phases.validate()
  return mzi_transfer_batch(params, [phases.theta], [phases.phi])[0]


def port_insertion_loss(params, phases, in_port):
  """Insertion loss on each output when a unit field enters one input.

  Args:
    params: `MziParams`.
    phases: `PhasePair`.
    in_port: int, 1 or 2.

  Returns:
    (il_o1_db, il_o2_db); an output receiving less than `EXTINCTION_FLOOR` of
    the injected power reports +inf.
  """
  if in_port not in (1, 2):
    raise ValueError('Expected in_port in (1, 2), got {}'.format(in_port))
  column = mzi_transfer(params, phases)[:, in_port - 1]
  power = np.abs(column)**2
  power[power < EXTINCTION_FLOOR] = 0.0
  il = numerics.power_to_loss_db(power)
  return float(il[0]), float(il[1])


def output_insertion_loss(params, phases):
  """Insertion loss per output with unit power on both inputs.

  This is the per-output loss of the device sweep: the lossless device
  delivers exactly unit power to each output row, so the value is the excess
  loss of the row, −10·log10(|T_k1|^2 + |T_k2|^2).
  """
  t = mzi_transfer(params, phases)
  il = numerics.power_to_loss_db(np.sum(np.abs(t)**2, axis=1))
  return float(il[0]), float(il[1])


def crosstalk_mean_db(params, theta):
  """mu(theta) = (X_B − X_C)/pi · theta + X_C, in dB."""
  theta = np.asarray(theta, dtype=np.float64)
  if params.crosstalk_disabled:
    return np.full(theta.shape, -np.inf) if theta.ndim else -np.inf
  if params.xb_db == -np.inf:
    return np.where(theta > 0.0, -np.inf, params.xc_db)
  return (params.xb_db - params.xc_db) / np.pi * theta + params.xc_db


def crosstalk_coefficient(params, theta, rng=None):
  """Crosstalk coefficient X in dB at MZI state `theta`.

  Without `rng` the mean mu(theta) is returned exactly. With `rng` a Gaussian
  sample with standard deviation xtalk_sigma_frac·|mu(theta)| is drawn; draws
  above 0 dB are redrawn.

  Args:
    params: `MziParams`.
    theta: float or array, radians in [0, pi].
    rng: optional `np.random.Generator`.

  Returns:
    float or array (same shape as `theta`) of X in dB.
  """
  theta_arr = np.asarray(theta, dtype=np.float64)
  if np.any(theta_arr < -1e-12) or np.any(theta_arr > np.pi + 1e-12):
    raise ValueError('Expected 0 <= theta <= pi, got {}'.format(theta))
  mu = np.asarray(crosstalk_mean_db(params, theta_arr), dtype=np.float64)
  if rng is None or params.crosstalk_disabled:
    return float(mu) if mu.ndim == 0 else mu
  # A -inf mean stays -inf: the MZI does not leak in that state.
  x = np.array(mu, dtype=np.float64)
  finite = np.isfinite(mu)
  sigma = np.where(finite, params.xtalk_sigma_frac * np.abs(mu), 0.0)
  x[finite] = numerics.sample(rng, numerics.Gaussian(mu[finite],
                                                     sigma[finite]))
  bad = x > 0.0
  while np.any(bad):
    x[bad] = numerics.sample(rng, numerics.Gaussian(mu[bad], sigma[bad]))
    bad = x > 0.0
  return float(x) if x.ndim == 0 else x


def split_factors(x_db, amplitude_model='power'):
  """Field factors (signal, leak) of the crosstalk split.

  The default 'power' model uses sqrt(1 − X) and sqrt(X) so that the leaked
  power is X times the routed power; 'literal' uses the scalars (1 − X), X.
  """
  x_lin = numerics.db_to_linear(x_db)
  if amplitude_model == 'power':
    return np.sqrt(1.0 - x_lin), np.sqrt(x_lin)
  if amplitude_model == 'literal':
    return 1.0 - x_lin, x_lin
  raise ValueError('Expected amplitude_model in {}, got {}'.format(
      AMPLITUDE_MODELS, amplitude_model))


def mzi_with_crosstalk(params, phases, inputs, rng=None, x_db=None,
                       amplitude_model='power'):
  """MZI output split into the routed signal and the leaked crosstalk.

  The leak uses the row-swapped transfer matrix, so the field routed to one
  output leaks into the other.

  Args:
    params: `MziParams`.
    phases: `PhasePair`.
    inputs: complex 2-vector of input fields.
    rng: optional generator for the crosstalk draw.
    x_db: optional crosstalk coefficient in dB overriding the draw; -inf
      disables crosstalk.
    amplitude_model: 'power' or 'literal', see `split_factors`.

  Returns:
    (signal_out, leak_out), complex 2-vectors.
  """
  inputs = np.asarray(inputs, dtype=np.complex128)
  if inputs.shape != (2,):
    raise ValueError('Expected a 2-vector of inputs, got {}'.format(
        inputs.shape))
  if x_db is None:
    x_db = crosstalk_coefficient(params, phases.theta, rng)
  routed = mzi_transfer(params, phases) @ inputs
  signal_factor, leak_factor = split_factors(x_db, amplitude_model)
  return signal_factor * routed, leak_factor * routed[::-1]
