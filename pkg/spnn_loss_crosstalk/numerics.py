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
"""Complex linear algebra, spectral and random-sampling substrate.

Everything downstream works on `np.ndarray` objects of dtype complex128 for
field-transfer matrices and float64 for powers. Unit conversions between the
dB values of the device tables and the amplitude factors used in transfer
matrices all go through the helpers at the bottom of this module.
"""

from __future__ import absolute_import
from __future__ import division

import collections

from absl import logging
import numpy as np


class ConvergenceError(RuntimeError):
  """Raised when an iterative decomposition fails to converge."""

  def __init__(self, message, residual, sweeps):
    super(ConvergenceError, self).__init__(
        '{} (residual={:.3e}, sweeps={})'.format(message, residual, sweeps))
    self.residual = residual
    self.sweeps = sweeps


#-------------------------------------------------------------------------------
# Complex matrices
#-------------------------------------------------------------------------------


def as_complex_matrix(a, name='matrix'):
  """Validates and converts `a` to a 2-D complex128 array.

  Args:
    a: array-like, the matrix entries.
    name: str, used in error messages.

  Returns:
    A complex128 `np.ndarray` of shape (rows, cols).

  Raises:
    ValueError: if `a` is not 2-D, is empty or has non-finite entries.
  """
  m = np.asarray(a, dtype=np.complex128)
  if m.ndim != 2:
    raise ValueError('Expected {} to be 2-D, got shape {}'.format(
        name, m.shape))
  if m.size == 0:
    raise ValueError('Expected {} to be non-empty, got shape {}'.format(
        name, m.shape))
  if not np.all(np.isfinite(m)):
    raise ValueError('Expected {} to have finite entries.'.format(name))
  return m


def matmul(a, b):
  """Complex matrix product with an explicit dimension check.

  Args:
    a: array-like of shape (n, k).
    b: array-like of shape (k, m) or (k,).

  Returns:
    The product `a @ b` as complex128.

  Raises:
    ValueError: on a dimension mismatch.
  """
  a = as_complex_matrix(a, 'a')
  b = np.asarray(b, dtype=np.complex128)
  if b.ndim not in (1, 2) or a.shape[1] != b.shape[0]:
    raise ValueError('Dimension mismatch: a is {}, b is {}'.format(
        a.shape, b.shape))
  return a @ b


def is_unitary(m, tol=1e-10):
  """Returns True iff max |m·m^H − I| < tol.

  Raises:
    ValueError: if `m` is not square.
  """
  m = as_complex_matrix(m)
  if m.shape[0] != m.shape[1]:
    raise ValueError('Expected a square matrix, got {}'.format(m.shape))
  return unitarity_residual(m) < tol


def unitarity_residual(m):
  """Max-entry distance of m·m^H from the identity."""
  m = np.asarray(m, dtype=np.complex128)
  return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))


def svd(w, method='lapack', max_sweeps=100, tol=1e-12):
  """Singular value decomposition W = U·diag(S)·Vh of a square matrix.

  LAPACK is the default. The one-sided Jacobi method meets the same
  reconstruction contract and is selected with `method='jacobi'` here or
  with `svd_method` in `mesh.compile_layer` and the experiment document.

  Args:
    w: array-like, square complex matrix.
    method: str, 'lapack' (numpy.linalg, default) or 'jacobi' (one-sided
      Jacobi).
    max_sweeps: int, sweep cap for the Jacobi method.
    tol: float, rotation threshold for the Jacobi method.

  Returns:
    u: complex128 unitary matrix.
    s: float64 vector, nonnegative and sorted descending.
    vh: complex128 unitary matrix.

  Raises:
    ValueError: if `w` is not square or `method` is unknown.
    ConvergenceError: if the decomposition does not converge or does not
      reconstruct `w` to 1e-9 (scaled by the norm of `w`).
  """
  w = as_complex_matrix(w, 'w')
  if w.shape[0] != w.shape[1]:
    raise ValueError('Expected a square weight matrix, got {}'.format(w.shape))
  if method == 'lapack':
    try:
      u, s, vh = np.linalg.svd(w)
    except np.linalg.LinAlgError as e:
      raise ConvergenceError('LAPACK SVD failed: {}'.format(e), np.inf, 0)
  elif method == 'jacobi':
    u, s, vh = _jacobi_svd(w, max_sweeps, tol)
  else:
    raise ValueError('Expected method in (lapack, jacobi), got {}'.format(
        method))

  residual = np.linalg.norm(u @ np.diag(s) @ vh - w)
  if residual > 1e-9 * max(1.0, np.linalg.norm(w)):
    raise ConvergenceError('SVD reconstruction check failed', residual, 0)
  return u, s, vh


def _jacobi_svd(w, max_sweeps, tol):
  """One-sided (Hestenes) Jacobi SVD on the columns of `w`."""
  n = w.shape[0]
  a = w.copy()
  v = np.eye(n, dtype=np.complex128)
  off = 0.0
  for sweep in range(1, max_sweeps + 1):
    off = 0.0
    for i in range(n - 1):
      for j in range(i + 1, n):
        alpha = np.vdot(a[:, i], a[:, i]).real
        beta = np.vdot(a[:, j], a[:, j]).real
        gamma = np.vdot(a[:, i], a[:, j])
        g = abs(gamma)
        if g == 0.0 or alpha == 0.0 or beta == 0.0:
          continue
        off = max(off, g / np.sqrt(alpha * beta))
        if g / np.sqrt(alpha * beta) < tol:
          continue
        phase = gamma / g
        zeta = (beta - alpha) / (2.0 * g)
        t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
        c = 1.0 / np.sqrt(1.0 + t * t)
        s = c * t
        # Right-multiply by [[c, s·e^{jψ}], [−s·e^{−jψ}, c]].
        ai, aj = a[:, i].copy(), a[:, j]
        a[:, i] = c * ai - s * np.conj(phase) * aj
        a[:, j] = s * phase * ai + c * aj
        vi, vj = v[:, i].copy(), v[:, j]
        v[:, i] = c * vi - s * np.conj(phase) * vj
        v[:, j] = s * phase * vi + c * vj
    if off < tol:
      logging.debug('Jacobi SVD converged after %d sweeps', sweep)
      break
  else:
    raise ConvergenceError('Jacobi SVD did not converge', off, max_sweeps)

  s = np.linalg.norm(a, axis=0)
  order = np.argsort(-s, kind='stable')
  s = s[order]
  a = a[:, order]
  v = v[:, order]
  u = np.zeros_like(a)
  live = s > s[0] * 1e-15 if s[0] > 0 else np.zeros(n, dtype=bool)
  u[:, live] = a[:, live] / s[live]
  u = _complete_orthonormal(u, live)
  s[~live] = 0.0
  return u, s, v.conj().T


def _complete_orthonormal(u, live):
  """Fills the columns of `u` not flagged in `live` to make `u` unitary."""
  n = u.shape[0]
  basis = [u[:, k] for k in range(n) if live[k]]
  candidates = iter(np.eye(n, dtype=np.complex128))
  for k in range(n):
    if live[k]:
      continue
    while True:
      e = next(candidates)
      for b in basis:
        e = e - np.vdot(b, e) * b
      norm = np.linalg.norm(e)
      if norm > 1e-8:
        break
    u[:, k] = e / norm
    basis.append(u[:, k])
  return u


#-------------------------------------------------------------------------------
# Spectral
#-------------------------------------------------------------------------------


def _next_power_of_two(n):
  return 1 << max(0, int(n - 1).bit_length())


def pad_to_power_of_two(image):
  """Zero-pads a 2-D real image to a square with a power-of-two side."""
  image = np.asarray(image, dtype=np.float64)
  if image.ndim != 2 or image.size == 0:
    raise ValueError('Expected a non-empty 2-D image, got shape {}'.format(
        image.shape))
  side = _next_power_of_two(max(image.shape))
  padded = np.zeros((side, side), dtype=np.float64)
  padded[:image.shape[0], :image.shape[1]] = image
  return padded


def fft2d(image):
  """2-D discrete Fourier transform of a (zero-padded) real image.

  Args:
    image: array-like real matrix. Non-square or non power-of-two images are
      zero padded to the next square power-of-two side.

  Returns:
    complex128 spectrum of shape (side, side), unnormalized forward transform.

  Raises:
    ValueError: if the image is empty or not 2-D.
  """
  return np.fft.fft2(pad_to_power_of_two(image))


def ifft2d(spectrum):
  """Inverse of `fft2d` (returns a complex array)."""
  spectrum = as_complex_matrix(spectrum, 'spectrum')
  return np.fft.ifft2(spectrum)


#-------------------------------------------------------------------------------
# Random streams
#-------------------------------------------------------------------------------


Gaussian = collections.namedtuple('Gaussian', ['mu', 'sigma'])
Uniform = collections.namedtuple('Uniform', ['low', 'high'])
HalfNormal = collections.namedtuple('HalfNormal', ['loc', 'sigma'])


def make_rng(seed):
  """Returns a reproducible `np.random.Generator` for a 64-bit seed."""
  return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(seed, count):
  """Returns `count` independent generators derived from a master seed.

  Streams depend only on (seed, index), never on scheduling order.
  """
  children = np.random.SeedSequence(seed).spawn(count)
  return [np.random.Generator(np.random.PCG64(c)) for c in children]


def derive_seed(rng):
  """Draws a 63-bit child seed from a generator."""
  return int(rng.integers(0, 2**63 - 1))


def sample(rng, dist, size=None):
  """Draws from a Gaussian, Uniform or HalfNormal distribution.

  Args:
    rng: `np.random.Generator`.
    dist: one of `Gaussian(mu, sigma)`, `Uniform(low, high)`,
      `HalfNormal(loc, sigma)`. HalfNormal draws loc + |N(0, sigma)|.
    size: optional output shape.

  Returns:
    A float or an array of shape `size`.

  Raises:
    ValueError: on a negative sigma, low > high or an unknown distribution.
  """
  if isinstance(dist, Gaussian):
    if np.any(np.asarray(dist.sigma) < 0):
      raise ValueError('Expected sigma >= 0, got {}'.format(dist.sigma))
    return rng.normal(dist.mu, dist.sigma, size)
  if isinstance(dist, Uniform):
    if np.any(np.asarray(dist.low) > np.asarray(dist.high)):
      raise ValueError('Expected low <= high, got {} > {}'.format(
          dist.low, dist.high))
    return rng.uniform(dist.low, dist.high, size)
  if isinstance(dist, HalfNormal):
    if np.any(np.asarray(dist.sigma) < 0):
      raise ValueError('Expected sigma >= 0, got {}'.format(dist.sigma))
    return dist.loc + np.abs(rng.normal(0.0, dist.sigma, size))
  raise ValueError('Unknown distribution {!r}'.format(dist))


#-------------------------------------------------------------------------------
# Unit conversions
#-------------------------------------------------------------------------------


def db_to_field(loss_db):
  """Field-amplitude transmission 10^(−loss_db/20) of a loss in dB."""
  return np.power(10.0, -np.asarray(loss_db, dtype=np.float64) / 20.0)


def db_to_power(loss_db):
  """Power transmission 10^(−loss_db/10) of a loss in dB."""
  return np.power(10.0, -np.asarray(loss_db, dtype=np.float64) / 10.0)


def power_to_loss_db(ratio):
  """Loss in dB of a power transmission ratio; +inf for zero power."""
  ratio = np.asarray(ratio, dtype=np.float64)
  with np.errstate(divide='ignore'):
    return -10.0 * np.log10(ratio)


def db_to_linear(x_db):
  """Linear power ratio of a (signed) dB coefficient, e.g. −20 dB → 0.01."""
  return np.power(10.0, np.asarray(x_db, dtype=np.float64) / 10.0)


def dbm_to_mw(p_dbm):
  return np.power(10.0, np.asarray(p_dbm, dtype=np.float64) / 10.0)


def mw_to_dbm(p_mw):
  """mW to dBm; zero power maps to −inf."""
  p_mw = np.asarray(p_mw, dtype=np.float64)
  with np.errstate(divide='ignore'):
    return 10.0 * np.log10(p_mw)
