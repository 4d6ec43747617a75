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
"""Image datasets and their complex Fourier feature vectors."""

from __future__ import absolute_import
from __future__ import division

import collections
import gzip
import hashlib
import struct

from absl import logging
import numpy as np

from spnn_loss_crosstalk import numerics


FEATURIZER_VERSION = 'fft2d-lowfreq-block-l2/1'

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

_GZIP_MAGIC = b'\x1f\x8b'


class IdxFormatError(ValueError):
  """Raised on a malformed IDX file."""


RawImageSet = collections.namedtuple('RawImageSet',
                                     ['images', 'labels', 'digests'])


class FeatureDataset(collections.namedtuple(
    'FeatureDataset', ['features', 'labels', 'n_classes', 'degenerate',
                       'provenance'])):
  """Complex feature vectors with their labels.

  Attributes:
    features: complex128 array (S, N), unit L2 norm per row unless degenerate.
    labels: int64 array (S,).
    n_classes: int.
    degenerate: bool array (S,), rows whose image had no spectral content in
      the kept block.
    provenance: dict with the source, file digests and featurizer version.
  """

  __slots__ = ()

  def validate(self):
    if self.features.ndim != 2:
      raise ValueError('Expected features of shape (S, N), got {}'.format(
          self.features.shape))
    if self.labels.shape != (self.features.shape[0],):
      raise ValueError('Expected {} labels, got {}'.format(
          self.features.shape[0], self.labels.shape))
    if self.labels.size and (self.labels.min() < 0 or
                             self.labels.max() >= self.n_classes):
      raise ValueError('Expected labels in [0, {}), got [{}, {}]'.format(
          self.n_classes, self.labels.min(), self.labels.max()))
    return self

  @property
  def size(self):
    return self.features.shape[0]

  def subset(self, indices):
    return self._replace(features=self.features[indices],
                         labels=self.labels[indices],
                         degenerate=self.degenerate[indices])


#-------------------------------------------------------------------------------
# IDX files
#-------------------------------------------------------------------------------


def _read_bytes(path):
  with open(path, 'rb') as f:
    data = f.read()
  if data[:2] == _GZIP_MAGIC:
    data = gzip.decompress(data)
  return data


def _digest(data):
  return hashlib.sha256(data).hexdigest()


def parse_idx_images(data):
  """Decodes an IDX3 image payload into floats scaled to [0, 1].

  Raises:
    IdxFormatError: on an empty payload, a bad magic number or truncation.
  """
  if not data:
    raise IdxFormatError('Empty image file.')
  if len(data) < 16:
    raise IdxFormatError('Truncated image header: {} bytes'.format(len(data)))
  magic, count, rows, cols = struct.unpack('>IIII', data[:16])
  if magic != IMAGE_MAGIC:
    raise IdxFormatError('Expected image magic 0x{:08x}, got 0x{:08x}'.format(
        IMAGE_MAGIC, magic))
  expected = count * rows * cols
  if len(data) - 16 < expected:
    raise IdxFormatError('Truncated image payload: expected {} bytes, got '
                         '{}'.format(expected, len(data) - 16))
  pixels = np.frombuffer(data, dtype=np.uint8, count=expected, offset=16)
  return pixels.reshape(count, rows, cols).astype(np.float64) / 255.0


def parse_idx_labels(data):
  """Decodes an IDX1 label payload.

  Raises:
    IdxFormatError: on an empty payload, a bad magic number or truncation.
  """
  if not data:
    raise IdxFormatError('Empty label file.')
  if len(data) < 8:
    raise IdxFormatError('Truncated label header: {} bytes'.format(len(data)))
  magic, count = struct.unpack('>II', data[:8])
  if magic != LABEL_MAGIC:
    raise IdxFormatError('Expected label magic 0x{:08x}, got 0x{:08x}'.format(
        LABEL_MAGIC, magic))
  if len(data) - 8 < count:
    raise IdxFormatError('Truncated label payload: expected {} bytes, got '
                         '{}'.format(count, len(data) - 8))
  return np.frombuffer(data, dtype=np.uint8, count=count,
                       offset=8).astype(np.int64)


def ingest_idx(images_path, labels_path):
  """Loads an IDX image/label pair; gzip-compressed files are accepted.

  Args:
    images_path: str, IDX3 file (magic 0x00000803).
    labels_path: str, IDX1 file (magic 0x00000801).

  Returns:
    A `RawImageSet` with images (S, rows, cols) in [0, 1], labels (S,) and
    the sha256 digests of the decompressed files.

  Raises:
    IdxFormatError: on malformed files or mismatched counts.
  """
  image_bytes = _read_bytes(images_path)
  label_bytes = _read_bytes(labels_path)
  images = parse_idx_images(image_bytes)
  labels = parse_idx_labels(label_bytes)
  if images.shape[0] != labels.shape[0]:
    raise IdxFormatError('Count mismatch: {} images, {} labels'.format(
        images.shape[0], labels.shape[0]))
  logging.info('Read %d images of %dx%d from %s', images.shape[0],
               images.shape[1], images.shape[2], images_path)
  return RawImageSet(images, labels, {images_path: _digest(image_bytes),
                                      labels_path: _digest(label_bytes)})


def encode_idx_images(images):
  """IDX3 bytes of uint8 images; the inverse of `parse_idx_images`."""
  images = np.asarray(images, dtype=np.uint8)
  return struct.pack('>IIII', IMAGE_MAGIC, *images.shape) + images.tobytes()


def encode_idx_labels(labels):
  labels = np.asarray(labels, dtype=np.uint8)
  return struct.pack('>II', LABEL_MAGIC, labels.shape[0]) + labels.tobytes()


#-------------------------------------------------------------------------------
# Features
#-------------------------------------------------------------------------------


def block_shape(n_features):
  """(rows, cols) of the kept spectrum block.

  k x k for n = k*k, otherwise the most nearly square factorization, e.g.
  8 -> (2, 4).
  """
  if n_features < 1:
    raise ValueError('Expected n_features >= 1, got {}'.format(n_features))
  rows = int(np.floor(np.sqrt(n_features)))
  while n_features % rows:
    rows -= 1
  return rows, n_features // rows


def fft_features(image, n_features):
  """Complex feature vector from the low-frequency corner of the 2-D FFT.

  Args:
    image: real 2-D array.
    n_features: int; a perfect square k*k keeps a k x k block, other sizes
      keep the block given by `block_shape`.

  Returns:
    complex128 vector of length `n_features`: the non-negative frequency
    corner of the spectrum, flattened row-major and scaled to unit L2 norm.
    An image with no content in that block yields zeros.
  """
  rows, cols = block_shape(n_features)
  image = np.asarray(image, dtype=np.float64)
  if image.ndim == 2 and max(image.shape) < cols:
    image = np.pad(image, ((0, cols - image.shape[0]),
                           (0, cols - image.shape[1])))
  block = numerics.fft2d(image)[:rows, :cols].reshape(-1)
  norm = np.linalg.norm(block)
  if norm == 0.0:
    return np.zeros(n_features, dtype=np.complex128)
  return block / norm


def featurize(images, labels, n_features, n_classes, provenance):
  """Builds a validated `FeatureDataset` from raw images."""
  features = np.stack([fft_features(img, n_features) for img in images])
  degenerate = np.linalg.norm(features, axis=1) == 0.0
  if np.any(degenerate):
    logging.warning('%d of %d samples are degenerate (zero spectrum block)',
                    int(np.sum(degenerate)), degenerate.size)
  provenance = dict(provenance)
  provenance.update(featurizer=FEATURIZER_VERSION, n_features=n_features)
  return FeatureDataset(features, np.asarray(labels, dtype=np.int64),
                        int(n_classes), degenerate, provenance).validate()


#-------------------------------------------------------------------------------
# Synthetic digits
#-------------------------------------------------------------------------------


_GLYPHS = [
    ['.###.', '#...#', '#..##', '#.#.#', '##..#', '#...#', '.###.'],
    ['..#..', '.##..', '..#..', '..#..', '..#..', '..#..', '.###.'],
    ['.###.', '#...#', '....#', '...#.', '..#..', '.#...', '#####'],
    ['#####', '...#.', '..#..', '...#.', '....#', '#...#', '.###.'],
    ['...#.', '..##.', '.#.#.', '#..#.', '#####', '...#.', '...#.'],
    ['#####', '#....', '####.', '....#', '....#', '#...#', '.###.'],
    ['..##.', '.#...', '#....', '####.', '#...#', '#...#', '.###.'],
    ['#####', '....#', '...#.', '..#..', '.#...', '.#...', '.#...'],
    ['.###.', '#...#', '#...#', '.###.', '#...#', '#...#', '.###.'],
    ['.###.', '#...#', '#...#', '.####', '....#', '...#.', '.##..'],
]

SYNTHETIC_SIDE = 8


def _glyph(digit):
  return np.array([[c == '#' for c in row] for row in _GLYPHS[digit]],
                  dtype=np.float64)


def synthetic_digits(n_samples, rng, n_classes=10, pixel_noise=0.1):
  """Desk-scale 8x8 digit images.

  Each sample is a 5x7 glyph of its digit placed with a random shift of up
  to one pixel, plus Gaussian pixel noise, clipped to [0, 1].

  Args:
    n_samples: int >= 1.
    rng: `np.random.Generator`.
    n_classes: int in [2, 10]; only the first `n_classes` digits are drawn.
    pixel_noise: float, noise standard deviation.

  Returns:
    (images (S, 8, 8), labels (S,)).
  """
  if not 2 <= n_classes <= 10:
    raise ValueError('Expected 2 <= n_classes <= 10, got {}'.format(n_classes))
  if n_samples < 1:
    raise ValueError('Expected n_samples >= 1, got {}'.format(n_samples))
  glyphs = [_glyph(d) for d in range(n_classes)]
  labels = rng.integers(0, n_classes, size=n_samples)
  rows = rng.integers(0, 2, size=n_samples)
  cols = rng.integers(0, 4, size=n_samples)
  images = np.zeros((n_samples, SYNTHETIC_SIDE, SYNTHETIC_SIDE))
  for s in range(n_samples):
    r, c = rows[s], cols[s]
    images[s, r:r + 7, c:c + 5] = glyphs[labels[s]]
  noise = numerics.sample(rng, numerics.Gaussian(0.0, pixel_noise),
                          size=images.shape)
  return np.clip(images + noise, 0.0, 1.0), labels.astype(np.int64)


def load_dataset(cfg, rng):
  """The dataset described by an `ExperimentConfig`.

  Classes are restricted to the first min(10, N) digits, since the readout
  compares the first `n_classes` output ports.
  """
  n_classes = min(10, cfg.n)
  if cfg.dataset == 'synthetic':
    images, labels = synthetic_digits(cfg.n_samples, rng, n_classes,
                                      cfg.pixel_noise)
    provenance = {'source': 'synthetic', 'pixel_noise': cfg.pixel_noise,
                  'digests': {}}
  else:
    raw = ingest_idx(cfg.images_path, cfg.labels_path)
    keep = np.nonzero(raw.labels < n_classes)[0][:cfg.n_samples]
    images, labels = raw.images[keep], raw.labels[keep]
    provenance = {'source': 'idx', 'digests': raw.digests}
  return featurize(images, labels, cfg.n, n_classes, provenance)


def train_test_split(dataset, test_fraction, rng):
  """Random split into (train, test) `FeatureDataset`s."""
  if not 0.0 < test_fraction < 1.0:
    raise ValueError('Expected 0 < test_fraction < 1, got {}'.format(
        test_fraction))
  order = rng.permutation(dataset.size)
  n_test = max(1, int(round(test_fraction * dataset.size)))
  return dataset.subset(order[n_test:]), dataset.subset(order[:n_test])
