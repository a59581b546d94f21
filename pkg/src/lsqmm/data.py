"""Color images as pure quaternion matrices, manifests, noise, folds, synthetic data."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ParameterError
from .quaternion import QMatrix


class ManifestError(ValueError):
    """Manifest is malformed or fails validation."""


class UnsupportedFormatError(ValueError):
    """Raster decodes but is not in an RGB color space."""


@dataclass(frozen=True)
class LabeledSample:
    X: QMatrix
    y: int
    source_id: str


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[tuple[str, int], ...]
    target_size: tuple[int, int]
    name: str
    root: str = "."

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.root) / p


@dataclass(frozen=True)
class NoiseSpec:
    ratio: float
    seed: int = 0

    def __post_init__(self):
        if not self.ratio >= 0:
            raise ParameterError(f"noise ratio must be nonnegative, got {self.ratio}")


_RGB_MODES = {"RGB", "RGBA", "P", "PA"}


def parse_size(text: str) -> tuple[int, int]:
    """'MxN' -> (M, N)."""
    try:
        m, n = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ParameterError(f"size must look like MxN, got {text!r}") from None
    if m < 1 or n < 1:
        raise ParameterError(f"size must be positive, got {text!r}")
    return m, n


def image_to_qmatrix(img: Image.Image, target_size: tuple[int, int] | None = None) -> QMatrix:
    if img.mode not in _RGB_MODES:
        raise UnsupportedFormatError(f"unsupported color mode {img.mode!r}; expected RGB(A)")
    rgb = img.convert("RGB")
    m, n = target_size if target_size is not None else (rgb.height, rgb.width)
    planes = np.zeros((4, m, n))
    for c, band in enumerate(rgb.split()):
        band = band.convert("F")
        if band.size != (n, m):
            band = band.resize((n, m), Image.BILINEAR)
        planes[c + 1] = np.asarray(band, dtype=np.float64) / 255.0
    return QMatrix(planes)


def load_image(path, target_size: tuple[int, int] | None = None) -> QMatrix:
    """Decode a PNG/JPEG into R i + G j + B k with channels scaled to [0, 1]."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            return image_to_qmatrix(img, target_size)
    except FileNotFoundError:
        raise FileNotFoundError(f"image not found: {path}") from None
    except (UnidentifiedImageError, OSError) as exc:
        raise OSError(f"cannot decode image {path}: {exc}") from exc


def qmatrix_to_image(X: QMatrix) -> Image.Image:
    rgb = np.clip(np.round(X.planes[1:].transpose(1, 2, 0) * 255.0), 0, 255).astype(np.uint8)
    return Image.fromarray(rgb, mode="RGB")


def read_manifest(path, target_size: tuple[int, int], name: str | None = None) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"manifest not found: {path}") from None
    rows = csv.reader(text.splitlines())
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != ["path", "label"]:
        raise ManifestError(f"{path}:1: expected header 'path,label', got {header!r}")
    entries = []
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise ManifestError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        label = row[1].strip()
        if label not in ("-1", "1"):
            raise ManifestError(f"{path}:{lineno}: label must be -1 or 1, got {label!r}")
        entries.append((row[0].strip(), int(label)))
    if not entries:
        raise ManifestError(f"{path}: manifest has no entries")
    return DatasetManifest(tuple(entries), tuple(target_size), name or path.stem, str(path.parent))


def load_manifest(path, target_size: tuple[int, int], name: str | None = None
                  ) -> tuple[DatasetManifest, list[LabeledSample]]:
    """Read a manifest and load every image in order, failing on the first bad entry."""
    manifest = read_manifest(path, target_size, name)
    samples = []
    for idx, (entry, label) in enumerate(manifest.entries):
        try:
            X = load_image(manifest.resolve(entry), manifest.target_size)
        except OSError as exc:
            raise type(exc)(f"manifest entry {idx}: {exc}") from exc
        except ValueError as exc:
            raise UnsupportedFormatError(f"manifest entry {idx} ({entry}): {exc}") from exc
        samples.append(LabeledSample(X, label, entry))
    return manifest, samples


def write_manifest(path, entries: Sequence[tuple[str, int]]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "label"])
        for p, label in entries:
            w.writerow([p, str(int(label))])


def export_dataset(samples: Sequence[LabeledSample], directory, name: str = "dataset") -> Path:
    """Write samples as 8-bit PNGs plus ``<name>.csv``; values are clipped to [0, 1]."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for idx, s in enumerate(samples):
        fname = f"{name}_{idx:05d}.png"
        qmatrix_to_image(s.X).save(directory / fname)
        entries.append((fname, s.y))
    manifest = directory / f"{name}.csv"
    write_manifest(manifest, entries)
    return manifest


def derive_seed(seed: int, *path: int) -> int:
    """Independent 64-bit seed for a (seed, index, ...) stream."""
    ss = np.random.SeedSequence([int(seed), *(int(p) for p in path)])
    return int(ss.generate_state(1, np.uint64)[0])


def add_noise(X: QMatrix, spec: NoiseSpec, clip: bool = True) -> QMatrix:
    """X + R * std(imaginary entries of X) * G on the i, j, k planes, clipped to [0, 1]."""
    if spec.ratio == 0:
        return X
    imag = X.planes[1:]
    scale = spec.ratio * float(np.std(imag))
    rng = np.random.default_rng(spec.seed)
    planes = X.planes.copy()
    planes[1:] = imag + scale * rng.standard_normal(imag.shape)
    if clip:
        planes[1:] = np.clip(planes[1:], 0.0, 1.0)
    return QMatrix(planes)


def noisy_copy(samples: Sequence[LabeledSample], ratio: float, seed: int) -> list[LabeledSample]:
    """Noise every sample with its own seed stream derived from (seed, index)."""
    return [
        LabeledSample(add_noise(s.X, NoiseSpec(ratio, derive_seed(seed, idx))), s.y, s.source_id)
        for idx, s in enumerate(samples)
    ]


def kfold_split(n: int, k: int, seed: int, labels=None) -> list[np.ndarray]:
    """Seeded k-fold partition of range(n); stratified when labels are given."""
    if not 2 <= k <= n:
        raise ParameterError(f"need 2 <= k <= N, got k={k}, N={n}")
    rng = np.random.default_rng(seed)
    if labels is None:
        order = rng.permutation(n)
    else:
        labels = np.asarray(labels)
        if labels.shape != (n,):
            raise ParameterError(f"expected {n} labels, got {labels.shape}")
        order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in np.unique(labels)])
    folds = [order[f::k] for f in range(k)]
    return [np.sort(f) for f in folds]


def random_lowrank_pure(m: int, n: int, rank: int, rng: np.random.Generator) -> QMatrix:
    """Sum of ``rank`` terms a b^T p with nonnegative real a, b and a pure color p.

    Entries stay in [0, 1]; the quaternion rank is ``rank`` almost surely.
    """
    planes = np.zeros((4, m, n))
    for _ in range(rank):
        a = rng.uniform(0.0, 1.0, m)
        b = rng.uniform(0.0, 1.0, n)
        color = rng.uniform(0.0, 1.0, 3)
        planes[1:] += color[:, None, None] * np.outer(a, b)[None]
    return QMatrix(planes / rank)


def _check_synth(n_per_class, m, n, rank, sigma):
    if n_per_class < 1 or m < 1 or n < 1:
        raise ParameterError("sizes must be positive")
    if not 1 <= rank <= min(m, n):
        raise ParameterError(f"rank must be in [1, min(m, n)], got {rank}")
    if not sigma >= 0:
        raise ParameterError(f"sigma must be nonnegative, got {sigma}")


def _draw(means: dict[int, QMatrix], n_per_class: int, sigma: float, rng, tag: str) -> list[LabeledSample]:
    out = []
    for label, mean in means.items():
        for i in range(n_per_class):
            planes = mean.planes.copy()
            if sigma > 0:
                planes[1:] += sigma * rng.standard_normal(planes[1:].shape)
            out.append(LabeledSample(QMatrix(planes), label, f"{tag}:{'+' if label > 0 else '-'}{i}"))
    return out


def synth_lowrank(n_per_class: int, m: int, n: int, rank: int, sigma: float, seed: int
                  ) -> list[LabeledSample]:
    """Two classes around independent rank-``rank`` pure means plus Gaussian noise."""
    _check_synth(n_per_class, m, n, rank, sigma)
    s_pos, s_neg, s_noise = np.random.SeedSequence(seed).spawn(3)
    means = {
        1: random_lowrank_pure(m, n, rank, np.random.default_rng(s_pos)),
        -1: random_lowrank_pure(m, n, rank, np.random.default_rng(s_neg)),
    }
    return _draw(means, n_per_class, sigma, np.random.default_rng(s_noise), "synth")


def synth_contrast(n_per_class: int, m: int, n: int, rank: int, sigma: float, contrast: float,
                   seed: int) -> list[LabeledSample]:
    """Shared low-rank background; classes differ by +-contrast/2 along a rank-1 pattern.

    The pattern has unit Frobenius norm, so ``contrast`` is the distance
    between the class means.
    """
    _check_synth(n_per_class, m, n, rank, sigma)
    s_bg, s_pat, s_noise = np.random.SeedSequence(seed).spawn(3)
    background = random_lowrank_pure(m, n, rank, np.random.default_rng(s_bg))
    rng = np.random.default_rng(s_pat)
    pattern = np.zeros((4, m, n))
    pattern[1:] = rng.standard_normal(3)[:, None, None] * np.outer(rng.standard_normal(m), rng.standard_normal(n))
    pattern /= np.linalg.norm(pattern)
    half = 0.5 * contrast * pattern
    means = {1: QMatrix(background.planes + half), -1: QMatrix(background.planes - half)}
    return _draw(means, n_per_class, sigma, np.random.default_rng(s_noise), "contrast")


def split_xy(samples: Sequence[LabeledSample]) -> tuple[list[QMatrix], np.ndarray]:
    return [s.X for s in samples], np.array([s.y for s in samples], dtype=np.int64)
