"""File formats: numeric CSV for features/probabilities/labels, JSON for
embeddings, SVG for quick scatter plots, CSV for metric tables.

CSV is an RFC-4180 subset: comma separator, '.' decimal, optional single
header row (auto-detected by a non-numeric first row). Loaders report the
1-based line number on any bad cell. Embedding JSON keeps full float
precision so save -> load round-trips bit-exactly.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .errors import EmptyFile, ParseError
from .types import ClassProbabilityMatrix, EmbeddingState, FeatureMatrix

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]
UNTRAINED_COLOR = "#000000"


def _parse_numeric_csv(text: str, source: str) -> tuple[list[str] | None, np.ndarray]:
    """Returns (header or None, data matrix); raises located ParseError."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise EmptyFile(f"{source}: no rows")

    def parse_row(cells, line):
        out = []
        for col, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(line, f"cannot parse {cell!r} in column {col}") from None
            if not np.isfinite(value):
                raise ParseError(line, f"non-finite value {cell!r} in column {col}")
            out.append(value)
        return out

    def is_numeric_row(cells) -> bool:
        for cell in cells:
            try:
                float(cell)
            except ValueError:
                return False
        return True

    header = None
    data = []
    if is_numeric_row(rows[0]):
        data.append(parse_row(rows[0], 1))
    else:
        header = [c.strip() for c in rows[0]]
    width = len(rows[0])
    for offset, cells in enumerate(rows[1:]):
        line = offset + 2
        if len(cells) != width:
            raise ParseError(line, f"expected {width} columns, got {len(cells)}")
        data.append(parse_row(cells, line))
    if not data:
        raise EmptyFile(f"{source}: header but no data rows")
    return header, np.asarray(data, dtype=np.float64)


def _read_text(path) -> str:
    with open(path, newline="") as fh:
        return fh.read()


def parse_features(text: str, standardize: bool = False, source: str = "<payload>") -> FeatureMatrix:
    _, data = _parse_numeric_csv(text, source)
    if standardize:
        mean = data.mean(axis=0)
        std = data.std(axis=0)
        scaled = np.where(std > 0.0, (data - mean) / np.where(std > 0.0, std, 1.0), 0.0)
        data = scaled
    return FeatureMatrix.validate(data)


def load_features(path, standardize: bool = False) -> FeatureMatrix:
    return parse_features(_read_text(path), standardize=standardize, source=str(path))


def parse_probabilities(text: str, source: str = "<payload>") -> ClassProbabilityMatrix:
    header, data = _parse_numeric_csv(text, source)
    return ClassProbabilityMatrix.validate(data, class_names=header)


def load_probabilities(path) -> ClassProbabilityMatrix:
    return parse_probabilities(_read_text(path), source=str(path))


def load_labels(path) -> np.ndarray:
    header, data = _parse_numeric_csv(_read_text(path), str(path))
    if data.shape[1] != 1:
        raise ParseError(1, f"label file must have exactly 1 column, got {data.shape[1]}")
    return data[:, 0].astype(np.int64)


def save_features_csv(features: FeatureMatrix, path) -> None:
    _write_matrix_csv(features.values, [f"f{i}" for i in range(features.d)], path)


def save_probabilities_csv(probabilities: ClassProbabilityMatrix, path) -> None:
    _write_matrix_csv(probabilities.values, list(probabilities.class_names), path)


def save_labels_csv(labels, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"])
        for v in np.asarray(labels, dtype=np.int64):
            writer.writerow([int(v)])


def _write_matrix_csv(matrix: np.ndarray, header: list[str], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in matrix:
            writer.writerow([repr(float(v)) for v in row])


def save_embedding(state: EmbeddingState, meta: dict, path, class_names=None) -> None:
    """JSON document with run metadata, point positions, and named landmarks."""
    if class_names is None:
        class_names = [f"c{u}" for u in range(state.m)]
    doc = {
        "meta": {**meta, "iteration": meta.get("iteration", state.iteration)},
        "points": [[float(x), float(y)] for x, y in state.points],
        "landmarks": [
            {"name": str(class_names[u]), "x": float(v[0]), "y": float(v[1])}
            for u, v in enumerate(state.landmarks)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_embedding(path) -> tuple[EmbeddingState, dict, list[str]]:
    with open(path) as fh:
        doc = json.load(fh)
    points = np.asarray(doc["points"], dtype=np.float64).reshape(-1, 2)
    landmarks_raw = doc.get("landmarks", [])
    names = [entry["name"] for entry in landmarks_raw]
    landmarks = np.asarray(
        [[entry["x"], entry["y"]] for entry in landmarks_raw], dtype=np.float64
    ).reshape(-1, 2)
    meta = doc.get("meta", {})
    state = EmbeddingState(points, landmarks, iteration=int(meta.get("iteration", 0)))
    return state, meta, names


def _viewport(points: np.ndarray, landmarks: np.ndarray, size: int, pad: float):
    everything = points if landmarks.size == 0 else np.vstack([points, landmarks])
    lo = everything.min(axis=0)
    hi = everything.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    margin = pad * span

    def project(xy):
        u = (xy - (lo - margin)) / (span + 2 * margin)
        return u[0] * size, (1.0 - u[1]) * size  # flip y for screen coordinates

    return project


def emit_scatter_svg(state: EmbeddingState, labels, path, class_names=None, size: int = 800) -> None:
    """Static scatter: one circle per point colored by class, one glyph group per landmark."""
    lab = np.asarray(labels, dtype=np.int64)
    if class_names is None:
        class_names = [f"c{u}" for u in range(state.m)]
    project = _viewport(state.points, state.landmarks, size, pad=0.05)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for pos, cls in zip(state.points, lab):
        x, y = project(pos)
        color = PALETTE[int(cls) % len(PALETTE)]
        parts.append(f'<circle cx="{x:.4f}" cy="{y:.4f}" r="4" fill="{color}" fill-opacity="0.7"/>')
    for u, pos in enumerate(state.landmarks):
        x, y = project(pos)
        color = PALETTE[u % len(PALETTE)]
        name = str(class_names[u]) if u < len(class_names) else f"c{u}"
        parts.append(
            f'<g class="landmark">'
            f'<rect x="{x - 8:.4f}" y="{y - 8:.4f}" width="16" height="16" '
            f'transform="rotate(45 {x:.4f} {y:.4f})" fill="{color}" stroke="black"/>'
            f'<text x="{x + 12:.4f}" y="{y - 12:.4f}" font-size="16">{name}</text>'
            f"</g>"
        )
    parts.append("</svg>")
    with open(path, "wb") as fh:
        fh.write("\n".join(parts).encode("utf-8"))
