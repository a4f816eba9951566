"""
Output writers: CSV tables, JSON documents and static SVG plots.

Every file carries the resolved run configuration: CSV as `# key = value`
header lines, JSON under "config", SVG in the document description.
Output is deterministic for a fixed configuration.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from .config import SCHEMA_VERSION  # noqa: E402
from .geometry import Region, essential_curve  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams['svg.hashsalt'] = 'resonance-py'
matplotlib.rcParams['svg.fonttype'] = 'none'

FLOAT_FORMAT = '%.16e'


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    if isinstance(value, (list, tuple)):
        return ','.join(format_value(v) for v in value)
    return str(value)


def provenance_lines(resolved: Dict[str, Any]) -> List[str]:
    return [f"# {key} = {format_value(resolved[key])}" for key in sorted(resolved)]


def jsonable(value: Any) -> Any:
    """Plain JSON types; complex -> [re, im], non-finite floats -> strings."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [jsonable(value.real), jsonable(value.imag)]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def write_csv(path: Path, headers: Sequence[str], rows: Iterable[Sequence[Any]],
              resolved: Dict[str, Any]) -> Path:
    path = Path(path)
    with path.open('w', encoding='utf-8', newline='') as f:
        for line in provenance_lines(resolved):
            f.write(line + '\n')
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(headers)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    logger.debug(f"Wrote {path}")
    return path


def write_json(path: Path, payload: Dict[str, Any], resolved: Dict[str, Any]) -> Path:
    path = Path(path)
    document = {'schema_version': SCHEMA_VERSION, 'config': resolved, **payload}
    path.write_text(
        json.dumps(jsonable(document), sort_keys=True, indent=2, allow_nan=False) + '\n',
        encoding='utf-8',
    )
    logger.debug(f"Wrote {path}")
    return path


def save_svg(fig, path: Path, resolved: Dict[str, Any]) -> Path:
    path = Path(path)
    description = json.dumps(jsonable(resolved), sort_keys=True)
    fig.savefig(path, format='svg', metadata={'Date': None, 'Description': description})
    plt.close(fig)
    logger.debug(f"Wrote {path}")
    return path


def dump_matrix(path: Path, entries: np.ndarray) -> Path:
    """Debug dump of an assembled matrix in numpy's .npy format."""
    path = Path(path)
    np.save(path, np.asarray(entries))
    logger.info(f"Dumped {entries.shape[0]}x{entries.shape[1]} matrix to {path}")
    return path


# --- tables -----------------------------------------------------------------

RESONANCE_COLUMNS = ('re', 'im', 'multiplicity', 'band', 'delta', 'residual')
TRAJECTORY_COLUMNS = ('epsilon', 're', 'im', 'trajectory')
CURVE_COLUMNS = ('band', 'x', 'kappa', 'lower_line', 'upper_line')


def resonance_rows(records) -> List[tuple]:
    return [
        (r.z.real, r.z.imag, r.multiplicity, r.band, r.delta, r.residual)
        for r in records
    ]


def trajectory_rows(tracks) -> List[tuple]:
    rows = []
    for track in tracks:
        for eps, value in track.points:
            rows.append((eps, value.real, value.imag, track.id))
    rows.sort(key=lambda row: (row[3], -row[0]))
    return rows


def flow_payload(tset) -> Dict[str, Any]:
    return {
        'epsilons': tset.epsilons,
        'resonances': [r.to_dict() for r in tset.resonances],
        'matches': [
            {
                'trajectory': m.trajectory,
                'resonance': m.resonance,
                'final_distance': m.final_distance,
                'distances': [{'epsilon': e, 'distance': d} for e, d in m.distances],
                'monotone': m.monotone,
                'rate': m.rate,
            }
            for m in tset.matches
        ],
        'counts': tset.counts,
        'discs': tset.discs,
        'forks': tset.forks,
        'gating_failures': tset.gating_failures,
        'violations': tset.violations,
        'pollution': tset.pollution,
        'counts_consistent': tset.counts_consistent,
    }


# --- plots ------------------------------------------------------------------

def _region_outline(ax, region: Region, label: Optional[str] = None) -> None:
    table = region.boundary_table()
    ax.plot(table[:, 0], table[:, 1], color='tab:red', lw=1.0, label=label)
    lo, hi = region.bounds
    ax.axvline(lo, color='tab:red', lw=0.5, ls=':')
    ax.axvline(hi, color='tab:red', lw=0.5, ls=':')


def plot_spectrum(path: Path, eigenvalues: np.ndarray, region: Region, records,
                  resolved: Dict[str, Any]) -> Path:
    """Distorted eigenvalues, essential curve and the boundary of Omega."""
    fig, ax = plt.subplots(figsize=(7, 5))
    lo, hi = region.bounds
    curve = essential_curve(region.theta, xi_range=(0.0, region.n + 1.0))
    ax.plot(curve.real, curve.imag, color='0.5', lw=0.8, label='essential curve')
    _region_outline(ax, region, label=f"boundary of Omega_{region.n}")

    eigenvalues = np.asarray(eigenvalues)
    pad = 0.5 * (hi - lo)
    window = (eigenvalues.real > lo - pad) & (eigenvalues.real < hi + pad)
    shown = eigenvalues[window]
    ax.scatter(shown.real, shown.imag, s=6, color='tab:blue', label='eigenvalues')
    if records:
        z = np.array([r.z for r in records])
        ax.scatter(z.real, z.imag, s=40, marker='x', color='k', label='resonances')

    ax.set_xlim(lo - pad, hi + pad)
    ax.set_xlabel('Re z')
    ax.set_ylabel('Im z')
    ax.legend(loc='lower left', fontsize='small')
    return save_svg(fig, path, resolved)


def plot_flow(path: Path, tset, region: Region, resolved: Dict[str, Any]) -> Path:
    """CAP trajectories coloured by epsilon, resonances marked."""
    fig, ax = plt.subplots(figsize=(7, 5))
    _region_outline(ax, region, label="boundary of Omega'")
    norm = LogNorm(vmin=min(tset.epsilons), vmax=max(tset.epsilons))
    for track in tset.tracks:
        eps = np.array([p[0] for p in track.points])
        values = np.array([p[1] for p in track.points])
        ax.plot(values.real, values.imag, color='0.7', lw=0.5)
        points = ax.scatter(values.real, values.imag, c=eps, norm=norm, cmap='viridis', s=10)
    if tset.tracks:
        fig.colorbar(points, ax=ax, label='epsilon')
    if tset.resonances:
        z = np.array([r.z for r in tset.resonances])
        ax.scatter(z.real, z.imag, s=50, marker='x', color='k', label='resonances')
    ax.set_xlabel('Re z')
    ax.set_ylabel('Im z')
    ax.legend(loc='lower left', fontsize='small')
    return save_svg(fig, path, resolved)


def plot_regions(path: Path, regions: Sequence[Region], resolved: Dict[str, Any]) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for region in regions:
        table = region.boundary_table()
        curve = essential_curve(region.theta, xi_range=(region.n - 1.0, float(region.n)))
        ax.plot(curve.real, curve.imag, color='0.6', lw=0.5)
        ax.plot(table[:, 0], table[:, 1], color='tab:red', lw=1.0)
        prime = np.maximum(table[:, 1], np.maximum(table[:, 2], table[:, 3]))
        ax.plot(table[:, 0], prime, color='tab:blue', lw=0.8, ls='--')
    ax.set_xlabel('Re z')
    ax.set_ylabel('Im z')
    return save_svg(fig, path, resolved)
