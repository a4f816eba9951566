"""
Resonance commands - config loading and the resonances / flow / region /
validate runs behind the command-line entrypoint.
"""

import logging
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from resonance_py import export
from resonance_py.config import RunConfig
from resonance_py.errors import ConfigError, ResonanceError, ValidationFailure
from resonance_py.flow import distorted_spectrum, flow, resonances
from resonance_py.geometry import Region, RegionKind
from resonance_py.grid import GridSpec, scaled_points
from resonance_py.potentials import kernel_bounds, spec_from_config
from resonance_py.runner import JobProgress
from resonance_py.validation import CheckResult, run_validation

logger = logging.getLogger(__name__)

BOOLEANS = {'true': True, 'false': False, 'yes': True, 'no': False}


@dataclass
class RunJob:
    """A command run and the files it produced."""
    command: str
    status: str  # 'pending', 'running', 'completed', 'failed'
    out_dir: str
    files: List[str] = field(default_factory=list)
    started_at: float = field(default_factory=time.time)
    finished_at: Optional[float] = None
    error: Optional[str] = None
    summary: Dict[str, Any] = field(default_factory=dict)


def job_to_dict(job: RunJob) -> dict:
    return {
        'command': job.command,
        'status': job.status,
        'out_dir': job.out_dir,
        'files': job.files,
        'error': job.error,
        'summary': job.summary,
    }


# --- configuration ----------------------------------------------------------

def parse_value(text: str) -> Any:
    """int, float, complex, bool, comma list or plain string."""
    text = text.strip()
    if ',' in text:
        return [parse_value(part) for part in text.split(',') if part.strip()]
    if text.lower() in BOOLEANS:
        return BOOLEANS[text.lower()]
    for kind in (int, float, complex):
        try:
            return kind(text.replace(' ', ''))
        except ValueError:
            continue
    return text


def parse_assignment(line: str, source: str = '--set') -> tuple:
    if '=' not in line:
        raise ConfigError(f"{source}: expected 'key = value', got {line!r}")
    key, value = line.split('=', 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"{source}: empty key in {line!r}")
    return key, parse_value(value)


def read_config_file(path: str) -> Dict[str, Any]:
    """Flat `key = value` file; '#' starts a comment."""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    values = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, value = parse_assignment(line, f"{path}:{number}")
        values[key] = value
    return values


def build_config(path: Optional[str] = None, assignments: Optional[List[str]] = None,
                 out_dir: Optional[str] = None, formats: Optional[str] = None) -> RunConfig:
    """Defaults < config file < --set assignments < --out/--format."""
    overrides = read_config_file(path) if path else {}
    for item in assignments or []:
        key, value = parse_assignment(item)
        overrides[key] = value
    if out_dir is not None:
        overrides['output.dir'] = out_dir
    if formats is not None:
        overrides['output.formats'] = formats
    return RunConfig.from_mapping(overrides)


# --- running ----------------------------------------------------------------

def _run(command: str, config: RunConfig, body: Callable[[RunJob, Path], None]) -> RunJob:
    """
    Run `body` with a fresh job record. Files written before a numerical
    failure are removed again.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    job = RunJob(command=command, status='running', out_dir=str(out))
    logger.info(f"Command {command} started, output in {out}")
    try:
        body(job, out)
        job.status = 'completed'
    except ValidationFailure:
        job.status = 'failed'
        raise
    except ResonanceError as e:
        job.status = 'failed'
        job.error = str(e)
        for name in job.files:
            Path(name).unlink(missing_ok=True)
        logger.error(f"Command {command} failed, removed {len(job.files)} partial outputs")
        job.files = []
        raise
    finally:
        job.finished_at = time.time()
        logger.info(
            f"Command {command} finished: status={job.status}, "
            f"files={len(job.files)} in {(job.finished_at - job.started_at):.1f}s"
        )
    return job


def _keep(job: RunJob, path: Path) -> None:
    job.files.append(str(path))


def _grid(config: RunConfig) -> GridSpec:
    return GridSpec(L=config.L, N=config.N)


def cmd_resonances(config: RunConfig, dump_matrix: bool = False) -> RunJob:
    spec = spec_from_config(config.potential)
    grid = _grid(config)

    def body(job: RunJob, out: Path):
        A, decomposition = distorted_spectrum(spec, config.band, config.delta, grid)
        if dump_matrix:
            _keep(job, export.dump_matrix(out / 'matrix.npy', A.entries))
        records = resonances(
            spec, config.band, config.delta, grid, config.tolerances, config.contour,
            rho_max=float(config.flow['rho_max']), seed=config.seed,
            max_workers=config.max_concurrent, precomputed=(A, decomposition),
        )
        resolved = config.resolved
        if 'csv' in config.formats:
            _keep(job, export.write_csv(
                out / 'resonances.csv', export.RESONANCE_COLUMNS,
                export.resonance_rows(records), resolved,
            ))
        if 'json' in config.formats:
            _keep(job, export.write_json(out / 'resonances.json', {
                'potential': spec.to_dict(),
                'grid': grid.to_dict(),
                'kernel_bounds': kernel_bounds(spec, A.theta, grid, config.tail_radius),
                'resonances': [r.to_dict() for r in records],
            }, resolved))
        if 'svg' in config.formats:
            region = Region(config.band, config.delta, RegionKind.OMEGA)
            _keep(job, export.plot_spectrum(
                out / 'spectrum.svg', decomposition.eigenvalues, region, records, resolved,
            ))
        job.summary = {'resonances': len(records)}

    return _run('resonances', config, body)


def cmd_flow(config: RunConfig, on_progress: Optional[Callable[[JobProgress], None]] = None) -> RunJob:
    spec = spec_from_config(config.potential)
    grid = _grid(config)
    if config.flow['scale_grid']:
        grid = GridSpec(L=config.L, N=scaled_points(min(config.epsilons), base_points=config.N))
        logger.info(f"Grid scaled to N={grid.N} for eps={min(config.epsilons):.3g}")

    def body(job: RunJob, out: Path):
        result = flow(
            spec, config.band, config.delta, config.epsilons, grid, discs=config.discs,
            tolerances=config.tolerances, contour=config.contour,
            initial_gate=float(config.flow['initial_gate']),
            rho_max=float(config.flow['rho_max']), seed=config.seed,
            max_concurrent=config.max_concurrent, on_progress=on_progress,
        )
        resolved = config.resolved
        if 'csv' in config.formats:
            _keep(job, export.write_csv(
                out / 'trajectories.csv', export.TRAJECTORY_COLUMNS,
                export.trajectory_rows(result.tracks), resolved,
            ))
        if 'json' in config.formats:
            _keep(job, export.write_json(out / 'trajectories.json', {
                'grid': grid.to_dict(),
                'epsilons': result.epsilons,
                'trajectories': [
                    {'id': t.id, 'points': [{'epsilon': e, 'z': z} for e, z in t.points]}
                    for t in result.tracks
                ],
            }, resolved))
            _keep(job, export.write_json(out / 'matches.json', export.flow_payload(result), resolved))
        if 'svg' in config.formats:
            region = Region(config.band, config.delta, RegionKind.OMEGA_PRIME)
            _keep(job, export.plot_flow(out / 'flow.svg', result, region, resolved))
        job.summary = {
            'trajectories': len(result.tracks),
            'matches': len(result.matches),
            'counts_consistent': result.counts_consistent,
        }

    return _run('flow', config, body)


def cmd_region(config: RunConfig) -> RunJob:
    """Curves of Omega_n and Omega'_n for bands 1..band."""
    def body(job: RunJob, out: Path):
        regions = [
            Region(n, config.delta, RegionKind.OMEGA_PRIME,
                   config.tolerances['curve'], config.tolerances['threshold'])
            for n in range(1, config.band + 1)
        ]
        rows = [(r.n, *row) for r in regions for row in r.boundary_table()]
        resolved = config.resolved
        if 'csv' in config.formats:
            _keep(job, export.write_csv(out / 'curves.csv', export.CURVE_COLUMNS, rows, resolved))
        if 'json' in config.formats:
            _keep(job, export.write_json(out / 'curves.json', {
                'columns': list(export.CURVE_COLUMNS),
                'rows': rows,
            }, resolved))
        if 'svg' in config.formats:
            _keep(job, export.plot_regions(out / 'region.svg', regions, resolved))
        job.summary = {'bands': config.band}

    return _run('region', config, body)


def check_determinism(config: RunConfig) -> CheckResult:
    """Two resonance runs on the same config give byte-identical files."""
    with tempfile.TemporaryDirectory() as tmp:
        contents = []
        for run in ('a', 'b'):
            target = Path(tmp) / run
            repeat = RunConfig.from_mapping({**config.resolved, 'output.dir': str(target)})
            repeat.resolved = config.resolved
            job = cmd_resonances(repeat)
            contents.append({Path(f).name: Path(f).read_bytes() for f in job.files})
        differing = sorted(
            name for name in set(contents[0]) | set(contents[1])
            if contents[0].get(name) != contents[1].get(name)
        )
    return CheckResult('determinism', not differing, float(len(differing)), 0.0, {
        'files': sorted(contents[0]),
        'differing': differing,
    })


def cmd_validate(config: RunConfig, only: Optional[List[str]] = None) -> RunJob:
    def body(job: RunJob, out: Path):
        report = run_validation(config, extra=[('determinism', check_determinism)], only=only)
        _keep(job, export.write_json(out / 'validation.json', report, config.resolved))
        failed = [c['name'] for c in report['checks'] if not c['passed']]
        job.summary = {'checks': len(report['checks']), 'failed': failed}
        if failed:
            raise ValidationFailure(f"failed checks: {', '.join(failed)}")

    return _run('validate', config, body)
