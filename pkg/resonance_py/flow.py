"""
Resonances as discrete eigenvalues of the distorted operator, and the
viscosity flow of the complex absorbing potential P - i eps x^2 towards them.
"""

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .assembly import OperatorMatrix, assemble, refine_eigenvalues
from .config import DEFAULT_CONTOUR, DEFAULT_TOLERANCES
from .eigen import EigenDecomposition, count_in_disc, eig, projector_rank
from .errors import ContourError, GatingError, ParameterError, SolverError
from .geometry import Region, RegionKind, band_theta
from .grid import GridSpec, oracle_grid
from .potentials import PotentialSpec, zero
from .runner import JobProgress, run_batch

logger = logging.getLogger(__name__)

STABILITY_FACTOR = 1.2
RADIUS_RETRIES = 3
TAIL_LENGTH = 5


@dataclass
class ResonanceRecord:
    z: complex
    multiplicity: int
    band: int
    delta: float
    residual: float
    radius: float
    cluster_size: int = 1
    in_prime: bool = True

    def to_dict(self) -> dict:
        return {
            're': self.z.real,
            'im': self.z.imag,
            'multiplicity': self.multiplicity,
            'band': self.band,
            'delta': self.delta,
            'residual': self.residual,
            'radius': self.radius,
            'cluster_size': self.cluster_size,
            'verified_region': 'omega_prime' if self.in_prime else 'omega',
        }


@dataclass
class Trajectory:
    id: int
    points: List[Tuple[float, complex]] = field(default_factory=list)

    @property
    def last(self) -> complex:
        return self.points[-1][1]

    @property
    def displacement(self) -> Optional[float]:
        if len(self.points) < 2:
            return None
        return abs(self.points[-1][1] - self.points[-2][1])


@dataclass
class Match:
    trajectory: int
    resonance: int
    final_distance: float
    distances: List[Tuple[float, float]]
    monotone: bool
    rate: Optional[float] = None


@dataclass
class TrajectorySet:
    epsilons: List[float]
    tracks: List[Trajectory]
    matches: List[Match]
    resonances: List[ResonanceRecord]
    counts: List[dict] = field(default_factory=list)
    discs: List[dict] = field(default_factory=list)
    forks: List[dict] = field(default_factory=list)
    gating_failures: List[dict] = field(default_factory=list)
    violations: List[dict] = field(default_factory=list)
    pollution: List[dict] = field(default_factory=list)

    @property
    def counts_consistent(self) -> bool:
        """Counts in B(z, rho) equal m_z at every checked epsilon."""
        return all(c['count'] == c['multiplicity'] for c in self.counts)


# --- distorted resonances ---------------------------------------------------

def _merged(tolerances: Optional[dict], contour: Optional[dict]):
    return {**DEFAULT_TOLERANCES, **(tolerances or {})}, {**DEFAULT_CONTOUR, **(contour or {})}


def _region_candidates(values: np.ndarray, region: Region, margin: float) -> np.ndarray:
    inside = values[region.mask(values)]
    if inside.size == 0:
        return inside
    clearance = inside.imag - region.kappa_many(inside.real)
    return inside[clearance > margin]


def _second_delta(delta: float, delta0: float) -> float:
    if STABILITY_FACTOR * delta < delta0:
        return STABILITY_FACTOR * delta
    return delta / STABILITY_FACTOR


def _theta_stable(spec: PotentialSpec, n: int, delta: float, grid: GridSpec,
                  candidates: np.ndarray, tol: float) -> np.ndarray:
    """Keep the eigenvalues that do not move when delta changes."""
    other = _second_delta(delta, min(1.0 / math.pi, spec.K))
    values = eig(assemble(spec, band_theta(n, other), 0.0, grid)).eigenvalues
    stable = np.array([np.min(np.abs(values - c)) <= tol for c in candidates], dtype=bool)
    dropped = int((~stable).sum())
    if dropped:
        logger.info(f"Dropped {dropped} candidates that moved between delta={delta} and {other:.4g}")
    return candidates[stable]


def _clusters(values: np.ndarray, tol: float) -> List[np.ndarray]:
    """Single-linkage groups of values closer than tol."""
    count = len(values)
    labels = list(range(count))

    def root(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(count):
        for j in range(i + 1, count):
            if abs(values[i] - values[j]) <= tol:
                labels[root(j)] = root(i)
    groups: Dict[int, list] = {}
    for i in range(count):
        groups.setdefault(root(i), []).append(values[i])
    return [np.array(g) for g in groups.values()]


def auto_radius(z: complex, eigenvalues: np.ndarray, region: Region,
                rho_max: float, exclude: float = 0.0) -> float:
    """
    Disc radius around z: at most rho_max, half the distance to the nearest
    eigenvalue outside the cluster, and half the clearance to the region's
    boundary (curve and thresholds).
    """
    d = np.abs(np.asarray(eigenvalues) - z)
    others = d[d > exclude]
    nearest = float(others.min()) if others.size else math.inf
    return min(rho_max, 0.5 * nearest, 0.5 * region.distance_to_boundary(z))


def _multiplicity(A, z: complex, radius: float, values: np.ndarray, tol: dict,
                  contour: dict, seed: int, max_workers: int) -> Tuple[int, float]:
    for _ in range(RADIUS_RETRIES):
        try:
            result = projector_rank(
                A, z, radius, M=contour['points'], tol=tol['rank'], eigenvalues=values,
                guard=tol['contour_guard'], sketch=contour['sketch'], seed=seed,
                max_workers=max_workers,
            )
            return result.rank, radius
        except ContourError as e:
            logger.warning(f"{e}; shrinking radius")
            radius *= 0.7
    raise ContourError(f"no admissible contour around {z:.10g}")


def distorted_spectrum(spec: PotentialSpec, n: int, delta: float,
                       grid: GridSpec) -> Tuple[OperatorMatrix, EigenDecomposition]:
    A = assemble(spec, band_theta(n, delta), 0.0, grid)
    return A, eig(A, want_vectors=True)


def resonances(spec: PotentialSpec, n: int, delta: float, grid: GridSpec,
               tolerances: Optional[dict] = None, contour: Optional[dict] = None,
               confirm: bool = True, rho_max: float = 0.05, seed: int = 1234,
               max_workers: int = 1,
               precomputed: Optional[Tuple[OperatorMatrix, EigenDecomposition]] = None,
               ) -> List[ResonanceRecord]:
    """
    Discrete eigenvalues of the distorted operator in Omega_{n,delta} with
    their multiplicities (rank of the Riesz projector).

    `precomputed` is the distorted matrix at epsilon = 0 with its
    decomposition (vectors included), see `distorted_spectrum`.
    """
    tol, contour = _merged(tolerances, contour)
    omega = Region(n, delta, RegionKind.OMEGA, tol['curve'], tol['threshold'])
    prime = Region(n, delta, RegionKind.OMEGA_PRIME, tol['curve'], tol['threshold'])

    A, decomposition = precomputed or distorted_spectrum(spec, n, delta, grid)
    values = decomposition.eigenvalues

    candidates = _region_candidates(values, omega, tol['curve_margin'])
    if candidates.size and confirm:
        candidates = _theta_stable(spec, n, delta, grid, candidates, tol['stability'])

    records = []
    for cluster in _clusters(candidates, tol['cluster']):
        z = complex(np.mean(cluster))
        radius = auto_radius(z, values, omega, rho_max, exclude=tol['cluster'])
        if not radius > 0:
            logger.warning(f"Skipping {z:.10g}: no room for a contour inside the region")
            continue
        rank, radius = _multiplicity(A, z, radius, values, tol, contour, seed, max_workers)
        members = np.abs(values - z) <= tol['cluster']
        if rank != cluster.size:
            logger.warning(
                f"Projector rank {rank} differs from cluster size {cluster.size} at {z:.10g}"
            )
        records.append(ResonanceRecord(
            z=z,
            multiplicity=rank,
            band=n,
            delta=delta,
            residual=float(np.max(decomposition.residuals[members])),
            radius=radius,
            cluster_size=int(cluster.size),
            in_prime=prime.contains(z),
        ))

    records.sort(key=lambda r: (r.z.real, r.z.imag))
    logger.info(f"Band {n}, delta={delta}: {len(records)} resonances")
    return records


# --- CAP spectra ------------------------------------------------------------

def cap_spectrum(spec: PotentialSpec, epsilon: float, theta: complex,
                 grid: GridSpec, want_vectors: bool = False) -> EigenDecomposition:
    """Spectrum of the (distorted) CAP operator; theta = 0 is the undistorted one."""
    if not epsilon > 0:
        raise ParameterError(f"CAP spectrum needs epsilon > 0, got {epsilon}")
    return eig(assemble(spec, theta, epsilon, grid), want_vectors=want_vectors)


def free_cap_oracle(epsilon: float, count: int = 10) -> np.ndarray:
    """Exact spectrum of -d^2/dx^2 - i eps x^2: e^{-i pi/4} sqrt(eps) (2k+1)."""
    return np.exp(-0.25j * math.pi) * math.sqrt(epsilon) * (2 * np.arange(count) + 1)


def free_cap_check(epsilon: float, count: int = 10, grid: Optional[GridSpec] = None,
                   levels: int = 2) -> dict:
    """Richardson-refined free CAP eigenvalues against the exact ones."""
    grid = grid or oracle_grid(epsilon)
    exact = free_cap_oracle(epsilon, count)
    refined = refine_eigenvalues(
        lambda g: cap_spectrum(zero(), epsilon, 0j, g).eigenvalues, grid, exact, levels
    )
    errors = np.abs(refined['extrapolated'] - exact) / np.abs(exact)
    return {
        'epsilon': epsilon,
        'grid': grid.to_dict(),
        'computed': refined['extrapolated'],
        'exact': exact,
        'relative_errors': errors,
        'max_relative_error': float(np.max(errors)),
        'ratios': refined['ratios'],
    }


def compare_cap_spectra(spec: PotentialSpec, epsilon: float, n: int, delta: float,
                        grid: GridSpec, tol: float = 1e-6,
                        margin: float = 5e-3, refine: bool = True) -> dict:
    """
    Distorted and undistorted CAP eigenvalues inside Omega'_{n,delta}, paired
    greedily on `grid`; both multisets should agree.

    The two discretizations carry different O(dxi^2) errors, so with `refine`
    the paired values are Richardson-extrapolated from grid and
    grid.refined() before the gap is measured.
    """
    prime = Region(n, delta, RegionKind.OMEGA_PRIME)

    def distorted_values(g: GridSpec) -> np.ndarray:
        return cap_spectrum(spec, epsilon, prime.theta, g).eigenvalues

    def plain_values(g: GridSpec) -> np.ndarray:
        return cap_spectrum(spec, epsilon, 0j, g).eigenvalues

    distorted = _region_candidates(distorted_values(grid), prime, margin)
    unmatched = list(_region_candidates(plain_values(grid), prime, margin))
    paired, missing = [], []
    for value in sorted(distorted, key=lambda v: (v.real, v.imag)):
        if not unmatched:
            missing.append(value)
            continue
        j = int(np.argmin(np.abs(np.array(unmatched) - value)))
        paired.append((value, unmatched.pop(j)))

    left = np.array([p[0] for p in paired], dtype=complex)
    right = np.array([p[1] for p in paired], dtype=complex)
    if refine and paired:
        left = refine_eigenvalues(distorted_values, grid, left)['extrapolated']
        right = refine_eigenvalues(plain_values, grid, right)['extrapolated']
    gaps = np.abs(left - right)

    pairs = [(complex(a), complex(b), float(g)) for a, b, g in zip(left, right, gaps)]
    pairs += [(complex(value), None, math.inf) for value in missing]
    max_gap = max((p[2] for p in pairs), default=0.0)
    logger.info(
        f"CAP spectra at eps={epsilon:.3g}: {len(paired)} pairs, max gap {max_gap:.3g}, "
        f"{len(missing) + len(unmatched)} unmatched"
    )
    return {
        'pairs': pairs,
        'unmatched': unmatched,
        'max_gap': max_gap,
        'agree': not unmatched and max_gap <= tol,
    }


# --- flow -------------------------------------------------------------------

def _gate(track: Trajectory, floor: float, initial: float) -> float:
    moved = track.displacement
    if moved is None:
        return max(initial, floor)
    return max(3.0 * moved, floor)


def _link(schedule: Sequence[float], spectra: Sequence[np.ndarray], prime: Region,
          floor: float, initial_gate: float, strict: bool):
    tracks: List[Trajectory] = []
    forks: List[dict] = []
    failures: List[dict] = []
    active: List[Trajectory] = []

    for eps, values in zip(schedule, spectra):
        inside = values[prime.mask(values)]
        inside = inside[np.lexsort((inside.imag, inside.real))]
        claimed = np.zeros(inside.size, dtype=bool)

        proposals = []
        for track in active:
            gate = _gate(track, floor, initial_gate)
            distance = np.abs(inside - track.last)
            within = np.flatnonzero(distance <= gate)
            if within.size > 1:
                forks.append({'epsilon': eps, 'trajectory': track.id, 'candidates': int(within.size)})
                logger.warning(
                    f"Trajectory {track.id} forks at eps={eps:.3g}: "
                    f"{within.size} eigenvalues inside gate {gate:.3g}"
                )
            best = float(distance[within].min()) if within.size else math.inf
            proposals.append((best, track.id, track, within, gate))

        survivors = []
        ended = []
        for _, _, track, within, gate in sorted(proposals, key=lambda p: (p[0], p[1])):
            free = [j for j in within if not claimed[j]]
            if free:
                j = min(free, key=lambda k: abs(inside[k] - track.last))
                claimed[j] = True
                track.points.append((eps, complex(inside[j])))
                survivors.append(track)
            else:
                ended.append((track, gate))

        for track, gate in ended:
            if len(track.points) < 3 or prime.distance_to_boundary(track.last) <= gate:
                continue
            nearby = np.abs(inside[~claimed] - track.last) <= 10.0 * gate
            if np.any(nearby):
                failure = {'epsilon': eps, 'trajectory': track.id, 'gate': gate}
                failures.append(failure)
                message = (
                    f"trajectory {track.id} lost its eigenvalue at eps={eps:.3g} "
                    f"(gate {gate:.3g}); refine the epsilon schedule"
                )
                if strict:
                    raise GatingError(message)
                logger.warning(message)

        for j in np.flatnonzero(~claimed):
            track = Trajectory(id=len(tracks), points=[(eps, complex(inside[j]))])
            tracks.append(track)
            survivors.append(track)
        active = sorted(survivors, key=lambda t: t.id)

    return tracks, forks, failures


def _rate(distances: List[Tuple[float, float]]) -> Optional[float]:
    usable = [(e, d) for e, d in distances if d > 0]
    if len(usable) < 3:
        return None
    eps, dist = zip(*usable)
    return float(np.polyfit(np.log(eps), np.log(dist), 1)[0])


def _pollution(schedule, spectra, prime: Region, margin: float, bound: int) -> List[dict]:
    report = []
    for eps, values in zip(schedule, spectra):
        inside = _region_candidates(values, prime, 2.0 * margin)
        report.append({'epsilon': eps, 'count': int(inside.size)})
    limit = max(bound, report[0]['count']) if report else bound
    for entry in report:
        entry['bound'] = limit
        entry['flagged'] = entry['count'] > limit
        if entry['flagged']:
            logger.warning(
                f"{entry['count']} eigenvalues inside the compact part of Omega' at "
                f"eps={entry['epsilon']:.3g} (bound {limit}); discretization artifact"
            )
    return report


def validate_schedule(schedule: Sequence[float]) -> List[float]:
    schedule = [float(e) for e in schedule]
    if not schedule or any(e <= 0 for e in schedule):
        raise ParameterError("epsilon schedule must be a nonempty list of positive values")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ParameterError("epsilon schedule must be strictly decreasing")
    return schedule


def flow(spec: PotentialSpec, n: int, delta: float, schedule: Sequence[float],
         grid: GridSpec, discs: Optional[Sequence[Tuple[complex, float]]] = None,
         records: Optional[List[ResonanceRecord]] = None,
         tolerances: Optional[dict] = None, contour: Optional[dict] = None,
         initial_gate: float = 0.05, rho_max: float = 0.05, seed: int = 1234,
         max_concurrent: int = 2, strict_gating: bool = True,
         on_progress: Optional[Callable[[JobProgress], None]] = None,
         stop_event: Optional[threading.Event] = None) -> TrajectorySet:
    """
    Track the distorted CAP eigenvalues inside Omega'_{n,delta} along a
    decreasing epsilon schedule and match their endpoints to the resonances.
    """
    schedule = validate_schedule(schedule)
    tol, contour = _merged(tolerances, contour)
    prime = Region(n, delta, RegionKind.OMEGA_PRIME, tol['curve'], tol['threshold'])
    theta = prime.theta

    if records is None:
        records = resonances(spec, n, delta, grid, tol, contour, rho_max=rho_max,
                             seed=seed, max_workers=max_concurrent)

    batch = run_batch(
        lambda eps: cap_spectrum(spec, eps, theta, grid).eigenvalues,
        schedule, max_concurrent, on_progress, stop_event, label='epsilon',
    )
    if batch.failed:
        failed = ', '.join(f"{r['item']:.3g}" for r in batch.failures)
        raise SolverError(f"CAP eigensolves failed for eps = {failed}")
    spectra = [r['value'] for r in batch.results]

    tracks, forks, failures = _link(
        schedule, spectra, prime, 10.0 * grid.dxi ** 2, initial_gate, strict_gating
    )

    final = schedule[-1]
    matches, violations, counts = [], [], []
    for rid, record in enumerate(records):
        if not record.in_prime:
            logger.info(f"Resonance {record.z:.8g} lies outside Omega'; left unverified")
            continue
        for track in tracks:
            if track.points[-1][0] != final or abs(track.last - record.z) > record.radius:
                continue
            distances = [(e, abs(v - record.z)) for e, v in track.points]
            tail = distances[-TAIL_LENGTH:]
            bad = [
                {'trajectory': track.id, 'resonance': rid, 'epsilon': e2}
                for (e1, d1), (e2, d2) in zip(tail, tail[1:]) if not d2 < d1
            ]
            for v in bad:
                logger.warning(
                    f"Distance to resonance {rid} did not decrease at eps={v['epsilon']:.3g}"
                )
            violations.extend(bad)
            matches.append(Match(
                trajectory=track.id,
                resonance=rid,
                final_distance=distances[-1][1],
                distances=distances,
                monotone=not bad,
                rate=_rate(tail),
            ))
        for eps, values in list(zip(schedule, spectra))[-2:]:
            counts.append({
                'resonance': rid,
                'epsilon': eps,
                'radius': record.radius,
                'count': count_in_disc(values, record.z, record.radius),
                'multiplicity': record.multiplicity,
            })

    disc_reports = []
    if discs:
        A0 = assemble(spec, theta, 0.0, grid)
        values0 = eig(A0).eigenvalues
        for center, radius in discs:
            rank = projector_rank(
                A0, center, radius, M=contour['points'], tol=tol['rank'], eigenvalues=values0,
                guard=tol['contour_guard'], sketch=contour['sketch'], seed=seed,
                max_workers=max_concurrent,
            ).rank
            disc_reports.append({
                'center': complex(center),
                'radius': float(radius),
                'multiplicity': rank,
                'counts': [
                    {'epsilon': eps, 'count': count_in_disc(values, center, radius)}
                    for eps, values in zip(schedule, spectra)
                ],
            })

    bound = sum(r.multiplicity for r in records if r.in_prime)
    result = TrajectorySet(
        epsilons=schedule,
        tracks=tracks,
        matches=matches,
        resonances=records,
        counts=counts,
        discs=disc_reports,
        forks=forks,
        gating_failures=failures,
        violations=violations,
        pollution=_pollution(schedule, spectra, prime, tol['curve_margin'], bound),
    )
    logger.info(
        f"Flow done: {len(tracks)} trajectories, {len(matches)} matched, "
        f"counts consistent={result.counts_consistent}"
    )
    return result
