"""
File formats: trajectory CSV, the closed-profile JSON document and the
hypersurface point cloud. Every writer goes through `atomic_write`.
"""
import csv
import io
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from .closed_profile import ClosedProfile
from .core_ode import SymmetryParams
from .exceptions import ProfileError, SchemaError
from .serializers import SCHEMA_VERSION, ProfileDocumentSerializer

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = ['t', 'x', 'y', 'theta', 'event']


def _full(value):
    return format(float(value), '.17g')


def atomic_write(path, data):
    """Write bytes or text to a sibling temp file, then rename it over `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode('utf-8')
    handle = tempfile.NamedTemporaryFile('wb', dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp', delete=False)
    try:
        with handle:
            handle.write(data)
        os.replace(handle.name, path)
    except OSError:
        if os.path.exists(handle.name):
            os.unlink(handle.name)
        raise
    return path


@dataclass(frozen=True, eq=False)
class TrajectoryTable:
    """Samples read back from a trajectory CSV."""
    t: np.ndarray
    states: np.ndarray
    events: list = field(default_factory=list)

    @property
    def points(self):
        return self.states[:, :2]


def export_trajectory(traj, path):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(TRAJECTORY_HEADER)
    last = len(traj.t) - 1
    label = traj.terminal_event.spec.label if traj.terminal_event else ''
    for index, (t, state) in enumerate(zip(traj.t, traj.states)):
        writer.writerow([_full(t), *(_full(v) for v in state), label if index == last else ''])
    logger.info("Wrote %d trajectory samples to %s", len(traj.t), path)
    return atomic_write(path, buffer.getvalue())


def import_trajectory(path):
    with open(path, newline='', encoding='utf-8') as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != TRAJECTORY_HEADER:
            raise SchemaError(f"{path}: expected header {','.join(TRAJECTORY_HEADER)}, got {header}")
        times, states, events = [], [], []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(TRAJECTORY_HEADER):
                raise SchemaError(f"{path}:{line}: expected {len(TRAJECTORY_HEADER)} columns, got {len(row)}")
            try:
                values = [float(v) for v in row[:4]]
            except ValueError as exc:
                raise SchemaError(f"{path}:{line}: {exc}") from exc
            times.append(values[0])
            states.append(values[1:])
            if row[4]:
                events.append((len(times) - 1, row[4]))
    if not times:
        raise SchemaError(f"{path}: no samples")
    t = np.asarray(times)
    if np.any(np.diff(t) <= 0):
        raise SchemaError(f"{path}: t is not strictly increasing")
    return TrajectoryTable(t=t, states=np.asarray(states, dtype=float), events=events)


@dataclass(frozen=True, eq=False)
class ProfileDocument:
    m: int
    n: int
    r_star: float
    points: list
    certificates: dict
    generation: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_profile(cls, profile, generation=None):
        p = profile.params
        return cls(
            m=p.m,
            n=p.n,
            r_star=float(profile.r_star),
            points=np.asarray(profile.points, dtype=float).tolist(),
            certificates={
                'embedded': bool(profile.embedded),
                'ell_contacts': int(profile.ell_contacts),
                'max_residual': float(profile.max_residual),
                'closure_gap': float(profile.closure_gap),
                'spacing': float(profile.spacing),
            },
            generation=dict(generation or {}),
        )

    @classmethod
    def from_validated(cls, data):
        return cls(
            schema_version=data['schema_version'],
            m=data['params']['m'],
            n=data['params']['n'],
            r_star=data['r_star'],
            points=[list(point) for point in data['points']],
            certificates=dict(data['certificates']),
            generation=dict(data.get('generation') or {}),
        )

    def as_dict(self):
        return {
            'schema_version': self.schema_version,
            'params': {'m': self.m, 'n': self.n},
            'r_star': self.r_star,
            'generation': self.generation,
            'certificates': self.certificates,
            'points': self.points,
        }

    def to_profile(self):
        c = self.certificates
        return ClosedProfile(
            points=np.asarray(self.points, dtype=float),
            params=SymmetryParams(self.m, self.n),
            r_star=self.r_star,
            max_residual=c['max_residual'],
            embedded=c['embedded'],
            ell_contacts=c['ell_contacts'],
            closure_gap=c['closure_gap'],
            spacing=c['spacing'],
        )


def render_document(document):
    data = ProfileDocumentSerializer(document.as_dict()).data
    return JSONRenderer().render(data, renderer_context={'indent': 2})


def parse_document(raw):
    try:
        data = JSONParser().parse(io.BytesIO(raw))
    except Exception as exc:
        raise SchemaError(f"Profile document is not valid JSON: {exc}") from exc
    serializer = ProfileDocumentSerializer(data=data)
    if not serializer.is_valid():
        raise SchemaError(f"Invalid profile document: {dict(serializer.errors)}", errors=serializer.errors)
    return ProfileDocument.from_validated(serializer.validated_data)


def export_profile(profile, path, generation=None):
    document = profile if isinstance(profile, ProfileDocument) else ProfileDocument.from_profile(profile, generation)
    logger.info("Wrote profile (m=%d, n=%d, %d points) to %s", document.m, document.n, len(document.points), path)
    return atomic_write(path, render_document(document))


def import_profile(path):
    with open(path, 'rb') as handle:
        return parse_document(handle.read())


def sample_hypersurface(profile, p, counts, seed):
    """Lift profile points to R^(m+n) as (x u, y v) with u, v uniform on the unit spheres."""
    if isinstance(profile, ClosedProfile):
        if not profile.certified:
            raise ProfileError("Only certified profiles are lifted to hypersurfaces")
        points = np.asarray(profile.points)[:-1]
    else:
        points = np.asarray(profile, dtype=float).reshape(-1, 2)
    if counts < 1:
        raise ProfileError("counts must be at least 1")

    rng = np.random.default_rng(seed)
    total = len(points) * counts
    u = rng.standard_normal((total, p.m))
    v = rng.standard_normal((total, p.n))
    u /= np.linalg.norm(u, axis=1)[:, None]
    v /= np.linalg.norm(v, axis=1)[:, None]
    radii = np.repeat(points, counts, axis=0)
    return np.hstack([radii[:, :1] * u, radii[:, 1:] * v])


def export_point_cloud(cloud, path, seed, p):
    buffer = io.StringIO()
    header = f"m={p.m} n={p.n} seed={seed} rows={len(cloud)}"
    np.savetxt(buffer, cloud, fmt='%.17g', delimiter=',', header=header)
    return atomic_write(path, buffer.getvalue())


def orbit_projection(cloud, p):
    """(|first m coordinates|, |last n coordinates|) for every row."""
    cloud = np.asarray(cloud, dtype=float)
    return np.column_stack([np.linalg.norm(cloud[:, :p.m], axis=1), np.linalg.norm(cloud[:, p.m:], axis=1)])


def generation_metadata(cfg, solve_tol, resample_h, config_hash, provenance=''):
    return {
        'integrator': {name: getattr(cfg, name) for name in (
            'rel_tol', 'abs_tol', 'h_init', 'h_max', 't_max', 'eps_axis', 'eps_origin', 'event_tol',
            'axis_band')},
        'solve_tol': solve_tol,
        'resample_h': resample_h,
        'config_hash': config_hash,
        'provenance': provenance,
    }

