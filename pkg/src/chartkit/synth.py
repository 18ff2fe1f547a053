"""Synthetic multipath channels with ground-truth user positions.

The base station sits at the origin.  Users live on the plane
``z = -bs_height`` inside an axis-aligned rectangle.  Each user receives up to
``paths_per_user`` plane waves: an optional line-of-sight path plus
single-bounce paths off a fixed set of scatterers shared by all users (each
user uses the scatterers with the shortest total path length).  A path with
complex gain ``g``, delay ``tau`` and direction ``v`` contributes
``g * kron(freq_vector(tau), steering_vector(v))``, so channel entry
``m = s*A + a`` belongs to subcarrier ``s`` and antenna ``a``.

Randomness comes from numpy's PCG64 bit generator seeded with ``rng_seed``.
Draw order is fixed: scatterer positions, scatterer heights, scatterer
reflection coefficients, user positions (with redraws for users exactly at
the base station), line-of-sight flags, then noise snapshot by snapshot.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np

from .channels import ChannelDataset
from .errors import DomainError, InvariantError

SPEED_OF_LIGHT = 299_792_458.0
MIN_SCATTER_LEG_M = 1.0  # floor on the scatterer-to-user leg; avoids unbounded gains


@dataclass(frozen=True)
class ArrayGeometry:
    """Base-station antenna array.

    ``element_counts`` is ``(A,)`` for a ULA and ``(A_h, A_v)`` for a UPA.
    ``element_spacing`` is in wavelengths.  The ULA axis is horizontal and
    perpendicular to ``broadside``; a UPA adds a vertical axis.
    """

    kind: str = "ula"
    element_counts: tuple = (32,)
    element_spacing: float = 0.5
    broadside: tuple = (0.0, 1.0, 0.0)

    def __post_init__(self):
        kind = self.kind.lower()
        counts = tuple(int(c) for c in np.atleast_1d(self.element_counts))
        if kind not in ("ula", "upa"):
            raise InvariantError(f"array kind must be 'ula' or 'upa', got {self.kind!r}")
        if len(counts) != (1 if kind == "ula" else 2):
            raise InvariantError(f"{kind.upper()} needs {1 if kind == 'ula' else 2} element counts")
        if min(counts) < 1:
            raise InvariantError("element counts must be >= 1")
        if not self.element_spacing > 0:
            raise InvariantError("element spacing must be positive")
        b = np.asarray(self.broadside, dtype=float)
        if b.shape != (3,) or np.linalg.norm(b[:2]) == 0:
            raise InvariantError("broadside must be a 3-vector with a horizontal component")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "element_counts", counts)
        object.__setattr__(self, "broadside", tuple(float(x) for x in b / np.linalg.norm(b)))

    @property
    def antenna_count(self) -> int:
        return int(np.prod(self.element_counts))

    def axes(self):
        """Unit vectors along the horizontal and vertical element rows."""
        b = np.asarray(self.broadside)
        horizontal = np.cross(b, [0.0, 0.0, 1.0])
        horizontal /= np.linalg.norm(horizontal)
        vertical = np.cross(horizontal, b)
        vertical /= np.linalg.norm(vertical)
        return horizontal, vertical


def _ula_response(count: int, spacing: float, cosines: np.ndarray) -> np.ndarray:
    a = np.arange(count)
    return np.exp(-2j * np.pi * spacing * cosines[..., None] * a) / math.sqrt(count)


def _unit_directions(direction) -> np.ndarray:
    v = np.asarray(direction, dtype=float)
    if v.shape[-1] == 2:
        v = np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise DomainError("direction must be nonzero")
    return v / norms


def steering_vector(geometry: ArrayGeometry, direction) -> np.ndarray:
    """Unit-norm array response to a plane wave arriving from ``direction``.

    ULA entry ``a`` is ``exp(-2j pi a spacing <v, axis>) / sqrt(A)``; a UPA
    response is the Kronecker product of its horizontal and vertical ULA
    factors.  ``direction`` may be a batch of vectors (last axis 2 or 3).
    """
    v = _unit_directions(direction)
    horizontal, vertical = geometry.axes()
    e = _ula_response(geometry.element_counts[0], geometry.element_spacing, v @ horizontal)
    if geometry.kind == "upa":
        ev = _ula_response(geometry.element_counts[1], geometry.element_spacing, v @ vertical)
        e = (e[..., :, None] * ev[..., None, :]).reshape(e.shape[:-1] + (-1,))
    return e


def frequency_grid(center_frequency: float, bandwidth: float, subcarrier_count: int) -> np.ndarray:
    """Evenly spaced carriers spanning ``bandwidth`` around ``center_frequency``."""
    S = int(subcarrier_count)
    if S < 1:
        raise DomainError("subcarrier_count must be >= 1")
    if S == 1:
        return np.array([float(center_frequency)])
    s = np.arange(S)
    return center_frequency + bandwidth * (s / (S - 1) - 0.5)


def frequency_vector(delay, freqs, center_frequency: float) -> np.ndarray:
    """Unit-norm per-subcarrier phase ramp ``exp(-2j pi tau (f_s - f_c)) / sqrt(S)``."""
    freqs = np.asarray(freqs, dtype=float)
    if freqs.ndim != 1 or freqs.size < 1:
        raise DomainError("frequency grid must be a non-empty 1-D array")
    tau = np.asarray(delay, dtype=float)
    return np.exp(-2j * np.pi * tau[..., None] * (freqs - center_frequency)) / math.sqrt(freqs.size)


@dataclass(frozen=True)
class PathComponent:
    complex_gain: complex
    delay: float
    direction: tuple


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameterization of :func:`generate_scenario`; all units SI.

    ``area`` is ``(x_min, x_max, y_min, y_max)``.  ``snr_db=None`` means no
    noise.  ``scatter_scale`` (meters) sets scattered-path amplitude:
    ``|gamma| * scatter_scale / (d_bs_scatterer * d_scatterer_user)`` against
    ``1 / d`` for line of sight.
    """

    center_frequency: float = 2.0e9
    bandwidth: float = 20.0e6
    subcarrier_count: int = 1
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    user_count: int = 2048
    area: tuple = (-500.0, 500.0, 200.0, 700.0)
    paths_per_user: int = 1
    los_probability: float = 1.0
    scatterer_count: int = 64
    snr_db: Optional[float] = None
    snapshot_count: int = 1
    rng_seed: int = 0
    bs_height: float = 0.0
    scatter_scale: float = 10.0

    def __post_init__(self):
        if not self.center_frequency > 0:
            raise InvariantError("center_frequency must be positive")
        if not 0 <= self.bandwidth < self.center_frequency:
            raise InvariantError("bandwidth must satisfy 0 <= B < f_c")
        if self.subcarrier_count < 1:
            raise InvariantError("subcarrier_count must be >= 1")
        if self.user_count < 2:
            raise InvariantError("user_count must be >= 2")
        if self.paths_per_user < 1:
            raise InvariantError("paths_per_user must be >= 1")
        if self.snapshot_count < 1:
            raise InvariantError("snapshot_count must be >= 1")
        if not 0.0 <= self.los_probability <= 1.0:
            raise InvariantError("los_probability must lie in [0, 1]")
        x0, x1, y0, y1 = (float(v) for v in self.area)
        if not (x0 < x1 and y0 < y1):
            raise InvariantError("area must be (x_min, x_max, y_min, y_max) with min < max")
        object.__setattr__(self, "area", (x0, x1, y0, y1))
        needed = self.paths_per_user if self.los_probability < 1.0 else self.paths_per_user - 1
        if self.scatterer_count < needed:
            raise InvariantError(
                f"scatterer_count={self.scatterer_count} cannot supply {needed} scattered paths")
        if self.snr_db is not None and math.isinf(self.snr_db) and self.snr_db > 0:
            object.__setattr__(self, "snr_db", None)
        if self.bs_height < 0 or not self.scatter_scale > 0:
            raise InvariantError("bs_height must be >= 0 and scatter_scale > 0")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.center_frequency

    @property
    def antenna_count(self) -> int:
        return self.geometry.antenna_count

    @property
    def channel_dimension(self) -> int:
        return self.antenna_count * self.subcarrier_count

    def frequency_grid(self) -> np.ndarray:
        return frequency_grid(self.center_frequency, self.bandwidth, self.subcarrier_count)

    def replace(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


def preset_quadriga_like(los: bool = True) -> ScenarioConfig:
    """Narrowband ULA scene: 2048 users over 1000 m x 500 m, 32 antennas at 2 GHz.

    Measured at 0 dB SNR and averaged over 10 snapshots.
    """
    return ScenarioConfig(
        center_frequency=2.0e9,
        bandwidth=20.0e6,
        subcarrier_count=1,
        geometry=ArrayGeometry("ula", (32,), 0.5),
        user_count=2048,
        area=(-500.0, 500.0, 200.0, 700.0),
        paths_per_user=5,
        los_probability=1.0 if los else 0.0,
        scatterer_count=128,
        snr_db=0.0,
        snapshot_count=10,
        rng_seed=0,
    )


def preset_los_wideband() -> ScenarioConfig:
    """Line-of-sight ULA scene with 16 subcarriers over 5 MHz: 1000 users, 3 paths each."""
    return ScenarioConfig(
        center_frequency=2.0e9,
        bandwidth=5.0e6,
        subcarrier_count=16,
        geometry=ArrayGeometry("ula", (32,), 0.5),
        user_count=1000,
        area=(-500.0, 500.0, 200.0, 700.0),
        paths_per_user=3,
        los_probability=1.0,
        scatterer_count=64,
        snr_db=0.0,
        snapshot_count=10,
        rng_seed=0,
    )


def preset_deepmimo_like() -> ScenarioConfig:
    """Wideband 8 x 8 UPA scene: 3000 noiseless users, 16 subcarriers over 20 MHz at 3.5 GHz."""
    return ScenarioConfig(
        center_frequency=3.5e9,
        bandwidth=20.0e6,
        subcarrier_count=16,
        geometry=ArrayGeometry("upa", (8, 8), 0.5),
        user_count=3000,
        area=(-100.0, 100.0, 20.0, 220.0),
        paths_per_user=5,
        los_probability=0.7,
        scatterer_count=64,
        snr_db=None,
        snapshot_count=1,
        rng_seed=0,
        bs_height=6.0,
    )


PRESETS = {
    "quadriga-like": preset_quadriga_like,
    "quadriga-like-nlos": lambda: preset_quadriga_like(los=False),
    "deepmimo-like": preset_deepmimo_like,
    "los-wideband": preset_los_wideband,
}


# ---------------------------------------------------------------- generation


@dataclass(frozen=True)
class Scene:
    """Scatterer layout shared by every user of a scenario."""

    scatterers: np.ndarray  # (Q, 3) positions
    reflection: np.ndarray  # (Q,) complex coefficients


def draw_scene(config: ScenarioConfig, rng: np.random.Generator) -> Scene:
    x0, x1, y0, y1 = config.area
    Q = config.scatterer_count
    xy = rng.uniform((x0, y0), (x1, y1), size=(Q, 2))
    z = -config.bs_height * (1.0 - rng.random(Q))
    pos = np.column_stack([xy, z])
    # a scatterer at the base station itself would give a zero-length leg
    pos[np.linalg.norm(pos, axis=1) < MIN_SCATTER_LEG_M, 1] += MIN_SCATTER_LEG_M
    gamma = (rng.standard_normal(Q) + 1j * rng.standard_normal(Q)) / math.sqrt(2.0)
    return Scene(pos, gamma)


def draw_users(config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    x0, x1, y0, y1 = config.area
    xy = rng.uniform((x0, y0), (x1, y1), size=(config.user_count, 2))
    if config.bs_height == 0.0:
        for i in range(xy.shape[0]):
            while xy[i, 0] == 0.0 and xy[i, 1] == 0.0:
                xy[i] = rng.uniform((x0, y0), (x1, y1))
    return xy


def user_paths(config: ScenarioConfig, positions: np.ndarray, los: np.ndarray,
               scene: Optional[Scene] = None):
    """Gains (N, P), delays (N, P) and unit directions (N, P, 3) of every user's paths.

    Users without line of sight get one more scattered path in its slot.
    """
    xy = np.asarray(positions, dtype=float)
    N, P = xy.shape[0], config.paths_per_user
    lam = config.wavelength
    p_user = np.column_stack([xy, np.full(N, -config.bs_height)])
    d_los = np.linalg.norm(p_user, axis=1)
    if np.any(d_los == 0):
        raise DomainError("a user located at the base station has no defined channel")

    gains = np.zeros((N, P), dtype=np.complex128)
    delays = np.zeros((N, P))
    dirs = np.zeros((N, P, 3))
    los = np.asarray(los, dtype=bool)
    gains[los, 0] = np.exp(-2j * np.pi * d_los[los] / lam) / d_los[los]
    delays[los, 0] = d_los[los] / SPEED_OF_LIGHT
    dirs[los, 0] = p_user[los] / d_los[los, None]

    n_scattered = P - los.astype(int)
    if n_scattered.max() > 0:
        if scene is None:
            raise DomainError("scattered paths need a scene")
        s_pos = scene.scatterers
        leg_a = np.linalg.norm(s_pos, axis=1)
        leg_b = np.maximum(np.linalg.norm(p_user[:, None, :] - s_pos[None], axis=2),
                           MIN_SCATTER_LEG_M)
        total = leg_a[None, :] + leg_b
        order = np.argsort(total, axis=1, kind="stable")
        for i in range(N):
            first = 1 if los[i] else 0
            chosen = order[i, :n_scattered[i]]
            L = total[i, chosen]
            amp = scene.reflection[chosen] * config.scatter_scale / (leg_a[chosen] * leg_b[i, chosen])
            gains[i, first:] = amp * np.exp(-2j * np.pi * L / lam)
            delays[i, first:] = L / SPEED_OF_LIGHT
            dirs[i, first:] = s_pos[chosen] / leg_a[chosen, None]
    return gains, delays, dirs


def channels_from_paths(config: ScenarioConfig, gains, delays, dirs) -> np.ndarray:
    """Superpose ``gain * kron(freq_vector(delay), steering_vector(direction))`` per user."""
    freqs = config.frequency_grid()
    N, P = gains.shape
    H = np.zeros((N, config.subcarrier_count, config.antenna_count), dtype=np.complex128)
    for p in range(P):
        f = frequency_vector(delays[:, p], freqs, config.center_frequency)
        e = steering_vector(config.geometry, dirs[:, p])
        H += gains[:, p, None, None] * f[:, :, None] * e[:, None, :]
    return H.reshape(N, -1)


def channels_at(config: ScenarioConfig, positions, los=None, scene: Optional[Scene] = None) -> np.ndarray:
    """Noiseless channels of users at given (x, y) positions; LoS for everyone by default."""
    xy = np.atleast_2d(np.asarray(positions, dtype=float))
    if los is None:
        los = np.ones(xy.shape[0], dtype=bool)
    return channels_from_paths(config, *user_paths(config, xy, los, scene))


def add_noise(H: np.ndarray, snr_db: Optional[float], snapshot_count: int,
              rng: np.random.Generator) -> np.ndarray:
    """Average ``snapshot_count`` noisy observations of ``H``.

    Noise is circular complex Gaussian with per-entry variance equal to the
    dataset-average channel energy per entry divided by the linear SNR.
    """
    if snr_db is None:
        return H.copy()
    sigma2 = float(np.mean(H.real ** 2 + H.imag ** 2)) / 10.0 ** (snr_db / 10.0)
    scale = math.sqrt(sigma2 / 2.0)
    acc = np.zeros_like(H)
    for _ in range(snapshot_count):
        acc += H + scale * (rng.standard_normal(H.shape) + 1j * rng.standard_normal(H.shape))
    return acc / snapshot_count


def generate_scenario(config: ScenarioConfig) -> ChannelDataset:
    """Draw users, build their multipath channels, add averaged noise.

    Deterministic in ``config`` (seed included).
    """
    rng = np.random.Generator(np.random.PCG64(config.rng_seed))
    scene = draw_scene(config, rng)
    xy = draw_users(config, rng)
    los = rng.random(config.user_count) < config.los_probability
    H = channels_from_paths(config, *user_paths(config, xy, los, scene))
    H = add_noise(H, config.snr_db, config.snapshot_count, rng)
    meta = config_to_dict(config)
    meta["los_count"] = int(los.sum())
    return ChannelDataset(H, config.antenna_count, config.subcarrier_count,
                          config.frequency_grid(), xy, meta)


# ---------------------------------------------------------------- config files

CONFIG_KEYS = {
    "center_frequency_hz": "center frequency f_c",
    "bandwidth_hz": "total bandwidth B",
    "subcarrier_count": "number of subcarriers S",
    "array_kind": "ula or upa",
    "antennas": "element counts: A for a ULA, 'A_h,A_v' for a UPA",
    "element_spacing": "element spacing in wavelengths",
    "broadside": "array broadside vector 'x,y,z'",
    "user_count": "number of users N",
    "area": "user rectangle 'x_min,x_max,y_min,y_max' in meters",
    "paths_per_user": "paths per user P",
    "los_probability": "probability that a user has a line-of-sight path",
    "scatterer_count": "number of shared scatterers",
    "snr_db": "dataset-average SNR in dB, or 'none' for noiseless",
    "snapshot_count": "snapshots averaged per channel T",
    "rng_seed": "PCG64 seed",
    "bs_height_m": "base-station height above the user plane",
    "scatter_scale_m": "scattered-path amplitude scale",
}


class ConfigError(DomainError):
    def __init__(self, message, line_number=None, line=None):
        super().__init__(message)
        self.line_number = line_number
        self.line = line


def _floats(text):
    return tuple(float(x) for x in text.split(","))


def config_to_dict(config: ScenarioConfig) -> dict:
    g = config.geometry
    return {
        "center_frequency_hz": config.center_frequency,
        "bandwidth_hz": config.bandwidth,
        "subcarrier_count": config.subcarrier_count,
        "array_kind": g.kind,
        "antennas": ",".join(str(c) for c in g.element_counts),
        "element_spacing": g.element_spacing,
        "broadside": ",".join(repr(x) for x in g.broadside),
        "user_count": config.user_count,
        "area": ",".join(repr(x) for x in config.area),
        "paths_per_user": config.paths_per_user,
        "los_probability": config.los_probability,
        "scatterer_count": config.scatterer_count,
        "snr_db": "none" if config.snr_db is None else config.snr_db,
        "snapshot_count": config.snapshot_count,
        "rng_seed": config.rng_seed,
        "bs_height_m": config.bs_height,
        "scatter_scale_m": config.scatter_scale,
    }


def format_config(config: ScenarioConfig) -> str:
    lines = [f"# {key}: {CONFIG_KEYS[key]}\n{key} = {value}"
             for key, value in config_to_dict(config).items()]
    return "\n".join(lines) + "\n"


def parse_config(text: str, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Parse ``key = value`` lines on top of ``base`` (defaults if omitted).

    ``#`` starts a comment.  Unknown keys and bad values raise ConfigError
    carrying the offending line.
    """
    base = base or ScenarioConfig()
    top = {f.name: getattr(base, f.name) for f in fields(ScenarioConfig)}
    geo = asdict(base.geometry)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value': {raw!r}", lineno, raw)
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key == "center_frequency_hz":
                top["center_frequency"] = float(value)
            elif key == "bandwidth_hz":
                top["bandwidth"] = float(value)
            elif key == "subcarrier_count":
                top["subcarrier_count"] = int(value)
            elif key == "array_kind":
                geo["kind"] = value.lower()
            elif key == "antennas":
                geo["element_counts"] = tuple(int(x) for x in value.split(","))
            elif key == "element_spacing":
                geo["element_spacing"] = float(value)
            elif key == "broadside":
                geo["broadside"] = _floats(value)
            elif key == "user_count":
                top["user_count"] = int(value)
            elif key == "area":
                top["area"] = _floats(value)
                if len(top["area"]) != 4:
                    raise ValueError("area needs 4 numbers")
            elif key == "paths_per_user":
                top["paths_per_user"] = int(value)
            elif key == "los_probability":
                top["los_probability"] = float(value)
            elif key == "scatterer_count":
                top["scatterer_count"] = int(value)
            elif key == "snr_db":
                top["snr_db"] = None if value.lower() in ("none", "inf") else float(value)
            elif key == "snapshot_count":
                top["snapshot_count"] = int(value)
            elif key == "rng_seed":
                top["rng_seed"] = int(value)
            elif key == "bs_height_m":
                top["bs_height"] = float(value)
            elif key == "scatter_scale_m":
                top["scatter_scale"] = float(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}: {raw!r}", lineno, raw)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {raw!r} ({exc})",
                              lineno, raw) from exc
    try:
        top["geometry"] = ArrayGeometry(**geo)
        return ScenarioConfig(**top)
    except InvariantError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    with open(path) as fh:
        return parse_config(fh.read(), base)


def paths_of_user(config: ScenarioConfig, position, los: bool = True,
                  scene: Optional[Scene] = None) -> Sequence[PathComponent]:
    """The paths of one user as PathComponent records (inspection helper)."""
    g, d, v = user_paths(config, np.atleast_2d(position), np.array([los]), scene)
    return [PathComponent(complex(g[0, p]), float(d[0, p]), tuple(v[0, p]))
            for p in range(config.paths_per_user)]
