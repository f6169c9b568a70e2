"""Path gains, the impulse-train CIR and its bandlimited sinc reconstruction."""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from radsense import _kernels
from radsense.constants import SPEED_OF_LIGHT
from radsense.raytrace import PropagationPath
from radsense.scene import Material, RadioModel

log = logging.getLogger(__name__)

MIN_PATH_LENGTH = 1e-6


@dataclass(frozen=True)
class CirTaps:
    """Infinite-bandwidth CIR: ``h(t) = sum_k amplitudes[k] * delta(t - delays[k])``."""

    delays: np.ndarray
    amplitudes: np.ndarray
    tx_id: str = ""
    rx_id: str = ""

    def __post_init__(self):
        if len(self.delays) != len(self.amplitudes):
            raise ValueError("delays and amplitudes differ in length")
        if np.any(self.delays <= 0) or np.any(np.diff(self.delays) < 0):
            raise ValueError("tap delays must be positive and sorted ascending")

    def __len__(self):
        return len(self.delays)

    def concat(self, other: "CirTaps") -> "CirTaps":
        d = np.concatenate([self.delays, other.delays])
        a = np.concatenate([self.amplitudes, other.amplitudes])
        order = np.argsort(d, kind="stable")
        return CirTaps(d[order], a[order], self.tx_id, self.rx_id)


@dataclass(frozen=True)
class SampledCir:
    """Bandlimited CIR sampled at ``t_n = start_time + n / sample_rate``."""

    sample_rate: float
    start_time: float
    values: np.ndarray
    tx_id: str = ""
    rx_id: str = ""

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self.values)) / self.sample_rate

    def __len__(self):
        return len(self.values)


def fresnel_reflection(theta_i: float, m: Material) -> complex:
    """Perpendicular-polarization reflection coefficient from air onto ``m``.

    ``theta_i`` is measured from the surface normal.  Perfect reflectors give -1.
    """
    if m.perfect_reflector:
        return -1.0 + 0j
    eps, mu = m.rel_permittivity, m.rel_permeability
    z2 = math.sqrt(mu / eps)  # relative to free space
    n2 = math.sqrt(eps * mu)
    cos_i = math.cos(theta_i)
    sin_t = math.sin(theta_i) / n2
    cos_t = math.sqrt(1.0 - sin_t * sin_t)
    return complex((z2 * cos_i - cos_t) / (z2 * cos_i + cos_t))


def path_amplitude(p: PropagationPath, radio: RadioModel) -> complex:
    """Complex voltage gain of one path: Friis spreading, reflections, carrier phase.

    TX power is not included.
    """
    d = p.total_length
    if d <= MIN_PATH_LENGTH:
        raise ValueError(f"degenerate path of length {d} m")
    g = 10.0 ** (radio.antenna_gain / 20.0)  # per antenna, amplitude
    gain = g * g * radio.wavelength / (4.0 * math.pi * d)
    coeff = 1.0 + 0j
    for theta, surf in zip(p.incidence_angles, p.surfaces_hit):
        coeff *= fresnel_reflection(theta, surf.material)
    tau = d / SPEED_OF_LIGHT
    return gain * coeff * cmath.exp(-2j * math.pi * radio.center_frequency * tau)


def assemble_cir(paths: Sequence[PropagationPath], radio: RadioModel,
                 tx_id: str = "", rx_id: str = "") -> CirTaps:
    delays = np.array([p.total_length / SPEED_OF_LIGHT for p in paths], dtype=float)
    amps = np.array([path_amplitude(p, radio) for p in paths], dtype=np.complex128)
    # ties broken by amplitude so reversed links give the same tap order
    order = np.lexsort((amps.imag, amps.real, delays))
    return CirTaps(delays[order], amps[order], tx_id, rx_id)


def sample_bandlimited(cir: CirTaps, radio: RadioModel, t_0: float = 0.0) -> SampledCir:
    """Sum of sinc pulses, one per tap, on the uniform grid ``t_0 + n / bandwidth``."""
    fs = radio.bandwidth
    n = radio.num_samples
    if len(cir):
        t_end = t_0 + (n - 1) / fs
        outside = (cir.delays < t_0) | (cir.delays > t_end)
        if np.any(outside):
            log.warning("link %s-%s: %d tap(s) outside the sample window [%.4g, %.4g] s; "
                        "energy truncated", cir.tx_id, cir.rx_id, int(outside.sum()), t_0, t_end)
        values = _kernels.sinc_sample(np.ascontiguousarray(cir.delays),
                                      np.ascontiguousarray(cir.amplitudes), float(t_0), float(fs), n)
    else:
        values = np.zeros(n, dtype=np.complex128)
    return SampledCir(fs, float(t_0), values, cir.tx_id, cir.rx_id)


def noise_variance(noise_dbm: float, radio: RadioModel) -> float:
    """Noise power referred to the channel-gain domain (relative to TX power)."""
    return 10.0 ** ((noise_dbm - radio.tx_power) / 10.0)


def add_noise(cir: SampledCir, variance: float, rng: np.random.Generator) -> SampledCir:
    """Circular complex Gaussian noise of total power ``variance`` per sample."""
    scale = math.sqrt(variance / 2.0)
    noise = rng.normal(0.0, scale, len(cir)) + 1j * rng.normal(0.0, scale, len(cir))
    return SampledCir(cir.sample_rate, cir.start_time, cir.values + noise, cir.tx_id, cir.rx_id)


def cir_to_csv(cir: SampledCir) -> str:
    lines = ["n,t_n_seconds,real,imag,magnitude"]
    for n, (t, v) in enumerate(zip(cir.times, cir.values)):
        lines.append(f"{n},{t:.17g},{v.real:.17g},{v.imag:.17g},{abs(v):.17g}")
    return "\n".join(lines) + "\n"
