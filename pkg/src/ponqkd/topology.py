"""Optical distribution network model.

Represents the passive plant between the transmitter at the subscriber side
and the receiver at the central office: two feeder fibres (one per
direction), a symmetric 2:N power splitter and a short drop fibre, plus the
add/drop filters at either end.  All losses are expressed in dB and compose
additively along a path.

Wavelength-dependent fibre attenuation is carried as a small sorted table of
(nm, dB/km) anchor points and interpolated linearly in between; lookups
outside the tabulated hull raise :class:`WavelengthRangeError` rather than
extrapolating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import PathElementError, WavelengthRangeError

# dB/km -> nepers/km conversion: alpha_np = alpha_db * ln(10) / 10
NEPER_PER_DB = math.log(10.0) / 10.0

# Typical G.652 attenuation curve; the 1310 nm value is the measured plant
# average, the rest are generic single-mode figures and are configurable.
DEFAULT_ATTENUATION_DB_PER_KM: tuple[tuple[float, float], ...] = (
    (1260.0, 0.42),
    (1310.0, 0.37),
    (1550.0, 0.21),
    (1625.0, 0.24),
)

# Elements traversed by the upstream quantum channel on its way to the
# receiver.  Filter insertion losses are lumped into the calibrated receiver
# excess loss, so the quantum budget counts only the passive plant.
UPSTREAM_QUANTUM_PATH: tuple[str, ...] = ("drop", "splitter", "feeder_up")


@dataclass(frozen=True)
class FiberSpan:
    """A fibre span with a wavelength-dependent attenuation table.

    Parameters
    ----------
    length_km:
        Physical span length, >= 0.
    attenuation_db_per_km:
        Sorted ``((nm, dB/km), ...)`` anchor points, all positive.
    """

    length_km: float
    attenuation_db_per_km: tuple[tuple[float, float], ...] = DEFAULT_ATTENUATION_DB_PER_KM

    def __post_init__(self) -> None:
        if not math.isfinite(self.length_km) or self.length_km < 0.0:
            raise ValueError(f"span length must be finite and >= 0, got {self.length_km}")
        table = tuple((float(w), float(a)) for w, a in self.attenuation_db_per_km)
        if not table:
            raise ValueError("attenuation table must not be empty")
        wavelengths = [w for w, _ in table]
        if sorted(wavelengths) != wavelengths or len(set(wavelengths)) != len(wavelengths):
            raise ValueError("attenuation table must be sorted by wavelength without duplicates")
        if any(a <= 0.0 for _, a in table):
            raise ValueError("attenuation values must be positive")
        object.__setattr__(self, "attenuation_db_per_km", table)


def attenuation_at(span: FiberSpan, wavelength_nm: float) -> float:
    """Interpolated attenuation of ``span`` at ``wavelength_nm`` in dB/km.

    Linear interpolation between table anchors; a query outside the table
    hull raises :class:`WavelengthRangeError`.
    """
    table = span.attenuation_db_per_km
    wavelengths = [w for w, _ in table]
    values = [a for _, a in table]
    if len(table) == 1:
        if wavelength_nm != wavelengths[0]:
            raise WavelengthRangeError(
                f"{wavelength_nm} nm outside single-point table at {wavelengths[0]} nm"
            )
        return values[0]
    if not (wavelengths[0] <= wavelength_nm <= wavelengths[-1]):
        raise WavelengthRangeError(
            f"{wavelength_nm} nm outside attenuation hull [{wavelengths[0]}, {wavelengths[-1]}] nm"
        )
    return float(np.interp(wavelength_nm, wavelengths, values))


def span_loss_db(span: FiberSpan, wavelength_nm: float) -> float:
    """Total loss of the span at a wavelength: length x attenuation."""
    return span.length_km * attenuation_at(span, wavelength_nm)


def effective_length_km(length_km: float, attenuation_db_per_km: float) -> float:
    """Nonlinear effective length (1 - e^(-alpha L)) / alpha in km.

    ``alpha`` is the attenuation converted to nepers/km.  For alpha -> 0 the
    limit is the physical length.
    """
    if length_km < 0.0:
        raise ValueError("length must be >= 0")
    alpha = attenuation_db_per_km * NEPER_PER_DB
    if alpha == 0.0:
        return length_km
    return (1.0 - math.exp(-alpha * length_km)) / alpha


@dataclass(frozen=True)
class Splitter:
    """Symmetric 2:N power splitter.

    ``port_count`` is the subscriber-side port count N and must be a power
    of two.  The drop<->feeder insertion loss is ``10 log10 N`` plus excess;
    ``directivity_db`` is the same-side port-to-port isolation that
    suppresses feeder-to-feeder leakage.
    """

    port_count: int = 16
    excess_loss_db: float = 0.0
    directivity_db: float = 55.0

    def __post_init__(self) -> None:
        n = self.port_count
        if n < 1 or (n & (n - 1)) != 0:
            raise ValueError(f"port_count must be a power of two >= 1, got {n}")
        if self.excess_loss_db < 0.0:
            raise ValueError("excess loss must be >= 0")
        if self.directivity_db < 0.0:
            raise ValueError("directivity must be >= 0")

    @property
    def loss_db(self) -> float:
        return 10.0 * math.log10(self.port_count) + self.excess_loss_db


@dataclass(frozen=True)
class FilterProfile:
    """Bandpass filter seen by the quantum receiver or a classical channel.

    A filter is either an idealised flat top described by ``fwhm_nm`` alone,
    or carries a measured transmission table ``transmission_db`` of
    ``((nm, dB), ...)`` points relative to the passband peak.  The
    equivalent noise bandwidth used for broadband-noise integration follows
    from whichever description is present.
    """

    center_nm: float
    fwhm_nm: float
    insertion_loss_db: float = 0.0
    out_of_band_rejection_db: float = 40.0
    transmission_db: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.fwhm_nm <= 0.0:
            raise ValueError("fwhm must be positive")
        if self.insertion_loss_db < 0.0:
            raise ValueError("insertion loss must be >= 0")
        if self.transmission_db is not None:
            table = tuple((float(w), float(t)) for w, t in self.transmission_db)
            if len(table) < 3:
                raise ValueError("transmission table needs at least 3 points")
            wavelengths = [w for w, _ in table]
            if sorted(wavelengths) != wavelengths:
                raise ValueError("transmission table must be sorted by wavelength")
            if not (wavelengths[0] <= self.center_nm <= wavelengths[-1]):
                raise ValueError("transmission table must contain the center wavelength")
            object.__setattr__(self, "transmission_db", table)


def equivalent_noise_bandwidth_nm(profile: FilterProfile) -> float:
    """Equivalent noise bandwidth of a filter in nm.

    With a transmission table: integral of the peak-normalised linear
    transmission over wavelength (trapezoid rule).  Without one the filter
    is treated as an ideal flat top of width ``fwhm_nm``.
    """
    if profile.transmission_db is None:
        return profile.fwhm_nm
    wavelengths = np.array([w for w, _ in profile.transmission_db])
    linear = 10.0 ** (np.array([t for _, t in profile.transmission_db]) / 10.0)
    peak = linear.max()
    if peak <= 0.0:
        raise ValueError("transmission table has no passband")
    return float(np.trapezoid(linear / peak, wavelengths))


def gaussian_transmission_table(
    center_nm: float, fwhm_nm: float, points: int = 81, span_fwhm: float = 4.0
) -> tuple[tuple[float, float], ...]:
    """Sampled Gaussian passband, in dB relative to peak.

    Utility for building bundled filter profiles.  Scaling ``fwhm_nm`` at a
    fixed ``points``/``span_fwhm`` scales the sampled equivalent noise
    bandwidth exactly proportionally, which the bundled wide/narrow filter
    pair relies on.
    """
    offsets = np.linspace(-span_fwhm * fwhm_nm / 2.0, span_fwhm * fwhm_nm / 2.0, points)
    rel_db = -10.0 * math.log10(2.0) * (2.0 * offsets / fwhm_nm) ** 2
    return tuple((float(center_nm + o), float(t)) for o, t in zip(offsets, rel_db))


@dataclass(frozen=True)
class OdnTopology:
    """Dual-feeder splitter ODN with optional add/drop filters and taps."""

    feeder_down: FiberSpan
    feeder_up: FiberSpan
    splitter: Splitter
    drop: FiberSpan
    onu_filter: FilterProfile | None = None
    co_filter: FilterProfile | None = None
    taps: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def element_loss_db(self, name: str, wavelength_nm: float) -> float:
        if name in ("feeder_down", "feeder_up", "drop"):
            return span_loss_db(getattr(self, name), wavelength_nm)
        if name == "splitter":
            return self.splitter.loss_db
        if name in ("onu_filter", "co_filter"):
            filt = getattr(self, name)
            if filt is None:
                raise PathElementError(f"topology has no {name}")
            return filt.insertion_loss_db
        raise PathElementError(f"unknown path element {name!r}")


def path_loss_db(
    topology: OdnTopology, wavelength_nm: float, path: Sequence[str] = UPSTREAM_QUANTUM_PATH
) -> float:
    """Total insertion loss along ``path`` at one wavelength, in dB.

    The loss is the plain sum of element losses, so it is additive under
    path concatenation by construction.
    """
    return float(sum(topology.element_loss_db(name, wavelength_nm) for name in path))


def default_odn(
    port_count: int = 16,
    feeder_down_km: float = 13.2,
    feeder_up_km: float = 15.1,
    drop_km: float = 1.0,
    excess_loss_db: float = 0.0,
    directivity_db: float = 55.0,
    attenuation_db_per_km: tuple[tuple[float, float], ...] | None = None,
) -> OdnTopology:
    """The deployed-plant geometry used by the bundled scenarios."""
    table = DEFAULT_ATTENUATION_DB_PER_KM if attenuation_db_per_km is None else attenuation_db_per_km
    return OdnTopology(
        feeder_down=FiberSpan(feeder_down_km, table),
        feeder_up=FiberSpan(feeder_up_km, table),
        splitter=Splitter(port_count, excess_loss_db, directivity_db),
        drop=FiberSpan(drop_km, table),
    )
