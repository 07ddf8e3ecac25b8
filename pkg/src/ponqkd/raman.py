"""Spontaneous Raman crosstalk from classical channels into the quantum band.

Classical WDM traffic sharing the plant with the quantum channel scatters a
small amount of power across tens of THz; the part landing inside the
receiver passband arrives as an irreducible background.  The model works in
the spontaneous (linear-in-pump) regime: scattered power is proportional to
launch power, scattering coefficient at the pump/quantum frequency offset,
receiver noise bandwidth and a span geometry factor.

Directional accounting at the receiver, which sits at the central-office
end of the upstream feeder:

* upstream channels co-propagate with the quantum signal, so their forward
  scattering over drop + upstream feeder dominates;
* downstream channels pump each of the N drop fibres through one splitter
  pass, and the backward-scattered light returns through a second pass;
  summing the N drops cancels one ideal pass, leaving a net
  single-splitter-loss contribution (plus twice the excess loss);
* forward scattering inside the downstream feeder can only reach the
  upstream feeder through the splitter's same-side leakage and is
  suppressed by the directivity.

The scattering coefficient table is a relative shape; its absolute scale is
a calibration parameter fitted to a measured count-rate anchor, and
therefore absorbs detection efficiency and receiver insertion loss.  The
returned rates are detected counts/s, directly comparable to a dark rate.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.constants import c as _C_M_PER_S
from scipy.constants import h as _H_J_S
from scipy.constants import k as _K_J_PER_K

from .errors import DataError, ShiftRangeError
from .topology import (
    NEPER_PER_DB,
    FiberSpan,
    FilterProfile,
    OdnTopology,
    attenuation_at,
    equivalent_noise_bandwidth_nm,
    span_loss_db,
)

C_NM_THZ = _C_M_PER_S * 1e-3  # so that frequency_thz = C_NM_THZ / wavelength_nm

ROOM_TEMPERATURE_K = 295.0

# Relative Stokes-branch scattering shape for silica fibre, peak-normalised,
# versus frequency shift in THz.  Coarse tabulation of the usual measured
# curve: main peak near 13 THz, shoulder at ~15 THz, secondary bumps near 24
# and 33 THz, negligible beyond ~43 THz.
_SILICA_STOKES_SHAPE: tuple[tuple[float, float], ...] = (
    (0.0, 0.0),
    (1.0, 0.028),
    (2.0, 0.060),
    (3.0, 0.095),
    (4.0, 0.130),
    (5.0, 0.170),
    (6.0, 0.210),
    (7.0, 0.260),
    (8.0, 0.330),
    (9.0, 0.420),
    (10.0, 0.520),
    (11.0, 0.660),
    (12.0, 0.840),
    (13.2, 1.000),
    (14.0, 0.820),
    (14.7, 0.620),
    (15.5, 0.640),
    (16.5, 0.380),
    (17.5, 0.220),
    (18.5, 0.130),
    (19.5, 0.095),
    (21.0, 0.075),
    (22.5, 0.088),
    (24.0, 0.135),
    (25.0, 0.115),
    (26.0, 0.075),
    (27.0, 0.050),
    (28.0, 0.035),
    (29.5, 0.025),
    (31.0, 0.035),
    (32.5, 0.052),
    (33.5, 0.058),
    (34.5, 0.052),
    (35.5, 0.042),
    (36.5, 0.026),
    (37.5, 0.015),
    (38.5, 0.009),
    (40.0, 0.0045),
    (41.5, 0.0022),
    (43.0, 0.0011),
    (45.0, 0.0004),
)


def frequency_thz(wavelength_nm: float) -> float:
    return C_NM_THZ / wavelength_nm


def thermal_occupation(shift_thz: float, temperature_k: float = ROOM_TEMPERATURE_K) -> float:
    """Bose-Einstein phonon occupation at a frequency shift."""
    if shift_thz <= 0.0:
        raise ValueError("occupation defined for positive shifts")
    x = _H_J_S * shift_thz * 1e12 / (_K_J_PER_K * temperature_k)
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class WavelengthChannel:
    """One classical channel co-existing with the quantum signal."""

    center_nm: float
    launch_power_dbm: float
    direction: str  # "downstream" (CO -> subscribers) or "upstream"
    band_tag: str = ""
    tdma_member: bool = False

    def __post_init__(self) -> None:
        if not (1260.0 <= self.center_nm <= 1625.0):
            raise ValueError(f"channel at {self.center_nm} nm outside 1260-1625 nm plant window")
        if self.direction not in ("downstream", "upstream"):
            raise ValueError(f"direction must be downstream/upstream, got {self.direction!r}")

    @property
    def launch_power_mw(self) -> float:
        return 10.0 ** (self.launch_power_dbm / 10.0)


@dataclass(frozen=True)
class ChannelPlan:
    """All classical channels plus the quantum channel placement."""

    channels: tuple[WavelengthChannel, ...] = ()
    quantum_center_nm: float = 1310.0
    quantum_direction: str = "upstream"

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        if self.quantum_direction != "upstream":
            raise ValueError("only an upstream quantum channel is modelled")


@dataclass(frozen=True)
class RamanProfile:
    """Signed-shift scattering coefficient table.

    ``shifts_thz`` is sorted and signed: positive shifts are the Stokes
    branch (scattered light red of the pump), negative shifts anti-Stokes.
    ``coefficients`` are relative values >= 0; ``scale`` converts the
    relative shape into detected counts/s per (mW pump x nm bandwidth x km
    geometry factor) and is the calibration target.
    """

    shifts_thz: tuple[float, ...]
    coefficients: tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self) -> None:
        shifts = tuple(float(s) for s in self.shifts_thz)
        coeffs = tuple(float(v) for v in self.coefficients)
        if len(shifts) != len(coeffs) or len(shifts) < 2:
            raise DataError("profile needs matching shift/coefficient arrays of length >= 2")
        if list(shifts) != sorted(shifts):
            raise DataError("profile shifts must be sorted ascending")
        if any(v < 0.0 for v in coeffs):
            raise DataError("scattering coefficients must be >= 0")
        if self.scale < 0.0:
            raise DataError("profile scale must be >= 0")
        object.__setattr__(self, "shifts_thz", shifts)
        object.__setattr__(self, "coefficients", coeffs)

    def with_scale(self, scale: float) -> "RamanProfile":
        return replace(self, scale=scale)

    @classmethod
    def from_csv(cls, source: str | io.TextIOBase, scale: float = 1.0) -> "RamanProfile":
        """Load ``shift_THz, coefficient`` rows; a header row is allowed."""
        if isinstance(source, str):
            with open(source, newline="") as handle:
                return cls.from_csv(handle, scale=scale)
        rows = []
        for row in csv.reader(source):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise DataError(f"malformed profile row {row!r}")
                continue  # header
        if len(rows) < 2:
            raise DataError("profile CSV has fewer than 2 data rows")
        rows.sort(key=lambda r: r[0])
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows), scale=scale)


def default_raman_profile(temperature_k: float = ROOM_TEMPERATURE_K, scale: float = 1.0) -> RamanProfile:
    """Two-branch profile built from the silica Stokes shape.

    Stokes coefficients carry the (n+1) emission factor, anti-Stokes the
    thermal occupation n, so the anti-Stokes branch is always the weaker
    one at equal shift magnitude.
    """
    shifts: list[float] = []
    coeffs: list[float] = []
    for shift, shape in reversed(_SILICA_STOKES_SHAPE):
        if shift == 0.0:
            continue
        shifts.append(-shift)
        coeffs.append(shape * thermal_occupation(shift, temperature_k))
    shifts.append(0.0)
    coeffs.append(0.0)
    for shift, shape in _SILICA_STOKES_SHAPE:
        if shift == 0.0:
            continue
        shifts.append(shift)
        coeffs.append(shape * (thermal_occupation(shift, temperature_k) + 1.0))
    return RamanProfile(tuple(shifts), tuple(coeffs), scale=scale)


def raman_coefficient(profile: RamanProfile, pump_nm: float, signal_nm: float) -> float:
    """Scaled scattering coefficient for pump -> signal conversion.

    The signed shift is pump frequency minus signal frequency, so a signal
    blue of the pump (for example 1550 nm pumping the 1310 nm band) lands on
    the negative, anti-Stokes branch.  Shifts outside the table hull raise
    :class:`ShiftRangeError`.
    """
    shift = frequency_thz(pump_nm) - frequency_thz(signal_nm)
    lo, hi = profile.shifts_thz[0], profile.shifts_thz[-1]
    if not (lo <= shift <= hi):
        raise ShiftRangeError(f"shift {shift:.2f} THz outside profile hull [{lo}, {hi}] THz")
    value = float(np.interp(shift, profile.shifts_thz, profile.coefficients))
    return value * profile.scale


def _alpha_np_per_km(span: FiberSpan, wavelength_nm: float) -> float:
    return attenuation_at(span, wavelength_nm) * NEPER_PER_DB


def forward_conversion_km(span: FiberSpan, pump_nm: float, quantum_nm: float) -> float:
    """Geometry factor (km) for scattering that co-propagates with the pump.

    Exact integral of pump decay at the pump attenuation and scattered-light
    decay at the quantum-band attenuation over the span:
    ``(e^(-a L) - e^(-q L)) / (q - a)``, degenerating to ``L e^(-a L)`` when
    the two attenuations coincide.
    """
    a = _alpha_np_per_km(span, pump_nm)
    q = _alpha_np_per_km(span, quantum_nm)
    length = span.length_km
    if math.isclose(a, q, rel_tol=1e-12, abs_tol=1e-15):
        return length * math.exp(-a * length)
    return (math.exp(-a * length) - math.exp(-q * length)) / (q - a)


def backward_conversion_km(span: FiberSpan, pump_nm: float, quantum_nm: float) -> float:
    """Geometry factor (km) for scattering that counter-propagates.

    Both decays act over the same distance from the launch end, giving
    ``(1 - e^(-(a+q) L)) / (a + q)``; saturates at ``1/(a+q)`` for long
    spans.
    """
    s = _alpha_np_per_km(span, pump_nm) + _alpha_np_per_km(span, quantum_nm)
    length = span.length_km
    if s == 0.0:
        return length
    return (1.0 - math.exp(-s * length)) / s


def _counts_per_mw(quantum_nm: float) -> float:
    """Photon rate of 1 mW at the quantum wavelength (1/s)."""
    photon_energy_j = _H_J_S * _C_M_PER_S / (quantum_nm * 1e-9)
    return 1e-3 / photon_energy_j


def forward_raman_rate(
    pump_power_mw: float,
    coefficient: float,
    span: FiberSpan,
    bandwidth_nm: float,
    quantum_nm: float,
    pump_nm: float,
) -> float:
    """Detected-equivalent counts/s exiting ``span`` alongside the pump."""
    if pump_power_mw < 0.0 or bandwidth_nm < 0.0:
        raise ValueError("pump power and bandwidth must be >= 0")
    noise_mw = pump_power_mw * coefficient * bandwidth_nm * forward_conversion_km(span, pump_nm, quantum_nm)
    return noise_mw * _counts_per_mw(quantum_nm)


def backward_raman_rate(
    pump_power_mw: float,
    coefficient: float,
    span: FiberSpan,
    bandwidth_nm: float,
    quantum_nm: float,
    pump_nm: float,
) -> float:
    """Detected-equivalent counts/s leaving the pump launch end of ``span``."""
    if pump_power_mw < 0.0 or bandwidth_nm < 0.0:
        raise ValueError("pump power and bandwidth must be >= 0")
    noise_mw = pump_power_mw * coefficient * bandwidth_nm * backward_conversion_km(span, pump_nm, quantum_nm)
    return noise_mw * _counts_per_mw(quantum_nm)


@dataclass(frozen=True)
class RamanContribution:
    """Received crosstalk split by origin, all in detected counts/s."""

    upstream_copropagating: float
    drop_backscatter: float
    feeder_leakage: float

    @property
    def total_at_receiver(self) -> float:
        return self.upstream_copropagating + self.drop_backscatter + self.feeder_leakage


def _transmission(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


def _upstream_channel_counts(
    channel: WavelengthChannel,
    topology: OdnTopology,
    bandwidth_nm: float,
    quantum_nm: float,
    profile: RamanProfile,
) -> float:
    """Forward scattering over drop + splitter + upstream feeder."""
    coeff = raman_coefficient(profile, channel.center_nm, quantum_nm)
    pump_nm = channel.center_nm
    power = channel.launch_power_mw
    split_t = _transmission(topology.splitter.loss_db)

    # generated in the drop, then attenuated through splitter and feeder at
    # the quantum wavelength
    drop_part = forward_raman_rate(power, coeff, topology.drop, bandwidth_nm, quantum_nm, pump_nm)
    drop_part *= split_t * _transmission(span_loss_db(topology.feeder_up, quantum_nm))

    # pump reaches the feeder attenuated at its own wavelength, then
    # generates co-propagating scattering that exits at the receiver
    pump_at_feeder = power * _transmission(span_loss_db(topology.drop, pump_nm)) * split_t
    feeder_part = forward_raman_rate(
        pump_at_feeder, coeff, topology.feeder_up, bandwidth_nm, quantum_nm, pump_nm
    )
    return drop_part + feeder_part


def _downstream_channel_counts(
    channel: WavelengthChannel,
    topology: OdnTopology,
    bandwidth_nm: float,
    quantum_nm: float,
    profile: RamanProfile,
) -> tuple[float, float]:
    """(drop backscatter summed over N drops, directivity-leaked feeder part)."""
    coeff = raman_coefficient(profile, channel.center_nm, quantum_nm)
    pump_nm = channel.center_nm
    power = channel.launch_power_mw
    split_t = _transmission(topology.splitter.loss_db)
    quantum_return_t = split_t * _transmission(span_loss_db(topology.feeder_up, quantum_nm))

    # pump power at each drop input: one feeder pass plus one splitter pass
    pump_at_drop = power * _transmission(span_loss_db(topology.feeder_down, pump_nm)) * split_t
    per_drop = backward_raman_rate(pump_at_drop, coeff, topology.drop, bandwidth_nm, quantum_nm, pump_nm)
    # N identical drops; the factor N cancels one ideal splitter pass
    drops_total = topology.splitter.port_count * per_drop * quantum_return_t

    # co-propagating scattering in the downstream feeder reaching the
    # upstream feeder only via same-side leakage
    leak = forward_raman_rate(power, coeff, topology.feeder_down, bandwidth_nm, quantum_nm, pump_nm)
    leak *= _transmission(topology.splitter.directivity_db)
    leak *= _transmission(span_loss_db(topology.feeder_up, quantum_nm))
    return drops_total, leak


def odn_noise_at_bob(
    plan: ChannelPlan,
    topology: OdnTopology,
    rx_filter: FilterProfile,
    profile: RamanProfile,
) -> RamanContribution:
    """Total Raman crosstalk reaching the quantum receiver.

    Upstream channels flagged ``tdma_member`` share the medium in time, so
    the group contributes the average of its members' individual rates
    (at most one member transmits at any instant) instead of the sum.
    """
    bandwidth = equivalent_noise_bandwidth_nm(rx_filter)
    rx_t = _transmission(rx_filter.insertion_loss_db)
    quantum_nm = plan.quantum_center_nm

    upstream = 0.0
    drops = 0.0
    leakage = 0.0
    tdma_rates: list[float] = []
    for channel in plan.channels:
        if channel.direction == "upstream":
            rate = _upstream_channel_counts(channel, topology, bandwidth, quantum_nm, profile)
            if channel.tdma_member:
                tdma_rates.append(rate)
            else:
                upstream += rate
        else:
            d, f = _downstream_channel_counts(channel, topology, bandwidth, quantum_nm, profile)
            drops += d
            leakage += f
    if tdma_rates:
        upstream += sum(tdma_rates) / len(tdma_rates)

    return RamanContribution(
        upstream_copropagating=upstream * rx_t,
        drop_backscatter=drops * rx_t,
        feeder_leakage=leakage * rx_t,
    )


def filter_noise_rejection_db(wide: FilterProfile, narrow: FilterProfile) -> float:
    """Broadband-noise advantage of ``narrow`` over ``wide`` in dB.

    Ratio of equivalent noise bandwidths; two flat tops of 13 nm and
    1.22 nm give 10 log10(13/1.22) ~ 10.3 dB.
    """
    return 10.0 * math.log10(
        equivalent_noise_bandwidth_nm(wide) / equivalent_noise_bandwidth_nm(narrow)
    )


def equivalent_dwdm_power_dbm(
    launch_power_dbm: float, wide: FilterProfile, narrow: FilterProfile
) -> float:
    """Launch power that emulates the narrow filter behind the wide one.

    Reducing the channel power by the noise-rejection ratio makes the
    broadband crosstalk received through the wide filter equal to what the
    narrow filter would pass at full power.
    """
    return launch_power_dbm - filter_noise_rejection_db(wide, narrow)
