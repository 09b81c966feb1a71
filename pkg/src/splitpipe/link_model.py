"""Path loss and achievable per-UE link rates.

Rates follow the Shannon AWGN capacity with the whole system bandwidth and
a per-UE channel term derived from the urban path-loss fit
``28.0 + 22*log10(d_m) + 20*log10(f_GHz)`` dB.

Two interpretations of that figure are supported (``ChannelParams.
pathloss_mode``): ``"factor"`` plugs the plain number into the SNR as a
dimensionless channel factor, which is what the bundled reference
parameters are calibrated against; ``"attenuation"`` uses the physical
linear attenuation ``10**(-PL/10)``, under which rates properly decay with
distance.  Note the two modes differ by orders of magnitude in SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .scenario import Scenario


@dataclass(frozen=True, slots=True)
class LinkRates:
    """Achievable uplink/downlink rate pair for one UE, bits/s at full duty."""

    uplink: float
    downlink: float


def path_loss_db(distance: float, carrier: float) -> float:
    """Path loss in dB for a UE at ``distance`` meters, carrier in GHz."""
    if distance <= 0.0:
        raise ValueError(f"distance must be positive, got {distance}")
    if carrier <= 0.0:
        raise ValueError(f"carrier frequency must be positive, got {carrier}")
    return 28.0 + 22.0 * math.log10(distance) + 20.0 * math.log10(carrier)


def channel_term(pl_db: float, mode: str) -> float:
    """Multiplicative channel term used in the SNR for a given path loss."""
    if mode == "factor":
        return pl_db
    if mode == "attenuation":
        return 10.0 ** (-pl_db / 10.0)
    raise ValueError(f"unknown pathloss mode {mode!r}")


def shannon_rate(bandwidth: float, tx_power: float, antenna_gain: float,
                 channel: float, noise_psd: float) -> float:
    """B * log2(1 + G*p*h / (B*N0)) in bits/s."""
    snr = antenna_gain * tx_power * channel / (bandwidth * noise_psd)
    return bandwidth * math.log2(1.0 + snr)


def link_rates(scenario: Scenario) -> tuple[LinkRates, ...]:
    """Uplink/downlink rates for every UE in scenario order."""
    ch = scenario.channel
    out = []
    for ue in scenario.ues:
        h = channel_term(path_loss_db(ue.distance, ch.carrier_freq), ch.pathloss_mode)
        out.append(LinkRates(
            uplink=shannon_rate(ch.bandwidth, ue.tx_power, ch.antenna_gain, h, ch.noise_psd),
            downlink=shannon_rate(ch.bandwidth, scenario.bs.tx_power, ch.antenna_gain, h, ch.noise_psd),
        ))
    return tuple(out)
