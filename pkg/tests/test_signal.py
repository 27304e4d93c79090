"""Wavelet transform, ridge extraction, and phase-slip counting.

Oracle values used below, derived once by hand from the analytic wavelet:
for the unit-energy convention used here the transform of cos(2*pi*f*t)
evaluated at scale f0/f has magnitude 0.5 * pi**(-1/4) * sqrt(2*pi)
* (1 - kappa*exp(-w0**2/2)) with w0 = 2*pi*f0, which is 0.941404 for
f0 = 1 (the admissibility correction kappa is then ~2.7e-9).
"""

import math

import numpy as np
import pytest

from chronotax import (
    InvalidInputError,
    Ridge,
    Scalogram,
    SlipEvent,
    count_slips,
    cwt,
    morlet_fourier,
    morlet_freq_grid,
    ridge,
)
from chronotax.integrate import Trajectory

RIDGE_MAG = 0.9414  # see module docstring


def tone(freq, fs=10.0, duration=400.0, amp=1.0, phase=0.0):
    t = np.arange(int(duration * fs)) / fs
    return t, amp * np.cos(2 * math.pi * freq * t + phase)


def test_freq_grid_is_geometric():
    freqs = morlet_freq_grid(0.0625, 1.0, 32)
    assert freqs[0] == pytest.approx(0.0625)
    assert freqs[-1] <= 1.0 + 1e-12
    ratios = freqs[1:] / freqs[:-1]
    np.testing.assert_allclose(ratios, 2.0 ** (1.0 / 32.0), rtol=1e-12)
    # bin 64 sits exactly two octaves up
    assert freqs[64] == pytest.approx(0.25, rel=1e-12)


def test_wavelet_is_admissible():
    # zero mean: the Fourier transform vanishes at omega = 0
    assert abs(morlet_fourier(np.array([0.0]), 1.0)[0]) < 1e-12
    # and peaks near the central frequency
    w = np.linspace(0.1, 20.0, 2001)
    vals = morlet_fourier(w, 1.0)
    assert abs(w[np.argmax(vals)] - 2 * math.pi) < 0.02


def test_unit_tone_ridge_magnitude():
    t, x = tone(0.25)
    sc = cwt(x, 10.0, morlet_freq_grid(0.0625, 1.0, 32))
    rg = ridge(sc)
    inside = rg.magnitude[rg.valid]
    assert np.median(inside) == pytest.approx(RIDGE_MAG, abs=0.02)
    assert 0.9 <= np.median(inside) <= 1.1


def test_tone_lands_on_its_bin():
    t, x = tone(0.25)
    sc = cwt(x, 10.0, morlet_freq_grid(0.0625, 1.0, 32))
    rg = ridge(sc)
    good = rg.frequency[rg.valid]
    # within one geometric bin of the true frequency
    assert np.all(np.abs(np.log2(good / 0.25)) <= 1.0 / 32.0 + 1e-12)
    assert rg.median_frequency() == pytest.approx(0.25, rel=0.03)


def test_two_tones_resolved():
    t, x1 = tone(0.02, duration=800.0, amp=1.0)
    _, x2 = tone(0.08, duration=800.0, amp=2.0)
    sc = cwt(x1 + x2, 10.0, morlet_freq_grid(0.01, 0.5, 32))
    rg = ridge(sc)
    # the louder tone owns the global ridge
    assert rg.median_frequency() == pytest.approx(0.08, rel=0.05)
    # and the quieter one survives as a secondary maximum
    mid = sc.magnitude[:, sc.magnitude.shape[1] // 2]
    k_low = int(np.argmin(np.abs(sc.freqs - 0.02)))
    window = mid[max(k_low - 4, 0): k_low + 5]
    assert window.max() > 0.5 * RIDGE_MAG


def test_linearity_in_amplitude():
    t, x = tone(0.1)
    sc1 = cwt(x, 10.0, morlet_freq_grid(0.05, 0.4, 16))
    sc3 = cwt(3.0 * x, 10.0, morlet_freq_grid(0.05, 0.4, 16))
    np.testing.assert_allclose(sc3.magnitude, 3.0 * sc1.magnitude, atol=1e-10)


def test_shift_is_circular_permutation():
    rng = np.random.default_rng(8)
    x = rng.standard_normal(512)
    freqs = morlet_freq_grid(0.1, 2.0, 8)
    a = cwt(x, 10.0, freqs)
    b = cwt(np.roll(x, 37), 10.0, freqs)
    np.testing.assert_allclose(b.magnitude, np.roll(a.magnitude, 37, axis=1),
                               atol=1e-9)


def test_zero_signal():
    sc = cwt(np.zeros(256), 10.0, morlet_freq_grid(0.2, 2.0, 8))
    assert np.all(sc.magnitude == 0.0)


def test_record_length_guard():
    with pytest.raises(InvalidInputError) as err:
        cwt(np.zeros(100), 10.0, morlet_freq_grid(0.01, 1.0, 8))
    assert "4 cycles" in str(err.value) or "400" in str(err.value)


def test_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        cwt(np.array([1.0, np.nan, 2.0]), 10.0, morlet_freq_grid(0.5, 2.0, 8))
    with pytest.raises(InvalidInputError):
        cwt(np.ones((4, 4)), 10.0, morlet_freq_grid(0.5, 2.0, 8))
    with pytest.raises(InvalidInputError):
        cwt(np.ones(64), -1.0, morlet_freq_grid(0.5, 2.0, 8))


def test_coi_masks_edges():
    t, x = tone(0.05, duration=400.0)
    sc = cwt(x, 10.0, morlet_freq_grid(0.05, 1.0, 8))
    coi = sc.coi_mask()
    assert not coi[0, 0] and not coi[0, -1]  # lowest frequency, both edges
    assert coi[-1, coi.shape[1] // 2]  # highest frequency, middle


def test_scalogram_round_trips(tmp_path):
    t, x = tone(0.25, duration=100.0)
    sc = cwt(x, 10.0, morlet_freq_grid(0.125, 1.0, 8))
    p = tmp_path / "sc.block"
    sc.to_block(p)
    back = Scalogram.from_block(p)
    np.testing.assert_allclose(back.magnitude, sc.magnitude)
    np.testing.assert_allclose(back.freqs, sc.freqs)

    csv_path = tmp_path / "sc.csv"
    sc.to_csv(csv_path)
    assert open(csv_path).readline().strip() == "t,f,mag"


def test_ridge_csv(tmp_path):
    t, x = tone(0.25, duration=100.0)
    rg = ridge(cwt(x, 10.0, morlet_freq_grid(0.125, 1.0, 8)))
    path = tmp_path / "ridge.csv"
    rg.to_csv(path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    assert data.dtype.names == ("t", "f", "mag", "valid")


# --- phase slips -------------------------------------------------------


def make_rotating(times, psi, r=None):
    states = np.column_stack([
        np.ones_like(times) if r is None else r,
        psi,
    ])
    return Trajectory(times[0], times[1] - times[0], times, states, "rotating")


def test_single_slip_up():
    t = np.linspace(0.0, 40.0, 4001)
    psi = np.where(t < 10.0, 0.3, np.where(t > 12.0, 0.3 + 2 * math.pi,
                   0.3 + 2 * math.pi * (t - 10.0) / 2.0))
    events = count_slips(make_rotating(t, psi), attractor_psi=0.3)
    assert len(events) == 1
    ev = events[0]
    assert ev.winding == 1
    assert 9.0 <= ev.t_start <= 11.0
    assert 11.0 <= ev.t_end <= 13.0


def test_single_slip_down():
    t = np.linspace(0.0, 40.0, 4001)
    psi = np.where(t < 10.0, 0.3, np.where(t > 12.0, 0.3 - 2 * math.pi,
                   0.3 - 2 * math.pi * (t - 10.0) / 2.0))
    events = count_slips(make_rotating(t, psi), attractor_psi=0.3)
    assert len(events) == 1
    assert events[0].winding == -1


def test_slip_count_ignores_absolute_level():
    # starting 4*pi away from the reference changes nothing
    t = np.linspace(0.0, 40.0, 4001)
    base = 0.3 + 4 * math.pi
    psi = np.where(t < 10.0, base, np.where(t > 12.0, base + 2 * math.pi,
                   base + 2 * math.pi * (t - 10.0) / 2.0))
    events = count_slips(make_rotating(t, psi), attractor_psi=0.3)
    assert len(events) == 1


def test_retreat_is_not_a_slip():
    # a 3-radian excursion that turns back never completes the loop
    t = np.linspace(0.0, 40.0, 4001)
    bump = 3.0 * np.exp(-0.5 * ((t - 20.0) / 2.0) ** 2)
    events = count_slips(make_rotating(t, 0.3 + bump), attractor_psi=0.3)
    assert events == []


def test_quiet_signal_has_no_slips():
    t = np.linspace(0.0, 40.0, 4001)
    psi = 0.3 + 0.05 * np.sin(t)
    assert count_slips(make_rotating(t, psi), attractor_psi=0.3) == []


def test_three_slips_counted():
    t = np.linspace(0.0, 60.0, 6001)
    psi = 0.3 + 2 * math.pi * np.floor(t / 15.0).clip(0, 3)
    # smooth the staircase so each riser takes a finite time
    kernel = np.ones(41) / 41.0
    psi = np.convolve(psi, kernel, mode="same")
    psi[:50] = 0.3
    psi[-50:] = psi[-51]
    events = count_slips(make_rotating(t, psi), attractor_psi=0.3)
    assert len(events) == 3
    assert all(ev.winding == 1 for ev in events)


def test_slips_require_rotating_frame():
    t = np.linspace(0.0, 10.0, 101)
    states = np.column_stack([np.cos(t), np.sin(t)])
    lab = Trajectory(0.0, 0.1, t, states, "lab")
    with pytest.raises(InvalidInputError):
        count_slips(lab, attractor_psi=0.0)


def test_slip_event_fields():
    ev = SlipEvent(1.0, 2.0, 1)
    assert ev.t_end > ev.t_start
    assert ev.winding in (-1, 1)
