"""Compiled scalar kernels of the dressed-state Monte Carlo.

Parameters travel as one float64 vector indexed by the constants below, so
the compiled code never sees Python objects. Branch codes: -1 and +1 for the
dressed states, 0 for the bare ground-state potential used at start-up.
"""

import math

import numpy as np
from numba import njit

DEPTH = 0
WAVENUMBER = 1
CHI = 2
DETUNING_BOTTOM = 3
RABI = 4
LINEWIDTH = 5
HBAR = 6
MASS = 7
RECOIL = 8
BOUNDARY = 9
N_PARAMS = 10

BARE = 0
STAY = 0
CHANGE = 1

N_REACH_GRID = 64  # grid for the classically allowed interval
RATE_SAFETY = 1.05  # margin on the thinning bound
STEPS_PER_CANDIDATE = 32.0


@njit(cache=True, nogil=True)
def ground_potential(x, prm):
    c = math.cos(prm[WAVENUMBER] * x)
    return -prm[DEPTH] * c * c


@njit(cache=True, nogil=True)
def detuning(x, prm):
    """Δ(x), equal to the trap-bottom detuning at x = 0."""
    return (
        prm[DETUNING_BOTTOM]
        + (1.0 - prm[CHI]) * (ground_potential(x, prm) + prm[DEPTH]) / prm[HBAR]
    )


@njit(cache=True, nogil=True)
def potential(x, branch, prm):
    ug = ground_potential(x, prm)
    if branch == BARE:
        return ug
    d = detuning(x, prm)
    root = math.sqrt(d * d + prm[RABI] * prm[RABI])
    return ug + 0.5 * prm[HBAR] * (-d + branch * root)


@njit(cache=True, nogil=True)
def force(x, branch, prm):
    k = prm[WAVENUMBER]
    slope = prm[DEPTH] * k * math.sin(2.0 * k * x)
    if branch == BARE:
        return -slope
    d = detuning(x, prm)
    root = math.sqrt(d * d + prm[RABI] * prm[RABI])
    ratio = d / root if root > 0.0 else 0.0
    return -slope * (1.0 + 0.5 * (1.0 - prm[CHI]) * (-1.0 + branch * ratio))


@njit(cache=True, nogil=True)
def rates_at_detuning(d, prm):
    """(stay, change from |->, change from |+>) at detuning d."""
    omega = prm[RABI]
    if omega == 0.0:
        return 0.0, 0.0, 0.0
    root = math.sqrt(d * d + omega * omega)
    sin2 = 0.5 * (1.0 + d / root)
    cos2 = 0.5 * (1.0 - d / root)
    full = prm[LINEWIDTH]
    return full * sin2 * cos2, full * sin2 * sin2, full * cos2 * cos2


@njit(cache=True, nogil=True)
def channel_rates(x, branch, prm):
    """(stay, change) rates of the occupied branch at x."""
    stay, change_minus, change_plus = rates_at_detuning(detuning(x, prm), prm)
    if branch < 0:
        return stay, change_minus
    return stay, change_plus


@njit(cache=True, nogil=True)
def rate_bounds(x, p, branch, prm):
    """Upper bounds of both channel rates over the classically allowed region.

    The rates depend on x only through Δ(x), which is monotonic in |x| inside
    one well, so the maxima sit at the ends of the reachable Δ interval or,
    for the stay rate, at Δ = 0 when it is inside.
    """
    energy = 0.5 * p * p / prm[MASS] + potential(x, branch, prm)
    boundary = prm[BOUNDARY]
    step = boundary / (N_REACH_GRID - 1)
    reach = abs(x)
    for j in range(N_REACH_GRID - 1, -1, -1):
        xj = j * step
        if potential(xj, branch, prm) <= energy:
            reach = max(reach, min(boundary, xj + step))
            break
    d_center = detuning(0.0, prm)
    d_edge = detuning(reach, prm)
    d_low = min(d_center, d_edge)
    d_high = max(d_center, d_edge)
    stay_max = rates_at_detuning(min(max(0.0, d_low), d_high), prm)[0]
    _, minus_low, plus_low = rates_at_detuning(d_low, prm)
    _, minus_high, plus_high = rates_at_detuning(d_high, prm)
    if branch < 0:
        change_max = max(minus_low, minus_high)
    else:
        change_max = max(plus_low, plus_high)
    return RATE_SAFETY * stay_max, RATE_SAFETY * change_max


@njit(cache=True, nogil=True)
def verlet_step(x, p, branch, prm, dt):
    mass = prm[MASS]
    p_half = p + 0.5 * dt * force(x, branch, prm)
    x_new = x + dt * p_half / mass
    return x_new, p_half + 0.5 * dt * force(x_new, branch, prm)


@njit(cache=True, nogil=True)
def evolve(x, p, branch, prm, duration, dt_max):
    """Integrate for a fixed duration without escape checks."""
    if duration <= 0.0:
        return x, p
    n_steps = int(math.ceil(duration / dt_max))
    dt = duration / n_steps
    for _ in range(n_steps):
        x, p = verlet_step(x, p, branch, prm, dt)
    return x, p


@njit(cache=True, nogil=True)
def exponential_time(rate):
    if rate <= 0.0:
        return np.inf
    return -math.log(1.0 - np.random.random()) / rate


@njit(cache=True, nogil=True)
def recoil_kick(recoil, double_kick):
    kick = recoil if np.random.random() < 0.5 else -recoil
    if double_kick:
        kick += recoil
    return kick


@njit(cache=True, nogil=True)
def run_atom(x, p, branch, prm, t_max, dt_max, sample_times, seed, double_kick):
    """Scatter-and-move loop of one atom until escape or t_max.

    Returns (event times, escape time or -1, kinetic energy at sample times,
    photon count at sample times, branch changes, thinning-bound violations).
    Kinetic energies after an escape are NaN.
    """
    np.random.seed(seed)
    mass = prm[MASS]
    boundary = prm[BOUNDARY]
    n_samples = sample_times.shape[0]
    kinetic = np.full(n_samples, np.nan)
    photons = np.zeros(n_samples, dtype=np.int64)
    events = np.empty(64, dtype=np.float64)
    n_events = 0
    n_changes = 0
    n_violations = 0
    escape_time = -1.0
    t = 0.0
    k = 0
    while k < n_samples and sample_times[k] <= t:
        kinetic[k] = 0.5 * p * p / mass
        k += 1

    done = False
    while not done:
        stay_max, change_max = rate_bounds(x, p, branch, prm)
        channel = STAY
        while True:
            tau = exponential_time(stay_max)
            rate_max = stay_max
            channel = STAY
            tau_change = exponential_time(change_max)
            if tau_change < tau:
                tau = tau_change
                rate_max = change_max
                channel = CHANGE
            fire = t + tau < t_max
            duration = tau if fire else t_max - t
            dt = dt_max
            if fire and duration / STEPS_PER_CANDIDATE < dt:
                dt = duration / STEPS_PER_CANDIDATE
            n_steps = max(1, int(math.ceil(duration / dt)))
            dt = duration / n_steps
            t_start = t
            escaped = False
            for i in range(n_steps):
                x, p = verlet_step(x, p, branch, prm, dt)
                t = t_start + (i + 1) * dt
                if abs(x) > boundary:
                    escaped = True
                    break
                while k < n_samples and sample_times[k] <= t:
                    kinetic[k] = 0.5 * p * p / mass
                    photons[k] = n_events
                    k += 1
            if escaped:
                escape_time = t
                done = True
                break
            if not fire:
                t = t_max
                done = True
                break
            stay, change = channel_rates(x, branch, prm)
            rate = stay if channel == STAY else change
            if rate > rate_max:
                n_violations += 1
            if np.random.random() * rate_max < rate:
                break
        if done:
            break
        if n_events == events.shape[0]:
            grown = np.empty(2 * n_events, dtype=np.float64)
            grown[:n_events] = events
            events = grown
        events[n_events] = t
        n_events += 1
        if channel == CHANGE:
            branch = -branch
            n_changes += 1
        p += recoil_kick(prm[RECOIL], double_kick)

    while k < n_samples:
        if escape_time < 0.0:
            kinetic[k] = 0.5 * p * p / mass
        photons[k] = n_events
        k += 1
    return events[:n_events].copy(), escape_time, kinetic, photons, n_changes, n_violations
