"""Desk-scale settings for the 'sample' data source."""

SCAN_DETUNING_HZ = (-30e6, 30e6, 61)

MC_ENSEMBLE_SIZE = 60
MC_TIME_LIMIT_S = 5e-3
MC_SAMPLES = 51
MAP_SATURATIONS = [0.1, 0.4]
MAP_DETUNINGS_HZ = (25e6, 45e6, 3)

FIT_STARTS = 2

DSH_DURATION_S = 2**16 / 10e6
DSH_AVERAGES = 15
DSH_UNCERTAINTY_SEEDS = 2
DSH_MAX_EVALUATIONS = 150
