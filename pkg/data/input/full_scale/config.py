"""Full-scale settings: 500-atom ensembles, 2^20-sample beat records."""

MC_ENSEMBLE_SIZE = 500
MC_TIME_LIMIT_S = 20e-3
MAP_SATURATIONS = [0.05, 0.1, 0.2, 0.3, 0.4]
MAP_DETUNINGS_HZ = (15e6, 55e6, 17)
TRAP_SHIFT_HZ = 32e6  # measured 3D trap-bottom shift

FIT_STARTS = 8

DSH_DURATION_S = 2**20 / 10e6
DSH_AVERAGES = 255
DSH_LINEWIDTH_HZ = 500.0
DSH_UNCERTAINTY_SEEDS = 8
