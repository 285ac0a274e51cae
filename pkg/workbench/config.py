"""Configuration file with workbench parameters.

File units: frequencies in Hz, energies in μK (times kB), lengths in nm,
times in s. `workbench.dataset` converts them to SI and rad/s.
"""

# atom and lattice
GAMMA_HALF_HZ = 2.873e6  # half-linewidth γ/2π of the Rb-87 D1 repumper transition
REPUMP_WAVELENGTH_NM = 794.979
LATTICE_WAVELENGTH_NM = 868.0  # red-detuned lattice, period = wavelength/2
TRAP_DEPTH_UK = 500.0  # U0/kB
POLARIZABILITY_RATIO = -0.59  # χ = α_e/α_g
TRAP_SHIFT_HZ = None  # calibrated Δ0/2π; None uses the single-beam model U0(1-χ)/h

# repumper operating point
SATURATION = 0.057
DETUNING_FREE_SPACE_HZ = 35e6  # Δ̃/2π

# light-shift scans
SCAN_DETUNING_HZ = (-30e6, 30e6, 241)  # (start, stop, points) of Δ/2π
SCAN_SATURATIONS = [0.057, 0.36, 0.5]
SCAN_KINETIC_ENERGIES_UK = [0.0, 25.0, 50.0, 100.0]
RAMAN_RABI_HZ = 20e3  # Ω̃/2π of the three-level model
REPUMP_EFFICIENCY = 0.5  # α = γ2/(γ1+γ2)
REPUMP_JITTER_HZ = 0.0  # rms repumper frequency jitter, 0 disables the broadened column

# Monte Carlo
MC_ENSEMBLE_SIZE = 500
MC_TEMPERATURE_UK = 100.0
MC_TIME_LIMIT_S = 20e-3
MC_TIME_STEP_S = None  # None uses 1/(50 ν)
MC_BOUNDARY_NM = None  # None uses half a lattice period
MC_SAMPLES = 201  # time grid points for survival/photon/energy curves
MC_RECOIL_MODE = "single"  # "single" or "double" momentum kicks per photon
MAP_SATURATIONS = [0.05, 0.1, 0.2, 0.3, 0.4]
MAP_DETUNINGS_HZ = (20e6, 50e6, 7)  # (start, stop, points) of Δ̃/2π

# fitting
FIT_TOLERANCE = 1e-9  # objective spread / simplex diameter
FIT_MAX_EVALUATIONS = 20000
FIT_STARTS = 8  # jittered starts for spectrum fits
CONFIDENCE_LEVEL = 0.68

# Raman spectra
SPECTRUM_TRIALS = 100
SIDEBAND_PAIR_TOLERANCE = 0.10  # relative |center| mismatch allowed within a pair
SIDEBAND_FREQUENCIES_HZ = [300e3, 350e3, 420e3]  # initial guesses per axis
SIDEBAND_FWHM_HZ = [30e3, 30e3, 60e3]  # z sideband is broader
CARRIER_FWHM_HZ = 20e3

# delayed self-heterodyne
DSH_AOM_OFFSET_HZ = 2e6  # simulation offset; the setup uses 80 MHz
DSH_FIBER_LENGTH_M = 4900.0
DSH_GROUP_INDEX = 1.468
DSH_SAMPLE_RATE_HZ = 10e6
DSH_DURATION_S = 2**19 / 10e6
DSH_AVERAGES = 255  # Welch segments at 50 % overlap
DSH_SPAN_HZ = 2e6  # analysis span either side of the beat note
DSH_ANALYTIC = True  # complex baseband beat
DSH_LINEWIDTH_HZ = 10e3  # white-FM Lorentzian linewidth used by dsh-simulate
DSH_FLICKER = 0.0
DSH_RANDOMWALK = 0.0
DSH_INNER_SEED = 1
DSH_UNCERTAINTY_SEEDS = 8
DSH_MAX_EVALUATIONS = 400

# run
SEED = 20200901
THREADS = None  # None uses os.cpu_count()
VERBOSE = True  # print run summaries
PROGRESS = True  # tqdm progress bars
