import os
from multiprocessing import cpu_count

n_cores = int(os.getenv("NUMBER_OF_CPUS") or cpu_count())

CHUNKSIZE = None
N_PROCESSES = max(1, n_cores // 2)
PROFILING = False
PROFILING_SORTING = "cumulative"
PROFILING_FILENAME = "profile.txt"
DISABLE_PROGRESSBAR = False
EPSILON = 1e-10
EM_TOL = 1e-8
EM_MAX_ITER = 1000
N_STARTS = 10
KMODES_MAX_ITER = 50
KMODES_N_INIT = 5
NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-8
MAX_STEP_HALVINGS = 20
COEFFICIENT_CAP = 30.
RANK_TOL = 1e-8
DISTINCT_TOL = 1e-8
TIE_TOL = 1e-10
DEGENERATE_TOL = 1e-12
RIDGE = 1e-10
CI_Z = 1.96
FAILURE_THRESHOLD = 0.2
MIN_GROUP_SIZE = 3
RESULT_DIR = "results"
