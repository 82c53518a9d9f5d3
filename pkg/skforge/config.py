import os as _os
import logging as _logging

# Package version
SKFORGE_VERSION_MAJOR = 0
SKFORGE_VERSION_MINOR = 4
SKFORGE_VERSION_PATCH = 1
SKFORGE_VERSION = '%i.%i.%i' % (SKFORGE_VERSION_MAJOR, SKFORGE_VERSION_MINOR,
                                SKFORGE_VERSION_PATCH)

# Working precision floor of the synthesis, and the smallest precision any
# entry point runs at (bits)
PRECISION_FLOOR = 128
PRECISION_MIN = 64

# Net construction
NET_MAX_LEN = 16
NET_DEDUPE_RADIUS = 1e-4
NET_PROBES = 10000
NET_PAIR_SPAN = 1024
NET_PAIR_PROBES = 64
NET_FILE_SUFFIX = '.sknet'

# Step generation
STEP_WINDOW = 3
STEP_CONJ_LEN = 6
STEP_TEMPLATE = 'comm'
STEP_PAIR_SPAN = 256
STEP_BASE_GAP = 0.5
STEP_BASE_CANDIDATES = 32
STEP_PROFILE_SAMPLES = 129
STEP_SCREEN_MARGIN = 0.05
STEP_VERIFY_LIMIT = 64

# Zigzag synthesis
SYNTH_CK = 6
SYNTH_MAX_ROUNDS = 6
SYNTH_CALIBRATION_TRIALS = 32

# Bench
BENCH_SEED = 0
BENCH_SUCCESS_RATIO = 0.9

DEFAULT_GATESET = _os.path.join(_os.path.dirname(__file__), 'data',
                                'clifford_t.json')


def net_cache_dir():
    '''
    Directory holding prebuilt nets, taken from ``SKFORGE_NET_CACHE`` with
    ``~/.cache/skforge`` as the fallback.
    '''
    path = _os.environ.get('SKFORGE_NET_CACHE')
    if not path:
        path = _os.path.join(_os.path.expanduser('~'), '.cache', 'skforge')
    return path


def initial_log_level():
    value = _os.environ.get('SKFORGE_LOG_LEVEL', 'WARNING').strip()
    if value.isdigit():
        return int(value)
    level = _logging.getLevelName(value.upper())
    return level if isinstance(level, int) else _logging.WARNING
