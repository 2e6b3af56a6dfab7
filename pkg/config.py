# config.py - Global constants for the tree profile toolkit

import os

# Application identity (used for logger and log file names)
APP_NAME = "tree_profiles"

# Logging
# LOGS_FOLDER = None keeps logging on the console only; the CLI overrides it with --log-folder
LOGS_FOLDER = None
LOG_LEVEL = "INFO"

# Enumeration limits
MAX_ENUMERATION_ORDER = 12  # enumerate_trees default cap, N_12 = 551
MAX_EXHAUSTIVE_ORDER = 14  # exhaustive corpus guard, N_14 = 3159

# Bound evaluation
FLOAT_RELATIVE_TOLERANCE = 1e-6  # float check fails only if slack < -tol * max(1, |rhs|)

# Parallel work
ROOT_CHUNKS_PER_WORKER = 4  # k_profile splits the roots into this many chunks per worker

# Millipedes
DEFAULT_PENDANT_OFFSET = 2  # v_j carries d_i + 2 pendant leaves
FAMILY_PENDANT_OFFSET = 0  # region families are labelled by spine degree minus two
DEFAULT_DMAX = 12  # truncation of the (0,0,d,d) family

# Limit profiles
LIMIT_PROFILE_SPAN = 8  # spine edges a 5-vertex subtree can touch, plus slack
LIMIT_PROFILE_MAX_RETRIES = 4

# Equality search (simulated annealing over caterpillars)
SEARCH_TEMPERATURE = 0.5
SEARCH_GROWTH_WEIGHT = 1.0
SEARCH_RESTARTS = 4
SEARCH_INITIAL_MIN_DEGREE = 3
SEARCH_INITIAL_MAX_DEGREE = 5
SEARCH_INITIAL_SPINE = (3, 6)  # inclusive range of starting spine lengths
SEARCH_GENERAL_INITIAL_ORDER = (5, 10)  # starting orders for the --general move set
SEARCH_EXTEND_PROBABILITY = 0.2  # split evenly between extending and shrinking the spine

# Output
CSV_CHUNK_SIZE = 1000
VERIFY_BATCH_SIZE = 256  # trees handed to the worker pool at a time by verify
CSV_LINE_TERMINATOR = "\n"

PROFILE_CSV_HEADER = ['type_index', 'count', 'probability_num', 'probability_den']
REGION_CSV_HEADER = ['family', 'p1_num', 'p1_den', 'p2_num', 'p2_den', 'p3_num', 'p3_den']
BOUND_CSV_HEADER = ['index', 'name', 'lhs', 'rhs', 'slack', 'holds',
                    'n', 'max_degree', 'degree_histogram']

# SVG region plot
SVG_SIZE = 520
SVG_MARGIN = 40
SVG_MARK_SIZE = 4
SVG_DECIMALS = 3

# Plot colours
COLORS = {
    "axis": "#262626",
    "simplex": "#BFBFBF",
    "point": "#262626",
    "marked_point": "#FA541C",
    "simple_hull": "#1890FF",
    "full_hull": "#F5222D",
    "background": "#FFFFFF",
}


def resolve_logs_folder(override=None):
    """Pick the folder for log files

    Args:
        override: Folder given on the command line, if any

    Returns:
        str or None: Absolute folder path, or None for console-only logging
    """
    folder = override or LOGS_FOLDER
    if not folder:
        return None
    return os.path.abspath(folder)
