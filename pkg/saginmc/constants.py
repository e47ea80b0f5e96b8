"""
Simulation-wide constants.
All hard-coded values are defined here with meaningful names.
"""

# Links (index order defines the bit order of actions and state vectors)
LINK_NAMES = ("BS", "UAV", "HAP", "LEO")
NUM_LINKS = 4
NUM_ACTIONS = 2 ** NUM_LINKS - 1

# Radio parameters per link, ordered BS, UAV, HAP, LEO
BANDWIDTH_HZ = (100e6, 200e6, 200e6, 250e6)
CARRIER_FREQUENCY_HZ = (28e9, 26e9, 26e9, 27e9)
TX_POWER_DBM = (30.0, 27.0, 35.0, 40.0)
POWER_COST_W = (2.0, 3.0, 4.0, 5.0)
DEFAULT_ANTENNA_GAIN_DBI = 0.0
DEFAULT_NOISE_FIGURE_DB = 7.0

# Physical constants
SPEED_OF_LIGHT_MPS = 299_792_458.0
THERMAL_NOISE_DBM_PER_HZ = -174.0
FSPL_CONSTANT_DB = -147.55  # 20*log10(4*pi/c)

# Geometry
UE_POSITION_M = (0.0, 0.0, 1.5)
BS_POSITION_M = (200.0, 150.0, 25.0)
HAP_GROUND_OFFSET_M = (5_000.0, 0.0)
HAP_ALTITUDE_M = 20_000.0
LEO_ALTITUDE_M = 550_000.0
UAV_SPEED_MPS = 15.0
UAV_ALTITUDE_MIN_M = 120.0
UAV_ALTITUDE_MAX_M = 250.0
LEO_ARC_STEP_DEG = 4.0
CELL_RADIUS_M = 500.0
STEP_DURATION_S = 1.0

# LOS models (urban)
UMA_LOS_BREAKPOINT_M = 18.0
UMA_LOS_DECAY_M = 63.0
AERIAL_LOS_A = 9.61
AERIAL_LOS_B = 0.16
LEO_MASK_ELEVATION_DEG = 10.0
EXCESS_LOSS_LOS_DB = 1.0
EXCESS_LOSS_NLOS_DB = 20.0

# Traffic and platform load
PACKET_BITS = 12_000
LOAD_MAX = 0.8
LOAD_INITIAL_MAX = 0.5
LOAD_STEP_MAX = 0.05

# QoS presets per traffic class: (min_capacity bps, max_latency s, max_power W)
QOS_PRESETS = {
    "eMBB": (100e6, 10e-3, 14.0),
    "HRLLC": (10e6, 2e-3, 14.0),
    "mMTC": (1e6, 100e-3, 14.0),
}
DEFAULT_TRAFFIC_CLASS = "eMBB"
UNAVAILABLE_LATENCY_FACTOR = 10.0

# Reward
REWARD_WEIGHTS = (1.0, 0.2, 0.05)  # capacity, latency, power
CAPACITY_NORM_BPS = 1e9
LATENCY_NORM_S = 10e-3
POWER_NORM_W = 14.0

# Observation layout
FEATURES_PER_LINK = 4
OBSERVATION_DIM = NUM_LINKS * FEATURES_PER_LINK + NUM_ACTIONS
SNR_NORM_DB = 30.0
EPISODE_LENGTH = 50

# Learning defaults
HIDDEN_SIZES = (64, 64)
LEARNING_RATE = 1e-3
DISCOUNT_FACTOR = 0.99
ENTROPY_COEF = 0.01
POLICY_OUTPUT_SCALE = 0.1
ADVANTAGE_CLIP = 0.1  # bound on the per-sample actor weight
TARGET_TAU = 0.005
REPLAY_CAPACITY = 10_000
BATCH_SIZE = 64
WARMUP_TRANSITIONS = 500
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# DQN baseline
DQN_EPSILON_START = 1.0
DQN_EPSILON_END = 0.05
DQN_EPSILON_DECAY_FRACTION = 0.5
DQN_TARGET_SYNC_STEPS = 500

# PPO baseline
PPO_ROLLOUT_STEPS = 2048
PPO_GAE_LAMBDA = 0.95
PPO_CLIP = 0.2
PPO_EPOCHS = 4
PPO_MINIBATCH = 256
PPO_LEARNING_RATE = 3e-4

# Greedy-SNR probing
GREEDY_OPTIMISTIC_SNR_DB = 30.0

# Experiment profiles (episodes per run)
PROFILE_EPISODES = {"desk": 2_000, "paper": 10_000}
DEFAULT_SEEDS = (0, 1, 2)
SUMMARY_TAIL_FRACTION = 0.1
SMOOTHING_WINDOW = 50

# Gradient verification
GRADCHECK_STEP = 1e-5
GRADCHECK_TOLERANCE = 1e-4
GRADCHECK_NETS = 20

# Output
TRACE_COLUMNS = ["episode", "return", "capacity_bps", "latency_s", "power_w", "switch_rate"]
STEP_TRACE_COLUMNS = [
    "episode", "step", "action_mask", "capacity_bps", "latency_s", "power_w", "reward", "flags"
]
DEFAULT_OUTPUT_DIR = "results"

# CLI exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3
EXIT_ORDERING_VIOLATION = 4
