from dataclasses import dataclass
from pathlib import Path


@dataclass
class Config:
    """Configuration settings for the walker control stack and trial harness."""
    SAMPLE_RATE_HZ: float = 50.0        # Control loop and logging rate
    SMOOTHING_WINDOW: int = 60          # Moving-average window (samples)
    TRIAL_TIMEOUT_S: float = 120.0      # Simulated trials stop here, flagged incomplete
    EXCLUDE_EDGE_S: float = 1.0         # Acceleration/deceleration trim at each end of a trial
    DROPOUT_HOLD_S: float = 0.5         # Hold the last valid shoulder angle this long
    DROPOUT_DECAY_S: float = 1.0        # Then decay toward the straight center with this time constant
    MIN_CONFIDENCE: float = 0.5         # Keypoints below this confidence are ignored
    OMEGA_LIMIT_DPS: float = 90.0       # Steering saturation for both controllers
    DEFUZZ_STEP_DPS: float = 0.1        # Centroid grid spacing
    OUTPUT_SIGMA_DPS: float = 20.0      # Width of every output term
    OMEGA_TOL_DPS: float = 3.0          # Fuzzy user's tolerance on heading rate
    TURN_RATE_THRESHOLD_DPS: float = 5.0  # Heading-rate segmentation of replayed logs
    TURN_MIN_DURATION_S: float = 0.5    # Sustain time for a detected turn
    ZERO_CROSSING_BAND_DPS: float = 2.0  # Deadzone for the heading-rate smoothness count
    NUM_WORKERS: int = 4                # Concurrent simulated trials
    OUTPUT_DIR: Path = Path("walker_runs")  # Base output directory
    LOG_FILE: Path = Path("smart_walker.log")  # Log file location
    PROFILE_VERSION: int = 1            # Header version of the profile file format
