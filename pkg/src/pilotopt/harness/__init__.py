from .sweeps import (
    SweepKind,
    SweepResult,
    SweepRow,
    SweepSpec,
    Status,
    run_alpha_sweep,
    run_power_sweep,
    run_rate_sweep,
    run_sweep,
    sweep_csv,
)
