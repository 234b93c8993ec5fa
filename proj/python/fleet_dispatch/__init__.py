"""Fleet scheduling and admission control for shared autonomous vehicles."""

from ._core import (
    FORMAT_VERSION,
    AdmissionOutcome,
    Arrival,
    ConstraintViolated,
    Edge,
    FleetResult,
    GAConfig,
    GeneratorParams,
    InfeasibleRouteError,
    InputError,
    IntervalReport,
    IoError,
    Ledger,
    OracleCapExceeded,
    Request,
    RequestState,
    RoadNetwork,
    Scenario,
    Schedule,
    ScheduledStop,
    StopKind,
    TracePoint,
    Vehicle,
    admit,
    brute_force_admission,
    brute_force_fleet,
    generate_scenario,
    horizon_csv,
    rechunk,
    run_horizon,
    shortest_path,
    solve_assignment,
    solve_vehicle,
    validate_schedule,
)

__all__ = [name for name in dir() if not name.startswith("_")]
