//! Shared fixtures for the kernel benchmarks.

use difflab_core::{ConditionalPair, MixtureComponent, NoiseSchedule, ScenarioSpec, TimestepGrid};

pub const DIM: usize = 8;

pub fn two_mode_pair() -> ConditionalPair {
    ConditionalPair::from_scenario(&ScenarioSpec {
        name: "two_mode".into(),
        dimension: DIM,
        components: vec![
            MixtureComponent {
                weight: 0.5,
                mean: vec![1.0; DIM],
                variance: 0.25,
            },
            MixtureComponent {
                weight: 0.5,
                mean: vec![-1.0; DIM],
                variance: 0.25,
            },
        ],
        target: vec![0],
    })
    .expect("valid scenario")
}

pub fn default_schedule_and_grid(steps: usize) -> (NoiseSchedule, TimestepGrid) {
    let schedule = NoiseSchedule::default_linear();
    let grid = TimestepGrid::new(&schedule, steps).expect("valid grid");
    (schedule, grid)
}
