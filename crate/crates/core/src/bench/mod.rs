//! Synthetic graph generators and the six basic graph questions used to
//! probe selectors, with grading.

mod generate;
mod harness;
mod tasks;

pub use generate::{
    batch_stats, generate, graph_stats, BatchStats, Difficulty, Family, FamilyParams, GenSpec,
    GraphStats, MeanSe,
};
pub use harness::{
    run_benchmark, AccuracyRow, BenchReport, InstanceRecord, Presentation, DEFAULT_INSTANCES,
};
pub use tasks::{
    encode_text, grade, grade_detailed, make_task, parse_adjacency, parse_answer, Answer, Grade,
    TaskInstance, TaskKind, TextStyle,
};
