use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generate::{generate, GenSpec};
use super::tasks::{encode_text, grade_detailed, make_task, Grade, TaskKind, TextStyle};
use crate::community::detect_communities;
use crate::layout::{compute_layout, LayoutKind, DEFAULT_FR_ITERATIONS};
use crate::render::{rasterize, render, RenderSpec};
use crate::selection::{
    prompts, query, Backend, QueryContext, ResponseCache, SelectorRequest, TaskHint,
    DEFAULT_TEMPERATURE,
};

pub const DEFAULT_INSTANCES: usize = 200;
const BENCH_CANVAS_PX: u32 = 768;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Presentation {
    /// Rendered drawing; `communities` colours nodes by detected community.
    Image { layout: LayoutKind, communities: bool },
    Text { style: TextStyle },
}

impl Presentation {
    pub fn name(&self) -> String {
        match self {
            Presentation::Image { layout, communities } => {
                let l = match layout {
                    LayoutKind::FruchtermanReingold => "fr",
                    LayoutKind::Circle => "circle",
                    LayoutKind::Grid => "grid",
                };
                if *communities {
                    format!("image-{l}-p")
                } else {
                    format!("image-{l}")
                }
            }
            Presentation::Text { style: TextStyle::Expert } => "text-expert".into(),
            Presentation::Text { style: TextStyle::Adjacency } => "text-adjacency".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance: usize,
    pub task: TaskKind,
    pub truth: String,
    pub reply: Option<String>,
    pub grade: Option<Grade>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub family: super::Family,
    pub difficulty: super::Difficulty,
    pub task: TaskKind,
    pub presentation: String,
    pub instances: usize,
    pub correct: usize,
    pub unparseable: usize,
    pub errors: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub spec: GenSpec,
    pub presentation: Presentation,
    pub rng_seed: u64,
    pub rows: Vec<AccuracyRow>,
    pub records: Vec<InstanceRecord>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("family,difficulty,task,presentation,instances,correct,unparseable,errors,accuracy\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:.4}\n",
                serde_json::to_value(r.family).unwrap().as_str().unwrap_or_default(),
                serde_json::to_value(r.difficulty).unwrap().as_str().unwrap_or_default(),
                r.task.name(),
                r.presentation,
                r.instances,
                r.correct,
                r.unparseable,
                r.errors,
                r.accuracy
            ));
        }
        out
    }

    pub fn accuracy(&self, task: TaskKind) -> Option<f64> {
        self.rows.iter().find(|r| r.task == task).map(|r| r.accuracy)
    }
}

/// Seed of the `i`-th instance graph of a run.
fn instance_seed(rng_seed: u64, i: usize) -> u64 {
    rng_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)
}

/// Asks every task about `n_instances` generated graphs and grades the replies.
/// Backend failures count as wrong answers and are kept in the records.
pub fn run_benchmark(
    spec: &GenSpec,
    tasks: &[TaskKind],
    n_instances: usize,
    backend: &dyn Backend,
    presentation: Presentation,
    rng_seed: u64,
    cache: Option<&ResponseCache>,
) -> Result<BenchReport, String> {
    spec.validate()?;
    if let Presentation::Text { .. } = presentation {
        if backend.needs_image() {
            log::info!("text presentation: requests go out without an image");
        }
    }
    let mut records = Vec::new();
    for i in 0..n_instances {
        let seed = instance_seed(rng_seed, i);
        let g = generate(spec, seed);
        let (image, lead) = match presentation {
            Presentation::Image { layout, communities } => {
                let coords = compute_layout(&g, layout, seed, DEFAULT_FR_ITERATIONS);
                let asg = communities.then(|| detect_communities(&g, seed));
                let rspec = RenderSpec {
                    canvas_px: (BENCH_CANVAS_PX, BENCH_CANVAS_PX),
                    node_radius_px: 14.0,
                    label_font_px: 20.0,
                    edge_width_px: 2.0,
                    ..RenderSpec::full_label()
                };
                let mut img = render(&g, &coords, asg.as_ref(), &rspec).map_err(|e| e.to_string())?;
                if backend.needs_image() {
                    img = rasterize(&img, 1.0).map_err(|e| e.to_string())?;
                }
                (Some(img), prompts().bench.lead_image.text.clone())
            }
            Presentation::Text { style } => {
                let text = match style {
                    TextStyle::Expert => encode_text(&g, style),
                    TextStyle::Adjacency => format!(
                        "{}\n{}",
                        prompts().bench.lead_text.text,
                        encode_text(&g, style)
                    ),
                };
                (None, text)
            }
        };
        for (t, &kind) in tasks.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64 + 1);
            let task = make_task(&g, kind, &mut rng).map_err(|e| e.to_string())?;
            let prompt = format!("{lead}\n{}", task.question_text);
            let req = SelectorRequest::new(image.clone(), prompt, backend.model_name(), DEFAULT_TEMPERATURE, 0);
            let ctx = QueryContext {
                graph: &g,
                task: TaskHint::Question {
                    truth_reply: task.truth_reply(),
                },
            };
            let mut rec = InstanceRecord {
                instance: i,
                task: kind,
                truth: task.truth.to_string(),
                reply: None,
                grade: None,
                error: None,
            };
            match query(backend, &req, &ctx, cache) {
                Ok(resp) => {
                    let g = grade_detailed(&resp.raw_text, &task);
                    if g == Grade::Unparseable {
                        log::debug!("instance {i} {}: unparseable reply {:?}", kind.name(), resp.raw_text);
                    }
                    rec.grade = Some(g);
                    rec.reply = Some(resp.raw_text);
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            records.push(rec);
        }
    }

    let rows = tasks
        .iter()
        .map(|&kind| {
            let mine: Vec<&InstanceRecord> = records.iter().filter(|r| r.task == kind).collect();
            let correct = mine.iter().filter(|r| r.grade == Some(Grade::Correct)).count();
            AccuracyRow {
                family: spec.family,
                difficulty: spec.difficulty,
                task: kind,
                presentation: presentation.name(),
                instances: mine.len(),
                correct,
                unparseable: mine.iter().filter(|r| r.grade == Some(Grade::Unparseable)).count(),
                errors: mine.iter().filter(|r| r.error.is_some()).count(),
                accuracy: if mine.is_empty() { 0.0 } else { correct as f64 / mine.len() as f64 },
            }
        })
        .collect();
    Ok(BenchReport {
        spec: *spec,
        presentation,
        rng_seed,
        rows,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{Difficulty, Family};
    use crate::graph::CentralityMethod;
    use crate::selection::{HeuristicBackend, OracleBackend, ScriptedBackend};

    #[test]
    fn oracle_scores_everything() {
        let spec = GenSpec::standard(Family::Ws, Difficulty::Easy);
        let text = Presentation::Text { style: TextStyle::Adjacency };
        let report = run_benchmark(&spec, &TaskKind::ALL, 20, &OracleBackend, text, 3, None).unwrap();
        assert!(report.rows.iter().all(|r| r.accuracy == 1.0 && r.instances == 20));
        let image = Presentation::Image {
            layout: LayoutKind::Circle,
            communities: true,
        };
        let report = run_benchmark(&spec, &TaskKind::ALL, 3, &OracleBackend, image, 3, None).unwrap();
        assert!(report.rows.iter().all(|r| r.accuracy == 1.0));
    }

    #[test]
    fn constant_wrong_reply() {
        // BA graphs always contain a cycle, so "[0]" never grades correct
        let spec = GenSpec::standard(Family::Ba, Difficulty::Easy);
        let backend = ScriptedBackend::new(vec!["[0]".into()], true);
        let text = Presentation::Text { style: TextStyle::Expert };
        let report =
            run_benchmark(&spec, &[TaskKind::CycleDetection], 10, &backend, text, 0, None).unwrap();
        assert_eq!(report.accuracy(TaskKind::CycleDetection), Some(0.0));
        assert!(report.to_csv().lines().nth(1).unwrap().starts_with("ba,easy,cycle_detection,text-expert,10,0,"));
    }

    #[test]
    fn backend_errors_are_recorded() {
        let spec = GenSpec::standard(Family::Er, Difficulty::Easy);
        let backend = HeuristicBackend::new(CentralityMethod::Degree);
        let text = Presentation::Text { style: TextStyle::Adjacency };
        let report = run_benchmark(&spec, &[TaskKind::NodeDegree], 4, &backend, text, 0, None).unwrap();
        assert_eq!(report.rows[0].errors, 4);
        assert_eq!(report.rows[0].accuracy, 0.0);
    }
}
