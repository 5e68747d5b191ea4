use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{
    betweenness, connected_components, has_cycle, shortest_distance, Distance, Graph, GraphError,
};
use crate::selection::prompts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    NodeDegree,
    HighestDegree,
    HighestBetweenness,
    ShortestDistance,
    CycleDetection,
    ConnectedComponents,
}

impl TaskKind {
    pub const ALL: [TaskKind; 6] = [
        TaskKind::NodeDegree,
        TaskKind::HighestDegree,
        TaskKind::HighestBetweenness,
        TaskKind::ShortestDistance,
        TaskKind::CycleDetection,
        TaskKind::ConnectedComponents,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::NodeDegree => "node_degree",
            TaskKind::HighestDegree => "highest_degree",
            TaskKind::HighestBetweenness => "highest_betweenness",
            TaskKind::ShortestDistance => "shortest_distance",
            TaskKind::CycleDetection => "cycle_detection",
            TaskKind::ConnectedComponents => "connected_components",
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Int(u64),
    Bool(bool),
    /// No path between the queried nodes; written as `False`.
    Unreachable,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Int(n) => write!(f, "{n}"),
            Answer::Bool(true) => write!(f, "True"),
            Answer::Bool(false) | Answer::Unreachable => write!(f, "False"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskInstance {
    #[serde(skip)]
    pub graph: Graph,
    pub kind: TaskKind,
    /// Node labels named in the question.
    pub params: Vec<u64>,
    pub question_text: String,
    pub truth: Answer,
    /// Every answer graded correct (all tied nodes for the "highest" tasks).
    pub admissible: Vec<Answer>,
}

impl TaskInstance {
    /// The truth written the way a correct reply would be.
    pub fn truth_reply(&self) -> String {
        format!("[{}]", self.truth)
    }
}

fn question(kind: TaskKind) -> &'static str {
    &prompts().bench.questions[kind.name()].text
}

/// Builds a question for `g`, sampling node ids where the template names nodes.
pub fn make_task<R: Rng + ?Sized>(g: &Graph, kind: TaskKind, rng: &mut R) -> Result<TaskInstance, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let template = question(kind);
    let (params, text, truth, admissible) = match kind {
        TaskKind::NodeDegree => {
            let a = rng.random_range(0..n);
            let truth = Answer::Int(g.neighbors(a).len() as u64);
            let text = template.replace("{a}", &g.label(a).to_string());
            (vec![g.label(a)], text, truth, vec![truth])
        }
        TaskKind::HighestDegree | TaskKind::HighestBetweenness => {
            let values: Vec<f64> = if kind == TaskKind::HighestDegree {
                g.nodes().map(|v| g.neighbors(v).len() as f64).collect()
            } else {
                betweenness(g).values
            };
            let max = values.iter().copied().fold(f64::MIN, f64::max);
            // betweenness sums can differ in the last bits between symmetric nodes
            let tied: Vec<Answer> = g
                .nodes()
                .filter(|&v| max - values[v] <= 1e-9 * max.abs().max(1.0))
                .map(|v| Answer::Int(g.label(v)))
                .collect();
            (Vec::new(), template.to_string(), tied[0], tied)
        }
        TaskKind::ShortestDistance => {
            if n < 2 {
                return Err(GraphError::InvalidParameter("distance task needs two nodes".into()));
            }
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            let truth = match shortest_distance(g, a, b)? {
                Distance::Hops(h) => Answer::Int(h as u64),
                Distance::Unreachable => Answer::Unreachable,
            };
            let text = template
                .replace("{a}", &g.label(a).to_string())
                .replace("{b}", &g.label(b).to_string());
            (vec![g.label(a), g.label(b)], text, truth, vec![truth])
        }
        TaskKind::CycleDetection => {
            let truth = Answer::Bool(has_cycle(g));
            (Vec::new(), template.to_string(), truth, vec![truth])
        }
        TaskKind::ConnectedComponents => {
            let truth = Answer::Int(connected_components(g).count() as u64);
            (Vec::new(), template.to_string(), truth, vec![truth])
        }
    };
    Ok(TaskInstance {
        graph: g.clone(),
        kind,
        params,
        question_text: text,
        truth,
        admissible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextStyle {
    Expert,
    Adjacency,
}

impl std::str::FromStr for TextStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expert" => Ok(TextStyle::Expert),
            "adjacency" => Ok(TextStyle::Adjacency),
            other => Err(format!("unknown text style `{other}`")),
        }
    }
}

/// Text form of `g` for language-only baselines. Node ids are positions `0..n`.
pub fn encode_text(g: &Graph, style: TextStyle) -> String {
    let n = g.node_count();
    match style {
        TextStyle::Adjacency => g
            .nodes()
            .map(|u| {
                (0..n)
                    .map(|v| if g.has_edge(u, v) { "1" } else { "0" })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n"),
        TextStyle::Expert => {
            let b = &prompts().bench;
            let mut lines = vec![
                b.lead_text.text.clone(),
                b.expert_nodes
                    .text
                    .replace("{n}", &n.to_string())
                    .replace("{last}", &n.saturating_sub(1).to_string()),
            ];
            lines.extend(g.edges().map(|(u, v)| {
                b.expert_edge
                    .text
                    .replace("{u}", &u.to_string())
                    .replace("{v}", &v.to_string())
            }));
            lines.join("\n")
        }
    }
}

/// Reads back the adjacency encoding.
pub fn parse_adjacency(text: &str) -> Result<Graph, GraphError> {
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().collect())
        .collect();
    let n = rows.len();
    let mut edges = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(GraphError::Parse {
                line: i + 1,
                content: row.join(" "),
            });
        }
        for (j, cell) in row.iter().enumerate() {
            match *cell {
                "1" if i < j => edges.push((i, j)),
                "0" | "1" => {}
                _ => {
                    return Err(GraphError::Parse {
                        line: i + 1,
                        content: row.join(" "),
                    })
                }
            }
        }
    }
    Graph::from_edges(n, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Correct,
    Incorrect,
    Unparseable,
}

/// Reads `[A1]` from a reply: an integer, `True` or `False`.
pub fn parse_answer(raw: &str) -> Option<Answer> {
    let open = raw.find('[')?;
    let close = raw[open..].find(']')? + open;
    let body = raw[open + 1..close].trim().trim_matches(|c| c == '"' || c == '\'');
    match body.to_ascii_lowercase().as_str() {
        "true" => Some(Answer::Bool(true)),
        "false" => Some(Answer::Bool(false)),
        other => other.parse().ok().map(Answer::Int),
    }
}

pub fn grade_detailed(raw: &str, task: &TaskInstance) -> Grade {
    let Some(answer) = parse_answer(raw) else {
        return Grade::Unparseable;
    };
    let hit = task.admissible.iter().any(|a| match (a, answer) {
        (Answer::Unreachable, Answer::Bool(false)) => true,
        (a, b) => *a == b,
    });
    if hit {
        Grade::Correct
    } else {
        Grade::Incorrect
    }
}

pub fn grade(raw: &str, task: &TaskInstance) -> bool {
    grade_detailed(raw, task) == Grade::Correct
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn triangle_has_cycle() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let t = make_task(&tri, TaskKind::CycleDetection, &mut rng()).unwrap();
        assert_eq!(t.truth, Answer::Bool(true));
        assert!(t.question_text.contains("Does the network contain a cycle?"));
        assert!(grade("[True]", &t));
        assert!(!grade("[False]", &t));
    }

    #[test]
    fn unreachable_distance_is_false() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let mut r = rng();
        loop {
            let t = make_task(&g, TaskKind::ShortestDistance, &mut r).unwrap();
            let (a, b) = (t.params[0], t.params[1]);
            if (a < 2) != (b < 2) {
                assert_eq!(t.truth, Answer::Unreachable);
                assert_eq!(t.truth_reply(), "[False]");
                assert!(grade("[False]", &t));
                assert!(t.question_text.contains(&format!("between node {a} and node {b}")));
                break;
            }
        }
    }

    #[test]
    fn ties_are_admissible() {
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let t = make_task(&star, TaskKind::HighestDegree, &mut rng()).unwrap();
        assert_eq!(t.admissible, vec![Answer::Int(0)]);
        let two_hubs = Graph::from_edges(6, [(0, 2), (0, 3), (1, 4), (1, 5)]).unwrap();
        let t = make_task(&two_hubs, TaskKind::HighestDegree, &mut rng()).unwrap();
        assert!(grade("[0]", &t) && grade("[1]", &t));
        assert!(!grade("[2]", &t));
    }

    #[test]
    fn grading_cases() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 1)]).unwrap();
        let t = make_task(&g, TaskKind::ConnectedComponents, &mut rng()).unwrap();
        assert!(grade("[1]", &t));
        assert_eq!(grade_detailed("one", &t), Grade::Unparseable);
        assert_eq!(grade_detailed("[2]", &t), Grade::Incorrect);
        for kind in TaskKind::ALL {
            let t = make_task(&g, kind, &mut rng()).unwrap();
            assert!(grade(&t.truth_reply(), &t), "{kind:?}");
        }
    }

    #[test]
    fn encodings() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(encode_text(&g, TextStyle::Adjacency), "0 1\n1 0");
        let tri = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let expert = encode_text(&tri, TextStyle::Expert);
        assert_eq!(expert.matches("is connected to").count(), 3);
        let back = parse_adjacency(&encode_text(&tri, TextStyle::Adjacency)).unwrap();
        assert_eq!(back.node_count(), 4);
        assert_eq!(back.edges().collect::<Vec<_>>(), tri.edges().collect::<Vec<_>>());
        assert!(parse_adjacency("0 1\n1").is_err());
    }
}
