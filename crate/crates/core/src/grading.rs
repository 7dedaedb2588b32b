//! Point-scale grading of exercise submissions against a rubric.
//!
//! Four modes are supported: fill-in answers ([`Mode::Annotation`]), marking
//! elements ([`Mode::Hotspot`]), placing element kinds on spots
//! ([`Mode::Placement`]), and drawing an activity diagram that is compared
//! with a reference ([`Mode::ElementDiff`]). Wrong marks and placements cost
//! points; scores never drop below zero.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::expr::conditions_equal;
use crate::lint::lint;
use crate::model::{normalize_label, ActivityGraph, Edge, Node, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ElementDiff,
    Annotation,
    Hotspot,
    Placement,
}

impl Mode {
    pub fn from_keyword(word: &str) -> Option<Mode> {
        Some(match word {
            "element_diff" => Mode::ElementDiff,
            "annotation" => Mode::Annotation,
            "hotspot" => Mode::Hotspot,
            "placement" => Mode::Placement,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Mode::ElementDiff => "element_diff",
            Mode::Annotation => "annotation",
            Mode::Hotspot => "hotspot",
            Mode::Placement => "placement",
        }
    }
}

/// Competency letter `A` to `O`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Competency(pub char);

impl Competency {
    pub fn parse(s: &str) -> Option<Self> {
        let mut chars = s.chars();
        let c = chars.next()?.to_ascii_uppercase();
        (chars.next().is_none() && ('A'..='O').contains(&c)).then_some(Competency(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Taxonomy {
    Remember,
    Understand,
    Apply,
    Analyze,
    Evaluate,
    Create,
}

impl Taxonomy {
    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "remember" => Taxonomy::Remember,
            "understand" => Taxonomy::Understand,
            "apply" => Taxonomy::Apply,
            "analyze" => Taxonomy::Analyze,
            "evaluate" => Taxonomy::Evaluate,
            "create" => Taxonomy::Create,
            _ => return None,
        })
    }

    /// Level 1 (remember) to 6 (create).
    pub fn level(self) -> u8 {
        self as u8 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RubricItem {
    pub key: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rubric {
    pub name: String,
    pub mode: Mode,
    pub items: Vec<RubricItem>,
    pub competency: Vec<Competency>,
    pub taxonomy: Option<Taxonomy>,
    /// Reference diagram path for `element_diff`, relative to the rubric file.
    pub reference: Option<String>,
}

impl Rubric {
    pub fn new(name: String, mode: Mode) -> Self {
        Rubric {
            name,
            mode,
            items: Vec::new(),
            competency: Vec::new(),
            taxonomy: None,
            reference: None,
        }
    }

    pub fn max_points(&self) -> f64 {
        self.items.iter().map(|i| i.points).sum()
    }

    fn smallest_item(&self) -> f64 {
        self.items.iter().map(|i| i.points).reduce(f64::min).unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GradeConfig {
    /// Points deducted per wrong mark, wrong placement, or lint error.
    /// Defaults: the smallest item value for marks and placements, 1 for lint errors.
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradeItem {
    pub key: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub earned: f64,
    pub expected: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Penalty {
    pub reason: String,
    pub points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradeReport {
    pub mode: Mode,
    pub earned: f64,
    pub max: f64,
    pub items: Vec<GradeItem>,
    pub penalties: Vec<Penalty>,
    /// Reference elements without a counterpart (element diff only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
    /// Submitted elements without a counterpart (element diff only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<String>,
    pub competency: Vec<Competency>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<Taxonomy>,
}

impl GradeReport {
    fn new(rubric: &Rubric, items: Vec<GradeItem>, penalties: Vec<Penalty>) -> Self {
        let gross: f64 = items.iter().map(|i| i.earned).sum();
        let lost: f64 = penalties.iter().map(|p| p.points).sum();
        GradeReport {
            mode: rubric.mode,
            earned: (gross - lost).max(0.0),
            max: rubric.max_points(),
            items,
            penalties,
            missing: Vec::new(),
            extra: Vec::new(),
            competency: rubric.competency.clone(),
            taxonomy: rubric.taxonomy,
        }
    }

    pub fn full_marks(&self) -> bool {
        self.earned >= self.max
    }
}

fn item(it: &RubricItem, matched: bool) -> GradeItem {
    GradeItem {
        key: it.key.clone(),
        kind: it.kind.clone(),
        earned: if matched { it.points } else { 0.0 },
        expected: it.points,
        matched,
    }
}

/// Answer `i` earns item `i` when it equals the key after normalization.
pub fn grade_annotation(rubric: &Rubric, answers: &[String]) -> GradeReport {
    let items = rubric
        .items
        .iter()
        .enumerate()
        .map(|(i, it)| item(it, answers.get(i).is_some_and(|a| normalize_label(a) == it.key)))
        .collect();
    GradeReport::new(rubric, items, Vec::new())
}

/// Keyed marks earn their points; every other mark costs the penalty.
pub fn grade_hotspot(rubric: &Rubric, marks: &BTreeSet<String>, cfg: GradeConfig) -> GradeReport {
    let marks: BTreeSet<String> = marks.iter().map(|m| normalize_label(m)).collect();
    let items = rubric.items.iter().map(|it| item(it, marks.contains(&it.key))).collect();
    let keys: BTreeSet<&str> = rubric.items.iter().map(|i| i.key.as_str()).collect();
    let per = cfg.penalty.unwrap_or_else(|| rubric.smallest_item());
    let penalties = marks
        .iter()
        .filter(|m| !keys.contains(m.as_str()))
        .map(|m| Penalty {
            reason: format!("`{m}` is not a correct mark"),
            points: per,
        })
        .collect();
    GradeReport::new(rubric, items, penalties)
}

/// A keyed spot earns its points when exactly one placement targets it and
/// the element kind matches. Placements on unkeyed spots cost the penalty.
pub fn grade_placement(rubric: &Rubric, placements: &[(String, String)], cfg: GradeConfig) -> GradeReport {
    let mut by_spot: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (spot, kind) in placements {
        by_spot.entry(normalize_label(spot)).or_default().push(normalize_label(kind));
    }
    by_spot.values_mut().for_each(|v| v.sort());
    let items = rubric
        .items
        .iter()
        .map(|it| {
            let ok = match by_spot.get(&it.key).map(Vec::as_slice) {
                Some([k]) => Some(k) == it.kind.as_ref(),
                _ => false,
            };
            item(it, ok)
        })
        .collect();
    let keys: BTreeSet<&str> = rubric.items.iter().map(|i| i.key.as_str()).collect();
    let per = cfg.penalty.unwrap_or_else(|| rubric.smallest_item());
    let penalties = by_spot
        .iter()
        .filter(|(s, _)| !keys.contains(s.as_str()))
        .flat_map(|(s, kinds)| {
            kinds.iter().map(move |k| Penalty {
                reason: format!("`{k}` placed on unkeyed spot `{s}`"),
                points: per,
            })
        })
        .collect();
    GradeReport::new(rubric, items, penalties)
}

/// Reference element id mapped to the matching submitted element id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ElementMatch {
    pub nodes: BTreeMap<String, String>,
    pub edges: BTreeMap<String, String>,
}

/// Breadth-first rank from the initial nodes; successors in (kind, label, id) order.
fn ranks(nodes: &[&Node], edges: &[&Edge], graphs: &[&ActivityGraph]) -> BTreeMap<String, usize> {
    let by_id: BTreeMap<&str, &Node> = nodes.iter().map(|n| (n.id.as_str(), *n)).collect();
    let order_key = |id: &str| {
        let n = by_id.get(id);
        (
            n.map_or("", |n| n.kind.keyword()),
            n.map(|n| normalize_label(&n.label)).unwrap_or_default(),
            id.to_string(),
        )
    };
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in edges {
        succ.entry(&e.source).or_default().push(&e.target);
    }
    for n in nodes {
        if let Some(body) = &n.body {
            for s in body.nodes_of(NodeKind::Initial) {
                succ.entry(&n.id).or_default().push(&s.id);
            }
        }
    }
    for v in succ.values_mut() {
        v.sort_by_key(|id| order_key(id));
        v.dedup();
    }
    let mut rank = BTreeMap::new();
    let mut queue: VecDeque<&str> = graphs
        .first()
        .map(|g| {
            let mut s: Vec<&str> = g.nodes_of(NodeKind::Initial).map(|n| n.id.as_str()).collect();
            s.sort();
            s.into_iter().collect()
        })
        .unwrap_or_default();
    while let Some(id) = queue.pop_front() {
        if rank.contains_key(id) || !by_id.contains_key(id) {
            continue;
        }
        rank.insert(id.to_string(), rank.len());
        for &s in succ.get(id).map(Vec::as_slice).unwrap_or(&[]) {
            queue.push_back(s);
        }
    }
    let mut rest: Vec<&str> = by_id.keys().copied().filter(|id| !rank.contains_key(*id)).collect();
    rest.sort_by_key(|id| order_key(id));
    for id in rest {
        rank.insert(id.to_string(), rank.len());
    }
    rank
}

fn flatten(g: &ActivityGraph) -> (Vec<&ActivityGraph>, Vec<&Node>, Vec<&Edge>) {
    let graphs = g.all_graphs();
    let nodes = graphs.iter().flat_map(|h| h.nodes.iter()).collect();
    let edges = graphs.iter().flat_map(|h| h.edges.iter()).collect();
    (graphs, nodes, edges)
}

type Groups<'a> = BTreeMap<(&'static str, String), Vec<(usize, &'a str)>>;

/// Nodes grouped by kind and normalized label, each group in rank order.
fn group<'a>(nodes: &[&'a Node], rank: &BTreeMap<String, usize>) -> Groups<'a> {
    let mut g: Groups = BTreeMap::new();
    for n in nodes {
        g.entry((n.kind.keyword(), normalize_label(&n.label)))
            .or_default()
            .push((rank[&n.id], n.id.as_str()));
    }
    for v in g.values_mut() {
        v.sort();
    }
    g
}

/// Greedy label-anchored matching of `student` elements onto `reference` elements.
///
/// Nodes of equal kind and normalized label are paired in breadth-first
/// order from the initial node. A reference flow matches a submitted flow
/// between the matched endpoints with an equivalent guard.
pub fn match_elements(reference: &ActivityGraph, student: &ActivityGraph) -> ElementMatch {
    let (rg, rn, re) = flatten(reference);
    let (sg, sn, se) = flatten(student);
    let rrank = ranks(&rn, &re, &rg);
    let srank = ranks(&sn, &se, &sg);
    let sgroups = group(&sn, &srank);
    let mut m = ElementMatch::default();
    for (key, refs) in group(&rn, &rrank) {
        if let Some(subs) = sgroups.get(&key) {
            for ((_, r), (_, s)) in refs.iter().zip(subs) {
                m.nodes.insert(r.to_string(), s.to_string());
            }
        }
    }
    let mut used = BTreeSet::new();
    let mut re_sorted = re.clone();
    re_sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut se_sorted = se.clone();
    se_sorted.sort_by(|a, b| a.id.cmp(&b.id));
    for e in re_sorted {
        let (Some(src), Some(dst)) = (m.nodes.get(&e.source), m.nodes.get(&e.target)) else {
            continue;
        };
        let found = se_sorted.iter().find(|f| {
            !used.contains(f.id.as_str())
                && &f.source == src
                && &f.target == dst
                && match (&e.guard, &f.guard) {
                    (None, None) => true,
                    (Some(a), Some(b)) => conditions_equal(a, b),
                    _ => false,
                }
        });
        if let Some(f) = found {
            used.insert(f.id.as_str());
            m.edges.insert(e.id.clone(), f.id.clone());
        }
    }
    m
}

/// Matched reference elements earn their item points; each lint error of
/// the submission costs the penalty (default 1).
pub fn grade_element_diff(
    reference: &ActivityGraph,
    student: &ActivityGraph,
    rubric: &Rubric,
    cfg: GradeConfig,
) -> GradeReport {
    let m = match_elements(reference, student);
    let items = rubric
        .items
        .iter()
        .map(|it| item(it, m.nodes.contains_key(&it.key) || m.edges.contains_key(&it.key)))
        .collect();
    let per = cfg.penalty.unwrap_or(1.0);
    let penalties = lint(student)
        .errors()
        .map(|d| Penalty {
            reason: format!("{} at {}", d.rule, d.locus),
            points: per,
        })
        .collect();
    let mut report = GradeReport::new(rubric, items, penalties);
    let (_, rn, re) = flatten(reference);
    let (_, sn, se) = flatten(student);
    let matched_student: BTreeSet<&String> = m.nodes.values().chain(m.edges.values()).collect();
    report.missing = rn
        .iter()
        .map(|n| &n.id)
        .chain(re.iter().map(|e| &e.id))
        .filter(|id| !m.nodes.contains_key(*id) && !m.edges.contains_key(*id))
        .cloned()
        .collect();
    report.extra = sn
        .iter()
        .map(|n| &n.id)
        .chain(se.iter().map(|e| &e.id))
        .filter(|id| !matched_student.contains(id))
        .cloned()
        .collect();
    report.missing.sort();
    report.extra.sort();
    report
}

/// A parsed submission for one of the grading modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Submission {
    Answers(Vec<String>),
    Marks(BTreeSet<String>),
    Placements(Vec<(String, String)>),
    Diagram {
        reference: ActivityGraph,
        student: ActivityGraph,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradeError {
    #[error("rubric mode {rubric} does not accept a {submission} submission")]
    ModeMismatch {
        rubric: &'static str,
        submission: &'static str,
    },
    #[error("line {line}: expected `spot = kind`, found `{text}`")]
    Placement { line: usize, text: String },
}

/// Grades `sub` with the function matching the rubric's mode.
pub fn grade(rubric: &Rubric, sub: &Submission, cfg: GradeConfig) -> Result<GradeReport, GradeError> {
    let mismatch = |submission| GradeError::ModeMismatch {
        rubric: rubric.mode.keyword(),
        submission,
    };
    Ok(match (rubric.mode, sub) {
        (Mode::Annotation, Submission::Answers(a)) => grade_annotation(rubric, a),
        (Mode::Hotspot, Submission::Marks(m)) => grade_hotspot(rubric, m, cfg),
        (Mode::Placement, Submission::Placements(p)) => grade_placement(rubric, p, cfg),
        (Mode::ElementDiff, Submission::Diagram { reference, student }) => {
            grade_element_diff(reference, student, rubric, cfg)
        }
        (_, Submission::Answers(_)) => return Err(mismatch("answer list")),
        (_, Submission::Marks(_)) => return Err(mismatch("mark set")),
        (_, Submission::Placements(_)) => return Err(mismatch("placement list")),
        (_, Submission::Diagram { .. }) => return Err(mismatch("diagram")),
    })
}

/// Non-empty lines that are not `#` comments, trimmed.
pub fn parse_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

/// `spot = kind` lines.
pub fn parse_placements(text: &str) -> Result<Vec<(String, String)>, GradeError> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(line, l)| match l.split_once('=') {
            Some((s, k)) if !s.trim().is_empty() && !k.trim().is_empty() => {
                Ok((s.trim().to_string(), k.trim().to_string()))
            }
            _ => Err(GradeError::Placement {
                line,
                text: l.to_string(),
            }),
        })
        .collect()
}
