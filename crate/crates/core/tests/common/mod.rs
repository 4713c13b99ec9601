//! Hand-traced fixtures shared by the golden and acceptance tests.
//!
//! Every expected trace below was worked out by hand from the algorithm
//! definitions, not by running the code.

#![allow(dead_code)]

use chrono::NaiveDate;
use kinlink::greedy::{greedy_cluster_traced, GreedyEvent, GreedyParams, SelectMethod};
use kinlink::star::{star_cluster_traced, ResolveMethod, SortMethod, StarEvent, StarParams};
use kinlink::{RecordId, SimilarityGraph, TemporalConstraintModel, TemporalGate};

pub fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

pub fn graph(
    nodes: &[(RecordId, NaiveDate)],
    edges: &[(RecordId, RecordId, f64)],
) -> SimilarityGraph {
    let mut g = SimilarityGraph::new(0.7);
    for &(id, d) in nodes {
        g.add_node(id, d);
    }
    for &(a, b, w) in edges {
        g.add_edge(a, b, w).unwrap();
    }
    g
}

/// Node 3 is 101 days after node 2; node 6 is over 40 years after nodes 4
/// and 5. Record 9 is not in the graph.
pub fn star_fixture_a() -> SimilarityGraph {
    graph(
        &[
            (1, ymd(1870, 1, 1)),
            (2, ymd(1872, 1, 1)),
            (3, ymd(1872, 4, 11)),
            (4, ymd(1874, 1, 1)),
            (5, ymd(1876, 1, 1)),
            (6, ymd(1916, 1, 1)),
            (7, ymd(1918, 1, 1)),
            (8, ymd(1920, 1, 1)),
        ],
        &[
            (1, 2, 0.95),
            (1, 3, 0.90),
            (1, 4, 0.80),
            (2, 3, 0.85),
            (3, 4, 0.72),
            (4, 5, 0.90),
            (4, 6, 0.75),
            (5, 6, 0.80),
            (6, 7, 0.93),
            (7, 8, 0.70),
        ],
    )
}

/// The three sort methods pick different first centres.
pub fn star_fixture_b() -> SimilarityGraph {
    graph(
        &(1..=9)
            .map(|id| (id, ymd(1878 + 2 * id as i32, 1, 1)))
            .collect::<Vec<_>>(),
        &[
            (1, 2, 0.99),
            (1, 3, 0.99),
            (1, 4, 0.98),
            (2, 5, 0.72),
            (3, 5, 0.73),
            (5, 6, 0.72),
            (5, 7, 0.73),
            (8, 9, 1.0),
        ],
    )
}

/// Node 3 is 92 days after node 2; node 6 is plausible only with node 5;
/// node 8 is isolated and record 9 is not in the graph.
pub fn greedy_fixture() -> SimilarityGraph {
    graph(
        &[
            (1, ymd(1870, 1, 1)),
            (2, ymd(1871, 6, 1)),
            (3, ymd(1871, 9, 1)),
            (4, ymd(1873, 1, 1)),
            (5, ymd(1875, 1, 1)),
            (6, ymd(1912, 1, 1)),
            (7, ymd(1914, 1, 1)),
            (8, ymd(1880, 1, 1)),
        ],
        &[
            (1, 2, 0.90),
            (1, 3, 0.85),
            (2, 3, 0.80),
            (2, 4, 0.88),
            (3, 4, 0.75),
            (4, 5, 0.92),
            (5, 6, 0.80),
            (1, 5, 0.72),
            (6, 7, 0.95),
            (4, 6, 0.71),
        ],
    )
}

pub struct StarGolden {
    pub fixture: &'static str,
    pub sort: SortMethod,
    pub resolve: ResolveMethod,
    pub temporal: bool,
    pub trace: Vec<StarEvent>,
    pub clusters: Vec<Vec<RecordId>>,
}

pub struct GreedyGolden {
    pub select: SelectMethod,
    pub retry: bool,
    pub temporal: bool,
    pub trace: Vec<GreedyEvent>,
    pub clusters: Vec<Vec<RecordId>>,
}

fn star_events(grow: &str, resolve: &[(RecordId, RecordId)]) -> Vec<StarEvent> {
    let mut out: Vec<StarEvent> = grow
        .split_whitespace()
        .map(|tok| {
            let id: RecordId = tok[1..].parse().unwrap();
            match &tok[..1] {
                "C" => StarEvent::Centre(id),
                "A" => StarEvent::Admit(id),
                "R" => StarEvent::Reject(id),
                other => panic!("bad token {other}"),
            }
        })
        .collect();
    out.extend(
        resolve
            .iter()
            .map(|&(node, centre)| StarEvent::Resolve { node, centre }),
    );
    out
}

pub fn star_goldens() -> Vec<StarGolden> {
    use ResolveMethod::{AvrAll, AvrHigh, EdgeRatio};
    use SortMethod::{AvrSimFirst, Comb, DegreeFirst};
    let mut out = Vec::new();
    let mut push = |fixture,
                    sort,
                    resolve,
                    temporal,
                    grow: &str,
                    res: &[(RecordId, RecordId)],
                    clusters: &[&[RecordId]]| {
        out.push(StarGolden {
            fixture,
            sort,
            resolve,
            temporal,
            trace: star_events(grow, res),
            clusters: clusters.iter().map(|c| c.to_vec()).collect(),
        })
    };

    // fixture a, no temporal model
    let grow_as = "C2 A1 A3 C5 A4 A6 C7 A6 A8";
    let grow_df = "C4 A5 A1 A3 A6 C2 A1 A3 C7 A6 A8";
    push(
        "a",
        AvrSimFirst,
        AvrAll,
        false,
        grow_as,
        &[(6, 5)],
        &[&[1, 2, 3], &[4, 5, 6], &[7, 8], &[9]],
    );
    push(
        "a",
        AvrSimFirst,
        AvrHigh,
        false,
        grow_as,
        &[(6, 7)],
        &[&[1, 2, 3], &[4, 5], &[6, 7, 8], &[9]],
    );
    push(
        "a",
        AvrSimFirst,
        EdgeRatio,
        false,
        grow_as,
        &[(6, 5)],
        &[&[1, 2, 3], &[4, 5, 6], &[7, 8], &[9]],
    );
    for sort in [DegreeFirst, Comb] {
        push(
            "a",
            sort,
            AvrAll,
            false,
            grow_df,
            &[(1, 2), (3, 2), (6, 7)],
            &[&[1, 2, 3], &[4, 5], &[6, 7, 8], &[9]],
        );
        push(
            "a",
            sort,
            AvrHigh,
            false,
            grow_df,
            &[(1, 2), (3, 2), (6, 7)],
            &[&[1, 2, 3], &[4, 5], &[6, 7, 8], &[9]],
        );
        push(
            "a",
            sort,
            EdgeRatio,
            false,
            grow_df,
            &[(1, 2), (3, 2), (6, 4)],
            &[&[1, 2, 3], &[4, 5, 6], &[7, 8], &[9]],
        );
    }

    // fixture a, default temporal model
    let grow_as = "C2 A1 R3 C5 A4 R6 C6 A7 R4 C3 A1 A4 C8 A7";
    let grow_df = "C4 A5 A1 A3 R6 C6 A7 R5 C2 A1 R3 C8 A7";
    let split_as: &[&[RecordId]] = &[&[1, 2], &[3], &[4, 5], &[6, 7], &[8], &[9]];
    push(
        "a",
        AvrSimFirst,
        AvrAll,
        true,
        grow_as,
        &[(1, 2), (4, 5), (7, 6)],
        split_as,
    );
    push(
        "a",
        AvrSimFirst,
        AvrHigh,
        true,
        grow_as,
        &[(1, 2), (4, 5), (7, 6)],
        split_as,
    );
    push(
        "a",
        AvrSimFirst,
        EdgeRatio,
        true,
        grow_as,
        &[(1, 3), (4, 3), (7, 6)],
        &[&[1, 3, 4], &[2], &[5], &[6, 7], &[8], &[9]],
    );
    for sort in [DegreeFirst, Comb] {
        for resolve in [AvrAll, AvrHigh, EdgeRatio] {
            push(
                "a",
                sort,
                resolve,
                true,
                grow_df,
                &[(1, 2), (7, 6)],
                &[&[1, 2], &[3, 4, 5], &[6, 7], &[8], &[9]],
            );
        }
    }

    // fixture b: every date pair is plausible, so the model changes nothing
    for temporal in [false, true] {
        let grow = "C8 A9 C1 A2 A3 A4 C7 A5 C6 A5";
        push(
            "b",
            AvrSimFirst,
            AvrAll,
            temporal,
            grow,
            &[(5, 7)],
            &[&[1, 2, 3, 4], &[5, 7], &[6], &[8, 9]],
        );
        push(
            "b",
            AvrSimFirst,
            AvrHigh,
            temporal,
            grow,
            &[(5, 7)],
            &[&[1, 2, 3, 4], &[5, 7], &[6], &[8, 9]],
        );
        push(
            "b",
            AvrSimFirst,
            EdgeRatio,
            temporal,
            grow,
            &[(5, 6)],
            &[&[1, 2, 3, 4], &[5, 6], &[7], &[8, 9]],
        );
        for (sort, grow) in [
            (DegreeFirst, "C5 A3 A7 A2 A6 C1 A2 A3 A4 C8 A9"),
            (Comb, "C1 A2 A3 A4 C5 A3 A7 A2 A6 C8 A9"),
        ] {
            for resolve in [AvrAll, AvrHigh, EdgeRatio] {
                push(
                    "b",
                    sort,
                    resolve,
                    temporal,
                    grow,
                    &[(2, 1), (3, 1)],
                    &[&[1, 2, 3, 4], &[5, 6, 7], &[8, 9]],
                );
            }
        }
    }
    out
}

fn greedy_events(spec: &str) -> Vec<GreedyEvent> {
    let ids = |s: &str| -> Vec<RecordId> { s.split(',').map(|x| x.parse().unwrap()).collect() };
    spec.split_whitespace()
        .map(|tok| {
            if let Some(rest) = tok.strip_prefix("P") {
                GreedyEvent::Pop(ids(rest))
            } else if let Some(rest) = tok.strip_prefix("F") {
                GreedyEvent::Finalise(ids(rest))
            } else if let Some(rest) = tok.strip_prefix("I") {
                GreedyEvent::Isolated(rest.parse().unwrap())
            } else if let Some(rest) = tok.strip_prefix("S") {
                GreedyEvent::Select(rest.parse().unwrap())
            } else if let Some(rest) = tok.strip_prefix("A") {
                GreedyEvent::Admit(rest.parse().unwrap())
            } else if let Some(rest) = tok.strip_prefix("R") {
                GreedyEvent::Reject(rest.parse().unwrap())
            } else {
                panic!("bad token {tok}")
            }
        })
        .collect()
}

/// (select, retry, temporal, trace, clusters)
type GreedyRow = (
    SelectMethod,
    bool,
    bool,
    &'static str,
    &'static [&'static [RecordId]],
);

pub fn greedy_goldens() -> Vec<GreedyGolden> {
    use SelectMethod::{AvrSim, MaxSim, Next};
    let rows: [GreedyRow; 8] = [
        (
            Next,
            false,
            false,
            "I8 P1 S2 A2 P1,2 S3 A3 P1,2,3 S4 A4 P1,2,3,4 S5 A5 P1,2,3,4,5 S6 A6 \
             P1,2,3,4,5,6 S7 A7 P1,2,3,4,5,6,7 F1,2,3,4,5,6,7",
            &[&[1, 2, 3, 4, 5, 6, 7], &[8], &[9]],
        ),
        (
            Next,
            false,
            true,
            "I8 P1 S2 A2 P1,2 S3 R3 F1,2 P3 S4 A4 P3,4 S5 A5 P3,4,5 S6 R6 F3,4,5 \
             P6 S7 A7 P6,7 F6,7",
            &[&[1, 2], &[3, 4, 5], &[6, 7], &[8], &[9]],
        ),
        (
            MaxSim,
            false,
            false,
            "I8 P1 S2 A2 P1,2 S4 A4 P3 F3 P1,2,4 S5 A5 P1,2,4,5 S3 A3 P1,2,4,5,3 S6 A6 \
             P1,2,4,5,3,6 S7 A7 P1,2,4,5,3,6,7 F1,2,4,5,3,6,7",
            &[&[1, 2, 3, 4, 5, 6, 7], &[8], &[9]],
        ),
        (
            MaxSim,
            false,
            true,
            "I8 P1 S2 A2 P1,2 S4 A4 P3 F3 P1,2,4 S5 A5 P1,2,4,5 S3 R3 F1,2,4,5 \
             P6 S7 A7 P6,7 F6,7",
            &[&[1, 2, 4, 5], &[3], &[6, 7], &[8], &[9]],
        ),
        (
            MaxSim,
            true,
            true,
            "I8 P1 S2 A2 P1,2 S4 A4 P3 F3 P1,2,4 S5 A5 P1,2,4,5 S3 R3 S6 R6 F1,2,4,5 \
             P6 S7 A7 P6,7 F6,7",
            &[&[1, 2, 4, 5], &[3], &[6, 7], &[8], &[9]],
        ),
        (
            AvrSim,
            false,
            false,
            "I8 P1 S2 A2 P1,2 S4 A4 P3 F3 P1,2,4 S3 A3 P1,2,4,3 S5 A5 P1,2,4,3,5 S6 A6 \
             P1,2,4,3,5,6 S7 A7 P1,2,4,3,5,6,7 F1,2,4,3,5,6,7",
            &[&[1, 2, 3, 4, 5, 6, 7], &[8], &[9]],
        ),
        (
            AvrSim,
            false,
            true,
            "I8 P1 S2 A2 P1,2 S4 A4 P3 F3 P1,2,4 S3 R3 F1,2,4 P5 S6 A6 P5,6 S7 R7 F5,6 \
             P7 F7",
            &[&[1, 2, 4], &[3], &[5, 6], &[7], &[8], &[9]],
        ),
        (
            AvrSim,
            true,
            true,
            "I8 P1 S2 A2 P1,2 S4 A4 P3 F3 P1,2,4 S3 R3 S5 A5 P1,2,4,5 S3 R3 S6 R6 F1,2,4,5 \
             P6 S7 A7 P6,7 F6,7",
            &[&[1, 2, 4, 5], &[3], &[6, 7], &[8], &[9]],
        ),
    ];
    rows.into_iter()
        .map(|(select, retry, temporal, trace, clusters)| GreedyGolden {
            select,
            retry,
            temporal,
            trace: greedy_events(trace),
            clusters: clusters.iter().map(|c| c.to_vec()).collect(),
        })
        .collect()
}

/// Runs every golden case; returns one message per mismatch.
pub fn check_goldens() -> Vec<String> {
    let model = TemporalConstraintModel::default();
    let gate = |on: bool| TemporalGate::new(on.then_some(&model), 0.5);
    let mut failures = Vec::new();
    let (a, b) = (star_fixture_a(), star_fixture_b());
    for case in star_goldens() {
        let g = if case.fixture == "a" { &a } else { &b };
        let params = StarParams {
            s_min: 0.7,
            sort: case.sort,
            resolve: case.resolve,
        };
        let (c, trace) = star_cluster_traced(g, 1..=9, gate(case.temporal), params).unwrap();
        let label = format!(
            "star fixture {} {}/{} temporal={}",
            case.fixture, case.sort, case.resolve, case.temporal
        );
        if trace != case.trace {
            failures.push(format!("{label}: trace {trace:?}"));
        }
        if c.clusters() != case.clusters {
            failures.push(format!("{label}: clusters {:?}", c.clusters()));
        }
    }
    let g = greedy_fixture();
    for case in greedy_goldens() {
        let params = GreedyParams {
            select: case.select,
            retry_on_rejection: case.retry,
        };
        let (c, trace) = greedy_cluster_traced(&g, 1..=9, gate(case.temporal), params).unwrap();
        let label = format!(
            "greedy {} retry={} temporal={}",
            case.select, case.retry, case.temporal
        );
        if trace != case.trace {
            failures.push(format!("{label}: trace {trace:?}"));
        }
        if c.clusters() != case.clusters {
            failures.push(format!("{label}: clusters {:?}", c.clusters()));
        }
    }
    failures
}
