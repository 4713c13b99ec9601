mod common;

use common::{check_goldens, greedy_goldens, star_goldens};

#[test]
fn golden_case_counts() {
    // 3 sorts x 3 resolves x temporal on/off, on two fixtures
    assert_eq!(star_goldens().len(), 36);
    assert_eq!(greedy_goldens().len(), 8);
}

#[test]
fn hand_traced_executions_match() {
    let failures = check_goldens();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
