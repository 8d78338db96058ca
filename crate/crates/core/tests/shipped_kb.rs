mod common;

use advisor_core::kb_admin::validate_all;

#[test]
fn shipped_kb_is_clean() {
    let snapshot = common::shipped();
    let report = validate_all(&snapshot);
    assert!(report.is_empty(), "{report}");
}
