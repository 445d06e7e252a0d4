use idnc_core::verify::{self, Scale};

#[test]
fn quick_suite_passes() {
    for check in verify::run_all(2024, Scale::Quick) {
        println!("{check}");
        assert!(check.passed, "{check}");
    }
}
