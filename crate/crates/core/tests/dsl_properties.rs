use chernforge::dsl::{parse, pretty::pretty, run_source, ExecOptions};
use proptest::prelude::*;

const BASE: &str = "model P(4);\nline L gg c1 = H;\nbundle E rank 2 gg_twist chern = [H, H^2];\n\
let t = c2(E*L);\ncertify_top E L;\nexpress t in [H];\nsyzygy E p=2 n=0 sign=+ z=H^2;\nkleiman d=4 i=2;\n";

fn in_source(src: &str, line: u32, column: u32) -> bool {
    let lines: Vec<&str> = src.split('\n').collect();
    line >= 1
        && (line as usize) <= lines.len()
        && column >= 1
        && (column as usize) <= lines[line as usize - 1].chars().count() + 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Random edits never crash the front end, every diagnostic points into
    /// the source, and the exit code follows the diagnostics.
    #[test]
    fn mutated_programs_diagnose(cut in 0usize..BASE.len(), len in 0usize..6, insert in "[ a-zA-Z0-9;=+*^()\\[\\],-]{0,4}") {
        let mut end = (cut + len).min(BASE.len());
        while !BASE.is_char_boundary(end) {
            end += 1;
        }
        let src = format!("{}{}{}", &BASE[..cut], insert, &BASE[end..]);
        let report = run_source(&src, &ExecOptions { verify: true, max_degree: None });
        for d in &report.diagnostics {
            prop_assert!(in_source(&src, d.line, d.column), "{d} in {src:?}");
        }
        prop_assert_eq!(report.exit_code() == 0, report.diagnostics.is_empty() && report.failed_verifications == 0);
        if let Ok(program) = parse(&src) {
            let once = pretty(&program);
            prop_assert_eq!(pretty(&parse(&once).unwrap()), once);
        }
    }
}

#[test]
fn base_program_succeeds() {
    let report = run_source(BASE, &ExecOptions { verify: true, max_degree: None });
    assert!(report.is_success(), "{:?}", report.diagnostics);
    assert_eq!(report.to_json(), run_source(BASE, &ExecOptions { verify: true, max_degree: None }).to_json());
}
