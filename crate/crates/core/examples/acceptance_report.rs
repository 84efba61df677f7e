//! Runs every acceptance criterion and prints one line each.

fn main() {
    let reports = pluripot::acceptance::run_all();
    for r in &reports {
        println!("{}", r.line());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
}
