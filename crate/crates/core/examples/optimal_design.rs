//! D-optimal measure for degree-n polynomials on a grid of [-1,1]. The
//! optimum concentrates on n+1 Fekete-like atoms with equal mass and
//! brackets the transfinite diameter.

use pluripot::basis::MultiIndexBasis;
use pluripot::design::{optimal_measure, tfd_sandwich, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use pluripot::geometry::ConvexBody;
use pluripot::measure::{make_grid, GridSpec, WeightSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let body = ConvexBody::from_name("interval(0,1)")?;
    let grid = make_grid(&GridSpec::parse("interval(-1,1,uniform,101)")?)?;
    let weight = WeightSpec::Zero;
    for n in [1, 2, 4, 6] {
        let basis = MultiIndexBasis::new(&body, n)?;
        let r = optimal_measure(&grid, &weight, &basis, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
        println!(
            "n={n}: {} iterations (converged: {}), kw_gap {:.2e}, logdet {:.6}",
            r.iterations, r.converged, r.kw_gap, r.logdet
        );
        let atoms: Vec<String> = r
            .measure
            .points()
            .iter()
            .zip(r.measure.masses())
            .filter(|(_, m)| **m > 1e-2)
            .map(|(p, m)| format!("{:+.3}:{m:.3}", p[0].re))
            .collect();
        println!("  atoms {}", atoms.join(" "));
    }
    let basis = MultiIndexBasis::new(&body, 4)?;
    let s = tfd_sandwich(&grid, &weight, &basis, DEFAULT_TOL, DEFAULT_MAX_ITERS, 50)?;
    // the iterate is within kw_gap of the optimal log det
    println!(
        "n=4: 2 log W - d_n log d_n = {:.6} <= max log det in [{:.6}, {:.6}] <= 2 log W - log d_n! = {:.6} (holds: {})",
        s.log_lower,
        s.logdet_opt,
        s.logdet_opt + s.kw_gap,
        s.log_upper,
        s.holds
    );
    Ok(())
}
