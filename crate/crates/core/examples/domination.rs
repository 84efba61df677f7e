//! Domination of random polynomials by their extremal function: off the
//! set, `|p(z)| <= ‖p‖_K exp(n V*(z))`. Prints the largest observed ratio
//! and compares the Bergman surrogate for `V*` with the closed form.

use num_complex::Complex64;
use pluripot::basis::MultiIndexBasis;
use pluripot::extremal::{domination_check, extremal_bergman_approx, ExtremalCase};
use pluripot::geometry::ConvexBody;
use pluripot::gram::GramSystem;
use pluripot::measure::{make_grid, GridSpec, WeightSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let body = ConvexBody::from_name("interval(0,1)")?;
    let grid = make_grid(&GridSpec::parse("interval(-1,1,chebyshev,1000)")?)?;
    let case = ExtremalCase::IntervalGreen;
    let points = case.test_points(200, 1);
    for n in [5, 10, 20] {
        let basis = MultiIndexBasis::new(&body, n)?;
        let r = domination_check(&basis, &grid, &WeightSpec::Zero, &case, 100, &points, 42)?;
        let g = GramSystem::build(&basis, &grid, &WeightSpec::Zero)?;
        let z = [Complex64::new(1.5, 0.5)];
        println!(
            "n={n:<3} max ratio {:.4}  V(z)={:.5}  surrogate {:.5}",
            r.max_ratio,
            case.eval(&z)?,
            extremal_bergman_approx(&g, &z)?
        );
    }
    Ok(())
}
