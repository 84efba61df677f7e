//! Discrete Fekete points for [0,1]-polynomials on a Chebyshev grid of
//! [-1,1]: the transfinite-diameter sequence and the second moment of the
//! Fekete counting measure (arcsine value 1/2).

use pluripot::basis::MultiIndexBasis;
use pluripot::fekete::{fekete_moments, fekete_search, DEFAULT_MAX_PASSES};
use pluripot::geometry::ConvexBody;
use pluripot::measure::{make_grid, GridSpec, WeightSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let body = ConvexBody::from_name("interval(0,1)")?;
    let grid = make_grid(&GridSpec::parse("interval(-1,1,chebyshev,2000)")?)?;
    println!("{:>4} {:>12} {:>8} {:>10}", "n", "delta_n", "passes", "m_2");
    for n in [5, 10, 20, 30, 40] {
        let basis = MultiIndexBasis::new(&body, n)?;
        let res = fekete_search(&grid, &WeightSpec::Zero, &basis, DEFAULT_MAX_PASSES)?;
        let m2 = fekete_moments(&res.points)?[1].power_moment;
        println!("{n:>4} {:>12.6} {:>8} {m2:>10.6}", res.delta_wn, res.iterations);
    }
    Ok(())
}
