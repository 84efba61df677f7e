//! Gram determinants of the arcsine measure on [-1,1]. The scaled value
//! `(1/2l_n) log det G_n` equals `log 2/(n+1) - log 2` exactly; the table
//! shows how close the computed value stays.

use std::f64::consts::LN_2;

use pluripot::basis::MultiIndexBasis;
use pluripot::geometry::ConvexBody;
use pluripot::gram::GramSystem;
use pluripot::measure::{make_grid, GridSpec, WeightSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let body = ConvexBody::from_name("interval(0,1)")?;
    let grid = make_grid(&GridSpec::parse("interval(-1,1,chebyshev,64)")?)?;
    println!("{:>3} {:>22} {:>22} {:>10}", "n", "scaled logdet", "exact", "error");
    for n in 1..=24 {
        let g = GramSystem::build(&MultiIndexBasis::new(&body, n)?, &grid, &WeightSpec::Zero)?;
        let v = g.logdet_scaled()?.value;
        let exact = LN_2 / (n + 1) as f64 - LN_2;
        println!("{n:>3} {v:>22.16} {exact:>22.16} {:>10.2e}", (v - exact).abs());
    }
    Ok(())
}
