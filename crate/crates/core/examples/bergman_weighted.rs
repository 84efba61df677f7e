//! Weighted Bergman functions on a disk grid for a two-variable simplex
//! body: the trace identity, the Bernstein–Markov constant and the
//! Kiefer–Wolfowitz gap of the grid measure.

use pluripot::basis::MultiIndexBasis;
use pluripot::design::kw_gap;
use pluripot::geometry::ConvexBody;
use pluripot::gram::GramSystem;
use pluripot::measure::{bm_constant, make_grid, GridSpec, WeightSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let body = ConvexBody::from_name("simplex(2)")?;
    let grid = make_grid(&GridSpec::parse("product(disk(1.5,6,12)*circle(9))")?)?;
    let weight = WeightSpec::Quadratic(0.25);
    for n in 1..=4 {
        let basis = MultiIndexBasis::new(&body, n)?;
        let g = GramSystem::build(&basis, &grid, &weight)?;
        let bm = bm_constant(&grid, &weight, &basis)?;
        let gap = kw_gap(&grid.normalized(), &weight, &basis, grid.points())?;
        println!(
            "n={n} d_n={:<3} sum mB = {:.12}  M_n = {:.4} (>= {:.4})  kw_gap = {:.4}",
            basis.len(),
            g.bergman_mass()?,
            bm.m_n,
            bm.lower_bound,
            gap.gap
        );
    }
    Ok(())
}
