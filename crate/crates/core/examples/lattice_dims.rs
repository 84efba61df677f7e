//! Lattice dimensions `d_n`, `l_n` and the normalized ratio `f_n` for the
//! builtin bodies, next to the limit `lim f_n`.

use pluripot::basis::{a_limit, dims};
use pluripot::geometry::ConvexBody;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["simplex(2)", "simplex(3)", "box(2)", "interval(1,3)"] {
        let body = ConvexBody::from_name(name)?;
        let a = a_limit(&body)?;
        let k = body.simplex_inclusion();
        println!("{name}: lim f_n = {a}, inclusion k = {:?}, A = {}", k.k, k.a);
        for n in [1, 2, 5, 10, 50] {
            let d = dims(&body, n)?;
            println!("  n={n:<3} d_n={:<8} l_n={:<10} f_n={:.6}", d.d_n, d.l_n, *d.f_n.numer() as f64 / *d.f_n.denom() as f64);
        }
    }
    Ok(())
}
