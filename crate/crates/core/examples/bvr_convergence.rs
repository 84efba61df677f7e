//! Ball-volume ratios `L_n` between the arcsine measure on [-1,1] and Haar
//! measure on the circle, converging to the energy `log 2`.

use pluripot::experiments::{bvr, BvrConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = BvrConfig::from_json(
        r#"{"body":"interval(0,1)","n_max":40,
            "first":{"grid":"interval(-1,1,chebyshev,128)"},
            "second":{"grid":"circle(128)"},
            "target":{"kind":"energy","case":"interval-vs-torus","n":512}}"#,
    )?;
    println!("{:>3} {:>12} {:>12} {:>10}", "n", "L_n", "target", "gap");
    for r in bvr(&config)?.iter().filter(|r| r.n % 5 == 0 || r.n <= 3) {
        println!("{:>3} {:>12.6} {:>12.6} {:>+10.4}", r.n, r.l_n, r.target, r.gap);
    }
    Ok(())
}
