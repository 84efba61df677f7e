//! Discrete mutual energy of extremal functions in one variable. The
//! Green function of [-1,1] against `log⁺|z|` has energy `log 2`; the
//! error shrinks as the lattice is refined.

use pluripot::energy::{ddc_1d, run_energy_case, EnergyCase, GridFunction1D, DEFAULT_EXTENT};
use pluripot::extremal::ExtremalCase;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["interval-vs-torus", "disk-vs-torus", "torus-shift(0.3)"] {
        let case = EnergyCase::from_name(name)?;
        for n in [128, 256, 512, 1024] {
            let r = run_energy_case(&case, n, DEFAULT_EXTENT)?;
            println!("{name:<18} N={n:<5} E={:.8} target={:.8} error={:+.2e}", r.energy, r.target, r.error);
        }
    }
    let green = GridFunction1D::from_case(&ExtremalCase::IntervalGreen, 0.5 * DEFAULT_EXTENT, 512)?;
    let m = ddc_1d(&green)?;
    println!("dd^c mass of the Green function: interior {:.6} + flux {:.6} = {:.6}", m.interior, m.flux, m.total);
    Ok(())
}
