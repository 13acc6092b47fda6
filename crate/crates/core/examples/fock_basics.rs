//! Two photons on a balanced coupler bunch; a distinguishable pair does not.

use graphchip::fock::{FockSpace, FockState, InternalState, ModeUnitary};
use num_complex::Complex64;

fn main() -> graphchip::Result<()> {
    let space = FockSpace::new(2, 1, 2)?;
    let input = FockState::number_state(space, &[1, 1])?;
    let out = input.apply_passive(&ModeUnitary::balanced(), &[0, 1])?;
    println!("identical photons, |1,1> in:");
    for (occ, amp) in out.sorted_terms() {
        println!("  {:?}  p = {:.3}", occ, amp.norm_sqr());
    }

    // photons in orthogonal internal states: one label each
    let space = FockSpace::new(2, 2, 2)?;
    let (a, b) = (InternalState::basis(2, 0), InternalState::basis(2, 1));
    let vac = FockState::vacuum_in(space);
    let one = Complex64::new(1.0, 0.0);
    let pair = vac
        .create(&[(space.effective(0, 0), one * a.amplitudes()[0]), (space.effective(0, 1), one * a.amplitudes()[1])])?
        .create(&[(space.effective(1, 0), one * b.amplitudes()[0]), (space.effective(1, 1), one * b.amplitudes()[1])])?;
    let out = pair.apply_passive(&ModeUnitary::balanced(), &[0, 1])?;
    let coincidence = out.probability_where(|c| c[0] == 1 && c[1] == 1);
    println!("distinguishable photons: coincidence probability {coincidence:.3}");

    // a weak pair source: vacuum, one pair, two pairs
    let space = FockSpace::new(2, 1, 4)?;
    let tmsv = FockState::two_mode_squeezed(space, Complex64::new(0.2, 0.0), 0, 1, 2)?;
    for n in [0, 2, 4] {
        println!("pair source, {n} photons: weight {:.4}", tmsv.photon_sector(n).norm_sqr());
    }
    Ok(())
}
