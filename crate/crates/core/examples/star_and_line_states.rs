//! Builds the star and line states on the simulated chip and checks them
//! against ideal graph states.

use graphchip::device::{gate_success_probability, state_fidelity, Device, DeviceConfig, RpegMode};
use graphchip::error_models::StateKind;
use graphchip::stabilizer::{expectation, ideal_state_vector};

fn main() -> graphchip::Result<()> {
    for mode in [RpegMode::Fusion, RpegMode::Cz] {
        println!("{mode:?} gate succeeds with probability {:.4}", gate_success_probability(mode)?);
    }
    for kind in [StateKind::S4, StateKind::L4] {
        let cfg = DeviceConfig::ideal(kind.rpeg(), 0.03)?;
        let (rho, p) = Device::new(&cfg)?.logical_state()?;
        let ideal = ideal_state_vector(&kind.graph())?;
        println!("{kind:?}: fourfold probability {p:.3e}, fidelity {:.6}", state_fidelity(&rho, &ideal));
        for el in kind.group().elements() {
            print!(" {}={:+.0}", el.label(), expectation(&ideal, &el.pauli));
        }
        println!();
    }
    Ok(())
}
