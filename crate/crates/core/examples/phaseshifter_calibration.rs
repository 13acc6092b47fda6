//! Fits a heater sweep, dials in phases and estimates crosstalk error.

use std::f64::consts::PI;

use graphchip::calibration::{calibrate, crosstalk_phase_error, dial_phase, phase_at, power_stats};
use graphchip::harness::synthetic_heater_sweep;

fn main() -> graphchip::Result<()> {
    let samples = synthetic_heater_sweep(3, 10.0)?;
    let (iv, fringe) = calibrate(&samples)?;
    println!("I(V) = {:.3e} V + {:.3e} V^2 + {:.3e} V^3", iv.rho1, iv.rho2, iv.rho3);
    println!(
        "fringe: A = {:.3}, f = {:.2} rad/W, phase = {:.3}, offset = {:.3}",
        fringe.amplitude, fringe.frequency, fringe.phase0, fringe.offset
    );
    for target in [0.0, PI / 2.0, PI, 1.5 * PI] {
        let v = dial_phase(target, &fringe, &iv, (0.0, 10.0))?;
        let got = (phase_at(v, &fringe, &iv) - target).rem_euclid(2.0 * PI);
        println!("target {target:.4} rad -> {v:.4} V (residual {:.1e})", got.min(2.0 * PI - got));
    }

    let powers = [420.0, 455.0, 470.0, 398.0, 501.0, 430.0, 488.0, 482.0];
    let s = power_stats(&powers)?;
    println!("power {:.1} mW, mean abs deviation {:.1} mW, std {:.1} mW", s.mean_mw, s.mad_mw, s.std_mw);
    for dev in [39.0, 22.0] {
        println!("{dev} mW deviation -> {:.3} rad", crosstalk_phase_error(dev, 0.003)?);
    }
    Ok(())
}
