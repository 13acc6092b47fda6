//! Heralded two-source fringe on the central gate interferometer, swept
//! over indistinguishability.

use graphchip::device::{fit_fringe_visibility, hom_fringe, phase_sweep, visibility_conversion, DeviceConfig, RpegMode};

fn main() -> graphchip::Result<()> {
    let phases = phase_sweep(48);
    println!("sigma   V       V_HOM");
    for sigma in [1.0, 0.95, 0.9, 0.82, 0.7, 0.5] {
        let cfg = DeviceConfig::ideal(RpegMode::Fusion, 0.03)?.with_sigma(sigma);
        let fringe = hom_fringe(&cfg, &phases)?;
        let fit = fit_fringe_visibility(&fringe)?;
        let (v, v_hom) = visibility_conversion(fit.max(), fit.min())?;
        println!("{sigma:<7} {v:.4}  {v_hom:.4}");
    }
    Ok(())
}
