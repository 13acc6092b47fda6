//! Signal-photon loss from a measured insertion loss and component figures.

use graphchip::calibration::{loss_total, signal_photon_loss, GRATING_DB, MMI_DB, SPIRAL_DB_PER_CM, STRAIGHT_DB_PER_CM};

fn main() {
    let budget = signal_photon_loss(26.1, 1.2);
    for (name, db) in &budget.entries {
        println!("{name:<20} {db:>6.2} dB");
    }
    println!("{:<20} {:>6.2} dB", "signal photons", budget.total_db);

    let chip = loss_total([
        ("gratings", 2.0 * GRATING_DB),
        ("MMIs", 6.0 * MMI_DB),
        ("straight 1 cm", STRAIGHT_DB_PER_CM),
        ("spiral 0.6 cm", 0.6 * SPIRAL_DB_PER_CM),
    ]);
    println!("example path: {:.2} dB", chip.total_db);
}
