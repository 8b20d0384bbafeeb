//! Co-propagation efficiency of the measured 50 km and 20 km points against
//! the earlier terabit experiment.

use qkd_coexistence::simulate::ce_report;
use qkd_coexistence::PowerDbm;

fn main() -> qkd_coexistence::Result<()> {
    for (label, skr, dbm, km) in [
        ("50 km, 60 ch", 106e3, 16.8, 50.0),
        ("20 km, 60 ch", 1.47e6, 15.3, 20.0),
    ] {
        println!("{label}");
        print!("{}", ce_report(skr, PowerDbm(dbm), km)?);
    }
    Ok(())
}
