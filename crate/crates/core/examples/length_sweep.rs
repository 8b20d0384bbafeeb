//! Key rate versus length at 15.3 dBm, as CSV on stdout.

use std::path::Path;

use qkd_coexistence::scenario::{run_sweep, write_csv, ScenarioConfig};

const CONFIG: &str = r#"
[comb]
power = { total_dbm = 15.3 }

[sweep]
variable = "length"
values = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0]
"#;

fn main() -> qkd_coexistence::Result<()> {
    let cfg = ScenarioConfig::parse(CONFIG, Path::new("length_sweep"))?;
    write_csv(&run_sweep(&cfg)?, std::io::stdout().lock())
}
