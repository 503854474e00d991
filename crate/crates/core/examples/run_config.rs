//! Running a TOML experiment description from library code.

use rieszpol::cli::{parse_config, render, serialize_config};

const CONFIG: &str = r#"
command = "asymptotics"
source = "analytic"
n = "64..4096"

[set]
kind = "circle"
radius = 2.0
"#;

fn main() -> rieszpol::Result<()> {
    let config = parse_config(CONFIG)?;
    print!("canonical form:\n{}\n", serialize_config(&config));
    let out = render(&config)?;
    print!("{}", out.csv.as_deref().unwrap_or_default());
    println!("exit code {}", out.exit_code());
    Ok(())
}
