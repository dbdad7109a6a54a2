//! Drives the command-line front end in-process from a JSON config with a
//! flag override, as a script reproducing one table column would.

use cf_fracdiff::cli::{run_with_io, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("cf-fracdiff-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let config = RunConfig {
        gamma: Some(0.5),
        alpha: Some(1.2),
        refinements: Some(vec![40, 80, 160, 320]),
        ..RunConfig::default()
    };
    let path = dir.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config)?)?;
    println!("config:\n{}", std::fs::read_to_string(&path)?);

    // the flag overrides alpha from the file
    let args = [
        "cf-fracdiff",
        "converge",
        "--config",
        path.to_str().ok_or("non-UTF-8 temp path")?,
        "--alpha",
        "1.8",
        "--format",
        "markdown",
    ];
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with_io(args, &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
    std::fs::remove_dir_all(&dir)?;
    println!("exit status {code}");
    Ok(())
}
