//! The full `verify` pipeline from a config string, printing the JSON report.
//!
//! cargo run --example verify_report

use heun_pencil::config::RunConfig;
use heun_pencil::runner::run_verify;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("heun-pencil-verify-report");
    let cfg = RunConfig::parse(&format!(
        "model=a1\nparams.beta0=1\nparams.beta1=0.5\nparams.beta2=-0.3\n\
         tau=0.2,1,0.3,0.4,0.5\ninitial=0.8,0.3\nt_end=20\nseed=5\nout_dir={}\n",
        out.display()
    ))?;
    let outcome = run_verify(&cfg)?;
    print!("{}", std::fs::read_to_string(&outcome.report_path)?);
    println!("exit code would be {}", outcome.exit_code());
    Ok(())
}
