//! Command-line front end: `char`, `exact`, `eval`, `table` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
//! 3 precision insufficient.

mod commands;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
pub use report::{Check, OutputFormat, Report, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "qfzeta",
    version,
    about = "Partial Euler products of quadratic-field zeta functions via dyadic series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Character report: parity, values of χ, Gauss sum.
    Char(RunArgs),
    /// Exact Bernoulli-number forms of ζ(n), L(n,χ), q₁(n), q₂(n).
    Exact(RunArgs),
    /// Evaluate p1, p2, q1, q2 or zetaK at σ with an error bound.
    Eval(RunArgs),
    /// Convergence table of the dyadic series.
    Table(RunArgs),
    /// Run the invariant checks.
    Verify(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Function {
    P1,
    P2,
    Q1,
    Q2,
    #[value(name = "zetaK")]
    ZetaK,
}

impl Function {
    fn name(self) -> &'static str {
        match self {
            Function::P1 => "p1",
            Function::P2 => "p2",
            Function::Q1 => "q1",
            Function::Q2 => "q2",
            Function::ZetaK => "zetaK",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Fundamental discriminant Δ.
    #[arg(short = 'd', long = "discriminant", allow_hyphen_values = true)]
    pub discriminant: i64,
    /// Real argument σ as a decimal string.
    #[arg(short = 's', long = "sigma", allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// Even integer for `exact`.
    #[arg(short = 'n', allow_hyphen_values = true)]
    pub n: Option<i64>,
    /// Number of series terms (or table rows).
    #[arg(short = 'N', long = "terms", default_value_t = 12)]
    pub terms: usize,
    /// Decimal digits of precision.
    #[arg(short = 'D', long = "digits", default_value_t = 50)]
    pub digits: u32,
    /// Prime bound for the Euler-product oracle.
    #[arg(short = 'P', long = "prime-limit", default_value_t = 100_000)]
    pub prime_limit: u64,
    #[arg(long = "fn", value_enum)]
    pub function: Option<Function>,
    #[arg(long = "format", value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Use the closed form of q₁(n) without the corrective sign.
    #[arg(long = "no-sign-fix")]
    pub no_sign_fix: bool,
}

impl RunArgs {
    fn config(&self, command: &str) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            discriminant: self.discriminant.to_string(),
            sigma: self.sigma.clone(),
            n: self.n.map(|n| n.to_string()),
            digits: self.digits.to_string(),
            effective_digits: None,
            terms: self.terms.to_string(),
            prime_limit: self.prime_limit.to_string(),
            function: self.function.map(|f| f.name().to_string()),
            output_format: self.format,
            sign_fix: !self.no_sign_fix,
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotFundamental(_)
        | Error::Domain(_)
        | Error::Parity(_)
        | Error::Overflow(_)
        | Error::Resource(_) => EXIT_USAGE,
        Error::PrecisionInsufficient(_) => EXIT_PRECISION,
        Error::Internal(_) | Error::InternalInconsistency(_) => EXIT_VERIFY_FAILED,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run_with_io<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let (args, result) = match &cli.command {
        Command::Char(a) => (a, commands::cmd_char(a)),
        Command::Exact(a) => (a, commands::cmd_exact(a)),
        Command::Eval(a) => (a, commands::cmd_eval(a)),
        Command::Table(a) => (a, commands::cmd_table(a, err)),
        Command::Verify(a) => (a, commands::cmd_verify(a)),
    };
    match result {
        Ok(report) => {
            if report.write(args.format, out).is_err() {
                return EXIT_USAGE;
            }
            if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// [`run_with_io`] on stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["qfzeta"];
        full.extend_from_slice(args);
        let code = run_with_io(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn parses_negative_discriminant() {
        let (code, out, _) = run_capture(&["char", "-d", "-4"]);
        assert_eq!(code, 0);
        assert!(out.contains("odd"));
    }

    #[test]
    fn missing_discriminant_is_usage_error() {
        let (code, _, err) = run_capture(&["char"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(!err.is_empty());
    }

    #[test]
    fn unknown_function_is_usage_error() {
        let (code, _, _) = run_capture(&["eval", "-d", "5", "--fn", "p3", "-s", "2"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::NotFundamental(9)), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::PrecisionInsufficient(String::new())),
            EXIT_PRECISION
        );
        assert_eq!(
            exit_code(&Error::Internal(String::new())),
            EXIT_VERIFY_FAILED
        );
    }
}
