//! `tatejac`: exact arithmetic in Tate algebras over ideal-adic rings.
//!
//! Exit codes: 0 on success, 1 on contract errors (violated mathematical
//! preconditions), 2 on I/O and parse errors.

mod commands;
mod util;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tatejac",
    version,
    about = "Truncated power series over ideal-adic rings: unit checks, map \
             inversion, adic lifting, and witness experiments",
    after_help = "Domains: z-adic:m:N (Z/m^N with ideal (m)), z-exact:m (exact Z \
                  with ideal (m)), q (rationals, zero ideal).\n\
                  Inline series: c*x1^a*x2^b +- ..., bare x means x1."
)]
pub struct Cli {
    /// Emit reports as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads for multi-input experiments (per prime, per exponent).
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Invert a map with zero constant term and identity linear part.
    Invert {
        /// Map file (JSON).
        #[arg(long)]
        map: String,
        /// Degree cap for the inverse; defaults to the cap of the input.
        #[arg(long)]
        degree: Option<u32>,
        /// Normalize the map first and invert the normalized part.
        #[arg(long)]
        normalize: bool,
        /// Write the inverse as a map file.
        #[arg(long)]
        out: Option<String>,
    },

    /// Run the Tate unit criterion on a series; emit the inverse of a unit.
    UnitCheck {
        /// Inline series, e.g. '1+5x'.
        #[arg(long, conflicts_with = "series_file")]
        series: Option<String>,
        /// Series file (JSON with a domain header).
        #[arg(long)]
        series_file: Option<String>,
        /// Domain string for --series, e.g. z-adic:5:3.
        #[arg(long, requires = "series")]
        domain: Option<String>,
        /// Degree cap for the inline series and the emitted inverse.
        #[arg(long, default_value_t = 8)]
        degree: u32,
    },

    /// Lift an inverse modulo the ideal to higher coefficient precision.
    Lift {
        #[arg(long)]
        map: String,
        /// Initial inverse modulo I (map file).
        #[arg(long)]
        g0: String,
        /// Target ideal precision.
        #[arg(long)]
        precision: u32,
        /// Working degree cap; defaults to the cap of the map.
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long)]
        out: Option<String>,
    },

    /// Reduce a map modulo the ideal, decide invertibility there, and lift.
    Transfer {
        #[arg(long)]
        map: String,
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long)]
        precision: Option<u32>,
        /// Point-enumeration budget for the bijectivity screen (0 disables).
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },

    /// Per-degree coefficient-valuation profile of a map.
    Profile {
        #[arg(long)]
        map: String,
    },

    /// Unimodular-witness experiment over Z/p^N.
    Witness {
        #[arg(long)]
        map: String,
        /// Prime (or comma-separated primes, one experiment each).
        #[arg(long)]
        p: String,
        /// Coefficient precision.
        #[arg(long = "N", alias = "precision", default_value_t = 4)]
        precision: u32,
        /// Degree cap for the truncated inverse; defaults to the map cap.
        #[arg(long)]
        degree: Option<u32>,
        /// Target point (comma-separated), defaults to 1,...,1.
        #[arg(long)]
        point: Option<String>,
    },

    /// Positive-characteristic counterexample diagnostics for x - x^c.
    CharP {
        /// Exponent c >= 2 (or comma-separated list).
        #[arg(long)]
        c: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Degree cap for the formal inverse.
        #[arg(long = "D", default_value_t = 64)]
        degree: u32,
    },

    /// Independent oracles.
    Oracle {
        #[command(subcommand)]
        oracle: OracleCommand,
    },

    /// Generate a tame map with its closed-form inverse.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n: usize,
        /// Degree bound for elementary polynomials.
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// Number of factors to compose.
        #[arg(long, default_value_t = 3)]
        length: u32,
        /// Domain string, e.g. z-adic:5:8.
        #[arg(long)]
        domain: String,
        /// Require elementary polynomials of total degree >= 2.
        #[arg(long)]
        min_q_degree_two: bool,
        /// Compose elementary factors only (no linear factors).
        #[arg(long)]
        no_linear: bool,
        /// Degree cap override for the generated pair.
        #[arg(long)]
        cap: Option<u32>,
        /// Write the map here.
        #[arg(long)]
        out: Option<String>,
        /// Write the inverse here.
        #[arg(long)]
        out_inverse: Option<String>,
    },
}

#[derive(Subcommand)]
pub enum OracleCommand {
    /// Univariate compositional inverse by Lagrange coefficient extraction.
    Lagrange {
        /// Inline series, e.g. 'x - x^2'.
        #[arg(long)]
        series: String,
        /// Domain string: q or z-exact:m.
        #[arg(long, default_value = "q")]
        domain: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
    },
    /// Exhaustive bijectivity test on the points of (Z/m)^n.
    Bijectivity {
        #[arg(long)]
        map: String,
        #[arg(long)]
        modulus: u64,
        #[arg(long)]
        budget: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
