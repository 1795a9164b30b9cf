use clap::{Parser, Subcommand};
use serde::Serialize;

/// Abelian extensions of imaginary quadratic fields by complex multiplication.
#[derive(Debug, Parser)]
#[command(name = "ccf", version, about)]
pub struct Cli {
    /// Print a JSON result envelope instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Starting precision in bits (at least 64); overrides CCF_DEFAULT_BITS.
    #[arg(long, global = true)]
    pub bits: Option<u32>,

    /// Precision cap for the doubling loop.
    #[arg(long, global = true)]
    pub max_bits: Option<u32>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Reduced forms and the class number.
    Forms {
        /// A discriminant `D` or a form `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        disc: String,
    },
    /// Class group structure with discrete logarithms of the reduced forms.
    Classgroup {
        /// A discriminant `D` or a form `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        disc: String,
    },
    /// Ray class group modulo `m`.
    Rayclass {
        /// A discriminant `D` or a form `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        disc: String,
        /// Positive integer modulus.
        #[arg(long = "mod")]
        #[serde(rename = "mod")]
        modulus: i64,
    },
    /// Conductor and discriminant of the class field of a subgroup.
    Conductor {
        /// A discriminant `D` or a form `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        disc: String,
        /// Positive integer modulus.
        #[arg(long = "mod")]
        #[serde(rename = "mod")]
        modulus: i64,
        /// Subgroup generators as exponent vectors, e.g. `1,0;0,2` (default: trivial).
        #[arg(long, default_value = "")]
        subgroup: String,
    },
    /// Evaluate a modular function at a point of the upper half plane.
    Eval {
        /// eta, f, f1, f2, j, g2, g3, wp or eta:p[,q].
        #[arg(long = "fn")]
        #[serde(rename = "fn")]
        function: String,
        /// `a+bi` or a form `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        /// The argument of wp.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
    },
    /// Hilbert class polynomial.
    Hilbert {
        /// A discriminant `D` or a form `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        disc: String,
    },
    /// Split-check table against Cornacchia for the first split primes.
    Verify {
        /// A discriminant `D` or a form `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        disc: String,
        /// Number of split primes to check.
        #[arg(long, default_value_t = 50)]
        primes: usize,
    },
    /// Division polynomial `T_m`, symbolic or at integers `a,b`.
    Divpoly {
        /// Index `m >= 1`.
        #[arg(long = "m")]
        m: u32,
        /// Specialise the curve `y^2 = x^3 + a x + b` at integers `a,b`.
        #[arg(long, allow_hyphen_values = true)]
        spec: Option<String>,
    },
    /// Ray class field generator over a field of class number one.
    Raypoly {
        /// A discriminant `D` or a form `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        disc: String,
        /// Integer modulus `m >= 2`.
        #[arg(long = "mod")]
        #[serde(rename = "mod")]
        modulus: u32,
    },
    /// Class invariant test and class polynomial of a higher level function.
    Invariant {
        /// j, gamma2, gamma3, f, f1, f2 or eta:p[,q].
        #[arg(long = "fn")]
        #[serde(rename = "fn")]
        function: String,
        /// A discriminant `D` or a form `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        disc: String,
        /// Only report invariance; skip the polynomial.
        #[arg(long)]
        check_only: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Forms { .. } => "forms",
            Command::Classgroup { .. } => "classgroup",
            Command::Rayclass { .. } => "rayclass",
            Command::Conductor { .. } => "conductor",
            Command::Eval { .. } => "eval",
            Command::Hilbert { .. } => "hilbert",
            Command::Verify { .. } => "verify",
            Command::Divpoly { .. } => "divpoly",
            Command::Raypoly { .. } => "raypoly",
            Command::Invariant { .. } => "invariant",
        }
    }
}
