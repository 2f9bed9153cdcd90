use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use k3fm_core::Int;

#[derive(Parser, Debug)]
#[command(
    name = "k3fm",
    version,
    about = "Lattice and discriminant-form computations for elliptic K3 surfaces of Picard rank 2",
    long_about = "Computes with the Neron-Severi lattice [[2d, t], [t, 0]] of an elliptic K3 \
                  surface of Picard rank 2. The K3FM_BUDGET environment variable overrides \
                  enumeration caps, e.g. K3FM_BUDGET=group=40000,t=5000."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// `d` and `t` of the lattice.
#[derive(Args, Debug, Clone)]
pub struct LatticeArgs {
    /// Half the self-intersection of the polarization H.
    #[arg(long, allow_negative_numbers = true)]
    pub d: Int,
    /// Multisection index, t ≥ 1.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Int,
}

/// The finite group G acting on the discriminant group. Defaults to {±id}.
#[derive(Args, Debug, Clone, Default)]
pub struct GroupArgs {
    /// Order of G.
    #[arg(long)]
    pub g_order: Option<u64>,
    /// Images of the discriminant-group generators under a generator of G,
    /// as comma-separated residues, image of the first generator first.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, requires = "g_order")]
    pub g_gen: Option<Vec<Int>>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Discriminant form of the lattice.
    Disc {
        #[command(flatten)]
        lat: LatticeArgs,
        #[arg(long)]
        json: bool,
    },
    /// Lagrangian elements and subgroups.
    Lagr {
        #[command(flatten)]
        lat: LatticeArgs,
        /// Print counts only (the default).
        #[arg(long, conflicts_with = "list")]
        count: bool,
        /// List elements and subgroups.
        #[arg(long)]
        list: bool,
        #[arg(long)]
        json: bool,
    },
    /// The classes of F/t and F'/t and what they say about the two fibrations.
    Pair {
        #[command(flatten)]
        lat: LatticeArgs,
        /// The surface is T-general; enables the fibration isomorphism test.
        #[arg(long)]
        t_general: bool,
        #[arg(long)]
        json: bool,
    },
    /// The involution swapping the two isotropic directions prime by prime.
    Involution {
        #[command(flatten)]
        lat: LatticeArgs,
        #[arg(long)]
        json: bool,
    },
    /// Isometry classes in the genus of the lattice.
    Genus {
        #[command(flatten)]
        lat: LatticeArgs,
        #[arg(long)]
        json: bool,
    },
    /// Number of Fourier-Mukai partners.
    Fm {
        #[command(flatten)]
        lat: LatticeArgs,
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long)]
        json: bool,
    },
    /// Derived elliptic structures, their double quotient and automorphism orders.
    De {
        #[command(flatten)]
        lat: LatticeArgs,
        #[command(flatten)]
        g: GroupArgs,
        /// Also compare against the closed form.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        json: bool,
    },
    /// Hassett-Tschinkel classification.
    Ht {
        #[command(flatten)]
        lat: LatticeArgs,
        /// The surface is T-general (G = {±id}).
        #[arg(long)]
        t_general: bool,
        #[arg(long)]
        json: bool,
    },
    /// Jacobian calculus.
    #[command(group(ArgGroup::new("mode").args(["index", "compose", "canonical", "classes", "jspecial"])))]
    Jac {
        #[arg(long, allow_negative_numbers = true)]
        t: Int,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<Int>,
        /// Index t/gcd(t, k) of J^k.
        #[arg(long, requires = "k")]
        index: bool,
        /// Residue kl mod t of J^k(J^l).
        #[arg(long, allow_negative_numbers = true, requires = "k", value_name = "L")]
        compose: Option<Int>,
        /// Canonical representative of the class of k.
        #[arg(long, requires = "k")]
        canonical: bool,
        /// Coprime Jacobians up to isomorphism over P^1.
        #[arg(long)]
        classes: bool,
        /// Whether a j-special torsor exists at prime index t with |B| = --b-order.
        #[arg(long, requires = "b_order")]
        jspecial: bool,
        /// Order of B (2, 4 or 6).
        #[arg(long)]
        b_order: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Overlattice from isotropic generators.
    Overlattice {
        #[command(flatten)]
        lat: LatticeArgs,
        /// Generator as rational coordinates over (H, F), e.g. "1/5,0". Repeatable.
        #[arg(long = "gen", allow_hyphen_values = true)]
        gens: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Caldararu class of a Mukai vector (r, xH + yF, s).
    Caldararu {
        #[command(flatten)]
        lat: LatticeArgs,
        #[arg(long, allow_negative_numbers = true)]
        r: Int,
        #[arg(long, allow_negative_numbers = true)]
        x: Int,
        #[arg(long, allow_negative_numbers = true)]
        y: Int,
        #[arg(long, allow_negative_numbers = true)]
        s: Int,
        #[arg(long)]
        json: bool,
    },
    /// Summary rows over a grid of (d, t), for T-general surfaces (G = {±id}).
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long)]
    pub t_min: Int,
    #[arg(long)]
    pub t_max: Int,
    /// Defaults to 0.
    #[arg(long, allow_negative_numbers = true)]
    pub d_min: Option<Int>,
    /// Defaults to t - 1 for each t.
    #[arg(long, allow_negative_numbers = true)]
    pub d_max: Option<Int>,
    /// Run brute-force checks; a mismatch makes the exit code nonzero.
    #[arg(long)]
    pub verify: bool,
    /// Use closed forms only; fm is left empty when it cannot be enumerated.
    #[arg(long)]
    pub formula_only: bool,
    /// Emit a JSON array.
    #[arg(long, conflicts_with = "jsonl")]
    pub json: bool,
    /// Emit one JSON object per line.
    #[arg(long)]
    pub jsonl: bool,
    /// Write rows to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
