//! Command-line front end: distance computation, tree and forest
//! inference, property checks and topology counting, with deterministic
//! outputs and stable exit codes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand, ValueEnum};

use phylodist::distance::{
    build_distance_matrix, BuildOptions, Metric, MissingMode, MissingPolicy, MissingScale,
};
use phylodist::io::{
    dendrogram_to_newick, phylo_to_newick, read_phylip_matrix, read_profiles, read_sequences,
    write_forest_edges, write_phylip_matrix, write_steiner_edges, EdgeFormat,
    DEFAULT_MISSING_MARKERS,
};
use phylodist::matrix::DistanceMatrix;
use phylodist::me::InsertionOrder;
use phylodist::mst::{generic_mst, natural_comparator, MstAlgorithm, WeightedGraph};
use phylodist::profile::ProfileSet;
use phylodist::properties::{
    check_commutativity, check_convexity, rooted_topology_count, unrooted_topology_count,
    CheckKind, Verdict,
};
use phylodist::registry::{method_by_name, method_names, Engine, MethodOptions, TreeOutput};

/// Exit codes: 0 success, 2 malformed input, 3 domain error, 4 broken
/// internal invariant.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<phylodist::Error>() {
        Some(phylodist::Error::Domain(_)) => 3,
        Some(phylodist::Error::Invariant(_)) => 4,
        _ => 2,
    }
}

#[derive(Parser)]
#[command(
    name = "phylodist",
    version,
    about = "Distance-based phylogenetic inference from typing profiles and distance matrices"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Raw,
    Normalized,
    Jc,
}

#[derive(Clone, Copy, ValueEnum)]
enum MissingArg {
    Strict,
    #[value(name = "pairwise-deletion")]
    PairwiseDeletion,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Naive,
    #[value(name = "nn-chain")]
    NnChain,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Input,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Tsv,
    Dot,
}

impl FormatArg {
    fn to_edge_format(self) -> EdgeFormat {
        match self {
            FormatArg::Tsv => EdgeFormat::Tsv,
            FormatArg::Dot => EdgeFormat::Dot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Kruskal,
    Prim,
    Boruvka,
}

#[derive(Parser, Clone, Copy)]
struct MissingFlags {
    /// How missing alleles are treated when comparing two profiles.
    #[arg(long, value_enum, default_value = "strict")]
    missing: MissingArg,
    /// With pairwise deletion and the raw metric, rescale counts by
    /// L / shared loci.
    #[arg(long)]
    rescale: bool,
}

impl MissingFlags {
    fn policy(&self) -> MissingPolicy {
        MissingPolicy {
            mode: match self.missing {
                MissingArg::Strict => MissingMode::Strict,
                MissingArg::PairwiseDeletion => MissingMode::PairwiseDeletion,
            },
            scale: if self.rescale {
                MissingScale::RescaleToL
            } else {
                MissingScale::None
            },
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a distance matrix from typing profiles.
    Dist {
        /// Profile TSV file.
        input: PathBuf,
        /// Output path for the PHYLIP matrix (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "raw")]
        metric: MetricArg,
        #[command(flatten)]
        missing_flags: MissingFlags,
        /// Clamp Jukes-Cantor saturated pairs to this value instead of
        /// failing.
        #[arg(long)]
        jc_clamp: Option<f64>,
        /// Tokens treated as missing alleles.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_MISSING_MARKERS.iter().map(|s| s.to_string()).collect::<Vec<_>>())]
        missing_marker: Vec<String>,
    },
    /// Infer a tree from a distance matrix (or profiles, using --metric).
    Tree {
        /// PHYLIP matrix or profile TSV (detected by content).
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Tree-building method.
        #[arg(long, value_parser = PossibleValuesParser::new(method_names()))]
        method: String,
        /// Clustering engine (clustering methods only).
        #[arg(long, value_enum, default_value = "naive")]
        engine: EngineArg,
        /// Taxon insertion order (addition methods only).
        #[arg(long, value_enum, default_value = "input")]
        order: OrderArg,
        /// Seed for --order random.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Branch-length digits in the Newick output.
        #[arg(long, default_value_t = 6)]
        precision: usize,
        /// BIONJ: select pairs on the variance matrix instead of the Q
        /// criterion.
        #[arg(long)]
        bionj_select_v: bool,
        /// Metric when the input is a profile table.
        #[arg(long, value_enum, default_value = "raw")]
        metric: MetricArg,
        #[command(flatten)]
        missing_flags: MissingFlags,
    },
    /// Minimum spanning tree of the complete distance graph.
    Mst {
        /// PHYLIP matrix or profile TSV (detected by content).
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "kruskal")]
        algorithm: AlgorithmArg,
        #[arg(long, value_enum, default_value = "tsv")]
        format: FormatArg,
    },
    /// goeBURST forest at a locus-variant level, or the full MST.
    Goeburst {
        /// PHYLIP matrix or profile TSV (detected by content).
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// 1 (SLV), 2 (DLV), 3 (TLV) or full.
        #[arg(long, value_parser = PossibleValuesParser::new(["1", "2", "3", "full"]))]
        level: String,
        #[arg(long, value_enum, default_value = "tsv")]
        format: FormatArg,
    },
    /// Steiner tree over character sequences.
    Fhp {
        /// Sequence file: label<TAB>sequence lines or FASTA.
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "tsv")]
        format: FormatArg,
    },
    /// Sample a reduction formula for convexity and commutativity.
    Check {
        #[arg(long, value_parser = PossibleValuesParser::new([
            "upgma", "wpgma", "single", "complete", "upgmc", "wpgmc", "nj", "gme",
        ]))]
        reduction: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Count binary tree topologies for a taxon count.
    Count {
        #[arg(long)]
        taxa: u64,
    },
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes atomically: temp file in the target directory, then rename.
fn write_output(path: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match path {
        None => {
            std::io::stdout()
                .write_all(contents.as_bytes())
                .context("writing to stdout")?;
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, path)
                .with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
            Ok(())
        }
    }
}

/// Matrix or profile table, detected by whether the first token is a
/// taxon count.
enum InputData {
    Matrix(DistanceMatrix),
    Profiles(ProfileSet),
}

fn load_matrix_or_profiles(text: &str) -> anyhow::Result<InputData> {
    let first = text.split_whitespace().next().unwrap_or("");
    if first.parse::<usize>().is_ok() {
        Ok(InputData::Matrix(read_phylip_matrix(text)?))
    } else {
        let markers: Vec<&str> = DEFAULT_MISSING_MARKERS.to_vec();
        Ok(InputData::Profiles(read_profiles(text, &markers)?))
    }
}

fn build_options(metric: MetricArg, flags: &MissingFlags, jc_clamp: Option<f64>) -> BuildOptions {
    BuildOptions {
        metric: match metric {
            MetricArg::Raw => Metric::Raw,
            MetricArg::Normalized => Metric::Normalized,
            MetricArg::Jc => Metric::Jc,
        },
        policy: flags.policy(),
        jc_clamp,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Dist {
            input,
            output,
            metric,
            missing_flags,
            jc_clamp,
            missing_marker,
        } => {
            let text = read_input(&input)?;
            let markers: Vec<&str> = missing_marker.iter().map(String::as_str).collect();
            let profiles = read_profiles(&text, &markers)?;
            let m = build_distance_matrix(&profiles, &build_options(metric, &missing_flags, jc_clamp))?;
            write_output(output.as_deref(), &write_phylip_matrix(&m))
        }
        Cmd::Tree {
            input,
            output,
            method,
            engine,
            order,
            seed,
            precision,
            bionj_select_v,
            metric,
            missing_flags,
        } => {
            let text = read_input(&input)?;
            let matrix = match load_matrix_or_profiles(&text)? {
                InputData::Matrix(m) => m,
                InputData::Profiles(p) => {
                    build_distance_matrix(&p, &build_options(metric, &missing_flags, None))?
                }
            };
            let strategy = method_by_name(&method)
                .ok_or_else(|| anyhow!("unknown method {}", method))?;
            let opts = MethodOptions {
                engine: match engine {
                    EngineArg::Naive => Engine::Naive,
                    EngineArg::NnChain => Engine::NnChain,
                },
                order: match order {
                    OrderArg::Input => InsertionOrder::Input,
                    OrderArg::Random => InsertionOrder::Random(seed),
                },
                bionj_select_over_v: bionj_select_v,
            };
            let newick = match strategy.run(&matrix, &opts)? {
                TreeOutput::Rooted(d) => dendrogram_to_newick(&d, precision),
                TreeOutput::Unrooted(t) => phylo_to_newick(&t, precision),
            };
            write_output(output.as_deref(), &newick)
        }
        Cmd::Mst {
            input,
            output,
            algorithm,
            format,
        } => {
            let text = read_input(&input)?;
            let matrix = match load_matrix_or_profiles(&text)? {
                InputData::Matrix(m) => m,
                InputData::Profiles(p) => build_distance_matrix(
                    &p,
                    &BuildOptions {
                        metric: Metric::Raw,
                        policy: MissingPolicy::default(),
                        jc_clamp: None,
                    },
                )?,
            };
            let g = WeightedGraph::complete(&matrix);
            let alg = match algorithm {
                AlgorithmArg::Kruskal => MstAlgorithm::Kruskal,
                AlgorithmArg::Prim => MstAlgorithm::Prim,
                AlgorithmArg::Boruvka => MstAlgorithm::Boruvka,
            };
            let forest = generic_mst(&g, &natural_comparator, alg)?;
            let out = write_forest_edges(&forest, matrix.labels(), format.to_edge_format());
            write_output(output.as_deref(), &out)
        }
        Cmd::Goeburst {
            input,
            output,
            level,
            format,
        } => {
            let text = read_input(&input)?;
            let (matrix, freqs) = match load_matrix_or_profiles(&text)? {
                InputData::Matrix(m) => (m, None),
                InputData::Profiles(p) => {
                    let freqs: Vec<u64> = p.profiles().iter().map(|x| x.frequency).collect();
                    let m = build_distance_matrix(
                        &p,
                        &BuildOptions {
                            metric: Metric::Raw,
                            policy: MissingPolicy::default(),
                            jc_clamp: None,
                        },
                    )?;
                    (m, Some(freqs))
                }
            };
            let forest = match level.as_str() {
                "full" => phylodist::mst::run_goeburst_full_mst(&matrix, freqs.as_deref())?,
                lv => phylodist::mst::run_goeburst(&matrix, freqs.as_deref(), lv.parse().unwrap())?,
            };
            let out = write_forest_edges(&forest, matrix.labels(), format.to_edge_format());
            write_output(output.as_deref(), &out)
        }
        Cmd::Fhp {
            input,
            output,
            format,
        } => {
            let text = read_input(&input)?;
            let seqs = read_sequences(&text)?;
            let tree = phylodist::fhp::run_fhp(&seqs)?;
            let out = write_steiner_edges(&tree, format.to_edge_format());
            write_output(output.as_deref(), &out)
        }
        Cmd::Check {
            reduction,
            trials,
            seed,
        } => {
            let kind = CheckKind::from_name(&reduction)
                .ok_or_else(|| anyhow!("unknown reduction {}", reduction))?;
            let mut report = String::new();
            if kind == CheckKind::Gme {
                report.push_str("convexity: not-applicable (insertion scheme)\n");
            } else {
                report.push_str(&format!(
                    "convexity: {}\n",
                    describe(&check_convexity(kind, trials, seed)?)
                ));
            }
            report.push_str(&format!(
                "commutativity: {}\n",
                describe(&check_commutativity(kind, trials, seed.wrapping_add(1))?)
            ));
            print!("{}", report);
            Ok(())
        }
        Cmd::Count { taxa } => {
            let rooted = rooted_topology_count(taxa)?;
            if taxa >= 3 {
                println!("unrooted: {}", unrooted_topology_count(taxa)?);
            } else {
                println!("unrooted: not-defined (needs at least 3 taxa)");
            }
            println!("rooted: {}", rooted);
            Ok(())
        }
    }
}

fn describe(v: &Verdict) -> String {
    match v {
        Verdict::HoldsOnSample { trials } => format!("holds-on-sample (trials={})", trials),
        Verdict::Counterexample { witness } => format!("counterexample: {}", witness),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {:#}", err);
            ExitCode::from(exit_code_for(&err))
        }
    }
}
