//! Subcommands: each turns parsed inputs into a `Report` plus JSON artifacts.

use std::path::{Path, PathBuf};

use arveson_core::colligation::{classify_colligation, classify_pair, Colligation, OutputPair};
use arveson_core::completion::{classify_family, parrott_complete, CompletionParameter};
use arveson_core::kernels::{gram_certify, KernelSpec, SchurEvaluator};
use arveson_core::overlap::{example33_overlap, overlap_suite};
use arveson_core::realization::example33::{self, example33_suite};
use arveson_core::realization::{
    enumerate_representers, gleason_check, minimal_cholesky_dim, observability_and_equivalence,
    realize_from_pair_cholesky, realize_with_pair, reproduction_error, GleasonInput,
};
use arveson_core::report::{Check, Report};
use arveson_core::sampling::{SampleConfig, Stream};
use clap::Subcommand;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::io::{self, from_matrix, ColligationFile, InputError, PairFile};

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Contractivity, isometry and coisometry of a colligation or pair.
    Classify {
        #[arg(long, required_unless_present = "pair", conflicts_with = "pair")]
        colligation: Option<PathBuf>,
        #[arg(long)]
        pair: Option<PathBuf>,
    },
    /// Gram positivity of K_S (or K_{C,A}) and, given both, their equality.
    KernelCheck {
        #[arg(long, required_unless_present = "pair")]
        s: Option<PathBuf>,
        #[arg(long)]
        pair: Option<PathBuf>,
        /// Point file; seeded points are used when absent.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Coisometric colligation from a contractive pair by Cholesky factorization.
    RealizeFromPair {
        #[arg(long)]
        pair: PathBuf,
        /// Input dimension; defaults to the minimal one.
        #[arg(long)]
        dim_u: Option<usize>,
        #[arg(long)]
        colligation_out: Option<PathBuf>,
    },
    /// Weakly coisometric realization of S with a prescribed output pair.
    RealizeWithPair {
        #[arg(long)]
        s: PathBuf,
        #[arg(long)]
        pair: PathBuf,
        /// Completion parameter file `{"Q": ...}`; the central choice when absent.
        #[arg(long)]
        q: Option<PathBuf>,
        #[arg(long)]
        colligation_out: Option<PathBuf>,
    },
    /// Multipliers whose kernel equals K_{C,A} for a given pair.
    Representers {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        dim_u: Option<usize>,
        /// Isometry file `{"G": ...}`; the identity embedding when absent.
        #[arg(long)]
        g: Option<PathBuf>,
    },
    /// One member of the completion family for an explicit parameter.
    Complete {
        #[arg(long)]
        s: PathBuf,
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        colligation_out: Option<PathBuf>,
    },
    /// Gleason identity and observability-image checks.
    Gleason {
        #[arg(long, required_unless_present = "colligation", conflicts_with = "colligation")]
        pair: Option<PathBuf>,
        #[arg(long)]
        colligation: Option<PathBuf>,
    },
    /// Observability of two pairs and unitary equivalence between them.
    Equivalence {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        pair2: PathBuf,
    },
    /// Overlapping spaces of a realized multiplier (the built-in example by default).
    OverlapDemo {
        #[arg(long, requires = "pair")]
        s: Option<PathBuf>,
        #[arg(long, requires = "s")]
        pair: Option<PathBuf>,
        /// Number of sample points.
        #[arg(long, default_value_t = 30)]
        points: usize,
    },
    /// Regression suite for the built-in two-variable example.
    Example33,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::KernelCheck { .. } => "kernel-check",
            Command::RealizeFromPair { .. } => "realize-from-pair",
            Command::RealizeWithPair { .. } => "realize-with-pair",
            Command::Representers { .. } => "representers",
            Command::Complete { .. } => "complete",
            Command::Gleason { .. } => "gleason",
            Command::Equivalence { .. } => "equivalence",
            Command::OverlapDemo { .. } => "overlap-demo",
            Command::Example33 => "example33",
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        let all: Vec<Option<&PathBuf>> = match self {
            Command::Classify { colligation, pair } => vec![colligation.as_ref(), pair.as_ref()],
            Command::KernelCheck { s, pair, points } => vec![s.as_ref(), pair.as_ref(), points.as_ref()],
            Command::RealizeFromPair { pair, .. } => vec![Some(pair)],
            Command::RealizeWithPair { s, pair, q, .. } => vec![Some(s), Some(pair), q.as_ref()],
            Command::Representers { pair, g, .. } => vec![Some(pair), g.as_ref()],
            Command::Complete { s, pair, q, .. } => vec![Some(s), Some(pair), Some(q)],
            Command::Gleason { pair, colligation } => vec![pair.as_ref(), colligation.as_ref()],
            Command::Equivalence { pair, pair2 } => vec![Some(pair), Some(pair2)],
            Command::OverlapDemo { s, pair, .. } => vec![s.as_ref(), pair.as_ref()],
            Command::Example33 => vec![],
        };
        all.into_iter().flatten().cloned().collect()
    }
}

/// Result of one command: checks plus named JSON artifacts.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub artifacts: Map<String, Value>,
}

impl Outcome {
    fn new(title: &str) -> Self {
        Outcome {
            report: Report::new(title),
            artifacts: Map::new(),
        }
    }

    fn artifact<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.artifacts.insert(key.to_string(), v);
    }
}

/// Failure modes of a command: unreadable input, or a library error that
/// is reported as a failed check.
pub enum Failure {
    Input(InputError),
    Domain(arveson_core::Error),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<arveson_core::Error> for Failure {
    fn from(e: arveson_core::Error) -> Self {
        Failure::Domain(e)
    }
}

type Run = std::result::Result<(), Failure>;

pub fn run(command: &Command, cfg: &SampleConfig) -> std::result::Result<Outcome, InputError> {
    let mut out = Outcome::new(command.name());
    let result = match command {
        Command::Classify { colligation, pair } => classify(&mut out, colligation.as_deref(), pair.as_deref(), cfg),
        Command::KernelCheck { s, pair, points } => kernel_check(&mut out, s.as_deref(), pair.as_deref(), points.as_deref(), cfg),
        Command::RealizeFromPair {
            pair,
            dim_u,
            colligation_out,
        } => realize_from_pair(&mut out, pair, *dim_u, colligation_out.as_deref(), cfg),
        Command::RealizeWithPair {
            s,
            pair,
            q,
            colligation_out,
        } => realize(&mut out, s, pair, q.as_deref(), colligation_out.as_deref(), cfg),
        Command::Complete {
            s,
            pair,
            q,
            colligation_out,
        } => realize(&mut out, s, pair, Some(q), colligation_out.as_deref(), cfg),
        Command::Representers { pair, dim_u, g } => representers(&mut out, pair, *dim_u, g.as_deref(), cfg),
        Command::Gleason { pair, colligation } => gleason(&mut out, pair.as_deref(), colligation.as_deref(), cfg),
        Command::Equivalence { pair, pair2 } => equivalence(&mut out, pair, pair2, cfg),
        Command::OverlapDemo { s, pair, points } => overlap_demo(&mut out, s.as_deref(), pair.as_deref(), *points, cfg),
        Command::Example33 => {
            out.report.extend(example33_suite(cfg));
            Ok(())
        }
    };
    match result {
        Ok(()) => Ok(out),
        Err(Failure::Input(e)) => Err(e),
        Err(Failure::Domain(e)) => {
            out.report.push(Check::error("error", &e));
            Ok(out)
        }
    }
}

fn classify(out: &mut Outcome, colligation: Option<&Path>, pair: Option<&Path>, cfg: &SampleConfig) -> Run {
    let tol = &cfg.tolerances;
    if let Some(path) = colligation {
        let c = io::read_colligation(path)?;
        let class = classify_colligation(&c, tol);
        let pc = classify_pair(c.pair(), tol);
        out.report.push(Check::flag(
            "classification",
            true,
            format!(
                "contractive={} isometric={} coisometric={} unitary={}",
                class.contractive, class.isometric, class.coisometric, class.unitary
            ),
        ));
        out.artifact("colligation", &class);
        out.artifact("pair", &pc);
    } else if let Some(path) = pair {
        let p = io::read_pair(path)?;
        let pc = classify_pair(&p, tol);
        out.report.push(Check::flag(
            "classification",
            true,
            format!("contractive_pair={} isometric_pair={}", pc.contractive_pair, pc.isometric_pair),
        ));
        out.artifact("pair", &pc);
    }
    Ok(())
}

fn kernel_check(out: &mut Outcome, s: Option<&Path>, pair: Option<&Path>, points: Option<&Path>, cfg: &SampleConfig) -> Run {
    let s = s.map(io::read_schur).transpose()?;
    let p = pair.map(io::read_pair).transpose()?;
    let (first, second) = match (s, p) {
        (Some(s), p) => (KernelSpec::Schur(s), p.map(KernelSpec::Pair)),
        (None, Some(p)) => (KernelSpec::Pair(p), None),
        (None, None) => unreachable!("clap requires one of --s, --pair"),
    };
    let d = match &first {
        KernelSpec::Schur(s) => s.d(),
        KernelSpec::Pair(p) => p.d(),
        KernelSpec::Szego => 1,
    };
    let pts = match points {
        Some(path) => io::read_points(path, d)?,
        None => cfg.points(d, Stream::KernelPoints),
    };
    let cert = gram_certify(&first, &pts, &cfg.tolerances, second.as_ref())?;
    out.report.push(Check::flag(
        "gram_psd",
        cert.psd,
        format!("min eigenvalue {:.3e} on {} points", cert.min_eig, cert.points),
    ));
    if let Some(diff) = cert.max_diff {
        out.report.push(Check::bounded("kernel_equality", diff, cfg.tolerances.eq_tol, format!("{} kernel vs pair kernel", first.name())));
    }
    out.artifact("certificate", &cert);
    Ok(())
}

fn push_kernel_equality(out: &mut Outcome, c: &Colligation, p: &OutputPair, cfg: &SampleConfig) -> Run {
    let points = cfg.points(p.d(), Stream::KernelPoints);
    let cert = gram_certify(
        &KernelSpec::Schur(SchurEvaluator::from_colligation(c.clone())),
        &points,
        &cfg.tolerances,
        Some(&KernelSpec::Pair(p.clone())),
    )?;
    out.report.push(Check::bounded(
        "kernel_equality",
        cert.max_diff.unwrap_or(f64::INFINITY),
        cfg.tolerances.eq_tol,
        format!("K_S against K_(C,A) on {} points", cert.points),
    ));
    Ok(())
}

fn emit_colligation(out: &mut Outcome, c: &Colligation, path: Option<&Path>) -> Run {
    out.artifact("colligation", &ColligationFile::from_colligation(c));
    if let Some(path) = path {
        io::write_colligation(path, c)?;
    }
    Ok(())
}

fn realize_from_pair(out: &mut Outcome, pair: &Path, dim_u: Option<usize>, dest: Option<&Path>, cfg: &SampleConfig) -> Run {
    let p = io::read_pair(pair)?;
    let dim_u = match dim_u {
        Some(n) => n,
        None => minimal_cholesky_dim(&p, cfg)?,
    };
    let c = realize_from_pair_cholesky(&p, dim_u, cfg)?;
    let class = classify_colligation(&c, &cfg.tolerances);
    out.report.push(Check::bounded(
        "coisometric",
        class.coisometry_residual,
        cfg.tolerances.eq_tol,
        format!("dimU = {dim_u}"),
    ));
    push_kernel_equality(out, &c, &p, cfg)?;
    emit_colligation(out, &c, dest)
}

fn realize(out: &mut Outcome, s: &Path, pair: &Path, q: Option<&Path>, dest: Option<&Path>, cfg: &SampleConfig) -> Run {
    let tol = &cfg.tolerances;
    let s = io::read_schur(s)?;
    let p = io::read_pair(pair)?;
    let base = realize_with_pair(&s, &p, None, cfg)?;
    let family = classify_family(&base.blocks, &p, &base.domain.subspace, cfg)?;
    let param = match q {
        Some(path) => CompletionParameter::new(io::read_parameter(path, base.blocks.parameter_shape())?, tol)?,
        None => CompletionParameter::zero(&base.blocks),
    };
    let completion = parrott_complete(&base.blocks, &param)?;
    let c = completion
        .colligation
        .clone()
        .expect("blocks built from a pair carry their frame");

    out.report.push(Check::bounded(
        "kernel_equality",
        base.kernel_gap,
        tol.eq_tol,
        "K_S against K_(C,A) before completion",
    ));
    out.report.push(Check::bounded(
        "v_isometric",
        base.v.isometry_residual.max(base.v.fit_residual),
        tol.eq_tol,
        format!("dim D = {}, {} generator samples", base.domain.subspace.dim(), base.v.sample_points),
    ));
    out.report.push(Check::bounded("contractive", completion.norm - 1.0, tol.eq_tol, format!("norm {:.15}", completion.norm)));
    out.report.push(Check::bounded(
        "weakly_coisometric",
        completion.weak_isometry_residual,
        tol.eq_tol,
        "U^* isometric on D (+) Y",
    ));
    out.report.push(Check::bounded(
        "defect_orthogonality",
        completion.orthogonality_residual,
        tol.eq_tol,
        "G2^* Q (I - G1 G1^*)^(1/2)",
    ));
    out.report.push(Check::bounded("reproduces_s", reproduction_error(&c, &s, cfg)?, tol.eq_tol, ""));
    if param.isometric && family.coisometric_achievable {
        out.report.push(Check::bounded(
            "coisometric",
            completion.coisometry_residual,
            tol.eq_tol,
            "isometric parameter",
        ));
    }
    if param.unitary && family.unitary_achievable {
        out.report.push(Check::bounded("unitary", completion.unitary_residual, tol.eq_tol, "unitary parameter"));
    }
    out.report.push(Check::flag(
        "restricted_input_completion",
        family.restricted_input.passed,
        "coisometric completion after restricting the input space",
    ));
    out.artifact("family", &family);
    out.artifact(
        "parameter",
        &json!({ "Q": from_matrix(&param.q), "isometric": param.isometric, "unitary": param.unitary }),
    );
    out.artifact("classification", &classify_colligation(&c, tol));
    emit_colligation(out, &c, dest)
}

fn representers(out: &mut Outcome, pair: &Path, dim_u: Option<usize>, g: Option<&Path>, cfg: &SampleConfig) -> Run {
    let p = io::read_pair(pair)?;
    let minimal = arveson_core::realization::representer_defect(&p, cfg)?.2;
    let dim_u = dim_u.unwrap_or(minimal);
    let g = g.map(|path| io::read_isometry(path, (dim_u, minimal))).transpose()?;
    let r = enumerate_representers(&p, dim_u, g.as_ref(), cfg)?;
    let tol = &cfg.tolerances;
    out.report.push(Check::bounded("kernel_equality", r.kernel_gap, tol.eq_tol, format!("minimal dimU = {minimal}")));
    out.report.push(Check::bounded(
        "adjoint_form",
        r.adjoint_form_gap,
        tol.eq_tol,
        "value formula against the adjoint generator formula",
    ));
    out.artifact("minimal_dim_u", &r.data.minimal_dim_u);
    out.artifact("dim_u", &dim_u);
    out.artifact("t_tilde", &from_matrix(&r.data.t_tilde));
    out.artifact("s_at_origin", &from_matrix(r.function.at_origin()));
    Ok(())
}

fn gleason(out: &mut Outcome, pair: Option<&Path>, colligation: Option<&Path>, cfg: &SampleConfig) -> Run {
    let input = match (pair, colligation) {
        (Some(p), _) => GleasonInput::Pair(io::read_pair(p)?),
        (None, Some(c)) => GleasonInput::Colligation(io::read_colligation(c)?),
        (None, None) => unreachable!("clap requires one of --pair, --colligation"),
    };
    out.report.extend(gleason_check(&input, cfg)?);
    Ok(())
}

fn equivalence(out: &mut Outcome, pair: &Path, pair2: &Path, cfg: &SampleConfig) -> Run {
    let p1 = io::read_pair(pair)?;
    let p2 = io::read_pair(pair2)?;
    let r = observability_and_equivalence(&p1, &p2, &cfg.tolerances);
    out.report.push(Check::flag(
        "equivalence",
        true,
        format!(
            "observable: {} / {}; equivalent: {}",
            r.observable1, r.observable2, r.equivalent
        ),
    ));
    if r.equivalent {
        out.report.push(Check::bounded(
            "equivalence_witness",
            r.intertwining_residual.max(r.unitarity_residual),
            cfg.tolerances.eq_tol,
            "unitary intertwiner",
        ));
    }
    out.artifact("equivalence", &r);
    Ok(())
}

fn overlap_demo(out: &mut Outcome, s: Option<&Path>, pair: Option<&Path>, count: usize, cfg: &SampleConfig) -> Run {
    let report = match (s, pair) {
        (Some(s), Some(p)) => {
            let s = io::read_schur(s)?;
            let p = io::read_pair(p)?;
            overlap_suite(&s, &p, count, cfg)?
        }
        _ => example33_overlap(count, cfg)?,
    };
    out.report.extend(report);
    Ok(())
}

/// Files describing the built-in example, for use as command inputs.
pub fn example_files() -> Vec<(&'static str, Value)> {
    let u0 = example33::colligation();
    let pair = |g: f64| serde_json::to_value(PairFile::from_pair(&example33::pair_real(g))).expect("serializable");
    vec![
        ("u0.json", serde_json::to_value(ColligationFile::from_colligation(&u0)).expect("serializable")),
        ("s33.json", json!({ "builtin": "example33" })),
        ("pair_gamma0.json", pair(0.0)),
        ("pair_gamma02.json", pair(0.2)),
        ("coordinates.json", json!({ "builtin": "coordinates", "d": 2 })),
        (
            "unit_pair.json",
            json!({ "d": 2, "dimX": 1, "dimY": 1, "A": [[[[0.0, 0.0]]], [[[0.0, 0.0]]]], "C": [[[1.0, 0.0]]] }),
        ),
        ("q_unit.json", json!({ "Q": [[[1.0, 0.0]]] })),
    ]
}
