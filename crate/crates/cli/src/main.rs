mod manifest;

use clap::{Args, Parser, Subcommand};
use disclab_core::coreset::{core_set, is_core_carrier, residual_set, Tri, DEFAULT_LEVEL};
use disclab_core::legendre::{inversion_check, lower_envelope, upper_envelope, EnvelopeFunction};
use disclab_core::measure::CircleMeasure;
use disclab_core::moments::{
    admissible_to_g, growth_class, is_admissible, majorant_from_g, moments_of_g, t1_sandwich, Majorant, MomentSequence,
    Provenance,
};
use disclab_core::obstacle::{build_levels, cyclic_witness, weak_star_error, MASS_TOL};
use disclab_core::oracle::{
    classify_invariant_subspace, has_permanence, hb_density, hb_existence, is_cyclic, theorem_c_check, Consistency,
};
use disclab_core::radial::RadialWeight;
use disclab_core::seqspace::{
    default_window, embedding_check, h1_star_norm, h2_norm, h2_star_norm, norm_identity_check, rsd_classify_with,
    toeplitz_coanalytic, RsdClass, RsdConfig,
};
use disclab_core::series::{taylor_of, TaylorSeries};
use disclab_core::transforms::{
    blaschke, cauchy_coefficients, cauchy_transform, clark_to_b, herglotz_integral, outer_from_log_modulus,
    poisson_integral, singular_inner, BSymbol, BoundaryFunction, DiskPoint,
};
use disclab_core::weight::Weight;
use disclab_core::wizard::{
    beurling_ahlfors_bound, build_profile, check_profile, choose_n0, hat_boundary_integral_bound, verify_bt_bound, Hat,
    McConfig, Profile, WizardProfile,
};
use manifest::{Envelope, Recorder, SCHEMA_VERSION};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "disclab", version, about = "Core sets, moment sequences, cyclicity oracles and wizard hats")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Write the output here instead of stdout (CSV for `hat verify` when the name ends in .csv)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker count for Monte Carlo runs; DISCLAB_WORKERS overrides it
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Args, Clone, Copy)]
struct Resolution {
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: u32,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// core(w), residual set and carrier test
    Core {
        #[command(subcommand)]
        cmd: CoreCmd,
    },
    /// Moment sequences, admissibility and majorants
    Moments {
        #[command(subcommand)]
        cmd: MomentsCmd,
    },
    /// Legendre envelopes
    Legendre {
        #[command(subcommand)]
        cmd: LegendreCmd,
    },
    /// Cauchy, Poisson, Herglotz, inner, outer, Blaschke and Clark transforms
    Transform {
        #[command(subcommand)]
        cmd: TransformCmd,
    },
    /// Taylor coefficients of the singular inner function S_ν
    Taylor {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "N", default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 0.97)]
        r: f64,
    },
    /// Weighted sequence spaces and rapid spectral decay
    Seqspace {
        #[command(subcommand)]
        cmd: SeqCmd,
    },
    /// Cyclicity, permanence, H(b) and Theorem C oracles
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Obstacle functions f_n and their weak-star errors
    Obstacle {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
        levels: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: u32,
        /// largest |k| in the weak-star table
        #[arg(long, default_value_t = 8)]
        degree: usize,
    },
    /// |h_n S_ν − 1| at sample points
    Witness {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "6,10,14")]
        levels: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: u32,
        /// sample point x,y (repeatable)
        #[arg(long = "z", value_parser = point, allow_hyphen_values = true, default_values = ["0,0", "0.5,0", "0,0.5"])]
        zs: Vec<(f64, f64)>,
    },
    /// Wizard-hat profiles and the Beurling–Ahlfors check
    Hat {
        #[command(subcommand)]
        cmd: HatCmd,
    },
    /// Reproductions of worked examples
    Demo {
        #[command(subcommand)]
        cmd: DemoCmd,
    },
}

#[derive(Subcommand)]
enum CoreCmd {
    /// Staggered dyadic core set
    Set {
        #[arg(long)]
        weight: PathBuf,
        #[command(flatten)]
        res: Resolution,
    },
    /// Core set together with the residual set
    Residual {
        #[arg(long)]
        weight: PathBuf,
        #[command(flatten)]
        res: Resolution,
    },
    /// Whether core(w) carries w
    Carrier {
        #[arg(long)]
        weight: PathBuf,
        #[command(flatten)]
        res: Resolution,
    },
}

#[derive(Subcommand)]
enum MomentsCmd {
    /// M_n = 2·P_G(2n + 1) for n ≤ N
    OfG {
        #[arg(long)]
        g: PathBuf,
        #[arg(long = "N", default_value_t = 100)]
        n: usize,
    },
    /// Admissibility report of a sequence
    Admissible {
        #[arg(long)]
        moments: PathBuf,
    },
    /// G = exp(−k^*) from an admissible sequence
    ToG {
        #[arg(long)]
        moments: PathBuf,
        /// skip the admissibility gate
        #[arg(long)]
        unverified: bool,
    },
    /// Growth flags of G
    Growth {
        #[arg(long)]
        g: PathBuf,
    },
    /// Majorant built from G, with its certificate
    Majorant {
        #[arg(long)]
        g: PathBuf,
    },
    /// T1 sandwich exp(−m_*(2x))/(4x) ≤ P_G(x) ≤ exp(−m_*(x))
    Sandwich {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum LegendreCmd {
    /// inf_y m(y) + xy
    Lower {
        #[arg(long = "fn")]
        func: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    /// sup_y k(y) − xy
    Upper {
        #[arg(long = "fn")]
        func: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    /// max |(k^*)_* − k| over a grid
    Inversion {
        #[arg(long = "fn")]
        func: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum TransformCmd {
    /// Cauchy transform C_ν(z)
    Cauchy(MeasureAt),
    /// Poisson integral P_ν(z)
    Poisson(MeasureAt),
    /// Herglotz transform H_ν(z)
    Herglotz(MeasureAt),
    /// Singular inner function S_ν(z)
    Inner(MeasureAt),
    /// b = (H_ν − 1)/(H_ν + 1) for a probability measure ν
    Clark(MeasureAt),
    /// ν_0..ν_N
    Coefficients {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "N", default_value_t = 32)]
        n: usize,
    },
    /// Outer function with boundary modulus w (or log-modulus w with --log)
    Outer {
        #[arg(long)]
        weight: PathBuf,
        /// treat the weight as φ itself rather than as |f|
        #[arg(long)]
        log: bool,
        #[arg(long = "z", value_parser = point, allow_hyphen_values = true, required = true)]
        zs: Vec<(f64, f64)>,
    },
    /// Finite Blaschke product at z
    Blaschke {
        #[arg(long = "zero", value_parser = point, allow_hyphen_values = true)]
        zeros: Vec<(f64, f64)>,
        #[arg(long = "z", value_parser = point, allow_hyphen_values = true, required = true)]
        zs: Vec<(f64, f64)>,
    },
}

#[derive(Args)]
struct MeasureAt {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long = "z", value_parser = point, allow_hyphen_values = true, required = true)]
    zs: Vec<(f64, f64)>,
}

#[derive(Subcommand)]
enum SeqCmd {
    /// H2(M), H2*(M) and H1*(M) norms
    Norms {
        #[arg(long)]
        moments: PathBuf,
        #[arg(long)]
        series: PathBuf,
    },
    /// Rapid spectral decay classification
    Rsd {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 2)]
        window: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.05)]
        c_min: f64,
    },
    /// ∫|f|²G dA against Σ M_n|f_n|²
    NormIdentity {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        series: PathBuf,
    },
    /// T_{h̄} f for n ≤ N
    Toeplitz {
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        series: PathBuf,
        #[arg(long = "N", default_value_t = 64)]
        n: usize,
    },
    /// Random check of the H2*(M) ⊂ H1*(M^p) embedding
    Embedding {
        #[arg(long)]
        moments: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Is S_ν cyclic in P²(μ_w)
    Cyclic(MeasureWeight),
    /// Is the invariant subspace of S_ν permanent
    Permanence(MeasureWeight),
    /// Split ν into its core and off-core parts
    Classify {
        #[command(flatten)]
        mw: MeasureWeight,
        #[arg(long = "zero", value_parser = point, allow_hyphen_values = true)]
        zeros: Vec<(f64, f64)>,
    },
    /// Do nonzero polynomially approximable functions exist in H(b)
    HbExistence {
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: u32,
    },
    /// Are polynomials dense in H(b)
    HbDensity {
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        res: Resolution,
    },
    /// Rapid decay of the coefficients of g dm against core(|g|) carrying |g|
    TheoremC {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "N", default_value_t = 512)]
        n: usize,
        #[command(flatten)]
        res: Resolution,
    },
}

#[derive(Args)]
struct MeasureWeight {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    weight: PathBuf,
    #[command(flatten)]
    res: Resolution,
}

#[derive(Subcommand)]
enum HatCmd {
    /// Profile from a majorant F
    Build {
        #[arg(long = "F")]
        f: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Partial sums of the L¹(ω) series bound
    Series {
        #[arg(long)]
        profile: PathBuf,
    },
    /// (8/π)exp(−2π ∫_t^{x0} dx/p(x − a))
    Bound {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
    },
    /// Monte Carlo ω(z₀, B_t) against the bound
    Verify {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        walks: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.9")]
        t: Vec<f64>,
        /// start point x,y; defaults to the midpoint at half height
        #[arg(long, value_parser = point)]
        z: Option<(f64, f64)>,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        b: f64,
    },
}

#[derive(Subcommand)]
enum DemoCmd {
    /// w = exp(−1/dist(·, 1)): δ at angle 0 is cyclic, δ at angle π is not
    #[command(name = "example-1-5")]
    Example15 {
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: u32,
    },
}

fn point(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    let x = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((x, y))
}

enum Failure {
    Core(disclab_core::Error),
    Input(String),
}

impl From<disclab_core::Error> for Failure {
    fn from(e: disclab_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) => e.exit_code() as u8,
            Failure::Input(_) => 2,
        }
    }
    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Input(s) => s.clone(),
        }
    }
}

type Run = Result<Output, Failure>;

struct Output {
    result: Value,
    inconclusive: bool,
    /// rows for CSV output
    csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
}

impl Output {
    fn of(v: impl serde::Serialize) -> Self {
        Output { result: to_value(v), inconclusive: false, csv: None }
    }
    fn verdict(v: impl serde::Serialize, t: Tri) -> Self {
        Output { result: to_value(v), inconclusive: t == Tri::Inconclusive, csv: None }
    }
}

fn to_value(v: impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

struct Ctx {
    rec: Recorder,
    workers: usize,
}

impl Ctx {
    fn load<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, Failure> {
        let bytes = self.rec.read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_slice(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
    fn weight(&mut self, path: &Path) -> Result<Weight, Failure> {
        let w: Weight = self.load(path)?;
        w.validate()?;
        Ok(w)
    }
    fn measure(&mut self, path: &Path) -> Result<CircleMeasure, Failure> {
        let m: CircleMeasure = self.load(path)?;
        m.validate()?;
        Ok(m)
    }
    fn radial(&mut self, path: &Path) -> Result<RadialWeight, Failure> {
        let g: RadialWeight = self.load(path)?;
        g.validate()?;
        Ok(g)
    }
    fn moments(&mut self, path: &Path) -> Result<MomentSequence, Failure> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum In {
            Values(Vec<f64>),
            Sequence(MomentSequence),
        }
        Ok(match self.load::<In>(path)? {
            In::Values(v) => MomentSequence::explicit(v)?,
            In::Sequence(s) => {
                let mut m = MomentSequence::explicit(s.values)?;
                m.errors = s.errors;
                if let Provenance::FromG { g } = s.provenance {
                    g.validate()?;
                    m.provenance = Provenance::FromG { g };
                }
                m
            }
        })
    }
    fn series(&mut self, path: &Path) -> Result<TaylorSeries, Failure> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum In {
            Real(Vec<f64>),
            Series(TaylorSeries),
        }
        Ok(match self.load::<In>(path)? {
            In::Real(v) => TaylorSeries::from_real(&v),
            In::Series(s) => s,
        })
    }
    fn profile(&mut self, path: &Path) -> Result<Profile, Failure> {
        let v: Value = self.load(path)?;
        // accept `hat build` output, a bare profile object or a tagged Profile
        let inner = v.get("result").and_then(|r| r.get("profile")).or_else(|| v.get("profile")).unwrap_or(&v).clone();
        if inner.get("kind").is_some() {
            return serde_json::from_value(inner).map_err(|e| Failure::Input(format!("{}: {e}", path.display())));
        }
        serde_json::from_value::<WizardProfile>(inner)
            .map(Profile::Wizard)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

fn disk_points(zs: &[(f64, f64)]) -> Result<Vec<DiskPoint>, Failure> {
    zs.iter().map(|&(x, y)| DiskPoint::new(x, y).map_err(Failure::from)).collect()
}

fn at_points<F>(zs: &[(f64, f64)], f: F) -> Run
where
    F: Fn(DiskPoint) -> disclab_core::Result<Complex64>,
{
    let pts = disk_points(zs)?;
    let rows = pts
        .iter()
        .map(|&z| f(z).map(|v| json!({ "z": [z.z().re, z.z().im], "value": [v.re, v.im] })))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Output::of(rows))
}

fn run(cmd: Cmd, ctx: &mut Ctx) -> Run {
    match cmd {
        Cmd::Core { cmd } => match cmd {
            CoreCmd::Set { weight, res } => {
                let w = ctx.weight(&weight)?;
                let r = core_set(&w, res.level)?;
                let inconclusive = !r.inconclusive.is_empty();
                Ok(Output { result: to_value(&r), inconclusive, csv: None })
            }
            CoreCmd::Residual { weight, res } => {
                let w = ctx.weight(&weight)?;
                let (core, residual) = residual_set(&w, res.level)?;
                let inconclusive = !core.inconclusive.is_empty();
                Ok(Output { result: json!({ "core": core, "residual": residual }), inconclusive, csv: None })
            }
            CoreCmd::Carrier { weight, res } => {
                let w = ctx.weight(&weight)?;
                let r = is_core_carrier(&w, res.level, res.tol)?;
                Ok(Output::verdict(&r, r.verdict))
            }
        },
        Cmd::Moments { cmd } => match cmd {
            MomentsCmd::OfG { g, n } => Ok(Output::of(moments_of_g(&ctx.radial(&g)?, n)?)),
            MomentsCmd::Admissible { moments } => Ok(Output::of(is_admissible(&ctx.moments(&moments)?)?)),
            MomentsCmd::ToG { moments, unverified } => {
                Ok(Output::of(admissible_to_g(&ctx.moments(&moments)?, unverified)?))
            }
            MomentsCmd::Growth { g } => Ok(Output::of(growth_class(&ctx.radial(&g)?)?)),
            MomentsCmd::Majorant { g } => {
                let f = majorant_from_g(&ctx.radial(&g)?)?;
                let cert = f.certify()?;
                Ok(Output::of(json!({ "majorant": f, "certificate": cert })))
            }
            MomentsCmd::Sandwich { beta, c, x } => {
                let rows = x
                    .iter()
                    .map(|&x| {
                        t1_sandwich(beta, c, x).map(|(lo, p, hi)| {
                            json!({ "x": x, "lower": lo, "p_g": p.value, "error": p.error, "upper": hi, "holds": lo <= p.value && p.value <= hi })
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Output::of(rows))
            }
        },
        Cmd::Legendre { cmd } => match cmd {
            LegendreCmd::Lower { func, x } => {
                let f: EnvelopeFunction = ctx.load(&func)?;
                Ok(Output::of(json!({ "x": x, "value": lower_envelope(&f, &x)? })))
            }
            LegendreCmd::Upper { func, x } => {
                let f: EnvelopeFunction = ctx.load(&func)?;
                Ok(Output::of(json!({ "x": x, "value": upper_envelope(&f, &x)? })))
            }
            LegendreCmd::Inversion { func, x } => {
                let f: EnvelopeFunction = ctx.load(&func)?;
                Ok(Output::of(json!({ "max_error": inversion_check(&f, &x)? })))
            }
        },
        Cmd::Transform { cmd } => match cmd {
            TransformCmd::Cauchy(a) => {
                let nu = ctx.measure(&a.measure)?;
                at_points(&a.zs, |z| cauchy_transform(&nu, z))
            }
            TransformCmd::Poisson(a) => {
                let nu = ctx.measure(&a.measure)?;
                at_points(&a.zs, |z| poisson_integral(&nu, z))
            }
            TransformCmd::Herglotz(a) => {
                let nu = ctx.measure(&a.measure)?;
                at_points(&a.zs, |z| herglotz_integral(&nu, z))
            }
            TransformCmd::Inner(a) => {
                let nu = ctx.measure(&a.measure)?;
                at_points(&a.zs, |z| singular_inner(&nu, z))
            }
            TransformCmd::Clark(a) => {
                let nu = ctx.measure(&a.measure)?;
                at_points(&a.zs, |z| clark_to_b(&nu, z))
            }
            TransformCmd::Coefficients { measure, n } => {
                let nu = ctx.measure(&measure)?;
                Ok(Output::of(cauchy_coefficients(&nu, n)?))
            }
            TransformCmd::Outer { weight, log, zs } => {
                let w = ctx.weight(&weight)?;
                let phi =
                    if log { BoundaryFunction::Values { weight: w } } else { BoundaryFunction::LogOf { weight: w } };
                at_points(&zs, |z| outer_from_log_modulus(&phi, z))
            }
            TransformCmd::Blaschke { zeros, zs } => {
                let zeros = disk_points(&zeros)?;
                at_points(&zs, |z| Ok(blaschke(&zeros, z)))
            }
        },
        Cmd::Taylor { measure, n, r } => {
            let nu = ctx.measure(&measure)?;
            let fit = taylor_of(
                |z| DiskPoint::from_complex(z).and_then(|p| singular_inner(&nu, p)).unwrap_or_default(),
                n,
                r,
            )?;
            Ok(Output::of(fit))
        }
        Cmd::Seqspace { cmd } => match cmd {
            SeqCmd::Norms { moments, series } => {
                let m = ctx.moments(&moments)?;
                let f = ctx.series(&series)?;
                Ok(Output::of(
                    json!({ "h2": h2_norm(&m, &f)?, "h2_star": h2_star_norm(&m, &f)?, "h1_star": h1_star_norm(&m, &f)? }),
                ))
            }
            SeqCmd::Rsd { series, window, c_min } => {
                let f = ctx.series(&series)?;
                let window = match window {
                    Some(w) => [w[0], w[1]],
                    None => default_window(&f),
                };
                let cfg = RsdConfig { c_min, ..RsdConfig::default() };
                let v = rsd_classify_with(&f, window, &cfg)?;
                let inconclusive = v.verdict == RsdClass::Inconclusive;
                Ok(Output { result: to_value(&v), inconclusive, csv: None })
            }
            SeqCmd::NormIdentity { g, series } => {
                let g = ctx.radial(&g)?;
                Ok(Output::of(norm_identity_check(&g, &ctx.series(&series)?)?))
            }
            SeqCmd::Toeplitz { h, series, n } => {
                let h = ctx.series(&h)?;
                Ok(Output::of(toeplitz_coanalytic(&h, &ctx.series(&series)?, n)))
            }
            SeqCmd::Embedding { moments, p, samples, seed } => {
                ctx.rec.manifest.seed = Some(seed);
                Ok(Output::of(embedding_check(&ctx.moments(&moments)?, p, samples, seed)?))
            }
        },
        Cmd::Oracle { cmd } => match cmd {
            OracleCmd::Cyclic(a) => {
                let (nu, w) = (ctx.measure(&a.measure)?, ctx.weight(&a.weight)?);
                let v = is_cyclic(&nu, &w, a.res.level, a.res.tol)?;
                Ok(Output::verdict(&v, v.verdict))
            }
            OracleCmd::Permanence(a) => {
                let (nu, w) = (ctx.measure(&a.measure)?, ctx.weight(&a.weight)?);
                let v = has_permanence(&nu, &w, a.res.level, a.res.tol)?;
                Ok(Output::verdict(&v, v.verdict))
            }
            OracleCmd::Classify { mw, zeros } => {
                let (nu, w) = (ctx.measure(&mw.measure)?, ctx.weight(&mw.weight)?);
                Ok(Output::of(classify_invariant_subspace(&disk_points(&zeros)?, &nu, &w, mw.res.level)?))
            }
            OracleCmd::HbExistence { b, level } => {
                let b: BSymbol = ctx.load(&b)?;
                let r = hb_existence(&b, level)?;
                Ok(Output::verdict(&r, r.verdict))
            }
            OracleCmd::HbDensity { b, res } => {
                let b: BSymbol = ctx.load(&b)?;
                let r = hb_density(&b, res.level, res.tol)?;
                Ok(Output::verdict(&r, r.verdict))
            }
            OracleCmd::TheoremC { measure, n, res } => {
                let g = ctx.measure(&measure)?;
                let r = theorem_c_check(&g, n, res.level, res.tol)?;
                let inconclusive = r.status == Consistency::Inconclusive;
                Ok(Output { result: to_value(&r), inconclusive, csv: None })
            }
        },
        Cmd::Obstacle { measure, weight, levels, level, degree } => {
            let (nu, w) = (ctx.measure(&measure)?, ctx.weight(&weight)?);
            let seq = build_levels(&nu, &w, &levels, level, MASS_TOL)?;
            let table = weak_star_error(&seq, &nu, degree)?;
            Ok(Output::of(json!({ "functions": seq, "weak_star": table })))
        }
        Cmd::Witness { measure, weight, levels, level, zs } => {
            let (nu, w) = (ctx.measure(&measure)?, ctx.weight(&weight)?);
            Ok(Output::of(cyclic_witness(&nu, &w, &levels, level, &disk_points(&zs)?)?))
        }
        Cmd::Hat { cmd } => run_hat(cmd, ctx),
        Cmd::Demo { cmd: DemoCmd::Example15 { level } } => {
            let w = Weight::exp_dist(1.0, 1.0, vec![0.0]);
            let rows = [0.0, PI]
                .iter()
                .map(|&a| {
                    is_cyclic(&CircleMeasure::atom(a, 1.0), &w, level, 1e-8)
                        .map(|v| json!({ "angle": a, "cyclic": v.verdict, "oracle": v }))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let inconclusive = rows.iter().any(|r| r["cyclic"] == json!(Tri::Inconclusive));
            Ok(Output { result: json!({ "weight": w, "level": level, "rows": rows }), inconclusive, csv: None })
        }
    }
}

fn run_hat(cmd: HatCmd, ctx: &mut Ctx) -> Run {
    match cmd {
        HatCmd::Build { f, eps } => {
            let f: Majorant = ctx.load(&f)?;
            let cert = choose_n0(&f, eps)?;
            let p = build_profile(&f, eps)?;
            Ok(Output::of(json!({
                "n0_certificate": cert,
                "checks": check_profile(&p),
                "series_bound": hat_boundary_integral_bound(&p),
                "profile": p,
            })))
        }
        HatCmd::Series { profile } => match ctx.profile(&profile)? {
            Profile::Wizard(p) => Ok(Output::of(hat_boundary_integral_bound(&p))),
            _ => Err(Failure::Input("the series bound needs a wizard profile".into())),
        },
        HatCmd::Bound { profile, t, x0 } => {
            let hat = Hat::new(0.0, 2.0, ctx.profile(&profile)?)?;
            let rows = t
                .iter()
                .map(|&t| beurling_ahlfors_bound(&hat, t, x0).map(|b| json!({ "t": t, "bound": b })))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Output::of(rows))
        }
        HatCmd::Verify { profile, walks, seed, t, z, a, b } => {
            let hat = Hat::new(a, b, ctx.profile(&profile)?)?;
            let mid = 0.5 * (a + b);
            let z0 = z.unwrap_or((mid, 0.5 * hat.top(mid)));
            ctx.rec.manifest.seed = Some(seed);
            let cfg = McConfig { walks, seed, workers: ctx.workers, ..McConfig::default() };
            let rows = verify_bt_bound(&hat, &t, z0, &cfg)?;
            let csv = rows
                .iter()
                .map(|r| {
                    vec![
                        r.t.to_string(),
                        r.estimate.to_string(),
                        r.std_error.to_string(),
                        r.bound.to_string(),
                        r.pass.to_string(),
                    ]
                })
                .collect();
            Ok(Output {
                result: json!({ "z0": [z0.0, z0.1], "walks": walks, "rows": rows }),
                inconclusive: false,
                csv: Some((vec!["t", "estimate", "std_error", "bound", "pass"], csv)),
            })
        }
    }
}

fn workers(flag: Option<usize>) -> usize {
    std::env::var("DISCLAB_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .or(flag)
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn write(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        // a closed pipe (`disclab ... | head`) is not an error
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        },
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let command: Vec<&str> = argv[1..].iter().take_while(|a| !a.starts_with('-')).map(String::as_str).collect();
    let workers = workers(cli.workers);
    let mut ctx = Ctx { rec: Recorder::new(command.join(" "), argv[1..].to_vec(), workers), workers };
    let outcome = run(cli.cmd, &mut ctx);
    let manifest = ctx.rec.finish();
    match outcome {
        Ok(o) => {
            let csv_out = cli.out.as_ref().filter(|p| p.extension().is_some_and(|e| e == "csv"));
            let text = match (&o.csv, csv_out) {
                (Some((header, rows)), Some(_)) => {
                    let mut s = format!("# {}\n", serde_json::to_string(&manifest).expect("manifest serializes"));
                    s.push_str(&format!("# schema_version {SCHEMA_VERSION}\n{}\n", header.join(",")));
                    for r in rows {
                        s.push_str(&r.join(","));
                        s.push('\n');
                    }
                    s
                }
                _ => serde_json::to_string_pretty(&Envelope {
                    schema_version: SCHEMA_VERSION,
                    manifest: &manifest,
                    result: &o.result,
                })
                .expect("output serializes"),
            };
            if let Err(e) = write(cli.out.as_deref(), &text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if o.inconclusive { 3 } else { 0 })
        }
        Err(f) => {
            let err = json!({ "schema_version": SCHEMA_VERSION, "manifest": manifest, "error": f.message(), "exit_code": f.exit_code() });
            eprintln!("{}", serde_json::to_string_pretty(&err).expect("error serializes"));
            ExitCode::from(f.exit_code())
        }
    }
}
