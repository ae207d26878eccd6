use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use measbound::experiments::{
    csv_header, even_power, figure_csv, figure_rows, maxcut_batch, maxcut_bounds, maxcut_gen, maxcut_opt,
    parse_probability, table3_from_batch, test_function, Figure, MaxCutInstance, FULL_BASIS_BUDGET,
};
use measbound::geoassume::{growth_exponent, RegionSpec};
use measbound::hierarchy::{
    density_grid, fmt_sig, optimal_density, sample_density, upper_bound_full, upper_bound_pfm, upper_bounds_full,
    Method,
};
use measbound::linalg::{HFloat, Precision, PRECISION_ENV};
use measbound::measures::{Domain, DomainKind};
use measbound::needle::{build_needle, certificate_bound, verify_needle, CertificateOptions, NeedleParams};
use measbound::orthopoly::{jacobi_recurrence, smallest_root, theorem3_reference, JacobiParams};
use measbound::polyring::{parse_rat, MPoly, Rat};

#[derive(Parser)]
#[command(name = "measbound", version, about = "Measure-based upper bounds for polynomial minimization")]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = PRECISION_ENV, default_value_t = 256)]
    precision: u32,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upper bound f^(r) or f_pfm^(r) of one polynomial.
    Bound(BoundArgs),
    /// Needle certificate bound on the unit box.
    Certificate(CertificateArgs),
    /// Local volume growth exponent of a region.
    Geom(GeomArgs),
    #[command(subcommand)]
    Maxcut(MaxcutCommand),
    /// Figure data as CSV.
    Figures {
        #[arg(value_enum)]
        which: FigureArg,
        #[arg(long, default_value_t = 20)]
        r_max: usize,
    },
    /// Quick consistency checks.
    Selftest {
        /// Include the slow statistical MAXCUT check.
        #[arg(long)]
        long: bool,
    },
}

#[derive(Args)]
struct Objective {
    /// Polynomial file, one term per line: `num/den e1 ... en`.
    #[arg(long, conflicts_with = "function")]
    poly: Option<PathBuf>,
    /// Catalog function: booth, matyas, camel, motzkin, or x^2k as `pow<k>`.
    #[arg(long)]
    function: Option<String>,
    /// Number of variables (inferred from the file when omitted).
    #[arg(long)]
    dim: Option<usize>,
}

impl Objective {
    fn load(&self) -> anyhow::Result<(MPoly, Option<Rat>)> {
        match (&self.poly, &self.function) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Ok((MPoly::from_text(&text, self.dim)?, None))
            }
            (None, Some(name)) => {
                if let Some(k) = name.strip_prefix("pow") {
                    let k: u32 = k.parse().with_context(|| format!("bad power `{name}`"))?;
                    return Ok((even_power(k), Some(Rat::new())));
                }
                let tf = test_function(name)?;
                Ok((tf.poly, Some(tf.f_min)))
            }
            (None, None) => bail!("either --poly or --function is required"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Box,
    Ball,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Full,
    PfmHankel,
    PfmCheb,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Full => Method::Full,
            MethodArg::PfmHankel => Method::PfmHankel,
            MethodArg::PfmCheb => Method::PfmChebyshev,
        }
    }
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    objective: Objective,
    #[arg(long, value_enum, default_value = "box")]
    domain: DomainArg,
    #[arg(long)]
    r: usize,
    #[arg(long, value_enum, default_value = "pfm-hankel")]
    method: MethodArg,
    /// Emit every order 0..=r.
    #[arg(long)]
    all: bool,
    /// Also write the optimal density sampled on a grid with this spacing.
    #[arg(long)]
    density_grid: Option<String>,
}

#[derive(Args)]
struct CertificateArgs {
    #[command(flatten)]
    objective: Objective,
    /// Orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    r: Vec<usize>,
    #[arg(long)]
    fmin: Option<String>,
    #[arg(long)]
    fmax: Option<String>,
    /// Fail instead of capping h when the width formula gives h >= 1.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct GeomArgs {
    #[arg(long)]
    region: PathBuf,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    anchor: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
    ladder: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
}

#[derive(Subcommand)]
enum MaxcutCommand {
    /// Random instance in text form.
    Gen {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value = "1/2")]
        p: String,
    },
    /// Lower bounds on OPT for one instance.
    Bounds {
        /// Instance file; a fresh instance is generated when omitted.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value = "1/2")]
        p: String,
        #[arg(long, default_value_t = 4)]
        r_max: usize,
        /// Largest basis size for full bounds.
        #[arg(long, default_value_t = FULL_BASIS_BUDGET)]
        full_budget: usize,
    },
    /// Averaged relative gaps over fresh instances.
    Table3 {
        #[arg(long, default_value = "1/2")]
        p: String,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        r_max: usize,
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig3,
    Fig4,
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn rat_arg(s: &str) -> anyhow::Result<Rat> {
    parse_rat(s)
        .or_else(|| s.parse::<f64>().ok().and_then(Rat::from_f64))
        .with_context(|| format!("cannot parse number `{s}`"))
}

fn run_bound(cli: &Cli, args: &BoundArgs, prec: Precision) -> anyhow::Result<()> {
    let (f, _) = args.objective.load()?;
    let domain = match args.domain {
        DomainArg::Box => Domain::unit_box(f.nvars()),
        DomainArg::Ball => Domain::ball(f.nvars()),
    };
    let method = Method::from(args.method);
    let extra = format!("domain={domain} method={method}");
    let mut csv = csv_header("bound", None, prec, &extra);
    csv.push_str("r,method,value\n");
    let results = match (method, args.all) {
        (Method::Full, true) => upper_bounds_full(&f, &domain, args.r, prec)?,
        (Method::Full, false) => vec![upper_bound_full(&f, &domain, args.r, prec)?],
        (m, true) => (0..=args.r).map(|r| upper_bound_pfm(&f, &domain, r, m, prec)).collect::<Result<_, _>>()?,
        (m, false) => vec![upper_bound_pfm(&f, &domain, args.r, m, prec)?],
    };
    for res in &results {
        csv.push_str(&res.csv_row());
        csv.push('\n');
    }
    emit(&cli.out, &csv)?;
    if let Some(step) = &args.density_grid {
        let step = rat_arg(step)?;
        let last = results.last().expect("at least one bound");
        let density = optimal_density(last, &f)?;
        let grid = density_grid(&domain, &step)?;
        let mut out = csv_header("density", None, prec, &format!("{extra} r={}", last.r));
        let cols: Vec<String> = (1..=f.nvars()).map(|i| format!("x{i}")).collect();
        out.push_str(&cols.join(","));
        out.push_str(",density\n");
        for (p, v) in sample_density(&density, &grid)? {
            let coords: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("{},{:.11e}\n", coords.join(","), v.to_f64()));
        }
        match &cli.out {
            Some(path) => fs::write(sibling(path, ".density.csv"), out)?,
            None => emit(&None, &out)?,
        }
    }
    Ok(())
}

fn run_certificate(cli: &Cli, args: &CertificateArgs, prec: Precision) -> anyhow::Result<()> {
    let (f, known_min) = args.objective.load()?;
    if args.r.is_empty() {
        bail!("--r needs at least one order");
    }
    let extrema = match (&args.fmin, &args.fmax) {
        (Some(lo), Some(hi)) => Some((rat_arg(lo)?, rat_arg(hi)?)),
        (None, None) => None,
        _ => bail!("--fmin and --fmax go together"),
    };
    let base = if args.strict { CertificateOptions::strict() } else { CertificateOptions::default() };
    let mut opts = CertificateOptions { extrema, prec, ..base };
    if opts.extrema.is_none() {
        if let Some(lo) = known_min {
            let hi = measbound::experiments::grid_max_box(&f, 1001);
            opts.extrema = Some((lo, Rat::from_f64(hi).context("non-finite maximum")?));
        }
    }
    let domain = Domain::unit_box(f.nvars());
    let mut csv = csv_header("certificate", None, prec, &format!("domain={domain}"));
    csv.push_str("r,h,ratio,bound\n");
    for &r in &args.r {
        let rep = certificate_bound(&f, &domain, r, &opts)?;
        csv.push_str(&rep.csv_row());
        csv.push('\n');
    }
    emit(&cli.out, &csv)
}

fn run_geom(cli: &Cli, args: &GeomArgs, prec: Precision) -> anyhow::Result<()> {
    let region = RegionSpec::from_file(&args.region)?;
    let fit = growth_exponent(&region, &args.anchor, &args.ladder, args.samples, cli.seed)?;
    let header = csv_header("geom", Some(cli.seed), prec, &format!("samples={}", args.samples));
    emit(&cli.out, &fit.to_csv(&header))
}

fn run_maxcut(cli: &Cli, cmd: &MaxcutCommand, prec: Precision) -> anyhow::Result<()> {
    match cmd {
        MaxcutCommand::Gen { n, p } => {
            let inst = maxcut_gen(*n, &parse_probability(p)?, cli.seed)?;
            emit(&cli.out, &inst.to_text())
        }
        MaxcutCommand::Bounds { instance, n, p, r_max, full_budget } => {
            let inst = match instance {
                Some(path) => MaxCutInstance::from_text(&fs::read_to_string(path)?)?,
                None => maxcut_gen(*n, &parse_probability(p)?, cli.seed)?,
            };
            let opt = maxcut_opt(&inst)?;
            let rows = maxcut_bounds(&inst, *r_max, *full_budget, prec)?;
            let extra = format!("sense=max n={} p={} instance_seed={} opt={}", inst.n, inst.p, inst.seed, opt);
            let mut csv = csv_header("maxcut-bounds", Some(cli.seed), prec, &extra);
            csv.push_str("r,full,pfm,opt\n");
            let o = prec.float(&opt);
            for row in rows {
                let full = row.full.as_ref().map(|v| fmt_sig(v, 12)).unwrap_or_default();
                csv.push_str(&format!("{},{},{},{}\n", row.r, full, fmt_sig(&row.pfm, 12), fmt_sig(&o, 12)));
            }
            emit(&cli.out, &csv)
        }
        MaxcutCommand::Table3 { p, count, r_max, n } => {
            let p = parse_probability(p)?;
            let batch = maxcut_batch(*n, &p, *count, *r_max, cli.seed, prec, |b| {
                eprintln!("instance {} opt={:.6}", b.index, b.opt.to_f64());
            })?;
            let table = table3_from_batch(&p, *r_max, &batch);
            let extra = format!("sense=max n={n} generator=splitmix64");
            emit(&cli.out, &table.to_csv(&csv_header("table3", Some(cli.seed), prec, &extra)))
        }
    }
}

struct Check {
    name: &'static str,
    run: fn(Precision) -> anyhow::Result<String>,
}

fn rel(a: &HFloat, b: &HFloat) -> f64 {
    let d = HFloat::with_val(a.prec(), a - b);
    (d / b).abs().to_f64()
}

fn check_legendre(prec: Precision) -> anyhow::Result<String> {
    let f = MPoly::var(1, 0);
    let rec = jacobi_recurrence(&JacobiParams::legendre(), 12, prec)?;
    let bounds = upper_bounds_full(&f, &Domain::unit_box(1), 10, prec)?;
    let worst = bounds.iter().map(|b| rel(&b.value, &smallest_root(&rec, b.r + 1))).fold(0.0, f64::max);
    if worst > 1e-10 {
        bail!("relative error {worst:.3e}");
    }
    Ok(format!("max rel {worst:.1e}"))
}

fn check_theorem3(prec: Precision) -> anyhow::Result<String> {
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        for r in 1..=8 {
            let got = upper_bound_pfm(&even_power(k), &Domain::unit_box(1), r, Method::PfmHankel, prec)?;
            worst = worst.max(rel(&got.value, &theorem3_reference(k, r, prec)?));
        }
    }
    if worst > 1e-8 {
        bail!("relative error {worst:.3e}");
    }
    Ok(format!("max rel {worst:.1e}"))
}

fn check_methods(prec: Precision) -> anyhow::Result<String> {
    let mut worst: f64 = 0.0;
    for name in ["booth", "motzkin"] {
        let tf = test_function(name)?;
        for kind in [DomainKind::Box, DomainKind::Ball] {
            let dom = Domain { kind, nvars: 2 };
            for r in [2, 6] {
                let a = upper_bound_pfm(&tf.poly, &dom, r, Method::PfmHankel, prec)?;
                let b = upper_bound_pfm(&tf.poly, &dom, r, Method::PfmChebyshev, prec)?;
                worst = worst.max(rel(&a.value, &b.value));
            }
        }
    }
    if worst > 1e-8 {
        bail!("relative difference {worst:.3e}");
    }
    Ok(format!("max rel {worst:.1e}"))
}

fn check_needle(_: Precision) -> anyhow::Result<String> {
    let params = NeedleParams::new(10, Rat::from((1, 10)))?;
    let rep = verify_needle(&build_needle(&params), &params, 2000);
    if !rep.passed() {
        bail!("{rep}");
    }
    Ok(rep.to_string())
}

fn check_maxcut(prec: Precision) -> anyhow::Result<String> {
    let inst = maxcut_gen(6, &Rat::from((1, 2)), 7)?;
    let opt = maxcut_opt(&inst)?.to_f64();
    let rows = maxcut_bounds(&inst, 2, FULL_BASIS_BUDGET, prec)?;
    for w in rows.windows(2) {
        if w[1].pfm < w[0].pfm {
            bail!("pfm bound decreased at r = {}", w[1].r);
        }
    }
    if rows.iter().any(|r| r.pfm.to_f64() > opt) {
        bail!("bound above OPT");
    }
    Ok(format!("opt {opt:.4}, pfm(2) {:.4}", rows[2].pfm.to_f64()))
}

fn check_geometry(_: Precision) -> anyhow::Result<String> {
    let fit = growth_exponent(&RegionSpec::unit_box(2), &[0.2, -0.3], &[0.4, 0.2, 0.1], 100_000, 1)?;
    let n = fit.exponent.unwrap_or(f64::NAN);
    if !(1.8..=2.2).contains(&n) {
        bail!("exponent {n}");
    }
    Ok(format!("N = {n:.3}"))
}

fn check_table3(prec: Precision) -> anyhow::Result<String> {
    let p = Rat::from((1, 2));
    let batch = maxcut_batch(8, &p, 50, 2, 2024, prec, |_| {})?;
    let t = table3_from_batch(&p, 2, &batch);
    let ratio = t.ratio[2].unwrap_or(f64::NAN);
    let pfm = t.ratio_pfm[2];
    if (ratio - 0.65).abs() > 0.05 || (pfm - 0.56).abs() > 0.05 {
        bail!("ratio {ratio:.3}, ratio_pfm {pfm:.3}");
    }
    Ok(format!("ratio {ratio:.3}, ratio_pfm {pfm:.3}"))
}

fn run_selftest(cli: &Cli, long: bool, prec: Precision) -> anyhow::Result<()> {
    let mut checks = vec![
        Check { name: "legendre-oracle", run: check_legendre },
        Check { name: "jacobi-oracle", run: check_theorem3 },
        Check { name: "method-agreement", run: check_methods },
        Check { name: "needle", run: check_needle },
        Check { name: "maxcut", run: check_maxcut },
        Check { name: "geometry", run: check_geometry },
    ];
    if long {
        checks.push(Check { name: "table3", run: check_table3 });
    }
    let mut report = String::new();
    let mut failed = 0;
    for c in &checks {
        let line = match (c.run)(prec) {
            Ok(msg) => format!("PASS {} {msg}\n", c.name),
            Err(e) => {
                failed += 1;
                format!("FAIL {} {e}\n", c.name)
            }
        };
        eprint!("{line}");
        report.push_str(&line);
    }
    if cli.out.is_some() {
        emit(&cli.out, &report)?;
    }
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let prec = Precision::new(cli.precision)?;
    match &cli.command {
        Command::Bound(args) => run_bound(&cli, args, prec),
        Command::Certificate(args) => run_certificate(&cli, args, prec),
        Command::Geom(args) => run_geom(&cli, args, prec),
        Command::Maxcut(cmd) => run_maxcut(&cli, cmd, prec),
        Command::Figures { which, r_max } => {
            let (fig, name) = match which {
                FigureArg::Fig3 => (Figure::Fig3, "fig3"),
                FigureArg::Fig4 => (Figure::Fig4, "fig4"),
            };
            let rows = figure_rows(fig, *r_max, prec)?;
            emit(&cli.out, &figure_csv(&rows, &csv_header(name, None, prec, "sense=min")))
        }
        Command::Selftest { long } => run_selftest(&cli, *long, prec),
    }
}
