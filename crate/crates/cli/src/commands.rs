//! One function per subcommand, each returning a serializable report.

use kappa_core::clusters::{ExponentConvention, GaussianFixture};
use kappa_core::flip::{
    binary_word, flip_conservation, tau_involution_check_with, tau_kappa_with, FlipReport,
};
use kappa_core::kinematics::{compose, omega_kappa, shell_residual};
use kappa_core::osc::{circ_binary, circ_commutator, MonomialReport, TermSumReport};
use kappa_core::report::{complex, FourMomentumReport, Sig17};
use kappa_core::shell::{coupled_residual, solve_coupled};
use kappa_core::starprod::{
    bilocal_bracket_eigenvalues, circ_star_equivalence, moyal_star_planewaves, star_planewaves,
    CircStarReport, OperatorSymbol, Theta,
};
use kappa_core::{FourMomentum, KappaContext, Monomial, OscFactor, ShellAssignment, Vec3};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, Report, Table};

pub fn context(cfg: &RunConfig) -> Result<KappaContext, CliError> {
    Ok(KappaContext::new(cfg.kappa, cfg.m0)?)
}

fn kinds_label(cfg: &RunConfig) -> String {
    format!("{}{}", cfg.kinds.0.symbol(), cfg.kinds.1.symbol())
}

#[derive(Debug, Serialize)]
pub struct DispersionReport {
    pub columns: [&'static str; 4],
    pub rows: Vec<[f64; 4]>,
}

pub const DISPERSION_COLUMNS: [&str; 4] = ["k", "omega_kappa", "omega_classical", "shell_residual"];

impl Report for DispersionReport {
    fn table(&self) -> Table {
        let mut t = Table::new(DISPERSION_COLUMNS.to_vec());
        for r in &self.rows {
            t.push(r.iter().map(|x| num(*x)).collect());
        }
        t
    }
}

/// `|k|` sampled uniformly on `[0, kmax]`, momenta along the x axis.
pub fn dispersion(cfg: &RunConfig) -> Result<DispersionReport, CliError> {
    let ctx = context(cfg)?;
    let n = cfg.grid.points;
    let rows = (0..n)
        .map(|i| {
            let k = cfg.grid.kmax * i as f64 / (n - 1) as f64;
            let v = Vec3::new(k, 0.0, 0.0);
            let w = omega_kappa(&v, &ctx);
            [
                k,
                w,
                (k * k + ctx.m0 * ctx.m0).sqrt(),
                shell_residual(&FourMomentum::new(w, v), &ctx),
            ]
        })
        .collect();
    Ok(DispersionReport {
        columns: DISPERSION_COLUMNS,
        rows,
    })
}

fn four_rows(t: &mut Table, label: &str, p: &FourMomentum) {
    t.push(vec![
        label.to_string(),
        num(p.e),
        num(p.k.x),
        num(p.k.y),
        num(p.k.z),
    ]);
}

#[derive(Debug, Serialize)]
pub struct ComposeReport {
    pub p: FourMomentumReport,
    pub q: FourMomentumReport,
    pub p_then_q: FourMomentumReport,
    pub q_then_p: FourMomentumReport,
    /// `|(p + q).k - (q + p).k|`
    pub noncommutativity: Sig17,
    #[serde(skip)]
    raw: [FourMomentum; 4],
}

impl Report for ComposeReport {
    fn table(&self) -> Table {
        let mut t = Table::new(vec!["quantity", "e", "kx", "ky", "kz"]);
        for (label, p) in ["p", "q", "p_then_q", "q_then_p"].iter().zip(&self.raw) {
            four_rows(&mut t, label, p);
        }
        t
    }
}

/// Composition of the on-shell momenta `p` and `q` in both orders.
pub fn compose_cmd(cfg: &RunConfig) -> Result<ComposeReport, CliError> {
    let ctx = context(cfg)?;
    let p = FourMomentum::on_shell(cfg.p, &ctx);
    let q = FourMomentum::on_shell(cfg.q, &ctx);
    let pq = compose(&p, &q, &ctx);
    let qp = compose(&q, &p, &ctx);
    Ok(ComposeReport {
        p: (&p).into(),
        q: (&q).into(),
        p_then_q: (&pq).into(),
        q_then_p: (&qp).into(),
        noncommutativity: Sig17((pq.k - qp.k).norm()),
        raw: [p, q, pq, qp],
    })
}

fn word_rows(t: &mut Table, label: &str, term: usize, m: &Monomial) {
    for (i, f) in m.factors.iter().enumerate() {
        t.push(vec![
            label.to_string(),
            term.to_string(),
            num(m.coeff.re),
            num(m.coeff.im),
            i.to_string(),
            f.kind.symbol().to_string(),
            num(f.e),
            num(f.k.x),
            num(f.k.y),
            num(f.k.z),
        ]);
    }
}

fn word_table() -> Table {
    Table::new(vec![
        "word", "term", "coeff_re", "coeff_im", "position", "kind", "e", "kx", "ky", "kz",
    ])
}

#[derive(Debug, Serialize)]
pub struct CircReport {
    pub kinds: String,
    pub x_circ_y: MonomialReport,
    pub y_circ_x: MonomialReport,
    pub commutator: TermSumReport,
    pub carried_momentum: FourMomentumReport,
    #[serde(skip)]
    raw: (Monomial, Monomial, Vec<Monomial>),
}

impl Report for CircReport {
    fn table(&self) -> Table {
        let mut t = word_table();
        word_rows(&mut t, "x_circ_y", 0, &self.raw.0);
        word_rows(&mut t, "y_circ_x", 0, &self.raw.1);
        for (i, m) in self.raw.2.iter().enumerate() {
            word_rows(&mut t, "commutator", i, m);
        }
        t
    }
}

/// Binary circ products of on-shell factors of the configured kinds.
pub fn circ(cfg: &RunConfig) -> Result<CircReport, CliError> {
    let ctx = context(cfg)?;
    let x = OscFactor::on_shell(cfg.kinds.0, cfg.p, &ctx);
    let y = OscFactor::on_shell(cfg.kinds.1, cfg.q, &ctx);
    let xy = circ_binary(&x, &y, &ctx);
    let yx = circ_binary(&y, &x, &ctx);
    let comm = circ_commutator(&x, &y, &ctx);
    Ok(CircReport {
        kinds: kinds_label(cfg),
        x_circ_y: xy.to_report(),
        y_circ_x: yx.to_report(),
        commutator: comm.to_report(),
        carried_momentum: (&xy.adjoint_eigenvalue(&ctx)).into(),
        raw: (xy, yx, comm.terms().to_vec()),
    })
}

#[derive(Debug, Serialize)]
pub struct FlipCmdReport {
    pub kinds: String,
    pub word: MonomialReport,
    pub flipped: FlipReport,
    pub involution_residual: Sig17,
    pub momentum_defect: Sig17,
    pub energy_defect: Sig17,
    #[serde(skip)]
    raw: (Monomial, Monomial),
}

impl Report for FlipCmdReport {
    fn table(&self) -> Table {
        let mut t = word_table();
        word_rows(&mut t, "word", 0, &self.raw.0);
        word_rows(&mut t, "flipped", 0, &self.raw.1);
        t
    }
}

/// The flip of `a^(kinds.0)(p) a^(kinds.1)(q)` with energies on the word's coupled shells.
pub fn flip(cfg: &RunConfig) -> Result<FlipCmdReport, CliError> {
    let ctx = context(cfg)?;
    let (x, y) = binary_word(cfg.kinds.0, cfg.kinds.1, cfg.p, cfg.q, &ctx)?;
    let flipped = tau_kappa_with(&x, &y, cfg.flip_table, &ctx)?;
    let residual = tau_involution_check_with(&x, &y, cfg.flip_table, &ctx)?;
    let (dk, de) = flip_conservation(&x, &y, &ctx)?;
    let word = Monomial::word(vec![x, y]);
    Ok(FlipCmdReport {
        kinds: kinds_label(cfg),
        word: word.to_report(),
        flipped: flipped.to_report(),
        involution_residual: Sig17(residual),
        momentum_defect: Sig17(dk),
        energy_defect: Sig17(de),
        raw: (word, flipped.word),
    })
}

#[derive(Debug, Serialize)]
pub struct ShellReport {
    pub kinds: String,
    pub signs: [i8; 2],
    pub p0: f64,
    pub q0: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl Report for ShellReport {
    fn table(&self) -> Table {
        let mut t = Table::new(vec!["kinds", "p0", "q0", "iterations", "residual"]);
        t.push(vec![
            self.kinds.clone(),
            num(self.p0),
            num(self.q0),
            self.iterations.to_string(),
            num(self.residual),
        ]);
        t
    }
}

pub fn solve_shells(cfg: &RunConfig) -> Result<ShellReport, CliError> {
    let ctx = context(cfg)?;
    let asg = ShellAssignment::for_kinds(cfg.kinds.0, cfg.kinds.1);
    let s = solve_coupled(&cfg.p, &cfg.q, asg, &ctx)?;
    Ok(ShellReport {
        kinds: kinds_label(cfg),
        signs: [asg.sign_p.value() as i8, asg.sign_q.value() as i8],
        p0: s.p0,
        q0: s.q0,
        iterations: s.iterations,
        residual: coupled_residual(&cfg.p, &cfg.q, asg, s.p0, s.q0, &ctx),
    })
}

#[derive(Debug, Serialize)]
pub struct ClusterRow {
    pub kappa: f64,
    pub metric: f64,
    pub grid_size: usize,
}

#[derive(Debug, Serialize)]
pub struct ClusterReport {
    pub exponent_convention: &'static str,
    pub sigma: f64,
    pub rows: Vec<ClusterRow>,
}

impl Report for ClusterReport {
    fn table(&self) -> Table {
        let mut t = Table::new(vec!["kappa", "metric", "grid_size"]);
        for r in &self.rows {
            t.push(vec![num(r.kappa), num(r.metric), r.grid_size.to_string()]);
        }
        t
    }
}

/// Factorizability metric of the smeared Gaussian-product fixture for each kappa.
pub fn cluster(cfg: &RunConfig) -> Result<ClusterReport, CliError> {
    if cfg.kappas.is_empty() {
        return Err(CliError::Usage(
            "cluster needs at least one value in `kappas`".into(),
        ));
    }
    let fixture = GaussianFixture {
        points: cfg.grid.points,
        kmax: cfg.grid.kmax,
        sigma: cfg.sigma,
        m0: cfg.m0,
    };
    let rows = cfg
        .kappas
        .iter()
        .map(|&kappa| {
            Ok(ClusterRow {
                kappa,
                metric: fixture.metric(kappa, cfg.exponent_convention)?,
                grid_size: cfg.grid.points,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(ClusterReport {
        exponent_convention: match cfg.exponent_convention {
            ExponentConvention::Half => "half",
            ExponentConvention::Full => "full",
        },
        sigma: cfg.sigma,
        rows,
    })
}

#[derive(Debug, Serialize)]
pub struct SymbolValue {
    pub symbol: &'static str,
    pub value: [Sig17; 2],
}

#[derive(Debug, Serialize)]
pub struct StarReport {
    pub star_spatial_x: [Sig17; 3],
    pub star_spatial_y: [Sig17; 3],
    pub symbols: Vec<SymbolValue>,
    pub bracket_x: [Sig17; 2],
    pub bracket_y: [Sig17; 2],
    pub circ_star: CircStarReport,
    pub moyal_phase: [Sig17; 2],
    #[serde(skip)]
    rows: Vec<(String, f64, f64)>,
}

impl Report for StarReport {
    fn table(&self) -> Table {
        let mut t = Table::new(vec!["quantity", "re", "im"]);
        for (q, re, im) in &self.rows {
            t.push(vec![q.clone(), num(*re), num(*im)]);
        }
        t
    }
}

const SYMBOLS: [(OperatorSymbol, &str); 6] = [
    (OperatorSymbol::LaplaceX, "laplace_x"),
    (OperatorSymbol::LaplaceY, "laplace_y"),
    (OperatorSymbol::ShiftY, "shift_y"),
    (OperatorSymbol::ShiftX, "shift_x"),
    (OperatorSymbol::DalembertX, "dalembert_x"),
    (OperatorSymbol::DalembertY, "dalembert_y"),
];

/// Star plane waves of `p`, `q`, their operator symbols and brackets, the
/// circ/star comparison and the Moyal phase for the configured theta.
pub fn star(cfg: &RunConfig) -> Result<StarReport, CliError> {
    let ctx = context(cfg)?;
    let theta = Theta::from_row_slice(&cfg.theta)?;
    let pair = star_planewaves(&cfg.p, &cfg.q, &ctx);
    let mut rows = Vec::new();
    let symbols = SYMBOLS
        .iter()
        .map(|(s, name)| {
            let v = s.eigenvalue(&pair, &ctx);
            rows.push((name.to_string(), v.re, v.im));
            SymbolValue {
                symbol: name,
                value: complex(v),
            }
        })
        .collect();
    let (bx, by) = bilocal_bracket_eigenvalues(&pair, cfg.massterm, &ctx);
    let cs = circ_star_equivalence(&cfg.p, &cfg.q, &ctx)?;
    let moyal = moyal_star_planewaves(&pair.p, &pair.q, &theta, &ctx);
    rows.push(("bracket_x".into(), bx.re, bx.im));
    rows.push(("bracket_y".into(), by.re, by.im));
    rows.push(("circ_star_max_deviation".into(), cs.max_deviation, 0.0));
    rows.push(("moyal_phase".into(), moyal.re, moyal.im));
    Ok(StarReport {
        star_spatial_x: kappa_core::report::vec3(&pair.star_spatial_x),
        star_spatial_y: kappa_core::report::vec3(&pair.star_spatial_y),
        symbols,
        bracket_x: complex(bx),
        bracket_y: complex(by),
        circ_star: cs.to_report(),
        moyal_phase: complex(moyal),
        rows,
    })
}
