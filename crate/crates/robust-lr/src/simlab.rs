//! Seeded Monte Carlo designs for the entry game and the Roy model.
//!
//! Latent variables are drawn from counter-based ChaCha8 streams: stream
//! `(grid_index << 32) | replication` of the design seed. When the model
//! predicts several outcomes, a selection mechanism picks one of them:
//! an i.i.d. Bernoulli rule, a clustered rule that depends on the realized
//! latent sequence, or direct sampling from the least-favorable pair.

use rand::{RngCore, SeedableRng};
use rand_distr::{Binomial, Distribution};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::SubsetMask;
use crate::error::{Error, Result};
use crate::lfp::{solve_program, LfpProblem, LfpSolution};
use crate::localpower::{build_expansion, efficient_influence, optimal_statistic, Cone, EnvelopeResult, L2Expansion};
use crate::model::{
    entry_game_model, entry_level_set, open_uniform, robustly_testable, roy_latent, roy_level_set, roy_model, std_normal,
    IncompleteModel,
};
use crate::normal;
use crate::testing::{exact_critical_value, fmt_f64, gaussian_critical_value, MinimaxTest, Role, EXACT_CAP};

/// Random stream for one grid point and replication.
pub fn stream_rng(seed: u64, grid_index: usize, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((grid_index as u64) << 32) | replication as u64);
    rng
}

/// Rule that picks one outcome out of a multi-valued level set.
#[derive(Debug, Clone)]
pub enum SelectionMechanism {
    /// Independent Bernoulli selection with the given probability of the first outcome.
    Iid(f64),
    /// Clustered selection driven by running level-set frequencies.
    InidCluster(ClusterTail),
    /// Outcomes drawn directly from one member of a least-favorable pair.
    LfpDraw(Role, Box<LfpSolution>),
}

impl SelectionMechanism {
    fn validate(&self) -> Result<()> {
        match self {
            SelectionMechanism::Iid(p) if !(0.0..=1.0).contains(p) => {
                Err(Error::InvalidInput("selection probability must lie in [0, 1]".into()))
            }
            _ => Ok(()),
        }
    }

    /// Short name used in output tables.
    pub fn name(&self) -> String {
        match self {
            SelectionMechanism::Iid(p) => format!("iid({p})"),
            SelectionMechanism::InidCluster(ClusterTail::Latent) => "inid_cluster".into(),
            SelectionMechanism::InidCluster(ClusterTail::LastComplete) => "inid_cluster_last_complete".into(),
            SelectionMechanism::LfpDraw(Role::Null, _) => "lfp_null".into(),
            SelectionMechanism::LfpDraw(Role::Alt, _) => "lfp_alt".into(),
        }
    }
}

/// Cluster boundaries `N*_k = 2^(2^k)` for `k = 0..=5`.
pub fn cluster_bounds() -> Vec<usize> {
    (0..6).map(|k| 1usize << (1usize << k)).collect()
}

/// How the clustered rule reads the running frequency for draws whose
/// cluster ends after the last observed draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterTail {
    /// Read `Ψ` at the cluster end `N*_k` over the latent sequence, which
    /// continues past the sample. The level-set counts of the unobserved
    /// draws are sampled from their exact binomial laws.
    #[default]
    Latent,
    /// Read `Ψ` at the end of the last cluster that fits into the sample.
    LastComplete,
}

/// Index `h(i)` at which the running frequency is read for draw `i` (1-based).
///
/// `h(i) = N*_k` for `N*_{k−1} < i <= N*_k`. Under [`ClusterTail::LastComplete`]
/// an index past `n` is replaced by the last `N*_k <= n` (or `n` when none fits).
pub fn cluster_index(i: usize, n: usize, tail: ClusterTail) -> usize {
    let bounds = cluster_bounds();
    let h = bounds.iter().copied().find(|b| i <= *b).unwrap_or(usize::MAX);
    match tail {
        ClusterTail::Latent => h,
        ClusterTail::LastComplete if h > n => bounds.iter().copied().filter(|b| *b <= n).max().unwrap_or(n),
        ClusterTail::LastComplete => h,
    }
}

/// Pair of singleton level sets whose running share drives the clustered rule.
struct ClusterRule {
    first: SubsetMask,
    second: SubsetMask,
    /// Probabilities of the two level sets, used for unobserved latent draws.
    p_first: f64,
    p_second: f64,
    threshold: f64,
    tail: ClusterTail,
}

/// Clustered selection indicators `ṽ_i = 1{Ψ_{h(i)} > threshold}`.
///
/// `Ψ_m` is the share of `first` among the level sets equal to `first` or
/// `second` in the first `m` latent draws; it counts as zero when neither
/// occurred.
fn cluster_indicators(sets: &[SubsetMask], rule: &ClusterRule, rng: &mut dyn RngCore) -> Vec<bool> {
    let n = sets.len();
    let mut num = vec![0u64; n + 1];
    let mut den = vec![0u64; n + 1];
    for (i, s) in sets.iter().enumerate() {
        num[i + 1] = num[i] + u64::from(*s == rule.first);
        den[i + 1] = den[i] + u64::from(*s == rule.first || *s == rule.second);
    }
    // Counts at the end of the cluster that straddles n, over the unobserved latent draws.
    let end = cluster_index(n.max(1), n, rule.tail);
    let (tail_num, tail_den) = if end > n {
        let m = (end - n) as u64;
        let c1 = Binomial::new(m, rule.p_first.clamp(0.0, 1.0)).map_or(0, |d| d.sample(rng));
        let rest = if rule.p_first < 1.0 { (rule.p_second / (1.0 - rule.p_first)).clamp(0.0, 1.0) } else { 0.0 };
        let c2 = Binomial::new(m - c1, rest).map_or(0, |d| d.sample(rng));
        (num[n] + c1, den[n] + c1 + c2)
    } else {
        (num[n], den[n])
    };
    (1..=n)
        .map(|i| {
            let h = cluster_index(i, n, rule.tail);
            let (a, b) = if h > n { (tail_num, tail_den) } else { (num[h], den[h]) };
            let psi = if b == 0 { 0.0 } else { a as f64 / b as f64 };
            psi > rule.threshold
        })
        .collect()
}

fn draw_pmf(q: &[f64], rng: &mut dyn RngCore) -> usize {
    let u = open_uniform(rng);
    let mut acc = 0.0;
    for (s, p) in q.iter().enumerate() {
        acc += p;
        if u < acc {
            return s;
        }
    }
    q.iter().rposition(|p| *p > 0.0).unwrap_or(q.len() - 1)
}

fn draw_lfp(role: Role, lfp: &LfpSolution, n: usize, rng: &mut dyn RngCore) -> Vec<usize> {
    let q = match role {
        Role::Null => &lfp.q0,
        Role::Alt => &lfp.q1,
    };
    (0..n).map(|_| draw_pmf(q, rng)).collect()
}

/// Entry-game outcome indices (order `(0,0), (1,1), (1,0), (0,1)`) from a given stream.
pub fn draw_entry_game_with(theta: &[f64], n: usize, mechanism: &SelectionMechanism, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
    mechanism.validate()?;
    entry_game_model().check(theta)?;
    if let SelectionMechanism::LfpDraw(role, lfp) = mechanism {
        return Ok(draw_lfp(*role, lfp, n, rng));
    }
    let sets: Vec<SubsetMask> = (0..n).map(|_| entry_level_set(theta, [std_normal(rng), std_normal(rng)])).collect();
    let multi = SubsetMask(0b1100);
    let pick: Vec<bool> = match mechanism {
        SelectionMechanism::InidCluster(tail) => {
            let (a, b) = (normal::cdf(theta[0]), normal::cdf(theta[1]));
            let threshold = (0.25 + a / 2.0 - a * b) / (0.5 + (a + b) / 2.0 - 2.0 * a * b);
            let mass = entry_game_model().mass_at(theta)?;
            let rule = ClusterRule {
                first: SubsetMask(0b0100),
                second: SubsetMask(0b1000),
                p_first: mass.mass(SubsetMask(0b0100)),
                p_second: mass.mass(SubsetMask(0b1000)),
                threshold,
                tail: *tail,
            };
            cluster_indicators(&sets, &rule, rng)
        }
        SelectionMechanism::Iid(p) => sets.iter().map(|s| *s == multi && open_uniform(rng) < *p).collect(),
        SelectionMechanism::LfpDraw(..) => unreachable!("handled above"),
    };
    Ok(sets
        .iter()
        .zip(pick)
        .map(|(s, v)| if *s == multi { if v { 2 } else { 3 } } else { s.members().next().unwrap_or(0) })
        .collect())
}

/// Entry-game outcomes from stream `(0, 0)` of `seed`.
pub fn draw_entry_game(theta: &[f64], n: usize, mechanism: &SelectionMechanism, seed: u64) -> Result<Vec<usize>> {
    draw_entry_game_with(theta, n, mechanism, &mut stream_rng(seed, 0, 0))
}

/// Roy outcome indices (order `(0,0), (0,1), (1,0), (1,1)`) from a given stream.
///
/// A selection indicator equal to one picks `(0,0)` from `{(0,0),(0,1)}` and
/// `(1,0)` from `{(1,0),(1,1)}`. The clustered rule compares the running
/// share of singleton `{(1,0)}` among singletons `{(1,0)}`, `{(1,1)}` with
/// its expectation `θ10 / (θ10 + θ01)`.
pub fn draw_roy_with(theta: &[f64], n: usize, mechanism: &SelectionMechanism, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
    mechanism.validate()?;
    roy_model().check(theta)?;
    if let SelectionMechanism::LfpDraw(role, lfp) = mechanism {
        return Ok(draw_lfp(*role, lfp, n, rng));
    }
    let sets: Vec<SubsetMask> = (0..n).map(|_| roy_level_set(roy_latent(theta, rng))).collect();
    let pick: Vec<bool> = match mechanism {
        SelectionMechanism::InidCluster(tail) => {
            let denom = theta[1] + theta[2];
            let threshold = if denom > 0.0 { theta[2] / denom } else { 0.0 };
            let mass = roy_model().mass_at(theta)?;
            let rule = ClusterRule {
                first: SubsetMask(0b0100),
                second: SubsetMask(0b1000),
                p_first: mass.mass(SubsetMask(0b0100)),
                p_second: mass.mass(SubsetMask(0b1000)),
                threshold,
                tail: *tail,
            };
            cluster_indicators(&sets, &rule, rng)
        }
        SelectionMechanism::Iid(p) => sets.iter().map(|s| s.len() > 1 && open_uniform(rng) < *p).collect(),
        SelectionMechanism::LfpDraw(..) => unreachable!("handled above"),
    };
    Ok(sets
        .iter()
        .zip(pick)
        .map(|(s, v)| match s.0 {
            0b0011 => usize::from(!v),
            0b1100 => {
                if v {
                    2
                } else {
                    3
                }
            }
            _ => s.members().next().unwrap_or(0),
        })
        .collect())
}

/// Roy outcomes from stream `(0, 0)` of `seed`.
pub fn draw_roy(theta: &[f64], n: usize, mechanism: &SelectionMechanism, seed: u64) -> Result<Vec<usize>> {
    draw_roy_with(theta, n, mechanism, &mut stream_rng(seed, 0, 0))
}

/// Runs-test statistic and decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunsResult {
    /// Standardized number of runs.
    pub z: f64,
    /// Two-sided rejection at the requested level.
    pub reject: bool,
    /// Number of runs.
    pub runs: usize,
}

/// Wald-Wolfowitz runs test on a binary sequence, two-sided at level `alpha`.
pub fn runs_test(sequence: &[bool], alpha: f64) -> Result<RunsResult> {
    let n1 = sequence.iter().filter(|b| **b).count() as f64;
    let n0 = sequence.len() as f64 - n1;
    if n1 < 2.0 || n0 < 2.0 {
        return Err(Error::DegenerateSequence);
    }
    let runs = 1 + sequence.windows(2).filter(|w| w[0] != w[1]).count();
    let n = n1 + n0;
    let mean = 2.0 * n1 * n0 / n + 1.0;
    let var = 2.0 * n1 * n0 * (2.0 * n1 * n0 - n) / (n * n * (n - 1.0));
    let z = (runs as f64 - mean) / var.sqrt();
    Ok(RunsResult { z, reject: z.abs() >= normal::upper_critical(alpha / 2.0), runs })
}

/// Binary encoding `1{s = positive}` on the subsequence of outcomes equal to `positive` or `negative`.
pub fn runs_encoding(outcomes: &[usize], positive: usize, negative: usize) -> Vec<bool> {
    outcomes.iter().filter(|s| **s == positive || **s == negative).map(|s| *s == positive).collect()
}

/// Model used by a Monte Carlo design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignModel {
    /// Two-player entry game.
    EntryGame,
    /// Roy-type selection model.
    Roy,
}

impl DesignModel {
    /// The parameterized model.
    pub fn model(self) -> IncompleteModel {
        match self {
            DesignModel::EntryGame => entry_game_model(),
            DesignModel::Roy => roy_model(),
        }
    }

    /// Outcome sequence under a mechanism.
    pub fn draw(self, theta: &[f64], n: usize, mechanism: &SelectionMechanism, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
        match self {
            DesignModel::EntryGame => draw_entry_game_with(theta, n, mechanism, rng),
            DesignModel::Roy => draw_roy_with(theta, n, mechanism, rng),
        }
    }

    /// Outcomes `(positive, negative)` whose order the runs test examines.
    pub fn runs_pair(self) -> (usize, usize) {
        (2, 3)
    }
}

/// Path of alternatives indexed by a scalar grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AltPath {
    /// `θ = θ0 + ξ + h̄·direction/√n`.
    Local { xi: Vec<f64>, direction: Vec<f64>, grid: Vec<f64> },
    /// `θ = θ0 + w·ξ`.
    Shift { xi: Vec<f64>, grid: Vec<f64> },
}

impl AltPath {
    fn grid(&self) -> &[f64] {
        match self {
            AltPath::Local { grid, .. } | AltPath::Shift { grid, .. } => grid,
        }
    }

    fn theta(&self, theta0: &[f64], value: f64, n: usize) -> Vec<f64> {
        match self {
            AltPath::Local { xi, direction, .. } => (0..theta0.len())
                .map(|i| theta0[i] + xi[i] + value * direction[i] / (n as f64).sqrt())
                .collect(),
            AltPath::Shift { xi, .. } => (0..theta0.len()).map(|i| theta0[i] + value * xi[i]).collect(),
        }
    }
}

/// Test statistic evaluated on each simulated sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StatisticSpec {
    /// Efficient statistic for `p'h` on a cone at `(θ0, ξ)`.
    Optimal { cone: Vec<Vec<f64>>, p: Vec<f64> },
    /// Minimax likelihood-ratio test against each grid alternative.
    MinimaxLr,
    /// Two-sided runs test on the selection-relevant subsequence.
    Runs,
}

impl StatisticSpec {
    fn name(&self) -> &'static str {
        match self {
            StatisticSpec::Optimal { .. } => "optimal",
            StatisticSpec::MinimaxLr => "minimax_lr",
            StatisticSpec::Runs => "runs",
        }
    }
}

/// Selection mechanism named in a design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionSpec {
    /// Bernoulli selection.
    Iid { select_prob: f64 },
    /// Clustered selection.
    InidCluster {
        /// Reading of the running frequency past the sample end.
        #[serde(default)]
        tail: ClusterTail,
    },
    /// Draws from the alternative member of the least-favorable pair at each grid point.
    Lfp,
}

/// Monte Carlo power-curve design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurveSpec {
    /// Model.
    pub model: DesignModel,
    /// Null parameter.
    pub theta0: Vec<f64>,
    /// Alternative path and grid.
    pub path: AltPath,
    /// Sample size.
    pub n: usize,
    /// Replications per grid point.
    pub reps: usize,
    /// Level.
    pub alpha: f64,
    /// Seed of the counter-based streams.
    pub seed: u64,
    /// Statistic.
    pub statistic: StatisticSpec,
    /// Selection mechanisms, one curve each.
    pub selections: Vec<SelectionSpec>,
}

/// One row of a power curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    /// Grid value `h̄` or `w`.
    pub grid_value: f64,
    /// Statistic name.
    pub statistic: String,
    /// Selection mechanism name.
    pub selection: String,
    /// Sample size.
    pub n: usize,
    /// Replications.
    pub reps: usize,
    /// Share of rejections.
    pub reject_rate: f64,
    /// Monte Carlo standard error `√(p̂(1−p̂)/reps)`.
    pub std_err: f64,
    /// Power envelope at the grid point, when defined.
    pub envelope_value: Option<f64>,
}

enum Decision {
    Optimal(EnvelopeResult),
    Lr(Option<MinimaxTest>),
    Runs,
}

impl PowerCurveSpec {
    fn validate(&self) -> Result<()> {
        let d = self.model.model().dim();
        if self.reps == 0 || self.n == 0 {
            return Err(Error::InvalidInput("n and reps must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput("alpha must lie in (0, 1)".into()));
        }
        if self.theta0.len() != d || self.selections.is_empty() {
            return Err(Error::InvalidInput("theta0 dimension or selection list is invalid".into()));
        }
        let ok = match &self.path {
            AltPath::Local { xi, direction, grid } => xi.len() == d && direction.len() == d && !grid.is_empty(),
            AltPath::Shift { xi, grid } => xi.len() == d && !grid.is_empty(),
        };
        if !ok || self.path.grid().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("alternative path does not match the model".into()));
        }
        Ok(())
    }

    fn xi(&self) -> &[f64] {
        match &self.path {
            AltPath::Local { xi, .. } | AltPath::Shift { xi, .. } => xi,
        }
    }
}

/// Expansion and efficient influence function of an optimal-statistic design.
pub fn design_envelope(spec: &PowerCurveSpec) -> Result<Option<(L2Expansion, EnvelopeResult)>> {
    match &spec.statistic {
        StatisticSpec::Optimal { cone, p } => {
            let cone = Cone::new(cone.clone())?;
            let exp = build_expansion(&spec.model.model(), &spec.theta0, spec.xi(), &cone)?;
            let env = efficient_influence(&exp, p)?;
            Ok(Some((exp, env)))
        }
        _ => Ok(None),
    }
}

/// Rejection rates along the grid for each selection mechanism.
///
/// Replications run in parallel; results are gathered by index, so the
/// output depends only on the design and its seed.
pub fn estimate_power(spec: &PowerCurveSpec) -> Result<Vec<PowerRow>> {
    spec.validate()?;
    let model = spec.model.model();
    let envelope = design_envelope(spec)?;
    let mut rows = Vec::new();
    for (gi, &value) in spec.path.grid().iter().enumerate() {
        let theta = spec.path.theta(&spec.theta0, value, spec.n);
        model.check(&theta)?;
        let pair = solve_program(&LfpProblem::new(model.mass_at(&spec.theta0)?, model.mass_at(&theta)?)?)?;
        let decision = match &spec.statistic {
            StatisticSpec::Optimal { .. } => Decision::Optimal(envelope.as_ref().expect("built above").1.clone()),
            StatisticSpec::Runs => Decision::Runs,
            StatisticSpec::MinimaxLr => {
                let testable = robustly_testable(&model, &spec.theta0, &theta)?;
                let test = if !testable {
                    None
                } else if spec.n <= EXACT_CAP {
                    Some(exact_critical_value(&pair, spec.n, spec.alpha)?)
                } else {
                    Some(gaussian_critical_value(&pair, spec.n, spec.alpha)?)
                };
                Decision::Lr(test)
            }
        };
        let env_value = match (&envelope, &spec.path) {
            (Some((exp, env)), AltPath::Local { direction, .. }) => {
                let h: Vec<f64> = direction.iter().map(|d| d * value).collect();
                Some(env.envelope(exp, &h, spec.alpha))
            }
            _ => None,
        };
        for sel in &spec.selections {
            let mechanism = match sel {
                SelectionSpec::Iid { select_prob } => SelectionMechanism::Iid(*select_prob),
                SelectionSpec::InidCluster { tail } => SelectionMechanism::InidCluster(*tail),
                SelectionSpec::Lfp => SelectionMechanism::LfpDraw(Role::Alt, Box::new(pair.clone())),
            };
            mechanism.validate()?;
            let outcomes = (0..spec.reps)
                .into_par_iter()
                .map(|rep| -> Result<bool> {
                    let mut rng = stream_rng(spec.seed, gi, rep);
                    let sample = spec.model.draw(&theta, spec.n, &mechanism, &mut rng)?;
                    decide(&decision, spec, &sample, &mut rng)
                })
                .collect::<Result<Vec<bool>>>()?;
            let hits = outcomes.iter().filter(|b| **b).count();
            let p = hits as f64 / spec.reps as f64;
            rows.push(PowerRow {
                grid_value: value,
                statistic: spec.statistic.name().into(),
                selection: match sel {
                    SelectionSpec::Lfp => "lfp".into(),
                    _ => mechanism.name(),
                },
                n: spec.n,
                reps: spec.reps,
                reject_rate: p,
                std_err: (p * (1.0 - p) / spec.reps as f64).sqrt(),
                envelope_value: env_value,
            });
        }
    }
    Ok(rows)
}

fn decide(decision: &Decision, spec: &PowerCurveSpec, sample: &[usize], rng: &mut dyn RngCore) -> Result<bool> {
    match decision {
        Decision::Optimal(env) => Ok(optimal_statistic(env, sample, spec.alpha)?.1),
        Decision::Lr(Some(test)) => Ok(test.reject(sample, open_uniform(rng))),
        // Without a robustly testable pair the minimax test is the trivial level-α coin.
        Decision::Lr(None) => Ok(open_uniform(rng) < spec.alpha),
        Decision::Runs => {
            let (a, b) = spec.model.runs_pair();
            match runs_test(&runs_encoding(sample, a, b), spec.alpha) {
                Ok(r) => Ok(r.reject),
                Err(Error::DegenerateSequence) => Ok(false),
                Err(e) => Err(e),
            }
        }
    }
}

/// Power rows as CSV with header
/// `grid_value,statistic,selection,n,reps,reject_rate,std_err,envelope_value`, floats to 17 significant digits.
pub fn write_power_csv<W: std::io::Write>(rows: &[PowerRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Config(format!("CSV output failed: {e}"));
    w.write_record(["grid_value", "statistic", "selection", "n", "reps", "reject_rate", "std_err", "envelope_value"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.grid_value),
            r.statistic.clone(),
            r.selection.clone(),
            r.n.to_string(),
            r.reps.to_string(),
            fmt_f64(r.reject_rate),
            fmt_f64(r.std_err),
            r.envelope_value.map_or(String::new(), fmt_f64),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Config(format!("CSV output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfp::solve_lfp;

    fn freq(xs: &[usize], s: usize) -> f64 {
        xs.iter().filter(|x| **x == s).count() as f64 / xs.len() as f64
    }

    fn within(p_hat: f64, p: f64, n: usize) -> bool {
        (p_hat - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn complete_entry_game_is_uniform() {
        let n = 100_000;
        for mech in [SelectionMechanism::Iid(0.5), SelectionMechanism::InidCluster(ClusterTail::Latent)] {
            let xs = draw_entry_game(&[0.0, 0.0], n, &mech, 11).unwrap();
            for s in 0..4 {
                assert!(within(freq(&xs, s), 0.25, n));
            }
        }
    }

    #[test]
    fn entry_iid_selection_frequency() {
        let n = 1_000_000;
        let xs = draw_entry_game(&[-1.0, -1.0], n, &SelectionMechanism::Iid(0.5), 3).unwrap();
        assert!(within(freq(&xs, 2), 0.3624144, n), "{}", freq(&xs, 2));
    }

    #[test]
    fn roy_iid_selection_frequency() {
        let n = 1_000_000;
        let xs = draw_roy(&[1.0 / 6.0, 0.5, 1.0 / 6.0], n, &SelectionMechanism::Iid(0.5), 5).unwrap();
        assert!(within(freq(&xs, 2), 0.25, n), "{}", freq(&xs, 2));
    }

    #[test]
    fn roy_complete_boundary_ignores_selection() {
        let theta = [0.0, 0.5, 0.5];
        let a = draw_roy(&theta, 1000, &SelectionMechanism::Iid(0.0), 9).unwrap();
        let b = draw_roy(&theta, 1000, &SelectionMechanism::Iid(1.0), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lfp_draws_follow_the_pair() {
        let model = roy_model();
        let lfp = solve_lfp(
            &LfpProblem::new(model.mass_at(&[0.2, 0.5, 0.1]).unwrap(), model.mass_at(&[0.2, 0.25, 0.4]).unwrap()).unwrap(),
        )
        .unwrap();
        let n = 200_000;
        for role in [Role::Null, Role::Alt] {
            let q = if role == Role::Null { lfp.q0.clone() } else { lfp.q1.clone() };
            let xs = draw_roy(&[0.2, 0.25, 0.4], n, &SelectionMechanism::LfpDraw(role, Box::new(lfp.clone())), 1).unwrap();
            for s in 0..4 {
                assert!(within(freq(&xs, s), q[s], n));
            }
        }
    }

    #[test]
    fn runs_test_cases() {
        let alt: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
        let r = runs_test(&alt, 0.05).unwrap();
        assert!(r.reject && r.z > 9.0 && r.runs == 100);
        assert_eq!(runs_test(&[true, false, true], 0.05).unwrap_err(), Error::DegenerateSequence);
        let reps = 10_000;
        let mut hits = 0;
        for rep in 0..reps {
            let mut rng = stream_rng(77, 0, rep);
            let seq: Vec<bool> = (0..200).map(|_| rng.next_u32() & 1 == 1).collect();
            hits += usize::from(runs_test(&seq, 0.05).unwrap().reject);
        }
        let rate = hits as f64 / reps as f64;
        assert!(within(rate, 0.05, reps), "{rate}");
    }

    #[test]
    fn cluster_indices() {
        let last = ClusterTail::LastComplete;
        assert_eq!(cluster_index(1, 1000, last), 2);
        assert_eq!(cluster_index(3, 1000, last), 4);
        assert_eq!(cluster_index(16, 1000, last), 16);
        assert_eq!(cluster_index(17, 1000, last), 256);
        assert_eq!(cluster_index(257, 1000, last), 256);
        assert_eq!(cluster_index(1, 1, last), 1);
        assert_eq!(cluster_index(257, 1000, ClusterTail::Latent), 65536);
        assert_eq!(cluster_index(1, 1, ClusterTail::Latent), 2);
    }

    #[test]
    fn power_curves_are_reproducible() {
        let spec = PowerCurveSpec {
            model: DesignModel::EntryGame,
            theta0: vec![0.0, 0.0],
            path: AltPath::Local { xi: vec![0.0, 0.0], direction: vec![-1.0, -1.0], grid: vec![0.0, 1.0] },
            n: 200,
            reps: 200,
            alpha: 0.05,
            seed: 42,
            statistic: StatisticSpec::Optimal { cone: vec![vec![-1.0, -1.0]], p: vec![-1.0, -1.0] },
            selections: vec![SelectionSpec::Iid { select_prob: 0.5 }, SelectionSpec::Lfp],
        };
        let a = estimate_power(&spec).unwrap();
        let b = estimate_power(&spec).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_power_csv(&a, &mut ca).unwrap();
        write_power_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        assert!(String::from_utf8(ca).unwrap().starts_with("grid_value,statistic,selection,n,reps,reject_rate,std_err,envelope_value"));
        assert!((a[0].envelope_value.unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let reps = 2000;
        let means: Vec<(f64, f64)> = (0..reps)
            .map(|r| {
                let mut a = stream_rng(5, 0, r);
                let mut b = stream_rng(5, 1, r);
                (std_normal(&mut a), std_normal(&mut b))
            })
            .collect();
        let corr = means.iter().map(|(a, b)| a * b).sum::<f64>() / reps as f64;
        assert!(corr.abs() < 4.0 / (reps as f64).sqrt());
    }

    #[test]
    fn exact_lr_test_has_size_alpha_under_null_pair() {
        let model = entry_game_model();
        let t1 = [-1.0, -1.0];
        let lfp = solve_lfp(&LfpProblem::new(model.mass_at(&[0.0, 0.0]).unwrap(), model.mass_at(&t1).unwrap()).unwrap()).unwrap();
        let test = exact_critical_value(&lfp, 20, 0.05).unwrap();
        let reps = 20_000;
        let mech = SelectionMechanism::LfpDraw(Role::Null, Box::new(lfp.clone()));
        let hits: usize = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(8, 0, r);
                let xs = draw_entry_game_with(&[0.0, 0.0], 20, &mech, &mut rng).unwrap();
                usize::from(test.reject(&xs, open_uniform(&mut rng)))
            })
            .sum();
        assert!(within(hits as f64 / reps as f64, 0.05, reps));
    }
}
