//! The doubling iteration, its monitors, and the solve driver.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cayley::{build_ssf1, select_alpha, PairEvent, ShiftMode, ShiftSelection, SsfPair, DEFAULT_RHO};
use crate::dct;
use crate::error::{Error, Result};
use crate::matkernel::{self, CMatrix, Lu, SymmetricView};
use crate::problem::BseHamiltonian;
use crate::trirec::{self, TriState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemedyPolicy {
    /// Double-Cayley transform, three-recursion on any transform failure.
    Auto,
    /// Double-Cayley transform, three-recursion only when no ϑ is usable.
    DctFirst,
    TrirecOnly,
}

impl RemedyPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            RemedyPolicy::Auto => "auto",
            RemedyPolicy::DctFirst => "dct-first",
            RemedyPolicy::TrirecOnly => "trirec-only",
        }
    }
}

impl fmt::Display for RemedyPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RemedyPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(RemedyPolicy::Auto),
            "dct-first" => Ok(RemedyPolicy::DctFirst),
            "trirec-only" => Ok(RemedyPolicy::TrirecOnly),
            other => Err(Error::InvalidArgument(format!("unknown remedy policy '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub conv_tol: f64,
    pub max_iter: u32,
    /// `u`: probe threshold, and `1/u` bounds accepted condition numbers.
    pub breakdown_tol: f64,
    pub remedy: RemedyPolicy,
    /// Magnitude of β; its sign follows ϑ.
    pub beta: f64,
    pub kappa: f64,
    pub seed: u64,
    pub rho: f64,
    /// User shift; `None` selects it automatically.
    pub alpha: Option<f64>,
    /// Switch to the three-recursion form at this iteration even without a breakdown.
    pub force_trirec_at: Option<u32>,
    /// Rebase the three-recursion state at this iteration.
    pub force_rebase_at: Option<u32>,
    /// Apply one Newton correction to the converged `F`.
    pub refine: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            conv_tol: 1e-12,
            max_iter: 60,
            breakdown_tol: 1e-8,
            remedy: RemedyPolicy::Auto,
            beta: 1.0,
            kappa: 2.0,
            seed: 0,
            rho: DEFAULT_RHO,
            alpha: None,
            force_trirec_at: None,
            force_rebase_at: None,
            refine: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |what: &'static str, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::NonPositive { what, value })
            }
        };
        positive("conv_tol", self.conv_tol)?;
        positive("breakdown_tol", self.breakdown_tol)?;
        positive("beta", self.beta)?;
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !self.kappa.is_finite() || self.kappa < 2.0 {
            return Err(Error::InvalidArgument(format!("kappa must be at least 2, got {}", self.kappa)));
        }
        if self.breakdown_tol >= 1.0 {
            return Err(Error::InvalidArgument("breakdown_tol must be below 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Step,
    Breakdown,
    DctApplied,
    TriRecSwitch,
    ZRebase,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingEvent {
    pub k: u32,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Quadratic,
    Linear,
    Stagnated,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Quadratic => "quadratic",
            Regime::Linear => "linear",
            Regime::Stagnated => "stagnated",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    Continue,
    Stagnated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvergenceCheck {
    pub status: Status,
    pub regime: Regime,
}

const STAGNATION_RATIO: f64 = 0.99;
const STAGNATION_STEPS: usize = 5;

/// Classify a history of `‖E_k‖_F`.
///
/// Quadratic: each of the last (up to) three transitions with `e_k < 1` has
/// `ln e_{k+1} ≤ 1.5 ln e_k`. Stagnated: the last five step ratios all lie in
/// `[0.99, 1/0.99]`. Anything else counts as linear.
pub fn convergence_check(history: &[f64], conv_tol: f64) -> ConvergenceCheck {
    assert!(!history.is_empty(), "convergence history is empty");
    let ratios: Vec<f64> = history.windows(2).map(|w| w[1] / w[0]).collect();
    let stagnated = ratios.len() >= STAGNATION_STEPS
        && ratios[ratios.len() - STAGNATION_STEPS..]
            .iter()
            .all(|&r| (STAGNATION_RATIO..=1.0 / STAGNATION_RATIO).contains(&r) || r.is_nan());
    // Transitions from ‖E‖ ≥ 1 are pre-asymptotic and ignored. A final drop
    // below conv_tol by two decades is accepted since it may hit the roundoff floor.
    let tail = &history[history.len().saturating_sub(4)..];
    let asymptotic: Vec<&[f64]> = tail.windows(2).filter(|w| w[0] < 1.0).collect();
    let quadratic = !asymptotic.is_empty()
        && asymptotic.iter().all(|w| {
            w[1] == 0.0 || w[1].ln() <= 1.5 * w[0].ln() || (w[1] <= conv_tol && w[1] <= 1e-2 * w[0])
        });
    let regime = if quadratic {
        Regime::Quadratic
    } else if stagnated {
        Regime::Stagnated
    } else {
        Regime::Linear
    };
    let status = if history[history.len() - 1] <= conv_tol {
        Status::Converged
    } else if stagnated {
        Status::Stagnated
    } else {
        Status::Continue
    };
    ConvergenceCheck { status, regime }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Probe {
    Ok { ratio: f64 },
    Ill { ratio: f64 },
}

impl Probe {
    pub fn ratio(self) -> f64 {
        match self {
            Probe::Ok { ratio } | Probe::Ill { ratio } => ratio,
        }
    }

    pub fn is_ill(self) -> bool {
        matches!(self, Probe::Ill { .. })
    }
}

/// `min |σ − 1| / max |σ − 1|` over `σ(F)`, compared against `u`.
pub fn probe_singular_values(sigma: &[f64], u: f64) -> Probe {
    if sigma.iter().all(|&s| s == 0.0) {
        return Probe::Ok { ratio: 1.0 };
    }
    let dist = sigma.iter().map(|s| (s - 1.0).abs());
    let lo = dist.clone().fold(f64::INFINITY, f64::min);
    let hi = dist.fold(0.0, f64::max);
    let ratio = if hi == 0.0 { 0.0 } else { lo / hi };
    if ratio >= u {
        Probe::Ok { ratio }
    } else {
        Probe::Ill { ratio }
    }
}

pub fn breakdown_probe(pair: &SsfPair, u: f64) -> Result<Probe> {
    Ok(probe_singular_values(&matkernel::singular_values(&pair.f)?, u))
}

/// `E′ = E W E`, `F′ = F + Ē F W E` with `W = (I − F̄F)⁻¹`.
pub fn doubling_step(pair: &SsfPair, u: f64) -> Result<SsfPair> {
    let n = pair.n();
    let (e, f) = (&*pair.e, &*pair.f);
    let e_bar = matkernel::conj(e);
    let f_bar = matkernel::conj(f);
    let kernel = matkernel::identity(n) - &f_bar * f;
    let (w, cond) = matkernel::inverse_with_cond(&kernel).map_err(|_| Error::BreakdownDetected { cond: f64::INFINITY })?;
    if cond > 1.0 / u {
        return Err(Error::BreakdownDetected { cond });
    }
    let we = &w * e;
    let e_next = e * &we;
    let f_next = f + &e_bar * f * &we;
    let mut next = SsfPair::from_parts(&e_next, &f_next, pair.alpha, pair.k + 1);
    next.events = pair.events.clone();
    next.events.push(PairEvent::DoublingStep);
    Ok(next)
}

/// Where the iteration ended.
#[derive(Clone, Debug)]
pub enum FinalState {
    Pair(SsfPair),
    Tri(TriState),
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Representative `−X₂X₁⁻¹` of the stable deflating subspace.
    pub f_limit: SymmetricView,
    pub iterations: u32,
    pub events: Vec<DoublingEvent>,
    /// `‖E_k‖_F`, or `‖P_j‖_F` once in the three-recursion form.
    pub e_norm_history: Vec<f64>,
    pub converged: bool,
    pub regime: Regime,
    pub shift: ShiftSelection,
    pub warnings: Vec<String>,
    /// `‖R(F)‖_F` before and after the Newton correction, when one was accepted.
    pub refinement: Option<(f64, f64)>,
}

impl SolveReport {
    pub fn alpha(&self) -> f64 {
        self.shift.alpha
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub report: SolveReport,
    pub state: FinalState,
}

enum Mode {
    Two(SsfPair),
    Three(TriState),
}

struct Driver<'a> {
    cfg: &'a SolverConfig,
    rng: ChaCha8Rng,
    events: Vec<DoublingEvent>,
    warnings: Vec<String>,
    /// Rebases since the last successful three-recursion step.
    stalled_rebases: usize,
}

impl Driver<'_> {
    fn event(&mut self, k: u32, kind: EventKind, detail: impl Into<String>) {
        self.events.push(DoublingEvent {
            k,
            kind,
            detail: detail.into(),
        });
    }

    fn switch_to_trirec(&mut self, pair: &SsfPair, k: u32, why: &str) -> Result<TriState> {
        let scale = match matkernel::fro(&pair.f) {
            s if s > 0.0 => s,
            _ => 1.0,
        };
        let mut last = Error::ZIllConditioned;
        for attempt in 0..trirec::MAX_Z_DRAWS {
            let z = trirec::random_symmetric(pair.n(), scale, &mut self.rng);
            match trirec::init_three(pair, &z, self.cfg.breakdown_tol) {
                Ok(state) => {
                    self.event(k, EventKind::TriRecSwitch, format!("{why}; Z draw {}", attempt + 1));
                    return Ok(state);
                }
                Err(e @ Error::ZIllConditioned) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    fn rebase(&mut self, s: &TriState, k: u32, why: &str) -> Result<TriState> {
        let scale = match matkernel::fro(&s.h) {
            x if x > 0.0 => x,
            _ => 1.0,
        };
        let mut last = Error::ZIllConditioned;
        for attempt in 0..trirec::MAX_Z_DRAWS {
            let z = trirec::random_symmetric(s.n(), scale, &mut self.rng);
            match trirec::rebase_z(s, &z, self.cfg.breakdown_tol) {
                Ok(next) => {
                    self.event(k, EventKind::ZRebase, format!("{why}; Z draw {}", attempt + 1));
                    return Ok(next);
                }
                Err(e @ Error::ZIllConditioned) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    /// Handle a breakdown of the two-recursion form at iteration `k`.
    fn remedy(&mut self, pair: &SsfPair, k: u32) -> Result<Mode> {
        if self.cfg.remedy == RemedyPolicy::TrirecOnly {
            return Ok(Mode::Three(self.switch_to_trirec(pair, k, "policy trirec-only")?));
        }
        if dct::choose_theta(&pair.e)?.is_none() {
            return Ok(Mode::Three(self.switch_to_trirec(pair, k, "no usable theta")?));
        }
        match dct::apply_dct(pair, self.cfg, &mut self.rng) {
            Ok(out) => {
                self.event(
                    k,
                    EventKind::DctApplied,
                    format!(
                        "theta={} kappa={:.6} gamma={:.6e} probe ratio={:.3e}",
                        out.params.theta,
                        out.params.kappa,
                        out.params.gamma,
                        out.probe_ratio
                    ),
                );
                Ok(Mode::Two(out.pair))
            }
            Err(e) if self.cfg.remedy == RemedyPolicy::Auto => {
                self.warnings.push(format!("DCT failed at k={k} ({e}); switching to three recursions"));
                Ok(Mode::Three(self.switch_to_trirec(pair, k, "DCT failed")?))
            }
            Err(e) => Err(e),
        }
    }
}

/// `R(F) = ĀF + FA − FBF − B̄`, which vanishes when `[I; −F]` spans an
/// invariant subspace of `H`.
pub fn riccati_residual(p: &BseHamiltonian, f: &CMatrix) -> CMatrix {
    let (a, b): (&CMatrix, &CMatrix) = (p.a(), p.b());
    matkernel::conj(a) * f + f * a - f * b * f - matkernel::conj(b)
}

/// One Newton step on `R(F) = 0`: solve `KᵀΔ + ΔK = −R(F)` with `K = A − BF`
/// by diagonalizing `K`, and return the symmetric part of `F + Δ`.
pub fn newton_refine(p: &BseHamiltonian, f: &CMatrix) -> Result<SymmetricView> {
    let n = f.nrows();
    let (a, b): (&CMatrix, &CMatrix) = (p.a(), p.b());
    let k = a - b * f;
    let (lambda, v) = matkernel::eig_right(&k)?;
    let v_inv = Lu::new(&v)?.inverse();
    let rhs = matkernel::transpose(&v) * riccati_residual(p, f) * &v;
    let floor = f64::EPSILON * matkernel::fro(&k);
    let mut y = matkernel::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let d = lambda[i] + lambda[j];
            if d.norm() <= floor {
                return Err(Error::SingularMatrix { rcond: 0.0 });
            }
            y[(i, j)] = -rhs[(i, j)] / d;
        }
    }
    let delta = matkernel::transpose(&v_inv) * y * &v_inv;
    let next = f + delta;
    matkernel::check_finite(&next)?;
    Ok(SymmetricView::enforce(&next).0)
}

/// Run the doubling algorithm with remedies until `‖E_k‖_F ≤ conv_tol`.
///
/// Returns `Err(Error::NotConverged(..))` carrying the partial solution when the
/// iteration hits `max_iter`, stagnates, or diverges.
pub fn run(p: &BseHamiltonian, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    let mut driver = Driver {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        events: Vec::new(),
        warnings: Vec::new(),
        stalled_rebases: 0,
    };

    let mut shift = select_alpha(p, cfg.rho, cfg.alpha)?;
    let pair = match build_ssf1(p, shift.alpha) {
        Ok(pair) => pair,
        Err(e @ (Error::ShiftHitsSpectrum { .. } | Error::RSingular { .. })) if shift.mode == ShiftMode::User => {
            driver.warnings.push(format!("{e}; retrying with the automatic shift"));
            shift = select_alpha(p, cfg.rho, None)?;
            build_ssf1(p, shift.alpha)?
        }
        Err(e) => return Err(e),
    };

    let u = cfg.breakdown_tol;
    let mut history = vec![matkernel::fro(&pair.e)];
    let mut mode = Mode::Two(pair);
    let mut k: u32 = 0;
    let mut check = convergence_check(&history, cfg.conv_tol);

    while check.status == Status::Continue && k < cfg.max_iter {
        if !history[history.len() - 1].is_finite() {
            driver.warnings.push(format!("iteration diverged at k={k}"));
            break;
        }
        mode = match mode {
            Mode::Two(pair) if cfg.force_trirec_at == Some(k) => {
                Mode::Three(driver.switch_to_trirec(&pair, k, "forced")?)
            }
            Mode::Two(pair) => {
                let probe = breakdown_probe(&pair, u)?;
                let stepped = if probe.is_ill() {
                    Err(format!("probe ratio {:.3e} below {:.1e}", probe.ratio(), u))
                } else {
                    match doubling_step(&pair, u) {
                        Ok(next) => Ok(next),
                        Err(Error::BreakdownDetected { cond }) => {
                            Err(format!("cond(I - conj(F)F) = {cond:.3e} exceeds 1/u"))
                        }
                        Err(e) => return Err(e),
                    }
                };
                match stepped {
                    Ok(next) => {
                        k += 1;
                        driver.event(
                            k,
                            EventKind::Step,
                            format!("|E|={:.3e} |F|={:.3e}", matkernel::fro(&next.e), matkernel::fro(&next.f)),
                        );
                        history.push(matkernel::fro(&next.e));
                        Mode::Two(next)
                    }
                    Err(why) => {
                        driver.event(k, EventKind::Breakdown, why);
                        match driver.remedy(&pair, k)? {
                            Mode::Two(next) => {
                                k += 1;
                                history.push(matkernel::fro(&next.e));
                                Mode::Two(next)
                            }
                            three => three,
                        }
                    }
                }
            }
            Mode::Three(s) if cfg.force_rebase_at == Some(k) && !s.rebased_at(k) => {
                let mut next = driver.rebase(&s, k, "forced")?;
                next.mark_rebased(k);
                Mode::Three(next)
            }
            Mode::Three(s) => match trirec::three_step(&s, u) {
                Ok(next) => {
                    k += 1;
                    driver.stalled_rebases = 0;
                    driver.event(k, EventKind::Step, format!("|P|={:.3e}", matkernel::fro(&next.p)));
                    history.push(matkernel::fro(&next.p));
                    Mode::Three(next)
                }
                Err(Error::TriBreakdown { cond }) => {
                    driver.event(k, EventKind::Breakdown, format!("cond(I - G H) = {cond:.3e}"));
                    driver.stalled_rebases += 1;
                    if driver.stalled_rebases > trirec::MAX_Z_DRAWS {
                        return Err(Error::TriBreakdown { cond });
                    }
                    Mode::Three(driver.rebase(&s, k, "three-recursion breakdown")?)
                }
                Err(e) => return Err(e),
            },
        };
        check = convergence_check(&history, cfg.conv_tol);
    }

    let converged = check.status == Status::Converged;
    match check.status {
        Status::Stagnated => driver.warnings.push(format!("stagnated at k={k}")),
        Status::Continue if k >= cfg.max_iter => {
            driver.warnings.push(format!("max_iter={} reached", cfg.max_iter))
        }
        _ => {}
    }
    if check.regime == Regime::Linear && converged {
        driver
            .warnings
            .push("linear convergence: eigenvalues on or near the imaginary axis".into());
    }

    let (mut f_limit, state) = match mode {
        Mode::Two(pair) => (pair.f.clone(), FinalState::Pair(pair)),
        Mode::Three(s) => (trirec::fold_back_unchecked(&s), FinalState::Tri(s)),
    };
    let mut refinement = None;
    if converged && cfg.refine {
        let before = matkernel::fro(&riccati_residual(p, &f_limit));
        match newton_refine(p, &f_limit) {
            Ok(next) => {
                let after = matkernel::fro(&riccati_residual(p, &next));
                if after < before {
                    f_limit = next;
                    refinement = Some((before, after));
                }
            }
            Err(e) => driver.warnings.push(format!("Newton correction skipped: {e}")),
        }
    }
    let solution = Solution {
        report: SolveReport {
            f_limit,
            iterations: k,
            events: driver.events,
            e_norm_history: history,
            converged,
            regime: check.regime,
            shift,
            warnings: driver.warnings,
            refinement,
        },
        state,
    };
    if converged {
        Ok(solution)
    } else {
        Err(Error::NotConverged(Box::new(solution)))
    }
}
