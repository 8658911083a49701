//! Constructions that move limits between scales and stack several limits
//! at different scales inside one permutation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ceil_tol, floor_tol};
use crate::perm::Permutation;
use crate::scaling::{self, solve_c, solve_d, Domination, ScalingFunction, N_MIN};
use crate::sequence::{
    box_pair_term, pad_then, ComponentSequence, FillerRule, PermutationSequence,
};

pub const DEFAULT_LENGTH_CAP: u64 = 10_000_000;

fn check_len(len: usize) -> Result<f64> {
    let u = len as f64;
    if u < N_MIN {
        return Err(Error::invalid_argument(format!(
            "component length {len} is below {N_MIN}"
        )));
    }
    Ok(u)
}

fn to_count(x: f64) -> Result<u64> {
    if x.is_finite() && x < u64::MAX as f64 {
        Ok(x.max(1.0) as u64)
    } else {
        Err(Error::invalid_argument(format!(
            "factor {x} is out of range"
        )))
    }
}

/// `c = ⌈C(u)⌉` (at least 1) for a scale-down from `f` to `f_down`.
pub fn scale_down_factor(f: &ScalingFunction, f_down: &ScalingFunction, u: f64) -> Result<u64> {
    to_count(ceil_tol(solve_c(f, f_down, u)?))
}

/// `d = ⌈D(u)⌉` (at least 1) for a scale-up from `f` to `f_up`.
pub fn scale_up_factor(f: &ScalingFunction, f_up: &ScalingFunction, u: f64) -> Result<u64> {
    to_count(ceil_tol(solve_d(f, f_up, u)?))
}

/// `⊕^c σ`: what `σ` shows at scale `f` the result shows at `f_down ≪ f`.
pub fn scale_down_step(
    sigma: &Permutation,
    f: &ScalingFunction,
    f_down: &ScalingFunction,
) -> Result<(Permutation, u64)> {
    let c = scale_down_factor(f, f_down, check_len(sigma.len())?)?;
    Ok((sigma.direct_sum_power(c as usize)?, c))
}

/// `σ[φ]` with `|φ| = d`: what `σ` shows at scale `f` the result shows at `f_up ≫ f`.
pub fn scale_up_step(
    sigma: &Permutation,
    f: &ScalingFunction,
    f_up: &ScalingFunction,
    filler: FillerRule,
) -> Result<(Permutation, u64)> {
    let d = scale_up_factor(f, f_up, check_len(sigma.len())?)?;
    let phi = filler.fill(d as usize).expect("d ≥ 1");
    Ok((sigma.substitute(&phi), d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleStep {
    Down {
        from: ScalingFunction,
        to: ScalingFunction,
    },
    Up {
        from: ScalingFunction,
        to: ScalingFunction,
        filler: FillerRule,
    },
}

// Terms shorter than N_MIN say nothing about a limit and pass through unchanged.
impl ScaleStep {
    fn factor(&self, len: u64) -> Result<u64> {
        if (len as f64) < N_MIN {
            return Ok(1);
        }
        let u = len as f64;
        match self {
            ScaleStep::Down { from, to } => scale_down_factor(from, to, u),
            ScaleStep::Up { from, to, .. } => scale_up_factor(from, to, u),
        }
    }

    fn apply(&self, sigma: &Permutation) -> Result<Permutation> {
        if (sigma.len() as f64) < N_MIN {
            return Ok(sigma.clone());
        }
        Ok(match self {
            ScaleStep::Down { from, to } => scale_down_step(sigma, from, to)?.0,
            ScaleStep::Up { from, to, filler } => scale_up_step(sigma, from, to, *filler)?.0,
        })
    }
}

/// A sequence converging at one scale, rewritten term by term to converge at another.
#[derive(Debug, Clone)]
pub struct RetargetedSequence<S> {
    inner: S,
    steps: Vec<ScaleStep>,
}

impl<S> RetargetedSequence<S> {
    pub fn steps(&self) -> &[ScaleStep] {
        &self.steps
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<S: PermutationSequence> PermutationSequence for RetargetedSequence<S> {
    fn term_len(&self, j: u64) -> Result<u64> {
        let mut len = self.inner.term_len(j)?;
        for step in &self.steps {
            len = len
                .checked_mul(step.factor(len)?)
                .ok_or_else(|| Error::invalid_argument(format!("term {j} is too long")))?;
        }
        Ok(len)
    }

    fn term(&self, j: u64) -> Result<Permutation> {
        let mut sigma = self.inner.term(j)?;
        for step in &self.steps {
            sigma = step.apply(&sigma)?;
        }
        Ok(sigma)
    }
}

/// Moves a sequence converging at scale `g` to one converging at scale `f`.
///
/// Equivalent but unequal scales go down to `√min(g, f)` and back up to `f`.
pub fn retarget_scale<S: PermutationSequence>(
    seq: S,
    g: &ScalingFunction,
    f: &ScalingFunction,
    filler: FillerRule,
) -> Result<RetargetedSequence<S>> {
    for s in [g, f] {
        if !s.is_proper() {
            return Err(Error::invalid_argument(format!(
                "{s} is not a proper scaling function"
            )));
        }
    }
    let steps = match f.dominates(g) {
        Domination::Dominated => vec![ScaleStep::Down { from: *g, to: *f }],
        Domination::Dominates => vec![ScaleStep::Up {
            from: *g,
            to: *f,
            filler,
        }],
        Domination::Equivalent if f == g => Vec::new(),
        Domination::Equivalent => {
            let h = g.min_growth(f).geometric_mean(&ScalingFunction::constant());
            vec![
                ScaleStep::Down { from: *g, to: h },
                ScaleStep::Up {
                    from: h,
                    to: *f,
                    filler,
                },
            ]
        }
    };
    Ok(RetargetedSequence { inner: seq, steps })
}

/// How a length-`ℓ` term is cut into `ψ ⊕ ⊕^c σ_j[φ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PaddingPlan {
    pub index: u64,
    /// `u = |σ_j|`.
    pub unit: u64,
    pub copies: u64,
    pub inflation: u64,
    pub padding: u64,
}

/// Largest `j` whose term length satisfies `fits`, assuming lengths grow with `j`.
fn last_fitting<S, P>(seq: &S, fits: P) -> Result<Option<(u64, u64)>>
where
    S: PermutationSequence + ?Sized,
    P: Fn(u64) -> bool,
{
    if !fits(seq.term_len(1)?) {
        return Ok(None);
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while fits(seq.term_len(hi)?) {
        lo = hi;
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::invalid_argument("sequence lengths do not grow"))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(seq.term_len(mid)?) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((lo, seq.term_len(lo)?)))
}

/// The decomposition used by [`every_length`]; `None` when `ℓ` is too short
/// for any term and the filler is used instead.
pub fn every_length_plan<S>(seq: &S, f: &ScalingFunction, ell: u64) -> Result<Option<PaddingPlan>>
where
    S: PermutationSequence + ?Sized,
{
    if ell == 0 {
        return Err(Error::invalid_argument("length must be positive"));
    }
    let l = ell as f64;
    if l < N_MIN {
        return Ok(None);
    }
    let fl = f.eval(l);
    // L(u) = f⁻¹(u²) ≤ ℓ exactly when u² ≤ f(ℓ)
    let Some((index, unit)) = last_fitting(seq, |u| (u as f64).powi(2) <= fl)? else {
        return Ok(None);
    };
    let u = unit as f64;
    if u < N_MIN {
        return Ok(None);
    }
    let fu = f.eval(u);
    let inflation = floor_tol(fl / fu) as u64;
    let mut copies = floor_tol((l / fl) * (fu / u)) as u64;
    while copies > 0 && copies as u128 * inflation as u128 * unit as u128 > ell as u128 {
        copies -= 1;
    }
    if copies == 0 || inflation == 0 {
        return Ok(None);
    }
    Ok(Some(PaddingPlan {
        index,
        unit,
        copies,
        inflation,
        padding: ell - copies * inflation * unit,
    }))
}

/// A permutation of length exactly `ℓ` built from a sequence converging at
/// scale `f`, so that sequences indexed by every length converge there too.
pub fn every_length<S>(
    seq: &S,
    f: &ScalingFunction,
    ell: u64,
    filler: FillerRule,
) -> Result<Permutation>
where
    S: PermutationSequence + ?Sized,
{
    match every_length_plan(seq, f, ell)? {
        None => Ok(filler.fill(ell as usize).expect("ℓ ≥ 1")),
        Some(plan) => {
            let phi = filler.fill(plan.inflation as usize).expect("d ≥ 1");
            let body = seq
                .term(plan.index)?
                .substitute(&phi)
                .direct_sum_power(plan.copies as usize)?;
            Ok(pad_then(filler.fill(plan.padding as usize), body))
        }
    }
}

/// The decomposition used by [`every_length_local`].
pub fn every_length_local_plan<S>(seq: &S, ell: u64) -> Result<Option<PaddingPlan>>
where
    S: PermutationSequence + ?Sized,
{
    if ell == 0 {
        return Err(Error::invalid_argument("length must be positive"));
    }
    let Some((index, unit)) = last_fitting(seq, |u| (u as u128).pow(2) <= ell as u128)? else {
        return Ok(None);
    };
    let copies = ell / unit;
    Ok(Some(PaddingPlan {
        index,
        unit,
        copies,
        inflation: 1,
        padding: ell - copies * unit,
    }))
}

/// `ψ ⊕ ⊕^c σ_j` of length exactly `ℓ`, preserving local limits.
pub fn every_length_local<S>(seq: &S, ell: u64, filler: FillerRule) -> Result<Permutation>
where
    S: PermutationSequence + ?Sized,
{
    match every_length_local_plan(seq, ell)? {
        None => Ok(filler.fill(ell as usize).expect("ℓ ≥ 1")),
        Some(plan) => {
            let body = seq
                .term(plan.index)?
                .direct_sum_power(plan.copies as usize)?;
            Ok(pad_then(filler.fill(plan.padding as usize), body))
        }
    }
}

/// `σ_j ⊡ τ_j⁻¹`: vertical blocks are copies of `σ_j`, blocks of the inverse copies of `τ_j`.
pub fn box_pair<A, B>(sigma_seq: &A, tau_seq: &B, j: u64) -> Result<Permutation>
where
    A: PermutationSequence + ?Sized,
    B: PermutationSequence + ?Sized,
{
    Ok(box_pair_term(&sigma_seq.term(j)?, &tau_seq.term(j)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTarget {
    pub scale: ScalingFunction,
    pub component: ComponentSequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub length_cap: u64,
    /// Evaluate the gaps at `max(N_m, base_length)` instead of at `N_m`.
    pub base_length: Option<u64>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            length_cap: DEFAULT_LENGTH_CAP,
            base_length: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    /// `"global"`, `"local"`, or `"target t"` for the `t`-th input target.
    pub source: String,
    pub scale: ScalingFunction,
    pub h: ScalingFunction,
    /// `g_ℓ = h_ℓ / h_{ℓ+1}` at the base length.
    pub gap: f64,
    #[serde(rename = "M")]
    pub multiplicity: u64,
    /// `h_ℓ(N) / Π_{r ≥ ℓ} M^r`.
    pub h_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<Permutation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyReport {
    pub m: usize,
    #[serde(rename = "N_m")]
    pub threshold: u64,
    /// The length at which the gaps are evaluated.
    #[serde(rename = "N")]
    pub base_length: u64,
    pub levels: Vec<LevelReport>,
    #[serde(rename = "n_m")]
    pub total_length: u128,
    pub length_cap: u64,
    pub materialized: bool,
}

impl AssemblyReport {
    pub fn multiplicities(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.multiplicity).collect()
    }

    pub fn exceeds_cap(&self) -> bool {
        self.total_length > self.length_cap as u128
    }
}

struct Level<'a> {
    source: String,
    scale: ScalingFunction,
    component: &'a ComponentSequence,
}

fn sorted_targets(targets: &[ScaleTarget], m: usize) -> Result<Vec<(usize, &ScaleTarget)>> {
    if m == 0 || m > targets.len() {
        return Err(Error::invalid_argument(format!(
            "m = {m} must lie in 1..={}",
            targets.len()
        )));
    }
    let mut chosen: Vec<(usize, &ScaleTarget)> = targets[..m].iter().enumerate().collect();
    chosen.sort_by(|a, b| match a.1.scale.dominates(&b.1.scale) {
        Domination::Dominates => std::cmp::Ordering::Less,
        Domination::Dominated => std::cmp::Ordering::Greater,
        Domination::Equivalent => std::cmp::Ordering::Equal,
    });
    Ok(chosen)
}

fn plan_levels(levels: &[Level<'_>], m: usize, opts: AssemblyOptions) -> Result<AssemblyReport> {
    let scales: Vec<ScalingFunction> = levels[1..=m].iter().map(|l| l.scale).collect();
    let threshold = scaling::find_threshold_n(&scales, m as u64)?;
    let base = threshold.max(opts.base_length.unwrap_or(0));
    let n = base as f64;
    let mut hs = vec![ScalingFunction::linear()];
    hs.extend(scaling::intermediate_scales(&scales)?);
    hs.push(ScalingFunction::constant());
    let gaps: Vec<f64> = (0..=m + 1)
        .map(|l| hs[l].eval(n) / hs[l + 1].eval(n))
        .collect();
    let mults: Vec<u64> = gaps
        .iter()
        .map(|&g| to_count(ceil_tol(g)))
        .collect::<Result<_>>()?;
    let mut suffix = vec![1u128; m + 3];
    for l in (0..=m + 1).rev() {
        suffix[l] = suffix[l + 1].saturating_mul(mults[l] as u128);
    }
    let reports = levels
        .iter()
        .enumerate()
        .map(|(l, level)| LevelReport {
            level: l,
            source: level.source.clone(),
            scale: level.scale,
            h: hs[l],
            gap: gaps[l],
            multiplicity: mults[l],
            h_ratio: hs[l].eval(n) / suffix[l] as f64,
            term: None,
        })
        .collect();
    Ok(AssemblyReport {
        m,
        threshold,
        base_length: base,
        levels: reports,
        total_length: suffix[0],
        length_cap: opts.length_cap,
        materialized: false,
    })
}

fn materialize(
    levels: &[Level<'_>],
    mut report: AssemblyReport,
) -> Result<(Permutation, AssemblyReport)> {
    if report.exceeds_cap() {
        return Err(Error::LengthCapExceeded {
            required: report.total_length,
            cap: report.length_cap,
        });
    }
    let mut terms = Vec::with_capacity(levels.len());
    for (level, rec) in levels.iter().zip(&report.levels) {
        let term = level.component.term(rec.multiplicity)?;
        if term.len() as u64 != rec.multiplicity {
            return Err(Error::invalid_argument(format!(
                "component for level {} returned length {} instead of {}",
                rec.level,
                term.len(),
                rec.multiplicity
            )));
        }
        terms.push(term);
    }
    let mut tau = terms[0].clone();
    for t in &terms[1..] {
        tau = tau.substitute(t);
    }
    for (rec, term) in report.levels.iter_mut().zip(terms) {
        rec.term = Some(term);
    }
    report.materialized = true;
    Ok((tau, report))
}

fn multi_scale_levels<'a>(
    targets: &'a [ScaleTarget],
    global: &'a ComponentSequence,
    local: &'a ComponentSequence,
    m: usize,
) -> Result<Vec<Level<'a>>> {
    let mut levels = vec![Level {
        source: "global".into(),
        scale: ScalingFunction::linear(),
        component: global,
    }];
    for (t, target) in sorted_targets(targets, m)? {
        levels.push(Level {
            source: format!("target {t}"),
            scale: target.scale,
            component: &target.component,
        });
    }
    levels.push(Level {
        source: "local".into(),
        scale: ScalingFunction::constant(),
        component: local,
    });
    Ok(levels)
}

/// Sizes of the multi-scale assembly without building it.
pub fn multi_scale_plan(
    targets: &[ScaleTarget],
    global: &ComponentSequence,
    local: &ComponentSequence,
    m: usize,
    opts: AssemblyOptions,
) -> Result<AssemblyReport> {
    plan_levels(&multi_scale_levels(targets, global, local, m)?, m, opts)
}

/// `λ_0[λ_1]…[λ_{m+1}]`: the global component at the top level, the targets
/// in order of decreasing scale, and the local component at the bottom,
/// level `ℓ` contributing a term of length `M^ℓ = ⌈h_ℓ(N)/h_{ℓ+1}(N)⌉`.
pub fn multi_scale_assemble(
    targets: &[ScaleTarget],
    global: &ComponentSequence,
    local: &ComponentSequence,
    m: usize,
    opts: AssemblyOptions,
) -> Result<(Permutation, AssemblyReport)> {
    let levels = multi_scale_levels(targets, global, local, m)?;
    let report = plan_levels(&levels, m, opts)?;
    materialize(&levels, report)
}

/// Middle and local components of the two-direction assembly.
fn paired_components(
    targets_fwd: &[ScaleTarget],
    targets_inv: &[ScaleTarget],
    local_fwd: &ComponentSequence,
    local_inv: &ComponentSequence,
    m: usize,
    filler: FillerRule,
) -> Result<(Vec<ScaleTarget>, ComponentSequence)> {
    let fwd = sorted_targets(targets_fwd, m)?;
    let inv = sorted_targets(targets_inv, m)?;
    let mut paired = Vec::with_capacity(m);
    for ((_, a), (_, b)) in fwd.iter().zip(&inv) {
        if a.scale != b.scale {
            return Err(Error::invalid_argument(format!(
                "forward and inverse targets must share scales, got {} and {}",
                a.scale, b.scale
            )));
        }
        paired.push(ScaleTarget {
            scale: a.scale,
            component: ComponentSequence::BoxPair {
                forward: Box::new(a.component.clone()),
                inverse: Box::new(b.component.clone()),
                filler,
            },
        });
    }
    let local = ComponentSequence::BoxPair {
        forward: Box::new(local_fwd.clone()),
        inverse: Box::new(local_inv.clone()),
        filler,
    };
    Ok((paired, local))
}

#[derive(Debug, Clone, Copy)]
pub struct TwoDirectionInputs<'a> {
    pub targets_fwd: &'a [ScaleTarget],
    pub targets_inv: &'a [ScaleTarget],
    pub global: &'a ComponentSequence,
    pub local_fwd: &'a ComponentSequence,
    pub local_inv: &'a ComponentSequence,
    pub filler: FillerRule,
}

pub fn two_direction_plan(
    inputs: TwoDirectionInputs<'_>,
    m: usize,
    opts: AssemblyOptions,
) -> Result<AssemblyReport> {
    let (paired, local) = paired_components(
        inputs.targets_fwd,
        inputs.targets_inv,
        inputs.local_fwd,
        inputs.local_inv,
        m,
        inputs.filler,
    )?;
    multi_scale_plan(&paired, inputs.global, &local, m, opts)
}

/// The multi-scale assembly with box-pair components in the middle and local
/// levels, so that the output and its inverse carry the forward and inverse
/// targets respectively.
pub fn two_direction_assemble(
    inputs: TwoDirectionInputs<'_>,
    m: usize,
    opts: AssemblyOptions,
) -> Result<(Permutation, AssemblyReport)> {
    let (paired, local) = paired_components(
        inputs.targets_fwd,
        inputs.targets_inv,
        inputs.local_fwd,
        inputs.local_inv,
        m,
        inputs.filler,
    )?;
    multi_scale_assemble(&paired, inputs.global, &local, m, opts)
}

fn default_cap() -> u64 {
    DEFAULT_LENGTH_CAP
}

/// JSON description of an assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructionDescriptor {
    MultiScale {
        m: usize,
        targets: Vec<ScaleTarget>,
        global: ComponentSequence,
        local: ComponentSequence,
        #[serde(default)]
        filler: FillerRule,
        #[serde(default = "default_cap")]
        length_cap: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base_length: Option<u64>,
    },
    TwoDirection {
        m: usize,
        targets_fwd: Vec<ScaleTarget>,
        targets_inv: Vec<ScaleTarget>,
        global: ComponentSequence,
        local_fwd: ComponentSequence,
        local_inv: ComponentSequence,
        #[serde(default)]
        filler: FillerRule,
        #[serde(default = "default_cap")]
        length_cap: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base_length: Option<u64>,
    },
}

impl ConstructionDescriptor {
    pub fn m(&self) -> usize {
        match self {
            ConstructionDescriptor::MultiScale { m, .. }
            | ConstructionDescriptor::TwoDirection { m, .. } => *m,
        }
    }

    pub fn with_m(&self, new_m: usize) -> Self {
        let mut d = self.clone();
        match &mut d {
            ConstructionDescriptor::MultiScale { m, .. }
            | ConstructionDescriptor::TwoDirection { m, .. } => *m = new_m,
        }
        d
    }

    pub fn length_cap(&self) -> u64 {
        match self {
            ConstructionDescriptor::MultiScale { length_cap, .. }
            | ConstructionDescriptor::TwoDirection { length_cap, .. } => *length_cap,
        }
    }

    pub fn set_length_cap(&mut self, cap: u64) {
        match self {
            ConstructionDescriptor::MultiScale { length_cap, .. }
            | ConstructionDescriptor::TwoDirection { length_cap, .. } => *length_cap = cap,
        }
    }

    fn options(&self) -> AssemblyOptions {
        match self {
            ConstructionDescriptor::MultiScale {
                length_cap,
                base_length,
                ..
            }
            | ConstructionDescriptor::TwoDirection {
                length_cap,
                base_length,
                ..
            } => AssemblyOptions {
                length_cap: *length_cap,
                base_length: *base_length,
            },
        }
    }

    fn two_direction_inputs(&self) -> Option<TwoDirectionInputs<'_>> {
        match self {
            ConstructionDescriptor::TwoDirection {
                targets_fwd,
                targets_inv,
                global,
                local_fwd,
                local_inv,
                filler,
                ..
            } => Some(TwoDirectionInputs {
                targets_fwd,
                targets_inv,
                global,
                local_fwd,
                local_inv,
                filler: *filler,
            }),
            ConstructionDescriptor::MultiScale { .. } => None,
        }
    }

    pub fn plan(&self) -> Result<AssemblyReport> {
        match self {
            ConstructionDescriptor::MultiScale {
                m,
                targets,
                global,
                local,
                ..
            } => multi_scale_plan(targets, global, local, *m, self.options()),
            ConstructionDescriptor::TwoDirection { m, .. } => two_direction_plan(
                self.two_direction_inputs().expect("two-direction"),
                *m,
                self.options(),
            ),
        }
    }

    pub fn build(&self) -> Result<(Permutation, AssemblyReport)> {
        match self {
            ConstructionDescriptor::MultiScale {
                m,
                targets,
                global,
                local,
                ..
            } => multi_scale_assemble(targets, global, local, *m, self.options()),
            ConstructionDescriptor::TwoDirection { m, .. } => two_direction_assemble(
                self.two_direction_inputs().expect("two-direction"),
                *m,
                self.options(),
            ),
        }
    }
}
