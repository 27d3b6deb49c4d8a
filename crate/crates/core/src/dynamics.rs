//! Admissible dynamics and numerical checks.
//!
//! Every cell carries one real state. A sampled [`AdmissibleFunctionSpec`]
//! defines, for a cell `c` of type `i`,
//!
//! ```text
//! f_c(x) = a_i(x_c) + sum over inputs d of  m_cd * h_{i,type(d)}(x_c, x_d)
//! ```
//!
//! The sum is evaluated canonically. Inputs are grouped by (sender type,
//! sender state), their integer weights are added exactly, zero totals are
//! dropped and the remaining groups are summed in a fixed order. The
//! result is a function of the multiset of inputs only, so reordering
//! inputs, merging same-state inputs or deleting zero-weight inputs leaves
//! it bitwise unchanged. This is what makes the locality, subsystem and
//! quotient checks exact in floating point.

use crate::connectivity::{cumulative_in_k, in_reachability};
use crate::monoid::{MonoidKind, TypeId};
use crate::network::Network;
use crate::partition::Partition;
use crate::synchrony::{quotient_network, BalancedCertificate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// States with a magnitude above this abort a trial.
pub const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("dynamics need integer-add weights, found {0}")]
    UnsupportedMonoid(String),
    #[error("state has {found} entries, network has {expected} cells")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("initial state is not finite")]
    NonFiniteInitial,
    #[error("state of cell {cell} reached {value} at step {step}")]
    NumericalBlowup { step: usize, cell: usize, value: f64 },
    #[error("function spec covers {spec} types, network uses {network}")]
    TypeCountMismatch { spec: u32, network: u32 },
    #[error("invalid integrator settings: {0}")]
    InvalidIntegrator(String),
}

/// A real state per cell.
pub type State = Vec<f64>;

/// Self map `a(x) = linear*x + sum_i poly[i]*tanh(x)^i + amp*sin(freq*x + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMap {
    pub linear: f64,
    pub poly: [f64; 4],
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
}

impl SelfMap {
    pub fn eval(&self, x: f64) -> f64 {
        let t = x.tanh();
        let p = self.poly[0] + t * (self.poly[1] + t * (self.poly[2] + t * self.poly[3]));
        self.linear * x + p + self.amp * (self.freq * x + self.phase).sin()
    }

    pub fn identity() -> Self {
        SelfMap {
            linear: 1.0,
            poly: [0.0; 4],
            amp: 0.0,
            freq: 0.0,
            phase: 0.0,
        }
    }
}

/// Coupling kernel
/// `g(x, y) = sum_{i+j<=2} poly[i][j]*tanh(x)^i*tanh(y)^j + amp*sin(freq*y + mix*x + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    pub poly: [[f64; 3]; 3],
    pub amp: f64,
    pub freq: f64,
    pub mix: f64,
    pub phase: f64,
}

impl Coupling {
    fn kernel(&self, x: f64, y: f64) -> f64 {
        let (tx, ty) = (x.tanh(), y.tanh());
        let mut acc = 0.0;
        let mut px = 1.0;
        for i in 0..3 {
            let mut py = 1.0;
            for j in 0..3 - i {
                acc += self.poly[i][j] * px * py;
                py *= ty;
            }
            px *= tx;
        }
        acc + self.amp * (self.freq * y + self.mix * x + self.phase).sin()
    }

    pub fn zero() -> Self {
        Coupling {
            poly: [[0.0; 3]; 3],
            amp: 0.0,
            freq: 0.0,
            mix: 0.0,
            phase: 0.0,
        }
    }
}

/// One input of a cell: who sends, with what weight, in which state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Input {
    pub sender_type: TypeId,
    pub weight: i64,
    pub state: f64,
}

/// A reproducible member of the admissible family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleFunctionSpec {
    pub seed: u64,
    pub exo: bool,
    num_types: u32,
    self_maps: Vec<SelfMap>,
    couplings: Vec<Coupling>,
}

impl AdmissibleFunctionSpec {
    /// Explicit construction. `couplings` is row-major over
    /// `(receiver type, sender type)`.
    pub fn from_parts(self_maps: Vec<SelfMap>, couplings: Vec<Coupling>, exo: bool) -> Self {
        let n = self_maps.len();
        assert_eq!(couplings.len(), n * n, "one coupling per type pair");
        AdmissibleFunctionSpec {
            seed: 0,
            exo,
            num_types: n as u32,
            self_maps,
            couplings,
        }
    }

    /// Random coefficients for `num_types` types.
    pub fn random(num_types: u32, seed: u64, exo: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = |scale: f64| rng.gen_range(-scale..scale);
        let self_maps = (0..num_types)
            .map(|_| SelfMap {
                linear: 0.0,
                poly: [u(1.0), u(1.0), u(0.5), u(0.5)],
                amp: u(1.0),
                freq: 0.5 + u(1.0).abs() * 1.5,
                phase: u(std::f64::consts::PI),
            })
            .collect();
        let couplings = (0..num_types * num_types)
            .map(|_| {
                let mut poly = [[0.0; 3]; 3];
                for (i, row) in poly.iter_mut().enumerate() {
                    for cell in row.iter_mut().take(3 - i) {
                        *cell = u(1.0);
                    }
                }
                Coupling {
                    poly,
                    amp: u(1.0),
                    freq: 0.5 + u(1.0).abs() * 1.5,
                    mix: u(1.0),
                    phase: u(std::f64::consts::PI),
                }
            })
            .collect();
        AdmissibleFunctionSpec {
            seed,
            exo,
            num_types,
            self_maps,
            couplings,
        }
    }

    pub fn num_types(&self) -> u32 {
        self.num_types
    }

    pub fn self_map(&self, t: TypeId) -> &SelfMap {
        &self.self_maps[t as usize - 1]
    }

    fn coupling(&self, receiver: TypeId, sender: TypeId) -> &Coupling {
        &self.couplings[(receiver as usize - 1) * self.num_types as usize + sender as usize - 1]
    }

    /// The coupling `h` between a receiver and a sender type. In the exo
    /// family `h(x, x) = 0` exactly.
    pub fn coupling_value(&self, receiver: TypeId, sender: TypeId, x: f64, y: f64) -> f64 {
        let g = self.coupling(receiver, sender);
        if self.exo {
            g.kernel(x, y) - g.kernel(x, x)
        } else {
            g.kernel(x, y)
        }
    }

    /// Keep only the listed types, renumbered in the order given.
    pub fn restrict(&self, old_types: &[TypeId]) -> Self {
        let self_maps = old_types.iter().map(|&t| self.self_map(t).clone()).collect();
        let couplings = old_types
            .iter()
            .flat_map(|&r| old_types.iter().map(move |&s| (r, s)))
            .map(|(r, s)| self.coupling(r, s).clone())
            .collect();
        AdmissibleFunctionSpec {
            seed: self.seed,
            exo: self.exo,
            num_types: old_types.len() as u32,
            self_maps,
            couplings,
        }
    }

    /// Value of the component for a cell of `cell_type` in state `x` with
    /// the given inputs, evaluated in canonical order.
    pub fn oracle_component(&self, cell_type: TypeId, x: f64, inputs: &[Input]) -> f64 {
        let mut sorted: Vec<Input> = inputs.to_vec();
        sorted.sort_by(|a, b| {
            a.sender_type
                .cmp(&b.sender_type)
                .then(a.state.total_cmp(&b.state))
        });
        let mut acc = self.self_map(cell_type).eval(x);
        let mut i = 0;
        while i < sorted.len() {
            let head = sorted[i];
            let mut weight: i64 = 0;
            while i < sorted.len()
                && sorted[i].sender_type == head.sender_type
                && sorted[i].state.to_bits() == head.state.to_bits()
            {
                weight += sorted[i].weight;
                i += 1;
            }
            if weight != 0 {
                acc += weight as f64 * self.coupling_value(cell_type, head.sender_type, x, head.state);
            }
        }
        acc
    }

    /// The full vector field of `net` at `x`.
    pub fn apply(&self, net: &Network, x: &[f64]) -> State {
        let mut inputs = Vec::with_capacity(net.len());
        (0..net.len())
            .map(|c| {
                inputs.clear();
                for (d, &w) in net.row(c).iter().enumerate() {
                    if w != 0 {
                        inputs.push(Input {
                            sender_type: net.cell_type(d),
                            weight: w,
                            state: x[d],
                        });
                    }
                }
                self.oracle_component(net.cell_type(c), x[c], &inputs)
            })
            .collect()
    }
}

fn check_integer_weights(net: &Network) -> Result<(), DynamicsError> {
    match net.monoids().homogeneous_kind() {
        Some(MonoidKind::IntegerAdd) => Ok(()),
        Some(kind) => Err(DynamicsError::UnsupportedMonoid(kind.name().into())),
        None => Err(DynamicsError::UnsupportedMonoid("mixed monoids".into())),
    }
}

/// Sample an admissible function for `net`, reproducible from `seed`.
pub fn sample_admissible(
    net: &Network,
    seed: u64,
    exo: bool,
) -> Result<AdmissibleFunctionSpec, DynamicsError> {
    check_integer_weights(net)?;
    Ok(AdmissibleFunctionSpec::random(net.num_types(), seed, exo))
}

/// Time stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Integrator {
    /// `x(n+1) = f(x(n))`.
    Discrete { steps: usize },
    /// Classical fourth-order Runge-Kutta for `dx/dt = f(x)` with a fixed step.
    Rk4 { step: f64, horizon: f64 },
}

impl Integrator {
    pub fn discrete(steps: usize) -> Self {
        Integrator::Discrete { steps }
    }

    pub fn rk4(step: f64, horizon: f64) -> Self {
        Integrator::Rk4 { step, horizon }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Integrator::Discrete { .. })
    }

    fn steps(&self) -> Result<usize, DynamicsError> {
        match *self {
            Integrator::Discrete { steps } => Ok(steps),
            Integrator::Rk4 { step, horizon } => {
                if !(step > 0.0 && step.is_finite() && horizon >= 0.0 && horizon.is_finite()) {
                    return Err(DynamicsError::InvalidIntegrator(format!(
                        "step {step}, horizon {horizon}"
                    )));
                }
                Ok((horizon / step).round() as usize)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub integrator: Integrator,
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

fn guard(step: usize, x: &[f64]) -> Result<(), DynamicsError> {
    match x
        .iter()
        .position(|v| !v.is_finite() || v.abs() > OVERFLOW_GUARD)
    {
        Some(cell) => Err(DynamicsError::NumericalBlowup {
            step,
            cell,
            value: x[cell],
        }),
        None => Ok(()),
    }
}

fn rk4_step(net: &Network, spec: &AdmissibleFunctionSpec, x: &[f64], h: f64) -> State {
    let shifted = |base: &[f64], k: &[f64], s: f64| -> State {
        base.iter().zip(k).map(|(b, k)| b + s * k).collect()
    };
    let k1 = spec.apply(net, x);
    let k2 = spec.apply(net, &shifted(x, &k1, h / 2.0));
    let k3 = spec.apply(net, &shifted(x, &k2, h / 2.0));
    let k4 = spec.apply(net, &shifted(x, &k3, h));
    (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrate from `x0`.
pub fn evolve(
    net: &Network,
    spec: &AdmissibleFunctionSpec,
    x0: &[f64],
    integrator: Integrator,
) -> Result<Trajectory, DynamicsError> {
    check_integer_weights(net)?;
    if x0.len() != net.len() {
        return Err(DynamicsError::DimensionMismatch {
            expected: net.len(),
            found: x0.len(),
        });
    }
    if spec.num_types() < net.num_types() {
        return Err(DynamicsError::TypeCountMismatch {
            spec: spec.num_types(),
            network: net.num_types(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFiniteInitial);
    }
    guard(0, x0)?;
    let steps = integrator.steps()?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x0.to_vec());
    for n in 1..=steps {
        let x = states.last().expect("nonempty");
        let next = match integrator {
            Integrator::Discrete { .. } => spec.apply(net, x),
            Integrator::Rk4 { step, .. } => rk4_step(net, spec, x, step),
        };
        guard(n, &next)?;
        times.push(match integrator {
            Integrator::Discrete { .. } => n as f64,
            Integrator::Rk4 { step, .. } => n as f64 * step,
        });
        states.push(next);
    }
    Ok(Trajectory {
        integrator,
        times,
        states,
    })
}

/// `P * xbar`: the state where every cell takes its color's value.
pub fn lift(a: &Partition, xbar: &[f64]) -> State {
    a.assignment().iter().map(|&k| xbar[k]).collect()
}

/// Whether `x` is constant on every color of `a`.
pub fn in_polydiagonal(x: &[f64], a: &Partition) -> bool {
    spread(x, a) == 0.0
}

/// Largest difference between two cells of the same color.
pub fn spread(x: &[f64], a: &Partition) -> f64 {
    let mut lo = vec![f64::INFINITY; a.rank()];
    let mut hi = vec![f64::NEG_INFINITY; a.rank()];
    for (c, &v) in x.iter().enumerate() {
        let k = a.color_of(c);
        lo[k] = lo[k].min(v);
        hi[k] = hi[k].max(v);
    }
    lo.iter()
        .zip(&hi)
        .map(|(l, h)| h - l)
        .fold(0.0, f64::max)
}

/// Settings shared by the numerical checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckOptions {
    pub trials: usize,
    pub integrator: Integrator,
    pub tol: f64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            trials: 10,
            integrator: Integrator::discrete(100),
            tol: 1e-9,
            seed: 0,
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn random_state(rng: &mut ChaCha8Rng, len: usize) -> State {
    (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub spreads: Vec<f64>,
    pub max_spread: f64,
    pub aborted_trials: usize,
    pub tol: f64,
    pub invariant: bool,
}

/// Start on the polydiagonal of `a` and measure how far trajectories leave it.
pub fn check_invariance(
    net: &Network,
    spec: &AdmissibleFunctionSpec,
    a: &Partition,
    options: &CheckOptions,
) -> Result<InvarianceReport, DynamicsError> {
    check_integer_weights(net)?;
    let outcomes: Vec<Option<f64>> = (0..options.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(options.seed, t);
            let x0 = lift(a, &random_state(&mut rng, a.rank()));
            evolve(net, spec, &x0, options.integrator).ok().map(|traj| {
                traj.states
                    .iter()
                    .map(|x| spread(x, a))
                    .fold(0.0, f64::max)
            })
        })
        .collect();
    let spreads: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let max_spread = spreads.iter().copied().fold(0.0, f64::max);
    Ok(InvarianceReport {
        aborted_trials: outcomes.len() - spreads.len(),
        max_spread,
        tol: options.tol,
        invariant: max_spread <= options.tol,
        spreads,
    })
}

/// Outcome of trying to show that a partition is not invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Falsification {
    /// Some sampled function moved states off the polydiagonal.
    Falsified { seed: u64, spread: f64 },
    /// Nothing exceeded the threshold; this is not evidence of invariance.
    Inconclusive { max_spread: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FalsificationOptions {
    pub seeds: u64,
    pub initial_conditions: usize,
    pub steps: usize,
    pub threshold: f64,
    pub exo: bool,
}

impl Default for FalsificationOptions {
    fn default() -> Self {
        FalsificationOptions {
            seeds: 20,
            initial_conditions: 10,
            steps: 100,
            threshold: 1e-3,
            exo: false,
        }
    }
}

/// Search sampled functions for one under which `a` is not invariant.
pub fn falsify_invariance(
    net: &Network,
    a: &Partition,
    options: &FalsificationOptions,
) -> Result<Falsification, DynamicsError> {
    let mut best: f64 = 0.0;
    for seed in 0..options.seeds {
        let spec = sample_admissible(net, seed, options.exo)?;
        let report = check_invariance(
            net,
            &spec,
            a,
            &CheckOptions {
                trials: options.initial_conditions,
                integrator: Integrator::discrete(options.steps),
                tol: options.threshold,
                seed: seed.wrapping_add(0x5EED),
            },
        )?;
        if report.max_spread > options.threshold {
            return Ok(Falsification::Falsified {
                seed,
                spread: report.max_spread,
            });
        }
        best = best.max(report.max_spread);
    }
    Ok(Falsification::Inconclusive { max_spread: best })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalityMismatch {
    pub trial: usize,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityReport {
    pub cell: usize,
    pub k: usize,
    pub neighborhood: Vec<usize>,
    pub mismatches: Vec<LocalityMismatch>,
    pub passed: bool,
}

/// Perturb only cells farther than `k` steps upstream of `c` and confirm
/// the first `k + 1` states of `c` do not change at all.
pub fn check_locality(
    net: &Network,
    spec: &AdmissibleFunctionSpec,
    c: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<LocalityReport, DynamicsError> {
    let near = cumulative_in_k(net, c, k).map_err(|_| DynamicsError::DimensionMismatch {
        expected: net.len(),
        found: c,
    })?;
    let mut mismatches = Vec::new();
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let x0 = random_state(&mut rng, net.len());
        let mut x1 = x0.clone();
        for (d, v) in x1.iter_mut().enumerate() {
            if !near.contains(&d) {
                *v += rng.gen_range(0.1..1.0);
            }
        }
        let a = evolve(net, spec, &x0, Integrator::discrete(k))?;
        let b = evolve(net, spec, &x1, Integrator::discrete(k))?;
        for step in 0..=k {
            if a.states[step][c].to_bits() != b.states[step][c].to_bits() {
                mismatches.push(LocalityMismatch { trial: t, step });
                break;
            }
        }
    }
    Ok(LocalityReport {
        cell: c,
        k,
        neighborhood: near.into_iter().collect(),
        passed: mismatches.is_empty(),
        mismatches,
    })
}

/// First step at which perturbing cell `d` changes the state of cell `c`.
pub fn first_divergence(
    net: &Network,
    spec: &AdmissibleFunctionSpec,
    c: usize,
    d: usize,
    steps: usize,
    seed: u64,
) -> Result<Option<usize>, DynamicsError> {
    let mut rng = trial_rng(seed, 0);
    let x0 = random_state(&mut rng, net.len());
    let mut x1 = x0.clone();
    x1[d] += rng.gen_range(0.1..1.0);
    let a = evolve(net, spec, &x0, Integrator::discrete(steps))?;
    let b = evolve(net, spec, &x1, Integrator::discrete(steps))?;
    Ok((0..=steps).find(|&n| a.states[n][c].to_bits() != b.states[n][c].to_bits()))
}

/// Agreement between two families of trajectories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub trials: usize,
    pub aborted_trials: usize,
    pub max_difference: f64,
    pub bitwise_equal: bool,
    pub passed: bool,
}

fn compare(
    pairs: Vec<Option<(Vec<State>, Vec<State>)>>,
    integrator: Integrator,
    tol: f64,
) -> ComparisonReport {
    let mut max_difference: f64 = 0.0;
    let mut bitwise_equal = true;
    let mut aborted = 0;
    for pair in &pairs {
        let Some((left, right)) = pair else {
            aborted += 1;
            continue;
        };
        for (x, y) in left.iter().zip(right) {
            for (a, b) in x.iter().zip(y) {
                bitwise_equal &= a.to_bits() == b.to_bits();
                max_difference = max_difference.max((a - b).abs());
            }
        }
    }
    let passed = aborted == 0
        && if integrator.is_discrete() {
            bitwise_equal
        } else {
            max_difference <= tol
        };
    ComparisonReport {
        trials: pairs.len(),
        aborted_trials: aborted,
        max_difference,
        bitwise_equal,
        passed,
    }
}

/// Compare the full network restricted to the upstream cells of `c` with
/// the subnetwork induced on those cells.
pub fn check_subsystem(
    net: &Network,
    spec: &AdmissibleFunctionSpec,
    c: usize,
    options: &CheckOptions,
) -> Result<ComparisonReport, DynamicsError> {
    let cells: Vec<usize> = in_reachability(net, c)
        .map_err(|_| DynamicsError::DimensionMismatch {
            expected: net.len(),
            found: c,
        })?
        .into_iter()
        .collect();
    let (sub, type_map) = net.induced_subnetwork(&cells);
    let sub_spec = spec.restrict(&type_map);
    let pairs = (0..options.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(options.seed, t);
            let x0 = random_state(&mut rng, net.len());
            let y0: State = cells.iter().map(|&d| x0[d]).collect();
            let full = evolve(net, spec, &x0, options.integrator).ok()?;
            let part = evolve(&sub, &sub_spec, &y0, options.integrator).ok()?;
            let restricted = full
                .states
                .iter()
                .map(|x| cells.iter().map(|&d| x[d]).collect())
                .collect();
            Some((restricted, part.states))
        })
        .collect();
    Ok(compare(pairs, options.integrator, options.tol))
}

/// Compare the network started on the polydiagonal with the lifted
/// trajectory of the quotient network.
pub fn check_quotient_consistency(
    net: &Network,
    spec: &AdmissibleFunctionSpec,
    bp: &BalancedCertificate,
    options: &CheckOptions,
) -> Result<ComparisonReport, DynamicsError> {
    check_integer_weights(net)?;
    let a = bp.partition();
    let quotient = quotient_network(net, bp);
    let pairs = (0..options.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(options.seed, t);
            let xbar = random_state(&mut rng, a.rank());
            let full = evolve(net, spec, &lift(a, &xbar), options.integrator).ok()?;
            let small = evolve(&quotient, spec, &xbar, options.integrator).ok()?;
            let lifted = small.states.iter().map(|y| lift(a, y)).collect();
            Some((full.states, lifted))
        })
        .collect();
    Ok(compare(pairs, options.integrator, options.tol))
}
