//! DC operating point of the power delivery network.
//!
//! The mesh from [`crate::mesh`] is a linear resistive network. Sources and
//! regulator outputs are ideal voltage pins handled by elimination: their
//! nodes drop out of the unknown set and appear on the right-hand side.
//! Loads are constant current draws, so every injection is known before the
//! solve — regulator staging needs no fixed-point iteration, just one pass in
//! chain order to total up output currents.
//!
//! Each connected island with at least one pinned node yields a symmetric
//! positive-definite reduced system `G v = i`, solved by Jacobi-preconditioned
//! conjugate gradients with a defect-correction polish. Islands with no pins
//! and no injections (signal copper) are left unsolved; an injection with no
//! pin to supply it is an error, not a silent zero.
//!
//! The solver is single-threaded and performs reductions in fixed order, so
//! results are bit-identical from run to run.

use std::collections::HashMap;

use serde::Serialize;

use crate::board::{Board, NetKind};
use crate::mesh::ConductanceGraph;

/// Relative residual target for the iterative solve. The defect-correction
/// polish usually lands well below this; the KCL figure in the result is the
/// genuinely achieved residual.
pub const SOLVE_REL_TOL: f64 = 1e-13;

/// Solver failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("pin reference `{0}` does not resolve to a pad on the board")]
    AttachmentUnresolved(String),
    #[error("pin reference `{pin}` resolves to `{feature}`, which the mesh has no pad node for")]
    NotAPad { pin: String, feature: String },
    #[error("node for `{0}` is pinned to two different voltages")]
    PinnedConflict(String),
    #[error("island on net `{net}` carries {injection_a} A of load but has no source to supply it")]
    SingularIsland { net: String, injection_a: f64 },
    #[error("conjugate gradient failed to converge on island {island} (relative residual {residual:.3e})")]
    ConvergenceFailure { island: usize, residual: f64 },
    #[error("test point `{0}` sits on an island the solver did not solve")]
    TestPointUnsolved(String),
    #[error("load `{0}` attaches to an unsolved island")]
    LoadUnsolved(String),
}

/// What kind of pinned terminal a flow was measured at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PinKind {
    Source,
    SourceReturn,
    RegulatorOutput,
}

/// Net current delivered into the copper at a pinned node (amperes; positive
/// means the terminal is sourcing).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinFlow {
    pub label: String,
    pub kind: PinKind,
    #[serde(skip)]
    pub node: usize,
    pub amps: f64,
}

/// Operating state of one regulator after the solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegulatorState {
    pub ref_des: String,
    pub input_net: String,
    pub output_net: String,
    pub output_current_a: f64,
    pub input_current_a: f64,
    /// Solved voltage at the input pin, when its island was solved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_voltage_v: Option<f64>,
    /// Minimum input voltage for regulation: set point plus dropout.
    pub required_input_v: f64,
    /// False when the input sags below `required_input_v` — the solver still
    /// pins the output (a warning-level finding, not an abort).
    pub dropout_ok: bool,
}

/// Solved node voltages plus bookkeeping for checks and reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Voltage per graph node; meaningful only where `solved` is true.
    pub voltages: Vec<f64>,
    /// Whether the node's island was solved.
    pub solved: Vec<bool>,
    /// Island id per node.
    pub island_of: Vec<usize>,
    pub island_count: usize,
    /// Flows at every pinned terminal.
    pub pin_flows: Vec<PinFlow>,
    pub regulators: Vec<RegulatorState>,
    /// Total current delivered by the board's true sources (A).
    pub total_source_current_a: f64,
    /// Worst Kirchhoff residual over all solved, unpinned nodes (A).
    pub kcl_residual_max_a: f64,
    /// Conjugate-gradient iterations spent, summed over islands.
    pub cg_iterations: usize,
}

impl SolveResult {
    /// Voltage at a node, if its island was solved.
    pub fn voltage(&self, node: usize) -> Option<f64> {
        self.solved[node].then(|| self.voltages[node])
    }
}

/// Voltage margin of an actual voltage over a minimum: `(volts, percent)`.
///
/// ```
/// use pib::solve::voltage_margin;
/// let (v, pct) = voltage_margin(10.5, 11.032);
/// assert!((v - 0.532).abs() < 1e-12);
/// assert!((pct - 5.0667).abs() < 0.001);
/// ```
pub fn voltage_margin(min_v: f64, actual_v: f64) -> (f64, f64) {
    let margin = actual_v - min_v;
    (margin, 100.0 * margin / min_v)
}

/// One row of the per-load voltage report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadReport {
    pub id: String,
    pub ref_des: String,
    pub pass: bool,
    pub load_current_a: f64,
    pub min_voltage_v: f64,
    pub actual_voltage_v: f64,
    pub margin_v: f64,
    pub margin_pct: f64,
    pub min_power_pin: String,
    pub min_power_pin_v: f64,
    pub max_ground_pin: String,
    pub max_ground_pin_v: f64,
    pub actual_current_a: f64,
}

/// Outcome classes for a test point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestPointKind {
    Pass,
    Fail,
    /// The rail's regulator (or one upstream) is out of dropout, so the
    /// expected voltage is not trustworthy regardless of the solved value.
    DropoutViolation,
}

/// Comparison of one test point against the solved board.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestPointFinding {
    pub name: String,
    pub net: String,
    pub pin: String,
    pub expected_v: f64,
    pub tolerance_v: f64,
    pub solved_v: f64,
    pub kind: TestPointKind,
    pub pass: bool,
}

/// Resolve a pin reference to its mesh node.
fn pin_node(board: &Board, graph: &ConductanceGraph, pin: &str) -> Result<usize, SolveError> {
    let resolved = board
        .resolve_pin(pin)
        .ok_or_else(|| SolveError::AttachmentUnresolved(pin.to_string()))?;
    graph
        .pad_nodes
        .get(&resolved.feature.id)
        .copied()
        .ok_or_else(|| SolveError::NotAPad {
            pin: pin.to_string(),
            feature: resolved.feature.id.clone(),
        })
}

/// Output current each regulator must deliver: loads on its output net plus
/// input currents of regulators fed from it. One sweep per chain level.
fn regulator_output_currents(board: &Board) -> HashMap<String, f64> {
    // Resolve nets once.
    let mut reg_nets: Vec<(usize, String, String)> = Vec::new(); // idx, in, out
    for (idx, reg) in board.regulators.iter().enumerate() {
        let input = board.resolve_pin(&reg.input_pin).map(|r| r.feature.net.clone());
        let output = board.resolve_pin(&reg.output_pin).map(|r| r.feature.net.clone());
        if let (Some(input), Some(output)) = (input, output) {
            reg_nets.push((idx, input, output));
        }
    }
    let mut load_on_net: HashMap<&str, f64> = HashMap::new();
    for load in &board.loads {
        if let Some(resolved) = board.resolve_pin(&load.power_pin) {
            *load_on_net.entry(resolved.feature.net.as_str()).or_insert(0.0) += load.current;
        }
    }
    let mut out: HashMap<String, f64> = HashMap::new();
    // The chain depth is bounded by the regulator count (validated acyclic).
    for _ in 0..=board.regulators.len() {
        for (idx, _, output) in &reg_nets {
            let reg = &board.regulators[*idx];
            let direct = load_on_net.get(output.as_str()).copied().unwrap_or(0.0);
            let nested: f64 = reg_nets
                .iter()
                .filter(|(_, input, _)| input == output)
                .map(|(di, _, _)| {
                    let down = &board.regulators[*di];
                    out.get(&down.ref_des).copied().unwrap_or(0.0) + down.quiescent_current
                })
                .sum();
            out.insert(reg.ref_des.clone(), direct + nested);
        }
    }
    out
}

/// Solve the DC operating point of the meshed board.
pub fn solve_dc(board: &Board, graph: &ConductanceGraph) -> Result<SolveResult, SolveError> {
    let n = graph.nodes.len();
    let adjacency = graph.adjacency();
    let (island_of, island_count) = graph.islands();

    // Known output current per regulator, before any voltage is solved.
    let reg_out = regulator_output_currents(board);

    // Pinned voltages and current injections.
    let mut pinned: Vec<Option<f64>> = vec![None; n];
    let mut pin_labels: Vec<(String, PinKind, usize)> = Vec::new();
    let mut injections = vec![0.0f64; n];

    let mut pin_to = |node: usize,
                      volts: f64,
                      label: String,
                      kind: PinKind,
                      pinned: &mut Vec<Option<f64>>,
                      pin_labels: &mut Vec<(String, PinKind, usize)>|
     -> Result<(), SolveError> {
        match pinned[node] {
            Some(existing) if (existing - volts).abs() > 1e-12 => {
                Err(SolveError::PinnedConflict(label))
            }
            _ => {
                pinned[node] = Some(volts);
                pin_labels.push((label, kind, node));
                Ok(())
            }
        }
    };

    for source in &board.sources {
        let node = pin_node(board, graph, &source.pin)?;
        pin_to(node, source.voltage, source.pin.clone(), PinKind::Source, &mut pinned, &mut pin_labels)?;
        if let Some(ret) = board.source_return_pin(source) {
            let rnode = graph.pad_nodes.get(&ret.feature.id).copied().ok_or_else(|| {
                SolveError::NotAPad { pin: ret.label.to_string(), feature: ret.feature.id.clone() }
            })?;
            pin_to(
                rnode,
                0.0,
                format!("{} return", source.pin),
                PinKind::SourceReturn,
                &mut pinned,
                &mut pin_labels,
            )?;
        }
    }

    for load in &board.loads {
        let power = pin_node(board, graph, &load.power_pin)?;
        let ground = pin_node(board, graph, &load.ground_pin)?;
        injections[power] -= load.current;
        injections[ground] += load.current;
    }

    let mut regulator_states = Vec::with_capacity(board.regulators.len());
    for reg in &board.regulators {
        let input = pin_node(board, graph, &reg.input_pin)?;
        let output = pin_node(board, graph, &reg.output_pin)?;
        let ground = pin_node(board, graph, &reg.ground_pin)?;
        let i_out = reg_out.get(&reg.ref_des).copied().unwrap_or(0.0);
        let i_in = i_out + reg.quiescent_current;
        injections[input] -= i_in;
        injections[ground] += reg.quiescent_current;
        pin_to(
            output,
            reg.set_voltage,
            format!("{} output", reg.ref_des),
            PinKind::RegulatorOutput,
            &mut pinned,
            &mut pin_labels,
        )?;
        regulator_states.push(RegulatorState {
            ref_des: reg.ref_des.clone(),
            input_net: graph.nets[graph.nodes[input].net].clone(),
            output_net: graph.nets[graph.nodes[output].net].clone(),
            output_current_a: i_out,
            input_current_a: i_in,
            input_voltage_v: None,
            required_input_v: reg.set_voltage + reg.dropout,
            dropout_ok: true,
        });
    }

    // Group nodes by island, in node order for determinism.
    let mut island_nodes: Vec<Vec<usize>> = vec![Vec::new(); island_count];
    for node in 0..n {
        island_nodes[island_of[node]].push(node);
    }

    let mut voltages = vec![0.0f64; n];
    let mut solved = vec![false; n];
    let mut cg_iterations = 0usize;

    for (island, nodes) in island_nodes.iter().enumerate() {
        let has_pin = nodes.iter().any(|&k| pinned[k].is_some());
        if !has_pin {
            let injected: f64 = nodes.iter().map(|&k| injections[k]).sum();
            let worst = nodes.iter().map(|&k| injections[k].abs()).fold(0.0, f64::max);
            if worst > 0.0 {
                let net = graph.nets[graph.nodes[nodes[0]].net].clone();
                return Err(SolveError::SingularIsland { net, injection_a: injected });
            }
            continue; // dead copper: leave unsolved
        }

        // Local system over unpinned nodes.
        let unknowns: Vec<usize> = nodes.iter().copied().filter(|&k| pinned[k].is_none()).collect();
        let local: HashMap<usize, usize> =
            unknowns.iter().enumerate().map(|(l, &k)| (k, l)).collect();
        let m = unknowns.len();
        let mut diag = vec![0.0f64; m];
        let mut rhs = vec![0.0f64; m];
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (l, &k) in unknowns.iter().enumerate() {
            rhs[l] = injections[k];
            for &(nbr, g) in &adjacency[k] {
                diag[l] += g;
                match pinned[nbr] {
                    Some(v) => rhs[l] += g * v,
                    None => adj[l].push((local[&nbr], g)),
                }
            }
        }

        let mut x = vec![0.0f64; m];
        if m > 0 {
            let target = {
                let b_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
                (SOLVE_REL_TOL * b_norm).max(1e-300)
            };
            let mut residual = f64::INFINITY;
            for _round in 0..4 {
                // Defect correction: solve A d = b - A x, fold d into x.
                let mut r = residual_vec(&diag, &adj, &x, &rhs);
                residual = norm(&r);
                if residual <= target {
                    break;
                }
                let (d, iters) = conjugate_gradient(&diag, &adj, &mut r, target);
                cg_iterations += iters;
                for (xi, di) in x.iter_mut().zip(&d) {
                    *xi += di;
                }
            }
            let r = residual_vec(&diag, &adj, &x, &rhs);
            residual = norm(&r);
            let b_norm = norm(&rhs).max(1e-300);
            if residual > 1e-9 * b_norm {
                return Err(SolveError::ConvergenceFailure { island, residual: residual / b_norm });
            }
        }

        for (l, &k) in unknowns.iter().enumerate() {
            voltages[k] = x[l];
        }
        for &k in nodes {
            if let Some(v) = pinned[k] {
                voltages[k] = v;
            }
            solved[k] = true;
        }
    }

    // Flows at pinned terminals and the worst KCL residual elsewhere.
    let mut pin_flows = Vec::with_capacity(pin_labels.len());
    for (label, kind, node) in &pin_labels {
        let mut flow = 0.0;
        for &(nbr, g) in &adjacency[*node] {
            flow += g * (voltages[*node] - voltages[nbr]);
        }
        // Any injection at a pinned node is absorbed by the terminal.
        flow -= injections[*node];
        pin_flows.push(PinFlow { label: label.clone(), kind: *kind, node: *node, amps: flow });
    }
    let total_source_current_a = pin_flows
        .iter()
        .filter(|f| f.kind == PinKind::Source)
        .map(|f| f.amps)
        .sum();

    let mut kcl_residual_max_a = 0.0f64;
    for node in 0..n {
        if !solved[node] || pinned[node].is_some() {
            continue;
        }
        let mut r = -injections[node];
        for &(nbr, g) in &adjacency[node] {
            r += g * (voltages[node] - voltages[nbr]);
        }
        kcl_residual_max_a = kcl_residual_max_a.max(r.abs());
    }

    // Dropout checks now that input voltages exist.
    for (state, reg) in regulator_states.iter_mut().zip(&board.regulators) {
        let input = pin_node(board, graph, &reg.input_pin)?;
        if solved[input] {
            let v_in = voltages[input];
            state.input_voltage_v = Some(v_in);
            state.dropout_ok = v_in >= state.required_input_v;
        }
    }

    Ok(SolveResult {
        voltages,
        solved,
        island_of,
        island_count,
        pin_flows,
        regulators: regulator_states,
        total_source_current_a,
        kcl_residual_max_a,
        cg_iterations,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// r = b - A x for the reduced Laplacian (diag minus off-diagonal couplings).
fn residual_vec(
    diag: &[f64],
    adj: &[Vec<(usize, f64)>],
    x: &[f64],
    b: &[f64],
) -> Vec<f64> {
    let mut r = vec![0.0; x.len()];
    for k in 0..x.len() {
        let mut ax = diag[k] * x[k];
        for &(j, g) in &adj[k] {
            ax -= g * x[j];
        }
        r[k] = b[k] - ax;
    }
    r
}

/// Jacobi-preconditioned conjugate gradient for the reduced SPD system.
/// Solves `A d = r` in place of the caller's residual; returns the update and
/// iteration count. Fixed evaluation order keeps this bit-deterministic.
fn conjugate_gradient(
    diag: &[f64],
    adj: &[Vec<(usize, f64)>],
    r: &mut [f64],
    target: f64,
) -> (Vec<f64>, usize) {
    let m = r.len();
    let mut x = vec![0.0f64; m];
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let max_iter = 60 * m + 200;
    let mut q = vec![0.0f64; m];
    for iter in 0..max_iter {
        if norm(r) <= target || rz == 0.0 {
            return (x, iter);
        }
        for k in 0..m {
            let mut ap = diag[k] * p[k];
            for &(j, g) in &adj[k] {
                ap -= g * p[j];
            }
            q[k] = ap;
        }
        let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        if pq <= 0.0 {
            break; // numerically exhausted
        }
        let alpha = rz / pq;
        for k in 0..m {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        for k in 0..m {
            z[k] = r[k] / diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..m {
            p[k] = z[k] + beta * p[k];
        }
    }
    (x, max_iter)
}

/// Build the per-load voltage rows in board order, ids `Load 1`, `Load 2`, …
pub fn load_reports(
    board: &Board,
    graph: &ConductanceGraph,
    result: &SolveResult,
) -> Result<Vec<LoadReport>, SolveError> {
    let mut rows = Vec::with_capacity(board.loads.len());
    for (idx, load) in board.loads.iter().enumerate() {
        let power = pin_node(board, graph, &load.power_pin)?;
        let ground = pin_node(board, graph, &load.ground_pin)?;
        let (Some(v_power), Some(v_ground)) = (result.voltage(power), result.voltage(ground))
        else {
            return Err(SolveError::LoadUnsolved(load.ref_des.clone()));
        };
        // With multiple supply pins these would be min/max over the pin set;
        // each load names one power and one ground pin, so the extrema are
        // the pins themselves.
        let actual = v_power - v_ground;
        let (margin_v, margin_pct) = voltage_margin(load.min_voltage, actual);
        rows.push(LoadReport {
            id: format!("Load {}", idx + 1),
            ref_des: load.ref_des.clone(),
            pass: margin_v >= 0.0,
            load_current_a: load.current,
            min_voltage_v: load.min_voltage,
            actual_voltage_v: actual,
            margin_v,
            margin_pct,
            min_power_pin: load.power_pin.clone(),
            min_power_pin_v: v_power,
            max_ground_pin: load.ground_pin.clone(),
            max_ground_pin_v: v_ground,
            actual_current_a: load.current,
        });
    }
    Ok(rows)
}

/// Compare every test point against the solved voltages. A test point behind
/// a dropout-violated regulator reports [`TestPointKind::DropoutViolation`]
/// instead of a naive pass/fail.
pub fn check_testpoints(
    board: &Board,
    graph: &ConductanceGraph,
    result: &SolveResult,
) -> Result<Vec<TestPointFinding>, SolveError> {
    // Rails whose regulator chain is out of dropout, including rails
    // downstream of a violated stage.
    let mut tainted: Vec<String> = result
        .regulators
        .iter()
        .filter(|r| !r.dropout_ok)
        .map(|r| r.output_net.clone())
        .collect();
    loop {
        let mut grew = false;
        for reg in &result.regulators {
            if tainted.contains(&reg.input_net) && !tainted.contains(&reg.output_net) {
                tainted.push(reg.output_net.clone());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }

    let mut findings = Vec::with_capacity(board.testpoints.len());
    for tp in &board.testpoints {
        let node = pin_node(board, graph, &tp.pin)?;
        let Some(solved_v) = result.voltage(node) else {
            return Err(SolveError::TestPointUnsolved(tp.name.clone()));
        };
        let kind = if tainted.contains(&tp.net) {
            TestPointKind::DropoutViolation
        } else if (solved_v - tp.expected_voltage).abs() <= tp.tolerance {
            TestPointKind::Pass
        } else {
            TestPointKind::Fail
        };
        findings.push(TestPointFinding {
            name: tp.name.clone(),
            net: tp.net.clone(),
            pin: tp.pin.clone(),
            expected_v: tp.expected_voltage,
            tolerance_v: tp.tolerance,
            solved_v,
            kind,
            pass: kind == TestPointKind::Pass,
        });
    }
    Ok(findings)
}

/// Per-net summary of solved voltages, for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetVoltageSummary {
    pub net: String,
    pub min_v: f64,
    pub max_v: f64,
}

/// Min/max solved voltage per net that has any solved copper.
pub fn net_voltage_summaries(graph: &ConductanceGraph, result: &SolveResult) -> Vec<NetVoltageSummary> {
    let mut per_net: Vec<Option<(f64, f64)>> = vec![None; graph.nets.len()];
    for (node, info) in graph.nodes.iter().enumerate() {
        if let Some(v) = result.voltage(node) {
            let entry = per_net[info.net].get_or_insert((v, v));
            entry.0 = entry.0.min(v);
            entry.1 = entry.1.max(v);
        }
    }
    per_net
        .into_iter()
        .enumerate()
        .filter_map(|(i, mm)| {
            mm.map(|(min_v, max_v)| NetVoltageSummary {
                net: graph.nets[i].clone(),
                min_v,
                max_v,
            })
        })
        .collect()
}

#[allow(unused)]
fn _net_kind_unused(k: NetKind) {}
