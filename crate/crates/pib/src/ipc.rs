//! Conductor sizing per IPC-2221 and board-level power budgeting.
//!
//! The sizing chart in IPC-2221 relates current to cross-section through
//! `I = k * dT^0.44 * A^0.725`, with `k = 0.048` for outer layers and
//! `0.024` for inner layers (area in square mils, current in amperes,
//! temperature rise in °C). This module inverts that relation to answer the
//! questions designers actually ask: how much copper does this current need,
//! and is this trace wide enough?
//!
//! The power budget models linear (series-pass) regulators only: a regulated
//! rail draws its full output current from its input rail, plus the
//! regulator's quiescent current, and burns the voltage difference as heat.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::board::{Board, LayerKind, NetKind, RegulatorSpec, Shape, SourceSpec};
use crate::units::{mm_to_mil, oz_to_mil};

/// `I = k * dT^B_TEMP * A^C_AREA` — outer-layer k.
pub const K_EXTERNAL: f64 = 0.048;
/// Inner-layer k: half the outer value (inner copper sheds heat worse).
pub const K_INTERNAL: f64 = 0.024;
/// Exponent on temperature rise.
pub const B_TEMP: f64 = 0.44;
/// Exponent on cross-sectional area.
pub const C_AREA: f64 = 0.725;

/// Whether a trace runs on an outer or inner copper layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceClass {
    External,
    Internal,
}

impl TraceClass {
    fn k(self) -> f64 {
        match self {
            TraceClass::External => K_EXTERNAL,
            TraceClass::Internal => K_INTERNAL,
        }
    }

    /// Outer layers are external; everything else is internal.
    pub fn from_layer_kind(kind: LayerKind) -> Self {
        match kind {
            LayerKind::ExternalTop | LayerKind::ExternalBottom => TraceClass::External,
            LayerKind::Internal => TraceClass::Internal,
        }
    }
}

/// Errors from the sizing queries.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SizingError {
    #[error("current must be positive, got {0} A")]
    NonPositiveCurrent(f64),
    #[error("temperature rise must be in (0, 100] °C, got {0}")]
    TempRiseOutOfRange(f64),
    #[error("copper weight must be positive, got {0} oz")]
    NonPositiveCopper(f64),
}

/// Minimum conductor cross-section in square mils for `current` amperes at a
/// sustained `temp_rise` °C above ambient.
///
/// ```
/// use pib::ipc::{min_cross_section, TraceClass};
/// let a = min_cross_section(2.0, 10.0, TraceClass::External).unwrap();
/// assert!((a - 42.4).abs() < 0.5);
/// ```
pub fn min_cross_section(
    current_a: f64,
    temp_rise_c: f64,
    class: TraceClass,
) -> Result<f64, SizingError> {
    if !(current_a > 0.0) {
        return Err(SizingError::NonPositiveCurrent(current_a));
    }
    if !(temp_rise_c > 0.0 && temp_rise_c <= 100.0) {
        return Err(SizingError::TempRiseOutOfRange(temp_rise_c));
    }
    Ok((current_a / (class.k() * temp_rise_c.powf(B_TEMP))).powf(1.0 / C_AREA))
}

/// Minimum trace width in mils for `current` at `temp_rise` on copper of
/// `copper_oz` weight: the required cross-section divided by foil thickness.
pub fn min_trace_width(
    current_a: f64,
    temp_rise_c: f64,
    copper_oz: f64,
    class: TraceClass,
) -> Result<f64, SizingError> {
    if !(copper_oz > 0.0) {
        return Err(SizingError::NonPositiveCopper(copper_oz));
    }
    Ok(min_cross_section(current_a, temp_rise_c, class)? / oz_to_mil(copper_oz))
}

/// Round a width in mils half-up to a whole mil, the way fab notes quote it.
pub fn round_mil(width_mil: f64) -> i64 {
    (width_mil + 0.5).floor() as i64
}

/// Answer to a width query, with every representation the CLI prints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthAnswer {
    pub current_a: f64,
    pub temp_rise_c: f64,
    pub copper_oz: f64,
    pub class: TraceClass,
    pub cross_section_mil2: f64,
    pub width_mil: f64,
    pub width_mil_rounded: i64,
    pub width_mm: f64,
}

/// Compute the full width answer for a sizing query.
pub fn width_answer(
    current_a: f64,
    temp_rise_c: f64,
    copper_oz: f64,
    class: TraceClass,
) -> Result<WidthAnswer, SizingError> {
    if !(copper_oz > 0.0) {
        return Err(SizingError::NonPositiveCopper(copper_oz));
    }
    let cross_section_mil2 = min_cross_section(current_a, temp_rise_c, class)?;
    let width_mil = cross_section_mil2 / oz_to_mil(copper_oz);
    Ok(WidthAnswer {
        current_a,
        temp_rise_c,
        copper_oz,
        class,
        cross_section_mil2,
        width_mil,
        width_mil_rounded: round_mil(width_mil),
        width_mm: crate::units::mil_to_mm(width_mil),
    })
}

/// Outcome of checking one segment against its required width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthCheckKind {
    Pass,
    Violation,
    /// No solved current was available for the segment's net, so the check
    /// could not run. Reported rather than silently passed.
    Unverifiable,
}

/// Per-segment result of [`check_board_widths`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthFinding {
    pub feature_id: String,
    pub net: String,
    pub layer: String,
    pub kind: WidthCheckKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub current_a: Option<f64>,
    pub actual_mil: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required_mil: Option<f64>,
    /// actual / required; > 1 means margin, < 1 means violation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub headroom: Option<f64>,
}

/// Configuration for the board-wide width check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthCheckConfig {
    /// Allowed sustained temperature rise (°C) used for every segment.
    pub temp_rise_c: f64,
}

impl Default for WidthCheckConfig {
    fn default() -> Self {
        // 10 °C above ambient: the conservative default for enclosed boards.
        WidthCheckConfig { temp_rise_c: 10.0 }
    }
}

/// Check every segment on the board against the width its solved current
/// demands. `currents` maps copper feature id to the current (A) the solver
/// attributed to it; segments without an entry come back `Unverifiable`.
/// A segment passes when its width meets or exceeds the requirement.
pub fn check_board_widths(
    board: &Board,
    currents: &BTreeMap<String, f64>,
    config: &WidthCheckConfig,
) -> Vec<WidthFinding> {
    let mut findings = Vec::new();
    for feature in &board.copper {
        let Shape::Segment { layer, width, .. } = &feature.shape else {
            continue;
        };
        let actual_mil = mm_to_mil(*width);
        let Some(layer_def) = board.layer(layer) else {
            continue; // validate_board reports the dangling layer
        };
        let class = TraceClass::from_layer_kind(layer_def.kind);
        let finding = match currents.get(&feature.id) {
            None => WidthFinding {
                feature_id: feature.id.clone(),
                net: feature.net.clone(),
                layer: layer.clone(),
                kind: WidthCheckKind::Unverifiable,
                current_a: None,
                actual_mil,
                required_mil: None,
                headroom: None,
            },
            Some(&current_a) => {
                let required_mil = if current_a <= 0.0 {
                    0.0 // a dead trace needs no copper
                } else {
                    match min_trace_width(current_a, config.temp_rise_c, layer_def.copper_oz, class)
                    {
                        Ok(w) => w,
                        Err(_) => continue,
                    }
                };
                let kind = if actual_mil >= required_mil {
                    WidthCheckKind::Pass
                } else {
                    WidthCheckKind::Violation
                };
                WidthFinding {
                    feature_id: feature.id.clone(),
                    net: feature.net.clone(),
                    layer: layer.clone(),
                    kind,
                    current_a: Some(current_a),
                    actual_mil,
                    required_mil: Some(required_mil),
                    headroom: if required_mil > 0.0 {
                        Some(actual_mil / required_mil)
                    } else {
                        None
                    },
                }
            }
        };
        findings.push(finding);
    }
    findings
}

// ---------------------------------------------------------------------------
// Power budget
// ---------------------------------------------------------------------------

/// The supply feeding the budget, normally taken from the board's source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplySpec {
    pub net: String,
    pub voltage: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_current: Option<f64>,
}

impl SupplySpec {
    pub fn from_source(source: &SourceSpec) -> Self {
        SupplySpec {
            net: source.net.clone(),
            voltage: source.voltage,
            max_current: source.max_current,
        }
    }
}

/// Budget errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BudgetError {
    #[error("budget line `{line}` draws from rail `{rail}`, which no regulator chain connects to the supply")]
    UnreachableRail { line: String, rail: String },
    #[error("budget line `{line}` draws from `{rail}`, which is not a power net")]
    RailNotPower { line: String, rail: String },
    #[error("no budget lines to total")]
    Empty,
}

/// Per-rail roll-up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RailBudget {
    pub rail: String,
    /// Σ quantity × current over the rail's lines (A).
    pub current_a: f64,
    /// Σ quantity × voltage × current: power delivered on the rail (W).
    pub load_power_w: f64,
    /// Power drawn from the supply to deliver it. Equal to `load_power_w`
    /// for the supply rail itself; higher for regulated rails because a
    /// linear regulator passes current straight through at the input voltage.
    pub input_power_w: f64,
}

/// Losses attributed to one regulator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegulatorBudget {
    pub ref_des: String,
    /// Output current it must pass (A), from the budget lines downstream.
    pub output_current_a: f64,
    /// Heat: (v_in − v_out) × i_out + v_in × i_q, at nominal voltages (W).
    pub dissipation_w: f64,
    /// Supply power consumed by quiescent draw alone (W).
    pub quiescent_w: f64,
}

/// The budget roll-up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub supply_net: String,
    pub supply_voltage: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supply_capacity_w: Option<f64>,
    pub rails: Vec<RailBudget>,
    pub regulators: Vec<RegulatorBudget>,
    /// Total power drawn from the supply, including regulator overhead (W).
    pub total_input_w: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin_w: Option<f64>,
    /// False only when a known capacity is exceeded.
    pub pass: bool,
}

/// Roll the budget lines up to the supply.
///
/// Regulated rails refer their power to the supply through the linear model:
/// every ampere delivered on a regulated rail is an ampere drawn from the
/// supply, so referred input power is `supply_voltage × rail_current`, and
/// each regulator additionally draws its quiescent current whenever powered.
pub fn power_budget(
    board: &Board,
    lines: &[crate::board::BudgetLine],
    supply: &SupplySpec,
) -> Result<BudgetReport, BudgetError> {
    if lines.is_empty() {
        return Err(BudgetError::Empty);
    }

    // Regulator edges resolved to nets, in board order.
    let mut regs: Vec<(String, String, &RegulatorSpec)> = Vec::new();
    for reg in &board.regulators {
        let input = board.resolve_pin(&reg.input_pin).map(|r| r.feature.net.clone());
        let output = board.resolve_pin(&reg.output_pin).map(|r| r.feature.net.clone());
        if let (Some(input), Some(output)) = (input, output) {
            regs.push((input, output, reg));
        }
    }

    // Walk each rail back to the supply, checking reachability.
    let chain_to_supply = |rail: &str| -> Option<Vec<&RegulatorSpec>> {
        let mut chain = Vec::new();
        let mut net = rail.to_string();
        for _ in 0..=regs.len() {
            if net == supply.net {
                return Some(chain);
            }
            let (input, _, reg) = regs.iter().find(|(_, output, _)| *output == net)?;
            chain.push(*reg);
            net = input.clone();
        }
        None // cycle; validate_board reports it separately
    };

    let mut rails: BTreeMap<String, RailBudget> = BTreeMap::new();
    for line in lines {
        match board.net(&line.rail) {
            Some(net) if net.kind == NetKind::Power => {}
            _ => {
                return Err(BudgetError::RailNotPower {
                    line: line.name.clone(),
                    rail: line.rail.clone(),
                })
            }
        }
        if chain_to_supply(&line.rail).is_none() {
            return Err(BudgetError::UnreachableRail {
                line: line.name.clone(),
                rail: line.rail.clone(),
            });
        }
        let entry = rails.entry(line.rail.clone()).or_insert_with(|| RailBudget {
            rail: line.rail.clone(),
            current_a: 0.0,
            load_power_w: 0.0,
            input_power_w: 0.0,
        });
        let qty = line.quantity as f64;
        entry.current_a += qty * line.current;
        entry.load_power_w += qty * line.voltage * line.current;
    }
    for rail in rails.values_mut() {
        rail.input_power_w = if rail.rail == supply.net {
            rail.load_power_w
        } else {
            supply.voltage * rail.current_a
        };
    }

    // Output current through each regulator: everything on its output net
    // plus whatever downstream regulators pass through (their loads and
    // quiescent draws).
    let mut reg_out: BTreeMap<String, f64> = BTreeMap::new();
    // Iterate until stable; the chain depth bounds the iteration count.
    for _ in 0..=regs.len() {
        for (_, output, reg) in &regs {
            let direct = rails.get(output).map_or(0.0, |r| r.current_a);
            let nested: f64 = regs
                .iter()
                .filter(|(input, _, _)| input == output)
                .map(|(_, _, down)| {
                    reg_out.get(&down.ref_des).copied().unwrap_or(0.0) + down.quiescent_current
                })
                .sum();
            reg_out.insert(reg.ref_des.clone(), direct + nested);
        }
    }

    let mut regulators = Vec::new();
    let mut quiescent_total_w = 0.0;
    for (input, _, reg) in &regs {
        let output_current_a = reg_out.get(&reg.ref_des).copied().unwrap_or(0.0);
        let v_in = board.nominal_voltage(input).unwrap_or(supply.voltage);
        let dissipation_w = (v_in - reg.set_voltage) * output_current_a
            + v_in * reg.quiescent_current;
        let quiescent_w = supply.voltage * reg.quiescent_current;
        quiescent_total_w += quiescent_w;
        regulators.push(RegulatorBudget {
            ref_des: reg.ref_des.clone(),
            output_current_a,
            dissipation_w,
            quiescent_w,
        });
    }

    let total_input_w =
        rails.values().map(|r| r.input_power_w).sum::<f64>() + quiescent_total_w;
    let supply_capacity_w = supply.max_current.map(|i| supply.voltage * i);
    let margin_w = supply_capacity_w.map(|cap| cap - total_input_w);
    Ok(BudgetReport {
        supply_net: supply.net.clone(),
        supply_voltage: supply.voltage,
        supply_capacity_w,
        rails: rails.into_values().collect(),
        regulators,
        total_input_w,
        margin_w,
        pass: margin_w.map_or(true, |m| m >= 0.0),
    })
}
