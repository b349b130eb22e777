//! The in-memory board model: layers, nets, copper, components, and the
//! electrical annotations (sources, loads, regulators, test points) that the
//! solver and the report pipeline consume.
//!
//! The model is deliberately flat — plain structs with public fields, no
//! interior references. Cross-references (a pin naming its pad, a load naming
//! its pins) are by string id and resolved on demand; [`validate_board`]
//! reports every dangling or contradictory reference as a
//! [`StructuralError`] instead of panicking later in the pipeline.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::geom::{self, Point};
use crate::units::oz_to_um;

/// Where a copper layer sits in the stackup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    ExternalTop,
    ExternalBottom,
    Internal,
}

/// One copper layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub kind: LayerKind,
    /// Copper weight in ounces per square foot (1 oz ≈ 35 µm of foil).
    pub copper_oz: f64,
}

impl Layer {
    /// Foil thickness in micrometres.
    pub fn thickness_um(&self) -> f64 {
        oz_to_um(self.copper_oz)
    }
}

/// Electrical role of a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    Power,
    Ground,
    Signal,
}

/// A named net. Power nets carry their nominal rail voltage; ground and
/// signal nets must not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub kind: NetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_voltage: Option<f64>,
}

/// Pad footprint geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum PadGeometry {
    Circle { diameter: f64 },
    Rect { width: f64, height: f64 },
}

/// Copper geometry variants. Segments, polygons and pads live on a single
/// layer; a via spans exactly two layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Segment {
        layer: String,
        start: Point,
        end: Point,
        width: f64,
    },
    Polygon {
        layer: String,
        vertices: Vec<Point>,
    },
    Pad {
        layer: String,
        at: Point,
        #[serde(flatten)]
        geometry: PadGeometry,
        #[serde(default)]
        plated: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        drill: Option<f64>,
        /// Solder-mask opening margin beyond the pad edge. `None` means the
        /// fab-rule default applies.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mask_margin: Option<f64>,
    },
    Via {
        layers: [String; 2],
        at: Point,
        drill: f64,
        pad_diameter: f64,
        #[serde(default)]
        tented: bool,
    },
}

/// One piece of copper, bound to exactly one net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopperFeature {
    pub id: String,
    pub net: String,
    #[serde(flatten)]
    pub shape: Shape,
}

impl Shape {
    /// Layers this shape puts copper on.
    pub fn layers(&self) -> Vec<&str> {
        match self {
            Shape::Segment { layer, .. }
            | Shape::Polygon { layer, .. }
            | Shape::Pad { layer, .. } => vec![layer],
            Shape::Via { layers, .. } => layers.iter().map(String::as_str).collect(),
        }
    }

    /// Axis-aligned bounding box `(min, max)` of the copper.
    pub fn bbox(&self) -> (Point, Point) {
        match self {
            Shape::Segment { start, end, width, .. } => {
                let r = width / 2.0;
                (
                    Point::new(start.x.min(end.x) - r, start.y.min(end.y) - r),
                    Point::new(start.x.max(end.x) + r, start.y.max(end.y) + r),
                )
            }
            Shape::Polygon { vertices, .. } => {
                let mut min = Point::new(f64::INFINITY, f64::INFINITY);
                let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    min.x = min.x.min(v.x);
                    min.y = min.y.min(v.y);
                    max.x = max.x.max(v.x);
                    max.y = max.y.max(v.y);
                }
                (min, max)
            }
            Shape::Pad { at, geometry, .. } => {
                let (w, h) = match geometry {
                    PadGeometry::Circle { diameter } => (*diameter, *diameter),
                    PadGeometry::Rect { width, height } => (*width, *height),
                };
                (
                    Point::new(at.x - w / 2.0, at.y - h / 2.0),
                    Point::new(at.x + w / 2.0, at.y + h / 2.0),
                )
            }
            Shape::Via { at, pad_diameter, .. } => {
                let r = pad_diameter / 2.0;
                (Point::new(at.x - r, at.y - r), Point::new(at.x + r, at.y + r))
            }
        }
    }

    /// True if board point `p` lies on this shape's copper (on whichever
    /// layers the shape occupies).
    pub fn covers_point(&self, p: Point) -> bool {
        match self {
            Shape::Segment { start, end, width, .. } => {
                geom::point_segment_distance(p, *start, *end) <= width / 2.0
            }
            Shape::Polygon { vertices, .. } => geom::point_in_polygon(p, vertices),
            Shape::Pad { at, geometry, .. } => match geometry {
                PadGeometry::Circle { diameter } => p.distance(*at) <= diameter / 2.0,
                PadGeometry::Rect { width, height } => {
                    (p.x - at.x).abs() <= width / 2.0 && (p.y - at.y).abs() <= height / 2.0
                }
            },
            Shape::Via { at, pad_diameter, .. } => p.distance(*at) <= pad_diameter / 2.0,
        }
    }

    /// Polygonal outline of the copper, used for clearance and mask checks.
    /// Round shapes are flattened to 16-gons.
    pub fn outline_polygon(&self) -> Vec<Point> {
        match self {
            Shape::Segment { start, end, width, .. } => {
                geom::capsule_outline(*start, *end, *width)
            }
            Shape::Polygon { vertices, .. } => vertices.clone(),
            Shape::Pad { at, geometry, .. } => match geometry {
                PadGeometry::Circle { diameter } => geom::circle_outline(*at, diameter / 2.0),
                PadGeometry::Rect { width, height } => geom::rect_outline(*at, *width, *height),
            },
            Shape::Via { at, pad_diameter, .. } => geom::circle_outline(*at, pad_diameter / 2.0),
        }
    }
}

/// A component pin: the pad it lands on and the net it carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub name: String,
    pub pad: String,
    pub net: String,
}

/// A placed component, identified by reference designator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub ref_des: String,
    pub pins: Vec<Pin>,
}

/// An ideal DC supply pinned to a pad of its net. The return terminal is the
/// owning component's pin on a ground net, when one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub net: String,
    /// Attachment as `REF-PIN` (e.g. `J1-1`) or a bare pad id.
    pub pin: String,
    pub voltage: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_current: Option<f64>,
}

/// A constant-current load drawing `current` from its power pin and returning
/// it at its ground pin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    pub ref_des: String,
    pub power_pin: String,
    pub ground_pin: String,
    pub current: f64,
    pub min_voltage: f64,
}

/// A linear (series-pass) regulator: `i_in = i_out + i_q`, output held at
/// `set_voltage` while the input stays above `set_voltage + dropout`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegulatorSpec {
    pub ref_des: String,
    pub input_pin: String,
    pub output_pin: String,
    pub ground_pin: String,
    pub set_voltage: f64,
    pub dropout: f64,
    #[serde(default)]
    pub quiescent_current: f64,
}

/// A voltage checkpoint: the solved voltage at `pin` must sit within
/// `expected_voltage ± tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPoint {
    pub name: String,
    pub net: String,
    pub pin: String,
    pub expected_voltage: f64,
    pub tolerance: f64,
}

/// One line in the power budget: `quantity` consumers at `voltage` drawing
/// `current` each from `rail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLine {
    pub name: String,
    pub rail: String,
    pub voltage: f64,
    pub current: f64,
    pub quantity: u32,
}

/// One edge of the board outline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineEdge {
    pub start: Point,
    pub end: Point,
}

/// The whole board.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Board {
    #[serde(default)]
    pub name: String,
    pub layers: Vec<Layer>,
    pub nets: Vec<Net>,
    #[serde(default)]
    pub copper: Vec<CopperFeature>,
    #[serde(default)]
    pub components: Vec<Component>,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
    #[serde(default)]
    pub loads: Vec<LoadSpec>,
    #[serde(default)]
    pub regulators: Vec<RegulatorSpec>,
    #[serde(default)]
    pub testpoints: Vec<TestPoint>,
    #[serde(default)]
    pub outline: Vec<OutlineEdge>,
    #[serde(default)]
    pub budget: Vec<BudgetLine>,
}

/// A pin reference resolved down to copper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPin<'a> {
    /// `REF-PIN` display name, or the pad id when referenced directly.
    pub label: &'a str,
    pub feature: &'a CopperFeature,
}

impl Board {
    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn net(&self, name: &str) -> Option<&Net> {
        self.nets.iter().find(|n| n.name == name)
    }

    pub fn feature(&self, id: &str) -> Option<&CopperFeature> {
        self.copper.iter().find(|f| f.id == id)
    }

    pub fn component(&self, ref_des: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.ref_des == ref_des)
    }

    /// Resolve a `REF-PIN` reference (e.g. `DV1-16`) or a bare pad id to the
    /// pad feature it names. `REF-PIN` resolution splits on `-`, trying each
    /// split point so reference designators containing dashes still work.
    pub fn resolve_pin<'a>(&'a self, pin_ref: &'a str) -> Option<ResolvedPin<'a>> {
        if let Some(feature) = self.feature(pin_ref) {
            return Some(ResolvedPin { label: pin_ref, feature });
        }
        for (idx, _) in pin_ref.match_indices('-') {
            let (ref_des, rest) = (&pin_ref[..idx], &pin_ref[idx + 1..]);
            if let Some(component) = self.component(ref_des) {
                if let Some(pin) = component.pins.iter().find(|p| p.name == rest) {
                    if let Some(feature) = self.feature(&pin.pad) {
                        return Some(ResolvedPin { label: pin_ref, feature });
                    }
                }
            }
        }
        None
    }

    /// Nominal voltage of a net, if it is a power net.
    pub fn nominal_voltage(&self, net: &str) -> Option<f64> {
        self.net(net).and_then(|n| n.nominal_voltage)
    }

    /// The supply return pad for a source: the first pin of the component
    /// owning the attach pad that lands on a ground net.
    pub fn source_return_pin<'a>(&'a self, source: &SourceSpec) -> Option<ResolvedPin<'a>> {
        let attach = self.resolve_pin(&source.pin)?;
        let component = self.components.iter().find(|c| {
            c.pins.iter().any(|p| p.pad == attach.feature.id)
        })?;
        for pin in &component.pins {
            if self.net(&pin.net).map(|n| n.kind) == Some(NetKind::Ground) {
                if let Some(feature) = self.feature(&pin.pad) {
                    return Some(ResolvedPin { label: &pin.name, feature });
                }
            }
        }
        None
    }
}

/// A structural defect found by [`validate_board`]. Each variant names the
/// offending entity so the message stands on its own in a report.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StructuralError {
    #[error("duplicate layer name `{0}`")]
    DuplicateLayer(String),
    #[error("stackup needs exactly one {0:?} layer, found {1}")]
    WrongExternalLayerCount(LayerKind, usize),
    #[error("layer `{0}` has non-positive copper weight {1} oz")]
    BadCopperWeight(String, f64),
    #[error("duplicate net name `{0}`")]
    DuplicateNet(String),
    #[error("power net `{0}` needs a positive nominal voltage")]
    PowerNetWithoutVoltage(String),
    #[error("net `{0}` is not a power net but declares a nominal voltage")]
    VoltageOnNonPowerNet(String),
    #[error("duplicate copper id `{0}`")]
    DuplicateCopperId(String),
    #[error("copper `{0}` references unknown net `{1}`")]
    UnknownNet(String, String),
    #[error("copper `{0}` references unknown layer `{1}`")]
    UnknownLayer(String, String),
    #[error("segment `{0}` has non-positive width {1} mm")]
    BadSegmentWidth(String, f64),
    #[error("polygon `{0}` is degenerate (fewer than three non-collinear vertices)")]
    DegeneratePolygon(String),
    #[error("pad `{0}` has a non-positive dimension")]
    BadPadSize(String),
    #[error("copper `{0}`: drill {1} mm does not fit inside the pad")]
    DrillExceedsPad(String, f64),
    #[error("via `{0}` must span two distinct layers")]
    ViaSameLayer(String),
    #[error("duplicate reference designator `{0}`")]
    DuplicateRefDes(String),
    #[error("{ref_des} pin `{pin}` references unknown pad `{pad}`")]
    PinUnknownPad { ref_des: String, pin: String, pad: String },
    #[error("{ref_des} pin `{pin}` says net `{pin_net}` but its pad is on net `{pad_net}`")]
    PinNetMismatch { ref_des: String, pin: String, pin_net: String, pad_net: String },
    #[error("source on `{0}` must have positive voltage, got {1} V")]
    BadSourceVoltage(String, f64),
    #[error("source pin `{0}` does not resolve to a pad")]
    SourcePinUnresolved(String),
    #[error("source on net `{net}` attaches to pad `{pad}` which is on net `{pad_net}`")]
    SourcePadOffNet { net: String, pad: String, pad_net: String },
    #[error("load `{0}` must draw positive current, got {1} A")]
    BadLoadCurrent(String, f64),
    #[error("load `{0}` pin `{1}` does not resolve to a pad")]
    LoadPinUnresolved(String, String),
    #[error("load `{ref_des}` minimum voltage {min_voltage} V is not below the `{net}` nominal {nominal} V")]
    LoadMinAboveNominal { ref_des: String, net: String, min_voltage: f64, nominal: f64 },
    #[error("load `{0}` power pin must land on a power net")]
    LoadPowerPinNotPower(String),
    #[error("regulator `{0}` pin `{1}` does not resolve to a pad")]
    RegulatorPinUnresolved(String, String),
    #[error("regulator `{0}` must regulate to a positive voltage, got {1} V")]
    BadRegulatorVoltage(String, f64),
    #[error("regulator `{0}` input and output are on the same net `{1}`")]
    RegulatorShortsNets(String, String),
    #[error("regulator chain forms a cycle through net `{0}`")]
    RegulatorCycle(String),
    #[error("load `{load}` sits on net `{net}` which no source or regulator can reach")]
    UnreachableNet { load: String, net: String },
    #[error("test point `{0}` pin `{1}` does not resolve to a pad")]
    TestPointUnresolved(String, String),
    #[error("test point `{0}` needs a positive tolerance")]
    BadTestPointTolerance(String),
    #[error("test point `{name}` says net `{net}` but pin `{pin}` is on net `{pin_net}`")]
    TestPointNetMismatch { name: String, net: String, pin: String, pin_net: String },
    #[error("budget line `{0}` references unknown rail `{1}`")]
    BudgetUnknownRail(String, String),
    #[error("budget line `{0}` has a non-positive voltage or current")]
    BadBudgetLine(String),
}

/// Check every structural invariant and return the full list of defects.
/// An empty list means the board is safe to mesh, solve, and lint.
pub fn validate_board(board: &Board) -> Vec<StructuralError> {
    let mut errors = Vec::new();

    // Layers: unique names, exactly one of each external kind.
    let mut seen = HashSet::new();
    for layer in &board.layers {
        if !seen.insert(layer.name.as_str()) {
            errors.push(StructuralError::DuplicateLayer(layer.name.clone()));
        }
        if layer.copper_oz <= 0.0 {
            errors.push(StructuralError::BadCopperWeight(layer.name.clone(), layer.copper_oz));
        }
    }
    for kind in [LayerKind::ExternalTop, LayerKind::ExternalBottom] {
        let count = board.layers.iter().filter(|l| l.kind == kind).count();
        if count != 1 {
            errors.push(StructuralError::WrongExternalLayerCount(kind, count));
        }
    }

    // Nets: unique, voltage fields matching kind.
    let mut seen = HashSet::new();
    for net in &board.nets {
        if !seen.insert(net.name.as_str()) {
            errors.push(StructuralError::DuplicateNet(net.name.clone()));
        }
        match (net.kind, net.nominal_voltage) {
            (NetKind::Power, Some(v)) if v > 0.0 => {}
            (NetKind::Power, _) => {
                errors.push(StructuralError::PowerNetWithoutVoltage(net.name.clone()))
            }
            (_, Some(_)) => errors.push(StructuralError::VoltageOnNonPowerNet(net.name.clone())),
            (_, None) => {}
        }
    }

    // Copper: unique ids, live references, sane geometry.
    let mut seen = HashSet::new();
    for feature in &board.copper {
        if !seen.insert(feature.id.as_str()) {
            errors.push(StructuralError::DuplicateCopperId(feature.id.clone()));
        }
        if board.net(&feature.net).is_none() {
            errors.push(StructuralError::UnknownNet(feature.id.clone(), feature.net.clone()));
        }
        for layer in feature.shape.layers() {
            if board.layer(layer).is_none() {
                errors.push(StructuralError::UnknownLayer(feature.id.clone(), layer.to_string()));
            }
        }
        match &feature.shape {
            Shape::Segment { width, .. } => {
                if *width <= 0.0 {
                    errors.push(StructuralError::BadSegmentWidth(feature.id.clone(), *width));
                }
            }
            Shape::Polygon { vertices, .. } => {
                if geom::polygon_is_degenerate(vertices) {
                    errors.push(StructuralError::DegeneratePolygon(feature.id.clone()));
                }
            }
            Shape::Pad { geometry, drill, .. } => {
                let min_dim = match geometry {
                    PadGeometry::Circle { diameter } => *diameter,
                    PadGeometry::Rect { width, height } => width.min(*height),
                };
                if min_dim <= 0.0 {
                    errors.push(StructuralError::BadPadSize(feature.id.clone()));
                }
                if let Some(d) = drill {
                    if *d <= 0.0 || *d >= min_dim {
                        errors.push(StructuralError::DrillExceedsPad(feature.id.clone(), *d));
                    }
                }
            }
            Shape::Via { layers, drill, pad_diameter, .. } => {
                if layers[0] == layers[1] {
                    errors.push(StructuralError::ViaSameLayer(feature.id.clone()));
                }
                if *drill <= 0.0 || drill >= pad_diameter {
                    errors.push(StructuralError::DrillExceedsPad(feature.id.clone(), *drill));
                }
            }
        }
    }

    // Components and pins.
    let mut seen = HashSet::new();
    for component in &board.components {
        if !seen.insert(component.ref_des.as_str()) {
            errors.push(StructuralError::DuplicateRefDes(component.ref_des.clone()));
        }
        for pin in &component.pins {
            match board.feature(&pin.pad) {
                None => errors.push(StructuralError::PinUnknownPad {
                    ref_des: component.ref_des.clone(),
                    pin: pin.name.clone(),
                    pad: pin.pad.clone(),
                }),
                Some(pad) if pad.net != pin.net => {
                    errors.push(StructuralError::PinNetMismatch {
                        ref_des: component.ref_des.clone(),
                        pin: pin.name.clone(),
                        pin_net: pin.net.clone(),
                        pad_net: pad.net.clone(),
                    })
                }
                Some(_) => {}
            }
        }
    }

    // Sources.
    for source in &board.sources {
        if source.voltage <= 0.0 {
            errors.push(StructuralError::BadSourceVoltage(source.net.clone(), source.voltage));
        }
        match board.resolve_pin(&source.pin) {
            None => errors.push(StructuralError::SourcePinUnresolved(source.pin.clone())),
            Some(resolved) if resolved.feature.net != source.net => {
                errors.push(StructuralError::SourcePadOffNet {
                    net: source.net.clone(),
                    pad: resolved.feature.id.clone(),
                    pad_net: resolved.feature.net.clone(),
                })
            }
            Some(_) => {}
        }
    }

    // Loads.
    for load in &board.loads {
        if load.current <= 0.0 {
            errors.push(StructuralError::BadLoadCurrent(load.ref_des.clone(), load.current));
        }
        for pin in [&load.power_pin, &load.ground_pin] {
            if board.resolve_pin(pin).is_none() {
                errors.push(StructuralError::LoadPinUnresolved(load.ref_des.clone(), pin.clone()));
            }
        }
        if let Some(resolved) = board.resolve_pin(&load.power_pin) {
            match board.net(&resolved.feature.net) {
                Some(net) if net.kind == NetKind::Power => {
                    let nominal = net.nominal_voltage.unwrap_or(0.0);
                    if load.min_voltage >= nominal {
                        errors.push(StructuralError::LoadMinAboveNominal {
                            ref_des: load.ref_des.clone(),
                            net: net.name.clone(),
                            min_voltage: load.min_voltage,
                            nominal,
                        });
                    }
                }
                _ => errors.push(StructuralError::LoadPowerPinNotPower(load.ref_des.clone())),
            }
        }
    }

    // Regulators: pins resolve, input/output nets differ, chain is acyclic.
    let mut reg_edges: Vec<(String, String)> = Vec::new();
    for reg in &board.regulators {
        if reg.set_voltage <= 0.0 {
            errors.push(StructuralError::BadRegulatorVoltage(reg.ref_des.clone(), reg.set_voltage));
        }
        let mut nets = Vec::new();
        for pin in [&reg.input_pin, &reg.output_pin, &reg.ground_pin] {
            match board.resolve_pin(pin) {
                None => {
                    errors.push(StructuralError::RegulatorPinUnresolved(
                        reg.ref_des.clone(),
                        pin.clone(),
                    ));
                    nets.push(None);
                }
                Some(resolved) => nets.push(Some(resolved.feature.net.clone())),
            }
        }
        if let (Some(Some(input)), Some(Some(output))) = (nets.first(), nets.get(1)) {
            if input == output {
                errors.push(StructuralError::RegulatorShortsNets(
                    reg.ref_des.clone(),
                    input.clone(),
                ));
            } else {
                reg_edges.push((input.clone(), output.clone()));
            }
        }
    }
    if let Some(net) = find_cycle(&reg_edges) {
        errors.push(StructuralError::RegulatorCycle(net));
    }

    // Reachability: every load's power net must trace back to a source
    // through the regulator chain.
    let mut reachable: HashSet<String> = board
        .sources
        .iter()
        .filter_map(|s| board.resolve_pin(&s.pin).map(|r| r.feature.net.clone()))
        .collect();
    loop {
        let mut grew = false;
        for (input, output) in &reg_edges {
            if reachable.contains(input) && reachable.insert(output.clone()) {
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    for load in &board.loads {
        if let Some(resolved) = board.resolve_pin(&load.power_pin) {
            if !reachable.contains(&resolved.feature.net) {
                errors.push(StructuralError::UnreachableNet {
                    load: load.ref_des.clone(),
                    net: resolved.feature.net.clone(),
                });
            }
        }
    }

    // Test points.
    for tp in &board.testpoints {
        if tp.tolerance <= 0.0 {
            errors.push(StructuralError::BadTestPointTolerance(tp.name.clone()));
        }
        match board.resolve_pin(&tp.pin) {
            None => errors.push(StructuralError::TestPointUnresolved(tp.name.clone(), tp.pin.clone())),
            Some(resolved) if resolved.feature.net != tp.net => {
                errors.push(StructuralError::TestPointNetMismatch {
                    name: tp.name.clone(),
                    net: tp.net.clone(),
                    pin: tp.pin.clone(),
                    pin_net: resolved.feature.net.clone(),
                })
            }
            Some(_) => {}
        }
    }

    // Budget lines.
    for line in &board.budget {
        if board.net(&line.rail).is_none() {
            errors.push(StructuralError::BudgetUnknownRail(line.name.clone(), line.rail.clone()));
        }
        if line.voltage <= 0.0 || line.current <= 0.0 {
            errors.push(StructuralError::BadBudgetLine(line.name.clone()));
        }
    }

    errors
}

/// Detect a cycle in the regulator net graph; returns a net on the cycle.
fn find_cycle(edges: &[(String, String)]) -> Option<String> {
    let mut adjacency: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut nodes: Vec<&str> = Vec::new();
    for (a, b) in edges {
        adjacency.entry(a).or_default().push(b);
        nodes.push(a);
        nodes.push(b);
    }
    nodes.sort_unstable();
    nodes.dedup();

    // Iterative DFS with colors: 0 unvisited, 1 on stack, 2 done.
    let mut color: HashMap<&str, u8> = HashMap::new();
    for &start in &nodes {
        if color.get(start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        color.insert(start, 1);
        while let Some(&mut (node, ref mut idx)) = stack.last_mut() {
            let next = adjacency.get(node).and_then(|v| v.get(*idx)).copied();
            *idx += 1;
            match next {
                Some(n) => match color.get(n).copied().unwrap_or(0) {
                    0 => {
                        color.insert(n, 1);
                        stack.push((n, 0));
                    }
                    1 => return Some(n.to_string()),
                    _ => {}
                },
                None => {
                    color.insert(node, 2);
                    stack.pop();
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-layer board with one source and nothing else — the smallest
    /// structurally valid document.
    pub(crate) fn minimal_board() -> Board {
        Board {
            name: "minimal".into(),
            layers: vec![
                Layer { name: "top".into(), kind: LayerKind::ExternalTop, copper_oz: 1.0 },
                Layer { name: "bottom".into(), kind: LayerKind::ExternalBottom, copper_oz: 1.0 },
            ],
            nets: vec![Net {
                name: "HT".into(),
                kind: NetKind::Power,
                nominal_voltage: Some(12.0),
            }],
            copper: vec![CopperFeature {
                id: "p1".into(),
                net: "HT".into(),
                shape: Shape::Pad {
                    layer: "top".into(),
                    at: Point::new(1.0, 1.0),
                    geometry: PadGeometry::Circle { diameter: 2.0 },
                    plated: true,
                    drill: Some(1.0),
                    mask_margin: None,
                },
            }],
            sources: vec![SourceSpec {
                net: "HT".into(),
                pin: "p1".into(),
                voltage: 12.0,
                max_current: Some(20.0),
            }],
            ..Board::default()
        }
    }

    #[test]
    fn minimal_board_validates() {
        assert_eq!(validate_board(&minimal_board()), vec![]);
    }

    #[test]
    fn duplicate_net_caught() {
        let mut board = minimal_board();
        board.nets.push(Net {
            name: "HT".into(),
            kind: NetKind::Power,
            nominal_voltage: Some(12.0),
        });
        let errors = validate_board(&board);
        assert!(errors.contains(&StructuralError::DuplicateNet("HT".into())));
    }

    #[test]
    fn missing_external_layer_caught() {
        let mut board = minimal_board();
        board.layers.remove(1);
        let errors = validate_board(&board);
        assert!(errors
            .iter()
            .any(|e| matches!(e, StructuralError::WrongExternalLayerCount(LayerKind::ExternalBottom, 0))));
    }

    #[test]
    fn via_drill_must_fit() {
        let mut board = minimal_board();
        board.copper.push(CopperFeature {
            id: "v1".into(),
            net: "HT".into(),
            shape: Shape::Via {
                layers: ["top".into(), "bottom".into()],
                at: Point::new(3.0, 3.0),
                drill: 0.9,
                pad_diameter: 0.8,
                tented: false,
            },
        });
        let errors = validate_board(&board);
        assert!(errors.contains(&StructuralError::DrillExceedsPad("v1".into(), 0.9)));
    }

    #[test]
    fn load_on_untouched_net_is_unreachable() {
        let mut board = minimal_board();
        board.nets.push(Net {
            name: "LT".into(),
            kind: NetKind::Power,
            nominal_voltage: Some(5.0),
        });
        board.nets.push(Net { name: "GND".into(), kind: NetKind::Ground, nominal_voltage: None });
        board.copper.push(CopperFeature {
            id: "p2".into(),
            net: "LT".into(),
            shape: Shape::Pad {
                layer: "top".into(),
                at: Point::new(5.0, 5.0),
                geometry: PadGeometry::Circle { diameter: 1.5 },
                plated: true,
                drill: None,
                mask_margin: None,
            },
        });
        board.copper.push(CopperFeature {
            id: "p3".into(),
            net: "GND".into(),
            shape: Shape::Pad {
                layer: "top".into(),
                at: Point::new(6.0, 5.0),
                geometry: PadGeometry::Circle { diameter: 1.5 },
                plated: true,
                drill: None,
                mask_margin: None,
            },
        });
        board.loads.push(LoadSpec {
            ref_des: "U9".into(),
            power_pin: "p2".into(),
            ground_pin: "p3".into(),
            current: 0.5,
            min_voltage: 4.5,
        });
        let errors = validate_board(&board);
        assert!(
            errors.iter().any(|e| matches!(e, StructuralError::UnreachableNet { net, .. } if net == "LT")),
            "expected UnreachableNet, got {errors:?}"
        );
    }

    #[test]
    fn regulator_cycle_caught() {
        let mut board = minimal_board();
        board.nets.push(Net {
            name: "LT".into(),
            kind: NetKind::Power,
            nominal_voltage: Some(5.0),
        });
        for (id, net, x) in [("rp1", "HT", 8.0), ("rp2", "LT", 9.0), ("rp3", "HT", 10.0), ("rp4", "LT", 11.0)] {
            board.copper.push(CopperFeature {
                id: id.into(),
                net: net.into(),
                shape: Shape::Pad {
                    layer: "top".into(),
                    at: Point::new(x, 1.0),
                    geometry: PadGeometry::Circle { diameter: 1.0 },
                    plated: true,
                    drill: None,
                    mask_margin: None,
                },
            });
        }
        board.regulators.push(RegulatorSpec {
            ref_des: "U1".into(),
            input_pin: "rp1".into(),
            output_pin: "rp2".into(),
            ground_pin: "rp1".into(),
            set_voltage: 5.0,
            dropout: 2.0,
            quiescent_current: 0.005,
        });
        board.regulators.push(RegulatorSpec {
            ref_des: "U2".into(),
            input_pin: "rp4".into(),
            output_pin: "rp3".into(),
            ground_pin: "rp4".into(),
            set_voltage: 12.0,
            dropout: 2.0,
            quiescent_current: 0.005,
        });
        let errors = validate_board(&board);
        assert!(errors.iter().any(|e| matches!(e, StructuralError::RegulatorCycle(_))));
    }

    #[test]
    fn pin_reference_resolution() {
        let mut board = minimal_board();
        board.components.push(Component {
            ref_des: "J1".into(),
            pins: vec![Pin { name: "1".into(), pad: "p1".into(), net: "HT".into() }],
        });
        let direct = board.resolve_pin("p1").unwrap();
        assert_eq!(direct.feature.id, "p1");
        let via_pin = board.resolve_pin("J1-1").unwrap();
        assert_eq!(via_pin.feature.id, "p1");
        assert!(board.resolve_pin("J1-2").is_none());
        assert!(board.resolve_pin("nope").is_none());
    }
}
