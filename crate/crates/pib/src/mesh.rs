//! Rasterizing copper into a resistive mesh.
//!
//! Copper regions (polygons, pads, and traces at least one cell wide) are
//! covered with square grid cells; orthogonally adjacent cells on the same
//! net and layer are joined by the square-cell sheet conductance
//! `G = t / rho`, which is independent of cell size — halving the cell
//! halves the per-link conductance squares but doubles the parallel paths.
//!
//! Three refinements keep the mesh physical at feature scale:
//!
//! * **Pads are super-nodes.** A pad merges every cell its footprint covers
//!   into one equipotential node, so attachments inject current across the
//!   pad face instead of into a single point of sheet (point injection has a
//!   logarithmic spreading resistance the grid would otherwise exaggerate).
//! * **Narrow traces are 1-D chains.** A segment thinner than the cell is
//!   modeled as a chain of nodes along its centerline with per-step
//!   conductance `G = w * t / (rho * l)` — exact for uniform flow, which is
//!   all a one-cell-wide strip could represent anyway.
//! * **Vias are barrel conductances** `G = pi * d * t_plating / (rho * l)`
//!   between their pad nodes on the two layers they span.
//!
//! Everything is assembled in board order with sorted cell iteration, so the
//! graph (node ids, edge order) is identical from run to run.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::board::{Board, CopperFeature, Shape};
use crate::geom::{self, Point};
use crate::units::COPPER_RESISTIVITY_OHM_M;

/// Default rasterization pitch in millimetres.
pub const DEFAULT_CELL_SIZE_MM: f64 = 0.5;

/// Default finished-board thickness, used as via barrel length.
pub const DEFAULT_BOARD_THICKNESS_MM: f64 = 1.6;

/// Default via barrel plating thickness.
pub const DEFAULT_VIA_PLATING_UM: f64 = 25.0;

/// Knobs for [`rasterize_with`]. [`rasterize`] uses the defaults plus a
/// caller-chosen cell size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub cell_size_mm: f64,
    pub board_thickness_mm: f64,
    pub via_plating_um: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            cell_size_mm: DEFAULT_CELL_SIZE_MM,
            board_thickness_mm: DEFAULT_BOARD_THICKNESS_MM,
            via_plating_um: DEFAULT_VIA_PLATING_UM,
        }
    }
}

/// Mesh construction errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("cell size must be positive, got {0} mm")]
    NonPositiveCellSize(f64),
    #[error("copper `{0}` references unknown layer `{1}`")]
    UnknownLayer(String, String),
    #[error("copper `{0}` references unknown net `{1}`")]
    UnknownNet(String, String),
}

/// One node of the conductance graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeInfo {
    pub layer: usize,
    pub net: usize,
    /// Representative position: cell center, pad center, or chain point.
    pub pos: Point,
}

/// How an edge came to exist; drives current-density attribution.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeKind {
    /// Link between two orthogonally adjacent sheet cells.
    Lattice { layer: usize, cell_a: (i64, i64), cell_b: (i64, i64) },
    /// One step of a narrow-trace chain, with the cells its span crosses.
    Chain { layer: usize, width_mm: f64, cells: Vec<(i64, i64)> },
    /// Via barrel between layers.
    Barrel,
}

/// A conductance between two nodes, in siemens.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub conductance: f64,
    pub kind: EdgeKind,
}

/// A sheet cell bound to its (possibly merged) node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellBinding {
    pub layer: usize,
    pub net: usize,
    pub i: i64,
    pub j: i64,
    pub node: usize,
}

/// Where a segment's copper went, for per-feature current attribution.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentSites {
    /// Indices into `edges` of the chain steps of a narrow segment.
    ChainEdges(Vec<usize>),
    /// Sheet cells of a wide segment (layer, i, j).
    Cells(Vec<(usize, i64, i64)>),
}

/// Copper layer summary carried by the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerMeta {
    pub name: String,
    pub thickness_um: f64,
}

/// The assembled resistive network.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceGraph {
    pub cell_size_mm: f64,
    pub layers: Vec<LayerMeta>,
    pub nets: Vec<String>,
    pub nodes: Vec<NodeInfo>,
    pub edges: Vec<Edge>,
    /// Pad feature id -> merged node.
    pub pad_nodes: BTreeMap<String, usize>,
    /// Via feature id -> (node on first layer, node on second layer).
    pub via_nodes: BTreeMap<String, (usize, usize)>,
    /// All sheet cells in deterministic order.
    pub cells: Vec<CellBinding>,
    /// Segment feature id -> where its copper lives.
    pub segment_sites: BTreeMap<String, SegmentSites>,
}

impl ConductanceGraph {
    /// Connected components over edges. Returns (island id per node, count).
    /// Island ids are dense and deterministic (ordered by lowest node id).
    pub fn islands(&self) -> (Vec<usize>, usize) {
        let mut dsu = Dsu::new(self.nodes.len());
        for edge in &self.edges {
            dsu.union(edge.a, edge.b);
        }
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut ids = vec![0usize; self.nodes.len()];
        for node in 0..self.nodes.len() {
            let root = dsu.find(node);
            let next = remap.len();
            let id = *remap.entry(root).or_insert(next);
            ids[node] = id;
        }
        (ids, remap.len())
    }

    /// Undirected adjacency list: node -> (neighbor, conductance).
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for edge in &self.edges {
            adj[edge.a].push((edge.b, edge.conductance));
            adj[edge.b].push((edge.a, edge.conductance));
        }
        adj
    }
}

/// Plain union-find with path halving.
struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins: keeps ids stable under feature reordering.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Rasterize at the given cell size with default stackup options.
pub fn rasterize(board: &Board, cell_size_mm: f64) -> Result<ConductanceGraph, MeshError> {
    rasterize_with(board, &MeshOptions { cell_size_mm, ..MeshOptions::default() })
}

/// Key of a sheet cell slot.
type CellKey = (usize, usize, i64, i64); // layer, net, i, j

/// Key of a chain point slot, with coordinates quantized to 1e-6 mm so
/// coincident endpoints of different traces land on the same node.
type PointKey = (usize, usize, i64, i64);

fn quantize(v: f64) -> i64 {
    (v * 1e6).round() as i64
}

/// Slot graph under construction: slots are provisional nodes that the
/// union-find collapses (pad merges, chain-on-copper merges) before final
/// node ids are assigned.
struct Builder<'a> {
    board: &'a Board,
    opts: MeshOptions,
    layer_idx: HashMap<&'a str, usize>,
    net_idx: HashMap<&'a str, usize>,
    slots: Vec<(usize, usize, Point)>, // layer, net, pos
    dsu: Dsu,
    cell_slots: HashMap<CellKey, usize>,
    point_slots: HashMap<PointKey, usize>,
}

impl<'a> Builder<'a> {
    fn slot(&mut self, layer: usize, net: usize, pos: Point) -> usize {
        self.slots.push((layer, net, pos));
        self.dsu.parent.push(self.slots.len() - 1);
        self.slots.len() - 1
    }

    fn cell_slot(&mut self, layer: usize, net: usize, i: i64, j: i64) -> usize {
        if let Some(&s) = self.cell_slots.get(&(layer, net, i, j)) {
            return s;
        }
        let s = self.opts.cell_size_mm;
        let pos = Point::new((i as f64 + 0.5) * s, (j as f64 + 0.5) * s);
        let slot = self.slot(layer, net, pos);
        self.cell_slots.insert((layer, net, i, j), slot);
        slot
    }

    fn point_slot(&mut self, layer: usize, net: usize, p: Point) -> usize {
        let key = (layer, net, quantize(p.x), quantize(p.y));
        if let Some(&s) = self.point_slots.get(&key) {
            return s;
        }
        let slot = self.slot(layer, net, p);
        self.point_slots.insert(key, slot);
        slot
    }

    fn cell_of(&self, p: Point) -> (i64, i64) {
        let s = self.opts.cell_size_mm;
        ((p.x / s).floor() as i64, (p.y / s).floor() as i64)
    }

    /// Cells whose centers the shape covers, in sorted order.
    fn covered_cells(&self, shape: &Shape) -> BTreeSet<(i64, i64)> {
        let s = self.opts.cell_size_mm;
        let (min, max) = shape.bbox();
        let (i0, j0) = ((min.x / s).floor() as i64, (min.y / s).floor() as i64);
        let (i1, j1) = ((max.x / s).floor() as i64, (max.y / s).floor() as i64);
        let mut cells = BTreeSet::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                let center = Point::new((i as f64 + 0.5) * s, (j as f64 + 0.5) * s);
                if shape.covers_point(center) {
                    cells.insert((i, j));
                }
            }
        }
        cells
    }
}

/// Rasterize the board's copper into a conductance graph.
pub fn rasterize_with(board: &Board, opts: &MeshOptions) -> Result<ConductanceGraph, MeshError> {
    if !(opts.cell_size_mm > 0.0) {
        return Err(MeshError::NonPositiveCellSize(opts.cell_size_mm));
    }
    let layer_idx: HashMap<&str, usize> =
        board.layers.iter().enumerate().map(|(i, l)| (l.name.as_str(), i)).collect();
    let net_idx: HashMap<&str, usize> =
        board.nets.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();

    let mut b = Builder {
        board,
        opts: *opts,
        layer_idx,
        net_idx,
        slots: Vec::new(),
        dsu: Dsu::new(0),
        cell_slots: HashMap::new(),
        point_slots: HashMap::new(),
    };

    let rho = COPPER_RESISTIVITY_OHM_M;
    let thickness_m =
        |layer: usize| board.layers[layer].thickness_um() * 1e-6;

    // Resolve feature layer/net up front so errors carry the feature id.
    let mut resolved: Vec<(usize, Vec<usize>)> = Vec::new(); // net, layers
    for feature in &board.copper {
        let net = *b
            .net_idx
            .get(feature.net.as_str())
            .ok_or_else(|| MeshError::UnknownNet(feature.id.clone(), feature.net.clone()))?;
        let mut layers = Vec::new();
        for name in feature.shape.layers() {
            let layer = *b
                .layer_idx
                .get(name)
                .ok_or_else(|| MeshError::UnknownLayer(feature.id.clone(), name.to_string()))?;
            layers.push(layer);
        }
        resolved.push((net, layers));
    }

    let is_narrow = |shape: &Shape| -> bool {
        matches!(shape, Shape::Segment { width, .. } if *width < opts.cell_size_mm)
    };

    // Pass 1: sheet cells for polygons, wide segments, pads and via pads.
    // Pads and vias get a super-node slot that swallows their cells.
    let mut pad_slot: BTreeMap<String, usize> = BTreeMap::new();
    let mut via_slot: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut segment_cells: BTreeMap<String, Vec<(usize, i64, i64)>> = BTreeMap::new();

    for (feature, (net, layers)) in board.copper.iter().zip(&resolved) {
        match &feature.shape {
            Shape::Segment { .. } if is_narrow(&feature.shape) => {} // pass 2
            Shape::Segment { .. } | Shape::Polygon { .. } => {
                let layer = layers[0];
                let cells = b.covered_cells(&feature.shape);
                if let Shape::Segment { .. } = feature.shape {
                    segment_cells.insert(
                        feature.id.clone(),
                        cells.iter().map(|&(i, j)| (layer, i, j)).collect(),
                    );
                }
                for (i, j) in cells {
                    b.cell_slot(layer, *net, i, j);
                }
            }
            Shape::Pad { at, .. } => {
                let layer = layers[0];
                let super_slot = b.slot(layer, *net, *at);
                for (i, j) in b.covered_cells(&feature.shape) {
                    let cell = b.cell_slot(layer, *net, i, j);
                    b.dsu.union(super_slot, cell);
                }
                // Tie into copper underneath even when the footprint covers
                // no cell center.
                let (ci, cj) = b.cell_of(*at);
                if let Some(&cell) = b.cell_slots.get(&(layer, *net, ci, cj)) {
                    b.dsu.union(super_slot, cell);
                }
                pad_slot.insert(feature.id.clone(), super_slot);
            }
            Shape::Via { at, .. } => {
                let mut per_layer = [usize::MAX; 2];
                for (k, &layer) in layers.iter().enumerate() {
                    let super_slot = b.slot(layer, *net, *at);
                    for (i, j) in b.covered_cells(&feature.shape) {
                        let cell = b.cell_slot(layer, *net, i, j);
                        b.dsu.union(super_slot, cell);
                    }
                    let (ci, cj) = b.cell_of(*at);
                    if let Some(&cell) = b.cell_slots.get(&(layer, *net, ci, cj)) {
                        b.dsu.union(super_slot, cell);
                    }
                    per_layer[k] = super_slot;
                }
                via_slot.insert(feature.id.clone(), (per_layer[0], per_layer[1]));
            }
        }
    }

    // Pass 1b: second sweep so pads also catch cells created by features
    // that appear after them in board order.
    for (feature, (net, layers)) in board.copper.iter().zip(&resolved) {
        match &feature.shape {
            Shape::Pad { at, .. } => {
                let layer = layers[0];
                let super_slot = pad_slot[&feature.id];
                for (i, j) in b.covered_cells(&feature.shape) {
                    if let Some(&cell) = b.cell_slots.get(&(layer, *net, i, j)) {
                        b.dsu.union(super_slot, cell);
                    }
                }
                let (ci, cj) = b.cell_of(*at);
                if let Some(&cell) = b.cell_slots.get(&(layer, *net, ci, cj)) {
                    b.dsu.union(super_slot, cell);
                }
            }
            Shape::Via { at, .. } => {
                let (sa, sb) = via_slot[&feature.id];
                for (k, &layer) in layers.iter().enumerate() {
                    let super_slot = [sa, sb][k];
                    for (i, j) in b.covered_cells(&feature.shape) {
                        if let Some(&cell) = b.cell_slots.get(&(layer, *net, i, j)) {
                            b.dsu.union(super_slot, cell);
                        }
                    }
                    let (ci, cj) = b.cell_of(*at);
                    if let Some(&cell) = b.cell_slots.get(&(layer, *net, ci, cj)) {
                        b.dsu.union(super_slot, cell);
                    }
                }
            }
            _ => {}
        }
    }

    // Pass 2: narrow segments as chains. Endpoints of sibling narrow traces
    // that land mid-span become chain nodes, so tee junctions connect.
    struct ChainPlan {
        feature: usize,
        layer: usize,
        net: usize,
        width: f64,
        points: Vec<Point>,
    }
    let mut chains: Vec<ChainPlan> = Vec::new();
    for (fi, (feature, (net, layers))) in board.copper.iter().zip(&resolved).enumerate() {
        let Shape::Segment { start, end, width, .. } = &feature.shape else { continue };
        if !is_narrow(&feature.shape) {
            continue;
        }
        let layer = layers[0];
        let length = start.distance(*end);
        let mut ts: Vec<f64> = vec![0.0, 1.0];
        // Natural subdivision at roughly one node per cell.
        let steps = (length / opts.cell_size_mm).ceil().max(1.0) as usize;
        for k in 1..steps {
            ts.push(k as f64 / steps as f64);
        }
        // Tee junctions: other narrow traces' endpoints on this centerline.
        for (oi, (other, (onet, olayers))) in board.copper.iter().zip(&resolved).enumerate() {
            if oi == fi || onet != net {
                continue;
            }
            let Shape::Segment { start: os, end: oe, .. } = &other.shape else { continue };
            if !is_narrow(&other.shape) || olayers[0] != layer {
                continue;
            }
            for p in [os, oe] {
                if geom::point_segment_distance(*p, *start, *end) <= 1e-6 && length > 0.0 {
                    ts.push(geom::project_on_segment(*p, *start, *end).clamp(0.0, 1.0));
                }
            }
        }
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ts.dedup_by(|x, y| (*x - *y).abs() * length < 1e-9);
        let points = ts
            .iter()
            .map(|t| Point::new(start.x + t * (end.x - start.x), start.y + t * (end.y - start.y)))
            .collect();
        chains.push(ChainPlan { feature: fi, layer, net: *net, width: *width, points });
    }

    // Materialize chain slots and merge them with copper they rest on.
    let mut chain_slots: Vec<Vec<usize>> = Vec::new();
    for plan in &chains {
        let mut slots = Vec::with_capacity(plan.points.len());
        for &p in &plan.points {
            let slot = b.point_slot(plan.layer, plan.net, p);
            // Merge with an underlying sheet cell, if the point rests on one.
            let (ci, cj) = b.cell_of(p);
            if let Some(&cell) = b.cell_slots.get(&(plan.layer, plan.net, ci, cj)) {
                b.dsu.union(slot, cell);
            }
            slots.push(slot);
        }
        chain_slots.push(slots);
    }
    // Chain endpoints inside a pad footprint bond to the pad even when the
    // pad owns no cells.
    for (plan, slots) in chains.iter().zip(&chain_slots) {
        for (feature, (net, layers)) in board.copper.iter().zip(&resolved) {
            match &feature.shape {
                Shape::Pad { .. } if *net == plan.net && layers[0] == plan.layer => {
                    let super_slot = pad_slot[&feature.id];
                    for (k, &p) in plan.points.iter().enumerate() {
                        if feature.shape.covers_point(p) {
                            b.dsu.union(slots[k], super_slot);
                        }
                    }
                }
                _ => {}
            }
        }
    }

    // Final node ids: slot roots in first-appearance order.
    let mut root_to_node: HashMap<usize, usize> = HashMap::new();
    let mut nodes: Vec<NodeInfo> = Vec::new();
    let slot_count = b.slots.len();
    let mut node_of_slot = vec![usize::MAX; slot_count];
    for slot in 0..slot_count {
        let root = b.dsu.find(slot);
        let node = *root_to_node.entry(root).or_insert_with(|| {
            let (layer, net, pos) = b.slots[root];
            nodes.push(NodeInfo { layer, net, pos });
            nodes.len() - 1
        });
        node_of_slot[slot] = node;
    }

    // Edges. Lattice links first, in sorted cell order.
    let mut edges: Vec<Edge> = Vec::new();
    let mut sorted_cells: Vec<(CellKey, usize)> =
        b.cell_slots.iter().map(|(&k, &v)| (k, v)).collect();
    sorted_cells.sort_unstable_by_key(|&(k, _)| k);
    for &((layer, net, i, j), slot) in &sorted_cells {
        let g_sheet = thickness_m(layer) / rho;
        for (ni, nj) in [(i + 1, j), (i, j + 1)] {
            if let Some(&other) = b.cell_slots.get(&(layer, net, ni, nj)) {
                let (a, bnode) = (node_of_slot[slot], node_of_slot[other]);
                if a != bnode {
                    edges.push(Edge {
                        a,
                        b: bnode,
                        conductance: g_sheet,
                        kind: EdgeKind::Lattice { layer, cell_a: (i, j), cell_b: (ni, nj) },
                    });
                }
            }
        }
    }

    // Chain step edges.
    let mut segment_sites = segment_cells
        .into_iter()
        .map(|(id, cells)| (id, SegmentSites::Cells(cells)))
        .collect::<BTreeMap<_, _>>();
    for (plan, slots) in chains.iter().zip(&chain_slots) {
        let t_m = thickness_m(plan.layer);
        let w_m = plan.width * 1e-3;
        let mut edge_ids = Vec::new();
        for k in 0..slots.len().saturating_sub(1) {
            let (p, q) = (plan.points[k], plan.points[k + 1]);
            let len_m = p.distance(q) * 1e-3;
            if len_m <= 0.0 {
                continue;
            }
            let (a, bnode) = (node_of_slot[slots[k]], node_of_slot[slots[k + 1]]);
            if a == bnode {
                continue;
            }
            // Cells the step crosses, for the heat map.
            let mut cells = Vec::new();
            let samples = ((p.distance(q) / opts.cell_size_mm) * 4.0).ceil().max(1.0) as usize;
            for s in 0..=samples {
                let t = s as f64 / samples as f64;
                let c = b.cell_of(Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
                if cells.last() != Some(&c) {
                    cells.push(c);
                }
            }
            edges.push(Edge {
                a,
                b: bnode,
                conductance: w_m * t_m / (rho * len_m),
                kind: EdgeKind::Chain { layer: plan.layer, width_mm: plan.width, cells },
            });
            edge_ids.push(edges.len() - 1);
        }
        segment_sites.insert(
            board.copper[plan.feature].id.clone(),
            SegmentSites::ChainEdges(edge_ids),
        );
    }

    // Via barrels.
    let mut via_nodes = BTreeMap::new();
    for (feature, (_, _)) in board.copper.iter().zip(&resolved) {
        let Shape::Via { drill, .. } = &feature.shape else { continue };
        let (sa, sb) = via_slot[&feature.id];
        let (a, bnode) = (node_of_slot[sa], node_of_slot[sb]);
        via_nodes.insert(feature.id.clone(), (a, bnode));
        if a == bnode {
            continue;
        }
        let d_m = drill * 1e-3;
        let t_m = opts.via_plating_um * 1e-6;
        let l_m = opts.board_thickness_mm * 1e-3;
        edges.push(Edge {
            a,
            b: bnode,
            conductance: std::f64::consts::PI * d_m * t_m / (rho * l_m),
            kind: EdgeKind::Barrel,
        });
    }

    let pad_nodes =
        pad_slot.into_iter().map(|(id, slot)| (id, node_of_slot[slot])).collect();

    let mut cells: Vec<CellBinding> = sorted_cells
        .iter()
        .map(|&((layer, net, i, j), slot)| CellBinding {
            layer,
            net,
            i,
            j,
            node: node_of_slot[slot],
        })
        .collect();
    cells.sort_unstable();

    Ok(ConductanceGraph {
        cell_size_mm: opts.cell_size_mm,
        layers: board
            .layers
            .iter()
            .map(|l| LayerMeta { name: l.name.clone(), thickness_um: l.thickness_um() })
            .collect(),
        nets: board.nets.iter().map(|n| n.name.clone()).collect(),
        nodes,
        edges,
        pad_nodes,
        via_nodes,
        cells,
        segment_sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{CopperFeature, Layer, LayerKind, Net, NetKind, PadGeometry};
    use crate::units::oz_to_um;

    fn board_2layer(copper: Vec<CopperFeature>) -> Board {
        Board {
            name: "mesh-test".into(),
            layers: vec![
                Layer { name: "top".into(), kind: LayerKind::ExternalTop, copper_oz: 1.0 },
                Layer { name: "bottom".into(), kind: LayerKind::ExternalBottom, copper_oz: 1.0 },
            ],
            nets: vec![Net { name: "N1".into(), kind: NetKind::Power, nominal_voltage: Some(5.0) }],
            copper,
            ..Board::default()
        }
    }

    fn square_polygon(id: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> CopperFeature {
        CopperFeature {
            id: id.into(),
            net: "N1".into(),
            shape: Shape::Polygon {
                layer: "top".into(),
                vertices: vec![
                    Point::new(x0, y0),
                    Point::new(x1, y0),
                    Point::new(x1, y1),
                    Point::new(x0, y1),
                ],
            },
        }
    }

    #[test]
    fn square_sheet_cell_and_edge_count() {
        let board = board_2layer(vec![square_polygon("p", 0.0, 0.0, 10.0, 10.0)]);
        let graph = rasterize(&board, 1.0).unwrap();
        assert_eq!(graph.nodes.len(), 100);
        // 10 rows x 9 links, both directions.
        assert_eq!(graph.edges.len(), 180);
        let g_expected = oz_to_um(1.0) * 1e-6 / COPPER_RESISTIVITY_OHM_M;
        for edge in &graph.edges {
            assert!((edge.conductance - g_expected).abs() < 1e-9 * g_expected);
        }
    }

    #[test]
    fn lattice_conductance_is_cell_size_independent() {
        let board = board_2layer(vec![square_polygon("p", 0.0, 0.0, 10.0, 10.0)]);
        let coarse = rasterize(&board, 1.0).unwrap();
        let fine = rasterize(&board, 0.5).unwrap();
        assert!((coarse.edges[0].conductance - fine.edges[0].conductance).abs() < 1e-12);
        assert_eq!(fine.nodes.len(), 400);
    }

    #[test]
    fn pad_merges_covered_cells() {
        let pad = CopperFeature {
            id: "pad1".into(),
            net: "N1".into(),
            shape: Shape::Pad {
                layer: "top".into(),
                at: Point::new(5.0, 5.0),
                geometry: PadGeometry::Circle { diameter: 3.0 },
                plated: true,
                drill: None,
                mask_margin: None,
            },
        };
        let board = board_2layer(vec![square_polygon("p", 0.0, 0.0, 10.0, 10.0), pad]);
        let graph = rasterize(&board, 1.0).unwrap();
        // The 3 mm pad covers a plus-shaped patch of 1 mm cell centers
        // (distance from (5,5) to center <= 1.5): positions within radius.
        let merged: Vec<_> = graph
            .cells
            .iter()
            .filter(|c| c.node == graph.pad_nodes["pad1"])
            .collect();
        assert!(merged.len() >= 5, "pad should swallow several cells, got {}", merged.len());
        assert_eq!(graph.nodes.len(), 100 - merged.len() + 1);
    }

    #[test]
    fn narrow_segment_becomes_chain() {
        let seg = CopperFeature {
            id: "t1".into(),
            net: "N1".into(),
            shape: Shape::Segment {
                layer: "top".into(),
                start: Point::new(0.0, 0.0),
                end: Point::new(10.0, 0.0),
                width: 0.3,
            },
        };
        let board = board_2layer(vec![seg]);
        let graph = rasterize(&board, 0.5).unwrap();
        // 20 steps, 21 nodes.
        assert_eq!(graph.nodes.len(), 21);
        assert_eq!(graph.edges.len(), 20);
        let t_m = oz_to_um(1.0) * 1e-6;
        let g_expected = 0.3e-3 * t_m / (COPPER_RESISTIVITY_OHM_M * 0.5e-3);
        for edge in &graph.edges {
            assert!((edge.conductance - g_expected).abs() < 1e-9 * g_expected);
            assert!(matches!(edge.kind, EdgeKind::Chain { .. }));
        }
    }

    #[test]
    fn chain_end_to_end_conductance_matches_formula() {
        // Series chain: R_total = rho * L / (w * t), independent of steps.
        let seg = CopperFeature {
            id: "t1".into(),
            net: "N1".into(),
            shape: Shape::Segment {
                layer: "top".into(),
                start: Point::new(0.0, 0.0),
                end: Point::new(10.0, 0.0),
                width: 0.3,
            },
        };
        let board = board_2layer(vec![seg]);
        let graph = rasterize(&board, 0.5).unwrap();
        let r_total: f64 = graph.edges.iter().map(|e| 1.0 / e.conductance).sum();
        let t_m = oz_to_um(1.0) * 1e-6;
        let expected = COPPER_RESISTIVITY_OHM_M * 10.0e-3 / (0.3e-3 * t_m);
        assert!((r_total - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn tee_junction_connects_chains() {
        let mk = |id: &str, s: Point, e: Point| CopperFeature {
            id: id.into(),
            net: "N1".into(),
            shape: Shape::Segment { layer: "top".into(), start: s, end: e, width: 0.2 },
        };
        let board = board_2layer(vec![
            mk("bar", Point::new(0.0, 0.0), Point::new(10.0, 0.0)),
            // Tee lands mid-span of `bar`, away from its natural nodes.
            mk("stem", Point::new(3.3, 0.0), Point::new(3.3, 5.0)),
        ]);
        let graph = rasterize(&board, 1.0).unwrap();
        let (islands, count) = graph.islands();
        assert_eq!(count, 1, "tee junction must join the traces");
        assert!(islands.iter().all(|&i| i == 0));
    }

    #[test]
    fn via_joins_layers() {
        let top = square_polygon("pt", 0.0, 0.0, 4.0, 4.0);
        let mut bottom = square_polygon("pb", 0.0, 0.0, 4.0, 4.0);
        if let Shape::Polygon { layer, .. } = &mut bottom.shape {
            *layer = "bottom".into();
        }
        let via = CopperFeature {
            id: "v1".into(),
            net: "N1".into(),
            shape: Shape::Via {
                layers: ["top".into(), "bottom".into()],
                at: Point::new(2.0, 2.0),
                drill: 0.6,
                pad_diameter: 1.2,
                tented: false,
            },
        };
        let board = board_2layer(vec![top, bottom, via]);
        let graph = rasterize(&board, 1.0).unwrap();
        let (_, count) = graph.islands();
        assert_eq!(count, 1);
        let barrel = graph
            .edges
            .iter()
            .find(|e| matches!(e.kind, EdgeKind::Barrel))
            .expect("via should produce a barrel edge");
        // G = pi * d * t / (rho * l)
        let expected = std::f64::consts::PI * 0.6e-3 * 25e-6
            / (COPPER_RESISTIVITY_OHM_M * 1.6e-3);
        assert!((barrel.conductance - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn disjoint_nets_never_connect() {
        let mut board = board_2layer(vec![square_polygon("a", 0.0, 0.0, 4.0, 4.0)]);
        board.nets.push(Net { name: "N2".into(), kind: NetKind::Signal, nominal_voltage: None });
        // Overlapping copper on a different net: same cells, separate nodes.
        let mut other = square_polygon("b", 2.0, 0.0, 6.0, 4.0);
        other.net = "N2".into();
        board.copper.push(other);
        let graph = rasterize(&board, 1.0).unwrap();
        let (_, count) = graph.islands();
        assert_eq!(count, 2);
    }

    #[test]
    fn zero_cell_size_rejected() {
        let board = board_2layer(vec![]);
        assert!(matches!(
            rasterize(&board, 0.0),
            Err(MeshError::NonPositiveCellSize(_))
        ));
    }

    #[test]
    fn deterministic_assembly() {
        let board = board_2layer(vec![
            square_polygon("p", 0.0, 0.0, 8.0, 8.0),
            CopperFeature {
                id: "t1".into(),
                net: "N1".into(),
                shape: Shape::Segment {
                    layer: "top".into(),
                    start: Point::new(8.0, 4.0),
                    end: Point::new(15.0, 4.0),
                    width: 0.3,
                },
            },
        ]);
        let g1 = rasterize(&board, 0.5).unwrap();
        let g2 = rasterize(&board, 0.5).unwrap();
        assert_eq!(g1, g2);
    }
}
