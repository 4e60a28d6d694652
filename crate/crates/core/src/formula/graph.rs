use std::collections::{BTreeMap, BTreeSet, HashMap};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::Direction;

use crate::a1::CellAddr;
use crate::sheetspec::{CellContent, Workbook};

use super::ast::Expr;
use super::parser::parse_formula;
use super::resolve::{Target, WorkbookIndex};
use super::SyntaxError;

/// A cell identified by sheet index and address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub sheet: usize,
    pub addr: CellAddr,
}

impl CellKey {
    pub fn new(sheet: usize, addr: CellAddr) -> Self {
        Self { sheet, addr }
    }
}

/// Dependency graph over formula cells and the cells they reference.
///
/// Edges run from a referenced cell to the formula that reads it. Range
/// references contribute edges from every non-empty member cell.
#[derive(Debug, Clone)]
pub struct DepGraph {
    graph: DiGraph<CellKey, ()>,
    index: HashMap<CellKey, NodeIndex>,
    cycles: BTreeSet<CellKey>,
    order: Vec<CellKey>,
}

pub(crate) type ParsedFormulas = BTreeMap<CellKey, Result<Expr, SyntaxError>>;

pub(crate) fn parse_all(wb: &Workbook) -> ParsedFormulas {
    wb.cells()
        .filter_map(|(si, c)| match &c.content {
            CellContent::Formula(src) => Some((CellKey::new(si, c.addr), parse_formula(src))),
            _ => None,
        })
        .collect()
}

/// Build the dependency graph of `wb`. Unparseable formulas become isolated nodes.
pub fn build_dependency_graph(wb: &Workbook) -> DepGraph {
    let idx = WorkbookIndex::new(wb);
    DepGraph::build(&idx, &parse_all(wb))
}

impl DepGraph {
    pub(crate) fn build(idx: &WorkbookIndex<'_>, formulas: &ParsedFormulas) -> Self {
        let mut g = DepGraph {
            graph: DiGraph::new(),
            index: HashMap::new(),
            cycles: BTreeSet::new(),
            order: Vec::new(),
        };
        for key in formulas.keys() {
            g.node(*key);
        }
        for (key, parsed) in formulas {
            let Ok(expr) = parsed else { continue };
            let mut refs = BTreeSet::new();
            for t in idx.targets(key.sheet, expr) {
                match t {
                    Target::Cell(s, a) => {
                        refs.insert(CellKey::new(s, a));
                    }
                    Target::Range(r) => {
                        refs.extend(idx.cells_in(&r).map(|a| CellKey::new(r.sheet, a)));
                    }
                    Target::Error(_) => {}
                }
            }
            let to = g.index[key];
            for r in refs {
                let from = g.node(r);
                g.graph.add_edge(from, to, ());
            }
        }

        let sccs = tarjan_scc(&g.graph);
        for scc in &sccs {
            let cyclic = scc.len() > 1 || g.graph.contains_edge(scc[0], scc[0]);
            if cyclic {
                g.cycles.extend(scc.iter().map(|n| g.graph[*n]));
            }
        }
        // tarjan_scc yields components in reverse topological order.
        g.order = sccs
            .iter()
            .rev()
            .flatten()
            .map(|n| g.graph[*n])
            .filter(|k| formulas.contains_key(k) && !g.cycles.contains(k))
            .collect();
        g
    }

    fn node(&mut self, key: CellKey) -> NodeIndex {
        if let Some(n) = self.index.get(&key) {
            return *n;
        }
        let n = self.graph.add_node(key);
        self.index.insert(key, n);
        n
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn contains(&self, key: CellKey) -> bool {
        self.index.contains_key(&key)
    }

    pub fn has_edge(&self, from: CellKey, to: CellKey) -> bool {
        match (self.index.get(&from), self.index.get(&to)) {
            (Some(a), Some(b)) => self.graph.contains_edge(*a, *b),
            _ => false,
        }
    }

    /// All edges `(referenced, dependent)`, sorted.
    pub fn edges(&self) -> Vec<(CellKey, CellKey)> {
        let mut out: Vec<_> = self
            .graph
            .edge_indices()
            .filter_map(|e| self.graph.edge_endpoints(e))
            .map(|(a, b)| (self.graph[a], self.graph[b]))
            .collect();
        out.sort();
        out
    }

    fn neighbors(&self, key: CellKey, dir: Direction) -> Vec<CellKey> {
        let Some(n) = self.index.get(&key) else {
            return Vec::new();
        };
        let mut out: Vec<_> = self
            .graph
            .neighbors_directed(*n, dir)
            .map(|m| self.graph[m])
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Cells that `key` reads.
    pub fn precedents(&self, key: CellKey) -> Vec<CellKey> {
        self.neighbors(key, Direction::Incoming)
    }

    /// Formula cells that read `key`.
    pub fn dependents(&self, key: CellKey) -> Vec<CellKey> {
        self.neighbors(key, Direction::Outgoing)
    }

    /// Cells lying on a reference cycle (including self-references).
    pub fn cycle_cells(&self) -> &BTreeSet<CellKey> {
        &self.cycles
    }

    pub fn in_cycle(&self, key: CellKey) -> bool {
        self.cycles.contains(&key)
    }

    /// Formula cells outside cycles, dependencies first.
    pub fn evaluation_order(&self) -> &[CellKey] {
        &self.order
    }
}
