//! The compile pipeline: validate, map, convert, check rates, allocate FIFOs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::buffer::{
    apply_overrides, solve_buffers, BufEdge, BufNode, BufferError, BufferProblem, BufferSolution,
};
use crate::design::Design;
use crate::frontend::ast::Program;
use crate::frontend::validate::{validate_graph, Diagnostic};
use crate::frontend::{parse_pipeline, FrontendError};
use crate::mapper::convert::{check_interfaces, insert_conversions, ConvertError};
use crate::mapper::{map_program, MapError};
use crate::sdf::{propagate_rates, SdfError};
use crate::types::Rate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("{0}")]
    Parse(#[from] FrontendError),
    #[error("invalid pipeline:\n{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Map(#[from] MapError),
    #[error("manual FIFO override names unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("internal: {0}")]
    Convert(#[from] ConvertError),
    #[error("internal: {0}")]
    Sdf(#[from] SdfError),
    #[error("internal: {0}")]
    Buffer(#[from] BufferError),
    #[error("internal: interface mismatch after conversion:\n{}", .0.join("\n"))]
    Interfaces(Vec<String>),
    #[error("internal: edge {edge} annotated at rate {annotated} but dataflow gives {propagated}")]
    RateMismatch {
        edge: String,
        annotated: Rate,
        propagated: Rate,
    },
}

impl CompileError {
    /// Whether the error reveals a compiler bug rather than a user problem.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            CompileError::Convert(_)
                | CompileError::Sdf(_)
                | CompileError::Buffer(_)
                | CompileError::Interfaces(_)
                | CompileError::RateMismatch { .. }
        )
    }
}

#[derive(Debug, Clone)]
pub struct CompileOptions {
    /// Input pixels per cycle.
    pub throughput: Rate,
    /// FIFO depths forced on edges named `eN` or `producer->consumer`.
    pub manual_fifo: BTreeMap<String, u64>,
}

impl CompileOptions {
    pub fn at(throughput: Rate) -> CompileOptions {
        CompileOptions {
            throughput,
            manual_fifo: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub design: Design,
    pub explain: Vec<String>,
    pub notes: Vec<String>,
    pub buffers: BufferSolution,
    pub conversions: usize,
}

/// Buffer allocation problem of a design: one node per instance, rooted at
/// the source, one weighted arc per edge.
pub fn buffer_problem(d: &Design) -> BufferProblem {
    BufferProblem {
        nodes: d
            .instances
            .iter()
            .map(|i| BufNode {
                latency: i.latency,
                burst: i.burst,
            })
            .collect(),
        edges: d
            .edges
            .iter()
            .map(|e| BufEdge {
                from: e.from.inst,
                to: e.to.inst,
                bits: e.bits,
            })
            .collect(),
        root: d.source(),
    }
}

fn resolve_edge(d: &Design, key: &str) -> Option<usize> {
    if let Some(n) = key.strip_prefix('e').and_then(|n| n.parse::<usize>().ok()) {
        if n < d.edges.len() {
            return Some(n);
        }
    }
    (0..d.edges.len()).find(|&k| d.edge_label(k) == key)
}

/// Solves FIFO depths and start delays and writes them into the design.
pub fn assign_buffers(
    d: &mut Design,
    manual: &BTreeMap<String, u64>,
) -> Result<BufferSolution, CompileError> {
    let p = buffer_problem(d);
    let mut sol = solve_buffers(&p)?;
    let mut overrides = BTreeMap::new();
    for (k, &v) in manual {
        let e = resolve_edge(d, k).ok_or_else(|| CompileError::UnknownEdge(k.clone()))?;
        overrides.insert(e, v);
    }
    apply_overrides(&p, &mut sol, &overrides)?;
    for (e, &depth) in d.edges.iter_mut().zip(&sol.depth) {
        e.depth = depth;
    }
    for (i, &s) in d.instances.iter_mut().zip(&sol.start) {
        i.start = s;
    }
    d.latency_total = sol.start[d.sink()];
    Ok(sol)
}

/// Checks annotated edge rates against dataflow propagation from the input.
pub fn check_rates(d: &Design) -> Result<(), CompileError> {
    let src = d.source();
    let r0 = d.instances[src].outputs[0].rate;
    let rates = propagate_rates(d, r0)?;
    for (k, e) in d.edges.iter().enumerate() {
        if let Some(&r) = rates.get(&k) {
            if r != e.iface.rate {
                return Err(CompileError::RateMismatch {
                    edge: d.edge_label(k),
                    annotated: e.iface.rate,
                    propagated: r,
                });
            }
        }
    }
    Ok(())
}

pub fn compile(prog: &Program, opts: &CompileOptions) -> Result<Compiled, CompileError> {
    let diags = validate_graph(prog);
    if !diags.is_empty() {
        return Err(CompileError::Invalid(diags));
    }
    let mapped = map_program(prog, opts.throughput)?;
    let mut design = mapped.design;
    let conversions = insert_conversions(&mut design)?;
    let errs = check_interfaces(&design);
    if !errs.is_empty() {
        return Err(CompileError::Interfaces(errs));
    }
    check_rates(&design)?;
    let buffers = assign_buffers(&mut design, &opts.manual_fifo)?;
    Ok(Compiled {
        design,
        explain: mapped.explain,
        notes: mapped.notes,
        buffers,
        conversions,
    })
}

pub fn compile_source(src: &str, opts: &CompileOptions) -> Result<Compiled, CompileError> {
    let prog = parse_pipeline(src)?;
    compile(&prog, opts)
}
