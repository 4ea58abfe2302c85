//! Build phase: turn a machine into a network by depth-first exploration of
//! configurations, starting from every output configuration.
//!
//! Configurations are memoised, so each distinct configuration becomes one
//! node. A link to a configuration that is still on the current exploration
//! path would close a cycle and is dropped. Link weights and node biases are
//! the sums of the differentials of the instructions that produced them.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{
    apply_instruction, decode_index, instruction_matches, output_config_for, row_major_coords,
    Configuration, Flavor, GateType, IndexSide, MachineSpec, StateId, TapeSpec,
};
use crate::network::{Link, Network, Node, NodeId, NodeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnExceed {
    /// Stop building and keep the partial network.
    Stop,
    /// Abort with [`Error::Limit`].
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitKind {
    Nodes,
    Depth,
    Fanout,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitKind::Nodes => "node",
            LimitKind::Depth => "depth",
            LimitKind::Fanout => "fanout",
        })
    }
}

/// Resource limits checked while building. `None` means unlimited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_nodes: Option<usize>,
    pub max_depth: Option<usize>,
    /// Maximum number of outgoing links (gate inputs) on any node.
    pub max_fanout: Option<usize>,
    pub on_exceed: OnExceed,
}

impl Default for Limits {
    fn default() -> Self {
        Limits::unlimited()
    }
}

impl Limits {
    pub fn unlimited() -> Limits {
        Limits {
            max_nodes: None,
            max_depth: None,
            max_fanout: None,
            on_exceed: OnExceed::Stop,
        }
    }

    pub fn nodes(max: usize, on_exceed: OnExceed) -> Limits {
        Limits {
            max_nodes: Some(max),
            on_exceed,
            ..Limits::unlimited()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub nodes: usize,
    pub links: usize,
    pub skipped_cycle_links: usize,
    /// The limit that ended the build, if any.
    pub limit_hit: Option<LimitKind>,
}

impl fmt::Display for BuildReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} nodes, {} links, {} cycle links skipped",
            self.nodes, self.links, self.skipped_cycle_links
        )?;
        if let Some(k) = self.limit_hit {
            write!(f, ", stopped at {k} limit")?;
        }
        Ok(())
    }
}

/// Where a transition leads.
#[derive(Clone, Debug)]
pub(crate) enum Target {
    Config(Configuration),
    Constant(bool),
}

/// One candidate link produced by a matching rule or instruction.
#[derive(Clone, Debug)]
pub(crate) struct Step {
    pub target: Target,
    pub dw: i64,
    pub db: i64,
    /// Program index of the instruction (or rule) that produced the step.
    pub origin: usize,
}

/// What a configuration turns into.
pub(crate) enum Class {
    Leaf(NodeKind),
    Interior(Option<GateType>),
}

/// A machine that can be explored configuration by configuration.
pub(crate) trait Explore {
    fn flavor(&self) -> Flavor;
    fn tapes(&self) -> &[TapeSpec];
    fn classify(&self, config: &Configuration) -> Class;
    fn successors(&self, config: &Configuration, out: &mut Vec<Step>);
}

/// Leaf kind for a configuration reading the input at its decoded coordinates.
pub(crate) fn input_leaf(
    tapes: &[TapeSpec],
    config: &Configuration,
    inverted: Option<bool>,
) -> NodeKind {
    let coords = decode_index(tapes, config, IndexSide::Input);
    let in_range = tapes
        .iter()
        .filter(|t| t.role.addresses(IndexSide::Input))
        .zip(&coords)
        .all(|(t, &c)| c < t.dim);
    match (in_range, inverted) {
        (false, _) => NodeKind::Constant { value: false },
        (true, None) => NodeKind::Input { coords },
        (true, Some(inverted)) => NodeKind::Read { coords, inverted },
    }
}

struct ProgramExplorer<'m> {
    machine: &'m MachineSpec,
    by_state: Vec<Vec<usize>>,
}

impl<'m> ProgramExplorer<'m> {
    fn new(machine: &'m MachineSpec) -> Self {
        let mut by_state = vec![Vec::new(); machine.header.num_states as usize];
        for (i, instr) in machine.program.iter().enumerate() {
            by_state[instr.from.index()].push(i);
        }
        ProgramExplorer { machine, by_state }
    }
}

impl Explore for ProgramExplorer<'_> {
    fn flavor(&self) -> Flavor {
        self.machine.header.flavor
    }

    fn tapes(&self) -> &[TapeSpec] {
        &self.machine.header.tapes
    }

    fn classify(&self, config: &Configuration) -> Class {
        let h = &self.machine.header;
        match h.flavor {
            Flavor::Ptm if config.state == StateId::INPUT => {
                Class::Leaf(input_leaf(&h.tapes, config, None))
            }
            Flavor::Ptm => Class::Interior(None),
            Flavor::Atm => match h.gate(config.state).expect("validated gate map") {
                GateType::True => Class::Leaf(NodeKind::Constant { value: true }),
                GateType::False => Class::Leaf(NodeKind::Constant { value: false }),
                GateType::Read => Class::Leaf(input_leaf(&h.tapes, config, Some(false))),
                GateType::ReadInverted => Class::Leaf(input_leaf(&h.tapes, config, Some(true))),
                g => Class::Interior(Some(g)),
            },
        }
    }

    fn successors(&self, config: &Configuration, out: &mut Vec<Step>) {
        let atm = self.machine.header.flavor == Flavor::Atm;
        for &i in &self.by_state[config.state.index()] {
            let instr = &self.machine.program[i];
            if instruction_matches(instr, config) {
                out.push(Step {
                    target: Target::Config(apply_instruction(config, instr)),
                    dw: if atm { 1 } else { i64::from(instr.dw) },
                    db: if atm { 0 } else { i64::from(instr.db) },
                    origin: i,
                });
            }
        }
    }
}

/// Extra bookkeeping kept alongside a network, mainly for checking it.
#[derive(Clone, Debug, Default)]
pub struct BuildTrace {
    /// The configuration behind each node (`None` for constants).
    pub configs: Vec<Option<Configuration>>,
    /// For each node, the origins (program indices) of the steps whose link
    /// was kept, in expansion order, paired with the target node.
    pub kept: Vec<Vec<(usize, NodeId)>>,
}

/// Builds the network for `machine`.
pub fn build(machine: &MachineSpec, limits: &Limits) -> Result<Network> {
    Builder::new(&ProgramExplorer::new(machine), limits, false)
        .run()
        .map(|(net, _)| net)
}

/// Like [`build`], also returning the configuration behind every node.
pub fn build_traced(machine: &MachineSpec, limits: &Limits) -> Result<(Network, BuildTrace)> {
    Builder::new(&ProgramExplorer::new(machine), limits, true).run()
}

pub(crate) fn build_with<E: Explore>(
    explorer: &E,
    limits: &Limits,
    trace: bool,
) -> Result<(Network, BuildTrace)> {
    Builder::new(explorer, limits, trace).run()
}

struct Frame {
    node: NodeId,
    steps: Vec<Step>,
    next: usize,
    /// (target, index into `links`) for links created from this node.
    made: Vec<(NodeId, usize)>,
    depth: usize,
}

struct Builder<'e, E> {
    explorer: &'e E,
    limits: Limits,
    memo: HashMap<Box<[u8]>, NodeId>,
    constants: [Option<NodeId>; 2],
    nodes: Vec<Node>,
    links: Vec<Link>,
    on_path: Vec<bool>,
    height: Vec<usize>,
    report: BuildReport,
    trace: Option<BuildTrace>,
}

enum Outcome {
    Continue,
    Stop,
}

impl<'e, E: Explore> Builder<'e, E> {
    fn new(explorer: &'e E, limits: &Limits, trace: bool) -> Self {
        Builder {
            explorer,
            limits: *limits,
            memo: HashMap::new(),
            constants: [None, None],
            nodes: Vec::new(),
            links: Vec::new(),
            on_path: Vec::new(),
            height: Vec::new(),
            report: BuildReport::default(),
            trace: trace.then(BuildTrace::default),
        }
    }

    fn run(mut self) -> Result<(Network, BuildTrace)> {
        let tapes = self.explorer.tapes().to_vec();
        let input_dims: Vec<usize> = tapes
            .iter()
            .filter(|t| t.role.addresses(IndexSide::Input))
            .map(|t| t.dim as usize)
            .collect();
        let output_dims: Vec<usize> = tapes
            .iter()
            .filter(|t| t.role.addresses(IndexSide::Output))
            .map(|t| t.dim as usize)
            .collect();
        let mut outputs = Vec::new();
        let mut stopped = false;
        for coords in row_major_coords(&output_dims) {
            if stopped {
                outputs.push(None);
                continue;
            }
            let config = output_config_for(&tapes, &coords)?;
            let key = config.canonical_key();
            let id = match self.memo.get(&key) {
                Some(&id) => Some(id),
                None => match self.explore_from(config, key)? {
                    (id, Outcome::Continue) => id,
                    (id, Outcome::Stop) => {
                        stopped = true;
                        id
                    }
                },
            };
            if let Some(id) = id {
                if self.nodes[id].kind == NodeKind::Hidden {
                    self.nodes[id].kind = NodeKind::Output { coords };
                }
            }
            outputs.push(id);
        }
        self.report.nodes = self.nodes.len();
        self.report.links = self.links.len();
        let net = Network::assemble(
            self.explorer.flavor(),
            input_dims,
            output_dims,
            self.report,
            outputs,
            self.nodes,
            self.links,
        );
        Ok((net, self.trace.unwrap_or_default()))
    }

    /// Reports a limit breach: `Ok(Stop)` in non-fatal mode, an error otherwise.
    fn exceeded(&mut self, kind: LimitKind) -> Result<Outcome> {
        self.report.limit_hit = Some(kind);
        match self.limits.on_exceed {
            OnExceed::Stop => Ok(Outcome::Stop),
            OnExceed::Fail => {
                self.report.nodes = self.nodes.len();
                self.report.links = self.links.len();
                Err(Error::Limit {
                    kind,
                    report: self.report,
                })
            }
        }
    }

    fn new_node(
        &mut self,
        kind: NodeKind,
        gate: Option<GateType>,
        config: Option<Configuration>,
    ) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            id,
            kind,
            bias: 0,
            gate,
        });
        self.on_path.push(false);
        self.height.push(0);
        if let Some(t) = self.trace.as_mut() {
            t.configs.push(config);
            t.kept.push(Vec::new());
        }
        id
    }

    fn classify_target(&self, target: &Target) -> (Class, Option<Box<[u8]>>) {
        match target {
            Target::Config(c) => (self.explorer.classify(c), Some(c.canonical_key())),
            Target::Constant(v) => (Class::Leaf(NodeKind::Constant { value: *v }), None),
        }
    }

    fn explore_from(
        &mut self,
        root: Configuration,
        key: Box<[u8]>,
    ) -> Result<(Option<NodeId>, Outcome)> {
        if self.limits.max_nodes.is_some_and(|m| self.nodes.len() >= m) {
            return Ok((None, self.exceeded(LimitKind::Nodes)?));
        }
        let mut stack: Vec<Frame> = Vec::new();
        let root_id = match self.explorer.classify(&root) {
            Class::Leaf(kind) => {
                let id = self.new_node(kind, None, Some(root));
                self.memo.insert(key, id);
                return Ok((Some(id), Outcome::Continue));
            }
            Class::Interior(gate) => {
                let id = self.new_node(NodeKind::Hidden, gate, None);
                self.memo.insert(key, id);
                stack.push(self.open_frame(id, root, 0));
                id
            }
        };

        while let Some(frame) = stack.last_mut() {
            if frame.next == frame.steps.len() {
                let frame = stack.pop().unwrap();
                self.close_frame(&frame);
                continue;
            }
            let step = frame.steps[frame.next].clone();
            frame.next += 1;
            let (node, depth) = (frame.node, frame.depth);

            let key = match &step.target {
                Target::Config(c) => Some(c.canonical_key()),
                Target::Constant(_) => None,
            };
            let existing = match &key {
                Some(k) => self.memo.get(k).copied(),
                None => self.constants[usize::from(matches!(step.target, Target::Constant(true)))],
            };

            if let Some(target) = existing {
                if self.on_path[target] {
                    self.report.skipped_cycle_links += 1;
                    continue;
                }
                let frame = stack.last_mut().unwrap();
                let is_new = !frame.made.iter().any(|&(t, _)| t == target);
                if is_new
                    && self
                        .limits
                        .max_fanout
                        .is_some_and(|m| frame.made.len() >= m)
                {
                    if let Outcome::Stop = self.exceeded(LimitKind::Fanout)? {
                        return self.stop(stack, root_id);
                    }
                }
                if self
                    .limits
                    .max_depth
                    .is_some_and(|m| depth + 1 + self.height[target] > m)
                {
                    if let Outcome::Stop = self.exceeded(LimitKind::Depth)? {
                        return self.stop(stack, root_id);
                    }
                }
                let frame = stack.last_mut().unwrap();
                Self::add_link(&mut self.links, &mut self.nodes, frame, target, &step);
                if let Some(t) = self.trace.as_mut() {
                    t.kept[node].push((step.origin, target));
                }
                continue;
            }

            let limit = if self.limits.max_nodes.is_some_and(|m| self.nodes.len() >= m) {
                Some(LimitKind::Nodes)
            } else if self.limits.max_depth.is_some_and(|m| depth + 1 > m) {
                Some(LimitKind::Depth)
            } else if self
                .limits
                .max_fanout
                .is_some_and(|m| stack.last().unwrap().made.len() >= m)
            {
                Some(LimitKind::Fanout)
            } else {
                None
            };
            if let Some(kind) = limit {
                if let Outcome::Stop = self.exceeded(kind)? {
                    return self.stop(stack, root_id);
                }
            }

            let (class, _) = self.classify_target(&step.target);
            let target = match (class, step.target.clone()) {
                (Class::Leaf(kind), Target::Constant(v)) => {
                    let id = self.new_node(kind, None, None);
                    self.constants[usize::from(v)] = Some(id);
                    id
                }
                (Class::Leaf(kind), Target::Config(c)) => {
                    let id = self.new_node(kind, None, Some(c));
                    self.memo.insert(key.unwrap(), id);
                    id
                }
                (Class::Interior(gate), Target::Config(c)) => {
                    let id = self.new_node(NodeKind::Hidden, gate, None);
                    self.memo.insert(key.unwrap(), id);
                    let frame = stack.last_mut().unwrap();
                    Self::add_link(&mut self.links, &mut self.nodes, frame, id, &step);
                    if let Some(t) = self.trace.as_mut() {
                        t.kept[node].push((step.origin, id));
                    }
                    let child = self.open_frame(id, c, depth + 1);
                    stack.push(child);
                    continue;
                }
                (Class::Interior(_), Target::Constant(_)) => unreachable!("constants are leaves"),
            };
            let frame = stack.last_mut().unwrap();
            Self::add_link(&mut self.links, &mut self.nodes, frame, target, &step);
            if let Some(t) = self.trace.as_mut() {
                t.kept[node].push((step.origin, target));
            }
        }
        Ok((Some(root_id), Outcome::Continue))
    }

    fn stop(&mut self, stack: Vec<Frame>, root: NodeId) -> Result<(Option<NodeId>, Outcome)> {
        for frame in &stack {
            self.on_path[frame.node] = false;
        }
        Ok((Some(root), Outcome::Stop))
    }

    fn open_frame(&mut self, node: NodeId, config: Configuration, depth: usize) -> Frame {
        self.on_path[node] = true;
        let mut steps = Vec::new();
        self.explorer.successors(&config, &mut steps);
        if let Some(t) = self.trace.as_mut() {
            t.configs[node] = Some(config);
        }
        Frame {
            node,
            steps,
            next: 0,
            made: Vec::new(),
            depth,
        }
    }

    fn close_frame(&mut self, frame: &Frame) {
        self.on_path[frame.node] = false;
        self.height[frame.node] = frame
            .made
            .iter()
            .map(|&(t, _)| self.height[t] + 1)
            .max()
            .unwrap_or(0);
    }

    fn add_link(
        links: &mut Vec<Link>,
        nodes: &mut [Node],
        frame: &mut Frame,
        target: NodeId,
        step: &Step,
    ) {
        nodes[frame.node].bias += step.db;
        match frame.made.iter().find(|&&(t, _)| t == target) {
            Some(&(_, li)) => links[li].weight += step.dw,
            None => {
                frame.made.push((target, links.len()));
                links.push(Link {
                    from: frame.node,
                    to: target,
                    weight: step.dw,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Instruction, MachineHeader, Move, Symbol};

    fn gene(
        from: u32,
        read: Symbol,
        to: u32,
        write: Symbol,
        mv: Move,
        dw: i8,
        db: i8,
    ) -> Instruction {
        Instruction {
            from: StateId(from),
            read: vec![read],
            to: StateId(to),
            write: vec![write],
            moves: vec![mv],
            dw,
            db,
        }
    }

    /// Two inputs on a 2-wide input array; the output links to input 0
    /// (stay) and input 1 (move right, write 1).
    pub(crate) fn and_machine(dbs: [i8; 4]) -> MachineSpec {
        let header = MachineHeader::ptm(3, vec![TapeSpec::input_index(2).unwrap()]).unwrap();
        let e = Symbol::End;
        let program = vec![
            gene(0, e, 1, e, Move::Stay, 1, dbs[0]),
            gene(0, e, 2, e, Move::Right, 1, dbs[1]),
            gene(0, e, 1, e, Move::Stay, 1, dbs[2]),
            gene(0, e, 2, e, Move::Right, 1, dbs[3]),
            gene(2, Symbol::Zero, 1, Symbol::One, Move::Left, 1, 1),
            gene(2, Symbol::Zero, 1, Symbol::One, Move::Left, 1, -1),
        ];
        MachineSpec::new(header, program).unwrap()
    }

    #[test]
    fn empty_program_single_output() {
        let header = MachineHeader::ptm(2, vec![TapeSpec::work(1).unwrap()]).unwrap();
        let net = build(
            &MachineSpec::new(header, vec![]).unwrap(),
            &Limits::unlimited(),
        )
        .unwrap();
        assert_eq!(net.nodes.len(), 1);
        assert!(net.links.is_empty());
        assert_eq!(net.nodes[0].bias, 0);
        assert_eq!(net.outputs, vec![Some(0)]);
        assert_eq!(net.depth, 0);
    }

    #[test]
    fn self_loop_is_skipped() {
        let header = MachineHeader::ptm(2, vec![TapeSpec::work(1).unwrap()]).unwrap();
        let m = MachineSpec::new(
            header,
            vec![gene(0, Symbol::End, 0, Symbol::End, Move::Stay, 1, 1)],
        )
        .unwrap();
        let net = build(&m, &Limits::unlimited()).unwrap();
        assert_eq!(net.nodes.len(), 1);
        assert!(net.links.is_empty());
        assert_eq!(net.nodes[0].bias, 0);
        assert_eq!(net.report.skipped_cycle_links, 1);
    }

    #[test]
    fn shared_successors_are_memoised() {
        let m = and_machine([-1, -1, -1, 1]);
        let net = build(&m, &Limits::unlimited()).unwrap();
        // output, input(0), hidden state-2 node, input(1)
        assert_eq!(net.nodes.len(), 4);
        assert_eq!(net.nodes[0].bias, -2);
        let w: Vec<i64> = net.links_from(0).iter().map(|l| l.weight).collect();
        assert_eq!(w, vec![2, 2]);
        assert!(net.is_acyclic());
    }

    #[test]
    fn node_limit_stops_or_fails() {
        let m = and_machine([-1, -1, -1, 1]);
        let net = build(&m, &Limits::nodes(2, OnExceed::Stop)).unwrap();
        assert_eq!(net.nodes.len(), 2);
        assert_eq!(net.report.limit_hit, Some(LimitKind::Nodes));
        match build(&m, &Limits::nodes(2, OnExceed::Fail)) {
            Err(Error::Limit {
                kind: LimitKind::Nodes,
                report,
            }) => assert_eq!(report.nodes, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn depth_and_fanout_limits() {
        let m = and_machine([-1, -1, -1, 1]);
        let full = build(&m, &Limits::unlimited()).unwrap();
        assert_eq!(full.depth, 2);
        let mut l = Limits::unlimited();
        l.max_depth = Some(1);
        let net = build(&m, &l).unwrap();
        assert_eq!(net.report.limit_hit, Some(LimitKind::Depth));
        assert!(net.depth <= 1);
        let mut l = Limits::unlimited();
        l.max_fanout = Some(1);
        let net = build(&m, &l).unwrap();
        assert_eq!(net.report.limit_hit, Some(LimitKind::Fanout));
        assert!(net.nodes.iter().all(|n| net.links_from(n.id).len() <= 1));
    }

    #[test]
    fn out_of_range_input_is_constant_false() {
        let header = MachineHeader::ptm(2, vec![TapeSpec::input_index(3).unwrap()]).unwrap();
        let e = Symbol::End;
        // Move to the high cell and set it: index 2 is in range, 3 is not.
        let m = MachineSpec::new(
            header,
            vec![
                gene(0, e, 0, e, Move::Right, 1, 1),
                gene(0, Symbol::Zero, 1, Symbol::One, Move::Stay, 1, 1),
            ],
        )
        .unwrap();
        let net = build(&m, &Limits::unlimited()).unwrap();
        assert!(net
            .nodes
            .iter()
            .any(|n| n.kind == NodeKind::Input { coords: vec![1] }));
        let header = MachineHeader::ptm(3, vec![TapeSpec::input_index(3).unwrap()]).unwrap();
        let m = MachineSpec::new(
            header,
            vec![
                gene(0, e, 2, Symbol::End, Move::Right, 1, 1),
                gene(2, Symbol::Zero, 2, Symbol::One, Move::Right, 1, 1),
                gene(2, e, 1, e, Move::Stay, 1, 1),
            ],
        )
        .unwrap();
        let net = build(&m, &Limits::unlimited()).unwrap();
        assert!(net
            .nodes
            .iter()
            .any(|n| n.kind == NodeKind::Constant { value: false }));
    }

    #[test]
    fn atm_leaves_and_gates() {
        let header = MachineHeader::atm(
            vec![
                GateType::Or,
                GateType::Read,
                GateType::ReadInverted,
                GateType::True,
            ],
            vec![TapeSpec::input_index(2).unwrap()],
        )
        .unwrap();
        let e = Symbol::End;
        let m = MachineSpec::new(
            header,
            vec![
                gene(0, e, 1, e, Move::Stay, 1, 1),
                gene(0, e, 2, e, Move::Stay, 1, 1),
                gene(0, e, 3, e, Move::Stay, 1, 1),
            ],
        )
        .unwrap();
        let net = build(&m, &Limits::unlimited()).unwrap();
        assert_eq!(net.nodes[0].gate, Some(GateType::Or));
        assert_eq!(
            net.nodes[1].kind,
            NodeKind::Read {
                coords: vec![0],
                inverted: false
            }
        );
        assert_eq!(
            net.nodes[2].kind,
            NodeKind::Read {
                coords: vec![0],
                inverted: true
            }
        );
        assert_eq!(net.nodes[3].kind, NodeKind::Constant { value: true });
    }

    #[test]
    fn structured_export_round_trips() {
        let m = and_machine([-1, -1, -1, 1]);
        let net = build(&m, &Limits::unlimited()).unwrap();
        let text = net.to_structured();
        let back = Network::from_structured(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_structured(), text);
        assert!(net.to_dot().starts_with("digraph"));
    }
}
