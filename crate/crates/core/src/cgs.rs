//! Open concurrent game structures.
//!
//! States, agents, actions and propositions are interned to contiguous
//! indices in declaration order. The transition function is stored densely:
//! every state owns one row with an entry for each full decision, `None`
//! meaning that the decision is not available.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use crate::error::ModelError;

/// Name reserved for the environment agent.
pub const ENV_AGENT: &str = "env";

/// Largest dense transition table accepted by [`OpenCgs::new`].
const MAX_TABLE_ENTRIES: usize = 1 << 24;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropId(pub u8);

/// A set of agents, as a bitmask over agent indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentSet(pub u64);

impl AgentSet {
    pub const EMPTY: AgentSet = AgentSet(0);

    pub fn all(count: usize) -> AgentSet {
        if count >= 64 {
            AgentSet(u64::MAX)
        } else {
            AgentSet((1u64 << count) - 1)
        }
    }

    pub fn singleton(agent: AgentId) -> AgentSet {
        AgentSet(1 << agent.0)
    }

    pub fn contains(self, agent: AgentId) -> bool {
        self.0 >> agent.0 & 1 == 1
    }

    pub fn with(self, agent: AgentId) -> AgentSet {
        AgentSet(self.0 | 1 << agent.0)
    }

    pub fn without(self, agent: AgentId) -> AgentSet {
        AgentSet(self.0 & !(1 << agent.0))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_disjoint(self, other: AgentSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: AgentSet) -> AgentSet {
        AgentSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = AgentId> {
        (0..64u8).filter(move |i| self.0 >> i & 1 == 1).map(AgentId)
    }
}

/// A node label: a set of atoms as a bitmask. Bits `0..|AP|` are the
/// propositions; automata over extended alphabets put further atoms above.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub u64);

impl Letter {
    pub fn contains(self, bit: usize) -> bool {
        self.0 >> bit & 1 == 1
    }

    pub fn with(self, bit: usize) -> Letter {
        Letter(self.0 | 1 << bit)
    }
}

/// An `A`-decision: one action for every agent of the coalition `A`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decision {
    coalition: AgentSet,
    actions: Vec<Option<ActionId>>,
}

impl Decision {
    /// The unique decision of the empty coalition.
    pub fn empty(agent_count: usize) -> Decision {
        Decision {
            coalition: AgentSet::EMPTY,
            actions: vec![None; agent_count],
        }
    }

    pub fn coalition(&self) -> AgentSet {
        self.coalition
    }

    pub fn action(&self, agent: AgentId) -> Option<ActionId> {
        self.actions.get(agent.0 as usize).copied().flatten()
    }

    /// Union of decisions on disjoint coalitions.
    pub fn union(&self, other: &Decision) -> Option<Decision> {
        if !self.coalition.is_disjoint(other.coalition) {
            return None;
        }
        let actions = self.actions.iter().zip(&other.actions).map(|(a, b)| a.or(*b)).collect();
        Some(Decision {
            coalition: self.coalition.union(other.coalition),
            actions,
        })
    }
}

/// Who resolves the choice at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    /// Controlled by the environment: its transitions may be pruned.
    Environment,
    /// The environment is passive: all transitions stay enabled.
    System,
}

impl StateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StateKind::Environment => "environment-controlled",
            StateKind::System => "environment-passive",
        }
    }
}

/// Available `A`-decisions at a state, each with the targets it is
/// consistent with. Decisions are identified by their mixed-radix key over
/// the coalition's agents in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub key: u64,
    pub targets: Vec<StateId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct StateInfo {
    name: String,
    label: Letter,
    kind: StateKind,
    owner: Option<AgentId>,
}

/// A validated, immutable open concurrent game structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenCgs {
    agents: Vec<String>,
    actions: Vec<String>,
    props: Vec<String>,
    env: AgentId,
    states: Vec<StateInfo>,
    init: StateId,
    full_count: usize,
    table: Vec<Option<StateId>>,
}

/// Raw description of a structure, validated by [`OpenCgs::new`].
#[derive(Debug, Clone, Default)]
pub struct CgsSpec {
    pub agents: Vec<String>,
    pub actions: Vec<String>,
    pub props: Vec<String>,
    /// Name, label and optional declared owner of each state.
    pub states: Vec<(String, Letter, Option<AgentId>)>,
    pub init: StateId,
    /// For every state, `(full decision, target)` pairs; a full decision is
    /// given as one action per agent in agent order.
    pub transitions: Vec<Vec<(Vec<ActionId>, StateId)>>,
}

impl OpenCgs {
    pub fn new(spec: CgsSpec) -> Result<OpenCgs, ModelError> {
        let semantic = |message: String| ModelError::Semantic { line: 0, message };
        if spec.agents.is_empty() || spec.agents.len() > 64 {
            return Err(semantic("between 1 and 64 agents are required".into()));
        }
        if spec.actions.is_empty() || spec.actions.len() > 255 {
            return Err(semantic("between 1 and 255 actions are required".into()));
        }
        if spec.props.len() > 64 {
            return Err(semantic("at most 64 propositions are supported".into()));
        }
        if spec.states.is_empty() {
            return Err(semantic("at least one state is required".into()));
        }
        let env = spec
            .agents
            .iter()
            .position(|a| a == ENV_AGENT)
            .ok_or_else(|| semantic(format!("agent `{ENV_AGENT}` is not declared")))?;
        let full_count = checked_pow(spec.actions.len(), spec.agents.len())
            .filter(|&n| n.saturating_mul(spec.states.len()) <= MAX_TABLE_ENTRIES)
            .ok_or_else(|| semantic("transition table too large".into()))?;
        if spec.init.index() >= spec.states.len() {
            return Err(semantic("initial state out of range".into()));
        }
        let mut table = vec![None; full_count * spec.states.len()];
        for (s, row) in spec.transitions.iter().enumerate() {
            let name = &spec
                .states
                .get(s)
                .ok_or_else(|| semantic("transition row without state".into()))?
                .0;
            for (actions, target) in row {
                if actions.len() != spec.agents.len() || actions.iter().any(|a| a.0 as usize >= spec.actions.len()) {
                    return Err(semantic(format!("malformed decision in state `{name}`")));
                }
                if target.index() >= spec.states.len() {
                    return Err(semantic(format!("transition target out of range in `{name}`")));
                }
                let full = encode_full(actions, spec.actions.len());
                let slot = &mut table[s * full_count + full];
                if slot.is_some() {
                    return Err(semantic(format!("duplicate transition entry in state `{name}`")));
                }
                *slot = Some(*target);
            }
        }
        let mut cgs = OpenCgs {
            agents: spec.agents,
            actions: spec.actions,
            props: spec.props,
            env: AgentId(env as u8),
            states: spec
                .states
                .into_iter()
                .map(|(name, label, owner)| StateInfo {
                    name,
                    label,
                    kind: StateKind::System,
                    owner,
                })
                .collect(),
            init: spec.init,
            full_count,
            table,
        };
        cgs.classify_states()?;
        Ok(cgs)
    }

    fn classify_states(&mut self) -> Result<(), ModelError> {
        let all = AgentSet::all(self.agents.len());
        let env = AgentSet::singleton(self.env);
        for s in 0..self.states.len() {
            let state = StateId(s as u32);
            if self.row(state).iter().all(Option::is_none) {
                return Err(ModelError::BlockedState(self.states[s].name.clone()));
            }
            let controlled = self.moves(state, all.without(self.env), None).len() == 1;
            let passive = self.moves(state, env, None).len() == 1;
            let kind = if passive {
                StateKind::System
            } else if controlled {
                StateKind::Environment
            } else {
                return Err(ModelError::Unclassified(self.states[s].name.clone()));
            };
            if let Some(owner) = self.states[s].owner {
                let consistent = if owner == self.env { controlled } else { passive };
                if !consistent {
                    return Err(ModelError::OwnerMismatch {
                        state: self.states[s].name.clone(),
                        declared: self.agents[owner.0 as usize].clone(),
                        computed: kind.as_str(),
                    });
                }
            }
            self.states[s].kind = kind;
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn prop_count(&self) -> usize {
        self.props.len()
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn all_agents(&self) -> AgentSet {
        AgentSet::all(self.agents.len())
    }

    pub fn env(&self) -> AgentId {
        self.env
    }

    pub fn init(&self) -> StateId {
        self.init
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.index()].name
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|st| st.name == name)
            .map(|i| StateId(i as u32))
    }

    pub fn label(&self, s: StateId) -> Letter {
        self.states[s.index()].label
    }

    pub fn kind(&self, s: StateId) -> StateKind {
        self.states[s.index()].kind
    }

    pub fn is_env_state(&self, s: StateId) -> bool {
        self.kind(s) == StateKind::Environment
    }

    pub fn declared_owner(&self, s: StateId) -> Option<AgentId> {
        self.states[s.index()].owner
    }

    pub fn full_decision_count(&self) -> usize {
        self.full_count
    }

    pub fn row(&self, s: StateId) -> &[Option<StateId>] {
        let start = s.index() * self.full_count;
        &self.table[start..start + self.full_count]
    }

    /// Action of `agent` in the full decision with index `full`.
    pub fn full_action(&self, full: usize, agent: AgentId) -> ActionId {
        let radix = self.actions.len();
        ActionId((full / radix.pow(agent.0 as u32) % radix) as u8)
    }

    /// The set of successors of `s`, sorted.
    pub fn successors(&self, s: StateId) -> Vec<StateId> {
        let mut out: Vec<StateId> = self.row(s).iter().flatten().copied().collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Available decisions of `coalition` at `s` together with their
    /// consistent targets, ordered by decision key. When `enabled` is given
    /// (sorted), transitions to other targets count as undefined.
    pub fn moves(&self, s: StateId, coalition: AgentSet, enabled: Option<&[StateId]>) -> Vec<Move> {
        let mut groups: BTreeMap<u64, Vec<StateId>> = BTreeMap::new();
        for (full, target) in self.row(s).iter().enumerate() {
            let Some(t) = *target else { continue };
            if let Some(en) = enabled {
                if en.binary_search(&t).is_err() {
                    continue;
                }
            }
            groups.entry(self.coalition_key(full, coalition)).or_default().push(t);
        }
        groups
            .into_iter()
            .map(|(key, mut targets)| {
                targets.sort_unstable();
                targets.dedup();
                Move { key, targets }
            })
            .collect()
    }

    fn coalition_key(&self, full: usize, coalition: AgentSet) -> u64 {
        let radix = self.actions.len() as u64;
        let mut key = 0u64;
        let mut weight = 1u64;
        for agent in coalition.iter() {
            key += self.full_action(full, agent).0 as u64 * weight;
            weight *= radix;
        }
        key
    }

    /// Decodes a decision key produced by [`OpenCgs::moves`].
    pub fn decision_from_key(&self, coalition: AgentSet, mut key: u64) -> Decision {
        let radix = self.actions.len() as u64;
        let mut actions = vec![None; self.agents.len()];
        for agent in coalition.iter() {
            actions[agent.0 as usize] = Some(ActionId((key % radix) as u8));
            key /= radix;
        }
        Decision { coalition, actions }
    }

    /// The available `A`-decisions at `s`.
    pub fn available_decisions(&self, s: StateId, coalition: AgentSet) -> Vec<Decision> {
        self.moves(s, coalition, None)
            .into_iter()
            .map(|m| self.decision_from_key(coalition, m.key))
            .collect()
    }

    /// The successor reached by a full decision, if defined.
    pub fn target(&self, s: StateId, decision: &Decision) -> Option<StateId> {
        if decision.coalition != self.all_agents() {
            return None;
        }
        let actions: Vec<ActionId> = decision.actions.iter().map(|a| a.unwrap_or(ActionId(0))).collect();
        self.row(s)[encode_full(&actions, self.actions.len())]
    }

    /// Restricts the environment states' transitions to the enabled targets.
    pub fn apply_pruning(&self, pruning: &Pruning) -> Result<OpenCgs, ModelError> {
        pruning.validate(self)?;
        let mut out = self.clone();
        for (s, enabled) in &pruning.enabled {
            let start = s.index() * self.full_count;
            for slot in &mut out.table[start..start + self.full_count] {
                if let Some(t) = *slot {
                    if enabled.binary_search(&t).is_err() {
                        *slot = None;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The prefix of the unwinding up to `depth` transitions.
    pub fn unwind_bounded(&self, depth: usize) -> TreePrefix {
        let mut tree = TreePrefix {
            nodes: vec![TreeNode {
                state: self.init,
                label: self.label(self.init),
                children: Vec::new(),
            }],
        };
        let mut frontier = vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::new();
            for node in frontier {
                for t in self.successors(tree.nodes[node].state) {
                    let id = tree.nodes.len();
                    tree.nodes.push(TreeNode {
                        state: t,
                        label: self.label(t),
                        children: Vec::new(),
                    });
                    tree.nodes[node].children.push(id);
                    next.push(id);
                }
            }
            frontier = next;
        }
        tree
    }

    /// Builds a structure with the same vocabulary as `self` from explicit
    /// rows, keeping the environment classification rules.
    pub fn with_rows(
        &self,
        states: Vec<(String, Letter)>,
        init: StateId,
        rows: Vec<Vec<Option<StateId>>>,
    ) -> Result<OpenCgs, ModelError> {
        let mut table = Vec::with_capacity(rows.len() * self.full_count);
        for row in rows {
            debug_assert_eq!(row.len(), self.full_count);
            table.extend(row);
        }
        let mut out = OpenCgs {
            agents: self.agents.clone(),
            actions: self.actions.clone(),
            props: self.props.clone(),
            env: self.env,
            states: states
                .into_iter()
                .map(|(name, label)| StateInfo {
                    name,
                    label,
                    kind: StateKind::System,
                    owner: None,
                })
                .collect(),
            init,
            full_count: self.full_count,
            table,
        };
        out.classify_states()?;
        Ok(out)
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc = 1usize;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

fn encode_full(actions: &[ActionId], radix: usize) -> usize {
    actions.iter().rev().fold(0usize, |acc, a| acc * radix + a.0 as usize)
}

/// A memoryless environment: the enabled successors of every environment
/// state.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pruning {
    pub enabled: BTreeMap<StateId, Vec<StateId>>,
}

impl Pruning {
    /// The pruning that enables every transition.
    pub fn full(g: &OpenCgs) -> Pruning {
        Pruning {
            enabled: g
                .states()
                .filter(|&s| g.is_env_state(s))
                .map(|s| (s, g.successors(s)))
                .collect(),
        }
    }

    pub fn validate(&self, g: &OpenCgs) -> Result<(), ModelError> {
        for s in g.states().filter(|&s| g.is_env_state(s)) {
            if !self.enabled.contains_key(&s) {
                return Err(ModelError::InvalidPruning(format!(
                    "environment state `{}` has no enabled set",
                    g.state_name(s)
                )));
            }
        }
        for (&s, enabled) in &self.enabled {
            if s.index() >= g.state_count() || !g.is_env_state(s) {
                return Err(ModelError::InvalidPruning(format!(
                    "state {} is not an environment state",
                    s.0
                )));
            }
            if enabled.is_empty() {
                return Err(ModelError::InvalidPruning(format!(
                    "empty enabled set at `{}`",
                    g.state_name(s)
                )));
            }
            let succ = g.successors(s);
            if !enabled.windows(2).all(|w| w[0] < w[1]) || enabled.iter().any(|t| succ.binary_search(t).is_err()) {
                return Err(ModelError::InvalidPruning(format!(
                    "enabled set at `{}` is not a sorted subset of its successors",
                    g.state_name(s)
                )));
            }
        }
        Ok(())
    }
}

/// A finite labeled tree prefix; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePrefix {
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub state: StateId,
    pub label: Letter,
    pub children: Vec<usize>,
}

impl TreePrefix {
    pub fn depth(&self) -> usize {
        fn go(t: &TreePrefix, n: usize) -> usize {
            t.nodes[n].children.iter().map(|&c| 1 + go(t, c)).max().unwrap_or(0)
        }
        go(self, 0)
    }
}

// ---------------------------------------------------------------------------
// Textual model format.

struct Cursor<'a> {
    line_no: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> ModelError {
        ModelError::Syntax {
            line: self.line_no,
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text.as_bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ModelError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{token}`")))
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str), ModelError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            Err(self.err("expected identifier"))
        } else {
            Ok((start + 1, &self.text[start..self.pos]))
        }
    }
}

fn lookup(names: &[String], name: &str) -> Option<usize> {
    names.iter().position(|n| n == name)
}

struct RawTransition {
    line: usize,
    column: usize,
    actions: Vec<ActionId>,
    target: String,
}

/// Parses and validates a model in the line-oriented textual format.
pub fn parse_cgs(text: &str) -> Result<OpenCgs, ModelError> {
    let mut spec = CgsSpec::default();
    let mut header_done = [false; 3];
    let mut init: Option<(usize, String)> = None;
    let mut raw: Vec<Vec<RawTransition>> = Vec::new();

    for (i, full_line) in text.lines().enumerate() {
        let content = full_line.split('#').next().unwrap_or("");
        let mut cur = Cursor {
            line_no: i + 1,
            text: content,
            pos: 0,
        };
        if cur.at_end() {
            continue;
        }
        let sem = |message: String| ModelError::Semantic { line: i + 1, message };
        if cur.text[cur.pos..].starts_with('(') {
            if raw.is_empty() {
                return Err(cur.err("transition outside of a state block"));
            }
            cur.expect("(")?;
            let mut actions: Vec<Option<ActionId>> = vec![None; spec.agents.len()];
            loop {
                let (col, agent) = cur.ident()?;
                let a = lookup(&spec.agents, agent).ok_or_else(|| ModelError::Syntax {
                    line: i + 1,
                    column: col,
                    message: format!("unknown agent `{agent}`"),
                })?;
                cur.expect("=")?;
                let (col, action) = cur.ident()?;
                let act = lookup(&spec.actions, action).ok_or_else(|| ModelError::Syntax {
                    line: i + 1,
                    column: col,
                    message: format!("unknown action `{action}`"),
                })?;
                if actions[a].replace(ActionId(act as u8)).is_some() {
                    return Err(sem(format!("agent `{agent}` assigned twice")));
                }
                if cur.eat(")") {
                    break;
                }
                cur.expect(",")?;
            }
            cur.expect("->")?;
            let (column, target) = cur.ident()?;
            if !cur.at_end() {
                return Err(cur.err("unexpected trailing input"));
            }
            let actions = actions
                .into_iter()
                .enumerate()
                .map(|(a, act)| act.ok_or_else(|| sem(format!("decision misses agent `{}`", spec.agents[a]))))
                .collect::<Result<Vec<_>, _>>()?;
            raw.last_mut().unwrap().push(RawTransition {
                line: i + 1,
                column,
                actions,
                target: target.into(),
            });
            continue;
        }
        let (_, keyword) = cur.ident()?;
        match keyword {
            "agents" | "actions" | "props" => {
                cur.expect(":")?;
                let slot = match keyword {
                    "agents" => 0,
                    "actions" => 1,
                    _ => 2,
                };
                if header_done[slot] {
                    return Err(sem(format!("`{keyword}` declared twice")));
                }
                if !raw.is_empty() {
                    return Err(sem(format!("`{keyword}` must precede the states")));
                }
                header_done[slot] = true;
                let list = match slot {
                    0 => &mut spec.agents,
                    1 => &mut spec.actions,
                    _ => &mut spec.props,
                };
                while !cur.at_end() {
                    let (_, name) = cur.ident()?;
                    if list.iter().any(|n| n == name) {
                        return Err(sem(format!("duplicate name `{name}`")));
                    }
                    list.push(name.into());
                }
            }
            "init" => {
                cur.expect(":")?;
                let (_, name) = cur.ident()?;
                if init.replace((i + 1, name.into())).is_some() {
                    return Err(sem("`init` declared twice".into()));
                }
                if !cur.at_end() {
                    return Err(cur.err("unexpected trailing input"));
                }
            }
            "state" => {
                if !header_done[0] || !header_done[1] {
                    return Err(sem("`agents` and `actions` must precede the states".into()));
                }
                let (_, name) = cur.ident()?;
                if spec.states.iter().any(|(n, _, _)| n == name) {
                    return Err(sem(format!("duplicate state `{name}`")));
                }
                cur.expect("{")?;
                let mut label = Letter::default();
                while !cur.eat("}") {
                    let (col, prop) = cur.ident()?;
                    let p = lookup(&spec.props, prop).ok_or_else(|| ModelError::Syntax {
                        line: i + 1,
                        column: col,
                        message: format!("unknown proposition `{prop}`"),
                    })?;
                    label = label.with(p);
                    cur.eat(",");
                }
                let mut owner = None;
                if cur.eat("owner") {
                    cur.expect("=")?;
                    let (col, agent) = cur.ident()?;
                    let a = lookup(&spec.agents, agent).ok_or_else(|| ModelError::Syntax {
                        line: i + 1,
                        column: col,
                        message: format!("unknown agent `{agent}`"),
                    })?;
                    owner = Some(AgentId(a as u8));
                }
                if !cur.at_end() {
                    return Err(cur.err("unexpected trailing input"));
                }
                spec.states.push((name.into(), label, owner));
                raw.push(Vec::new());
            }
            other => {
                return Err(ModelError::Syntax {
                    line: i + 1,
                    column: 1,
                    message: format!("unknown declaration `{other}`"),
                })
            }
        }
    }

    let names: Vec<String> = spec.states.iter().map(|(n, _, _)| n.clone()).collect();
    let (init_line, init_name) = init.ok_or(ModelError::Semantic {
        line: 0,
        message: "missing `init` declaration".into(),
    })?;
    spec.init = StateId(lookup(&names, &init_name).ok_or(ModelError::Semantic {
        line: init_line,
        message: format!("unknown initial state `{init_name}`"),
    })? as u32);
    for (s, row) in raw.into_iter().enumerate() {
        let mut out: Vec<(Vec<ActionId>, StateId)> = Vec::with_capacity(row.len());
        for t in row {
            let target = lookup(&names, &t.target).ok_or_else(|| ModelError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("unknown state `{}`", t.target),
            })?;
            if out.iter().any(|(a, _)| *a == t.actions) {
                return Err(ModelError::Semantic {
                    line: t.line,
                    message: format!("duplicate transition entry in state `{}`", names[s]),
                });
            }
            out.push((t.actions, StateId(target as u32)));
        }
        spec.transitions.push(out);
    }
    OpenCgs::new(spec)
}

/// Renders a structure in the textual model format.
pub fn render_cgs(g: &OpenCgs) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "agents: {}", g.agents.join(" "));
    let _ = writeln!(out, "actions: {}", g.actions.join(" "));
    let _ = writeln!(out, "props: {}", g.props.join(" "));
    let _ = writeln!(out, "init: {}", g.state_name(g.init));
    for s in g.states() {
        let label: Vec<&str> = (0..g.props.len())
            .filter(|&p| g.label(s).contains(p))
            .map(|p| g.props[p].as_str())
            .collect();
        let _ = write!(out, "state {} {{{}}}", g.state_name(s), label.join(", "));
        if let Some(owner) = g.declared_owner(s) {
            let _ = write!(out, " owner={}", g.agents[owner.0 as usize]);
        }
        out.push('\n');
        for (full, target) in g.row(s).iter().enumerate() {
            let Some(t) = target else { continue };
            let parts: Vec<String> = (0..g.agents.len())
                .map(|a| {
                    let act = g.full_action(full, AgentId(a as u8));
                    format!("{}={}", g.agents[a], g.actions[act.0 as usize])
                })
                .collect();
            let _ = writeln!(out, "  ({}) -> {}", parts.join(", "), g.state_name(*t));
        }
    }
    out
}

impl fmt::Display for OpenCgs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_cgs(self))
    }
}

impl OpenCgs {
    /// Human-readable rendering of a decision.
    pub fn decision_to_string(&self, d: &Decision) -> String {
        let parts: Vec<String> = d
            .coalition()
            .iter()
            .map(|a| {
                let act = d.action(a).map(|x| self.actions[x.0 as usize].as_str()).unwrap_or("?");
                format!("{}={}", self.agents[a.0 as usize], act)
            })
            .collect();
        format!("({})", parts.join(", "))
    }

    pub fn label_to_string(&self, label: Letter) -> String {
        let names: Vec<&str> = (0..self.props.len())
            .filter(|&p| label.contains(p))
            .map(|p| self.props[p].as_str())
            .collect();
        format!("{{{}}}", names.join(", "))
    }

    pub fn agent_set_to_string(&self, set: AgentSet) -> String {
        let names: Vec<&str> = set.iter().map(|a| self.agents[a.0 as usize].as_str()).collect();
        names.join(",")
    }

    pub fn agent_by_name(&self, name: &str) -> Option<AgentId> {
        lookup(&self.agents, name).map(|a| AgentId(a as u8))
    }

    pub fn prop_by_name(&self, name: &str) -> Option<PropId> {
        lookup(&self.props, name).map(|p| PropId(p as u8))
    }

    pub fn describe(&self) -> String {
        format!(
            "{} states, {} agents, {} actions, {} props",
            self.state_count(),
            self.agent_count(),
            self.action_count(),
            self.prop_count()
        )
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const LOOP: &str = "\
agents: sys env
actions: a
props: p
init: s0
state s0 {p}
  (sys=a, env=a) -> s0
";

    pub(crate) const VEND: &str = "\
agents: sys env
actions: a b
props: p q
init: s0
state s0 {} owner=env
  (sys=a, env=a) -> sp
  (sys=a, env=b) -> sq
state sp {p} owner=sys
  (sys=a, env=a) -> s0
state sq {q} owner=sys
  (sys=a, env=a) -> s0
";

    #[test]
    fn parses_minimal_model() {
        let g = parse_cgs(LOOP).unwrap();
        assert_eq!(g.state_count(), 1);
        assert_eq!(g.successors(StateId(0)), vec![StateId(0)]);
        assert_eq!(g.kind(StateId(0)), StateKind::System);
    }

    #[test]
    fn parses_vending_model() {
        let g = parse_cgs(VEND).unwrap();
        assert_eq!(g.state_count(), 3);
        assert_eq!(g.kind(g.init()), StateKind::Environment);
        let sp = g.state_by_name("sp").unwrap();
        let sq = g.state_by_name("sq").unwrap();
        assert_eq!(g.successors(g.init()), vec![sp, sq]);
    }

    #[test]
    fn rejects_blocked_state() {
        let text = "agents: sys env\nactions: a\nprops: p\ninit: s0\nstate s0 {}\n";
        assert_eq!(parse_cgs(text), Err(ModelError::BlockedState("s0".into())));
    }

    #[test]
    fn rejects_duplicate_transition() {
        let text = "agents: sys env\nactions: a\nprops:\ninit: s0\nstate s0 {}\n  (sys=a, env=a) -> s0\n  (env=a, sys=a) -> s0\n";
        let err = parse_cgs(text).unwrap_err();
        assert!(matches!(err, ModelError::Semantic { line: 7, .. }), "{err:?}");
    }

    #[test]
    fn rejects_unclassified_state() {
        // both agents choose: neither env-controlled nor env-passive
        let text = "agents: sys env\nactions: a b\nprops:\ninit: s0\nstate s0 {}\n\
            (sys=a, env=a) -> s0\n(sys=a, env=b) -> s0\n(sys=b, env=a) -> s0\n(sys=b, env=b) -> s0\n";
        assert_eq!(parse_cgs(text), Err(ModelError::Unclassified("s0".into())));
    }

    #[test]
    fn checks_declared_owner() {
        let text = VEND.replace("state s0 {} owner=env", "state s0 {} owner=sys");
        assert!(matches!(parse_cgs(&text), Err(ModelError::OwnerMismatch { .. })));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let text = "agents: sys env\nactions: a\nprops: p\ninit: s0\nstate s0 {r}\n";
        assert_eq!(
            parse_cgs(text),
            Err(ModelError::Syntax {
                line: 5,
                column: 11,
                message: "unknown proposition `r`".into()
            })
        );
    }

    #[test]
    fn successors_are_a_set() {
        let text = "agents: sys env\nactions: a b\nprops:\ninit: s0\nstate s0 {}\n\
            (sys=a, env=a) -> s0\n(sys=a, env=b) -> s0\n";
        let g = parse_cgs(text).unwrap();
        assert_eq!(g.successors(StateId(0)), vec![StateId(0)]);
    }

    #[test]
    fn available_decisions_edge_cases() {
        let g = parse_cgs(VEND).unwrap();
        let root = g.init();
        assert_eq!(g.available_decisions(root, AgentSet::EMPTY).len(), 1);
        let all = g.available_decisions(root, g.all_agents());
        assert_eq!(all.len(), g.row(root).iter().flatten().count());
        let env = AgentSet::singleton(g.env());
        assert_eq!(g.available_decisions(root, env).len(), 2);
        for d in &all {
            assert!(g.target(root, d).is_some());
        }
    }

    #[test]
    fn pruning_vending_root() {
        let g = parse_cgs(VEND).unwrap();
        let sq = g.state_by_name("sq").unwrap();
        let mut p = Pruning::full(&g);
        assert_eq!(g.apply_pruning(&p).unwrap(), g);
        p.enabled.insert(g.init(), vec![sq]);
        let pruned = g.apply_pruning(&p).unwrap();
        assert_eq!(pruned.successors(pruned.init()), vec![sq]);
        p.enabled.insert(g.init(), vec![]);
        assert!(matches!(g.apply_pruning(&p), Err(ModelError::InvalidPruning(_))));
    }

    #[test]
    fn unwinding_prefixes() {
        let g = parse_cgs(LOOP).unwrap();
        assert_eq!(g.unwind_bounded(0).nodes.len(), 1);
        let chain = g.unwind_bounded(2);
        assert_eq!(chain.nodes.len(), 3);
        assert_eq!(chain.depth(), 2);
        let vend = parse_cgs(VEND).unwrap();
        let t = vend.unwind_bounded(1);
        assert_eq!(t.nodes[0].children.len(), 2);
    }

    #[test]
    fn render_round_trips() {
        for text in [LOOP, VEND] {
            let g = parse_cgs(text).unwrap();
            assert_eq!(parse_cgs(&render_cgs(&g)).unwrap(), g);
        }
    }

    #[test]
    fn decision_union_requires_disjoint_coalitions() {
        let g = parse_cgs(VEND).unwrap();
        let env = AgentSet::singleton(g.env());
        let sys = g.all_agents().without(g.env());
        let de = &g.available_decisions(g.init(), env)[1];
        let ds = &g.available_decisions(g.init(), sys)[0];
        let full = de.union(ds).unwrap();
        assert_eq!(full.coalition(), g.all_agents());
        assert_eq!(g.target(g.init(), &full), g.state_by_name("sq"));
        assert!(de.union(de).is_none());
    }
}
