//! Intra-procedural dataflow patterns over the operand stack.
//!
//! Abstract values are sets of [`Origin`]s propagated through stack slots and
//! local-variable slots to a fixpoint. Merging at control-flow joins is set
//! union, so the result over-approximates: any flow that exists along some
//! path is reported.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::classfile::{InstructionKind, MethodModel, StackEffect};

/// Where an abstract value may have come from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    /// 0-based parameter position; the receiver is parameter 0 for instance
    /// methods.
    Param(u16),
    /// `owner.field_name` identifier; static and instance fields are not
    /// distinguished.
    Field(String),
    Other,
}

/// Per-method results for the three tracked patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowFacts {
    pub params_to_return: BTreeSet<u16>,
    pub params_to_field: BTreeSet<(u16, String)>,
    pub fields_to_return: BTreeSet<String>,
}

impl FlowFacts {
    pub fn is_empty(&self) -> bool {
        self.params_to_return.is_empty()
            && self.params_to_field.is_empty()
            && self.fields_to_return.is_empty()
    }

    /// Superset check, used by the looping-fixture property tests.
    pub fn contains_all(&self, other: &FlowFacts) -> bool {
        other.params_to_return.is_subset(&self.params_to_return)
            && other.params_to_field.is_subset(&self.params_to_field)
            && other.fields_to_return.is_subset(&self.fields_to_return)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowError {
    StackUnderflow { offset: u32 },
    InconsistentStackDepth { offset: u32 },
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::StackUnderflow { offset } => {
                write!(f, "operand stack underflow at offset {offset}")
            }
            FlowError::InconsistentStackDepth { offset } => {
                write!(f, "inconsistent stack depth at offset {offset}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FlowError {}

/// Dense bitset over the per-method origin universe
/// (bit 0 = Other, then params, then fields).
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(words: usize) -> Self {
        Bits(vec![0; words])
    }

    fn single(words: usize, bit: usize) -> Self {
        let mut b = Bits::empty(words);
        b.set(bit);
        b
    }

    fn set(&mut self, bit: usize) {
        self.0[bit / 64] |= 1 << (bit % 64);
    }

    /// Unions `other` into `self`; true when anything changed.
    fn union_in(&mut self, other: &Bits) -> bool {
        let mut changed = false;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            let next = *a | *b;
            changed |= next != *a;
            *a = next;
        }
        changed
    }

    fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word & (1 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

struct State {
    stack: Vec<Bits>,
    locals: Vec<Bits>,
}

/// Computes flow facts, mapping analysis failures (malformed stack shapes)
/// to empty facts as the scan contract requires.
pub fn analyze_flows(method: &MethodModel) -> FlowFacts {
    try_analyze_flows(method).unwrap_or_default()
}

/// Computes flow facts or reports why the method's stack shape is untrackable.
pub fn try_analyze_flows(method: &MethodModel) -> Result<FlowFacts, FlowError> {
    if method.instructions.is_empty() {
        return Ok(FlowFacts::default());
    }
    Analysis::new(method).run()
}

struct Analysis<'m> {
    method: &'m MethodModel,
    words: usize,
    /// bit index -> field identifier, for bits past the parameter range.
    field_keys: Vec<String>,
    param_bits: usize,
    facts: FlowFacts,
}

impl<'m> Analysis<'m> {
    fn new(method: &'m MethodModel) -> Self {
        let mut field_keys: Vec<String> = Vec::new();
        for insn in &method.instructions {
            if let InstructionKind::FieldGet { owner, field_name, .. }
            | InstructionKind::FieldPut { owner, field_name, .. } = &insn.kind
            {
                let key = field_key(owner, field_name);
                if !field_keys.contains(&key) {
                    field_keys.push(key);
                }
            }
        }
        let param_bits = method.flow_param_count();
        let universe = 1 + param_bits + field_keys.len();
        Analysis {
            method,
            words: universe.div_ceil(64),
            field_keys,
            param_bits,
            facts: FlowFacts::default(),
        }
    }

    fn other_bit(&self) -> usize {
        0
    }

    fn param_bit(&self, index: usize) -> usize {
        1 + index
    }

    fn field_bit(&self, key: &str) -> usize {
        1 + self.param_bits + self.field_keys.iter().position(|k| k == key).unwrap()
    }

    fn record(&mut self, value: &Bits, sink: Sink<'_>) {
        for bit in value.iter_ones() {
            if bit == 0 {
                continue;
            }
            if bit <= self.param_bits {
                let p = (bit - 1) as u16;
                match sink {
                    Sink::Return => {
                        self.facts.params_to_return.insert(p);
                    }
                    Sink::Field(key) => {
                        self.facts.params_to_field.insert((p, String::from(key)));
                    }
                }
            } else if let Sink::Return = sink {
                let key = &self.field_keys[bit - 1 - self.param_bits];
                self.facts.fields_to_return.insert(key.clone());
            }
        }
    }

    fn initial_locals(&self) -> Vec<Bits> {
        let m = self.method;
        let mut max_slot = m.descriptor.param_slot_width() + usize::from(!m.is_static);
        for insn in &m.instructions {
            if let InstructionKind::Load { slot, width } | InstructionKind::Store { slot, width } =
                insn.kind
            {
                max_slot = max_slot.max(slot as usize + width as usize);
            }
        }
        let mut locals = vec![Bits::single(self.words, self.other_bit()); max_slot.max(1)];
        let mut slot = 0usize;
        let mut param = 0usize;
        if !m.is_static {
            locals[0] = Bits::single(self.words, self.param_bit(0));
            slot = 1;
            param = 1;
        }
        for t in &m.descriptor.param_types {
            locals[slot] = Bits::single(self.words, self.param_bit(param));
            slot += t.slot_width();
            param += 1;
        }
        locals
    }

    fn run(mut self) -> Result<FlowFacts, FlowError> {
        let insns = &self.method.instructions;
        let index_of = |offset: u32| -> Option<usize> {
            insns.binary_search_by_key(&offset, |i| i.offset).ok()
        };

        let mut in_states: Vec<Option<State>> = (0..insns.len()).map(|_| None).collect();
        in_states[0] = Some(State { stack: Vec::new(), locals: self.initial_locals() });

        let mut worklist: Vec<usize> = vec![0];
        let mut on_list = vec![false; insns.len()];
        on_list[0] = true;

        // Bounded by |insns| * universe bits * stack depth; the worklist
        // terminates because states only grow under union.
        while let Some(i) = worklist.pop() {
            on_list[i] = false;
            let insn = &insns[i];
            let state = in_states[i].as_ref().expect("worklist entries have a state");
            let mut stack = state.stack.clone();
            let mut locals = state.locals.clone();
            let offset = insn.offset;

            let mut succs: Vec<usize> = Vec::new();
            let push_succ = |idx: Option<usize>, succs: &mut Vec<usize>| {
                if let Some(s) = idx {
                    succs.push(s);
                }
            };

            macro_rules! pop {
                () => {
                    stack.pop().ok_or(FlowError::StackUnderflow { offset })?
                };
            }
            macro_rules! pop_union {
                ($n:expr) => {{
                    let mut v = Bits::empty(self.words);
                    for _ in 0..$n {
                        let x = pop!();
                        v.union_in(&x);
                    }
                    v
                }};
            }

            match &insn.kind {
                InstructionKind::Load { slot, width } => {
                    let slot = *slot as usize;
                    let mut v = locals
                        .get(slot)
                        .cloned()
                        .unwrap_or_else(|| Bits::single(self.words, self.other_bit()));
                    if *width == 2 {
                        if let Some(hi) = locals.get(slot + 1) {
                            v.union_in(hi);
                        }
                    }
                    for _ in 0..*width {
                        stack.push(v.clone());
                    }
                    push_succ(Some(i + 1).filter(|&s| s < insns.len()), &mut succs);
                }
                InstructionKind::Store { slot, width } => {
                    let v = pop_union!(*width);
                    let slot = *slot as usize;
                    if slot + *width as usize > locals.len() {
                        locals.resize(
                            slot + *width as usize,
                            Bits::single(self.words, self.other_bit()),
                        );
                    }
                    locals[slot] = v;
                    if *width == 2 {
                        locals[slot + 1] = Bits::single(self.words, self.other_bit());
                    }
                    push_succ(Some(i + 1).filter(|&s| s < insns.len()), &mut succs);
                }
                InstructionKind::Const { width } => {
                    for _ in 0..*width {
                        stack.push(Bits::single(self.words, self.other_bit()));
                    }
                    push_succ(Some(i + 1).filter(|&s| s < insns.len()), &mut succs);
                }
                InstructionKind::StackOp { effect } => {
                    apply_stack_effect(&mut stack, *effect, offset)?;
                    push_succ(Some(i + 1).filter(|&s| s < insns.len()), &mut succs);
                }
                InstructionKind::FieldGet { owner, field_name, field_type, is_static } => {
                    if !is_static {
                        let _receiver = pop!();
                    }
                    let key = field_key(owner, field_name);
                    let mut v = Bits::single(self.words, self.field_bit(&key));
                    v.set(self.other_bit());
                    for _ in 0..field_type.slot_width() {
                        stack.push(v.clone());
                    }
                    push_succ(Some(i + 1).filter(|&s| s < insns.len()), &mut succs);
                }
                InstructionKind::FieldPut { owner, field_name, field_type, is_static } => {
                    let v = pop_union!(field_type.slot_width());
                    if !is_static {
                        let _receiver = pop!();
                    }
                    let key = field_key(owner, field_name);
                    self.record(&v, Sink::Field(&key));
                    push_succ(Some(i + 1).filter(|&s| s < insns.len()), &mut succs);
                }
                InstructionKind::Invoke { kind, descriptor, .. } => {
                    let arg_slots =
                        descriptor.param_slot_width() + usize::from(kind.has_receiver());
                    let mut v = pop_union!(arg_slots);
                    v.set(self.other_bit());
                    for _ in 0..descriptor.return_slot_width() {
                        stack.push(v.clone());
                    }
                    push_succ(Some(i + 1).filter(|&s| s < insns.len()), &mut succs);
                }
                InstructionKind::Return { has_value } => {
                    if *has_value {
                        let width = self.method.descriptor.return_slot_width().max(1);
                        let v = pop_union!(width);
                        self.record(&v, Sink::Return);
                    }
                    // no successors
                }
                InstructionKind::Branch { targets, pops, conditional } => {
                    let _ = pop_union!(*pops);
                    for t in targets {
                        match index_of(*t) {
                            Some(s) => succs.push(s),
                            None => return Err(FlowError::InconsistentStackDepth { offset }),
                        }
                    }
                    if *conditional {
                        push_succ(Some(i + 1).filter(|&s| s < insns.len()), &mut succs);
                    }
                }
                InstructionKind::Other { pops, pushes } => {
                    let v = if *pops == 0 {
                        Bits::single(self.words, self.other_bit())
                    } else {
                        pop_union!(*pops)
                    };
                    for _ in 0..*pushes {
                        stack.push(v.clone());
                    }
                    push_succ(Some(i + 1).filter(|&s| s < insns.len()), &mut succs);
                }
            }

            let out = State { stack, locals };

            // Exception handlers covering this instruction start with a
            // one-deep all-Other stack and the current locals.
            for &(start, end, handler) in &self.method.exception_handlers {
                if offset >= start && offset < end {
                    if let Some(h) = index_of(handler) {
                        let hstate = State {
                            stack: vec![Bits::single(self.words, self.other_bit())],
                            locals: out.locals.clone(),
                        };
                        if merge_into(&mut in_states[h], hstate, offset)? && !on_list[h] {
                            worklist.push(h);
                            on_list[h] = true;
                        }
                    }
                }
            }

            for s in succs {
                let state = State { stack: out.stack.clone(), locals: out.locals.clone() };
                if merge_into(&mut in_states[s], state, offset)? && !on_list[s] {
                    worklist.push(s);
                    on_list[s] = true;
                }
            }
        }

        Ok(self.facts)
    }
}

enum Sink<'a> {
    Return,
    Field(&'a str),
}

fn field_key(owner: &str, name: &str) -> String {
    let mut s = String::with_capacity(owner.len() + name.len() + 1);
    s.push_str(owner);
    s.push('.');
    s.push_str(name);
    s
}

fn merge_into(slot: &mut Option<State>, incoming: State, offset: u32) -> Result<bool, FlowError> {
    match slot {
        None => {
            *slot = Some(incoming);
            Ok(true)
        }
        Some(existing) => {
            if existing.stack.len() != incoming.stack.len() {
                return Err(FlowError::InconsistentStackDepth { offset });
            }
            let mut changed = false;
            for (a, b) in existing.stack.iter_mut().zip(&incoming.stack) {
                changed |= a.union_in(b);
            }
            let base = existing.locals.len();
            if incoming.locals.len() > base {
                existing.locals.extend(incoming.locals[base..].iter().cloned());
                changed = true;
            }
            for (a, b) in existing.locals.iter_mut().zip(&incoming.locals) {
                changed |= a.union_in(b);
            }
            Ok(changed)
        }
    }
}

fn apply_stack_effect(
    stack: &mut Vec<Bits>,
    effect: StackEffect,
    offset: u32,
) -> Result<(), FlowError> {
    let underflow = FlowError::StackUnderflow { offset };
    let need = |stack: &Vec<Bits>, n: usize| -> Result<(), FlowError> {
        if stack.len() < n {
            Err(FlowError::StackUnderflow { offset })
        } else {
            Ok(())
        }
    };
    match effect {
        StackEffect::Nop => {}
        StackEffect::Pop1 => {
            stack.pop().ok_or(underflow)?;
        }
        StackEffect::Pop2 => {
            need(stack, 2)?;
            stack.pop();
            stack.pop();
        }
        StackEffect::Dup => {
            let top = stack.last().ok_or(underflow)?.clone();
            stack.push(top);
        }
        StackEffect::DupX1 => {
            need(stack, 2)?;
            let top = stack[stack.len() - 1].clone();
            stack.insert(stack.len() - 2, top);
        }
        StackEffect::DupX2 => {
            need(stack, 3)?;
            let top = stack[stack.len() - 1].clone();
            stack.insert(stack.len() - 3, top);
        }
        StackEffect::Dup2 => {
            need(stack, 2)?;
            let a = stack[stack.len() - 1].clone();
            let b = stack[stack.len() - 2].clone();
            stack.push(b);
            stack.push(a);
        }
        StackEffect::Dup2X1 => {
            need(stack, 3)?;
            let a = stack[stack.len() - 1].clone();
            let b = stack[stack.len() - 2].clone();
            let at = stack.len() - 3;
            stack.insert(at, a);
            stack.insert(at, b);
        }
        StackEffect::Dup2X2 => {
            need(stack, 4)?;
            let a = stack[stack.len() - 1].clone();
            let b = stack[stack.len() - 2].clone();
            let at = stack.len() - 4;
            stack.insert(at, a);
            stack.insert(at, b);
        }
        StackEffect::Swap => {
            need(stack, 2)?;
            let len = stack.len();
            stack.swap(len - 1, len - 2);
        }
    }
    Ok(())
}
