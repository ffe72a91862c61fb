//! Bytecode decoding into the abstracted instruction stream.
//!
//! Arities are expressed in operand-stack slot units so the dataflow pass
//! can track the stack without type inference.

use alloc::string::String;
use alloc::vec::Vec;

use super::pool::ConstantPool;
use super::{ClassFileError, Instruction, InstructionKind, Reader};
use crate::descriptor::{parse_field_descriptor, parse_method_descriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvokeKind {
    Virtual,
    Special,
    Static,
    Interface,
    Dynamic,
}

impl InvokeKind {
    /// Whether the call pops a receiver slot in addition to the declared
    /// arguments.
    pub fn has_receiver(self) -> bool {
        matches!(self, InvokeKind::Virtual | InvokeKind::Special | InvokeKind::Interface)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackEffect {
    Nop,
    Pop1,
    Pop2,
    Dup,
    DupX1,
    DupX2,
    Dup2,
    Dup2X1,
    Dup2X2,
    Swap,
}

pub(crate) fn decode(
    code: &[u8],
    base: usize,
    pool: &ConstantPool,
) -> Result<Vec<Instruction>, ClassFileError> {
    let mut out = Vec::new();
    let mut r = Reader::new(code);
    while r.pos() < code.len() {
        let offset = r.pos() as u32;
        let kind = decode_one(&mut r, offset, base, pool)?;
        out.push(Instruction { offset, kind });
    }
    Ok(out)
}

fn malformed(base: usize, r: &Reader<'_>, reason: &'static str) -> ClassFileError {
    ClassFileError::Malformed { offset: base + r.pos(), reason }
}

fn rel_target(offset: u32, delta: i32) -> u32 {
    offset.wrapping_add(delta as u32)
}

fn decode_one(
    r: &mut Reader<'_>,
    offset: u32,
    base: usize,
    pool: &ConstantPool,
) -> Result<InstructionKind, ClassFileError> {
    use InstructionKind as K;
    use StackEffect as E;

    let op = r.u8()?;
    let kind = match op {
        0x00 => K::StackOp { effect: E::Nop },
        // Constants.
        0x01..=0x08 => K::Const { width: 1 },
        0x09 | 0x0a => K::Const { width: 2 },
        0x0b..=0x0d => K::Const { width: 1 },
        0x0e | 0x0f => K::Const { width: 2 },
        0x10 => {
            r.u8()?;
            K::Const { width: 1 }
        }
        0x11 => {
            r.u16()?;
            K::Const { width: 1 }
        }
        0x12 => {
            r.u8()?;
            K::Const { width: 1 }
        }
        0x13 => {
            r.u16()?;
            K::Const { width: 1 }
        }
        0x14 => {
            r.u16()?;
            K::Const { width: 2 }
        }
        // Loads.
        0x15 | 0x17 | 0x19 => K::Load { slot: r.u8()? as u16, width: 1 },
        0x16 | 0x18 => K::Load { slot: r.u8()? as u16, width: 2 },
        0x1a..=0x1d => K::Load { slot: (op - 0x1a) as u16, width: 1 },
        0x1e..=0x21 => K::Load { slot: (op - 0x1e) as u16, width: 2 },
        0x22..=0x25 => K::Load { slot: (op - 0x22) as u16, width: 1 },
        0x26..=0x29 => K::Load { slot: (op - 0x26) as u16, width: 2 },
        0x2a..=0x2d => K::Load { slot: (op - 0x2a) as u16, width: 1 },
        // Array loads.
        0x2e | 0x30 | 0x32..=0x35 => K::Other { pops: 2, pushes: 1 },
        0x2f | 0x31 => K::Other { pops: 2, pushes: 2 },
        // Stores.
        0x36 | 0x38 | 0x3a => K::Store { slot: r.u8()? as u16, width: 1 },
        0x37 | 0x39 => K::Store { slot: r.u8()? as u16, width: 2 },
        0x3b..=0x3e => K::Store { slot: (op - 0x3b) as u16, width: 1 },
        0x3f..=0x42 => K::Store { slot: (op - 0x3f) as u16, width: 2 },
        0x43..=0x46 => K::Store { slot: (op - 0x43) as u16, width: 1 },
        0x47..=0x4a => K::Store { slot: (op - 0x47) as u16, width: 2 },
        0x4b..=0x4e => K::Store { slot: (op - 0x4b) as u16, width: 1 },
        // Array stores.
        0x4f | 0x51 | 0x53..=0x56 => K::Other { pops: 3, pushes: 0 },
        0x50 | 0x52 => K::Other { pops: 4, pushes: 0 },
        // Stack ops.
        0x57 => K::StackOp { effect: E::Pop1 },
        0x58 => K::StackOp { effect: E::Pop2 },
        0x59 => K::StackOp { effect: E::Dup },
        0x5a => K::StackOp { effect: E::DupX1 },
        0x5b => K::StackOp { effect: E::DupX2 },
        0x5c => K::StackOp { effect: E::Dup2 },
        0x5d => K::StackOp { effect: E::Dup2X1 },
        0x5e => K::StackOp { effect: E::Dup2X2 },
        0x5f => K::StackOp { effect: E::Swap },
        // Arithmetic: add/sub/mul/div/rem in i/l/f/d order.
        0x60 | 0x62 | 0x64 | 0x66 | 0x68 | 0x6a | 0x6c | 0x6e | 0x70 | 0x72 => {
            K::Other { pops: 2, pushes: 1 }
        }
        0x61 | 0x63 | 0x65 | 0x67 | 0x69 | 0x6b | 0x6d | 0x6f | 0x71 | 0x73 => {
            K::Other { pops: 4, pushes: 2 }
        }
        0x74 | 0x76 => K::Other { pops: 1, pushes: 1 },
        0x75 | 0x77 => K::Other { pops: 2, pushes: 2 },
        // Shifts: long shifts take a one-slot shift amount.
        0x78 | 0x7a | 0x7c => K::Other { pops: 2, pushes: 1 },
        0x79 | 0x7b | 0x7d => K::Other { pops: 3, pushes: 2 },
        // Bitwise.
        0x7e | 0x80 | 0x82 => K::Other { pops: 2, pushes: 1 },
        0x7f | 0x81 | 0x83 => K::Other { pops: 4, pushes: 2 },
        0x84 => {
            r.take(2)?; // iinc: in-place, origin of the slot is unchanged
            K::Other { pops: 0, pushes: 0 }
        }
        // Conversions.
        0x85 | 0x87 | 0x8c | 0x8d => K::Other { pops: 1, pushes: 2 },
        0x86 | 0x8b | 0x91 | 0x92 | 0x93 => K::Other { pops: 1, pushes: 1 },
        0x88 | 0x89 | 0x90 | 0x8e => K::Other { pops: 2, pushes: 1 },
        0x8a | 0x8f => K::Other { pops: 2, pushes: 2 },
        // Comparisons.
        0x94 | 0x97 | 0x98 => K::Other { pops: 4, pushes: 1 },
        0x95 | 0x96 => K::Other { pops: 2, pushes: 1 },
        // Single-operand conditional branches.
        0x99..=0x9e | 0xc6 | 0xc7 => {
            let delta = r.u16()? as i16 as i32;
            K::Branch { targets: alloc::vec![rel_target(offset, delta)], pops: 1, conditional: true }
        }
        // Two-operand conditional branches.
        0x9f..=0xa6 => {
            let delta = r.u16()? as i16 as i32;
            K::Branch { targets: alloc::vec![rel_target(offset, delta)], pops: 2, conditional: true }
        }
        0xa7 => {
            let delta = r.u16()? as i16 as i32;
            K::Branch { targets: alloc::vec![rel_target(offset, delta)], pops: 0, conditional: false }
        }
        // jsr / ret: pre-Java-6 subroutines. The pushed return address is not
        // modeled; methods using them fall back to the warning path if stack
        // depths disagree.
        0xa8 => {
            let delta = r.u16()? as i16 as i32;
            K::Branch { targets: alloc::vec![rel_target(offset, delta)], pops: 0, conditional: false }
        }
        0xa9 => {
            r.u8()?;
            K::Branch { targets: Vec::new(), pops: 0, conditional: false }
        }
        0xaa => {
            // tableswitch
            align_pad(r, offset)?;
            let default = r.u32()? as i32;
            let low = r.u32()? as i32;
            let high = r.u32()? as i32;
            if high < low || (high as i64 - low as i64) > code_branch_limit(r) {
                return Err(malformed(base, r, "tableswitch bounds out of range"));
            }
            let n = (high - low + 1) as usize;
            let mut targets = Vec::with_capacity(n + 1);
            targets.push(rel_target(offset, default));
            for _ in 0..n {
                targets.push(rel_target(offset, r.u32()? as i32));
            }
            K::Branch { targets, pops: 1, conditional: false }
        }
        0xab => {
            // lookupswitch
            align_pad(r, offset)?;
            let default = r.u32()? as i32;
            let npairs = r.u32()? as i32;
            if npairs < 0 || npairs as i64 > code_branch_limit(r) {
                return Err(malformed(base, r, "lookupswitch pair count out of range"));
            }
            let mut targets = Vec::with_capacity(npairs as usize + 1);
            targets.push(rel_target(offset, default));
            for _ in 0..npairs {
                r.u32()?; // match value
                targets.push(rel_target(offset, r.u32()? as i32));
            }
            K::Branch { targets, pops: 1, conditional: false }
        }
        0xac..=0xb0 => K::Return { has_value: true },
        0xb1 => K::Return { has_value: false },
        0xb2..=0xb5 => {
            let index = r.u16()?;
            let at = base + r.pos();
            let (owner, field_name, desc) = pool.member_ref(index, at)?;
            let field_type = parse_field_descriptor(&desc).map_err(|_| {
                ClassFileError::Malformed { offset: at, reason: "invalid field descriptor" }
            })?;
            let is_static = op == 0xb2 || op == 0xb3;
            if op == 0xb2 || op == 0xb4 {
                K::FieldGet { owner, field_name, field_type, is_static }
            } else {
                K::FieldPut { owner, field_name, field_type, is_static }
            }
        }
        0xb6..=0xb9 => {
            let index = r.u16()?;
            if op == 0xb9 {
                r.take(2)?; // count + zero byte
            }
            let at = base + r.pos();
            let (owner, name, desc) = pool.member_ref(index, at)?;
            let descriptor = parse_method_descriptor(&desc).map_err(|_| {
                ClassFileError::Malformed { offset: at, reason: "invalid callee descriptor" }
            })?;
            let kind = match op {
                0xb6 => InvokeKind::Virtual,
                0xb7 => InvokeKind::Special,
                0xb8 => InvokeKind::Static,
                _ => InvokeKind::Interface,
            };
            K::Invoke { kind, owner, name, descriptor }
        }
        0xba => {
            let index = r.u16()?;
            r.take(2)?; // two zero bytes
            let at = base + r.pos();
            let (name, desc) = pool.dynamic_ref(index, at)?;
            let descriptor = parse_method_descriptor(&desc).map_err(|_| {
                ClassFileError::Malformed { offset: at, reason: "invalid indy descriptor" }
            })?;
            K::Invoke { kind: InvokeKind::Dynamic, owner: String::from("<indy>"), name, descriptor }
        }
        0xbb => {
            r.u16()?;
            K::Other { pops: 0, pushes: 1 }
        }
        0xbc => {
            r.u8()?;
            K::Other { pops: 1, pushes: 1 }
        }
        0xbd => {
            r.u16()?;
            K::Other { pops: 1, pushes: 1 }
        }
        0xbe => K::Other { pops: 1, pushes: 1 },
        0xbf => K::Branch { targets: Vec::new(), pops: 1, conditional: false },
        0xc0 | 0xc1 => {
            r.u16()?;
            K::Other { pops: 1, pushes: 1 }
        }
        0xc2 | 0xc3 => K::Other { pops: 1, pushes: 0 },
        0xc4 => {
            // wide prefix
            let wide_op = r.u8()?;
            let slot = r.u16()?;
            match wide_op {
                0x15 | 0x17 | 0x19 => K::Load { slot, width: 1 },
                0x16 | 0x18 => K::Load { slot, width: 2 },
                0x36 | 0x38 | 0x3a => K::Store { slot, width: 1 },
                0x37 | 0x39 => K::Store { slot, width: 2 },
                0xa9 => K::Branch { targets: Vec::new(), pops: 0, conditional: false },
                0x84 => {
                    r.take(2)?;
                    K::Other { pops: 0, pushes: 0 }
                }
                _ => return Err(malformed(base, r, "invalid opcode after wide prefix")),
            }
        }
        0xc5 => {
            r.u16()?;
            let dims = r.u8()?;
            if dims == 0 {
                return Err(malformed(base, r, "multianewarray with zero dimensions"));
            }
            K::Other { pops: dims, pushes: 1 }
        }
        0xc8 | 0xc9 => {
            let delta = r.u32()? as i32;
            K::Branch { targets: alloc::vec![rel_target(offset, delta)], pops: 0, conditional: false }
        }
        // Reserved / implementation-internal opcodes: no defined operands or
        // stack behavior; decoded as inert so the parse stays total.
        _ => K::Other { pops: 0, pushes: 0 },
    };
    Ok(kind)
}

fn align_pad(r: &mut Reader<'_>, offset: u32) -> Result<(), ClassFileError> {
    let pad = (4 - ((offset as usize + 1) % 4)) % 4;
    r.take(pad)?;
    Ok(())
}

/// Cap on switch table size: a table cannot have more entries than code
/// bytes remaining, which rejects absurd counts in corrupt input early.
fn code_branch_limit(r: &Reader<'_>) -> i64 {
    (r.remaining() / 4) as i64 + 1
}

