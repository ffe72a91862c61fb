//! Class-file parsing into the structural model used by feature extraction.
//!
//! The parser resolves constant-pool indices eagerly, decodes method bodies
//! into an abstracted instruction stream, and skips every attribute it does
//! not need. It never panics on arbitrary input: any structural problem is a
//! [`ClassFileError`] carrying the byte offset where parsing stopped.

mod code;
mod pool;

pub use code::{InvokeKind, StackEffect};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::descriptor::{parse_method_descriptor, MethodDescriptor, TypeRef};
use pool::ConstantPool;

pub const CLASS_MAGIC: u32 = 0xCAFE_BABE;
pub const MIN_MAJOR_VERSION: u16 = 45;
pub const MAX_MAJOR_VERSION: u16 = 65;

const ACC_NATIVE: u16 = 0x0100;
const ACC_ABSTRACT: u16 = 0x0400;

/// Parsed structure of one class file.
#[derive(Debug, Clone)]
pub struct ClassModel {
    /// Fully-qualified dot-separated binary name, `$` kept verbatim.
    pub binary_name: String,
    /// Absent only for `java.lang.Object`.
    pub super_name: Option<String>,
    pub methods: Vec<MethodModel>,
    /// Origin of the class: archive (or directory) path plus entry name.
    /// Empty when parsed from a raw byte buffer.
    pub source_archive: SourceRef,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceRef {
    pub archive: String,
    pub entry: String,
}

#[derive(Debug, Clone)]
pub struct MethodModel {
    /// Fully-qualified name of the declaring class.
    pub owner: String,
    pub name: String,
    pub descriptor: MethodDescriptor,
    pub is_static: bool,
    pub is_abstract_or_native: bool,
    /// Empty when the method has no Code attribute.
    pub instructions: Vec<Instruction>,
    /// (start_pc, end_pc, handler_pc) ranges from the Code attribute.
    pub exception_handlers: Vec<(u32, u32, u32)>,
}

impl MethodModel {
    /// Parameter count for dataflow purposes: the receiver counts as
    /// parameter 0 for instance methods.
    pub fn flow_param_count(&self) -> usize {
        self.descriptor.param_types.len() + usize::from(!self.is_static)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub offset: u32,
    pub kind: InstructionKind,
}

/// Abstracted instruction. Stack arities are in operand-stack slot units
/// (`long`/`double` values occupy two slots).
#[derive(Debug, Clone, PartialEq)]
pub enum InstructionKind {
    Load { slot: u16, width: u8 },
    Store { slot: u16, width: u8 },
    Invoke { kind: InvokeKind, owner: String, name: String, descriptor: MethodDescriptor },
    FieldGet { owner: String, field_name: String, field_type: TypeRef, is_static: bool },
    FieldPut { owner: String, field_name: String, field_type: TypeRef, is_static: bool },
    Return { has_value: bool },
    /// Conditional branches fall through as well; an empty target list with
    /// `conditional: false` terminates the flow (athrow, ret).
    Branch { targets: Vec<u32>, pops: u8, conditional: bool },
    Const { width: u8 },
    StackOp { effect: StackEffect },
    Other { pops: u8, pushes: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassFileError {
    BadMagic,
    UnsupportedVersion { major: u16 },
    Malformed { offset: usize, reason: &'static str },
}

impl fmt::Display for ClassFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassFileError::BadMagic => write!(f, "not a class file (bad magic)"),
            ClassFileError::UnsupportedVersion { major } => {
                write!(f, "unsupported class file major version {major}")
            }
            ClassFileError::Malformed { offset, reason } => {
                write!(f, "malformed class file at byte {offset}: {reason}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ClassFileError {}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    fn eof_err(&self) -> ClassFileError {
        ClassFileError::Malformed { offset: self.pos, reason: "unexpected end of input" }
    }

    pub(crate) fn u8(&mut self) -> Result<u8, ClassFileError> {
        let b = *self.bytes.get(self.pos).ok_or_else(|| self.eof_err())?;
        self.pos += 1;
        Ok(b)
    }

    pub(crate) fn u16(&mut self) -> Result<u16, ClassFileError> {
        Ok(u16::from_be_bytes([self.u8()?, self.u8()?]))
    }

    pub(crate) fn u32(&mut self) -> Result<u32, ClassFileError> {
        Ok(u32::from_be_bytes([self.u8()?, self.u8()?, self.u8()?, self.u8()?]))
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], ClassFileError> {
        let end = self.pos.checked_add(n).ok_or_else(|| self.eof_err())?;
        if end > self.bytes.len() {
            return Err(self.eof_err());
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
}

/// Parses one class file from raw bytes.
pub fn parse_class(bytes: &[u8]) -> Result<ClassModel, ClassFileError> {
    let mut r = Reader::new(bytes);
    if r.u32().map_err(|_| ClassFileError::BadMagic)? != CLASS_MAGIC {
        return Err(ClassFileError::BadMagic);
    }
    let _minor = r.u16()?;
    let major = r.u16()?;
    if !(MIN_MAJOR_VERSION..=MAX_MAJOR_VERSION).contains(&major) {
        return Err(ClassFileError::UnsupportedVersion { major });
    }
    let pool = ConstantPool::parse(&mut r)?;
    let _access_flags = r.u16()?;
    let this_class = r.u16()?;
    let super_class = r.u16()?;
    let at = r.pos();
    let binary_name = pool.class_name(this_class, at)?;
    if binary_name.is_empty() || binary_name.contains(';') || binary_name.contains('(') {
        return Err(ClassFileError::Malformed { offset: at, reason: "invalid class name" });
    }
    let super_name = if super_class == 0 { None } else { Some(pool.class_name(super_class, at)?) };

    let interface_count = r.u16()? as usize;
    r.take(interface_count * 2)?;

    // Fields: name/descriptor/attributes, all skipped.
    let field_count = r.u16()? as usize;
    for _ in 0..field_count {
        r.take(6)?; // access, name, descriptor
        skip_attributes(&mut r)?;
    }

    let method_count = r.u16()? as usize;
    let mut methods = Vec::with_capacity(method_count);
    for _ in 0..method_count {
        methods.push(parse_method(&mut r, &pool, &binary_name)?);
    }
    skip_attributes(&mut r)?;

    Ok(ClassModel { binary_name, super_name, methods, source_archive: SourceRef::default() })
}

fn skip_attributes(r: &mut Reader<'_>) -> Result<(), ClassFileError> {
    let count = r.u16()? as usize;
    for _ in 0..count {
        r.take(2)?; // name index
        let len = r.u32()? as usize;
        r.take(len)?;
    }
    Ok(())
}

fn parse_method(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    owner: &str,
) -> Result<MethodModel, ClassFileError> {
    let access = r.u16()?;
    let name_index = r.u16()?;
    let descriptor_index = r.u16()?;
    let at = r.pos();
    let name = String::from(pool.utf8(name_index, at)?);
    let raw_descriptor = pool.utf8(descriptor_index, at)?;
    let descriptor = parse_method_descriptor(raw_descriptor).map_err(|_| {
        ClassFileError::Malformed { offset: at, reason: "invalid method descriptor" }
    })?;
    let is_static = access & 0x0008 != 0;
    let is_abstract_or_native = access & (ACC_ABSTRACT | ACC_NATIVE) != 0;

    let mut instructions = Vec::new();
    let mut exception_handlers = Vec::new();
    let attr_count = r.u16()? as usize;
    for _ in 0..attr_count {
        let attr_name_index = r.u16()?;
        let len = r.u32()? as usize;
        let attr_at = r.pos();
        let body = r.take(len)?;
        if pool.utf8(attr_name_index, attr_at)? == "Code" {
            let (insns, handlers) = parse_code(body, attr_at, pool)?;
            instructions = insns;
            exception_handlers = handlers;
        }
    }

    Ok(MethodModel {
        owner: String::from(owner),
        name,
        descriptor,
        is_static,
        is_abstract_or_native,
        instructions,
        exception_handlers,
    })
}

fn parse_code(
    body: &[u8],
    base_offset: usize,
    pool: &ConstantPool,
) -> Result<(Vec<Instruction>, Vec<(u32, u32, u32)>), ClassFileError> {
    let mut r = Reader::new(body);
    let _max_stack = r.u16()?;
    let _max_locals = r.u16()?;
    let code_len = r.u32()? as usize;
    let code_at = r.pos();
    let code = r.take(code_len).map_err(|_| ClassFileError::Malformed {
        offset: base_offset + code_at,
        reason: "truncated code array",
    })?;
    let instructions = code::decode(code, base_offset + code_at, pool)?;

    let handler_count = r.u16()? as usize;
    let mut handlers = Vec::with_capacity(handler_count);
    for _ in 0..handler_count {
        let start = r.u32_pair()?;
        let handler = r.u16()? as u32;
        let _catch_type = r.u16()?;
        handlers.push((start.0, start.1, handler));
    }

    // Validate branch targets and handler pcs against real instruction
    // offsets.
    let offsets: alloc::collections::BTreeSet<u32> =
        instructions.iter().map(|i| i.offset).collect();
    for insn in &instructions {
        if let InstructionKind::Branch { targets, .. } = &insn.kind {
            for t in targets {
                if !offsets.contains(t) {
                    return Err(ClassFileError::Malformed {
                        offset: base_offset + code_at + insn.offset as usize,
                        reason: "branch target is not an instruction offset",
                    });
                }
            }
        }
    }
    for (_, _, h) in &handlers {
        if !offsets.contains(h) {
            return Err(ClassFileError::Malformed {
                offset: base_offset,
                reason: "exception handler pc is not an instruction offset",
            });
        }
    }

    Ok((instructions, handlers))
}

impl<'a> Reader<'a> {
    fn u32_pair(&mut self) -> Result<(u32, u32), ClassFileError> {
        Ok((self.u16()? as u32, self.u16()? as u32))
    }
}
