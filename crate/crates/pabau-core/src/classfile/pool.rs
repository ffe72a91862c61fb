//! Constant-pool parsing and symbolic resolution.

use alloc::string::String;
use alloc::vec::Vec;

use super::{ClassFileError, Reader};

#[derive(Debug, Clone)]
pub(crate) enum PoolEntry {
    Utf8(String),
    Class { name_index: u16 },
    NameAndType { name_index: u16, descriptor_index: u16 },
    /// Fieldref, Methodref and InterfaceMethodref share this layout.
    MemberRef { class_index: u16, name_and_type_index: u16 },
    /// Dynamic / InvokeDynamic: only the NameAndType half is relevant here.
    DynamicRef { name_and_type_index: u16 },
    /// Integer, Float, String, MethodType, MethodHandle, Module, Package —
    /// values this analysis never reads.
    Opaque,
    /// Long/Double occupy two pool slots; the second is this placeholder.
    Wide2,
    /// Index 0 and the slot after a wide entry.
    Unusable,
}

pub(crate) struct ConstantPool {
    entries: Vec<PoolEntry>,
}

impl ConstantPool {
    pub(crate) fn parse(r: &mut Reader<'_>) -> Result<Self, ClassFileError> {
        let count = r.u16()? as usize;
        let mut entries = Vec::with_capacity(count);
        entries.push(PoolEntry::Unusable); // index 0 is never valid
        while entries.len() < count {
            let at = r.pos();
            let tag = r.u8()?;
            let entry = match tag {
                1 => {
                    let len = r.u16()? as usize;
                    let bytes = r.take(len)?;
                    // Modified UTF-8; plain UTF-8 decoding with lossy
                    // fallback is sufficient for the identifiers we read.
                    PoolEntry::Utf8(decode_modified_utf8(bytes))
                }
                3 | 4 => {
                    r.take(4)?;
                    PoolEntry::Opaque
                }
                5 | 6 => {
                    r.take(8)?;
                    PoolEntry::Wide2
                }
                7 => PoolEntry::Class { name_index: r.u16()? },
                8 => {
                    r.take(2)?;
                    PoolEntry::Opaque
                }
                9 | 10 | 11 => PoolEntry::MemberRef {
                    class_index: r.u16()?,
                    name_and_type_index: r.u16()?,
                },
                12 => PoolEntry::NameAndType {
                    name_index: r.u16()?,
                    descriptor_index: r.u16()?,
                },
                15 => {
                    r.take(3)?;
                    PoolEntry::Opaque
                }
                16 => {
                    r.take(2)?;
                    PoolEntry::Opaque
                }
                17 | 18 => {
                    r.take(2)?; // bootstrap_method_attr_index
                    PoolEntry::DynamicRef { name_and_type_index: r.u16()? }
                }
                19 | 20 => {
                    r.take(2)?;
                    PoolEntry::Opaque
                }
                other => {
                    return Err(ClassFileError::Malformed {
                        offset: at,
                        reason: const_tag_error(other),
                    })
                }
            };
            let is_wide = matches!(entry, PoolEntry::Wide2);
            entries.push(entry);
            if is_wide {
                if entries.len() < count {
                    entries.push(PoolEntry::Unusable);
                } else {
                    return Err(ClassFileError::Malformed {
                        offset: at,
                        reason: "long/double constant overflows the pool",
                    });
                }
            }
        }
        Ok(ConstantPool { entries })
    }

    fn get(&self, index: u16, at: usize) -> Result<&PoolEntry, ClassFileError> {
        self.entries.get(index as usize).ok_or(ClassFileError::Malformed {
            offset: at,
            reason: "constant pool index out of range",
        })
    }

    pub(crate) fn utf8(&self, index: u16, at: usize) -> Result<&str, ClassFileError> {
        match self.get(index, at)? {
            PoolEntry::Utf8(s) => Ok(s),
            _ => Err(ClassFileError::Malformed { offset: at, reason: "expected Utf8 constant" }),
        }
    }

    /// Class name as a fully-qualified dot-separated binary name.
    pub(crate) fn class_name(&self, index: u16, at: usize) -> Result<String, ClassFileError> {
        match self.get(index, at)? {
            PoolEntry::Class { name_index } => {
                let internal = self.utf8(*name_index, at)?;
                Ok(internal.chars().map(|c| if c == '/' { '.' } else { c }).collect())
            }
            _ => Err(ClassFileError::Malformed { offset: at, reason: "expected Class constant" }),
        }
    }

    pub(crate) fn name_and_type(
        &self,
        index: u16,
        at: usize,
    ) -> Result<(&str, &str), ClassFileError> {
        match self.get(index, at)? {
            PoolEntry::NameAndType { name_index, descriptor_index } => {
                Ok((self.utf8(*name_index, at)?, self.utf8(*descriptor_index, at)?))
            }
            _ => Err(ClassFileError::Malformed {
                offset: at,
                reason: "expected NameAndType constant",
            }),
        }
    }

    /// Resolves a Fieldref/Methodref/InterfaceMethodref to
    /// (owner, name, descriptor).
    pub(crate) fn member_ref(
        &self,
        index: u16,
        at: usize,
    ) -> Result<(String, String, String), ClassFileError> {
        match self.get(index, at)? {
            PoolEntry::MemberRef { class_index, name_and_type_index } => {
                let owner = self.class_name(*class_index, at)?;
                let (name, desc) = self.name_and_type(*name_and_type_index, at)?;
                Ok((owner, String::from(name), String::from(desc)))
            }
            _ => Err(ClassFileError::Malformed { offset: at, reason: "expected member ref" }),
        }
    }

    /// Resolves an InvokeDynamic entry to (name, descriptor).
    pub(crate) fn dynamic_ref(&self, index: u16, at: usize) -> Result<(String, String), ClassFileError> {
        match self.get(index, at)? {
            PoolEntry::DynamicRef { name_and_type_index } => {
                let (name, desc) = self.name_and_type(*name_and_type_index, at)?;
                Ok((String::from(name), String::from(desc)))
            }
            _ => Err(ClassFileError::Malformed { offset: at, reason: "expected dynamic ref" }),
        }
    }
}

fn const_tag_error(tag: u8) -> &'static str {
    let _ = tag;
    "unknown constant pool tag"
}

/// Decodes JVM modified UTF-8. Surrogate pairs and embedded NULs are handled;
/// malformed sequences fall back to U+FFFD rather than failing the parse.
fn decode_modified_utf8(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b & 0x80 == 0 {
            out.push(b as char);
            i += 1;
        } else if b & 0xe0 == 0xc0 && i + 1 < bytes.len() {
            let c = (((b & 0x1f) as u32) << 6) | (bytes[i + 1] & 0x3f) as u32;
            out.push(char::from_u32(c).unwrap_or('\u{fffd}'));
            i += 2;
        } else if b & 0xf0 == 0xe0 && i + 2 < bytes.len() {
            let c = (((b & 0x0f) as u32) << 12)
                | (((bytes[i + 1] & 0x3f) as u32) << 6)
                | (bytes[i + 2] & 0x3f) as u32;
            // Surrogate pair: two 3-byte sequences.
            if (0xd800..0xdc00).contains(&c) && i + 5 < bytes.len() && bytes[i + 3] & 0xf0 == 0xe0 {
                let lo = (((bytes[i + 3] & 0x0f) as u32) << 12)
                    | (((bytes[i + 4] & 0x3f) as u32) << 6)
                    | (bytes[i + 5] & 0x3f) as u32;
                if (0xdc00..0xe000).contains(&lo) {
                    let combined = 0x10000 + ((c - 0xd800) << 10) + (lo - 0xdc00);
                    out.push(char::from_u32(combined).unwrap_or('\u{fffd}'));
                    i += 6;
                    continue;
                }
            }
            out.push(char::from_u32(c).unwrap_or('\u{fffd}'));
            i += 3;
        } else {
            out.push('\u{fffd}');
            i += 1;
        }
    }
    out
}
