//! Method and field descriptor grammar.
//!
//! Descriptors follow the class-file grammar: `(` *ParameterDescriptor*\* `)`
//! *ReturnDescriptor*, where a type is one of the eight primitives, an object
//! type `L<binary name>;`, or an array type `[` *ComponentType*. Parsing is
//! lossless: rendering a parsed descriptor reproduces the input byte-for-byte.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// One of the eight JVM primitive types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Primitive {
    Byte,
    Char,
    Double,
    Float,
    Int,
    Long,
    Short,
    Boolean,
}

impl Primitive {
    pub fn tag(self) -> char {
        match self {
            Primitive::Byte => 'B',
            Primitive::Char => 'C',
            Primitive::Double => 'D',
            Primitive::Float => 'F',
            Primitive::Int => 'I',
            Primitive::Long => 'J',
            Primitive::Short => 'S',
            Primitive::Boolean => 'Z',
        }
    }

    pub fn from_tag(c: char) -> Option<Self> {
        Some(match c {
            'B' => Primitive::Byte,
            'C' => Primitive::Char,
            'D' => Primitive::Double,
            'F' => Primitive::Float,
            'I' => Primitive::Int,
            'J' => Primitive::Long,
            'S' => Primitive::Short,
            'Z' => Primitive::Boolean,
            _ => return None,
        })
    }

    /// Java source-level name, as used in rendered type strings.
    pub fn name(self) -> &'static str {
        match self {
            Primitive::Byte => "byte",
            Primitive::Char => "char",
            Primitive::Double => "double",
            Primitive::Float => "float",
            Primitive::Int => "int",
            Primitive::Long => "long",
            Primitive::Short => "short",
            Primitive::Boolean => "boolean",
        }
    }

    pub const ALL: [Primitive; 8] = [
        Primitive::Byte,
        Primitive::Char,
        Primitive::Double,
        Primitive::Float,
        Primitive::Int,
        Primitive::Long,
        Primitive::Short,
        Primitive::Boolean,
    ];
}

/// A single parameter or return type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Primitive(Primitive),
    /// Fully-qualified class name, dot-separated. Inner-class `$` is kept
    /// verbatim.
    Object(String),
    Array {
        element: alloc::boxed::Box<TypeRef>,
        dimensions: u8,
    },
}

impl TypeRef {
    /// Number of operand-stack slots a value of this type occupies.
    pub fn slot_width(&self) -> usize {
        match self {
            TypeRef::Primitive(Primitive::Long) | TypeRef::Primitive(Primitive::Double) => 2,
            _ => 1,
        }
    }

    pub fn is_primitive(&self) -> bool {
        matches!(self, TypeRef::Primitive(_))
    }

    /// Rendered Java-style type string, e.g. `int`, `java.lang.String`,
    /// `byte[][]`.
    pub fn render(&self) -> String {
        match self {
            TypeRef::Primitive(p) => String::from(p.name()),
            TypeRef::Object(name) => name.clone(),
            TypeRef::Array { element, dimensions } => {
                let mut s = element.render();
                for _ in 0..*dimensions {
                    s.push_str("[]");
                }
                s
            }
        }
    }

    /// Unqualified class name for object types (`String` for
    /// `java.lang.String`, `BiometricPrompt$CryptoObject` stays whole after
    /// the last dot). Primitives render their Java name; arrays defer to the
    /// element type.
    pub fn simple_name(&self) -> &str {
        match self {
            TypeRef::Primitive(p) => p.name(),
            TypeRef::Object(name) => name.rsplit('.').next().unwrap_or(name),
            TypeRef::Array { element, .. } => element.simple_name(),
        }
    }

    fn write_descriptor(&self, out: &mut String) {
        match self {
            TypeRef::Primitive(p) => out.push(p.tag()),
            TypeRef::Object(name) => {
                out.push('L');
                for c in name.chars() {
                    out.push(if c == '.' { '/' } else { c });
                }
                out.push(';');
            }
            TypeRef::Array { element, dimensions } => {
                for _ in 0..*dimensions {
                    out.push('[');
                }
                element.write_descriptor(out);
            }
        }
    }
}

/// Parsed method descriptor: parameter types in declaration order plus the
/// return type (`None` for `void`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodDescriptor {
    pub param_types: Vec<TypeRef>,
    pub return_type: Option<TypeRef>,
}

impl MethodDescriptor {
    /// Renders back to the raw descriptor string. Inverse of
    /// [`parse_method_descriptor`].
    pub fn render(&self) -> String {
        let mut out = String::from("(");
        for p in &self.param_types {
            p.write_descriptor(&mut out);
        }
        out.push(')');
        match &self.return_type {
            Some(t) => t.write_descriptor(&mut out),
            None => out.push('V'),
        }
        out
    }

    /// Total operand slots the declared parameters occupy (receiver not
    /// included).
    pub fn param_slot_width(&self) -> usize {
        self.param_types.iter().map(TypeRef::slot_width).sum()
    }

    pub fn return_slot_width(&self) -> usize {
        self.return_type.as_ref().map_or(0, TypeRef::slot_width)
    }
}

/// Syntax error in a descriptor, with the byte index of the first offending
/// character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorSyntax {
    pub index: usize,
    pub message: &'static str,
}

impl fmt::Display for DescriptorSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "descriptor syntax error at index {}: {}", self.index, self.message)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DescriptorSyntax {}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn err(&self, message: &'static str) -> DescriptorSyntax {
        DescriptorSyntax { index: self.pos, message }
    }

    fn parse_type(&mut self) -> Result<TypeRef, DescriptorSyntax> {
        let mut dimensions = 0u8;
        while self.peek() == Some(b'[') {
            if dimensions == u8::MAX {
                return Err(self.err("array dimension overflow"));
            }
            dimensions += 1;
            self.pos += 1;
        }
        let c = self.peek().ok_or_else(|| self.err("unexpected end of descriptor"))?;
        let base = if let Some(p) = Primitive::from_tag(c as char) {
            self.pos += 1;
            TypeRef::Primitive(p)
        } else if c == b'L' {
            self.pos += 1;
            let start = self.pos;
            loop {
                match self.peek() {
                    Some(b';') => break,
                    Some(b'(') | Some(b')') | Some(b'[') | Some(b'.') => {
                        return Err(self.err("invalid character in class name"))
                    }
                    Some(_) => self.pos += 1,
                    None => return Err(self.err("unterminated class name")),
                }
            }
            if self.pos == start {
                return Err(self.err("empty class name"));
            }
            let raw = core::str::from_utf8(&self.bytes[start..self.pos])
                .map_err(|_| self.err("class name is not valid UTF-8"))?;
            self.pos += 1; // consume ';'
            let mut name = String::with_capacity(raw.len());
            for ch in raw.chars() {
                name.push(if ch == '/' { '.' } else { ch });
            }
            TypeRef::Object(name)
        } else {
            return Err(self.err("not a type tag"));
        };
        if dimensions > 0 {
            Ok(TypeRef::Array { element: alloc::boxed::Box::new(base), dimensions })
        } else {
            Ok(base)
        }
    }
}

/// Parses a raw method descriptor such as `(IJ[Ljava/lang/String;)Z`.
pub fn parse_method_descriptor(raw: &str) -> Result<MethodDescriptor, DescriptorSyntax> {
    let mut cur = Cursor { bytes: raw.as_bytes(), pos: 0 };
    if cur.peek() != Some(b'(') {
        return Err(cur.err("method descriptor must start with '('"));
    }
    cur.pos += 1;
    let mut param_types = Vec::new();
    loop {
        match cur.peek() {
            Some(b')') => {
                cur.pos += 1;
                break;
            }
            Some(_) => param_types.push(cur.parse_type()?),
            None => return Err(cur.err("unterminated parameter list")),
        }
    }
    let return_type = match cur.peek() {
        Some(b'V') => {
            cur.pos += 1;
            None
        }
        Some(_) => Some(cur.parse_type()?),
        None => return Err(cur.err("missing return type")),
    };
    if cur.pos != raw.len() {
        return Err(cur.err("trailing characters after return type"));
    }
    Ok(MethodDescriptor { param_types, return_type })
}

/// Parses a field descriptor (a single type, no parentheses).
pub fn parse_field_descriptor(raw: &str) -> Result<TypeRef, DescriptorSyntax> {
    let mut cur = Cursor { bytes: raw.as_bytes(), pos: 0 };
    let t = cur.parse_type()?;
    if cur.pos != raw.len() {
        return Err(cur.err("trailing characters after type"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn empty_signature() {
        let d = parse_method_descriptor("()V").unwrap();
        assert!(d.param_types.is_empty());
        assert!(d.return_type.is_none());
        assert_eq!(d.render(), "()V");
    }

    #[test]
    fn mixed_params() {
        let d = parse_method_descriptor("(IJ[Ljava/lang/String;)Z").unwrap();
        assert_eq!(d.param_types.len(), 3);
        assert_eq!(d.param_types[0], TypeRef::Primitive(Primitive::Int));
        assert_eq!(d.param_types[1], TypeRef::Primitive(Primitive::Long));
        assert_eq!(
            d.param_types[2],
            TypeRef::Array {
                element: alloc::boxed::Box::new(TypeRef::Object("java.lang.String".to_string())),
                dimensions: 1
            }
        );
        assert_eq!(d.return_type, Some(TypeRef::Primitive(Primitive::Boolean)));
        assert_eq!(d.render(), "(IJ[Ljava/lang/String;)Z");
    }

    #[test]
    fn bad_tag_position() {
        let e = parse_method_descriptor("(X)V").unwrap_err();
        assert_eq!(e.index, 1);
    }

    #[test]
    fn rejects_trailing_garbage() {
        assert!(parse_method_descriptor("()VV").is_err());
        assert!(parse_method_descriptor("()").is_err());
        assert!(parse_method_descriptor("I").is_err());
    }

    #[test]
    fn simple_name_keeps_inner_class_dollar() {
        let t = parse_field_descriptor("Landroid/hardware/biometrics/BiometricPrompt$CryptoObject;")
            .unwrap();
        assert_eq!(t.simple_name(), "BiometricPrompt$CryptoObject");
        assert_eq!(t.render(), "android.hardware.biometrics.BiometricPrompt$CryptoObject");
    }

    #[test]
    fn slot_widths() {
        let d = parse_method_descriptor("(JDI)D").unwrap();
        assert_eq!(d.param_slot_width(), 5);
        assert_eq!(d.return_slot_width(), 2);
    }
}
