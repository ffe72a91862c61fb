//! Binary feature catalog generation and evaluation.
//!
//! A [`Catalog`] is the deterministic cross product of the feature types with
//! their applicable lexicon arguments. Every feature evaluates to a yes/no
//! answer on a [`FeatureSubject`], and a method's answers form its
//! [`FeatureVector`]. Vectors carry the generating catalog's content hash so
//! vectors from different catalogs can never be mixed.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::classfile::{InstructionKind, MethodModel};
use crate::descriptor::{Primitive, TypeRef};
use crate::flow::FlowFacts;
use crate::lexicon::{Lexicon, LexiconError};

/// The feature-type families, one per semantic predicate the catalog covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureType {
    ClassNameStarts,
    ClassNameContains,
    ClassNameEnds,
    MethodNameStarts,
    MethodNameContains,
    MethodNameEnds,
    ReturnsVoid,
    ReturnsPrimitive,
    ReturnTypeContains,
    ParamCountIs,
    HasPrimitiveParam,
    ParamTypeContains,
    CalleeNameStarts,
    CalleeNameContains,
    CalleeNameEnds,
    CalleeReturnTypeContains,
    CalleeParamTypeContains,
    FlowParamToReturn,
    FlowParamToField,
    FlowFieldToReturn,
}

impl FeatureType {
    pub const ALL: [FeatureType; 20] = [
        FeatureType::ClassNameStarts,
        FeatureType::ClassNameContains,
        FeatureType::ClassNameEnds,
        FeatureType::MethodNameStarts,
        FeatureType::MethodNameContains,
        FeatureType::MethodNameEnds,
        FeatureType::ReturnsVoid,
        FeatureType::ReturnsPrimitive,
        FeatureType::ReturnTypeContains,
        FeatureType::ParamCountIs,
        FeatureType::HasPrimitiveParam,
        FeatureType::ParamTypeContains,
        FeatureType::CalleeNameStarts,
        FeatureType::CalleeNameContains,
        FeatureType::CalleeNameEnds,
        FeatureType::CalleeReturnTypeContains,
        FeatureType::CalleeParamTypeContains,
        FeatureType::FlowParamToReturn,
        FeatureType::FlowParamToField,
        FeatureType::FlowFieldToReturn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureType::ClassNameStarts => "classNameStarts",
            FeatureType::ClassNameContains => "classNameContains",
            FeatureType::ClassNameEnds => "classNameEnds",
            FeatureType::MethodNameStarts => "methodNameStarts",
            FeatureType::MethodNameContains => "methodNameContains",
            FeatureType::MethodNameEnds => "methodNameEnds",
            FeatureType::ReturnsVoid => "returnsVoid",
            FeatureType::ReturnsPrimitive => "returnsPrimitive",
            FeatureType::ReturnTypeContains => "returnTypeContains",
            FeatureType::ParamCountIs => "paramCountIs",
            FeatureType::HasPrimitiveParam => "hasPrimitiveParam",
            FeatureType::ParamTypeContains => "paramTypeContains",
            FeatureType::CalleeNameStarts => "calleeNameStarts",
            FeatureType::CalleeNameContains => "calleeNameContains",
            FeatureType::CalleeNameEnds => "calleeNameEnds",
            FeatureType::CalleeReturnTypeContains => "calleeReturnTypeContains",
            FeatureType::CalleeParamTypeContains => "calleeParamTypeContains",
            FeatureType::FlowParamToReturn => "flowParamToReturn",
            FeatureType::FlowParamToField => "flowParamToField",
            FeatureType::FlowFieldToReturn => "flowFieldToReturn",
        }
    }
}

/// Concrete argument of a feature instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FeatureArg {
    None,
    Keyword(String),
    TypeKeyword(String),
    Primitive(Primitive),
    /// Parameter-count bucket; `open` marks the final `n+` bucket.
    Bucket { min: u8, open: bool },
}

impl fmt::Display for FeatureArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureArg::None => Ok(()),
            FeatureArg::Keyword(k) | FeatureArg::TypeKeyword(k) => f.write_str(k),
            FeatureArg::Primitive(p) => f.write_str(p.name()),
            FeatureArg::Bucket { min, open } => {
                if *open {
                    write!(f, "{min}+")
                } else {
                    write!(f, "{min}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureInstance {
    pub id: u32,
    pub feature_type: FeatureType,
    pub argument: FeatureArg,
}

/// Ordered feature-instance list plus its content hash.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub instances: Vec<FeatureInstance>,
    pub catalog_id: u64,
}

impl Catalog {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Builds the catalog for a lexicon. Instance order is fixed: feature types
/// in declaration order, arguments in lexicon order.
pub fn build_catalog(lexicon: &Lexicon) -> Result<Catalog, LexiconError> {
    lexicon.validate()?;
    let mut instances = Vec::new();
    let push = |feature_type: FeatureType, argument: FeatureArg, instances: &mut Vec<FeatureInstance>| {
        let id = instances.len() as u32;
        instances.push(FeatureInstance { id, feature_type, argument });
    };
    for ft in FeatureType::ALL {
        match ft {
            FeatureType::ClassNameStarts
            | FeatureType::ClassNameContains
            | FeatureType::ClassNameEnds
            | FeatureType::MethodNameStarts
            | FeatureType::MethodNameContains
            | FeatureType::MethodNameEnds
            | FeatureType::CalleeNameStarts
            | FeatureType::CalleeNameContains
            | FeatureType::CalleeNameEnds => {
                for kw in &lexicon.keywords {
                    push(ft, FeatureArg::Keyword(kw.clone()), &mut instances);
                }
            }
            FeatureType::ReturnsVoid
            | FeatureType::FlowParamToReturn
            | FeatureType::FlowParamToField
            | FeatureType::FlowFieldToReturn => push(ft, FeatureArg::None, &mut instances),
            FeatureType::ReturnsPrimitive | FeatureType::HasPrimitiveParam => {
                for p in Primitive::ALL {
                    push(ft, FeatureArg::Primitive(p), &mut instances);
                }
            }
            FeatureType::ReturnTypeContains
            | FeatureType::ParamTypeContains
            | FeatureType::CalleeReturnTypeContains
            | FeatureType::CalleeParamTypeContains => {
                for tk in &lexicon.type_keywords {
                    push(ft, FeatureArg::TypeKeyword(tk.clone()), &mut instances);
                }
            }
            FeatureType::ParamCountIs => {
                let buckets = &lexicon.param_count_buckets;
                for (i, &min) in buckets.iter().enumerate() {
                    let open = i + 1 == buckets.len();
                    push(ft, FeatureArg::Bucket { min, open }, &mut instances);
                }
            }
        }
    }
    let catalog_id = hash_instances(&instances);
    Ok(Catalog { instances, catalog_id })
}

fn hash_instances(instances: &[FeatureInstance]) -> u64 {
    // FNV-1a over a canonical serialization; stable across platforms.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for inst in instances {
        eat(inst.feature_type.as_str().as_bytes());
        eat(b":");
        eat(inst.argument.to_string().as_bytes());
        eat(b";");
    }
    h
}

/// Simple-name plus primitive classification of a rendered type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeInfo {
    /// Unqualified name, e.g. `BiometricPrompt$CryptoObject`, `int`,
    /// `byte[]`.
    pub simple_name: String,
    pub primitive: Option<Primitive>,
}

impl TypeInfo {
    pub fn from_type_ref(t: &TypeRef) -> Self {
        let primitive = match t {
            TypeRef::Primitive(p) => Some(*p),
            _ => None,
        };
        let mut simple_name = String::from(t.simple_name());
        if let TypeRef::Array { dimensions, .. } = t {
            for _ in 0..*dimensions {
                simple_name.push_str("[]");
            }
        }
        TypeInfo { simple_name, primitive }
    }

    /// Builds from a rendered Java-style type string such as `int`,
    /// `java.lang.String[]` or `a.b.BiometricPrompt$CryptoObject`.
    pub fn from_rendered(rendered: &str) -> Self {
        let base = rendered.trim_end_matches("[]");
        let suffix = &rendered[base.len()..];
        let primitive = if suffix.is_empty() {
            Primitive::ALL.iter().copied().find(|p| p.name() == base)
        } else {
            None
        };
        let mut simple_name = String::from(base.rsplit('.').next().unwrap_or(base));
        simple_name.push_str(suffix);
        TypeInfo { simple_name, primitive }
    }
}

/// Callee signature as far as it is known. Record-based subjects carry only
/// names; bytecode-based subjects carry full descriptors.
#[derive(Debug, Clone, Default)]
pub struct CalleeInfo {
    pub name: String,
    pub return_type: Option<TypeInfo>,
    pub param_types: Vec<TypeInfo>,
}

/// Everything feature evaluation may look at, independent of whether the
/// method came from bytecode or from a ground-truth record.
#[derive(Debug, Clone)]
pub struct FeatureSubject {
    /// Simple name of the declaring class.
    pub class_simple_name: String,
    pub method_name: String,
    /// `None` for `void`.
    pub return_type: Option<TypeInfo>,
    /// Declared parameters only (no receiver).
    pub param_types: Vec<TypeInfo>,
    pub callees: Vec<CalleeInfo>,
    pub flow_param_to_return: bool,
    pub flow_param_to_field: bool,
    pub flow_field_to_return: bool,
}

impl FeatureSubject {
    pub fn from_method(method: &MethodModel, flows: &FlowFacts) -> Self {
        let class_simple_name =
            String::from(method.owner.rsplit('.').next().unwrap_or(&method.owner));
        let callees = method
            .instructions
            .iter()
            .filter_map(|insn| match &insn.kind {
                InstructionKind::Invoke { name, descriptor, .. } => Some(CalleeInfo {
                    name: name.clone(),
                    return_type: descriptor.return_type.as_ref().map(TypeInfo::from_type_ref),
                    param_types: descriptor.param_types.iter().map(TypeInfo::from_type_ref).collect(),
                }),
                _ => None,
            })
            .collect();
        FeatureSubject {
            class_simple_name,
            method_name: method.name.clone(),
            return_type: method.descriptor.return_type.as_ref().map(TypeInfo::from_type_ref),
            param_types: method.descriptor.param_types.iter().map(TypeInfo::from_type_ref).collect(),
            callees,
            flow_param_to_return: !flows.params_to_return.is_empty(),
            flow_param_to_field: !flows.params_to_field.is_empty(),
            flow_field_to_return: !flows.fields_to_return.is_empty(),
        }
    }
}

/// Evaluates one feature instance on a subject. Total and pure.
pub fn evaluate(instance: &FeatureInstance, subject: &FeatureSubject) -> bool {
    fn kw(arg: &FeatureArg) -> &str {
        match arg {
            FeatureArg::Keyword(k) | FeatureArg::TypeKeyword(k) => k,
            _ => "",
        }
    }
    let type_contains = |t: &TypeInfo, frag: &str| -> bool {
        contains_ci(&t.simple_name, frag)
    };
    match instance.feature_type {
        FeatureType::ClassNameStarts => name_starts(&subject.class_simple_name, kw(&instance.argument)),
        FeatureType::ClassNameContains => contains_ci(&subject.class_simple_name, kw(&instance.argument)),
        FeatureType::ClassNameEnds => name_ends(&subject.class_simple_name, kw(&instance.argument)),
        FeatureType::MethodNameStarts => name_starts(&subject.method_name, kw(&instance.argument)),
        FeatureType::MethodNameContains => contains_ci(&subject.method_name, kw(&instance.argument)),
        FeatureType::MethodNameEnds => name_ends(&subject.method_name, kw(&instance.argument)),
        FeatureType::ReturnsVoid => subject.return_type.is_none(),
        FeatureType::ReturnsPrimitive => match &instance.argument {
            FeatureArg::Primitive(p) => subject.return_type.as_ref().is_some_and(|t| t.primitive == Some(*p)),
            _ => false,
        },
        FeatureType::ReturnTypeContains => subject
            .return_type
            .as_ref()
            .is_some_and(|t| type_contains(t, kw(&instance.argument))),
        FeatureType::ParamCountIs => match instance.argument {
            FeatureArg::Bucket { min, open } => {
                let n = subject.param_types.len();
                if open {
                    n >= min as usize
                } else {
                    n == min as usize
                }
            }
            _ => false,
        },
        FeatureType::HasPrimitiveParam => match &instance.argument {
            FeatureArg::Primitive(p) => subject.param_types.iter().any(|t| t.primitive == Some(*p)),
            _ => false,
        },
        FeatureType::ParamTypeContains => subject
            .param_types
            .iter()
            .any(|t| type_contains(t, kw(&instance.argument))),
        FeatureType::CalleeNameStarts => subject.callees.iter().any(|c| name_starts(&c.name, kw(&instance.argument))),
        FeatureType::CalleeNameContains => subject.callees.iter().any(|c| contains_ci(&c.name, kw(&instance.argument))),
        FeatureType::CalleeNameEnds => subject.callees.iter().any(|c| name_ends(&c.name, kw(&instance.argument))),
        FeatureType::CalleeReturnTypeContains => subject.callees.iter().any(|c| {
            c.return_type.as_ref().is_some_and(|t| type_contains(t, kw(&instance.argument)))
        }),
        FeatureType::CalleeParamTypeContains => subject.callees.iter().any(|c| {
            c.param_types.iter().any(|t| type_contains(t, kw(&instance.argument)))
        }),
        FeatureType::FlowParamToReturn => subject.flow_param_to_return,
        FeatureType::FlowParamToField => subject.flow_param_to_field,
        FeatureType::FlowFieldToReturn => subject.flow_field_to_return,
    }
}

/// Fixed-length bit sequence of feature answers, tied to its catalog.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    pub catalog_id: u64,
    len: usize,
    words: Vec<u64>,
}

impl FeatureVector {
    pub fn new(catalog_id: u64, len: usize) -> Self {
        FeatureVector { catalog_id, len, words: alloc::vec![0; len.div_ceil(64)] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

/// Evaluates the whole catalog on a subject.
pub fn vectorize(subject: &FeatureSubject, catalog: &Catalog) -> FeatureVector {
    let mut v = FeatureVector::new(catalog.catalog_id, catalog.len());
    for (i, inst) in catalog.instances.iter().enumerate() {
        if evaluate(inst, subject) {
            v.set(i, true);
        }
    }
    v
}

/// Case-insensitive substring match (ASCII folding; identifiers are ASCII in
/// practice). Allocation-free: this runs for every (feature, method) pair.
fn contains_ci(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack
        .as_bytes()
        .windows(needle.len())
        .any(|w| w.eq_ignore_ascii_case(needle.as_bytes()))
}

/// True at camelCase token boundaries: string ends, separators, and
/// lower/digit-to-upper transitions.
fn is_boundary(bytes: &[u8], pos: usize) -> bool {
    if pos == 0 || pos >= bytes.len() {
        return true;
    }
    let prev = bytes[pos - 1];
    let cur = bytes[pos];
    let sep = |b: u8| b == b'_' || b == b'$' || b == b'.' || b == b'<' || b == b'>';
    if sep(prev) || sep(cur) {
        return true;
    }
    let prev_lower = prev.is_ascii_lowercase() || prev.is_ascii_digit();
    cur.is_ascii_uppercase() && prev_lower
}

fn name_starts(name: &str, keyword: &str) -> bool {
    if keyword.is_empty() || keyword.len() > name.len() {
        return false;
    }
    name.as_bytes()[..keyword.len()].eq_ignore_ascii_case(keyword.as_bytes())
        && is_boundary(name.as_bytes(), keyword.len())
}

fn name_ends(name: &str, keyword: &str) -> bool {
    if keyword.is_empty() || keyword.len() > name.len() {
        return false;
    }
    name.as_bytes()[name.len() - keyword.len()..].eq_ignore_ascii_case(keyword.as_bytes())
        && is_boundary(name.as_bytes(), name.len() - keyword.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;

    fn plain_subject(class: &str, method: &str) -> FeatureSubject {
        FeatureSubject {
            class_simple_name: String::from(class),
            method_name: String::from(method),
            return_type: None,
            param_types: Vec::new(),
            callees: Vec::new(),
            flow_param_to_return: false,
            flow_param_to_field: false,
            flow_field_to_return: false,
        }
    }

    #[test]
    fn minimal_lexicon_cross_product() {
        let lex = Lexicon {
            keywords: alloc::vec!["authenticate".to_string()],
            type_keywords: alloc::vec!["CryptoObject".to_string()],
            param_count_buckets: alloc::vec![0, 1, 2, 3, 4],
        };
        let cat = build_catalog(&lex).unwrap();
        let contains: Vec<_> = cat
            .instances
            .iter()
            .filter(|i| i.feature_type == FeatureType::MethodNameContains)
            .collect();
        assert_eq!(contains.len(), 1);
        // 9 name features x 1 keyword + returnsVoid + 8 + 8 primitives
        // + 4 type features x 1 + 5 buckets + 3 flow features
        assert_eq!(cat.len(), 9 + 1 + 16 + 4 + 5 + 3);
    }

    #[test]
    fn default_catalog_has_callee_name_starts_check() {
        let cat = build_catalog(&Lexicon::default()).unwrap();
        assert!(cat.instances.iter().any(|i| i.feature_type == FeatureType::CalleeNameStarts
            && i.argument == FeatureArg::Keyword("check".to_string())));
    }

    #[test]
    fn catalog_id_stable_and_order_sensitive() {
        let mut lex = Lexicon::default();
        let id1 = build_catalog(&lex).unwrap().catalog_id;
        let id2 = build_catalog(&lex).unwrap().catalog_id;
        assert_eq!(id1, id2);
        lex.keywords.swap(0, 1);
        let id3 = build_catalog(&lex).unwrap().catalog_id;
        assert_ne!(id1, id3);
        lex.canonicalize();
        let mut canon = Lexicon::default();
        canon.canonicalize();
        assert_eq!(build_catalog(&lex).unwrap().catalog_id, build_catalog(&canon).unwrap().catalog_id);
    }

    #[test]
    fn every_feature_type_present_in_default_catalog() {
        let cat = build_catalog(&Lexicon::default()).unwrap();
        for ft in FeatureType::ALL {
            assert!(
                cat.instances.iter().any(|i| i.feature_type == ft),
                "missing instances for {:?}",
                ft
            );
        }
    }

    #[test]
    fn unique_type_argument_pairs() {
        let cat = build_catalog(&Lexicon::default()).unwrap();
        for (i, a) in cat.instances.iter().enumerate() {
            for b in &cat.instances[i + 1..] {
                assert!(!(a.feature_type == b.feature_type && a.argument == b.argument));
            }
        }
    }

    #[test]
    fn camel_case_boundaries() {
        assert!(name_starts("checkBiometricSupport", "check"));
        assert!(!name_starts("checksum", "check"));
        assert!(name_ends("onAuthenticationError", "error"));
        assert!(!name_ends("terror", "error"));
        assert!(name_starts("check_self_permission", "check"));
        assert!(contains_ci("CryptoObject", "crypt"));
    }

    #[test]
    fn method_name_starts_example() {
        let lex = Lexicon::default();
        let cat = build_catalog(&lex).unwrap();
        let subject = plain_subject("BiometricManager", "checkBiometricSupport");
        let inst = cat
            .instances
            .iter()
            .find(|i| i.feature_type == FeatureType::MethodNameStarts
                && i.argument == FeatureArg::Keyword("check".to_string()))
            .unwrap();
        assert!(evaluate(inst, &subject));
    }

    #[test]
    fn null_subject_only_returns_void() {
        let cat = build_catalog(&Lexicon::default()).unwrap();
        let subject = plain_subject("b", "a");
        let v = vectorize(&subject, &cat);
        for (i, inst) in cat.instances.iter().enumerate() {
            let expected = inst.feature_type == FeatureType::ReturnsVoid
                || matches!(inst.argument, FeatureArg::Bucket { min: 0, open: false });
            assert_eq!(v.get(i), expected, "bit {i} ({:?})", inst.feature_type);
        }
    }

    #[test]
    fn vectorize_is_deterministic() {
        let cat = build_catalog(&Lexicon::default()).unwrap();
        let subject = plain_subject("BiometricPrompt", "authenticate");
        assert_eq!(vectorize(&subject, &cat), vectorize(&subject, &cat));
    }
}
