//! Property tests: descriptor grammar round-trips, parser totality, and
//! dataflow termination on synthesized method bodies.

use proptest::prelude::*;

use pabau_core::classfile::{Instruction, InstructionKind, MethodModel, StackEffect};
use pabau_core::descriptor::{
    parse_method_descriptor, MethodDescriptor, Primitive, TypeRef,
};
use pabau_core::flow::analyze_flows;
use pabau_core::parse_class;

fn primitive() -> impl Strategy<Value = Primitive> {
    proptest::sample::select(Primitive::ALL.to_vec())
}

fn class_name() -> impl Strategy<Value = String> {
    // Dot-separated identifiers with occasional inner-class '$'.
    proptest::collection::vec("[A-Za-z_$][A-Za-z0-9_$]{0,8}", 1..4)
        .prop_map(|parts| parts.join("."))
}

fn type_ref() -> impl Strategy<Value = TypeRef> {
    let base = prop_oneof![
        primitive().prop_map(TypeRef::Primitive),
        class_name().prop_map(TypeRef::Object),
    ];
    (base, 0u8..4).prop_map(|(element, dimensions)| {
        if dimensions == 0 {
            element
        } else {
            TypeRef::Array { element: Box::new(element), dimensions }
        }
    })
}

fn method_descriptor() -> impl Strategy<Value = MethodDescriptor> {
    (
        proptest::collection::vec(type_ref(), 0..6),
        proptest::option::of(type_ref()),
    )
        .prop_map(|(param_types, return_type)| MethodDescriptor { param_types, return_type })
}

proptest! {
    /// render ∘ parse is the identity on well-formed descriptors.
    #[test]
    fn descriptor_round_trip(d in method_descriptor()) {
        let raw = d.render();
        let parsed = parse_method_descriptor(&raw).expect("rendered descriptor must parse");
        prop_assert_eq!(&parsed, &d);
        prop_assert_eq!(parsed.render(), raw);
    }

    /// The descriptor parser is total: it returns Ok or Err, never panics,
    /// and error indices point into the input.
    #[test]
    fn descriptor_parser_total(s in "\\PC{0,40}") {
        if let Err(e) = parse_method_descriptor(&s) {
            prop_assert!(e.index <= s.len());
        }
    }

    /// The class-file parser is total on arbitrary bytes.
    #[test]
    fn class_parser_total(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_class(&bytes);
    }

    /// ... including bytes that pass the magic/version gate.
    #[test]
    fn class_parser_total_with_header(rest in proptest::collection::vec(any::<u8>(), 0..512)) {
        let mut bytes = vec![0xCA, 0xFE, 0xBA, 0xBE, 0x00, 0x00, 0x00, 0x34];
        bytes.extend(rest);
        let _ = parse_class(&bytes);
    }
}

/// Random but structurally valid instruction stream: offsets are indices and
/// branch targets always land on an instruction.
fn instruction_stream() -> impl Strategy<Value = Vec<Instruction>> {
    proptest::collection::vec(
        prop_oneof![
            (0u16..6, 1u8..3).prop_map(|(slot, width)| InstructionKind::Load { slot, width }),
            (0u16..6, 1u8..3).prop_map(|(slot, width)| InstructionKind::Store { slot, width }),
            (1u8..3).prop_map(|width| InstructionKind::Const { width }),
            Just(InstructionKind::StackOp { effect: StackEffect::Dup }),
            Just(InstructionKind::StackOp { effect: StackEffect::Pop1 }),
            (0u8..3, 0u8..3).prop_map(|(pops, pushes)| InstructionKind::Other { pops, pushes }),
            any::<bool>().prop_map(|has_value| InstructionKind::Return { has_value }),
            // Placeholder target, patched to a real offset below.
            (any::<bool>(),).prop_map(|(c,)| InstructionKind::Branch {
                targets: vec![0],
                pops: u8::from(c),
                conditional: c,
            }),
        ],
        1..30,
    )
    .prop_flat_map(|kinds| {
        let n = kinds.len() as u32;
        (Just(kinds), proptest::collection::vec(0u32..n, 30))
    })
    .prop_map(|(kinds, raw_targets)| {
        kinds
            .into_iter()
            .enumerate()
            .map(|(i, kind)| {
                let kind = match kind {
                    InstructionKind::Branch { pops, conditional, .. } => InstructionKind::Branch {
                        targets: vec![raw_targets[i]],
                        pops,
                        conditional,
                    },
                    k => k,
                };
                Instruction { offset: i as u32, kind }
            })
            .collect()
    })
}

proptest! {
    /// Flow analysis terminates (fixpoint convergence) and never panics on
    /// arbitrary control flow, including irreducible loops.
    #[test]
    fn flow_analysis_terminates(instructions in instruction_stream(), is_static in any::<bool>()) {
        let method = MethodModel {
            owner: "p.Fuzz".to_string(),
            name: "m".to_string(),
            descriptor: parse_method_descriptor("(IJLjava/lang/Object;)I").unwrap(),
            is_static,
            is_abstract_or_native: false,
            instructions,
            exception_handlers: vec![],
        };
        let _ = analyze_flows(&method);
    }
}
