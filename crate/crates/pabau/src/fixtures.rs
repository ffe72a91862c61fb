//! Class-file writer and the bundled test corpora.
//!
//! There is no Java toolchain at build or test time, so fixture classes are
//! assembled directly in the class-file format: the BiometricPrompt API stub
//! JAR, a mixed corpus exercising branches/switches/handlers/inner classes,
//! and a large synthetic archive for throughput runs. The writer is
//! deliberately independent of `pabau-core`'s parser types.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use zip::write::SimpleFileOptions;
use zip::ZipWriter;

// Opcodes used by the assembler. Grouped, not exhaustive.
pub mod op {
    pub const ICONST_0: u8 = 0x03;
    pub const ICONST_1: u8 = 0x04;
    pub const BIPUSH: u8 = 0x10;
    pub const LCONST_0: u8 = 0x09;
    pub const DCONST_0: u8 = 0x0e;
    pub const ACONST_NULL: u8 = 0x01;
    pub const ILOAD: u8 = 0x15;
    pub const LLOAD: u8 = 0x16;
    pub const DLOAD: u8 = 0x18;
    pub const ALOAD: u8 = 0x19;
    pub const ISTORE: u8 = 0x36;
    pub const ASTORE: u8 = 0x3a;
    pub const POP: u8 = 0x57;
    pub const DUP: u8 = 0x59;
    pub const SWAP: u8 = 0x5f;
    pub const IADD: u8 = 0x60;
    pub const IMUL: u8 = 0x68;
    pub const I2L: u8 = 0x85;
    pub const IFEQ: u8 = 0x99;
    pub const IFNE: u8 = 0x9a;
    pub const IF_ICMPGE: u8 = 0xa2;
    pub const GOTO: u8 = 0xa7;
    pub const TABLESWITCH: u8 = 0xaa;
    pub const LOOKUPSWITCH: u8 = 0xab;
    pub const IRETURN: u8 = 0xac;
    pub const LRETURN: u8 = 0xad;
    pub const ARETURN: u8 = 0xb0;
    pub const RETURN: u8 = 0xb1;
    pub const GETSTATIC: u8 = 0xb2;
    pub const PUTSTATIC: u8 = 0xb3;
    pub const GETFIELD: u8 = 0xb4;
    pub const PUTFIELD: u8 = 0xb5;
    pub const INVOKEVIRTUAL: u8 = 0xb6;
    pub const INVOKESPECIAL: u8 = 0xb7;
    pub const INVOKESTATIC: u8 = 0xb8;
    pub const NEW: u8 = 0xbb;
    pub const ATHROW: u8 = 0xbf;
}

/// Code assembler with label-based branch patching. Offsets are final only
/// after [`Asm::finish`].
#[derive(Default)]
pub struct Asm {
    code: Vec<u8>,
    /// label -> code offset.
    labels: HashMap<u32, u32>,
    /// (patch position, owning instruction offset, 4-byte operand).
    fixups: Vec<(usize, u32, u32, bool)>,
}

impl Asm {
    pub fn new() -> Self {
        Asm::default()
    }

    pub fn raw(&mut self, byte: u8) -> &mut Self {
        self.code.push(byte);
        self
    }

    pub fn label(&mut self, id: u32) -> &mut Self {
        self.labels.insert(id, self.code.len() as u32);
        self
    }

    /// Loads with the short forms where they exist.
    pub fn load(&mut self, base: u8, slot: u8) -> &mut Self {
        let short_base = match base {
            op::ILOAD => Some(0x1a),
            op::LLOAD => Some(0x1e),
            op::DLOAD => Some(0x26),
            op::ALOAD => Some(0x2a),
            op::ISTORE => Some(0x3b),
            op::ASTORE => Some(0x4b),
            _ => None,
        };
        match short_base {
            Some(s) if slot < 4 => self.raw(s + slot),
            _ => {
                self.raw(base);
                self.raw(slot)
            }
        }
    }

    pub fn aload(&mut self, slot: u8) -> &mut Self {
        self.load(op::ALOAD, slot)
    }

    pub fn iload(&mut self, slot: u8) -> &mut Self {
        self.load(op::ILOAD, slot)
    }

    pub fn with_index(&mut self, opcode: u8, index: u16) -> &mut Self {
        self.raw(opcode);
        self.code.extend_from_slice(&index.to_be_bytes());
        self
    }

    pub fn branch(&mut self, opcode: u8, target: u32) -> &mut Self {
        let at = self.code.len() as u32;
        self.raw(opcode);
        self.fixups.push((self.code.len(), at, target, false));
        self.code.extend_from_slice(&[0, 0]);
        self
    }

    /// Contiguous-key switch over `[low, low + targets.len())`.
    pub fn tableswitch(&mut self, low: i32, default: u32, targets: &[u32]) -> &mut Self {
        let at = self.code.len() as u32;
        self.raw(op::TABLESWITCH);
        while self.code.len() % 4 != 0 {
            self.raw(0);
        }
        self.fixups.push((self.code.len(), at, default, true));
        self.code.extend_from_slice(&[0; 4]);
        self.code.extend_from_slice(&low.to_be_bytes());
        self.code.extend_from_slice(&(low + targets.len() as i32 - 1).to_be_bytes());
        for &t in targets {
            self.fixups.push((self.code.len(), at, t, true));
            self.code.extend_from_slice(&[0; 4]);
        }
        self
    }

    pub fn lookupswitch(&mut self, default: u32, pairs: &[(i32, u32)]) -> &mut Self {
        let at = self.code.len() as u32;
        self.raw(op::LOOKUPSWITCH);
        while self.code.len() % 4 != 0 {
            self.raw(0);
        }
        self.fixups.push((self.code.len(), at, default, true));
        self.code.extend_from_slice(&[0; 4]);
        self.code.extend_from_slice(&(pairs.len() as i32).to_be_bytes());
        for &(key, t) in pairs {
            self.code.extend_from_slice(&key.to_be_bytes());
            self.fixups.push((self.code.len(), at, t, true));
            self.code.extend_from_slice(&[0; 4]);
        }
        self
    }

    fn finish(mut self) -> (Vec<u8>, HashMap<u32, u32>) {
        for (pos, insn_at, target, wide) in std::mem::take(&mut self.fixups) {
            let dest = *self.labels.get(&target).expect("undefined label");
            let rel = dest as i64 - insn_at as i64;
            if wide {
                self.code[pos..pos + 4].copy_from_slice(&(rel as i32).to_be_bytes());
            } else {
                self.code[pos..pos + 2].copy_from_slice(&(rel as i16).to_be_bytes());
            }
        }
        (self.code, self.labels)
    }
}

pub const ACC_PUBLIC: u16 = 0x0001;
pub const ACC_STATIC: u16 = 0x0008;
pub const ACC_ABSTRACT: u16 = 0x0400;

/// Exception-table row; labels refer to the method's [`Asm`].
pub struct Handler {
    pub start: u32,
    pub end: u32,
    pub target: u32,
}

struct MethodDef {
    access: u16,
    name_index: u16,
    descriptor_index: u16,
    code: Option<(Vec<u8>, Vec<(u16, u16, u16)>)>,
}

/// Builds one class file. Constant-pool entries are deduplicated.
pub struct ClassBuilder {
    pool: Vec<Vec<u8>>,
    pool_index: HashMap<Vec<u8>, u16>,
    this_class: u16,
    super_class: u16,
    methods: Vec<MethodDef>,
    major_version: u16,
}

impl ClassBuilder {
    /// `name`/`super_name` are slash-separated internal names.
    pub fn new(name: &str, super_name: &str) -> Self {
        let mut b = ClassBuilder {
            pool: Vec::new(),
            pool_index: HashMap::new(),
            this_class: 0,
            super_class: 0,
            methods: Vec::new(),
            major_version: 52,
        };
        b.this_class = b.class(name);
        b.super_class = b.class(super_name);
        b
    }

    pub fn set_major_version(&mut self, v: u16) {
        self.major_version = v;
    }

    fn entry(&mut self, bytes: Vec<u8>) -> u16 {
        if let Some(&i) = self.pool_index.get(&bytes) {
            return i;
        }
        let i = (self.pool.len() + 1) as u16;
        self.pool_index.insert(bytes.clone(), i);
        self.pool.push(bytes);
        i
    }

    pub fn utf8(&mut self, s: &str) -> u16 {
        let mut e = vec![1u8];
        e.extend_from_slice(&(s.len() as u16).to_be_bytes());
        e.extend_from_slice(s.as_bytes());
        self.entry(e)
    }

    pub fn class(&mut self, internal_name: &str) -> u16 {
        let n = self.utf8(internal_name);
        let mut e = vec![7u8];
        e.extend_from_slice(&n.to_be_bytes());
        self.entry(e)
    }

    pub fn name_and_type(&mut self, name: &str, descriptor: &str) -> u16 {
        let n = self.utf8(name);
        let d = self.utf8(descriptor);
        let mut e = vec![12u8];
        e.extend_from_slice(&n.to_be_bytes());
        e.extend_from_slice(&d.to_be_bytes());
        self.entry(e)
    }

    fn member_ref(&mut self, tag: u8, owner: &str, name: &str, descriptor: &str) -> u16 {
        let c = self.class(owner);
        let nat = self.name_and_type(name, descriptor);
        let mut e = vec![tag];
        e.extend_from_slice(&c.to_be_bytes());
        e.extend_from_slice(&nat.to_be_bytes());
        self.entry(e)
    }

    pub fn field_ref(&mut self, owner: &str, name: &str, descriptor: &str) -> u16 {
        self.member_ref(9, owner, name, descriptor)
    }

    pub fn method_ref(&mut self, owner: &str, name: &str, descriptor: &str) -> u16 {
        self.member_ref(10, owner, name, descriptor)
    }

    pub fn add_method(
        &mut self,
        access: u16,
        name: &str,
        descriptor: &str,
        body: Option<(Asm, Vec<Handler>)>,
    ) {
        let name_index = self.utf8(name);
        let descriptor_index = self.utf8(descriptor);
        let code = body.map(|(asm, handlers)| {
            self.utf8("Code");
            let (bytes, labels) = asm.finish();
            let table = handlers
                .iter()
                .map(|h| {
                    let r = |l: u32| labels[&l] as u16;
                    (r(h.start), r(h.end), r(h.target))
                })
                .collect();
            (bytes, table)
        });
        self.methods.push(MethodDef { access, name_index, descriptor_index, code });
    }

    pub fn finish(self) -> Vec<u8> {
        let mut out = Vec::with_capacity(256);
        out.extend_from_slice(&0xCAFE_BABEu32.to_be_bytes());
        out.extend_from_slice(&0u16.to_be_bytes());
        out.extend_from_slice(&self.major_version.to_be_bytes());
        out.extend_from_slice(&((self.pool.len() + 1) as u16).to_be_bytes());
        for e in &self.pool {
            out.extend_from_slice(e);
        }
        out.extend_from_slice(&0x0021u16.to_be_bytes()); // public super
        out.extend_from_slice(&self.this_class.to_be_bytes());
        out.extend_from_slice(&self.super_class.to_be_bytes());
        out.extend_from_slice(&0u16.to_be_bytes()); // interfaces
        out.extend_from_slice(&0u16.to_be_bytes()); // fields
        out.extend_from_slice(&(self.methods.len() as u16).to_be_bytes());
        let code_name = self.pool_index.get(&{
            let mut e = vec![1u8];
            e.extend_from_slice(&4u16.to_be_bytes());
            e.extend_from_slice(b"Code");
            e
        });
        for m in &self.methods {
            out.extend_from_slice(&m.access.to_be_bytes());
            out.extend_from_slice(&m.name_index.to_be_bytes());
            out.extend_from_slice(&m.descriptor_index.to_be_bytes());
            match &m.code {
                None => out.extend_from_slice(&0u16.to_be_bytes()),
                Some((bytes, handlers)) => {
                    out.extend_from_slice(&1u16.to_be_bytes());
                    out.extend_from_slice(&code_name.unwrap().to_be_bytes());
                    let len = 2 + 2 + 4 + bytes.len() + 2 + handlers.len() * 8 + 2;
                    out.extend_from_slice(&(len as u32).to_be_bytes());
                    out.extend_from_slice(&16u16.to_be_bytes()); // max_stack
                    out.extend_from_slice(&16u16.to_be_bytes()); // max_locals
                    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
                    out.extend_from_slice(bytes);
                    out.extend_from_slice(&(handlers.len() as u16).to_be_bytes());
                    for &(s, e, h) in handlers {
                        out.extend_from_slice(&s.to_be_bytes());
                        out.extend_from_slice(&e.to_be_bytes());
                        out.extend_from_slice(&h.to_be_bytes());
                        out.extend_from_slice(&0u16.to_be_bytes()); // catch any
                    }
                    out.extend_from_slice(&0u16.to_be_bytes()); // code attrs
                }
            }
        }
        out.extend_from_slice(&0u16.to_be_bytes()); // class attributes
        out
    }
}

fn default_ctor(b: &mut ClassBuilder) {
    let object_init = b.method_ref("java/lang/Object", "<init>", "()V");
    let mut a = Asm::new();
    a.aload(0).with_index(op::INVOKESPECIAL, object_init).raw(op::RETURN);
    b.add_method(ACC_PUBLIC, "<init>", "()V", Some((a, vec![])));
}

/// The BiometricPrompt API surface stub used by the end-to-end tests.
pub fn biometric_stub_entries() -> Vec<(String, Vec<u8>)> {
    let mut entries = Vec::new();

    let prompt = "android/hardware/biometrics/BiometricPrompt";
    let crypto = "android/hardware/biometrics/BiometricPrompt$CryptoObject";
    let callback = "android/hardware/biometrics/BiometricPrompt$AuthenticationCallback";
    let signal = "android/os/CancellationSignal";

    {
        let mut b = ClassBuilder::new(prompt, "java/lang/Object");
        default_ctor(&mut b);
        // authenticate(CryptoObject, CancellationSignal, Executor,
        // AuthenticationCallback): reads the cipher off the crypto object and
        // hands the callback to the executor.
        let get_cipher = b.method_ref(crypto, "getCipher", "()Ljavax/crypto/Cipher;");
        let set_active = b.field_ref(prompt, "mActiveCallback", &format!("L{callback};"));
        let cancel = b.method_ref(signal, "cancel", "()V");
        let execute =
            b.method_ref("java/util/concurrent/Executor", "execute", "(Ljava/lang/Runnable;)V");
        let desc = format!("(L{crypto};L{signal};Ljava/util/concurrent/Executor;L{callback};)V");
        let mut a = Asm::new();
        a.aload(1)
            .with_index(op::INVOKEVIRTUAL, get_cipher)
            .raw(op::POP)
            .aload(0)
            .aload(4)
            .with_index(op::PUTFIELD, set_active)
            .aload(3)
            .raw(op::ACONST_NULL)
            .with_index(op::INVOKEVIRTUAL, execute)
            .aload(2)
            .with_index(op::INVOKEVIRTUAL, cancel)
            .raw(op::RETURN);
        b.add_method(ACC_PUBLIC, "authenticate", &desc, Some((a, vec![])));

        // Overload without a CryptoObject (the BSC2-shaped entry point).
        let desc2 = format!("(L{signal};Ljava/util/concurrent/Executor;L{callback};)V");
        let mut a2 = Asm::new();
        a2.aload(0)
            .aload(3)
            .with_index(op::PUTFIELD, set_active)
            .aload(2)
            .raw(op::ACONST_NULL)
            .with_index(op::INVOKEVIRTUAL, execute)
            .raw(op::RETURN);
        b.add_method(ACC_PUBLIC, "authenticate", &desc2, Some((a2, vec![])));
        entries.push((format!("{prompt}.class"), b.finish()));
    }

    {
        let mut b = ClassBuilder::new(crypto, "java/lang/Object");
        let object_init = b.method_ref("java/lang/Object", "<init>", "()V");
        let cipher_field = b.field_ref(crypto, "mCipher", "Ljavax/crypto/Cipher;");
        let mut ctor = Asm::new();
        ctor.aload(0)
            .with_index(op::INVOKESPECIAL, object_init)
            .aload(0)
            .aload(1)
            .with_index(op::PUTFIELD, cipher_field)
            .raw(op::RETURN);
        b.add_method(ACC_PUBLIC, "<init>", "(Ljavax/crypto/Cipher;)V", Some((ctor, vec![])));
        let mut getter = Asm::new();
        getter.aload(0).with_index(op::GETFIELD, cipher_field).raw(op::ARETURN);
        b.add_method(ACC_PUBLIC, "getCipher", "()Ljavax/crypto/Cipher;", Some((getter, vec![])));
        entries.push((format!("{crypto}.class"), b.finish()));
    }

    {
        let mut b = ClassBuilder::new(callback, "java/lang/Object");
        default_ctor(&mut b);
        b.add_method(
            ACC_PUBLIC | ACC_ABSTRACT,
            "onAuthenticationError",
            "(ILjava/lang/CharSequence;)V",
            None,
        );
        b.add_method(
            ACC_PUBLIC | ACC_ABSTRACT,
            "onAuthenticationSucceeded",
            "(Landroid/hardware/biometrics/BiometricPrompt$AuthenticationResult;)V",
            None,
        );
        b.add_method(ACC_PUBLIC | ACC_ABSTRACT, "onAuthenticationFailed", "()V", None);
        entries.push((format!("{callback}.class"), b.finish()));
    }

    {
        let mut b = ClassBuilder::new(signal, "java/lang/Object");
        default_ctor(&mut b);
        let flag = b.field_ref(signal, "mCanceled", "Z");
        let mut cancel = Asm::new();
        cancel.aload(0).raw(op::ICONST_1).with_index(op::PUTFIELD, flag).raw(op::RETURN);
        b.add_method(ACC_PUBLIC, "cancel", "()V", Some((cancel, vec![])));
        let mut is_canceled = Asm::new();
        is_canceled.aload(0).with_index(op::GETFIELD, flag).raw(op::IRETURN);
        b.add_method(ACC_PUBLIC, "isCanceled", "()Z", Some((is_canceled, vec![])));
        entries.push((format!("{signal}.class"), b.finish()));
    }

    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries
}

/// Mixed corpus: ≥ 25 classes covering branches, switches, exception
/// handlers, wide types, inner classes, and code-less methods. Loop-free
/// method bodies stay under 40 instructions so the path-enumeration flow
/// oracle applies; classes whose name ends in `Loop` contain cycles.
pub fn fixture_corpus() -> Vec<(String, Vec<u8>)> {
    let mut entries = Vec::new();
    let mut add = |name: &str, b: ClassBuilder| {
        entries.push((format!("{name}.class"), b.finish()));
    };

    // 1. Straight-line returns of each shape.
    {
        let mut b = ClassBuilder::new("fix/Straight", "java/lang/Object");
        default_ctor(&mut b);
        let mut a = Asm::new();
        a.iload(1).raw(op::IRETURN);
        b.add_method(ACC_PUBLIC, "echoInt", "(I)I", Some((a, vec![])));
        let mut a = Asm::new();
        a.load(op::LLOAD, 1).raw(op::LRETURN);
        b.add_method(ACC_PUBLIC, "echoLong", "(J)J", Some((a, vec![])));
        let mut a = Asm::new();
        a.aload(2).raw(op::ARETURN);
        b.add_method(
            ACC_PUBLIC,
            "second",
            "(Ljava/lang/String;Ljava/lang/String;)Ljava/lang/String;",
            Some((a, vec![])),
        );
        add("fix/Straight", b);
    }

    // 2. Field traffic.
    {
        let mut b = ClassBuilder::new("fix/Fields", "java/lang/Object");
        default_ctor(&mut b);
        let value = b.field_ref("fix/Fields", "value", "I");
        let shared = b.field_ref("fix/Fields", "shared", "Ljava/lang/String;");
        let mut a = Asm::new();
        a.aload(0).iload(1).with_index(op::PUTFIELD, value).raw(op::RETURN);
        b.add_method(ACC_PUBLIC, "setValue", "(I)V", Some((a, vec![])));
        let mut a = Asm::new();
        a.aload(0).with_index(op::GETFIELD, value).raw(op::IRETURN);
        b.add_method(ACC_PUBLIC, "getValue", "()I", Some((a, vec![])));
        let mut a = Asm::new();
        a.aload(0).with_index(op::PUTSTATIC, shared).raw(op::RETURN);
        b.add_method(ACC_PUBLIC | ACC_STATIC, "share", "(Ljava/lang/String;)V", Some((a, vec![])));
        let mut a = Asm::new();
        a.with_index(op::GETSTATIC, shared).raw(op::ARETURN);
        b.add_method(
            ACC_PUBLIC | ACC_STATIC,
            "peek",
            "()Ljava/lang/String;",
            Some((a, vec![])),
        );
        add("fix/Fields", b);
    }

    // 3. Two-arm branch: one arm returns a parameter, the other a constant.
    {
        let mut b = ClassBuilder::new("fix/Branchy", "java/lang/Object");
        default_ctor(&mut b);
        let mut a = Asm::new();
        a.iload(1).branch(op::IFEQ, 1).iload(2).raw(op::IRETURN).label(1).raw(op::ICONST_0).raw(
            op::IRETURN,
        );
        b.add_method(ACC_PUBLIC, "pick", "(II)I", Some((a, vec![])));
        // Diamond merging two parameters.
        let mut a = Asm::new();
        a.iload(1)
            .branch(op::IFNE, 1)
            .aload(2)
            .branch(op::GOTO, 2)
            .label(1)
            .aload(3)
            .label(2)
            .raw(op::ARETURN);
        b.add_method(
            ACC_PUBLIC,
            "select",
            "(ILjava/lang/Object;Ljava/lang/Object;)Ljava/lang/Object;",
            Some((a, vec![])),
        );
        add("fix/Branchy", b);
    }

    // 4. Switches.
    {
        let mut b = ClassBuilder::new("fix/Switchy", "java/lang/Object");
        default_ctor(&mut b);
        let mut a = Asm::new();
        a.iload(1).tableswitch(0, 3, &[1, 2]);
        a.label(1).iload(2).raw(op::IRETURN);
        a.label(2).raw(op::ICONST_1).raw(op::IRETURN);
        a.label(3).raw(op::ICONST_0).raw(op::IRETURN);
        b.add_method(ACC_PUBLIC, "table", "(II)I", Some((a, vec![])));
        let mut a = Asm::new();
        a.iload(1).lookupswitch(2, &[(7, 1), (42, 1)]);
        a.label(1).iload(1).raw(op::IRETURN);
        a.label(2).raw(op::ICONST_0).raw(op::IRETURN);
        b.add_method(ACC_PUBLIC, "lookup", "(I)I", Some((a, vec![])));
        add("fix/Switchy", b);
    }

    // 5. Exception handler: try stores a parameter to a field, the handler
    // returns a constant.
    {
        let mut b = ClassBuilder::new("fix/Handler", "java/lang/Object");
        default_ctor(&mut b);
        let value = b.field_ref("fix/Handler", "value", "I");
        let mut a = Asm::new();
        a.label(10)
            .aload(0)
            .iload(1)
            .with_index(op::PUTFIELD, value)
            .label(11)
            .iload(1)
            .raw(op::IRETURN)
            .label(12)
            .raw(op::POP)
            .raw(op::ICONST_0)
            .raw(op::IRETURN);
        b.add_method(
            ACC_PUBLIC,
            "guarded",
            "(I)I",
            Some((a, vec![Handler { start: 10, end: 11, target: 12 }])),
        );
        add("fix/Handler", b);
    }

    // 6. Loops (excluded from the loop-free oracle check by name).
    {
        let mut b = ClassBuilder::new("fix/CountLoop", "java/lang/Object");
        default_ctor(&mut b);
        let mut a = Asm::new();
        a.raw(op::ICONST_0)
            .load(op::ISTORE, 2)
            .label(1)
            .iload(2)
            .iload(1)
            .branch(op::IF_ICMPGE, 2)
            .iload(2)
            .raw(op::ICONST_1)
            .raw(op::IADD)
            .load(op::ISTORE, 2)
            .branch(op::GOTO, 1)
            .label(2)
            .iload(2)
            .raw(op::IRETURN);
        b.add_method(ACC_PUBLIC, "countTo", "(I)I", Some((a, vec![])));
        // Loop that accumulates a parameter into a field.
        let acc = b.field_ref("fix/CountLoop", "acc", "I");
        let mut a = Asm::new();
        a.label(1)
            .aload(0)
            .iload(1)
            .with_index(op::PUTFIELD, acc)
            .iload(1)
            .branch(op::IFNE, 1)
            .raw(op::RETURN);
        b.add_method(ACC_PUBLIC, "drainLoop", "(I)V", Some((a, vec![])));
        add("fix/CountLoop", b);
    }

    // 7. Invocations and data dependence through calls.
    {
        let mut b = ClassBuilder::new("fix/Calls", "java/lang/Object");
        default_ctor(&mut b);
        let concat = b.method_ref(
            "java/lang/String",
            "concat",
            "(Ljava/lang/String;)Ljava/lang/String;",
        );
        let mut a = Asm::new();
        a.aload(1).aload(2).with_index(op::INVOKEVIRTUAL, concat).raw(op::ARETURN);
        b.add_method(
            ACC_PUBLIC,
            "join",
            "(Ljava/lang/String;Ljava/lang/String;)Ljava/lang/String;",
            Some((a, vec![])),
        );
        let nano = b.method_ref("java/lang/System", "nanoTime", "()J");
        let mut a = Asm::new();
        a.with_index(op::INVOKESTATIC, nano).raw(op::LRETURN);
        b.add_method(ACC_PUBLIC | ACC_STATIC, "now", "()J", Some((a, vec![])));
        add("fix/Calls", b);
    }

    // 8. Wide types and stack shuffling.
    {
        let mut b = ClassBuilder::new("fix/Wide", "java/lang/Object");
        default_ctor(&mut b);
        let mut a = Asm::new();
        a.iload(1).raw(op::I2L).raw(op::LRETURN);
        b.add_method(ACC_PUBLIC, "widen", "(I)J", Some((a, vec![])));
        let mut a = Asm::new();
        a.iload(1).iload(2).raw(op::SWAP).raw(op::IADD).raw(op::IRETURN);
        b.add_method(ACC_PUBLIC, "swapAdd", "(II)I", Some((a, vec![])));
        let mut a = Asm::new();
        a.load(op::DLOAD, 1).raw(0xaf); // dreturn
        b.add_method(ACC_PUBLIC, "echoDouble", "(D)D", Some((a, vec![])));
        add("fix/Wide", b);
    }

    // 9. Inner class with `$` in the binary name.
    {
        let mut b = ClassBuilder::new("fix/Outer$Inner", "java/lang/Object");
        default_ctor(&mut b);
        let mut a = Asm::new();
        a.aload(1).raw(op::ARETURN);
        b.add_method(
            ACC_PUBLIC,
            "unwrap",
            "(Ljava/lang/Object;)Ljava/lang/Object;",
            Some((a, vec![])),
        );
        add("fix/Outer$Inner", b);
    }

    // 10. Throwing method (athrow terminates flow).
    {
        let mut b = ClassBuilder::new("fix/Thrower", "java/lang/Object");
        default_ctor(&mut b);
        let exc_init = b.method_ref("java/lang/IllegalStateException", "<init>", "()V");
        let exc = b.class("java/lang/IllegalStateException");
        let mut a = Asm::new();
        a.with_index(op::NEW, exc)
            .raw(op::DUP)
            .with_index(op::INVOKESPECIAL, exc_init)
            .raw(op::ATHROW);
        b.add_method(ACC_PUBLIC | ACC_STATIC, "boom", "()V", Some((a, vec![])));
        add("fix/Thrower", b);
    }

    // 11..N: generated small classes to push the corpus over 25 while
    // varying arity and parameter mixes.
    for i in 0..18 {
        let name = format!("fix/gen/Gen{i:02}");
        let mut b = ClassBuilder::new(&name, "java/lang/Object");
        default_ctor(&mut b);
        let value = b.field_ref(&name, "v", "I");
        match i % 3 {
            0 => {
                let mut a = Asm::new();
                a.iload(1).iload(2).raw(op::IMUL).raw(op::IRETURN);
                b.add_method(ACC_PUBLIC, "mul", "(II)I", Some((a, vec![])));
            }
            1 => {
                let mut a = Asm::new();
                a.aload(0).iload(1).with_index(op::PUTFIELD, value).raw(op::RETURN);
                b.add_method(ACC_PUBLIC, "stash", "(I)V", Some((a, vec![])));
                let mut a = Asm::new();
                a.aload(0).with_index(op::GETFIELD, value).raw(op::IRETURN);
                b.add_method(ACC_PUBLIC, "fetch", "()I", Some((a, vec![])));
            }
            _ => {
                let mut a = Asm::new();
                a.iload(1)
                    .branch(op::IFEQ, 1)
                    .aload(0)
                    .with_index(op::GETFIELD, value)
                    .raw(op::IRETURN)
                    .label(1)
                    .iload(1)
                    .raw(op::IRETURN);
                b.add_method(ACC_PUBLIC, "either", "(I)I", Some((a, vec![])));
            }
        }
        add(&name, b);
    }

    entries.extend(biometric_stub_entries());
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries
}

/// Writes entries into a JAR (zip). `compress` off keeps generation fast for
/// the large synthetic archive.
pub fn write_jar(path: &Path, entries: &[(String, Vec<u8>)], compress: bool) -> std::io::Result<()> {
    let file = File::create(path)?;
    let mut zip = ZipWriter::new(BufWriter::new(file));
    let options = SimpleFileOptions::default().compression_method(if compress {
        zip::CompressionMethod::Deflated
    } else {
        zip::CompressionMethod::Stored
    });
    for (name, bytes) in entries {
        zip.start_file(name.as_str(), options)?;
        zip.write_all(bytes)?;
    }
    zip.finish()?;
    Ok(())
}

/// Streams a synthetic archive with `classes * methods_per_class` trivial
/// `int -> int` methods straight to disk.
pub fn write_synthetic_archive(
    path: &Path,
    classes: usize,
    methods_per_class: usize,
) -> std::io::Result<()> {
    let file = File::create(path)?;
    let mut zip = ZipWriter::new(BufWriter::new(file));
    let options =
        SimpleFileOptions::default().compression_method(zip::CompressionMethod::Stored);
    for c in 0..classes {
        let name = format!("synth/C{c:06}");
        let mut b = ClassBuilder::new(&name, "java/lang/Object");
        default_ctor(&mut b);
        for m in 0..methods_per_class {
            let mut a = Asm::new();
            a.iload(1).raw(op::IRETURN);
            b.add_method(ACC_PUBLIC, &format!("m{m}"), "(I)I", Some((a, vec![])));
        }
        zip.start_file(format!("{name}.class"), options)?;
        zip.write_all(&b.finish())?;
    }
    zip.finish()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pabau_core::parse_class;

    #[test]
    fn corpus_parses_and_has_enough_classes() {
        let entries = fixture_corpus();
        assert!(entries.len() >= 25, "only {} classes", entries.len());
        for (name, bytes) in &entries {
            let model = parse_class(bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(format!("{}.class", model.binary_name.replace('.', "/")), *name);
        }
    }

    #[test]
    fn stub_authenticate_has_expected_shape() {
        let entries = biometric_stub_entries();
        let prompt = entries
            .iter()
            .find(|(n, _)| n.ends_with("BiometricPrompt.class"))
            .map(|(_, b)| parse_class(b).unwrap())
            .unwrap();
        let auth = prompt
            .methods
            .iter()
            .find(|m| m.name == "authenticate" && m.descriptor.param_types.len() == 4)
            .expect("authenticate(CryptoObject, ...)");
        assert!(auth.descriptor.return_type.is_none());
        assert_eq!(
            auth.descriptor.param_types[0].simple_name(),
            "BiometricPrompt$CryptoObject"
        );
    }

    #[test]
    fn branch_targets_resolve_in_switch_fixture() {
        let entries = fixture_corpus();
        let (_, bytes) = entries.iter().find(|(n, _)| n == "fix/Switchy.class").unwrap();
        let model = parse_class(bytes).unwrap();
        assert!(model.methods.iter().any(|m| m.name == "table"));
        assert!(model.methods.iter().any(|m| m.name == "lookup"));
    }
}
