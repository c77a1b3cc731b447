//! In-memory representation of a compiled schema.

use std::collections::HashMap;

use regex::Regex;

/// Upper occurrence bound of a particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxOccurs {
    Bounded(usize),
    Unbounded,
}

impl MaxOccurs {
    pub(crate) fn allows(self, n: usize) -> bool {
        match self {
            MaxOccurs::Bounded(m) => n <= m,
            MaxOccurs::Unbounded => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurs {
    pub min: usize,
    pub max: MaxOccurs,
}

/// Built-in datatypes of XML Schema Part 2 that this validator understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    AnySimpleType,
    String,
    NormalizedString,
    Token,
    Boolean,
    Decimal,
    Double,
    Float,
    Integer,
    Long,
    Int,
    Short,
    Byte,
    NonNegativeInteger,
    PositiveInteger,
    NonPositiveInteger,
    NegativeInteger,
    UnsignedLong,
    UnsignedInt,
    UnsignedShort,
    UnsignedByte,
    Date,
    DateTime,
    AnyUri,
    Id,
    IdRef,
    NmToken,
    Name,
    NcName,
}

impl Builtin {
    pub fn from_local_name(name: &str) -> Option<Builtin> {
        use Builtin::*;
        Some(match name {
            "anySimpleType" => AnySimpleType,
            "string" => String,
            "normalizedString" => NormalizedString,
            "token" => Token,
            "boolean" => Boolean,
            "decimal" => Decimal,
            "double" => Double,
            "float" => Float,
            "integer" => Integer,
            "long" => Long,
            "int" => Int,
            "short" => Short,
            "byte" => Byte,
            "nonNegativeInteger" => NonNegativeInteger,
            "positiveInteger" => PositiveInteger,
            "nonPositiveInteger" => NonPositiveInteger,
            "negativeInteger" => NegativeInteger,
            "unsignedLong" => UnsignedLong,
            "unsignedInt" => UnsignedInt,
            "unsignedShort" => UnsignedShort,
            "unsignedByte" => UnsignedByte,
            "date" => Date,
            "dateTime" => DateTime,
            "anyURI" => AnyUri,
            "ID" => Id,
            "IDREF" => IdRef,
            "NMTOKEN" => NmToken,
            "Name" => Name,
            "NCName" => NcName,
            _ => return None,
        })
    }
}

/// Reference to a simple type: either built in or defined in the schema.
#[derive(Debug, Clone)]
pub enum SimpleTypeRef {
    Builtin(Builtin),
    Named(String),
    Inline(Box<SimpleType>),
}

#[derive(Debug, Clone, Default)]
pub struct Facets {
    pub enumeration: Vec<String>,
    pub patterns: Vec<Regex>,
    pub min_inclusive: Option<f64>,
    pub max_inclusive: Option<f64>,
    pub min_exclusive: Option<f64>,
    pub max_exclusive: Option<f64>,
    pub length: Option<usize>,
    pub min_length: Option<usize>,
    pub max_length: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum SimpleType {
    Restriction { base: SimpleTypeRef, facets: Facets },
    Union(Vec<SimpleTypeRef>),
    List(SimpleTypeRef),
}

#[derive(Debug, Clone)]
pub enum TypeRef {
    /// `xs:anyType` or an omitted type attribute.
    AnyType,
    Simple(SimpleTypeRef),
    /// Named type that may be simple or complex; resolved at validation time.
    Named(String),
    InlineComplex(Box<ComplexType>),
}

#[derive(Debug, Clone)]
pub struct AttributeDecl {
    pub name: String,
    pub ty: SimpleTypeRef,
    pub required: bool,
    pub prohibited: bool,
    pub fixed: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Key,
    Unique,
    KeyRef,
}

#[derive(Debug, Clone)]
pub struct IdentityConstraint {
    pub kind: ConstraintKind,
    pub name: String,
    pub refer: Option<String>,
    pub selector: String,
    pub fields: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ElementDecl {
    pub name: String,
    pub ty: TypeRef,
    pub fixed: Option<String>,
    pub constraints: Vec<IdentityConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NamespaceConstraint {
    Any,
    Other,
    Local,
    List(Vec<Option<String>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessContents {
    Strict,
    Lax,
    Skip,
}

#[derive(Debug, Clone)]
pub enum Term {
    Element(Box<ElementDecl>),
    ElementRef(String),
    Sequence(Vec<Particle>),
    Choice(Vec<Particle>),
    All(Vec<Particle>),
    GroupRef(String),
    Any {
        namespace: NamespaceConstraint,
        process: ProcessContents,
    },
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub occurs: Occurs,
    pub term: Term,
}

#[derive(Debug, Clone)]
pub enum Content {
    Empty,
    Elements(Particle),
    Simple(SimpleTypeRef),
}

#[derive(Debug, Clone)]
pub struct ComplexType {
    pub mixed: bool,
    /// Base type for `complexContent/extension`.
    pub extends: Option<String>,
    pub content: Content,
    pub attributes: Vec<AttributeDecl>,
    pub(crate) attribute_groups: Vec<String>,
    pub any_attribute: bool,
}

#[derive(Debug, Clone)]
pub enum TypeDef {
    Simple(SimpleType),
    Complex(ComplexType),
}

/// A compiled schema document.
#[derive(Debug, Clone, Default)]
pub struct Schema {
    pub(crate) target_namespace: Option<String>,
    pub(crate) elements: HashMap<String, ElementDecl>,
    pub(crate) types: HashMap<String, TypeDef>,
    pub(crate) groups: HashMap<String, Particle>,
    pub(crate) attribute_groups: HashMap<String, (Vec<AttributeDecl>, Vec<String>)>,
}
