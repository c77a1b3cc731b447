//! Validation of XML instance documents against W3C XML Schema 1.0.
//!
//! Only the part of the schema language used by data-exchange formats such as
//! OpenDRIVE is supported: global and local element declarations, named and
//! anonymous complex types, `sequence`/`choice`/`all` model groups, named
//! groups and attribute groups, `complexContent` extension, `simpleContent`,
//! simple-type restrictions with the common facets, unions, lists, wildcards
//! and `key`/`unique`/`keyref` identity constraints with simple path
//! selectors. Schema composition (`include`, `import`) is rejected.
//!
//! ```
//! let schema = xsdcheck::Schema::parse(r#"
//!   <xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
//!     <xs:element name="a"><xs:complexType>
//!       <xs:attribute name="n" type="xs:int" use="required"/>
//!     </xs:complexType></xs:element>
//!   </xs:schema>"#).unwrap();
//! assert!(schema.validate_str(r#"<a n="1"/>"#).is_empty());
//! assert_eq!(schema.validate_str(r#"<a n="x"/>"#).len(), 1);
//! ```

use std::fmt;
use std::path::Path;

mod model;
mod parse;
mod simple;
mod validate;

pub use model::Schema;

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("cannot read schema {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema is not well-formed XML: {0}")]
    Xml(String),
    #[error("invalid schema (line {line}): {message}")]
    Invalid { line: u32, message: String },
}

/// A single schema violation in an instance document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u32,
    pub column: u32,
    /// Element path such as `/OpenDRIVE/road[2]/planView/geometry[1]`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}:{}: {}", self.line, self.column, self.message)
        } else {
            write!(f, "{}:{}: {}: {}", self.line, self.column, self.path, self.message)
        }
    }
}

impl Schema {
    /// Compiles a schema from its XML text.
    pub fn parse(text: &str) -> Result<Schema, SchemaError> {
        parse::compile(text)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Schema, SchemaError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Schema::parse(&text)
    }

    /// Validates a document. A document that is not well-formed yields a
    /// single diagnostic describing the parse error.
    pub fn validate_str(&self, xml: &str) -> Vec<Diagnostic> {
        match roxmltree::Document::parse(xml) {
            Ok(doc) => self.validate(&doc),
            Err(e) => {
                let pos = e.pos();
                vec![Diagnostic {
                    line: pos.row,
                    column: pos.col,
                    path: String::new(),
                    message: format!("not well-formed: {e}"),
                }]
            }
        }
    }

    pub fn validate(&self, doc: &roxmltree::Document) -> Vec<Diagnostic> {
        validate::Validator::new(self).run(doc)
    }
}
