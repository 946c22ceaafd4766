//! Databases, schemas, tables, indexes and triggers, with DDL rendering.

pub mod ddl;
pub mod identifier;
pub mod model;
pub mod types;

pub use ddl::*;
pub use identifier::{validate_identifier, IdentifierError, MAX_IDENTIFIER_LEN};
pub use model::*;
pub use types::{category_of, describe_data_type, is_registered, nearest_type_name, registered_types, DataTypeDescriptor, DataTypeName, TypeCategory, UnknownDataType};
