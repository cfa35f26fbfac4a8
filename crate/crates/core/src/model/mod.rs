//! Archive entities: reification, minting, versions and resources.

pub mod archive;
pub mod mint;
pub mod reify;

pub use archive::{Archive, Catalog, ChangeSetInfo, DatasetInfo, IngestOptions, ResourceInfo, StoragePolicy, VersionInfo};
pub use reify::{dereify, is_schema_triple, partition, reify, skolemize, ReifiedVersion};
