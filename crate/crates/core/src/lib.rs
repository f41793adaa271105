pub mod amr;
pub mod array;
pub mod dw;
pub mod error;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod llg;
pub mod material;
pub mod sneak;
pub mod vec3;

pub use field::{DemagMode, FieldEvaluator, MagnetizationField};
pub use error::{Error, Result};
pub use geometry::{build_mesh, bundle, CellSize, GeometryKind, GeometrySpec, Mesh, NotchSpec, YWireSpec};
pub use material::{MaterialParams, PhysicalConstants};
pub use vec3::Vec3;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    pub mod geometry {}
    #[doc = include_str!("../../../book/src/fields.md")]
    pub mod fields {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub mod dynamics {}
    #[doc = include_str!("../../../book/src/domain_walls.md")]
    pub mod domain_walls {}
    #[doc = include_str!("../../../book/src/resistance.md")]
    pub mod resistance {}
    #[doc = include_str!("../../../book/src/sneak.md")]
    pub mod sneak {}
    #[doc = include_str!("../../../book/src/array.md")]
    pub mod array {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
