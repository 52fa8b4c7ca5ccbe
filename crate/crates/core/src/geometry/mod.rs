//! Planar primitives: points, triangles and their barycentric frames, the
//! affine normalization to the standard equilateral triangle, cevian vertex
//! regions, convex hulls and Delaunay triangulations.

mod delaunay;
mod hull;
mod point;
pub mod predicates;
mod triangle;

pub use delaunay::{delaunay_triangulate, Triangulation, TriangulationExport};
pub use hull::{convex_hull, point_in_convex_polygon, polygon_area};
pub use point::Point2;
pub use triangle::{
    map_to_equilateral, region_from_bary, tau_barycentric, tau_vertices, vertex_region_of,
    AffineMap, Barycentric,
    CenterSpec, Triangle, BARY_TOL, EQUILATERAL,
};
