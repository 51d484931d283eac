//! Hexagonal site grid, sector regions and UE placement.
//!
//! Sites sit on a hexagonal lattice with neighbor spacing equal to the
//! inter-site distance. Each site cell is a regular hexagon with vertices at
//! 0°, 60°, ..., 300°; a sector is the 120° wedge of that hexagon centered
//! on its boresight, which for boresights 0°/120°/240° is a rhombus.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::profiles::SystemProfile;
use crate::{Error, Result};

/// Planar distances are clamped to this value before use.
pub const MIN_DISTANCE_2D_M: f64 = 1.0;

const MAX_REJECTION_ATTEMPTS: usize = 10_000;
const EDGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    fn polar(radius: f64, angle_deg: f64) -> Self {
        let a = angle_deg.to_radians();
        Point2::new(radius * a.cos(), radius * a.sin())
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Global sector index: `site_index * 3 + sector_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorId(pub usize);

/// Convex quadrilateral, vertices counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorRegion {
    pub vertices: [Point2; 4],
}

impl SectorRegion {
    fn wedge(site: Point2, radius: f64, boresight_deg: f64) -> Self {
        let at = |angle: f64| {
            let p = Point2::polar(radius, angle);
            Point2::new(site.x + p.x, site.y + p.y)
        };
        SectorRegion {
            vertices: [
                site,
                at(boresight_deg - 60.0),
                at(boresight_deg),
                at(boresight_deg + 60.0),
            ],
        }
    }

    /// Closed point-in-polygon test.
    pub fn contains(&self, p: Point2) -> bool {
        let (lo, hi) = self.bounding_box();
        let scale = (hi.x - lo.x).max(hi.y - lo.y);
        let tol = EDGE_TOLERANCE * scale.max(1.0);
        (0..4).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % 4];
            let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            cross / a.distance(b) >= -tol
        })
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    fn signed_area2(&self) -> f64 {
        (0..4)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % 4];
                a.x * b.y - b.x * a.y
            })
            .sum()
    }

    pub fn area(&self) -> f64 {
        0.5 * self.signed_area2().abs()
    }

    pub fn centroid(&self) -> Point2 {
        let a2 = self.signed_area2();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..4 {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % 4];
            let cross = a.x * b.y - b.x * a.y;
            cx += (a.x + b.x) * cross;
            cy += (a.y + b.y) * cross;
        }
        Point2::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    /// Exact uniform sample via the two triangles of the quadrilateral.
    fn sample_by_triangles<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        let [a, b, c, d] = self.vertices;
        let tri_area = |p: Point2, q: Point2, r: Point2| {
            0.5 * ((q.x - p.x) * (r.y - p.y) - (r.x - p.x) * (q.y - p.y)).abs()
        };
        let first = tri_area(a, b, c);
        let total = first + tri_area(a, c, d);
        let (p, q, r) = if rng.random::<f64>() * total < first {
            (a, b, c)
        } else {
            (a, c, d)
        };
        let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        Point2::new(
            p.x + u * (q.x - p.x) + v * (r.x - p.x),
            p.y + u * (q.y - p.y) + v * (r.y - p.y),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorGeometry {
    pub id: SectorId,
    pub site_index: usize,
    pub sector_index: usize,
    pub bs_position: Point2,
    pub boresight_azimuth_deg: f64,
    pub antenna_height_m: f64,
    pub region: SectorRegion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeDrop {
    pub position: Point2,
    pub height_m: f64,
    pub home_sector: SectorId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Planar distance, clamped below at [`MIN_DISTANCE_2D_M`].
    pub distance_2d: f64,
    pub distance_3d: f64,
    /// Azimuth of the UE relative to boresight, in (-180, 180].
    pub azimuth_offset_deg: f64,
    /// Depression angle of the UE below the BS horizontal.
    pub elevation_angle_deg: f64,
}

impl LinkGeometry {
    /// Geometry of a UE at planar range `distance_2d` and azimuth offset
    /// `azimuth_offset_deg` from a BS mounted `height_difference` above it.
    pub fn at(distance_2d: f64, azimuth_offset_deg: f64, height_difference: f64) -> Self {
        let d2 = distance_2d.max(MIN_DISTANCE_2D_M);
        let dh = height_difference.abs();
        LinkGeometry {
            distance_2d: d2,
            distance_3d: d2.hypot(dh),
            azimuth_offset_deg: wrap_degrees(azimuth_offset_deg),
            elevation_angle_deg: dh.atan2(d2).to_degrees(),
        }
    }
}

/// Wraps an angle into (-180, 180].
pub fn wrap_degrees(angle: f64) -> f64 {
    let w = angle.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub sites: Vec<Point2>,
    pub sectors: Vec<SectorGeometry>,
    pub cell_radius_m: f64,
}

/// Hexagonal distance for lattice basis vectors 60° apart.
fn hex_distance(q: i32, r: i32) -> u32 {
    if (q >= 0) == (r >= 0) {
        q.unsigned_abs() + r.unsigned_abs()
    } else {
        q.unsigned_abs().max(r.unsigned_abs())
    }
}

pub fn build_layout(profile: &SystemProfile, num_rings: u32) -> Result<Layout> {
    if num_rings > 2 {
        return Err(Error::UnsupportedRings(num_rings));
    }
    let isd = profile.inter_site_distance_m;
    if !(isd.is_finite() && isd > 0.0) {
        return Err(Error::InvalidProfile(
            "inter-site distance must be positive".into(),
        ));
    }
    let e1 = Point2::polar(isd, 30.0);
    let e2 = Point2::polar(isd, 90.0);
    let rings = num_rings as i32;

    let mut lattice: Vec<(u32, f64, Point2)> = Vec::new();
    for q in -rings..=rings {
        for r in -rings..=rings {
            let ring = hex_distance(q, r);
            if ring > num_rings {
                continue;
            }
            let p = Point2::new(
                f64::from(q) * e1.x + f64::from(r) * e2.x,
                f64::from(q) * e1.y + f64::from(r) * e2.y,
            );
            let angle = if ring == 0 {
                0.0
            } else {
                p.y.atan2(p.x).to_degrees().rem_euclid(360.0)
            };
            lattice.push((ring, angle, p));
        }
    }
    lattice.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let sites: Vec<Point2> = lattice.into_iter().map(|(_, _, p)| p).collect();

    let radius = profile.cell_radius();
    let per_site = profile.sectors_per_site as usize;
    let mut sectors = Vec::with_capacity(sites.len() * per_site);
    for (site_index, &site) in sites.iter().enumerate() {
        for sector_index in 0..per_site {
            let boresight = 360.0 * sector_index as f64 / per_site as f64;
            sectors.push(SectorGeometry {
                id: SectorId(site_index * per_site + sector_index),
                site_index,
                sector_index,
                bs_position: site,
                boresight_azimuth_deg: boresight,
                antenna_height_m: profile.bs_antenna_height_m,
                region: SectorRegion::wedge(site, radius, boresight),
            });
        }
    }
    Ok(Layout {
        sites,
        sectors,
        cell_radius_m: radius,
    })
}

impl Layout {
    pub fn sector(&self, id: SectorId) -> &SectorGeometry {
        &self.sectors[id.0]
    }

    /// Sector whose region contains `p`, assigning shared edges
    /// deterministically (nearest site, then half-open azimuth intervals).
    pub fn locate(&self, p: Point2) -> Option<SectorId> {
        let (site_index, site) = self
            .sites
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance(p).total_cmp(&b.1.distance(p)))?;
        let dx = p.x - site.x;
        let dy = p.y - site.y;
        // Inside the hexagon: distance along each of the three edge normals.
        let apothem = self.cell_radius_m * 3f64.sqrt() / 2.0;
        let inside = [30.0f64, 90.0, 150.0].iter().all(|n| {
            let n = n.to_radians();
            (dx * n.cos() + dy * n.sin()).abs() <= apothem * (1.0 + EDGE_TOLERANCE)
        });
        if !inside {
            return None;
        }
        let angle = dy.atan2(dx).to_degrees();
        let sector = (((angle + 60.0).rem_euclid(360.0)) / 120.0).floor() as usize % 3;
        Some(SectorId(site_index * 3 + sector))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("site_index,sector_index,bs_x,bs_y,boresight_deg\n");
        for s in &self.sectors {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.site_index,
                s.sector_index,
                s.bs_position.x,
                s.bs_position.y,
                s.boresight_azimuth_deg
            );
        }
        out
    }
}

/// Draws a UE uniformly over the sector region by rejection from the
/// region's bounding box.
pub fn sample_ue<R: Rng + ?Sized>(
    sector: &SectorGeometry,
    ue_height_m: f64,
    rng: &mut R,
) -> UeDrop {
    let (lo, hi) = sector.region.bounding_box();
    let mut position = None;
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let p = Point2::new(
            lo.x + (hi.x - lo.x) * rng.random::<f64>(),
            lo.y + (hi.y - lo.y) * rng.random::<f64>(),
        );
        if sector.region.contains(p) {
            position = Some(p);
            break;
        }
    }
    let position = position.unwrap_or_else(|| sector.region.sample_by_triangles(rng));
    UeDrop {
        position,
        height_m: ue_height_m,
        home_sector: sector.id,
    }
}

pub fn link_geometry(sector: &SectorGeometry, ue: &UeDrop) -> LinkGeometry {
    let dx = ue.position.x - sector.bs_position.x;
    let dy = ue.position.y - sector.bs_position.y;
    let azimuth = dy.atan2(dx).to_degrees() - sector.boresight_azimuth_deg;
    LinkGeometry::at(dx.hypot(dy), azimuth, sector.antenna_height_m - ue.height_m)
}
