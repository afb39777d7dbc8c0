//! Site layout, PUSC 1x3x3 segment reuse, log-distance path loss and the
//! co-channel interference seen by a mobile.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::antenna::{wrap_degrees, AntennaPattern};
use crate::scalar::Real;

/// The deployed network's inter-site distance list.
pub const INTER_SITE_DISTANCES_CSV: &str = include_str!("../data/inter_site_distances.csv");

/// Listed distances must be reproduced within this relative error.
pub const DISTANCE_TOLERANCE: f64 = 0.01;

/// Sector boresights, degrees clockwise from north.
pub const SECTOR_AZIMUTHS: [f64; 3] = [0.0, 120.0, 240.0];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("site table line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("site table is empty")]
    EmptyTable,
    #[error("duplicate site id `{0}`")]
    DuplicateSite(String),
    #[error("pair {a}-{b}: conflicting distances {first} km and {second} km")]
    ConflictingDistance {
        a: String,
        b: String,
        first: f64,
        second: f64,
    },
    #[error("pair {a}-{b}: {d_ab} km exceeds {a}-{via}-{b} path of {path} km (triangle inequality)")]
    TriangleViolation {
        a: String,
        b: String,
        via: String,
        d_ab: f64,
        path: f64,
    },
    #[error("pair {a}-{b}: placement realizes {realized:.4} km for listed {listed} km")]
    Infeasible {
        a: String,
        b: String,
        listed: f64,
        realized: f64,
    },
    #[error("unknown sector `{0}`")]
    UnknownSector(String),
    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),
    #[error("mobile position ({x}, {y}) km lies outside the layout bounding box padded by 5 km")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid path-loss model: {0}")]
    InvalidModel(String),
}

pub type Result<T> = std::result::Result<T, NetworkError>;

/// Parsed site table, in one of its two accepted shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum SiteTable {
    /// `site_a,site_b,distance_km`
    Distances(Vec<(String, String, f64)>),
    /// `site,x_km,y_km`
    Positions(Vec<(String, f64, f64)>),
}

impl SiteTable {
    /// Parses comma-delimited text. A header row is optional; blank lines and
    /// lines starting with `#` are skipped. The shape is taken from the header
    /// when present, otherwise from whether the second column is numeric.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, Vec<String>)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .map(|(i, l)| (i, l.split(',').map(|f| f.trim().to_string()).collect()))
            .collect();
        if rows.is_empty() {
            return Err(NetworkError::EmptyTable);
        }
        let header = &rows[0].1;
        let mut positions = None;
        if header.iter().any(|f| f == "distance_km" || f == "site_a") {
            positions = Some(false);
            rows.remove(0);
        } else if header.iter().any(|f| f == "x_km" || f == "site") {
            positions = Some(true);
            rows.remove(0);
        }
        if rows.is_empty() {
            return Err(NetworkError::EmptyTable);
        }
        let positions = positions.unwrap_or_else(|| rows[0].1.get(1).is_some_and(|f| f.parse::<f64>().is_ok()));
        let num = |line: usize, s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| NetworkError::Parse {
                    line,
                    reason: format!("`{s}` is not a number"),
                })
        };
        for (line, fields) in &rows {
            if fields.len() != 3 {
                return Err(NetworkError::Parse {
                    line: *line,
                    reason: format!("expected 3 fields, found {}", fields.len()),
                });
            }
        }
        if positions {
            rows.iter()
                .map(|(line, f)| Ok((f[0].clone(), num(*line, &f[1])?, num(*line, &f[2])?)))
                .collect::<Result<_>>()
                .map(SiteTable::Positions)
        } else {
            rows.iter()
                .map(|(line, f)| Ok((f[0].clone(), f[1].clone(), num(*line, &f[2])?)))
                .collect::<Result<_>>()
                .map(SiteTable::Distances)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: String,
    pub x_km: f64,
    pub y_km: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub site: usize,
    pub index: usize,
    pub azimuth_deg: f64,
    pub id: String,
}

/// Sites with positions; each site carries three sectors at 0/120/240 degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteLayout {
    sites: Vec<Site>,
    sectors: Vec<Sector>,
    listed: Vec<(usize, usize, f64)>,
}

impl SiteLayout {
    fn from_sites(sites: Vec<Site>, listed: Vec<(usize, usize, f64)>) -> Self {
        let sectors = sites
            .iter()
            .enumerate()
            .flat_map(|(s, site)| {
                SECTOR_AZIMUTHS.iter().enumerate().map(move |(k, &az)| Sector {
                    site: s,
                    index: k,
                    azimuth_deg: az,
                    id: format!("{}/{}", site.id, az),
                })
            })
            .collect();
        Self {
            sites,
            sectors,
            listed,
        }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn site_index(&self, id: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.id == id)
    }

    pub fn sector_index(&self, id: &str) -> Option<usize> {
        self.sectors.iter().position(|s| s.id == id)
    }

    /// Euclidean distance between two sites, km.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (&self.sites[a], &self.sites[b]);
        (p.x_km - q.x_km).hypot(p.y_km - q.y_km)
    }

    pub fn distance_by_id(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.distance(self.site_index(a)?, self.site_index(b)?))
    }

    /// Pairs from the ingested distance list with their listed and realized distances.
    pub fn listed_pairs(&self) -> impl Iterator<Item = (&str, &str, f64, f64)> + '_ {
        self.listed
            .iter()
            .map(|&(a, b, d)| (self.sites[a].id.as_str(), self.sites[b].id.as_str(), d, self.distance(a, b)))
    }

    /// `(min_x, min_y, max_x, max_y)` over the sites, km.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.sites.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), s| (a.min(s.x_km), b.min(s.y_km), c.max(s.x_km), d.max(s.y_km)),
        )
    }
}

/// Builds a layout; distance-only tables get positions by stress-minimizing placement.
pub fn load_layout(table: &SiteTable) -> Result<SiteLayout> {
    match table {
        SiteTable::Positions(rows) => {
            if rows.is_empty() {
                return Err(NetworkError::EmptyTable);
            }
            let mut sites = Vec::with_capacity(rows.len());
            for (id, x, y) in rows {
                if sites.iter().any(|s: &Site| &s.id == id) {
                    return Err(NetworkError::DuplicateSite(id.clone()));
                }
                sites.push(Site {
                    id: id.clone(),
                    x_km: *x,
                    y_km: *y,
                });
            }
            Ok(SiteLayout::from_sites(sites, Vec::new()))
        }
        SiteTable::Distances(rows) => place_from_distances(rows),
    }
}

fn place_from_distances(rows: &[(String, String, f64)]) -> Result<SiteLayout> {
    if rows.is_empty() {
        return Err(NetworkError::EmptyTable);
    }
    let mut ids: Vec<String> = Vec::new();
    let index = |id: &str, ids: &mut Vec<String>| match ids.iter().position(|s| s == id) {
        Some(i) => i,
        None => {
            ids.push(id.to_string());
            ids.len() - 1
        }
    };
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut listed = Vec::new();
    for (a, b, d) in rows {
        let (i, j) = (index(a, &mut ids), index(b, &mut ids));
        if i == j {
            if *d != 0.0 {
                return Err(NetworkError::ConflictingDistance {
                    a: a.clone(),
                    b: b.clone(),
                    first: 0.0,
                    second: *d,
                });
            }
            continue;
        }
        if *d <= 0.0 {
            return Err(NetworkError::NonPositiveDistance(*d));
        }
        let key = (i.min(j), i.max(j));
        if let Some(&prev) = pairs.get(&key) {
            if (prev - d).abs() > DISTANCE_TOLERANCE * prev {
                return Err(NetworkError::ConflictingDistance {
                    a: a.clone(),
                    b: b.clone(),
                    first: prev,
                    second: *d,
                });
            }
            continue;
        }
        pairs.insert(key, *d);
        listed.push((i, j, *d));
    }

    check_triangles(&ids, &pairs)?;

    let n = ids.len();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(i, j), &d) in &pairs {
        adjacency[i].push((j, d));
        adjacency[j].push((i, d));
    }

    let mut best: Option<(f64, Vec<(f64, f64)>)> = None;
    for attempt in 0..16u64 {
        let pos = stress_placement(&adjacency, 0x5eed_0000 + attempt);
        let worst = listed
            .iter()
            .map(|&(i, j, d)| {
                let r = (pos[i].0 - pos[j].0).hypot(pos[i].1 - pos[j].1);
                (r - d).abs() / d
            })
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| worst < b.0) {
            best = Some((worst, pos));
        }
        if worst <= DISTANCE_TOLERANCE * 1e-3 {
            break;
        }
    }
    let (worst, pos) = best.expect("at least one placement attempt");
    let sites: Vec<Site> = ids
        .into_iter()
        .zip(pos)
        .map(|(id, (x, y))| Site { id, x_km: x, y_km: y })
        .collect();
    let layout = SiteLayout::from_sites(sites, listed);
    if worst > DISTANCE_TOLERANCE {
        let (a, b, listed, realized) = layout
            .listed_pairs()
            .max_by(|x, y| ((x.3 - x.2).abs() / x.2).total_cmp(&((y.3 - y.2).abs() / y.2)))
            .expect("non-empty distance list");
        return Err(NetworkError::Infeasible {
            a: a.to_string(),
            b: b.to_string(),
            listed,
            realized,
        });
    }
    Ok(layout)
}

fn check_triangles(ids: &[String], pairs: &BTreeMap<(usize, usize), f64>) -> Result<()> {
    let get = |i: usize, j: usize| pairs.get(&(i.min(j), i.max(j))).copied();
    for (&(a, b), &d_ab) in pairs {
        for via in 0..ids.len() {
            if via == a || via == b {
                continue;
            }
            if let (Some(d1), Some(d2)) = (get(a, via), get(via, b)) {
                let path = d1 + d2;
                if d_ab > path * (1.0 + DISTANCE_TOLERANCE) {
                    return Err(NetworkError::TriangleViolation {
                        a: ids[a].clone(),
                        b: ids[b].clone(),
                        via: ids[via].clone(),
                        d_ab,
                        path,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Breadth-first seeding followed by localized stress majorization over the listed pairs.
/// The first site is pinned to the origin.
fn stress_placement(adjacency: &[Vec<(usize, f64)>], seed: u64) -> Vec<(f64, f64)> {
    let n = adjacency.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = vec![(f64::NAN, f64::NAN); n];
    let mut offset = 0.0;
    for root in 0..n {
        if !pos[root].0.is_nan() {
            continue;
        }
        // Disconnected components are unconstrained relative to each other; line them up.
        pos[root] = (offset, 0.0);
        let mut queue = VecDeque::from([root]);
        let mut extent: f64 = 0.0;
        while let Some(i) = queue.pop_front() {
            for &(j, d) in &adjacency[i] {
                if pos[j].0.is_nan() {
                    let angle = rng.random::<f64>() * std::f64::consts::TAU;
                    pos[j] = (pos[i].0 + d * angle.cos(), pos[i].1 + d * angle.sin());
                    extent = extent.max(pos[j].0 - offset);
                    queue.push_back(j);
                }
            }
        }
        offset += extent + 1.0;
    }

    for _ in 0..5000 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let deg = adjacency[i].len();
            if deg == 0 {
                continue;
            }
            let (xi, yi) = pos[i];
            let (mut sx, mut sy) = (0.0, 0.0);
            for &(j, d) in &adjacency[i] {
                let (xj, yj) = pos[j];
                let (dx, dy) = (xi - xj, yi - yj);
                let r = dx.hypot(dy);
                let (ux, uy) = if r > 1e-12 { (dx / r, dy / r) } else { (1.0, 0.0) };
                sx += xj + d * ux;
                sy += yj + d * uy;
            }
            let next = (sx / deg as f64, sy / deg as f64);
            moved = moved.max((next.0 - xi).hypot(next.1 - yi));
            pos[i] = next;
        }
        if moved < 1e-12 {
            break;
        }
    }
    let origin = pos[0];
    pos.iter().map(|&(x, y)| (x - origin.0, y - origin.1)).collect()
}

/// Segment index (0, 1, 2) for every sector of a layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReuseAssignment {
    segments: Vec<u8>,
}

impl ReuseAssignment {
    pub fn segment(&self, sector: usize) -> u8 {
        self.segments[sector]
    }

    pub fn segments(&self) -> &[u8] {
        &self.segments
    }

    /// Sector counts per segment.
    pub fn histogram(&self) -> [usize; 3] {
        let mut h = [0; 3];
        for &s in &self.segments {
            h[s as usize] += 1;
        }
        h
    }
}

/// PUSC 1x3x3: each site's sectors get segments 0, 1, 2 in azimuth order.
pub fn assign_segments(layout: &SiteLayout) -> ReuseAssignment {
    let mut segments = vec![0u8; layout.sectors.len()];
    let mut by_site: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, s) in layout.sectors.iter().enumerate() {
        by_site.entry(s.site).or_default().push(k);
    }
    for sectors in by_site.values_mut() {
        sectors.sort_by(|&a, &b| layout.sectors[a].azimuth_deg.total_cmp(&layout.sectors[b].azimuth_deg));
        for (seg, &k) in sectors.iter().enumerate() {
            segments[k] = seg as u8;
        }
    }
    ReuseAssignment { segments }
}

/// Log-distance model `L(d) = L0 + 10 n log10(d / d0)`, clamped to `L0` below `d0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel<T: Real> {
    pub reference_distance_km: T,
    pub reference_loss_db: T,
    pub exponent: T,
}

impl<T: Real> Default for PathLossModel<T> {
    fn default() -> Self {
        Self {
            reference_distance_km: T::of(0.1),
            reference_loss_db: T::of(100.0),
            exponent: T::of(3.5),
        }
    }
}

impl<T: Real> PathLossModel<T> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.exponent >= T::of(2.0) && self.exponent <= T::of(6.0)) {
            return Err(NetworkError::InvalidModel(format!(
                "network.path_loss.exponent = {} outside [2, 6]",
                self.exponent
            )));
        }
        if !(self.reference_distance_km > T::zero()) {
            return Err(NetworkError::InvalidModel(format!(
                "network.path_loss.reference_distance_km = {} must be > 0",
                self.reference_distance_km
            )));
        }
        if !self.reference_loss_db.is_finite() {
            return Err(NetworkError::InvalidModel("network.path_loss.reference_loss_db must be finite".into()));
        }
        Ok(())
    }
}

// negated comparisons also reject NaN
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn path_loss<T: Real>(m: &PathLossModel<T>, d_km: T) -> Result<T> {
    if !(d_km > T::zero()) {
        return Err(NetworkError::NonPositiveDistance(d_km.to_f64_lossy()));
    }
    let ratio = (d_km / m.reference_distance_km).max(T::one());
    Ok(m.reference_loss_db + T::of(10.0) * m.exponent * ratio.log10())
}

/// Link-budget parameters for [`interference_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<T: Real> {
    pub tx_power_dbm: T,
    pub noise_floor_dbm: T,
    pub bs_height_m: T,
    pub ms_height_m: T,
}

impl<T: Real> Default for LinkBudget<T> {
    fn default() -> Self {
        Self {
            tx_power_dbm: T::of(43.0),
            noise_floor_dbm: T::of(-104.0),
            bs_height_m: T::of(30.0),
            ms_height_m: T::of(1.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfererEntry<T: Real> {
    pub sector: String,
    pub distance_km: T,
    pub gain_dbi: T,
    pub path_loss_db: T,
    pub rx_dbm: T,
    pub inr_db: T,
}

impl<T: Real> InterfererEntry<T> {
    pub fn inr_linear(&self) -> T {
        T::of(10.0).powf(self.inr_db / T::of(10.0))
    }
}

/// Gain of `sector`'s antenna toward a point, plus the ground distance in km.
fn gain_toward<T: Real>(
    layout: &SiteLayout,
    sector: &Sector,
    pattern: &AntennaPattern<T>,
    point: (f64, f64),
    budget: &LinkBudget<T>,
) -> (T, f64) {
    let site = &layout.sites[sector.site];
    let (dx, dy) = (point.0 - site.x_km, point.1 - site.y_km);
    let d_km = dx.hypot(dy);
    let bearing = dx.atan2(dy).to_degrees();
    let azimuth = wrap_degrees(T::of(bearing - sector.azimuth_deg));
    let drop_m = (budget.bs_height_m - budget.ms_height_m).to_f64_lossy();
    let elevation = T::of(drop_m.atan2(d_km * 1000.0).to_degrees());
    (pattern.composite_gain(azimuth, elevation), d_km)
}

/// Received power and INR from every co-channel sector except the serving one,
/// sorted by descending INR.
pub fn interference_profile<T: Real>(
    layout: &SiteLayout,
    assignment: &ReuseAssignment,
    pattern: &AntennaPattern<T>,
    model: &PathLossModel<T>,
    serving_sector: &str,
    ms_position: (f64, f64),
    budget: &LinkBudget<T>,
) -> Result<Vec<InterfererEntry<T>>> {
    let serving = layout
        .sector_index(serving_sector)
        .ok_or_else(|| NetworkError::UnknownSector(serving_sector.to_string()))?;
    let (x0, y0, x1, y1) = layout.bounding_box();
    let pad = 5.0;
    let (x, y) = ms_position;
    if !(x >= x0 - pad && x <= x1 + pad && y >= y0 - pad && y <= y1 + pad) {
        return Err(NetworkError::OutOfBounds { x, y });
    }
    let segment = assignment.segment(serving);
    let mut out = Vec::new();
    for (k, sector) in layout.sectors.iter().enumerate() {
        if k == serving || assignment.segment(k) != segment {
            continue;
        }
        let (gain, d_km) = gain_toward(layout, sector, pattern, ms_position, budget);
        // A mobile standing on a mast is inside the reference distance.
        let d = T::of(d_km).max(model.reference_distance_km * T::of(1e-6));
        let loss = path_loss(model, d)?;
        let rx = budget.tx_power_dbm + gain - loss;
        out.push(InterfererEntry {
            sector: sector.id.clone(),
            distance_km: T::of(d_km),
            gain_dbi: gain,
            path_loss_db: loss,
            rx_dbm: rx,
            inr_db: rx - budget.noise_floor_dbm,
        });
    }
    out.sort_by(|a, b| {
        b.inr_db
            .partial_cmp(&a.inr_db)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.sector.cmp(&b.sector))
    });
    Ok(out)
}

/// Point `distance_km` out along a sector's boresight.
pub fn point_on_boresight(layout: &SiteLayout, sector: &str, distance_km: f64) -> Result<(f64, f64)> {
    let k = layout
        .sector_index(sector)
        .ok_or_else(|| NetworkError::UnknownSector(sector.to_string()))?;
    let s = &layout.sectors[k];
    let site = &layout.sites[s.site];
    let az = s.azimuth_deg.to_radians();
    Ok((site.x_km + distance_km * az.sin(), site.y_km + distance_km * az.cos()))
}

/// Report export: `sector,distance_km,gain_dbi,path_loss_db,rx_dbm,inr_db`.
pub fn format_interference_report<T: Real>(entries: &[InterfererEntry<T>]) -> String {
    let mut out = String::from("sector,distance_km,gain_dbi,path_loss_db,rx_dbm,inr_db\n");
    for e in entries {
        let _ = writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{:.4},{:.4}",
            e.sector,
            e.distance_km.to_f64_lossy(),
            e.gain_dbi.to_f64_lossy(),
            e.path_loss_db.to_f64_lossy(),
            e.rx_dbm.to_f64_lossy(),
            e.inr_db.to_f64_lossy()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table1() -> SiteLayout {
        load_layout(&SiteTable::parse(INTER_SITE_DISTANCES_CSV).unwrap()).unwrap()
    }

    #[test]
    fn parses_both_shapes() {
        let t = SiteTable::parse(INTER_SITE_DISTANCES_CSV).unwrap();
        match &t {
            SiteTable::Distances(rows) => {
                assert_eq!(rows.len(), 11);
                assert_eq!(rows[0], ("Site 1".into(), "Site 2".into(), 1.938));
            }
            _ => panic!("expected a distance table"),
        }
        let p = SiteTable::parse("# comment\nA,1.5,-2\nB,0,0\n").unwrap();
        assert_eq!(p, SiteTable::Positions(vec![("A".into(), 1.5, -2.0), ("B".into(), 0.0, 0.0)]));
        assert!(matches!(SiteTable::parse("a,b\n"), Err(NetworkError::Parse { line: 1, .. })));
        assert!(matches!(SiteTable::parse("a,b,x\n"), Err(NetworkError::Parse { .. })));
        assert_eq!(SiteTable::parse("\n#\n"), Err(NetworkError::EmptyTable));
    }

    #[test]
    fn table1_distances_reproduced() {
        let layout = table1();
        assert_eq!(layout.sites().len(), 11);
        assert_eq!(layout.listed_pairs().count(), 11);
        for (a, b, listed, realized) in layout.listed_pairs() {
            assert!((realized - listed).abs() <= DISTANCE_TOLERANCE * listed, "{a}-{b}: {realized} vs {listed}");
        }
        assert!((layout.distance_by_id("Site 1", "Site 2").unwrap() - 1.938).abs() < 0.01 * 1.938);
        assert!((layout.distance_by_id("Site 5", "Site 8").unwrap() - 7.542).abs() < 0.01 * 7.542);
        assert_eq!((layout.sites()[0].x_km, layout.sites()[0].y_km), (0.0, 0.0));
    }

    #[test]
    fn placement_is_deterministic() {
        assert_eq!(table1(), table1());
    }

    #[test]
    fn single_site_layout() {
        let layout = load_layout(&SiteTable::parse("site,x_km,y_km\nSite 1,0,0\n").unwrap()).unwrap();
        assert_eq!(layout.sites().len(), 1);
        assert_eq!(layout.sectors().len(), 3);
        let a = assign_segments(&layout);
        assert_eq!(a.segments(), &[0, 1, 2]);
        let profile = interference_profile(
            &layout,
            &a,
            &AntennaPattern::<f64>::default(),
            &PathLossModel::default(),
            "Site 1/0",
            (0.0, 0.5),
            &LinkBudget::default(),
        )
        .unwrap();
        assert!(profile.is_empty());
    }

    #[test]
    fn triangle_violation_names_pair() {
        let t = SiteTable::parse("A,B,1\nB,C,1\nA,C,5\n").unwrap();
        match load_layout(&t) {
            Err(NetworkError::TriangleViolation { a, b, .. }) => assert_eq!((a.as_str(), b.as_str()), ("A", "C")),
            other => panic!("unexpected {other:?}"),
        }
        let t = SiteTable::parse("A,B,1\nB,A,2\n").unwrap();
        assert!(matches!(load_layout(&t), Err(NetworkError::ConflictingDistance { .. })));
        let t = SiteTable::parse("A,1,1\nA,2,2\n").unwrap();
        assert!(matches!(load_layout(&t), Err(NetworkError::DuplicateSite(_))));
    }

    #[test]
    fn segment_counts() {
        let layout = table1();
        let a = assign_segments(&layout);
        assert_eq!(a.segments().len(), 33);
        // counting oracle: each site contributes one sector per segment
        let mut per_site = vec![[0usize; 3]; layout.sites().len()];
        for (k, s) in layout.sectors().iter().enumerate() {
            per_site[s.site][a.segment(k) as usize] += 1;
        }
        assert!(per_site.iter().all(|c| *c == [1, 1, 1]));
        assert_eq!(a.histogram(), [11, 11, 11]);
    }

    #[test]
    fn path_loss_examples() {
        let m = PathLossModel::<f64>::default();
        assert_eq!(path_loss(&m, 0.1).unwrap(), 100.0);
        assert!((path_loss(&m, 1.0).unwrap() - 135.0).abs() < 1e-12);
        assert_eq!(path_loss(&m, 0.01).unwrap(), 100.0);
        assert!(path_loss(&m, 0.0).is_err());
        assert!(PathLossModel { exponent: 7.0, ..m }.validate().is_err());
    }

    #[test]
    fn ten_interferers_on_table1() {
        let layout = table1();
        let a = assign_segments(&layout);
        for serving in ["Site 1/0", "Site 7/120", "Site 11/240"] {
            let ms = point_on_boresight(&layout, serving, 0.5).unwrap();
            let p = interference_profile(
                &layout,
                &a,
                &AntennaPattern::<f64>::default(),
                &PathLossModel::default(),
                serving,
                ms,
                &LinkBudget::default(),
            )
            .unwrap();
            assert_eq!(p.len(), 10);
            assert!(p.windows(2).all(|w| w[0].inr_db >= w[1].inr_db));
        }
        assert!(matches!(
            interference_profile(
                &layout,
                &a,
                &AntennaPattern::<f64>::default(),
                &PathLossModel::default(),
                "Site 99/0",
                (0.0, 0.0),
                &LinkBudget::default()
            ),
            Err(NetworkError::UnknownSector(_))
        ));
        assert!(matches!(
            interference_profile(
                &layout,
                &a,
                &AntennaPattern::<f64>::default(),
                &PathLossModel::default(),
                "Site 1/0",
                (1000.0, 0.0),
                &LinkBudget::default()
            ),
            Err(NetworkError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn doubling_distances_shifts_by_closed_form() {
        let rows = [("A", 0.0, 0.0), ("B", 3.0, 1.0), ("C", -2.0, 4.0), ("D", 5.0, -3.0)];
        let make = |scale: f64| {
            let t = SiteTable::Positions(rows.iter().map(|&(s, x, y)| (s.to_string(), x * scale, y * scale)).collect());
            load_layout(&t).unwrap()
        };
        // equal heights keep elevation at zero, so gains are scale-invariant
        let budget = LinkBudget {
            bs_height_m: 10.0,
            ms_height_m: 10.0,
            ..LinkBudget::default()
        };
        let profile = |layout: &SiteLayout, ms: (f64, f64)| {
            interference_profile(
                layout,
                &assign_segments(layout),
                &AntennaPattern::<f64>::default(),
                &PathLossModel::default(),
                "A/0",
                ms,
                &budget,
            )
            .unwrap()
        };
        let near = profile(&make(1.0), (0.3, 0.4));
        let far = profile(&make(2.0), (0.6, 0.8));
        let shift = 35.0 * 2f64.log10();
        for (n, f) in near.iter().zip(&far) {
            assert_eq!(n.sector, f.sector);
            assert!((n.rx_dbm - f.rx_dbm - shift).abs() < 1e-9);
        }
    }

    #[test]
    fn report_format() {
        let e = InterfererEntry {
            sector: "S/0".to_string(),
            distance_km: 1.0f64,
            gain_dbi: 2.0,
            path_loss_db: 3.0,
            rx_dbm: -4.0,
            inr_db: 5.0,
        };
        assert_eq!(
            format_interference_report(&[e]),
            "sector,distance_km,gain_dbi,path_loss_db,rx_dbm,inr_db\nS/0,1.0000,2.0000,3.0000,-4.0000,5.0000\n"
        );
    }

    proptest! {
        #[test]
        fn path_loss_is_monotone(a in 0.001f64..50.0, b in 0.001f64..50.0, n in 2.0f64..6.0) {
            let m = PathLossModel { exponent: n, ..PathLossModel::default() };
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(path_loss(&m, lo).unwrap() <= path_loss(&m, hi).unwrap());
        }

        #[test]
        fn inr_falls_with_exponent(n in 2.0f64..5.5, bump in 0.01f64..0.5) {
            let layout = table1();
            let a = assign_segments(&layout);
            let ms = point_on_boresight(&layout, "Site 5/0", 0.5).unwrap();
            let run = |e: f64| {
                let m = PathLossModel { exponent: e, ..PathLossModel::default() };
                interference_profile(&layout, &a, &AntennaPattern::<f64>::default(), &m, "Site 5/0", ms, &LinkBudget::default()).unwrap()
            };
            let low = run(n);
            let high = run(n + bump);
            for e in &low {
                let h = high.iter().find(|x| x.sector == e.sector).unwrap();
                prop_assert!(h.inr_db < e.inr_db);
            }
        }
    }
}
