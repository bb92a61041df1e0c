//! Domain masks: Dirichlet geometry flags on a finite-difference lattice.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

/// Finite-difference lattice: points `x_i = i h` per axis, boundary
/// included. Unlike the spectral grid this one is not periodic and its
/// point count is unconstrained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    dim: usize,
    points_per_axis: usize,
    spacing: f64,
}

impl Lattice {
    pub fn new(dim: usize, points_per_axis: usize, spacing: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if points_per_axis < 8 {
            return Err(Error::InvalidGrid("need at least 8 points per axis".into()));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidGrid("spacing must be positive".into()));
        }
        Ok(Lattice {
            dim,
            points_per_axis,
            spacing,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Physical box side `(N-1) h`.
    pub fn side(&self) -> f64 {
        (self.points_per_axis - 1) as f64 * self.spacing
    }

    pub fn total_points(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    #[inline]
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let n = self.points_per_axis;
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % n;
            flat /= n;
        }
        idx
    }

    #[inline]
    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        let mut flat = 0usize;
        for axis in 0..self.dim {
            flat = flat * self.points_per_axis + idx[axis];
        }
        flat
    }

    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = idx[axis] as f64 * self.spacing;
        }
        x
    }

    pub fn center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for axis in 0..self.dim {
            c[axis] = self.side() / 2.0;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFlag {
    Interior,
    Dirichlet,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskKind {
    Box,
    BoxMinusBall { radius: f64 },
    Annulus { r_inner: f64, r_outer: f64 },
}

/// Lattice index box (used for the compact set K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexBox {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl IndexBox {
    pub fn contains(&self, idx: [usize; 3], dim: usize) -> bool {
        (0..dim).all(|a| idx[a] >= self.lo[a] && idx[a] <= self.hi[a])
    }

    pub fn sides(&self, dim: usize) -> [usize; 3] {
        let mut s = [1usize; 3];
        for a in 0..dim {
            s[a] = self.hi[a] - self.lo[a] + 1;
        }
        s
    }
}

/// Geometry flags plus the compact set K used by localized norms.
#[derive(Debug, Clone)]
pub struct DomainMask {
    pub lattice: Lattice,
    pub kind: MaskKind,
    flags: Vec<CellFlag>,
    pub obstacle: Option<([f64; 3], f64)>,
    pub k_box: IndexBox,
}

impl DomainMask {
    pub fn flags(&self) -> &[CellFlag] {
        &self.flags
    }

    #[inline]
    pub fn flag(&self, flat: usize) -> CellFlag {
        self.flags[flat]
    }

    pub fn interior_count(&self) -> usize {
        self.flags.iter().filter(|f| **f == CellFlag::Interior).count()
    }

    pub fn is_bounded_kind(&self) -> bool {
        matches!(self.kind, MaskKind::Box | MaskKind::Annulus { .. })
    }

    /// Pre-reflection horizon for far-field experiments on the exterior
    /// proxy: `(box/4)^2 / (4 nu)`.
    pub fn pre_reflection_horizon(&self, nu: f64) -> f64 {
        let quarter = self.lattice.side() / 4.0;
        quarter * quarter / (4.0 * nu)
    }

    /// Distance from a point to the obstacle surface (f64::INFINITY when
    /// there is no obstacle).
    pub fn obstacle_distance(&self, x: &[f64; 3]) -> f64 {
        match self.obstacle {
            None => f64::INFINITY,
            Some((c, r)) => {
                let mut d2 = 0.0;
                for a in 0..self.lattice.dim() {
                    d2 += (x[a] - c[a]) * (x[a] - c[a]);
                }
                d2.sqrt() - r
            }
        }
    }

    /// `L_p` norm over the domain (exterior cells excluded).
    pub fn domain_lp(&self, values: &[f64], p: f64) -> f64 {
        debug_assert_eq!(values.len(), self.flags.len());
        if p.is_infinite() {
            return values
                .iter()
                .zip(self.flags.iter())
                .filter(|(_, f)| **f != CellFlag::Exterior)
                .fold(0.0f64, |m, (&v, _)| m.max(v.abs()));
        }
        let mut acc = 0.0;
        for (&v, f) in values.iter().zip(self.flags.iter()) {
            if *f != CellFlag::Exterior {
                acc += pow_p(v, p);
            }
        }
        (acc * self.lattice.cell_volume()).powf(1.0 / p)
    }

    /// `L_p` norm restricted to the compact set K.
    pub fn k_lp(&self, values: &[f64], p: f64) -> f64 {
        let dim = self.lattice.dim();
        if p.is_infinite() {
            let mut m = 0.0f64;
            for (flat, &v) in values.iter().enumerate() {
                if self.flags[flat] != CellFlag::Exterior
                    && self.k_box.contains(self.lattice.unravel(flat), dim)
                {
                    m = m.max(v.abs());
                }
            }
            return m;
        }
        let mut acc = 0.0;
        for (flat, &v) in values.iter().enumerate() {
            if self.flags[flat] != CellFlag::Exterior
                && self.k_box.contains(self.lattice.unravel(flat), dim)
            {
                acc += pow_p(v, p);
            }
        }
        (acc * self.lattice.cell_volume()).powf(1.0 / p)
    }

    /// Face neighbors of a lattice point.
    pub fn neighbors(&self, flat: usize) -> impl Iterator<Item = usize> + '_ {
        let idx = self.lattice.unravel(flat);
        let n = self.lattice.points_per_axis();
        (0..self.lattice.dim()).flat_map(move |axis| {
            let mut out = Vec::with_capacity(2);
            if idx[axis] > 0 {
                let mut j = idx;
                j[axis] -= 1;
                out.push(self.lattice.ravel(j));
            }
            if idx[axis] + 1 < n {
                let mut j = idx;
                j[axis] += 1;
                out.push(self.lattice.ravel(j));
            }
            out
        })
    }
}

fn pow_p(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

/// Build a mask with the staircase-boundary rule: any non-interior cell
/// face-adjacent to an interior cell becomes Dirichlet, so every interior
/// cell sees only interior or Dirichlet neighbors.
pub fn build_mask(kind: MaskKind, lattice: Lattice) -> Result<DomainMask> {
    let total = lattice.total_points();
    let n = lattice.points_per_axis();
    let dim = lattice.dim();
    let center = lattice.center();
    let dist = |flat: usize| -> f64 {
        let x = lattice.coords(flat);
        let mut d2 = 0.0;
        for a in 0..dim {
            d2 += (x[a] - center[a]) * (x[a] - center[a]);
        }
        d2.sqrt()
    };
    let on_box_boundary = |flat: usize| -> bool {
        let idx = lattice.unravel(flat);
        (0..dim).any(|a| idx[a] == 0 || idx[a] == n - 1)
    };

    let mut obstacle = None;
    let mut flags: Vec<CellFlag> = match kind {
        MaskKind::Box => (0..total)
            .map(|flat| {
                if on_box_boundary(flat) {
                    CellFlag::Dirichlet
                } else {
                    CellFlag::Interior
                }
            })
            .collect(),
        MaskKind::BoxMinusBall { radius } => {
            let margin = lattice.side() / 2.0 - radius;
            let required = lattice.side() / 4.0;
            if margin < required {
                return Err(Error::InsufficientFarFieldMargin { margin, required });
            }
            obstacle = Some((center, radius));
            (0..total)
                .map(|flat| {
                    if dist(flat) <= radius {
                        CellFlag::Exterior
                    } else if on_box_boundary(flat) {
                        CellFlag::Dirichlet
                    } else {
                        CellFlag::Interior
                    }
                })
                .collect()
        }
        MaskKind::Annulus { r_inner, r_outer } => {
            if !(0.0 < r_inner && r_inner < r_outer && r_outer < lattice.side() / 2.0) {
                return Err(Error::InvalidGrid("annulus radii out of range".into()));
            }
            obstacle = Some((center, r_inner));
            (0..total)
                .map(|flat| {
                    let d = dist(flat);
                    if d > r_inner && d < r_outer && !on_box_boundary(flat) {
                        CellFlag::Interior
                    } else {
                        CellFlag::Exterior
                    }
                })
                .collect()
        }
    };

    // Staircase Dirichlet layer.
    let mask_tmp = DomainMask {
        lattice,
        kind,
        flags: flags.clone(),
        obstacle,
        k_box: IndexBox { lo: [0; 3], hi: [0; 3] },
    };
    for flat in 0..total {
        if flags[flat] == CellFlag::Exterior
            && mask_tmp
                .neighbors(flat)
                .any(|nb| flags[nb] == CellFlag::Interior)
        {
            flags[flat] = CellFlag::Dirichlet;
        }
    }

    // K: obstacle-centered sub-box of side twice the obstacle diameter,
    // clipped to the lattice; the center half-box when there is no
    // obstacle (the whole-box control case).
    let h = lattice.spacing();
    let k_box = match obstacle {
        Some((c, r)) => {
            let half = 2.0 * r;
            let mut lo = [0usize; 3];
            let mut hi = [0usize; 3];
            for a in 0..dim {
                lo[a] = (((c[a] - half) / h).ceil().max(0.0)) as usize;
                hi[a] = (((c[a] + half) / h).floor() as usize).min(n - 1);
            }
            IndexBox { lo, hi }
        }
        None => {
            let mut lo = [0usize; 3];
            let mut hi = [0usize; 3];
            for a in 0..dim {
                lo[a] = n / 4;
                hi[a] = 3 * n / 4;
            }
            IndexBox { lo, hi }
        }
    };

    Ok(DomainMask {
        lattice,
        kind,
        flags,
        obstacle,
        k_box,
    })
}

/// Plain-text mask serialization: header lines then run-length-encoded
/// flags, one `count code` pair per line.
pub fn write_mask(mask: &DomainMask, w: &mut impl Write) -> Result<()> {
    let (kind, params) = match mask.kind {
        MaskKind::Box => ("box".to_string(), String::new()),
        MaskKind::BoxMinusBall { radius } => {
            ("box_minus_ball".to_string(), format!("radius {radius}"))
        }
        MaskKind::Annulus { r_inner, r_outer } => {
            ("annulus".to_string(), format!("r_inner {r_inner} r_outer {r_outer}"))
        }
    };
    writeln!(w, "kind {kind}")?;
    writeln!(w, "dim {}", mask.lattice.dim())?;
    writeln!(w, "points {}", mask.lattice.points_per_axis())?;
    writeln!(w, "spacing {}", mask.lattice.spacing())?;
    if !params.is_empty() {
        writeln!(w, "{params}")?;
    }
    writeln!(w, "flags")?;
    let code = |f: CellFlag| match f {
        CellFlag::Interior => 'I',
        CellFlag::Dirichlet => 'D',
        CellFlag::Exterior => 'E',
    };
    let mut run = (mask.flags[0], 0usize);
    for &f in &mask.flags {
        if f == run.0 {
            run.1 += 1;
        } else {
            writeln!(w, "{} {}", run.1, code(run.0))?;
            run = (f, 1);
        }
    }
    writeln!(w, "{} {}", run.1, code(run.0))?;
    Ok(())
}

pub fn read_mask(r: &mut impl BufRead) -> Result<DomainMask> {
    let mut lines = r.lines();
    let mut header = std::collections::BTreeMap::new();
    let mut kind_name = String::new();
    loop {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format("truncated mask header".into()))??;
        let line = line.trim().to_string();
        if line == "flags" {
            break;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("kind") => {
                kind_name = parts
                    .next()
                    .ok_or_else(|| Error::Format("missing kind".into()))?
                    .to_string();
            }
            Some(key) => {
                let mut key = key.to_string();
                loop {
                    let value: f64 = parts
                        .next()
                        .ok_or_else(|| Error::Format(format!("missing value for {key}")))?
                        .parse()
                        .map_err(|e| Error::Format(format!("bad number for {key}: {e}")))?;
                    header.insert(key.clone(), value);
                    match parts.next() {
                        Some(k) => key = k.to_string(),
                        None => break,
                    }
                }
            }
            None => {}
        }
    }
    let get = |k: &str| -> Result<f64> {
        header
            .get(k)
            .copied()
            .ok_or_else(|| Error::Format(format!("missing header field {k}")))
    };
    let lattice = Lattice::new(get("dim")? as usize, get("points")? as usize, get("spacing")?)?;
    let kind = match kind_name.as_str() {
        "box" => MaskKind::Box,
        "box_minus_ball" => MaskKind::BoxMinusBall { radius: get("radius")? },
        "annulus" => MaskKind::Annulus {
            r_inner: get("r_inner")?,
            r_outer: get("r_outer")?,
        },
        other => return Err(Error::Format(format!("unknown mask kind {other}"))),
    };
    let mask = build_mask(kind, lattice)?;
    // Validate the stored flags against the rebuilt geometry.
    let mut stored = Vec::with_capacity(mask.flags.len());
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let count: usize = parts
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| Error::Format("bad RLE count".into()))?;
        let flag = match parts.next() {
            Some("I") => CellFlag::Interior,
            Some("D") => CellFlag::Dirichlet,
            Some("E") => CellFlag::Exterior,
            other => return Err(Error::Format(format!("bad RLE code {other:?}"))),
        };
        stored.extend(std::iter::repeat(flag).take(count));
    }
    if stored != mask.flags {
        return Err(Error::Format("stored flags disagree with geometry".into()));
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_1d_interior_except_endpoints() {
        let lattice = Lattice::new(1, 200, 1.0 / 199.0).unwrap();
        let mask = build_mask(MaskKind::Box, lattice).unwrap();
        assert_eq!(mask.interior_count(), 198);
        assert_eq!(mask.flag(0), CellFlag::Dirichlet);
        assert_eq!(mask.flag(199), CellFlag::Dirichlet);
    }

    #[test]
    fn ball_volume_matches_continuum() {
        let lattice = Lattice::new(3, 48, 0.25).unwrap();
        let radius = 6.0 * 0.25; // N/8 cells
        let mask = build_mask(MaskKind::BoxMinusBall { radius }, lattice).unwrap();
        let cell = lattice.cell_volume();
        // Interior candidates span (N-2) cells per axis; the discretized
        // ball and its one-cell Dirichlet staircase carve the rest.
        let inner = (lattice.points_per_axis() - 2) as f64 * lattice.spacing();
        let ball_volume = 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
        let covered = mask.interior_count() as f64 * cell;
        let expected = inner.powi(3) - ball_volume;
        let rel = (covered / expected - 1.0).abs();
        assert!(rel < 0.02, "interior volume off by {rel}");
    }

    #[test]
    fn interior_cells_never_touch_exterior() {
        let lattice = Lattice::new(2, 64, 0.1).unwrap();
        let mask = build_mask(MaskKind::BoxMinusBall { radius: 0.8 }, lattice).unwrap();
        for flat in 0..lattice.total_points() {
            if mask.flag(flat) == CellFlag::Interior {
                for nb in mask.neighbors(flat) {
                    assert_ne!(mask.flag(nb), CellFlag::Exterior, "interior touches exterior");
                }
            }
        }
        // K is centered on the obstacle with positive margin to the boundary.
        let (c, r) = mask.obstacle.unwrap();
        let dim = lattice.dim();
        for flat in 0..lattice.total_points() {
            if mask.flag(flat) == CellFlag::Dirichlet && mask.obstacle_distance(&lattice.coords(flat)) < 0.0 {
                // Obstacle boundary cells must sit inside K.
                assert!(mask.k_box.contains(lattice.unravel(flat), dim));
            }
        }
        let _ = (c, r);
    }

    #[test]
    fn obstacle_margin_enforced() {
        let lattice = Lattice::new(2, 64, 0.1).unwrap();
        // side = 6.3; radius 2.0 leaves margin 1.15 < side/4 = 1.575.
        assert!(matches!(
            build_mask(MaskKind::BoxMinusBall { radius: 2.0 }, lattice),
            Err(Error::InsufficientFarFieldMargin { .. })
        ));
    }

    #[test]
    fn annulus_flags_consistent() {
        let lattice = Lattice::new(2, 96, 1.0 / 95.0).unwrap();
        let mask = build_mask(
            MaskKind::Annulus { r_inner: 0.15, r_outer: 0.45 },
            lattice,
        )
        .unwrap();
        assert!(mask.interior_count() > 0);
        for flat in 0..lattice.total_points() {
            if mask.flag(flat) == CellFlag::Interior {
                for nb in mask.neighbors(flat) {
                    assert_ne!(mask.flag(nb), CellFlag::Exterior);
                }
            }
        }
    }

    #[test]
    fn mask_roundtrip() {
        let lattice = Lattice::new(2, 48, 0.25).unwrap();
        let mask = build_mask(MaskKind::BoxMinusBall { radius: 1.5 }, lattice).unwrap();
        let mut buf = Vec::new();
        write_mask(&mask, &mut buf).unwrap();
        let back = read_mask(&mut std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.flags(), mask.flags());
        assert_eq!(back.kind, mask.kind);
    }
}
