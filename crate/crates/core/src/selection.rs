//! Maximum-elevation satellite selection for multi-antenna gateways and
//! link-continuity tracking across slots.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::scenario::{elevation_unchecked, GatewayStation, Vec3};
use crate::{Result, SatId};

/// One gateway antenna and the satellite it serves (`None` = vacant antenna, a VIRTUAL vertex).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkEntry {
    pub gateway_id: u32,
    /// Position of the gateway in the ascending-id turn order.
    pub gateway_index: usize,
    pub antenna: usize,
    pub sat: Option<SatId>,
    pub elevation_deg: Option<f64>,
}

impl LinkEntry {
    pub fn is_virtual(&self) -> bool {
        self.sat.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkAssignment {
    pub slot: usize,
    /// Ordered by gateway id, then antenna index.
    pub entries: Vec<LinkEntry>,
    pub working_set: BTreeSet<SatId>,
}

impl LinkAssignment {
    /// Serving gateway of each working satellite.
    pub fn serving_gateway(&self) -> BTreeMap<SatId, u32> {
        self.entries
            .iter()
            .filter_map(|e| e.sat.map(|s| (s, e.gateway_id)))
            .collect()
    }

    pub fn num_real(&self) -> usize {
        self.working_set.len()
    }
}

/// Round-robin maximum-elevation selection.
///
/// Gateways take turns in ascending id order, filling one antenna per turn with
/// the highest-elevation unassigned satellite at or above `threshold_deg`
/// (ties go to the smaller satellite id). A gateway that has no candidate left
/// stops taking turns; its remaining antennas stay vacant.
pub fn select_satellites(
    sat_positions: &[Vec3],
    gateways: &[GatewayStation],
    gateway_positions: &[Vec3],
    slot: usize,
    threshold_deg: f64,
) -> LinkAssignment {
    let mut order: Vec<usize> = (0..gateways.len()).collect();
    order.sort_by_key(|&i| gateways[i].id);

    // per-gateway candidate lists, best first
    let candidates: Vec<Vec<(f64, SatId)>> = order
        .iter()
        .map(|&gi| {
            let gp = &gateway_positions[gi];
            let up = gp.normalize();
            let min_sin = threshold_deg.to_radians().sin();
            let mut list: Vec<(f64, SatId)> = sat_positions
                .iter()
                .enumerate()
                .filter_map(|(s, p)| {
                    let los = p - gp;
                    // cheap rejection before the trig
                    if los.dot(&up) < min_sin * los.norm() - 1e-6 {
                        return None;
                    }
                    let el = elevation_unchecked(gp, p);
                    (el >= threshold_deg).then_some((el, SatId(s as u32)))
                })
                .collect();
            list.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            list
        })
        .collect();

    let mut taken = BTreeSet::new();
    let mut cursor = vec![0usize; order.len()];
    let mut picks: Vec<Vec<(SatId, f64)>> = vec![Vec::new(); order.len()];
    loop {
        let mut progress = false;
        for (k, &gi) in order.iter().enumerate() {
            if picks[k].len() >= gateways[gi].n_antennas as usize {
                continue;
            }
            let list = &candidates[k];
            while cursor[k] < list.len() && taken.contains(&list[cursor[k]].1) {
                cursor[k] += 1;
            }
            if let Some(&(el, sat)) = list.get(cursor[k]) {
                taken.insert(sat);
                picks[k].push((sat, el));
                cursor[k] += 1;
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }

    let mut entries = Vec::new();
    for (k, &gi) in order.iter().enumerate() {
        let g = &gateways[gi];
        for antenna in 0..g.n_antennas as usize {
            let pick = picks[k].get(antenna);
            entries.push(LinkEntry {
                gateway_id: g.id,
                gateway_index: k,
                antenna,
                sat: pick.map(|p| p.0),
                elevation_deg: pick.map(|p| p.1),
            });
        }
    }
    LinkAssignment {
        slot,
        entries,
        working_set: taken,
    }
}

/// `m_c(s, t)` for the working satellites of the current slot, plus `S_c(t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContinuityMask {
    pub m_c: BTreeMap<SatId, bool>,
    pub constrained: BTreeSet<SatId>,
}

impl ContinuityMask {
    pub fn is_constrained(&self, sat: SatId) -> bool {
        self.constrained.contains(&sat)
    }
}

/// Satellites served by the same gateway in the previous and current slot.
/// With no previous slot the constrained set is empty.
pub fn continuity_mask(prev: Option<&LinkAssignment>, cur: &LinkAssignment) -> ContinuityMask {
    let before = prev.map(LinkAssignment::serving_gateway).unwrap_or_default();
    let mut mask = ContinuityMask::default();
    for (sat, gw) in cur.serving_gateway() {
        let kept = before.get(&sat) == Some(&gw);
        mask.m_c.insert(sat, kept);
        if kept {
            mask.constrained.insert(sat);
        }
    }
    mask
}

#[derive(Serialize)]
struct AssignmentRow {
    slot: usize,
    gateway: u32,
    antenna: usize,
    sat_id: i64,
    elevation_deg: Option<f64>,
}

/// Write `slot,gateway,antenna,sat_id,elevation_deg` rows; vacant antennas get `sat_id = -1`.
pub fn write_assignments<'a>(
    path: impl AsRef<Path>,
    assignments: impl IntoIterator<Item = &'a LinkAssignment>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for a in assignments {
        for e in &a.entries {
            w.serialize(AssignmentRow {
                slot: a.slot,
                gateway: e.gateway_id,
                antenna: e.antenna,
                sat_id: e.sat.map_or(-1, |s| s.0 as i64),
                elevation_deg: e.elevation_deg,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
