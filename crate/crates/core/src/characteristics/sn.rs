use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use crate::error::{EglError, Result};
use crate::evolution::Checkpoint;
use crate::initial_data::SaddleFrame;
use crate::polyline::{shoelace, Polyline};
use crate::spectral::{refine_evaluate, GridField};

use super::clip::{clip_to_box, AbBox};
use super::contour::{extract_level_curve_refined, AbWindow};

pub const SN_LEVEL: f64 = 3.0;
pub const BOX_BETA_HALF: f64 = 0.1;
const PIXEL_SUPERSAMPLING: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnFlag {
    /// No level curve crosses the window.
    NoCurve,
    /// The frame center is not in the superlevel set.
    CenterOutside,
    /// Several loops enclose the center; the largest was used.
    Ambiguous,
}

impl fmt::Display for SnFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnFlag::NoCurve => "no_curve",
            SnFlag::CenterOutside => "center_outside",
            SnFlag::Ambiguous => "ambiguous",
        })
    }
}

/// Areas of the superlevel component around a saddle, clipped to `B_{3ε}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SnRecord {
    pub n: usize,
    pub t: f64,
    pub area_sn: f64,
    /// Part of `area_sn` with `|α| > 2ε`.
    pub area_sn2: f64,
    pub eps_box: f64,
    pub grad_sup: f64,
    pub flags: Vec<SnFlag>,
    /// Independent pixel-count estimates of the two areas.
    pub pixel_area_sn: f64,
    pub pixel_area_sn2: f64,
    /// `|S Δ (−S)| / |S|` from the pixel mask, reflection through the center.
    pub symmetry_mismatch: f64,
    pub loops: usize,
}

impl SnRecord {
    pub fn flags_label(&self) -> String {
        if self.flags.is_empty() {
            "ok".into()
        } else {
            self.flags.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("|")
        }
    }

    pub fn pixel_relative_difference(&self) -> f64 {
        let scale = self.area_sn.max(self.pixel_area_sn);
        if scale == 0.0 {
            0.0
        } else {
            (self.area_sn - self.pixel_area_sn).abs() / scale
        }
    }
}

/// Pixel-count view of the component through the frame center.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelComponent {
    pub center_inside: bool,
    pub area: f64,
    pub area_outer: f64,
    pub symmetry_mismatch: f64,
}

#[inline]
fn bilinear(fine: &GridField, p: [f64; 2]) -> f64 {
    let m = fine.n() as i64;
    let inv_h = 1.0 / fine.spacing();
    let (gx, gy) = (p[0] * inv_h, p[1] * inv_h);
    let (fx, fy) = (gx.floor(), gy.floor());
    let (sx, sy) = (gx - fx, gy - fy);
    let (i, j) = (fx as i64, fy as i64);
    let at = |a: i64, b: i64| fine.get(a.rem_euclid(m) as usize, b.rem_euclid(m) as usize);
    (1.0 - sy) * ((1.0 - sx) * at(i, j) + sx * at(i + 1, j))
        + sy * ((1.0 - sx) * at(i, j + 1) + sx * at(i + 1, j + 1))
}

/// Fraction of the pixel `[(k − ½)s, (k + ½)s]` lying in `|x| ≤ half`.
#[inline]
fn coverage(k: i64, s: f64, half: f64) -> f64 {
    let lo = (k.abs() as f64 - 0.5) * s;
    ((half - lo) / s).clamp(0.0, 1.0)
}

/// Flood-fills `{θ ≥ level} ∩ B` from the frame center on a supersampled
/// `(α, β)` pixel lattice, with fractional coverage at the box edges.
pub fn pixel_component(fine: &GridField, frame: &SaddleFrame, b: AbBox, inner_alpha: f64, level: f64) -> PixelComponent {
    let s = fine.spacing() / PIXEL_SUPERSAMPLING * std::f64::consts::FRAC_1_SQRT_2;
    let ka = (b.alpha_half / s + 0.5).ceil() as i64;
    let kb = (b.beta_half / s + 0.5).ceil() as i64;
    let (wa, wb) = ((2 * ka + 1) as usize, (2 * kb + 1) as usize);
    let idx = |k: i64, l: i64| (l + kb) as usize * wa + (k + ka) as usize;
    let mut mask = vec![false; wa * wb];
    for l in -kb..=kb {
        for k in -ka..=ka {
            if coverage(k, s, b.alpha_half) > 0.0 && coverage(l, s, b.beta_half) > 0.0 {
                let p = frame.from_alpha_beta([k as f64 * s, l as f64 * s]);
                mask[idx(k, l)] = bilinear(fine, p) >= level;
            }
        }
    }
    let mut comp = vec![false; wa * wb];
    let center_inside = mask[idx(0, 0)];
    if center_inside {
        let mut queue = VecDeque::from([(0i64, 0i64)]);
        comp[idx(0, 0)] = true;
        while let Some((k, l)) = queue.pop_front() {
            for (dk, dl) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (k2, l2) = (k + dk, l + dl);
                if k2.abs() > ka || l2.abs() > kb {
                    continue;
                }
                let id = idx(k2, l2);
                if mask[id] && !comp[id] {
                    comp[id] = true;
                    queue.push_back((k2, l2));
                }
            }
        }
    }
    let cell = s * s;
    let (mut area, mut inner, mut mismatch) = (0.0, 0.0, 0.0);
    for l in -kb..=kb {
        let wl = coverage(l, s, b.beta_half);
        for k in -ka..=ka {
            let here = comp[idx(k, l)];
            let w = coverage(k, s, b.alpha_half) * wl * cell;
            if here {
                area += w;
                inner += coverage(k, s, inner_alpha) * wl * cell;
            }
            if here != comp[idx(-k, -l)] {
                mismatch += w;
            }
        }
    }
    PixelComponent {
        center_inside,
        area,
        area_outer: (area - inner).max(0.0),
        symmetry_mismatch: if area > 0.0 { 0.5 * mismatch / area } else { 0.0 },
    }
}

/// Builds one record from a factor-4 refined field.
pub fn sn_record(n: usize, t: f64, fine: &GridField, frame: &SaddleFrame, eps: f64, level: f64, grad_sup: f64) -> SnRecord {
    let outer = AbBox {
        alpha_half: 3.0 * eps,
        beta_half: BOX_BETA_HALF,
    };
    let inner = AbBox {
        alpha_half: 2.0 * eps,
        beta_half: BOX_BETA_HALF,
    };
    let margin = 4.0 * fine.spacing();
    let window = AbWindow::centered(*frame, outer.alpha_half + margin, outer.beta_half + margin);
    let loops = extract_level_curve_refined(fine, level, &window);
    let px = pixel_component(fine, frame, outer, inner.alpha_half, level);

    let mut flags = Vec::new();
    let containing: Vec<&Polyline> = loops.iter().filter(|l| l.contains([0.0, 0.0])).collect();
    let chosen = if loops.is_empty() {
        flags.push(SnFlag::NoCurve);
        None
    } else if !px.center_inside || containing.is_empty() {
        flags.push(SnFlag::CenterOutside);
        None
    } else {
        if containing.len() > 1 {
            flags.push(SnFlag::Ambiguous);
        }
        containing
            .into_iter()
            .max_by(|a, b| a.area().total_cmp(&b.area()))
    };
    let (area_sn, area_sn2) = match chosen {
        Some(l) => {
            let a = shoelace(&clip_to_box(l.vertices(), outer)).abs();
            let a1 = shoelace(&clip_to_box(l.vertices(), inner)).abs();
            (a, (a - a1).max(0.0))
        }
        None => (0.0, 0.0),
    };
    SnRecord {
        n,
        t,
        area_sn,
        area_sn2,
        eps_box: eps,
        grad_sup,
        flags,
        pixel_area_sn: px.area,
        pixel_area_sn2: px.area_outer,
        symmetry_mismatch: px.symmetry_mismatch,
        loops: loops.len(),
    }
}

/// Area bookkeeping at every checkpoint with integer time.
pub fn sn_accounting(run: &[Checkpoint], frame: &SaddleFrame, eps: f64) -> Result<Vec<SnRecord>> {
    if !(eps > 0.0 && eps <= 0.02) {
        return Err(EglError::InvalidParameter(format!(
            "box parameter must lie in (0, 0.02], got {eps}"
        )));
    }
    let mut out = Vec::new();
    for c in run {
        let r = c.t.round();
        if (c.t - r).abs() > 1e-9 || r < 0.0 {
            continue;
        }
        let fine = refine_evaluate(&c.field, 4)?;
        out.push(sn_record(r as usize, c.t, &fine, frame, eps, SN_LEVEL, c.diagnostics.grad_sup));
    }
    Ok(out)
}

pub fn sn_accounting_csv(records: &[SnRecord]) -> String {
    let mut s = String::from("n,area_Sn,area_Sn2,grad_sup,flags\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{}",
            r.n,
            r.area_sn,
            r.area_sn2,
            r.grad_sup,
            r.flags_label()
        );
    }
    s
}

pub fn sn_crosscheck_csv(records: &[SnRecord]) -> String {
    let mut s = String::from(
        "n,t,area_Sn,pixel_area_Sn,relative_difference,area_Sn2,pixel_area_Sn2,symmetry_mismatch,loops,eps_box\n",
    );
    for r in records {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            r.n,
            r.t,
            r.area_sn,
            r.pixel_area_sn,
            r.pixel_relative_difference(),
            r.area_sn2,
            r.pixel_area_sn2,
            r.symmetry_mismatch,
            r.loops,
            r.eps_box
        );
    }
    s
}
