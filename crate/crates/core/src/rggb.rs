//! RGB to RGGB patch reformulation and patch groups.

use crate::error::{Error, Result};
use crate::image::{extract_unchecked, Image, Patch, PatchRef};

/// Channel indices of the reformulated layout.
pub const R: usize = 0;
pub const G1: usize = 1;
pub const G2: usize = 2;
pub const B: usize = 3;

/// A `ps x ps x 4` patch in `[R, G, G, B]` channel order.
#[derive(Clone, Debug, PartialEq)]
pub struct RggbPatch(Patch);

impl RggbPatch {
    pub fn new(patch: Patch) -> Result<Self> {
        if patch.channels() != 4 {
            return Err(Error::Shape(format!(
                "RGGB patch needs 4 channels, got {}",
                patch.channels()
            )));
        }
        Ok(RggbPatch(patch))
    }

    pub fn side(&self) -> usize {
        self.0.side()
    }

    pub fn data(&self) -> &[f64] {
        self.0.data()
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        self.0.plane(c)
    }

    pub fn as_patch(&self) -> &Patch {
        &self.0
    }

    pub fn into_patch(self) -> Patch {
        self.0
    }
}

pub fn rgb_to_rggb(patch: &Patch) -> Result<RggbPatch> {
    if patch.channels() != 3 {
        return Err(Error::Shape(format!(
            "RGB patch needs 3 channels, got {}",
            patch.channels()
        )));
    }
    let n = patch.side() * patch.side();
    let mut data = Vec::with_capacity(4 * n);
    data.extend_from_slice(patch.plane(0));
    data.extend_from_slice(patch.plane(1));
    data.extend_from_slice(patch.plane(1));
    data.extend_from_slice(patch.plane(2));
    Ok(RggbPatch(Patch::new(patch.side(), 4, data)?))
}

/// Folds the two green planes back into one by averaging them.
pub fn rggb_to_rgb(patch: &RggbPatch) -> Patch {
    let n = patch.side() * patch.side();
    let mut data = Vec::with_capacity(3 * n);
    data.extend_from_slice(patch.plane(R));
    data.extend(
        patch
            .plane(G1)
            .iter()
            .zip(patch.plane(G2))
            .map(|(a, b)| 0.5 * (a + b)),
    );
    data.extend_from_slice(patch.plane(B));
    Patch::new(patch.side(), 3, data).expect("3-plane patch")
}

/// `K` reformulated patches stacked along a fourth mode.
///
/// Layout is `[member][channel][row][col]`; `members[0]` is the reference.
#[derive(Clone, Debug, PartialEq)]
pub struct RggbGroup {
    side: usize,
    members: Vec<PatchRef>,
    data: Vec<f64>,
}

impl RggbGroup {
    /// Stacks RGGB reformulations of the given 3-channel patches.
    pub fn from_frames(frames: &[Image], members: Vec<PatchRef>, side: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Shape("group needs at least one member".into()));
        }
        let n = side * side;
        let mut data = Vec::with_capacity(members.len() * 4 * n);
        for m in &members {
            let img = frames.get(m.frame).ok_or_else(|| {
                Error::Shape(format!("member frame {} out of range", m.frame))
            })?;
            if img.channels() != 3 {
                return Err(Error::Shape("group members must be RGB".into()));
            }
            m.check(img.height(), img.width(), side)?;
            let p = extract_unchecked(img, m.row, m.col, side);
            data.extend_from_slice(p.plane(0));
            data.extend_from_slice(p.plane(1));
            data.extend_from_slice(p.plane(1));
            data.extend_from_slice(p.plane(2));
        }
        Ok(RggbGroup {
            side,
            members,
            data,
        })
    }

    pub fn from_image(img: &Image, members: Vec<PatchRef>, side: usize) -> Result<Self> {
        Self::from_frames(std::slice::from_ref(img), members, side)
    }

    /// Builds a group directly from RGGB patches; members are given
    /// placeholder coordinates when none are supplied.
    pub fn from_patches(patches: &[RggbPatch], members: Option<Vec<PatchRef>>) -> Result<Self> {
        let first = patches
            .first()
            .ok_or_else(|| Error::Shape("group needs at least one member".into()))?;
        let side = first.side();
        if patches.iter().any(|p| p.side() != side) {
            return Err(Error::Shape("group patches differ in size".into()));
        }
        let members = members.unwrap_or_else(|| vec![PatchRef::new(0, 0); patches.len()]);
        if members.len() != patches.len() {
            return Err(Error::Shape("member count differs from patch count".into()));
        }
        let data = patches.iter().flat_map(|p| p.data().iter().copied()).collect();
        Ok(RggbGroup {
            side,
            members,
            data,
        })
    }

    pub(crate) fn from_raw(side: usize, members: Vec<PatchRef>, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), members.len() * 4 * side * side);
        RggbGroup {
            side,
            members,
            data,
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[PatchRef] {
        &self.members
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn member_data(&self, k: usize) -> &[f64] {
        let n = 4 * self.side * self.side;
        &self.data[k * n..(k + 1) * n]
    }

    pub fn member(&self, k: usize) -> RggbPatch {
        RggbPatch(
            Patch::new(self.side, 4, self.member_data(k).to_vec()).expect("member slice"),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
